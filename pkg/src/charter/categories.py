"""Category tags shared between the generator, oracle, and analysis stages."""

# Heatmap categories (fiducials and non-rectangular elements).
HM_BAR_CORNER_TL = "bar_corner_tl"
HM_BAR_CORNER_TR = "bar_corner_tr"
HM_BAR_CORNER_BL = "bar_corner_bl"
HM_BAR_CORNER_BR = "bar_corner_br"
HM_X_TICK = "x_tick"
HM_Y_TICK = "y_tick"
HM_PIE_CENTER = "pie_center"
HM_PIE_CIRCUMFERENCE = "pie_circumference"
HM_PIE_RADIAL = "pie_radial"
HM_PIE_SECTOR_CORNER = "pie_sector_corner"
HM_LINE_KNEE = "line_knee"
HM_LINE_STROKE = "line_stroke"
HM_SCATTER_DOT = "scatter_dot"

HEATMAP_CATEGORIES = (
    HM_BAR_CORNER_TL,
    HM_BAR_CORNER_TR,
    HM_BAR_CORNER_BL,
    HM_BAR_CORNER_BR,
    HM_X_TICK,
    HM_Y_TICK,
    HM_PIE_CENTER,
    HM_PIE_CIRCUMFERENCE,
    HM_PIE_RADIAL,
    HM_PIE_SECTOR_CORNER,
    HM_LINE_KNEE,
    HM_LINE_STROKE,
    HM_SCATTER_DOT,
)

# Element-level box categories (stage-2 style).
BOX_VBAR = "vertical_bar"
BOX_HBAR = "horizontal_bar"
BOX_PIE_SECTOR = "pie_sector"
ELEMENT_BOX_CATEGORIES = (BOX_VBAR, BOX_HBAR, BOX_PIE_SECTOR)

# Page-level box categories (stage-1 style).
BOX_BAR_CHART = "bar_chart"
BOX_PIE_CHART = "pie_chart"
BOX_LINE_CHART = "line_chart"
BOX_SCATTER_CHART = "scatter_chart"
BOX_LEGEND = "legend"
BOX_TITLE = "title"
BOX_CAPTION = "caption"
BOX_X_LABEL = "x_label"
BOX_Y_LABEL = "y_label"
CHART_REGION_CATEGORIES = (BOX_BAR_CHART, BOX_PIE_CHART, BOX_LINE_CHART, BOX_SCATTER_CHART)
PAGE_BOX_CATEGORIES = CHART_REGION_CATEGORIES + (
    BOX_LEGEND,
    BOX_TITLE,
    BOX_CAPTION,
    BOX_X_LABEL,
    BOX_Y_LABEL,
)

CHART_TYPES = ("vbar", "hbar", "pie", "line", "scatter")

REGION_FOR_TYPE = {
    "vbar": BOX_BAR_CHART,
    "hbar": BOX_BAR_CHART,
    "pie": BOX_PIE_CHART,
    "line": BOX_LINE_CHART,
    "scatter": BOX_SCATTER_CHART,
}

# Heatmap categories that identify a chart type (used for classification
# tie-breaks).
TYPE_EVIDENCE_HEATMAPS = {
    "vbar": (HM_BAR_CORNER_TL, HM_BAR_CORNER_TR, HM_BAR_CORNER_BL, HM_BAR_CORNER_BR),
    "hbar": (HM_BAR_CORNER_TL, HM_BAR_CORNER_TR, HM_BAR_CORNER_BL, HM_BAR_CORNER_BR),
    "pie": (HM_PIE_CENTER, HM_PIE_CIRCUMFERENCE, HM_PIE_RADIAL),
    "line": (HM_LINE_STROKE, HM_LINE_KNEE),
    "scatter": (HM_SCATTER_DOT,),
}
