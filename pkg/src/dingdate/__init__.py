"""Archaeological dating service for bronze Ding vessels.

Pipeline: photo -> preprocess -> classifier forward pass -> top-4 period
decision with a reject threshold -> feature-part boxes -> top-5 similar
reference artifacts.
"""

from dingdate.periods import Dynasty, Phase, Period, PERIODS

__all__ = ["Dynasty", "Phase", "Period", "PERIODS"]

__version__ = "0.1.0"
