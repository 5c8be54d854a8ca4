"""Static figure rendering for spinbus CSV/JSON artifacts.

Consumes the delimited outputs of the simulator CLI and renders
publication-style plots; it deliberately has no dependency on the
simulator itself.
"""

__version__ = "0.1.0"

from .figures import FIGURES, PlotJob, render
from .tables import SchemaError, load_table

__all__ = ["FIGURES", "PlotJob", "render", "SchemaError", "load_table"]
