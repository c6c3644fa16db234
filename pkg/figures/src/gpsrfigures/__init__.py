"""Figure regeneration for gpsrsim sweep CSVs."""

from .render import CsvFormatError, build_figure, load_aggregates, render_family

__version__ = "0.1.0"

__all__ = ["CsvFormatError", "build_figure", "load_aggregates",
           "render_family", "__version__"]
