"""Publication-style figures rendered from cmispread CSV outputs."""

__version__ = "0.1.0"

from .figures import FigureSpec, render
from .csvio import CsvFormatError, read_csv

__all__ = ["FigureSpec", "render", "CsvFormatError", "read_csv", "__version__"]
