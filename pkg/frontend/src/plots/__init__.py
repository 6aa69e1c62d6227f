from .figures import FIGURE_KINDS, FigureSpec, render
from .reader import SchemaError, load_results, load_trace

__all__ = ["FIGURE_KINDS", "FigureSpec", "render", "SchemaError",
           "load_results", "load_trace"]
