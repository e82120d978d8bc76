from .render import DEFAULT_INPUTS, FigureSpec, SchemaError, render

__all__ = ["DEFAULT_INPUTS", "FigureSpec", "SchemaError", "render"]
