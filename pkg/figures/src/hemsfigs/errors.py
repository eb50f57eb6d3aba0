"""Exception hierarchy for the figure renderers."""


class FiguresError(Exception):
    """Base class for everything this package raises on purpose."""


class SchemaError(FiguresError):
    """An input file does not have the documented shape (missing columns,
    unknown figure id, unsupported output format)."""


class DataError(FiguresError):
    """The file shape is right but the contents are unusable (no rows,
    non-numeric entries, unexpected labels)."""
