"""Exception hierarchy shared by every module.

The CLI maps ``NidwcaError`` subclasses to exit status 1 and prints
``nidwca-error: <ClassName>: <message>`` on a single line.
"""


class NidwcaError(Exception):
    pass


class UnknownRuleError(NidwcaError, ValueError):
    pass


class DimensionError(NidwcaError, ValueError):
    pass


class DatasetError(NidwcaError, ValueError):
    pass


class ModeError(NidwcaError, ValueError):
    pass


class FormatError(NidwcaError, ValueError):
    """Wrong field count on an input line."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ParseError(FormatError):
    """A field could not be converted to its declared type."""


class UnknownLabelError(NidwcaError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ConfigError(NidwcaError, ValueError):
    pass


class ModelLoadError(NidwcaError):
    pass


class ModelVersionError(ModelLoadError):
    pass


class CorruptModelError(ModelLoadError):
    pass


class SchemaError(ModelLoadError):
    pass


class OutputError(NidwcaError, OSError):
    pass
