"""Exception hierarchy shared by all actrec modules.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""


class ActrecError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ActrecError, ValueError):
    """Invalid parameter, option, or dimension passed by the caller."""


class DataError(ActrecError, ValueError):
    """Problem with an input file or data stream."""

    def __init__(self, message, *, line=None, field=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.field = field


class UnknownLabelError(DataError):
    """A label code with no canonical activity mapping."""


class EmptyInputError(DataError):
    """A dataset file or feature set with no usable rows."""


class ModelFormatError(DataError):
    """A model or HMM file that cannot be parsed (bad magic, schema, truncation)."""


class DivergenceError(ActrecError, RuntimeError):
    """Training produced non-finite values or runaway parameters."""

    def __init__(self, message, *, epoch=None, batch=None):
        context = []
        if epoch is not None:
            context.append(f"epoch {epoch}")
        if batch is not None:
            context.append(f"batch {batch}")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
