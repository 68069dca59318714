class JetSSMError(Exception):
    """Base class for every error raised by jetssm."""


class InvalidArgumentError(JetSSMError, ValueError):
    pass


class ShapeError(InvalidArgumentError):
    pass


class ConfigValidationError(InvalidArgumentError):
    """Raised with every violated field at once, not just the first."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class UnsupportedFormatError(JetSSMError):
    def __init__(self, encoding: str, path=None):
        self.encoding = encoding
        where = f" in {path}" if path is not None else ""
        super().__init__(f"unsupported audio encoding {encoding!r}{where}")


class ProfileParseError(JetSSMError, ValueError):
    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        super().__init__(message)


class CheckpointIncompatibleError(JetSSMError):
    def __init__(self, dimension: str, expected, found):
        self.dimension = dimension
        super().__init__(
            f"checkpoint incompatible: {dimension} expected {expected}, found {found}"
        )


class UnsupportedModeError(JetSSMError):
    pass


class TapeStateError(JetSSMError, RuntimeError):
    pass
