"""Exception hierarchy shared by every module.

``ValidationError`` subclasses map to CLI exit code 3, ``IoError`` to 4.
"""


class SegfuseError(Exception):
    exit_code = 1


class ValidationError(SegfuseError):
    exit_code = 3


class DimensionMismatch(ValidationError):
    pass


class ClassOutOfRange(ValidationError):
    pass


class ClassCountMismatch(ValidationError):
    pass


class EmptyMatrix(ValidationError):
    pass


class EmptyStack(ValidationError):
    pass


class MemberShapeMismatch(ValidationError):
    pass


class InvalidFactor(ValidationError):
    pass


class ChannelMismatch(ValidationError):
    pass


class MissingCounterpart(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, reason, line=None, path=None):
        self.reason = reason
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {reason}" if where else reason)


class DuplicateRecord(ParseError):
    pass


class UnknownSplit(ParseError):
    pass


class IoError(SegfuseError):
    exit_code = 4

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{message}: {path}" if path is not None else message)
