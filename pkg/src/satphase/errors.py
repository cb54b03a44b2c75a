"""Exception types shared across the package."""


class UsageError(ValueError):
    """A call violated an operation's preconditions."""


class ParseError(ValueError):
    """Malformed text input; carries the offending line number."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")
