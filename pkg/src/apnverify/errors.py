class UsageError(Exception):
    """Malformed input or an operation applied outside its domain. Maps to exit code 2."""


class ParseError(UsageError):
    def __init__(self, line: int, col: int, msg: str):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col
        self.msg = msg


class BoundsExhausted(Exception):
    """A brute-force search hit its candidate cap before finishing. Maps to exit code 3."""

    def __init__(self, examined: int, cap: int, what: str = "candidates"):
        super().__init__(f"candidate cap {cap} reached after examining {examined} {what}")
        self.examined = examined
        self.cap = cap
