"""Exception hierarchy shared by the parser, tape and sweeps."""


class JetError(Exception):
    pass


class ParseError(JetError):
    """Malformed expression text. ``offset`` is a byte offset into the UTF-8 text."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownFunctionError(ParseError):
    pass


class ArityError(ParseError):
    pass


class DomainError(JetError):
    """A primitive was evaluated (or differentiated) outside its domain."""

    def __init__(self, message: str, node: int | None = None):
        where = f" at node {node + 1}" if node is not None else ""
        super().__init__(f"{message}{where}")
        self.node = node


class DimensionError(JetError, ValueError):
    pass


class CycleError(JetError):
    pass
