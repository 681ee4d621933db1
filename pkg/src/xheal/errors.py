"""Exception hierarchy shared by every xheal module."""


class XhealError(Exception):
    """Base class for all errors raised by this package."""


# graph_core
class DuplicateNode(XhealError, ValueError):
    pass


class UnknownNeighbor(XhealError, KeyError):
    pass


class EmptyNeighborSet(XhealError, ValueError):
    pass


class UnknownNode(XhealError, KeyError):
    pass


class SelfLoop(XhealError, ValueError):
    pass


class DeadEndpoint(XhealError, KeyError):
    pass


class NoSuchEdge(XhealError, KeyError):
    pass


class NoSuchLabel(XhealError, KeyError):
    pass


# hgraph
class EmptyMemberSet(XhealError, ValueError):
    pass


class AlreadyMember(XhealError, ValueError):
    pass


class NotMember(XhealError, KeyError):
    pass


class WouldEmpty(XhealError, ValueError):
    pass


# healer
class UnknownCloud(XhealError, KeyError):
    pass


class NotPrimary(XhealError, ValueError):
    pass


class NotBridge(XhealError, ValueError):
    pass


class NoParticipants(XhealError, ValueError):
    pass


# metrics
class TooLarge(XhealError, ValueError):
    pass


class SingleNode(XhealError, ValueError):
    pass


# adversary
class TraceError(XhealError, ValueError):
    """Malformed or inconsistent adversary trace.

    ``line`` and ``column`` are 1-based; column points at the offending token.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"line {line}" if line is not None else ""
        if column is not None:
            where += f", column {column}"
        super().__init__(f"{where}: {message}" if where else message)


class TraceSyntaxError(TraceError):
    pass


class UnknownNodeReference(TraceError):
    pass


class DuplicateInsert(TraceError):
    pass


class ExhaustedTrace(XhealError, LookupError):
    pass


class EmptyGraph(XhealError, LookupError):
    pass


# harness
class ConfigError(XhealError, ValueError):
    pass


class InvariantViolation(XhealError, AssertionError):
    """A checked guarantee failed; ``snapshot`` holds the offending graph."""

    def __init__(self, message, snapshot=None):
        super().__init__(message)
        self.snapshot = snapshot
