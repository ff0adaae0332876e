"""Exception hierarchy shared by all modules."""


class MafError(Exception):
    """Base class for errors raised by this package."""


class TreeError(MafError, ValueError):
    """Invalid tree, taxon set or taxon reference."""


class NewickError(TreeError):
    """Malformed Newick input.

    ``position`` is the 0-based character offset of the problem in the
    offending line and ``line`` the 1-based line number (when known).
    """

    def __init__(self, message, position=None, line=None):
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class PartitionError(MafError, ValueError):
    """A candidate forest is not a partition of the taxon set."""


class InternalInconsistencyError(MafError, AssertionError):
    """A self-check failed; this indicates a bug, not bad input."""


class BudgetExhausted(MafError, RuntimeError):
    """Branch-and-bound stopped at its node limit.

    Carries the best integral solution found so far (``incumbent``, may be
    None) and the proven lower bound on the optimum.
    """

    def __init__(self, message, incumbent=None, lower_bound=None, nodes=0):
        super().__init__(message)
        self.incumbent = incumbent
        self.lower_bound = lower_bound
        self.nodes = nodes


class SizeGuardError(MafError, ValueError):
    """An exhaustive routine was asked to handle an instance above its guard."""
