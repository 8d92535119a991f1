"""Exception types raised across the package."""


class MTClusterError(Exception):
    """Base class for all package errors."""


class CapExceededError(MTClusterError, ValueError):
    """An exponential operation was asked to run beyond its configured cap."""


class InvalidInstanceError(MTClusterError, ValueError):
    """Malformed graph, tree, tuple, model or event specification."""


class DimacsError(InvalidInstanceError):
    """Malformed DIMACS CNF or hypergraph text."""


class OutsideRegionError(MTClusterError, ValueError):
    """Activities are outside the zero-free / convergence region.

    ``witness`` holds the offending vertex subset as a bitmask (or None).
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
