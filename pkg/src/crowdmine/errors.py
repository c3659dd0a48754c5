"""Exception types raised across the package."""


class CrowdMineError(Exception):
    pass


class CycleDetected(CrowdMineError):
    """Input edges do not describe a partial order."""


class UnknownItem(CrowdMineError, KeyError):
    pass


class CapExceeded(CrowdMineError):
    """A materialization or enumeration exceeded its configured cap."""


class NotACoverEdge(CrowdMineError):
    pass


class NotAnAntichain(CrowdMineError):
    pass


class NotMonotone(CrowdMineError):
    pass


class NonMonotoneOracle(CrowdMineError):
    """An oracle answer contradicts an earlier answer under monotonicity."""


class IncompleteState(CrowdMineError):
    pass


class SessionClosed(CrowdMineError):
    """The interactive channel ended before mining finished.

    ``state`` is filled in by the miner with the partial classification.
    """

    def __init__(self, message="session closed", state=None):
        super().__init__(message)
        self.state = state


class ConfigInvalid(CrowdMineError):
    pass
