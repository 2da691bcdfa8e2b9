"""Exception hierarchy shared by every module."""


class ScissorKinError(Exception):
    pass


class DomainError(ScissorKinError, ValueError):
    """Input outside the range where an operation is defined."""


class MobilityError(ScissorKinError):
    """The mechanism does not have the mobility an operation needs."""


class DriveSelectionError(MobilityError):
    pass


class ConsistencyError(ScissorKinError):
    """Joint rates or accelerations violate the loop constraints."""


class DisconnectedGraphError(ScissorKinError):
    def __init__(self, components):
        self.components = [sorted(c) for c in components]
        listing = "; ".join("{" + ", ".join(c) + "}" for c in self.components)
        super().__init__(f"joint graph is disconnected into {len(self.components)} components: {listing}")


class AlignmentError(ScissorKinError):
    """Two trajectory logs do not share timestamps or node sets."""


class OracleError(ScissorKinError):
    pass


class FormatError(ScissorKinError):
    """A mechanism, trajectory or report file could not be parsed."""
