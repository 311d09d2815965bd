"""Exception types shared across the workbench modules."""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class InvalidInput(WorkbenchError):
    pass


class DegenerateNeighborhood(WorkbenchError):
    """Too few or collinear points around a normal-estimation target."""


class DepthHole(WorkbenchError):
    """A stroke pixel has no valid depth within the bridging radius."""

    def __init__(self, pixel):
        self.pixel = tuple(int(v) for v in pixel)
        super().__init__(f"no valid depth within 3 px of pixel {self.pixel}")


class DegenerateTangent(WorkbenchError):
    """Path step is parallel to the surface normal at some index."""

    def __init__(self, index):
        self.index = int(index)
        super().__init__(f"degenerate tangent at path index {self.index}")


class InvalidPolygon(WorkbenchError):
    pass


class NearSingular(WorkbenchError):
    """Jacobian too close to a singularity for the requested operation."""


class OutOfDomain(WorkbenchError):
    """Query point outside the surface height-field domain."""


class InvalidSurface(WorkbenchError):
    pass


class DuplicateClass(WorkbenchError):
    pass


class InvalidName(WorkbenchError):
    pass


class DimensionMismatch(WorkbenchError):
    pass


class SessionFull(WorkbenchError):
    pass


class EmptySession(WorkbenchError):
    pass


class EmptyRegistry(WorkbenchError):
    pass


class UnknownClass(WorkbenchError):
    pass


class FormatError(WorkbenchError):
    pass


class ScenarioError(WorkbenchError):
    """Scenario file violates the schema; message names the field path."""


class PhaseError(WorkbenchError):
    """Illegal session phase transition."""


class ExecutionFault(WorkbenchError):
    pass
