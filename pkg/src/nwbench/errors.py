"""Exception hierarchy shared by every module."""


class NWBenchError(Exception):
    """Base class for all workbench errors."""

    exit_code = 1


class DimensionError(NWBenchError, ValueError):
    """Arity or length mismatch between objects."""


class SpecError(NWBenchError, ValueError):
    """Malformed circuit, tree or file payload."""


class ParamError(NWBenchError, ValueError):
    """Parameters outside their mathematical domain."""


class ConstructionError(NWBenchError, RuntimeError):
    """A combinatorial construction failed within its retry budget."""


class WidthError(NWBenchError, ValueError):
    """A gate touches every NOF block, so no player can evaluate it."""


class CapError(NWBenchError, ValueError):
    """Instance exceeds a desk-scale cap for exact computation."""

    exit_code = 2
