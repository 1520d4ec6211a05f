"""Exception hierarchy shared by all modules."""


class ConfigurationError(ValueError):
    """Invalid construction parameters (grid, packet, scan settings)."""


class DimensionError(ValueError):
    """Operands live on different grids or spaces."""


class InfeasibleError(ValueError):
    """Requested configuration has no allowed microstates."""


class PauliExclusionError(ValueError):
    """Fermionic symmetrization of linearly dependent states.

    The raw (unnormalized) norm is kept on ``norm`` so callers can inspect
    how close to zero it was.
    """

    def __init__(self, message: str, norm: float):
        super().__init__(message)
        self.norm = norm


class UnsupportedError(ValueError):
    """Operation not available for this number of parties."""


class ContractViolation(RuntimeError):
    """A runtime contract failed; ``contract`` names it."""

    def __init__(self, contract: str, message: str):
        super().__init__(f"[{contract}] {message}")
        self.contract = contract


class BoundaryLeakError(ContractViolation):
    def __init__(self, message: str):
        super().__init__("boundary-leak", message)


class NumericalInstabilityError(ContractViolation):
    def __init__(self, message: str):
        super().__init__("numerical-stability", message)
