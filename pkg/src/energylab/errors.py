"""Exception hierarchy shared by the solver, the audit and the file layer."""


class EnergyLabError(Exception):
    """Base class for every error raised by energylab."""


class GridMismatchError(EnergyLabError, ValueError):
    """Two fields (or a field and a request) live on different grids."""


class InvariantViolationError(EnergyLabError, ValueError):
    """A SpectralField invariant (Hermitian, mean-zero, divergence-free) failed."""


class CFLViolationError(EnergyLabError, RuntimeError):
    """The time step exceeds the advective stability bound."""


class NonFiniteStateError(EnergyLabError, FloatingPointError):
    """NaN or Inf appeared in the solver state."""


class SnapshotFormatError(EnergyLabError, ValueError):
    """Base class for malformed snapshot files."""


class BadMagicError(SnapshotFormatError):
    def __init__(self, found: bytes):
        super().__init__(f"bad magic: {found!r}")


class VersionMismatchError(SnapshotFormatError):
    def __init__(self, found: int, expected: int):
        super().__init__(f"version mismatch: file has {found}, reader supports {expected}")


class TruncatedPayloadError(SnapshotFormatError):
    def __init__(self, got: int, expected: int):
        super().__init__(f"truncated payload: {got} of {expected} bytes")


class ConfigError(EnergyLabError, ValueError):
    """Invalid or unknown configuration entry."""
