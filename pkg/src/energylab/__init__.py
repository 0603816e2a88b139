"""Spectral Navier-Stokes on the periodic box with energy-equality auditing."""

from .audit import (
    ConditionFlags,
    DefectReport,
    RegularityReport,
    TheoremVerdict,
    budget_row,
    classify,
    ee_defect,
    energy_scale,
    flux_convergence,
    lemma_defect,
    regularity_norms,
    sei_margin,
    theorem_check,
)
from .config import RunConfig
from .errors import (
    BadMagicError,
    CFLViolationError,
    ConfigError,
    EnergyLabError,
    GridMismatchError,
    InvariantViolationError,
    NonFiniteStateError,
    SnapshotFormatError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from .fileio import load_run, read_snapshot, write_run, write_snapshot
from .kernels import BACKEND
from .solver import (
    ForcingSpec,
    InitialSpec,
    SolverConfig,
    Trajectory,
    beltrami_field,
    simulate,
    step,
    taylor_green_field,
)
from .spectral import (
    CutoffDecomposition,
    Grid,
    SpectralField,
    bernstein_gaps,
    field_from_modes,
    from_physical,
    inner_product,
    leray_project,
    lebesgue_norm,
    random_divfree_field,
    shell_spectrum,
    sobolev_norm,
    split,
    to_physical,
    truncate,
)
from .trilinear import (
    C1,
    C2,
    FluxDecomposition,
    advective_term,
    estimate_sample,
    flux_decomposition,
    triad_bounds_check,
    trilinear,
)

__version__ = "0.1.0"
