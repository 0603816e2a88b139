"""Fourier-Galerkin integration of du/dt + nu A u + B(u, u) = g on the 3-torus.

The nonlinear term is taken in rotational form, ``-P(omega x u)``, evaluated
pseudo-spectrally with 2/3-rule truncation; its L2 pairing with ``u``
vanishes pointwise on the grid, so the truncated system conserves energy in
the inviscid limit. Time stepping is the Lawson (integrating-factor) RK4
scheme: the viscous factor ``exp(-nu |k|^2 dt)`` is applied exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import CFLViolationError, NonFiniteStateError
from .kernels import backend, threads
from .spectral import (
    VOLUME,
    Grid,
    SpectralField,
    _irfft,
    _rfft,
    field_from_modes,
    inner_product,
    leray_project,
    random_divfree_field,
    shell_spectrum,
    truncate,
)

log = logging.getLogger(__name__)

INITIAL_KINDS = ("zero", "beltrami", "taylor_green", "random")
FORCING_KINDS = ("none", "steady_modes", "time_periodic", "balanced")


def beltrami_field(grid: Grid, A: float = 1.0, B: float = 1.0, C: float = 1.0) -> SpectralField:
    """ABC flow (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x); curl u = u."""
    modes = [
        ((0, 0, 1), (-0.5j * A, 0.5 * A, 0.0)),
        ((0, 1, 0), (0.5 * C, 0.0, -0.5j * C)),
        ((1, 0, 0), (0.0, -0.5j * B, 0.5 * B)),
    ]
    return field_from_modes(grid, modes)


def taylor_green_field(grid: Grid, amplitude: float = 1.0) -> SpectralField:
    """(sin x cos y cos z, -cos x sin y cos z, 0) times ``amplitude``; lives on |k|^2 = 3."""
    modes = []
    for sx in (1, -1):
        for sy in (1, -1):
            modes.append(((sx, sy, 1), (-1j * sx * amplitude / 8, 1j * sy * amplitude / 8, 0.0)))
    return field_from_modes(grid, modes)


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "taylor_green"
    amplitudes: tuple[float, float, float] = (1.0, 1.0, 1.0)
    slope: float = 5.0 / 3.0
    rms: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValueError(f"initial kind must be one of {INITIAL_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))

    def build(self, grid: Grid) -> SpectralField:
        if self.kind == "zero":
            return grid.zeros()
        if self.kind == "beltrami":
            return beltrami_field(grid, *self.amplitudes)
        if self.kind == "taylor_green":
            return taylor_green_field(grid, self.amplitudes[0])
        return random_divfree_field(grid, self.slope, self.seed, self.rms)


@dataclass(frozen=True)
class ForcingSpec:
    """Body force g = P f.

    ``steady_modes``: ``modes`` is a tuple of ``((kx, ky, kz), (ax, ay, az))``
    complex amplitudes (conjugates are added at -k, then projected).
    ``time_periodic``: the same spatial field times ``cos(frequency * t)``.
    ``balanced``: ``g = nu A u0``, which makes a Beltrami datum stationary.
    """

    kind: str = "none"
    modes: tuple = ()
    frequency: float = 0.0

    def __post_init__(self):
        if self.kind not in FORCING_KINDS:
            raise ValueError(f"forcing kind must be one of {FORCING_KINDS}, got {self.kind!r}")
        modes = tuple((tuple(int(x) for x in k), tuple(complex(a) for a in amp)) for k, amp in self.modes)
        object.__setattr__(self, "modes", modes)

    def spatial(self, grid: Grid, nu: float, u0: SpectralField) -> SpectralField | None:
        if self.kind == "none":
            return None
        if self.kind == "balanced":
            return SpectralField._wrap(grid, nu * grid.k2 * truncate(u0).coeffs)
        return truncate(leray_project(field_from_modes(grid, self.modes)))

    def modulation(self, t: float) -> float:
        if self.kind == "time_periodic":
            return math.cos(self.frequency * t)
        return 1.0


@dataclass(frozen=True)
class SolverConfig:
    grid: Grid
    nu: float
    dt: float
    t_end: float
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    snapshot_stride: int = 1
    budget_stride: int = 1
    c_cfl: float = 0.5
    nonlinear: bool = True

    def __post_init__(self):
        if not (self.nu >= 0 and math.isfinite(self.nu)):
            raise ValueError(f"viscosity must be finite and >= 0, got {self.nu}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if self.snapshot_stride < 1 or self.budget_stride < 1:
            raise ValueError("strides must be positive integers")
        if self.budget_stride > self.snapshot_stride:
            raise ValueError("budget_stride must not exceed snapshot_stride")
        if not self.c_cfl > 0:
            raise ValueError(f"c_cfl must be positive, got {self.c_cfl}")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"t_end={self.t_end} is not a whole number of steps of dt={self.dt}")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))


class Integrator:
    """Lawson RK4 stepper bound to one configuration; owns its work arrays."""

    def __init__(self, config: SolverConfig, u0: SpectralField | None = None):
        self.config = config
        g = config.grid
        if u0 is None:
            u0 = config.initial.build(g)
        h = config.dt
        decay = -config.nu * h * g.k2
        self.e_half = np.exp(0.5 * decay) * g.dealias_mask
        self.e_full = np.exp(decay) * g.dealias_mask
        gf = config.forcing.spatial(g, config.nu, u0)
        self.forcing = None if gf is None else np.array(gf.coeffs)
        self.last_speed = 0.0
        self._u = np.empty(g.physical_shape)
        self._w = np.empty(g.physical_shape)
        self._uxw = np.empty(g.physical_shape)
        self._curl = np.empty(g.shape, dtype=np.complex128)

    def forcing_at(self, t: float) -> np.ndarray | None:
        if self.forcing is None:
            return None
        return self.forcing * self.config.forcing.modulation(t)

    def rhs(self, c: np.ndarray, t: float, check_cfl: bool = False) -> np.ndarray:
        """P(u x omega) + g(t), dealiased; the viscous part is handled by the integrating factor."""
        g = self.config.grid
        if self.config.nonlinear:
            n = g.n
            nt = threads()
            self._u[...] = _irfft(c, n)
            backend.curl(c, g.kx, g.ky, g.kz, self._curl, nt)
            self._w[...] = _irfft(self._curl, n)
            if check_cfl:
                self._check_cfl()
            backend.cross(self._u, self._w, self._uxw, nt)
            out = _rfft(self._uxw)
            out *= g.dealias_mask
            backend.leray_inplace(out, g.kx, g.ky, g.kz, nt)
        else:
            out = np.zeros(g.shape, dtype=np.complex128)
        force = self.forcing_at(t)
        if force is not None:
            out += force
        return out

    def _check_cfl(self):
        speed = float(np.sqrt(np.einsum("i...,i...->...", self._u, self._u).max()))
        if not math.isfinite(speed):
            raise NonFiniteStateError("non-finite velocity in solver state")
        self.last_speed = speed
        cfg = self.config
        if speed > 0 and cfg.dt > cfg.c_cfl * cfg.grid.spacing / speed:
            raise CFLViolationError(
                f"dt={cfg.dt:g} exceeds the CFL bound {cfg.c_cfl * cfg.grid.spacing / speed:.4g} (max|u|={speed:.4g})"
            )

    def cfl_number(self) -> float:
        return self.config.dt * self.last_speed / self.config.grid.spacing

    def step(self, c: np.ndarray, t: float) -> np.ndarray:
        h = self.config.dt
        eh, ef = self.e_half, self.e_full
        k1 = self.rhs(c, t, check_cfl=True)
        k2 = self.rhs(eh * (c + 0.5 * h * k1), t + 0.5 * h)
        k3 = self.rhs(eh * c + 0.5 * h * k2, t + 0.5 * h)
        k4 = self.rhs(ef * c + h * (eh * k3), t + h)
        out = ef * c + (h / 6.0) * (ef * k1 + 2.0 * eh * (k2 + k3) + k4)
        if not np.isfinite(out).all():
            raise NonFiniteStateError(f"non-finite coefficients after step at t={t:g}")
        return out


@lru_cache(maxsize=8)
def _integrator(config: SolverConfig) -> Integrator:
    return Integrator(config)


def step(u: SpectralField, t: float, config: SolverConfig) -> SpectralField:
    """Advance ``u`` from ``t`` to ``t + dt``."""
    u._check(config.grid.zeros())
    return SpectralField._wrap(config.grid, _integrator(config).step(truncate(u).coeffs, t))


@dataclass
class BudgetSeries:
    """Energy-budget integrands: |u|^2, ||u||^2 = |grad u|^2 and (g, u) per sample time."""

    t: np.ndarray
    energy: np.ndarray
    enstrophy: np.ndarray
    work_rate: np.ndarray

    def __len__(self):
        return len(self.t)


@dataclass
class Trajectory:
    config: SolverConfig
    times: np.ndarray
    snapshots: Sequence[SpectralField]
    budget: BudgetSeries
    diagnostics: dict = field(default_factory=dict)
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def nu(self) -> float:
        return self.config.nu

    def forcing_at(self, t: float) -> SpectralField | None:
        u0 = self.snapshots[0] if len(self.snapshots) else None
        g = self.config.forcing.spatial(self.config.grid, self.config.nu, u0)
        if g is None:
            return None
        return g * self.config.forcing.modulation(t)


def tail_fraction(u: SpectralField) -> float:
    """Share of |u|^2 in the outermost retained shell, a resolution indicator."""
    _, e = shell_spectrum(u)
    total = e.sum()
    return float(e[u.grid.dealias_radius] / total) if total > 0 else 0.0


def _budget_row(integ: Integrator, c: np.ndarray, t: float) -> tuple[float, float, float, float]:
    g = integ.config.grid
    nt = threads()
    energy = VOLUME * backend.sobolev_sum(c, g.kx, g.ky, g.kz, g.wz, 0.0, nt)
    enstrophy = VOLUME * backend.sobolev_sum(c, g.kx, g.ky, g.kz, g.wz, 1.0, nt)
    force = integ.forcing_at(t)
    work = 0.0 if force is None else VOLUME * backend.inner(force, c, g.wz, nt)
    return t, energy, enstrophy, work


def simulate(
    config: SolverConfig,
    u0: SpectralField | None = None,
    sink: Callable[[int, float, SpectralField], None] | None = None,
    keep_snapshots: bool = True,
) -> Trajectory:
    """Integrate from ``u0`` (default: ``config.initial``) to ``config.t_end``.

    The initial datum is Galerkin-truncated to the dealiasing sphere. Budget
    samples are taken every ``budget_stride`` steps and snapshots every
    ``snapshot_stride`` steps; both always include the first and last step.
    ``sink(index, t, field)`` is called for every snapshot (used to stream
    snapshots to disk); with ``keep_snapshots=False`` they are not retained.
    """
    grid = config.grid
    if u0 is None:
        u0 = config.initial.build(grid)
    u0._check(grid.zeros())
    u0 = truncate(u0)
    integ = Integrator(config, u0)
    c = np.array(u0.coeffs)
    nsteps = config.nsteps

    rows = []
    times = []
    snaps = []
    tail = 0.0

    def emit(i: int, t: float):
        nonlocal tail
        f = SpectralField._wrap(grid, c.copy())
        times.append(t)
        tail = max(tail, tail_fraction(f))
        if keep_snapshots:
            snaps.append(f)
        if sink is not None:
            sink(len(times) - 1, t, f)
        _, energy, enstrophy, _ = _budget_row(integ, c, t)
        log.info("t=%.6g energy=%.9e enstrophy=%.9e cfl=%.4f", t, energy, enstrophy, integ.cfl_number())

    rows.append(_budget_row(integ, c, 0.0))
    emit(0, 0.0)
    for i in range(1, nsteps + 1):
        t_prev = (i - 1) * config.dt
        c = integ.step(c, t_prev)
        t = i * config.dt
        last = i == nsteps
        if i % config.budget_stride == 0 or last:
            rows.append(_budget_row(integ, c, t))
        if i % config.snapshot_stride == 0 or last:
            emit(i, t)

    data = np.array(rows, dtype=float).reshape(-1, 4)
    budget = BudgetSeries(data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy(), data[:, 3].copy())
    return Trajectory(
        config=config,
        times=np.array(times),
        snapshots=snaps,
        budget=budget,
        diagnostics={"tail_fraction": tail, "steps": nsteps},
    )


def from_snapshots(config: SolverConfig, times, snapshots: Sequence[SpectralField]) -> Trajectory:
    """Trajectory built from externally supplied snapshots; budget samples at the snapshot times."""
    integ = Integrator(config, snapshots[0] if len(snapshots) else None)
    rows = [_budget_row(integ, np.asarray(f.coeffs), float(t)) for t, f in zip(times, snapshots)]
    data = np.array(rows, dtype=float).reshape(-1, 4)
    budget = BudgetSeries(data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy(), data[:, 3].copy())
    tail = max((tail_fraction(f) for f in snapshots), default=0.0)
    return Trajectory(config, np.asarray(times, dtype=float), snapshots, budget, {"tail_fraction": tail})


__all__ = [
    "BudgetSeries",
    "ForcingSpec",
    "InitialSpec",
    "Integrator",
    "SolverConfig",
    "Trajectory",
    "beltrami_field",
    "from_snapshots",
    "simulate",
    "step",
    "tail_fraction",
    "taylor_green_field",
]
