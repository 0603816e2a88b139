"""Fast deterministic self-checks behind ``energylab check``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .audit import classify, ee_defect, energy_scale
from .solver import (
    ForcingSpec,
    InitialSpec,
    SolverConfig,
    beltrami_field,
    simulate,
    taylor_green_field,
)
from .spectral import (
    Grid,
    bernstein_gaps,
    leray_project,
    random_divfree_field,
    sobolev_norm,
    split,
    truncate,
)
from .trilinear import C1, C2, estimate_sample, flux_decomposition, trilinear


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    limit: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.limit)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} <= {self.limit:.3e}"


def _fields(grid, rng, count):
    seeds = rng.integers(0, 2**31, size=count)
    slopes = rng.uniform(0.0, 3.0, size=count)
    return [random_divfree_field(grid, float(sl), int(sd)) for sd, sl in zip(seeds, slopes)]


def identities(seed: int = 0, samples: int = 10):
    rng = np.random.default_rng(seed)
    grid = Grid(12)
    worst_anti = worst_self = worst_leray = worst_split = worst_four = 0.0
    worst_gap = 0.0
    for _ in range(samples):
        u, v, w = _fields(grid, rng, 3)
        scale = sobolev_norm(u, 0) * sobolev_norm(v, 1) * sobolev_norm(w, 0)
        worst_anti = max(worst_anti, abs(trilinear(u, v, w) + trilinear(u, w, v)) / scale)
        worst_self = max(worst_self, abs(trilinear(u, v, v)) / (sobolev_norm(u, 0) * sobolev_norm(v, 1) * sobolev_norm(v, 0)))
        worst_leray = max(worst_leray, float(np.max(np.abs(leray_project(u).coeffs - u.coeffs))) / float(np.max(np.abs(u.coeffs))))
        kappa = float(rng.uniform(1.0, grid.lambda_max))
        parts = split(u, kappa)
        worst_split = max(worst_split, float(np.max(np.abs((parts.low + parts.high).coeffs - u.coeffs))))
        flux = flux_decomposition(u, kappa)
        worst_four = max(worst_four, max(abs(flux.residual), abs(flux.t_hl), abs(flux.t_ll)) / flux.majorant)
        alpha, beta = sorted(rng.uniform(0.0, 2.0, size=2))
        if beta > alpha:
            gl, gh = bernstein_gaps(u, kappa, float(alpha), float(beta))
            gap_scale = max(sobolev_norm(u, alpha), sobolev_norm(u, beta), 1.0) * kappa ** abs(beta - alpha)
            worst_gap = max(worst_gap, -min(gl, gh) / gap_scale)
    return [
        CheckResult("antisymmetry b(u,v,w)+b(u,w,v)", worst_anti, 1e-12),
        CheckResult("cancellation b(u,v,v)", worst_self, 1e-12),
        CheckResult("leray projection idempotent", worst_leray, 1e-14),
        CheckResult("cutoff split reconstruction", worst_split, 0.0),
        CheckResult("four-term flux decomposition", worst_four, 1e-12),
        CheckResult("bernstein gaps nonnegative", max(worst_gap, 0.0), 1e-13),
    ]


def estimates(seed: int = 0, samples: int = 10):
    rng = np.random.default_rng(seed)
    grid = Grid(12)
    worst = {(0.5, 0.5, 0.5): 0.0, (5.0 / 6.0, 0.0, 2.0 / 3.0): 0.0}
    for _ in range(samples):
        u, v, w = _fields(grid, rng, 3)
        for s in worst:
            worst[s] = max(worst[s], estimate_sample(u, v, w, *s).ratio)
    return [
        CheckResult("trilinear estimate (1/2, 1/2, 1/2) / C1", worst[(0.5, 0.5, 0.5)] / C1, 1.0),
        CheckResult("trilinear estimate (5/6, 0, 2/3) / C2", worst[(5.0 / 6.0, 0.0, 2.0 / 3.0)] / C2, 1.0),
    ]


def exact_solutions(seed: int = 0):
    rng = np.random.default_rng(seed)
    a, b, c = (float(x) for x in rng.uniform(0.5, 1.5, size=3))
    grid = Grid(16)
    nu, t_end = 0.1, 0.2
    out = []

    cfg = SolverConfig(grid, nu, 1e-3, t_end, ForcingSpec("none"), InitialSpec("beltrami", (a, b, c)))
    traj = simulate(cfg)
    e0 = traj.budget.energy[0]
    exact = math.exp(-2.0 * nu * t_end) * e0
    out.append(CheckResult("beltrami energy decay", abs(traj.budget.energy[-1] - exact) / exact, 1e-8))
    out.append(CheckResult("beltrami energy equality", abs(ee_defect(traj, 0.0, t_end)) / e0, 1e-8))

    u0 = beltrami_field(grid, a, b, c)
    cfg = SolverConfig(grid, nu, 1e-2, t_end, ForcingSpec("balanced"), InitialSpec("beltrami", (a, b, c)))
    traj = simulate(cfg, u0)
    drift = float(np.max(np.abs(traj.snapshots[-1].coeffs - truncate(u0).coeffs))) / float(np.max(np.abs(u0.coeffs)))
    out.append(CheckResult("forced beltrami stationary", drift, 1e-12))

    cfg = SolverConfig(grid, 0.05, 5e-3, t_end, ForcingSpec("none"), InitialSpec("taylor_green"), snapshot_stride=8)
    traj = simulate(cfg, taylor_green_field(grid))
    rel = abs(ee_defect(traj, 0.0, t_end)) / energy_scale(traj, 0.0, t_end)
    out.append(CheckResult("taylor-green energy equality", rel, 1e-6))

    flags = classify(3, Fraction(9, 2))
    out.append(CheckResult("new scaling value 10/9", float(abs(flags.new_scaling_value - Fraction(10, 9))), 0.0))
    out.append(CheckResult("shinbrot (4, 4)", 0.0 if classify(4, 4).satisfies_shinbrot else 1.0, 0.0))
    u = taylor_green_field(grid)
    out.append(CheckResult("taylor-green divergence", u.invariant_defects()["divergence"], 1e-15))
    return out


SUITES = {"identities": identities, "estimates": estimates, "exact-solutions": exact_solutions}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    return SUITES[name](seed)
