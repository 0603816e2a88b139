"""Energy-budget audit of trajectories.

Time integrals and window-endpoint values come from the not-a-knot cubic
spline through the samples (fourth-order in the sample spacing). Integrals
of one fixed interpolant are additive over adjacent windows, and window
endpoints need not coincide with samples.
Budget terms (|u|^2, ||u||^2, (g, u)) come from the trajectory's budget
samples; anything that needs the field itself (flux terms, fractional and
Lebesgue norms) is evaluated on the snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from .spectral import inner_product, lebesgue_norm, sobolev_norm, split, truncate
from .solver import Trajectory
from .trilinear import C1, C2, FluxDecomposition, flux_decomposition

DEFAULT_LRLS_PAIRS = ((4, 4), (3, Fraction(9, 2)), (8, 4), (math.inf, 3))
PASS_RTOL = 1e-7


def _interpolant(ts, ys) -> CubicSpline | None:
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(ts) < 2:
        return None
    return CubicSpline(ts, ys)


def _value_at(ts, ys, x: float) -> float:
    spline = _interpolant(ts, ys)
    return float(ys[0]) if spline is None else float(spline(x))


def _window_integral(ts, ys, t0: float, t: float) -> float:
    spline = _interpolant(ts, ys)
    if spline is None or t0 == t:
        return 0.0
    return float(spline.integrate(t0, t))


def _check_window(traj: Trajectory, t0: float, t: float):
    ts = traj.budget.t
    lo, hi = ts[0], ts[-1]
    slack = 1e-12 * max(1.0, abs(hi))
    if not (lo - slack <= t0 <= t <= hi + slack):
        raise ValueError(f"window [{t0}, {t}] outside the trajectory span [{lo}, {hi}] or reversed")


@dataclass(frozen=True)
class BudgetRow:
    t0: float
    t: float
    kinetic_change: float
    dissipation: float
    work: float


def budget_row(traj: Trajectory, t0: float, t: float) -> BudgetRow:
    _check_window(traj, t0, t)
    b = traj.budget
    e0 = _value_at(b.t, b.energy, t0)
    e1 = _value_at(b.t, b.energy, t)
    return BudgetRow(
        t0=t0,
        t=t,
        kinetic_change=e1 - e0,
        dissipation=2.0 * traj.nu * _window_integral(b.t, b.enstrophy, t0, t),
        work=2.0 * _window_integral(b.t, b.work_rate, t0, t),
    )


def energy_scale(traj: Trajectory, t0: float, t: float) -> float:
    """max(|u(t0)|^2, dissipation over [t0, t]), the yardstick for relative defects."""
    row = budget_row(traj, t0, t)
    e0 = _value_at(traj.budget.t, traj.budget.energy, t0)
    return max(e0, row.dissipation)


def ee_defect(traj: Trajectory, t0: float, t: float) -> float:
    """|u(t)|^2 - |u(t0)|^2 + 2 nu int ||u||^2 - 2 int (g, u); zero when energy is balanced."""
    row = budget_row(traj, t0, t)
    return row.kinetic_change + row.dissipation - row.work


def sei_margin(traj: Trajectory, t0: float, t: float) -> float:
    """Slack in the strong energy inequality; negative means it fails."""
    return -ee_defect(traj, t0, t)


def sei_margins(traj: Trajectory, t: float) -> np.ndarray:
    """sei_margin(t0, t) for every budget sample time t0 <= t.

    The inequality is only required for almost every t0; on sampled data
    every sampled start time is checked.
    """
    starts = traj.budget.t[traj.budget.t <= t]
    return np.array([sei_margin(traj, float(t0), t) for t0 in starts])


def _flux_series(traj: Trajectory, kappa: float) -> list[FluxDecomposition]:
    cache = traj.cache.setdefault("flux", {})
    key = float(kappa)
    if key not in cache:
        cache[key] = [flux_decomposition(u, kappa) for u in traj.snapshots]
    return cache[key]


def _flux_integral(traj: Trajectory, kappa: float, t0: float, t: float, term=lambda f: f.total) -> float:
    series = _flux_series(traj, kappa)
    return _window_integral(traj.times, [term(f) for f in series], t0, t)


def lemma_defect(traj: Trajectory, t0: float, t: float, kappa: float) -> float:
    """Energy-equality residual corrected by the cutoff flux: ee_defect - 2 int b(u, u_low, u)."""
    _check_window(traj, t0, t)
    return ee_defect(traj, t0, t) - 2.0 * _flux_integral(traj, kappa, t0, t)


def low_pass_defect(traj: Trajectory, t0: float, t: float, kappa: float) -> float:
    """Residual of the truncated energy identity for u_low = P_kappa u.

    |u_low(t)|^2 - |u_low(t0)|^2 + 2 nu int ||u_low||^2 - 2 int (g, u_low)
    - 2 int b(u, u_low, u), all from snapshots. It vanishes for every kappa up
    to time-quadrature error, which is what makes the cutoff correction exact.
    """
    _check_window(traj, t0, t)
    energy, enstrophy, work = [], [], []
    for ti, u in zip(traj.times, traj.snapshots):
        low = split(truncate(u), kappa).low
        energy.append(low.energy)
        enstrophy.append(sobolev_norm(low, 1.0) ** 2)
        g = traj.forcing_at(float(ti))
        work.append(0.0 if g is None else inner_product(g, low))
    ts = traj.times
    kinetic = _value_at(ts, energy, t) - _value_at(ts, energy, t0)
    return (
        kinetic
        + 2.0 * traj.nu * _window_integral(ts, enstrophy, t0, t)
        - 2.0 * _window_integral(ts, work, t0, t)
        - 2.0 * _flux_integral(traj, kappa, t0, t)
    )


@dataclass(frozen=True)
class DefectRow:
    t0: float
    t: float
    kappa: float
    ee_defect: float
    lemma_defect: float
    low_pass_defect: float
    flux_integral: float
    hh_integral: float
    lh_integral: float
    max_majorant_ratio: float


@dataclass
class DefectReport:
    rows: list[DefectRow]
    kappas: list[float]
    scale: float
    majorant_constant: float
    envelope_ok: bool
    top_rung_ok: bool | None

    COLUMNS = (
        "t0",
        "t",
        "kappa",
        "ee_defect",
        "lemma_defect",
        "low_pass_defect",
        "flux_integral",
        "hh_integral",
        "lh_integral",
        "max_majorant_ratio",
    )

    def table(self) -> list[tuple[float, ...]]:
        return [tuple(getattr(r, c) for c in self.COLUMNS) for r in self.rows]

    def row_for(self, kappa: float, t0: float | None = None) -> DefectRow:
        for r in self.rows:
            if r.kappa == kappa and (t0 is None or r.t0 == t0):
                return r
        raise KeyError(kappa)


def flux_convergence(
    traj: Trajectory,
    kappas,
    windows=None,
    majorant_constant: float | None = None,
    top_rtol: float = 1e-11,
) -> DefectReport:
    """Cutoff-flux table over an increasing kappa ladder.

    For each window and kappa: ee_defect, lemma_defect, the low-pass identity
    residual, int |b(u, u_low, u)|, int |b(uh, ul, uh)|, int |b(ul, ul, uh)|,
    and the largest per-snapshot |b(uh, ul, uh)| / ||u||_{5/6}^3.
    ``envelope_ok`` says every snapshot obeys the majorant with
    ``majorant_constant`` (default max(C1, C2)); ``top_rung_ok`` says the flux
    integral is below ``top_rtol`` times the energy scale at the top rung, and
    is None when the top rung is below the grid's largest eigenvalue.
    """
    kappas = [float(k) for k in kappas]
    if not kappas:
        raise ValueError("empty kappa ladder")
    if any(b <= a for a, b in zip(kappas, kappas[1:])):
        raise ValueError("kappa ladder must be strictly increasing")
    if majorant_constant is None:
        majorant_constant = max(C1, C2)
    if windows is None:
        windows = [(float(traj.times[0]), float(traj.times[-1]))]
    rows = []
    envelope_ok = True
    for t0, t in windows:
        ee = ee_defect(traj, t0, t)
        for kappa in kappas:
            series = _flux_series(traj, kappa)
            ratios = [abs(f.t_hh) / f.majorant if f.majorant > 0 else 0.0 for f in series]
            worst = max(ratios, default=0.0)
            envelope_ok &= worst <= majorant_constant
            rows.append(
                DefectRow(
                    t0=t0,
                    t=t,
                    kappa=kappa,
                    ee_defect=ee,
                    lemma_defect=lemma_defect(traj, t0, t, kappa),
                    low_pass_defect=low_pass_defect(traj, t0, t, kappa),
                    flux_integral=_flux_integral(traj, kappa, t0, t, lambda f: abs(f.total)),
                    hh_integral=_flux_integral(traj, kappa, t0, t, lambda f: abs(f.t_hh)),
                    lh_integral=_flux_integral(traj, kappa, t0, t, lambda f: abs(f.t_lh)),
                    max_majorant_ratio=worst,
                )
            )
    t0, t = windows[0]
    scale = energy_scale(traj, t0, t)
    top_rung_ok = None
    if kappas[-1] >= traj.config.grid.lambda_max:
        top_rung_ok = all(r.flux_integral <= top_rtol * scale for r in rows if r.kappa == kappas[-1])
    return DefectReport(rows, kappas, scale, majorant_constant, bool(envelope_ok), top_rung_ok)


def _as_exponent(x) -> Fraction | None:
    """Exact rational exponent; None stands for infinity."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity", "∞"):
            return None
        return Fraction(x.strip())
    if isinstance(x, float):
        if math.isinf(x):
            return None
        return Fraction(repr(x))
    return Fraction(x)


def _inv(x: Fraction | None) -> Fraction:
    return Fraction(0) if x is None else 1 / x


@dataclass(frozen=True)
class ConditionFlags:
    r: Fraction | None
    s: Fraction | None
    serrin_value: Fraction
    satisfies_serrin: bool
    shinbrot_value: Fraction
    satisfies_shinbrot: bool
    new_scaling_value: Fraction
    on_new_scaling: bool


NEW_SCALING = Fraction(10, 9)


def classify(r, s) -> ConditionFlags:
    """Flags for u in L^r_t L^s_x.

    Serrin: 3/s + 2/r <= 1 with s >= 3. Shinbrot: 2/s + 2/r <= 1 with s >= 4.
    The scaling of L^3 V^{5/6} corresponds to 2/s + 2/r = 10/9. Arithmetic is
    exact in rationals; pass ``inf`` (or "inf") for an unbounded exponent.
    """
    rf, sf = _as_exponent(r), _as_exponent(s)
    for name, v in (("r", rf), ("s", sf)):
        if v is not None and v < 1:
            raise ValueError(f"Lebesgue exponent {name} must be >= 1, got {v}")
    serrin = 3 * _inv(sf) + 2 * _inv(rf)
    shinbrot = 2 * _inv(sf) + 2 * _inv(rf)

    def s_at_least(m):
        return sf is None or sf >= m

    return ConditionFlags(
        r=rf,
        s=sf,
        serrin_value=serrin,
        satisfies_serrin=serrin <= 1 and s_at_least(3),
        shinbrot_value=shinbrot,
        satisfies_shinbrot=shinbrot <= 1 and s_at_least(4),
        new_scaling_value=shinbrot,
        on_new_scaling=shinbrot == NEW_SCALING,
    )


@dataclass(frozen=True)
class LrLsRow:
    r: float
    s: float
    norm: float
    flags: ConditionFlags


@dataclass
class RegularityReport:
    l3_v56: float
    lrls_table: list[LrLsRow]
    sup_l2: float
    l2_h1: float

    @property
    def finite(self) -> bool:
        values = [self.l3_v56, self.sup_l2, self.l2_h1] + [row.norm for row in self.lrls_table]
        return all(math.isfinite(v) for v in values)


def _time_norm(ts, values, r) -> float:
    values = np.asarray(values, dtype=float)
    if r is None:
        return float(values.max())
    r = float(r)
    return _window_integral(ts, values**r, float(ts[0]), float(ts[-1])) ** (1.0 / r)


def regularity_norms(traj: Trajectory, extra_pairs=(), oversample: int = 2) -> RegularityReport:
    """Space-time norms behind the energy-equality criteria.

    ``l3_v56`` = (int ||u||_{5/6}^3 dt)^(1/3); the L^r L^s table covers
    (4, 4), (3, 9/2), (8, 4), (inf, 3) and ``extra_pairs``, with r = inf read as
    the max over snapshots; ``sup_l2`` = max |u(t)| and ``l2_h1`` =
    (int ||u||^2 dt)^(1/2) over the budget samples.
    """
    if len(traj.budget) < 2:
        raise ValueError("regularity norms need at least two budget samples")
    ts = traj.times
    v56 = [sobolev_norm(u, 5.0 / 6.0) for u in traj.snapshots]
    l3_v56 = _time_norm(ts, v56, Fraction(3))
    table = []
    lebesgue_cache: dict[Fraction | None, list[float]] = {}
    for r, s in tuple(DEFAULT_LRLS_PAIRS) + tuple(extra_pairs):
        flags = classify(r, s)
        if flags.s not in lebesgue_cache:
            s_val = math.inf if flags.s is None else float(flags.s)
            lebesgue_cache[flags.s] = [lebesgue_norm(u, s_val, oversample) for u in traj.snapshots]
        norm = _time_norm(ts, lebesgue_cache[flags.s], flags.r)
        table.append(LrLsRow(math.inf if flags.r is None else float(flags.r), math.inf if flags.s is None else float(flags.s), norm, flags))
    b = traj.budget
    return RegularityReport(
        l3_v56=l3_v56,
        lrls_table=table,
        sup_l2=math.sqrt(float(b.energy.max())),
        l2_h1=math.sqrt(_window_integral(b.t, b.enstrophy, float(b.t[0]), float(b.t[-1]))),
    )


@dataclass
class TheoremVerdict:
    passed: bool
    hypotheses_finite: bool
    ee_defect: float
    scale: float
    tolerance: float
    regularity: RegularityReport
    tail_fraction: float | None = None
    notes: list[str] = field(default_factory=list)


def theorem_check(traj: Trajectory, rtol: float = PASS_RTOL) -> TheoremVerdict:
    """Hypotheses (finite L^3 V^{5/6}, L^inf L^2 and L^2 H^1 norms) plus the energy equality on [0, T]."""
    reg = regularity_norms(traj)
    t0, t = float(traj.budget.t[0]), float(traj.budget.t[-1])
    defect = ee_defect(traj, t0, t)
    scale = energy_scale(traj, t0, t)
    tol = rtol * scale
    finite = reg.finite and math.isfinite(defect)
    notes = []
    tail = traj.diagnostics.get("tail_fraction")
    if tail is not None and tail > 1e-6:
        notes.append(f"under-resolved: outermost shell holds {tail:.2e} of the energy")
    return TheoremVerdict(
        passed=bool(finite and abs(defect) <= tol),
        hypotheses_finite=finite,
        ee_defect=defect,
        scale=scale,
        tolerance=tol,
        regularity=reg,
        tail_fraction=tail,
        notes=notes,
    )
