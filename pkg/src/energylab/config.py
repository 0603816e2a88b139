"""Run configuration: a TOML subset of ``key = value`` lines under dotted sections.

Example::

    seed = 0

    [grid]
    n = 32

    [solver]
    nu = 0.05
    dt = 0.005
    t_end = 2.0
    snapshot_stride = 20
    budget_stride = 1

    [initial]
    kind = "taylor_green"

    [forcing]
    kind = "none"

    [output]
    dir = "runs/tg32"

    [audit]
    kappas = [4, 16, 64]
    windows = [[0.0, 1.0], [0.0, 2.0]]

Forcing modes are rows ``[kx, ky, kz, ax_re, ax_im, ay_re, ay_im, az_re, az_im]``.
Unknown sections or keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import tomli
import tomli_w

from .errors import ConfigError
from .solver import FORCING_KINDS, INITIAL_KINDS, ForcingSpec, InitialSpec, SolverConfig
from .spectral import Grid

_SCHEMA = {
    "": {"seed"},
    "grid": {"n"},
    "solver": {"nu", "dt", "t_end", "snapshot_stride", "budget_stride", "c_cfl", "nonlinear"},
    "initial": {"kind", "amplitudes", "slope", "rms"},
    "forcing": {"kind", "modes", "frequency"},
    "output": {"dir"},
    "audit": {"kappas", "windows"},
}


@dataclass(frozen=True)
class RunConfig:
    n: int
    nu: float
    dt: float
    t_end: float
    snapshot_stride: int = 1
    budget_stride: int = 1
    c_cfl: float = 0.5
    nonlinear: bool = True
    initial_kind: str = "taylor_green"
    amplitudes: tuple[float, ...] = (1.0, 1.0, 1.0)
    slope: float = 5.0 / 3.0
    rms: float = 1.0
    forcing_kind: str = "none"
    forcing_modes: tuple[tuple[float, ...], ...] = ()
    frequency: float = 0.0
    output_dir: str = "run"
    kappas: tuple[float, ...] = ()
    windows: tuple[tuple[float, float], ...] = ()
    seed: int = 0

    def __post_init__(self):
        for name in ("nu", "dt", "t_end", "c_cfl"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive number, got {value!r}")
        for name in ("snapshot_stride", "budget_stride"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value > 0):
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.initial_kind not in INITIAL_KINDS:
            raise ConfigError(f"initial.kind must be one of {INITIAL_KINDS}")
        if self.forcing_kind not in FORCING_KINDS:
            raise ConfigError(f"forcing.kind must be one of {FORCING_KINDS}")
        if len(self.amplitudes) != 3:
            raise ConfigError("initial.amplitudes needs three values")
        for row in self.forcing_modes:
            if len(row) != 9:
                raise ConfigError("each forcing mode needs 9 numbers: kx ky kz ax_re ax_im ay_re ay_im az_re az_im")
        if any(k <= 0 for k in self.kappas):
            raise ConfigError("audit.kappas must be positive")
        for w in self.windows:
            if len(w) != 2 or not w[0] <= w[1]:
                raise ConfigError(f"audit window {w!r} must be [t0, t] with t0 <= t")
        try:
            self.solver_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def solver_config(self) -> SolverConfig:
        modes = tuple(
            ((int(r[0]), int(r[1]), int(r[2])), (complex(r[3], r[4]), complex(r[5], r[6]), complex(r[7], r[8])))
            for r in self.forcing_modes
        )
        return SolverConfig(
            grid=Grid(self.n),
            nu=self.nu,
            dt=self.dt,
            t_end=self.t_end,
            forcing=ForcingSpec(self.forcing_kind, modes, self.frequency),
            initial=InitialSpec(self.initial_kind, self.amplitudes, self.slope, self.rms, self.seed),
            snapshot_stride=self.snapshot_stride,
            budget_stride=self.budget_stride,
            c_cfl=self.c_cfl,
            nonlinear=self.nonlinear,
        )

    def kappa_ladder(self) -> list[float]:
        if self.kappas:
            return sorted(set(float(k) for k in self.kappas))
        radius = Grid(self.n).dealias_radius
        return [float(m * m) for m in range(1, radius + 1)]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "grid": {"n": self.n},
            "solver": {
                "nu": self.nu,
                "dt": self.dt,
                "t_end": self.t_end,
                "snapshot_stride": self.snapshot_stride,
                "budget_stride": self.budget_stride,
                "c_cfl": self.c_cfl,
                "nonlinear": self.nonlinear,
            },
            "initial": {
                "kind": self.initial_kind,
                "amplitudes": list(self.amplitudes),
                "slope": self.slope,
                "rms": self.rms,
            },
            "forcing": {
                "kind": self.forcing_kind,
                "modes": [list(r) for r in self.forcing_modes],
                "frequency": self.frequency,
            },
            "output": {"dir": self.output_dir},
            "audit": {"kappas": list(self.kappas), "windows": [list(w) for w in self.windows]},
        }

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        for key, value in data.items():
            if isinstance(value, dict):
                if key not in _SCHEMA or key == "":
                    raise ConfigError(f"unknown section [{key}]")
                unknown = set(value) - _SCHEMA[key]
                if unknown:
                    raise ConfigError(f"unknown key(s) in [{key}]: {', '.join(sorted(unknown))}")
            elif key not in _SCHEMA[""]:
                raise ConfigError(f"unknown top-level key {key!r}")
        grid = data.get("grid", {})
        solver = data.get("solver", {})
        initial = data.get("initial", {})
        forcing = data.get("forcing", {})
        audit = data.get("audit", {})
        if "n" not in grid:
            raise ConfigError("[grid] n is required")
        for key in ("nu", "dt", "t_end"):
            if key not in solver:
                raise ConfigError(f"[solver] {key} is required")

        def num(value, name):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a number, got {value!r}")
            return float(value)

        kwargs = dict(
            n=grid["n"],
            nu=num(solver["nu"], "nu"),
            dt=num(solver["dt"], "dt"),
            t_end=num(solver["t_end"], "t_end"),
            output_dir=str(data.get("output", {}).get("dir", "run")),
            seed=int(data.get("seed", 0)),
        )
        for key in ("snapshot_stride", "budget_stride", "nonlinear"):
            if key in solver:
                kwargs[key] = solver[key]
        if "c_cfl" in solver:
            kwargs["c_cfl"] = num(solver["c_cfl"], "c_cfl")
        if "kind" in initial:
            kwargs["initial_kind"] = initial["kind"]
        if "amplitudes" in initial:
            kwargs["amplitudes"] = tuple(num(a, "amplitudes") for a in initial["amplitudes"])
        for key in ("slope", "rms"):
            if key in initial:
                kwargs[key] = num(initial[key], key)
        if "kind" in forcing:
            kwargs["forcing_kind"] = forcing["kind"]
        if "modes" in forcing:
            kwargs["forcing_modes"] = tuple(tuple(num(x, "forcing.modes") for x in row) for row in forcing["modes"])
        if "frequency" in forcing:
            kwargs["frequency"] = num(forcing["frequency"], "frequency")
        if "kappas" in audit:
            kwargs["kappas"] = tuple(num(k, "kappas") for k in audit["kappas"])
        if "windows" in audit:
            kwargs["windows"] = tuple(tuple(num(x, "windows") for x in w) for w in audit["windows"])
        if not isinstance(kwargs["n"], int) or isinstance(kwargs["n"], bool):
            raise ConfigError(f"grid.n must be an integer, got {kwargs['n']!r}")
        try:
            Grid(kwargs["n"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(**kwargs)

    @classmethod
    def from_toml(cls, text: str) -> RunConfig:
        try:
            data = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"malformed configuration: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> RunConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.from_toml(fh.read())


__all__ = ["RunConfig"]
