"""Snapshot files, CSV tables and run directories.

Snapshot layout (all little-endian)::

    offset  size  field
    0       8     magic  b"ELABSNAP"
    8       4     version (uint32, currently 1)
    12      4     n       (uint32)
    16      8     time    (float64)
    24      8     nu      (float64)
    32      ...   payload: n*n*n modes in lexicographic (kx, ky, kz) order,
                  each axis in wrap-around order (0, 1, .., n/2-1, -n/2, .., -1);
                  per mode the x, y, z coefficients, each as (re, im) float64.

The payload holds the full (Hermitian-redundant) cube; readers check the
redundancy and the field invariants.
"""

from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    GridMismatchError,
    InvariantViolationError,
    SnapshotFormatError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from .spectral import Grid, SpectralField

MAGIC = b"ELABSNAP"
VERSION = 1
_HEADER = struct.Struct("<8sIIdd")
HEADER_SIZE = _HEADER.size

BUDGET_COLUMNS = ("t", "energy", "enstrophy", "work_rate")
SNAPSHOT_INDEX_COLUMNS = ("index", "t", "file")


def atomic_write_bytes(path: str | os.PathLike, data: bytes):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_snapshot(field: SpectralField, time: float, nu: float) -> bytes:
    n = field.grid.n
    header = _HEADER.pack(MAGIC, VERSION, n, float(time), float(nu))
    payload = np.ascontiguousarray(field.full_coeffs().transpose(1, 2, 3, 0)).astype("<c16", copy=False)
    return header + payload.tobytes()


def decode_snapshot(data: bytes, expected_n: int | None = None, rtol: float = 1e-10):
    if len(data) < HEADER_SIZE:
        if len(data) >= 8 and data[:8] != MAGIC:
            raise BadMagicError(data[:8])
        raise TruncatedPayloadError(len(data), HEADER_SIZE)
    magic, version, n, time, nu = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(magic)
    if version != VERSION:
        raise VersionMismatchError(version, VERSION)
    grid = Grid(n)
    if expected_n is not None and n != expected_n:
        raise GridMismatchError(f"snapshot has n={n}, expected n={expected_n}")
    expected = 3 * n**3 * 16
    got = len(data) - HEADER_SIZE
    if got < expected:
        raise TruncatedPayloadError(got, expected)
    if got > expected:
        raise SnapshotFormatError(f"{got - expected} trailing bytes after payload")
    full = np.frombuffer(data, dtype="<c16", offset=HEADER_SIZE).reshape(n, n, n, 3).transpose(3, 0, 1, 2)
    field = SpectralField.from_full(grid, full)
    scale = float(np.max(np.abs(full))) if full.size else 0.0
    if np.max(np.abs(field.full_coeffs() - full), initial=0.0) > rtol * scale:
        raise InvariantViolationError("hermitian invariant violated: payload is not the coefficient cube of a real field")
    field.validate(rtol)
    return field, time, nu


def write_snapshot(field: SpectralField, time: float, nu: float, path: str | os.PathLike):
    atomic_write_bytes(path, encode_snapshot(field, time, nu))


def read_snapshot(path: str | os.PathLike, expected_n: int | None = None):
    """Return ``(field, time, nu)``; raises a SnapshotFormatError subclass or InvariantViolationError."""
    return decode_snapshot(Path(path).read_bytes(), expected_n)


def format_number(x: float) -> str:
    return f"{x:.17g}"


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path: str | os.PathLike, columns, rows):
    atomic_write_bytes(path, csv_text(columns, rows).encode())


def read_csv(path: str | os.PathLike) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


class SnapshotSequence(Sequence):
    """Snapshots of a run directory, read from disk on access."""

    def __init__(self, paths: list[Path], expected_n: int | None = None):
        self.paths = paths
        self.expected_n = expected_n

    def __len__(self):
        return len(self.paths)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return read_snapshot(self.paths[i], self.expected_n)[0]


def snapshot_name(index: int) -> str:
    return f"snap_{index:05d}.bin"


def write_run(config, run_dir: str | os.PathLike, u0: SpectralField | None = None):
    """Simulate ``config`` (a RunConfig) into ``run_dir``.

    Layout: ``config.toml`` (the resolved configuration), ``snapshots/``,
    ``snapshots.csv`` (index, t, file) and ``budget.csv``.
    """
    from .solver import simulate

    run_dir = Path(run_dir)
    snap_dir = run_dir / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_bytes(run_dir / "config.toml", config.to_toml().encode())
    solver_config = config.solver_config()
    index = []

    def sink(i, t, field):
        name = snapshot_name(i)
        write_snapshot(field, t, solver_config.nu, snap_dir / name)
        index.append((i, t, f"snapshots/{name}"))

    traj = simulate(solver_config, u0=u0, sink=sink, keep_snapshots=False)
    write_csv(run_dir / "snapshots.csv", SNAPSHOT_INDEX_COLUMNS, index)
    b = traj.budget
    write_csv(run_dir / "budget.csv", BUDGET_COLUMNS, zip(b.t, b.energy, b.enstrophy, b.work_rate))
    return traj


def _float_columns(path: Path, expected) -> np.ndarray:
    header, rows = read_csv(path)
    if tuple(header[: len(expected)]) != tuple(expected):
        raise SnapshotFormatError(f"{path.name}: expected columns {','.join(expected)}, found {','.join(header)}")
    return np.array([[float(x) for x in row[: len(expected)]] for row in rows], dtype=float).reshape(-1, len(expected))


def load_run(run_dir: str | os.PathLike, expected_n: int | None = None):
    """Trajectory of a run directory; snapshots are read lazily from disk."""
    from .config import RunConfig
    from .solver import BudgetSeries, Trajectory, tail_fraction

    run_dir = Path(run_dir)
    config = RunConfig.load(run_dir / "config.toml")
    if expected_n is not None and config.n != expected_n:
        raise GridMismatchError(f"run has n={config.n}, expected n={expected_n}")
    _, rows = read_csv(run_dir / "snapshots.csv")
    times = np.array([float(r[1]) for r in rows])
    snaps = SnapshotSequence([run_dir / r[2] for r in rows], config.n)
    b = _float_columns(run_dir / "budget.csv", BUDGET_COLUMNS)
    budget = BudgetSeries(b[:, 0].copy(), b[:, 1].copy(), b[:, 2].copy(), b[:, 3].copy())
    tail = max((tail_fraction(f) for f in snaps), default=0.0)
    traj = Trajectory(config.solver_config(), times, snaps, budget, {"tail_fraction": tail})
    return traj, config
