"""Divergence-free periodic velocity fields in the Fourier (Stokes eigen-) basis.

Layout
------
A field on an ``n``-point grid stores Fourier-series coefficients
``c(k) = rfftn(u) / n**3`` in the half-spectrum layout ``(3, n, n, n//2 + 1)``:
axis 1 holds ``kx`` and axis 2 holds ``ky`` in numpy's wrap-around order
(``0, 1, ..., n/2 - 1, -n/2, ..., -1``), axis 3 holds ``kz = 0 .. n/2``. The
redundant ``kz < 0`` half follows from Hermitian symmetry and is produced by
:meth:`SpectralField.full_coeffs`.

With this normalisation ``u(x) = sum_k c(k) exp(i k.x)`` and the L2 norm over
the torus ``[0, 2pi)^3`` is ``|u|^2 = (2pi)^3 sum_k |c(k)|^2``. The Stokes
eigenvalue of mode ``k`` is ``|k|^2`` and ``||u||_s^2 = (2pi)^3 sum |k|^(2s) |c(k)|^2``.

Fields that the solver and the random generator produce live in the Galerkin
space: modes inside the dealiasing sphere ``|k| <= n // 3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatchError, InvariantViolationError
from .kernels import backend, threads

TWO_PI = 2.0 * math.pi
VOLUME = TWO_PI**3


def _rfft(x: np.ndarray) -> np.ndarray:
    return sfft.rfftn(x, axes=(-3, -2, -1), norm="forward", workers=threads())


def _irfft(c: np.ndarray, n: int) -> np.ndarray:
    return sfft.irfftn(c, s=(n, n, n), axes=(-3, -2, -1), norm="forward", workers=threads())


@dataclass(frozen=True)
class Grid:
    """Cubic collocation grid of side 2pi with ``n`` points per axis."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 4 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 4, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def domain(self) -> float:
        return TWO_PI

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    @property
    def dealias_radius(self) -> int:
        return self.n // 3

    @property
    def lambda_max(self) -> int:
        """Largest Stokes eigenvalue in the Galerkin space."""
        return self.dealias_radius**2

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (3, self.n, self.n, self.n // 2 + 1)

    @property
    def physical_shape(self) -> tuple[int, int, int, int]:
        return (3, self.n, self.n, self.n)

    @cached_property
    def kx(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, 1.0 / self.n)

    @property
    def ky(self) -> np.ndarray:
        return self.kx

    @cached_property
    def kz(self) -> np.ndarray:
        return np.fft.rfftfreq(self.n, 1.0 / self.n)

    @cached_property
    def wz(self) -> np.ndarray:
        """Multiplicity of each stored kz plane in the full spectrum."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    @cached_property
    def k_vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.kx[:, None, None], self.ky[None, :, None], self.kz[None, None, :]

    @cached_property
    def k2(self) -> np.ndarray:
        a, b, c = self.k_vectors
        return a * a + b * b + c * c

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        return self.k2 <= self.dealias_radius**2

    @property
    def num_shells(self) -> int:
        return int(math.floor(math.sqrt(3.0) * self.n / 2 + 0.5)) + 1

    def zeros(self) -> SpectralField:
        return SpectralField._wrap(self, np.zeros(self.shape, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable velocity field given by its half-spectrum Fourier coefficients."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.complex128, order="C", copy=True)
        if arr.shape != self.grid.shape:
            raise GridMismatchError(f"coefficient shape {arr.shape} does not match grid {self.grid.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def _wrap(cls, grid: Grid, arr: np.ndarray) -> SpectralField:
        # takes ownership without copying; arr must be fresh
        obj = object.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.complex128)
        arr.flags.writeable = False
        object.__setattr__(obj, "grid", grid)
        object.__setattr__(obj, "coeffs", arr)
        return obj

    def _check(self, other: SpectralField):
        if other.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: n={self.grid.n} vs n={other.grid.n}")

    def __add__(self, other: SpectralField) -> SpectralField:
        self._check(other)
        return SpectralField._wrap(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        self._check(other)
        return SpectralField._wrap(self.grid, self.coeffs - other.coeffs)

    def __neg__(self) -> SpectralField:
        return SpectralField._wrap(self.grid, -self.coeffs)

    def __mul__(self, scalar: float) -> SpectralField:
        return SpectralField._wrap(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def bit_equal(self, other: SpectralField) -> bool:
        return self.grid == other.grid and self.coeffs.tobytes() == other.coeffs.tobytes()

    @property
    def energy(self) -> float:
        """|u|^2, the squared L2 norm over the torus."""
        return sobolev_norm(self, 0.0) ** 2

    def full_coeffs(self) -> np.ndarray:
        """Coefficients on the full ``(3, n, n, n)`` cube in wrap-around order."""
        n = self.grid.n
        m = n // 2 + 1
        full = np.empty((3, n, n, n), dtype=np.complex128)
        full[..., :m] = self.coeffs
        neg = (-np.arange(n)) % n
        mirror = self.coeffs[:, neg][:, :, neg]
        full[..., m:] = np.conj(mirror[..., n - np.arange(m, n)])
        return full

    @classmethod
    def from_full(cls, grid: Grid, full: np.ndarray) -> SpectralField:
        full = np.asarray(full)
        if full.shape != grid.physical_shape:
            raise GridMismatchError(f"full coefficient shape {full.shape} does not match n={grid.n}")
        return cls._wrap(grid, np.array(full[..., : grid.n // 2 + 1], dtype=np.complex128))

    def coeff(self, k) -> np.ndarray:
        """Coefficient 3-vector at integer wavevector ``k`` (either sign of kz)."""
        n = self.grid.n
        kx, ky, kz = (int(v) for v in k)
        if max(abs(kx), abs(ky), abs(kz)) > n // 2:
            raise IndexError(f"wavevector {k} outside the grid")
        if kz < 0:
            return np.conj(self.coeffs[:, (-kx) % n, (-ky) % n, -kz])
        return self.coeffs[:, kx % n, ky % n, kz].copy()

    def divergence(self) -> np.ndarray:
        """k . c(k) on the stored half spectrum."""
        a, b, d = self.grid.k_vectors
        c = self.coeffs
        return a * c[0] + b * c[1] + d * c[2]

    def invariant_defects(self) -> dict[str, float]:
        """Absolute size of each invariant violation (0 for an exact field)."""
        n = self.grid.n
        c = self.coeffs
        neg = (-np.arange(n)) % n
        herm = 0.0
        for plane in (0, n // 2):
            sl = c[:, :, :, plane]
            herm = max(herm, float(np.max(np.abs(sl[:, neg][:, :, neg] - np.conj(sl)))))
        return {
            "hermitian": herm,
            "mean": float(np.max(np.abs(c[:, 0, 0, 0]))),
            "divergence": float(np.max(np.abs(self.divergence()))),
        }

    def validate(self, rtol: float = 1e-12) -> SpectralField:
        """Raise InvariantViolationError unless the field is real, mean-zero and solenoidal."""
        scale = float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0
        if not np.isfinite(scale):
            raise InvariantViolationError("non-finite coefficients")
        kmax = self.grid.n / 2 * math.sqrt(3.0)
        limits = {"hermitian": scale, "mean": scale, "divergence": scale * kmax}
        for name, value in self.invariant_defects().items():
            if value > rtol * limits[name]:
                raise InvariantViolationError(f"{name} invariant violated: defect {value:.3e}")
        return self


@dataclass(frozen=True)
class CutoffDecomposition:
    low: SpectralField
    high: SpectralField
    kappa: float


def _check_cutoff(kappa: float) -> float:
    kappa = float(kappa)
    if not kappa > 0 or not math.isfinite(kappa):
        raise ValueError(f"cutoff must be positive and finite, got {kappa}")
    return kappa


def _check_exponent(s: float) -> float:
    s = float(s)
    if not math.isfinite(s) or s < 0:
        raise ValueError(f"Sobolev exponent must be finite and non-negative, got {s}")
    return s


def leray_project(raw: SpectralField) -> SpectralField:
    """Helmholtz-Leray projection: remove the gradient part and the mean, mode by mode."""
    out = np.array(raw.coeffs, dtype=np.complex128, order="C", copy=True)
    g = raw.grid
    backend.leray_inplace(out, g.kx, g.ky, g.kz, threads())
    return SpectralField._wrap(g, out)


def truncate(u: SpectralField) -> SpectralField:
    """Galerkin projection onto the dealiasing sphere |k| <= n // 3."""
    return SpectralField._wrap(u.grid, np.where(u.grid.dealias_mask, u.coeffs, 0.0))


def sobolev_norm(u: SpectralField, s: float) -> float:
    """||u||_s = ((2pi)^3 sum |k|^(2s) |c(k)|^2)^(1/2); s = 0 is the L2 norm, s = 1 is |grad u|."""
    s = _check_exponent(s)
    g = u.grid
    total = backend.sobolev_sum(u.coeffs, g.kx, g.ky, g.kz, g.wz, s, threads())
    return math.sqrt(VOLUME * max(total, 0.0))


def inner_product(u: SpectralField, v: SpectralField) -> float:
    """L2 inner product (u, v) over the torus."""
    u._check(v)
    return VOLUME * backend.inner(u.coeffs, v.coeffs, u.grid.wz, threads())


def split(u: SpectralField, kappa: float) -> CutoffDecomposition:
    """Split into ``P_kappa u`` (eigenvalues |k|^2 <= kappa) and the remainder."""
    kappa = _check_cutoff(kappa)
    mask = u.grid.k2 <= kappa
    low = np.where(mask, u.coeffs, 0.0)
    high = np.where(mask, 0.0, u.coeffs)
    return CutoffDecomposition(SpectralField._wrap(u.grid, low), SpectralField._wrap(u.grid, high), kappa)


def bernstein_gaps(u: SpectralField, kappa: float, alpha: float, beta: float) -> tuple[float, float]:
    """Slack in the cutoff inequalities for beta > alpha.

    ``low_gap  = kappa^((beta-alpha)/2) ||u_low||_alpha  - ||u_low||_beta``
    ``high_gap = kappa^((alpha-beta)/2) ||u_high||_beta - ||u_high||_alpha``

    Both are non-negative for every field; the powers of kappa are the sharp
    ones for norms weighted by eigenvalue^s.
    """
    alpha = _check_exponent(alpha)
    beta = _check_exponent(beta)
    if not beta > alpha:
        raise ValueError(f"need beta > alpha, got alpha={alpha}, beta={beta}")
    parts = split(u, kappa)
    k = parts.kappa
    low_gap = k ** ((beta - alpha) / 2) * sobolev_norm(parts.low, alpha) - sobolev_norm(parts.low, beta)
    high_gap = k ** ((alpha - beta) / 2) * sobolev_norm(parts.high, beta) - sobolev_norm(parts.high, alpha)
    return low_gap, high_gap


def random_divfree_field(grid: Grid, spectrum_slope: float = 5.0 / 3.0, seed: int = 0, rms: float = 1.0) -> SpectralField:
    """Random real solenoidal field in the Galerkin space with shell energy ~ |k|^-slope.

    Gaussian white noise from a Philox stream keyed by ``seed`` is shaped per
    mode, truncated to the dealiasing sphere and Leray-projected. The result is
    scaled so the mean-square speed over the torus equals ``rms**2``.
    """
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    noise = rng.standard_normal(grid.physical_shape)
    c = _rfft(noise)
    k2 = grid.k2
    with np.errstate(divide="ignore"):
        amp = np.where(k2 > 0, k2, 1.0) ** (-(spectrum_slope + 2.0) / 4.0)
    keep = grid.dealias_mask & (k2 > 0)
    c = np.where(keep, c * amp, 0.0)
    backend.leray_inplace(c, grid.kx, grid.ky, grid.kz, threads())
    field = SpectralField._wrap(grid, c)
    energy = field.energy
    if energy == 0.0:
        return field
    return field * math.sqrt(rms**2 * VOLUME / energy)


def field_from_modes(grid: Grid, modes) -> SpectralField:
    """Real field from ``(k, amplitude)`` pairs; the conjugate is placed at -k.

    No projection is applied, so the caller decides whether the result is solenoidal.
    """
    n = grid.n
    full = np.zeros(grid.physical_shape, dtype=np.complex128)
    for k, amp in modes:
        kx, ky, kz = (int(v) for v in k)
        if max(abs(kx), abs(ky), abs(kz)) >= n // 2:
            raise ValueError(f"mode {k} outside the resolved range |k_i| < {n // 2}")
        if kx == ky == kz == 0:
            raise ValueError("the zero mode cannot carry a real oscillating amplitude")
        amp = np.asarray(amp, dtype=np.complex128)
        full[:, kx % n, ky % n, kz % n] += amp
        full[:, -kx % n, -ky % n, -kz % n] += np.conj(amp)
    return SpectralField.from_full(grid, full)


def resample(u: SpectralField, n: int) -> SpectralField:
    """Same Fourier series on an ``n``-point grid (zero-padded or truncated).

    Modes with any ``|k_i| >= min(n_old, n) / 2`` are dropped, which includes
    the Nyquist planes.
    """
    new = Grid(n)
    if new == u.grid:
        return u
    h = min(u.grid.n, n) // 2
    out = np.zeros(new.shape, dtype=np.complex128)
    idx_src = np.r_[0:h, -(h - 1) : 0] % u.grid.n
    idx_dst = np.r_[0:h, -(h - 1) : 0] % n
    out[:, idx_dst[:, None], idx_dst[None, :], :h] = u.coeffs[:, idx_src[:, None], idx_src[None, :], :h]
    return SpectralField._wrap(new, out)


def to_physical(u: SpectralField, n: int | None = None) -> np.ndarray:
    """Velocity samples ``(3, n, n, n)`` at ``x_j = 2pi j / n``."""
    if n is not None and n != u.grid.n:
        u = resample(u, n)
    return _irfft(u.coeffs, u.grid.n)


def from_physical(samples: np.ndarray, grid: Grid | None = None) -> SpectralField:
    """Inverse of :func:`to_physical`; no projection is applied."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 4 or samples.shape[0] != 3 or len(set(samples.shape[1:])) != 1:
        raise ValueError(f"expected samples of shape (3, n, n, n), got {samples.shape}")
    if grid is None:
        grid = Grid(samples.shape[1])
    elif samples.shape[1] != grid.n:
        raise GridMismatchError(f"samples have n={samples.shape[1]}, grid has n={grid.n}")
    return SpectralField._wrap(grid, _rfft(samples))


def lebesgue_norm(u: SpectralField, s_leb: float, oversample: int = 1) -> float:
    """L^s norm of |u| over the torus by trapezoidal quadrature on the collocation grid.

    ``oversample`` > 1 evaluates on a zero-padded grid. For even integer
    ``s_leb`` the rule is exact once ``s_leb * max|k|`` is below the sample count.
    ``s_leb = inf`` returns the maximum speed over the samples.
    """
    s_leb = float(s_leb)
    if not s_leb >= 1:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {s_leb}")
    x = to_physical(u, u.grid.n * int(oversample))
    speed2 = np.einsum("i...,i...->...", x, x)
    if math.isinf(s_leb):
        return float(np.sqrt(speed2.max()))
    if s_leb == 2.0:
        return math.sqrt(VOLUME * float(speed2.mean()))
    return (VOLUME * float(np.mean(speed2 ** (s_leb / 2.0)))) ** (1.0 / s_leb)


def shell_spectrum(u: SpectralField) -> tuple[np.ndarray, np.ndarray]:
    """Energy per integer shell ``round(|k|)``; the shells sum to |u|^2."""
    g = u.grid
    nshell = g.num_shells
    e = VOLUME * np.asarray(backend.shell_sum(u.coeffs, g.kx, g.ky, g.kz, g.wz, nshell, threads()))
    return np.arange(nshell), e
