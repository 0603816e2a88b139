"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and layouts; used when the extension is not built or when
``ENERGYLAB_PURE_PYTHON=1``. ``nthreads`` is accepted and ignored.
"""

import numpy as np


def _mesh(kx, ky, kz):
    return kx[:, None, None], ky[None, :, None], kz[None, None, :]


def leray_inplace(c, kx, ky, kz, nthreads=1):
    a, b, d = _mesh(kx, ky, kz)
    k2 = a * a + b * b + d * d
    safe = np.where(k2 == 0.0, 1.0, k2)
    dot = (a * c[0] + b * c[1] + d * c[2]) / safe
    c[0] -= a * dot
    c[1] -= b * dot
    c[2] -= d * dot
    c[:, k2 == 0.0] = 0.0


def curl(c, kx, ky, kz, out, nthreads=1):
    a, b, d = _mesh(kx, ky, kz)
    out[0] = 1j * (b * c[2] - d * c[1])
    out[1] = 1j * (d * c[0] - a * c[2])
    out[2] = 1j * (a * c[1] - b * c[0])


def cross(a, b, out, nthreads=1):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


def convect(u, grad, out, nthreads=1):
    for comp in range(3):
        out[comp] = u[0] * grad[0, comp] + u[1] * grad[1, comp] + u[2] * grad[2, comp]


def _lambda_weight(kx, ky, kz, wz, s):
    a, b, d = _mesh(kx, ky, kz)
    lam = a * a + b * b + d * d
    if s == 0.0:
        return np.broadcast_to(wz[None, None, :], lam.shape)
    with np.errstate(divide="ignore"):
        w = wz[None, None, :] * np.power(lam, s)
    w[lam == 0.0] = 0.0
    return w


def sobolev_sum(c, kx, ky, kz, wz, s, nthreads=1):
    mag2 = (c.real**2 + c.imag**2).sum(axis=0)
    partial = (_lambda_weight(kx, ky, kz, wz, s) * mag2).sum(axis=(1, 2))
    return float(partial.sum())


def inner(a, b, wz, nthreads=1):
    term = (a.real * b.real + a.imag * b.imag).sum(axis=0)
    return float((term * wz[None, None, :]).sum(axis=(1, 2)).sum())


def shell_sum(c, kx, ky, kz, wz, nshell, nthreads=1):
    a, b, d = _mesh(kx, ky, kz)
    shell = np.floor(np.sqrt(a * a + b * b + d * d) + 0.5).astype(np.intp)
    mag2 = (c.real**2 + c.imag**2).sum(axis=0) * wz[None, None, :]
    keep = shell < nshell
    return np.bincount(shell[keep], weights=mag2[keep], minlength=nshell)[:nshell]
