# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pointwise kernels for the half-spectrum field layout.

Spectral arrays are ``(3, n, n, n//2 + 1)`` complex128, physical arrays are
``(3, n, n, n)`` float64. Reductions accumulate one partial per leading-axis
plane in parallel and then sum the partials serially, so results do not
depend on the thread count.
"""

import numpy as np
from cython.parallel cimport prange
from libc.math cimport pow, sqrt

ctypedef double complex cplx


def leray_inplace(cplx[:, :, :, ::1] c, const double[::1] kx, const double[::1] ky,
                  const double[::1] kz, int nthreads=1):
    cdef Py_ssize_t n0 = c.shape[1], n1 = c.shape[2], n2 = c.shape[3]
    cdef Py_ssize_t i, j, l
    cdef double a, b, d, k2
    cdef cplx dot
    for i in prange(n0, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(n1):
            for l in range(n2):
                a = kx[i]
                b = ky[j]
                d = kz[l]
                k2 = a * a + b * b + d * d
                if k2 == 0.0:
                    c[0, i, j, l] = 0
                    c[1, i, j, l] = 0
                    c[2, i, j, l] = 0
                else:
                    dot = (a * c[0, i, j, l] + b * c[1, i, j, l] + d * c[2, i, j, l]) / k2
                    c[0, i, j, l] = c[0, i, j, l] - a * dot
                    c[1, i, j, l] = c[1, i, j, l] - b * dot
                    c[2, i, j, l] = c[2, i, j, l] - d * dot


def curl(const cplx[:, :, :, ::1] c, const double[::1] kx, const double[::1] ky,
         const double[::1] kz, cplx[:, :, :, ::1] out, int nthreads=1):
    cdef Py_ssize_t n0 = c.shape[1], n1 = c.shape[2], n2 = c.shape[3]
    cdef Py_ssize_t i, j, l
    cdef double a, b, d
    cdef cplx cx, cy, cz
    for i in prange(n0, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(n1):
            for l in range(n2):
                a = kx[i]
                b = ky[j]
                d = kz[l]
                cx = c[0, i, j, l]
                cy = c[1, i, j, l]
                cz = c[2, i, j, l]
                # i k x c
                out[0, i, j, l] = 1j * (b * cz - d * cy)
                out[1, i, j, l] = 1j * (d * cx - a * cz)
                out[2, i, j, l] = 1j * (a * cy - b * cx)


def cross(const double[:, :, :, ::1] a, const double[:, :, :, ::1] b,
          double[:, :, :, ::1] out, int nthreads=1):
    cdef Py_ssize_t n0 = a.shape[1], n1 = a.shape[2], n2 = a.shape[3]
    cdef Py_ssize_t i, j, l
    cdef double ax, ay, az, bx, by, bz
    for i in prange(n0, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(n1):
            for l in range(n2):
                ax = a[0, i, j, l]
                ay = a[1, i, j, l]
                az = a[2, i, j, l]
                bx = b[0, i, j, l]
                by = b[1, i, j, l]
                bz = b[2, i, j, l]
                out[0, i, j, l] = ay * bz - az * by
                out[1, i, j, l] = az * bx - ax * bz
                out[2, i, j, l] = ax * by - ay * bx


def convect(const double[:, :, :, ::1] u, const double[:, :, :, :, ::1] grad,
            double[:, :, :, ::1] out, int nthreads=1):
    """out_i = sum_j u_j grad[j, i]."""
    cdef Py_ssize_t n0 = u.shape[1], n1 = u.shape[2], n2 = u.shape[3]
    cdef Py_ssize_t i, j, l, comp
    cdef double ux, uy, uz
    for i in prange(n0, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(n1):
            for l in range(n2):
                ux = u[0, i, j, l]
                uy = u[1, i, j, l]
                uz = u[2, i, j, l]
                for comp in range(3):
                    out[comp, i, j, l] = (ux * grad[0, comp, i, j, l]
                                          + uy * grad[1, comp, i, j, l]
                                          + uz * grad[2, comp, i, j, l])


def sobolev_sum(const cplx[:, :, :, ::1] c, const double[::1] kx, const double[::1] ky,
                const double[::1] kz, const double[::1] wz, double s, int nthreads=1):
    """sum over the half spectrum of wz * lambda**s * |c|**2."""
    cdef Py_ssize_t n0 = c.shape[1], n1 = c.shape[2], n2 = c.shape[3]
    cdef Py_ssize_t i, j, l, lam
    cdef double acc, re, im, mag2
    cdef double[::1] partial = np.zeros(n0)
    # lambda = |k|^2 is an integer, so lambda**s comes from a table
    lam_max = int(np.max(np.abs(kx)) ** 2 + np.max(np.abs(ky)) ** 2 + np.max(np.abs(kz)) ** 2)
    table_np = np.arange(lam_max + 1, dtype=np.float64) ** s
    table_np[0] = 1.0 if s == 0.0 else 0.0
    cdef double[::1] table = table_np
    for i in prange(n0, nogil=True, num_threads=nthreads, schedule="static"):
        acc = 0.0
        for j in range(n1):
            for l in range(n2):
                lam = <Py_ssize_t>(kx[i] * kx[i] + ky[j] * ky[j] + kz[l] * kz[l] + 0.5)
                re = c[0, i, j, l].real
                im = c[0, i, j, l].imag
                mag2 = re * re + im * im
                re = c[1, i, j, l].real
                im = c[1, i, j, l].imag
                mag2 = mag2 + re * re + im * im
                re = c[2, i, j, l].real
                im = c[2, i, j, l].imag
                mag2 = mag2 + re * re + im * im
                acc = acc + wz[l] * table[lam] * mag2
        partial[i] = acc
    total = 0.0
    for i in range(n0):
        total += partial[i]
    return total


def inner(const cplx[:, :, :, ::1] a, const cplx[:, :, :, ::1] b, const double[::1] wz,
          int nthreads=1):
    """Re sum over the half spectrum of wz * a . conj(b)."""
    cdef Py_ssize_t n0 = a.shape[1], n1 = a.shape[2], n2 = a.shape[3]
    cdef Py_ssize_t i, j, l, comp
    cdef double acc, term
    cdef double[::1] partial = np.zeros(n0)
    for i in prange(n0, nogil=True, num_threads=nthreads, schedule="static"):
        acc = 0.0
        for j in range(n1):
            for l in range(n2):
                term = 0.0
                for comp in range(3):
                    term = term + (a[comp, i, j, l].real * b[comp, i, j, l].real
                                   + a[comp, i, j, l].imag * b[comp, i, j, l].imag)
                acc = acc + wz[l] * term
        partial[i] = acc
    total = 0.0
    for i in range(n0):
        total += partial[i]
    return total


def shell_sum(const cplx[:, :, :, ::1] c, const double[::1] kx, const double[::1] ky,
              const double[::1] kz, const double[::1] wz, Py_ssize_t nshell, int nthreads=1):
    """Energy |c|**2 (half-spectrum weighted) binned by round(|k|)."""
    cdef Py_ssize_t n0 = c.shape[1], n1 = c.shape[2], n2 = c.shape[3]
    cdef Py_ssize_t i, j, l, comp, shell
    cdef double re, im, mag2
    cdef double[:, ::1] partial = np.zeros((n0, nshell))
    for i in prange(n0, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(n1):
            for l in range(n2):
                shell = <Py_ssize_t>(sqrt(kx[i] * kx[i] + ky[j] * ky[j] + kz[l] * kz[l]) + 0.5)
                if shell >= nshell:
                    continue
                mag2 = 0.0
                for comp in range(3):
                    re = c[comp, i, j, l].real
                    im = c[comp, i, j, l].imag
                    mag2 = mag2 + re * re + im * im
                partial[i, shell] += wz[l] * mag2
    out = np.zeros(nshell)
    for i in range(n0):
        for shell in range(nshell):
            out[shell] += partial[i, shell]
    return out
