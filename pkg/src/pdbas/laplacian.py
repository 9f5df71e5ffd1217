"""Peridynamic Laplacian ``mu * u - beta * u`` on a periodic grid.

Two evaluations are provided and must agree to round-off:

* :func:`laplacian_spectral` computes the circular convolution as a
  pointwise product of discrete Fourier transforms, O(N log N).
* :func:`laplacian_quadrature` sums ``mu(x_i - x_j) u_j dx`` over the
  ``2r + 1`` neighbours inside the horizon, O(N r).

The transform pair is unnormalized forward, ``1/n`` inverse (numpy's
default). Under that convention the inverse transform of
``kernel_hat * u_hat`` times ``dx`` is exactly the physical-space sum.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .exceptions import LayoutError, NormalizationError
from .grid import PeriodicGrid
from .kernel import KernelFamily, KernelSpec, evaluate_kernel, sample_circular_kernel

IMAG_RTOL = 1e-8


def dft_forward(values) -> np.ndarray:
    """Unnormalized DFT, ``u_hat[k] = sum_i u[i] exp(-2j pi k i / n)``."""
    return np.fft.fft(np.asarray(values))


def dft_inverse(spectrum) -> np.ndarray:
    """Inverse of :func:`dft_forward` (carries the ``1/n`` factor)."""
    return np.fft.ifft(np.asarray(spectrum))


@lru_cache(maxsize=64)
def _kernel_spectrum(spec: KernelSpec, grid: PeriodicGrid) -> np.ndarray:
    out = dft_forward(sample_circular_kernel(spec, grid))
    out.setflags(write=False)
    return out


def kernel_spectrum(spec: KernelSpec, grid: PeriodicGrid) -> np.ndarray:
    """Full DFT of the circular kernel samples, cached per (kernel, grid)."""
    return _kernel_spectrum(spec, grid)


@lru_cache(maxsize=64)
def _kernel_rspectrum(spec: KernelSpec, grid: PeriodicGrid) -> np.ndarray:
    out = np.fft.rfft(sample_circular_kernel(spec, grid)) * grid.dx
    out.setflags(write=False)
    return out


def kernel_rspectrum(spec: KernelSpec, grid: PeriodicGrid) -> np.ndarray:
    """Half spectrum of the kernel samples with ``dx`` folded in.

    Used by the time stepper together with :func:`numpy.fft.rfft`.
    """
    return _kernel_rspectrum(spec, grid)


def laplacian_spectral(u, kernel_hat, beta: float, dx: float) -> np.ndarray:
    """Spectral evaluation of ``mu * u - beta * u``.

    ``kernel_hat`` is ``dft_forward`` of the circular kernel samples on the
    same grid. The imaginary part left by the inverse transform is checked
    and discarded; a large residue means the kernel spectrum was built with
    a different normalization or a non-symmetric layout.
    """
    u = np.asarray(u, dtype=float)
    conv = dft_inverse(kernel_hat * dft_forward(u))
    scale = max(float(np.abs(conv.real).max()), np.finfo(float).tiny)
    residue = float(np.abs(conv.imag).max())
    if residue > IMAG_RTOL * scale:
        raise NormalizationError(
            f"imaginary residue {residue:.3e} exceeds {IMAG_RTOL:g} relative to {scale:.3e}")
    return conv.real * dx - beta * u


def laplacian_spectral_real(u: np.ndarray, kernel_rhat: np.ndarray, beta: float) -> np.ndarray:
    """Half-spectrum fast path; ``kernel_rhat`` comes from :func:`kernel_rspectrum`."""
    conv = np.fft.irfft(kernel_rhat * np.fft.rfft(u), u.shape[-1])
    conv -= beta * u
    return conv


def quadrature_radius(spec: KernelSpec, grid: PeriodicGrid) -> int:
    """Summation half-width ``round(delta/dx)`` (half-up rounding)."""
    return int(np.floor(spec.delta / grid.dx + 0.5))


@lru_cache(maxsize=1)
def _quadrature_loop():
    import numba

    @numba.njit(cache=True)
    def loop(u, weights, r, out):
        n = u.shape[0]
        # interior rows never wrap, which keeps the inner loop branch-free
        for i in range(r, n - r):
            acc = 0.0
            for p in range(2 * r + 1):
                acc += weights[p] * u[i - r + p]
            out[i] = acc
        for i in list(range(0, r)) + list(range(n - r, n)):
            acc = 0.0
            for p in range(-r, r + 1):
                j = i + p
                if j < 0:
                    j += n
                elif j >= n:
                    j -= n
                acc += weights[p + r] * u[j]
            out[i] = acc
        return out

    return loop


@lru_cache(maxsize=64)
def _quadrature_weights(spec: KernelSpec, grid: PeriodicGrid) -> tuple[int, np.ndarray]:
    r = quadrature_radius(spec, grid)
    if 2 * r + 1 > grid.n:
        raise LayoutError("horizon wraps onto itself; the periodic domain is too short")
    p = np.arange(-r, r + 1)
    weights = np.ascontiguousarray(evaluate_kernel(spec, np.abs(p) * grid.dx) * grid.dx)
    weights.setflags(write=False)
    return r, weights


def laplacian_quadrature(u, spec: KernelSpec, grid: PeriodicGrid) -> np.ndarray:
    """Direct one-point quadrature of the nonlocal Laplacian.

    ``(L u)_i = sum_{j=i-r}^{i+r} mu(x_i - x_j) u_j dx - beta u_i`` with
    periodic index wrap and ``r = round(delta/dx)``.
    """
    u = np.ascontiguousarray(u, dtype=float)
    if u.shape != (grid.n,):
        raise LayoutError(f"field has shape {u.shape}, grid has {grid.n} nodes")
    r, weights = _quadrature_weights(spec, grid)
    out = _quadrature_loop()(u, weights, r, np.empty_like(u))
    out -= spec.beta * u
    return out


def pd_laplacian_eigenvalue(c, spec: KernelSpec):
    """Continuous eigenvalue of the triangular-kernel Laplacian for ``sin(c x)``.

    ``lambda(c) = 24 (1 - cos(c delta)) / (delta**4 c**2) - 12/delta**2``,
    written with ``1 - cos = 2 sin**2(./2)`` to avoid cancellation near 0.
    """
    if spec.family is not KernelFamily.TRIANGULAR_ALPHA0:
        raise ValueError("closed-form eigenvalue only exists for the triangular kernel")
    c = np.asarray(c, dtype=float)
    d = spec.delta
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = 48.0 * np.sin(0.5 * c * d) ** 2 / (d**4 * c**2) - 12.0 / d**2
    lam = np.where(c == 0, 0.0, lam)
    return float(lam) if lam.ndim == 0 else lam
