"""Compactly supported peridynamic kernels.

A kernel ``mu(x)`` is even, nonnegative and vanishes for ``|x| > delta``.
Its integral ``beta`` enters the nonlocal Laplacian ``mu * u - beta * u``.
Two families are supported: the constant-exponent triangular kernel
``12/delta**3 * (1 - |x|/delta)`` and user-supplied sample tables that are
interpolated piecewise-linearly and extended evenly.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .exceptions import InvalidKernelError, UnderResolvedHorizonError

if TYPE_CHECKING:
    from .grid import PeriodicGrid

#: Relative tolerance between a user-supplied beta and the table integral.
BETA_RTOL = 1e-6


class KernelFamily(str, enum.Enum):
    TRIANGULAR_ALPHA0 = "triangular_alpha0"
    CUSTOM = "custom"


@dataclass(frozen=True)
class KernelSpec:
    """Immutable description of a kernel.

    Use :meth:`triangular` or :meth:`custom` rather than calling the
    constructor directly; they validate and derive ``beta``.
    """

    family: KernelFamily
    delta: float
    beta: float
    offsets: tuple[float, ...] = field(default=(), repr=False)
    values: tuple[float, ...] = field(default=(), repr=False)

    @classmethod
    def triangular(cls, delta: float) -> KernelSpec:
        delta = float(delta)
        if not np.isfinite(delta) or delta <= 0:
            raise InvalidKernelError(f"horizon must be positive, got {delta!r}")
        return cls(KernelFamily.TRIANGULAR_ALPHA0, delta, 12.0 / delta**2)

    @classmethod
    def custom(cls, offsets, values, beta: float, *,
               allow_negative: bool = False) -> KernelSpec:
        """Build a kernel from a table of nonnegative offsets and values.

        The horizon is the largest offset. ``beta`` must match twice the
        trapezoidal integral of the table to within ``BETA_RTOL``. Tables
        with negative values are rejected unless ``allow_negative`` is set,
        which exists so that admissibility screening can be exercised on
        candidate kernels before they are used.
        """
        off = np.asarray(offsets, dtype=float).ravel()
        val = np.asarray(values, dtype=float).ravel()
        if off.size != val.size or off.size < 2:
            raise InvalidKernelError("sample table needs at least two (offset, value) rows")
        if not (np.all(np.isfinite(off)) and np.all(np.isfinite(val))):
            raise InvalidKernelError("sample table contains non-finite entries")
        if off[0] != 0.0 or np.any(np.diff(off) <= 0):
            raise InvalidKernelError("offsets must start at 0 and increase strictly")
        if not allow_negative and np.any(val < 0):
            raise InvalidKernelError("kernel samples must be nonnegative")
        beta = float(beta)
        integral = 2.0 * float(np.trapezoid(val, off))
        if not np.isfinite(beta) or beta <= 0:
            raise InvalidKernelError(f"beta must be positive, got {beta!r}")
        if abs(integral - beta) > BETA_RTOL * abs(beta):
            raise InvalidKernelError(
                f"beta={beta!r} disagrees with table integral {integral!r}")
        return cls(KernelFamily.CUSTOM, float(off[-1]), beta,
                   tuple(off.tolist()), tuple(val.tolist()))

    def __call__(self, x):
        return evaluate_kernel(self, x)


def load_kernel_table(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``offset,value`` CSV (an optional header is skipped)."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if lineno == 1:
                    continue
                raise InvalidKernelError(f"{path}:{lineno}: expected 'offset,value'")
    if not rows:
        raise InvalidKernelError(f"{path}: no kernel samples")
    table = np.array(rows)
    return table[:, 0], table[:, 1]


def evaluate_kernel(spec: KernelSpec, x):
    """Kernel value at ``x`` (scalar or array). Zero outside the horizon."""
    ax = np.abs(np.asarray(x, dtype=float))
    if spec.family is KernelFamily.TRIANGULAR_ALPHA0:
        d = spec.delta
        out = np.where(ax <= d, (12.0 / d**3) * (1.0 - ax / d), 0.0)
    else:
        out = np.interp(ax, spec.offsets, spec.values, right=0.0)
        out = np.where(ax <= spec.delta, out, 0.0)
    return float(out) if out.ndim == 0 else out


def compute_beta(spec: KernelSpec) -> float:
    """Integral of the kernel over the real line."""
    if spec.family is KernelFamily.TRIANGULAR_ALPHA0:
        return 12.0 / spec.delta**2
    integral = 2.0 * float(np.trapezoid(spec.values, spec.offsets))
    if abs(integral - spec.beta) > BETA_RTOL * abs(spec.beta):
        raise InvalidKernelError(
            f"beta={spec.beta!r} disagrees with table integral {integral!r}")
    return spec.beta


def wrapped_offsets(grid: PeriodicGrid) -> np.ndarray:
    """Periodic distance of node ``p`` from node 0, ``min(p, n - p) * dx``."""
    p = np.arange(grid.n)
    return np.minimum(p, grid.n - p) * grid.dx


def sample_circular_kernel(spec: KernelSpec, grid: PeriodicGrid) -> np.ndarray:
    """Kernel laid out periodically on ``grid`` with its centre at index 0.

    ``w[p] = mu(min(p*dx, S - p*dx))`` so that ``w[p] == w[n - p]`` exactly
    and both lobes of the horizon are present.
    """
    if grid.dx >= spec.delta:
        raise UnderResolvedHorizonError(
            f"dx={grid.dx!r} does not resolve horizon delta={spec.delta!r}")
    return evaluate_kernel(spec, wrapped_offsets(grid))


@dataclass(frozen=True)
class AdmissibilityReport:
    """Per-wavenumber margins ``beta - sum_p mu_p cos(k x_p) dx``.

    A negative margin means the forward Euler amplification factor can
    exceed one for that mode regardless of the time step.
    """

    wavenumbers: np.ndarray
    margins: np.ndarray
    tolerance: float

    @property
    def admissible(self) -> bool:
        return bool(np.all(self.margins >= -self.tolerance))

    @property
    def worst_margin(self) -> float:
        return float(self.margins.min())

    @property
    def violations(self) -> np.ndarray:
        return np.flatnonzero(self.margins < -self.tolerance)


def check_kernel_admissibility(spec: KernelSpec, grid: PeriodicGrid,
                               rtol: float = 1e-3) -> AdmissibilityReport:
    """Check that every grid mode of the sampled kernel is bounded by beta.

    The sampled kernel sum overshoots ``beta`` by a quadrature error of
    order ``dx**2`` at ``k = 0``, so margins down to ``-rtol * beta`` are
    accepted.
    """
    w = sample_circular_kernel(spec, grid)
    symbol = np.fft.fft(w).real * grid.dx
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.dx)
    return AdmissibilityReport(k, spec.beta - symbol, rtol * spec.beta)
