"""Extended periodic domain, uniform grid and penalization mask.

The physical interval ``Omega = [a, b]`` is padded by one horizon on each
side. The padded interval ``T = [a - delta, b + delta)`` is treated as
periodic; the two pads ``Gamma1 = [a - delta, a)`` and
``Gamma2 = (b, b + delta)`` carry the volume constraints.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import LayoutError

MIN_NODES = 8
#: Nodes this close (in units of dx) to a boundary point belong to Omega.
BOUNDARY_TOL = 1e-9


class Region(enum.IntEnum):
    OMEGA = 0
    GAMMA1 = 1
    GAMMA2 = 2


@dataclass(frozen=True)
class DomainLayout:
    omega_left: float
    omega_right: float
    delta: float

    def __post_init__(self):
        if not self.omega_right > self.omega_left:
            raise LayoutError("omega_right must exceed omega_left")
        if not self.delta > 0:
            raise LayoutError("delta must be positive")

    @property
    def L(self) -> float:
        return self.omega_right - self.omega_left

    @property
    def S(self) -> float:
        return self.L + 2.0 * self.delta

    @property
    def x0(self) -> float:
        return self.omega_left - self.delta

    @property
    def center(self) -> float:
        return 0.5 * (self.omega_left + self.omega_right)


@dataclass(frozen=True)
class PeriodicGrid:
    """``n`` uniform nodes ``x0 + i*dx`` on the half-open interval ``[x0, x0 + n*dx)``."""

    n: int
    x0: float
    dx: float

    @property
    def S(self) -> float:
        return self.n * self.dx

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    def wrap(self, i):
        return np.mod(i, self.n)


@dataclass(frozen=True, eq=False)
class MaskField:
    """Penalization indicator ``chi`` (1 on the pads, 0 on Omega) and region tags."""

    chi: np.ndarray
    region: np.ndarray

    @property
    def omega(self) -> np.ndarray:
        return self.region == Region.OMEGA

    @property
    def gamma1(self) -> np.ndarray:
        return self.region == Region.GAMMA1

    @property
    def gamma2(self) -> np.ndarray:
        return self.region == Region.GAMMA2


def build_layout(L: float, delta: float, center: float = 0.0) -> DomainLayout:
    if not L > 0:
        raise LayoutError(f"domain length must be positive, got {L!r}")
    if not delta > 0:
        raise LayoutError(f"horizon must be positive, got {delta!r}")
    return DomainLayout(center - 0.5 * L, center + 0.5 * L, float(delta))


def build_grid(layout: DomainLayout, n: int) -> PeriodicGrid:
    if int(n) != n or n < MIN_NODES:
        raise LayoutError(f"need an integer n >= {MIN_NODES}, got {n!r}")
    n = int(n)
    return PeriodicGrid(n, layout.x0, layout.S / n)


def build_mask(layout: DomainLayout, grid: PeriodicGrid) -> MaskField:
    x = grid.x
    tol = BOUNDARY_TOL * grid.dx
    region = np.full(grid.n, Region.OMEGA, dtype=np.int8)
    region[x < layout.omega_left - tol] = Region.GAMMA1
    region[x > layout.omega_right + tol] = Region.GAMMA2
    chi = (region != Region.OMEGA).astype(float)
    chi.setflags(write=False)
    region.setflags(write=False)
    return MaskField(chi, region)
