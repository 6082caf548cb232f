"""Cell-averaged densities on a uniform grid of [0, 1].

A density is stored as cell averages on N equal cells, optionally mirrored
by the coefficients of its Neumann cosine expansion

    rho(x) = c_0 + sum_{m >= 1} c_m cos(m pi x).

Transforms between the two representations integrate the cosines exactly
over each cell, so a density that is band-limited to the retained modes
round-trips to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = ["DensityGrid"]

MASS_TOL = 1e-9
NEG_TOL = 1e-12


@lru_cache(maxsize=16)
def _cosine_tables(n: int, m: int):
    """Cosine design matrix and cell-averaging weights for an n-cell grid.

    Returns (C, w) with C[j, i] = cos(j pi mid_i) for modes j = 0..m and
    w[j] = sinc-type factor such that the exact average of cos(j pi x) over
    cell i equals w[j] * C[j, i].
    """
    mids = (np.arange(n) + 0.5) / n
    modes = np.arange(m + 1)
    table = np.cos(np.pi * np.outer(modes, mids))
    half = 0.5 * np.pi * modes / n
    w = np.ones(m + 1)
    w[1:] = np.sin(half[1:]) / half[1:]
    return table, w


def mode_analysis(values: np.ndarray, m: int) -> np.ndarray:
    """Cosine coefficients of the density with the given cell averages.

    Exact inverse of :func:`mode_synthesis` on its range: recovers the
    coefficients of the band-limited density whose cell averages are
    ``values`` (the averaging factor is deconvolved away), so the pair
    round-trips to machine precision on resolved data.
    """
    n = values.shape[0]
    table, w = _cosine_tables(n, m)
    coef = np.empty(m + 1)
    coef[0] = values.mean()
    coef[1:] = (2.0 / n) * (table[1:] @ values) / w[1:]
    return coef


def mode_synthesis(coef: np.ndarray, n: int) -> np.ndarray:
    """Exact cell averages of the cosine series with the given coefficients."""
    m = coef.shape[0] - 1
    table, w = _cosine_tables(n, m)
    return coef[0] + (coef[1:] * w[1:]) @ table[1:]


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Unit-mass, nonnegative density given by cell averages.

    ``values[i]`` is the average of rho over [i/n, (i+1)/n], so the total
    mass is ``values.mean()``.  ``modes`` optionally carries the cosine
    coefficients of the same density (the spectral mirror).
    """

    values: np.ndarray
    modes: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("density needs a 1-D array of at least 2 cells")
        if not np.all(np.isfinite(v)):
            raise ValueError("density contains non-finite cell averages")
        if v.min() < -NEG_TOL:
            raise ValueError(
                f"density has negative cell average {v.min():.3e} beyond tolerance {-NEG_TOL}")
        if abs(v.mean() - 1.0) > MASS_TOL:
            raise ValueError(f"density mass {v.mean()!r} differs from 1 beyond {MASS_TOL}")
        object.__setattr__(self, "values", v)
        if self.modes is not None:
            object.__setattr__(self, "modes", np.asarray(self.modes, dtype=float))

    # -- constructors ---------------------------------------------------------

    @classmethod
    def uniform(cls, n: int) -> "DensityGrid":
        return cls(np.ones(n))

    @classmethod
    def from_function(cls, f, n: int, rule: int = 5) -> "DensityGrid":
        """Cell averages of a density function by per-cell Gauss quadrature."""
        nodes, weights = np.polynomial.legendre.leggauss(rule)
        h = 1.0 / n
        left = np.arange(n) * h
        pts = left[:, None] + 0.5 * h * (nodes[None, :] + 1.0)
        vals = 0.5 * (np.asarray(f(pts.ravel())).reshape(n, rule) @ weights)
        vals /= vals.mean()
        return cls(vals)

    @classmethod
    def from_modes(cls, coef: np.ndarray, n: int) -> "DensityGrid":
        """Density with the given cosine coefficients (coef[0] must be 1)."""
        coef = np.asarray(coef, dtype=float)
        return cls(mode_synthesis(coef, n), modes=coef)

    # -- queries --------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def mass(self) -> float:
        return float(self.values.mean())

    def cell_midpoints(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.n

    def l1_distance(self, other: "DensityGrid") -> float:
        if other.n != self.n:
            raise ValueError("grids have different resolutions")
        return float(np.abs(self.values - other.values).mean())

    def with_modes(self, m: int | None = None) -> "DensityGrid":
        """Attach the spectral mirror (modes 0..m, default n//2)."""
        m = self.n // 2 if m is None else m
        return DensityGrid(self.values, modes=mode_analysis(self.values, m))

    def sanitized(self) -> "DensityGrid":
        """Clip roundoff-negative cells to zero and renormalize the mass."""
        v = np.clip(self.values, 0.0, None)
        return DensityGrid(v / v.mean(), modes=self.modes)
