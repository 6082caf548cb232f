"""Heat kernels for Neumann boundary conditions on [0, 1].

Provides the free-space Gaussian kernel, its 2-periodic wrap, the Neumann
Green function in both classical representations

    g(xi, x, s) = 1 + 2 sum_n cos(n pi xi) cos(n pi x) exp(-n^2 pi^2 s)
                = G(x + xi, s) + G(x - xi, s),

a closed-form antiderivative of g in x, and exact spectral diffusion of a
cell-averaged density.  The image sum converges fast for small s and the
cosine series for large s; ``method="auto"`` switches at ``s_star``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .grid import DensityGrid, mode_analysis, mode_synthesis

__all__ = [
    "KernelEval",
    "DEFAULT_EVAL",
    "heat_kernel",
    "periodic_kernel",
    "periodic_kernel_dx",
    "neumann_green",
    "neumann_green_cdf",
    "diffuse",
]


@dataclass(frozen=True)
class KernelEval:
    """Truncation policy for the series evaluators.

    eps: magnitude below which the remainder is discarded.
    s_star: crossover time between image sum (s < s_star) and cosine
        series (s >= s_star); 1/pi keeps both series short.
    """

    eps: float = 1e-14
    s_star: float = 1.0 / np.pi

    def image_count(self, s: float) -> int:
        """Gaussian images needed so the first omitted term is below eps.

        The omitted images have |argument| >= 2 n_max - 1, and the tail is
        dominated by a geometric factor < 2, so requiring the first omitted
        Gaussian below eps/2 bounds the remainder by eps.
        """
        span = 2.0 * np.sqrt(s * max(np.log(2.0 / self.eps), 1.0))
        return max(6, int(np.ceil((span + 1.0) / 2.0)) + 1)

    def cosine_count(self, s: float) -> int:
        """Cosine modes needed: exp(-N^2 pi^2 s) <= eps bounds the tail
        by eps / (1 - exp(-(2N+1) pi^2 s))."""
        n = int(np.ceil(np.sqrt(max(np.log(1.0 / self.eps), 1.0) / (np.pi**2 * s))))
        return max(2, n + 1)


DEFAULT_EVAL = KernelEval()


def _check_time(s) -> float:
    s = float(s)
    if s <= 0.0:
        raise ValueError(f"kernel time must be positive, got {s}")
    return s


def heat_kernel(x, s):
    """Free-space Gaussian kernel exp(-x^2 / 4s) / (2 sqrt(pi s))."""
    s = _check_time(s)
    x = np.asarray(x, dtype=float)
    out = np.exp(-(x**2) / (4.0 * s)) / (2.0 * np.sqrt(np.pi * s))
    return out if out.ndim else float(out)


def _wrap(x):
    """Reduce positions to the fundamental window [-1, 1)."""
    return np.mod(np.asarray(x, dtype=float) + 1.0, 2.0) - 1.0


def _resolve(s, method, ev: KernelEval) -> str:
    if method == "auto":
        return "image" if s < ev.s_star else "cosine"
    if method not in ("image", "cosine"):
        raise ValueError(f"unknown kernel method {method!r}")
    return method


def periodic_kernel(x, s, method="auto", ev: KernelEval = DEFAULT_EVAL):
    """2-periodic even wrap G(x, s) = sum_n Gamma_s(x + 2n).

    Equals 1/2 + sum_{n>=1} cos(n pi x) exp(-n^2 pi^2 s) in the cosine
    representation.
    """
    s = _check_time(s)
    if _resolve(s, method, ev) == "image":
        r = _wrap(x)
        shifts = 2.0 * np.arange(-ev.image_count(s), ev.image_count(s) + 1)
        out = heat_kernel(r[..., None] + shifts, s).sum(axis=-1)
    else:
        r = np.asarray(x, dtype=float)
        n = np.arange(1, ev.cosine_count(s) + 1)
        out = 0.5 + np.cos(np.pi * r[..., None] * n) @ np.exp(-(n**2) * np.pi**2 * s)
    return out if out.ndim else float(out)


def periodic_kernel_dx(x, s, method="auto", ev: KernelEval = DEFAULT_EVAL):
    """x-derivative of the wrapped kernel."""
    s = _check_time(s)
    if _resolve(s, method, ev) == "image":
        r = _wrap(x)
        shifts = 2.0 * np.arange(-ev.image_count(s), ev.image_count(s) + 1)
        args = r[..., None] + shifts
        out = (-args / (2.0 * s) * heat_kernel(args, s)).sum(axis=-1)
    else:
        r = np.asarray(x, dtype=float)
        n = np.arange(1, ev.cosine_count(s) + 1)
        out = -np.sin(np.pi * r[..., None] * n) @ (n * np.pi * np.exp(-(n**2) * np.pi**2 * s))
    return out if out.ndim else float(out)


def neumann_green(xi, x, s, method="auto", ev: KernelEval = DEFAULT_EVAL):
    """Green function of the Neumann heat problem on [0, 1].

    Symmetric in (xi, x), nonnegative, unit integral in x.  The image form
    evaluates G(x + xi) + G(x - xi); the cosine form sums the double-cosine
    series directly, so the two paths are independent checks of each other.
    """
    s = _check_time(s)
    xi = np.asarray(xi, dtype=float)
    x = np.asarray(x, dtype=float)
    if _resolve(s, method, ev) == "image":
        out = np.asarray(periodic_kernel(x + xi, s, "image", ev)
                         + periodic_kernel(x - xi, s, "image", ev))
    else:
        n = np.arange(1, ev.cosine_count(s) + 1)
        decay = np.exp(-(n**2) * np.pi**2 * s)
        out = 1.0 + 2.0 * (np.cos(np.pi * xi[..., None] * n)
                           * np.cos(np.pi * x[..., None] * n)) @ decay
    return out if out.ndim else float(out)


def neumann_green_cdf(xi, x, s, method="auto", ev: KernelEval = DEFAULT_EVAL):
    """Antiderivative int_0^x g(xi, u, s) du, exact per representation.

    Cosine form: x + 2 sum_n cos(n pi xi) sin(n pi x) exp(-n^2 pi^2 s)/(n pi).
    Image form: sums of error functions, one pair per Gaussian image.
    """
    s = _check_time(s)
    xi = np.asarray(xi, dtype=float)
    x = np.asarray(x, dtype=float)
    if _resolve(s, method, ev) == "image":
        shifts = 2.0 * np.arange(-ev.image_count(s), ev.image_count(s) + 1)
        den = 2.0 * np.sqrt(s)
        out = np.zeros(np.broadcast(xi, x).shape)
        for sign in (1.0, -1.0):
            hi = (x[..., None] + sign * xi[..., None] + shifts) / den
            lo = (sign * xi[..., None] + shifts) / den
            out = out + 0.5 * (erf(hi) - erf(lo)).sum(axis=-1)
    else:
        n = np.arange(1, ev.cosine_count(s) + 1)
        decay = np.exp(-(n**2) * np.pi**2 * s) / (n * np.pi)
        out = x + 2.0 * (np.cos(np.pi * xi[..., None] * n)
                         * np.sin(np.pi * x[..., None] * n)) @ decay
    return out if out.ndim else float(out)


def diffuse(rho: DensityGrid, s: float, m: int | None = None) -> DensityGrid:
    """Neumann heat flow of a density for nondimensional time s.

    Propagates the cosine coefficients exactly (mode m scales by
    exp(-m^2 pi^2 s)) and resynthesizes cell averages, so the diffusion
    phase carries no time-stepping error.  s = 0 is the identity; the
    constant mode is untouched, so mass is conserved exactly.
    """
    s = float(s)
    if s < 0.0:
        raise ValueError(f"diffusion time must be nonnegative, got {s}")
    if s == 0.0:
        return rho
    m = rho.n // 2 if m is None else m
    coef = rho.modes if (rho.modes is not None and rho.modes.shape[0] == m + 1) \
        else mode_analysis(rho.values, m)
    modes = np.arange(m + 1)
    with np.errstate(under="ignore"):
        coef = coef * np.exp(-(modes**2) * np.pi**2 * s)
    return DensityGrid(mode_synthesis(coef, rho.n), modes=coef)
