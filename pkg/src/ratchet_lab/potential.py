"""Periodic sawtooth-like potential with smoothstep teeth.

The profile has ``k`` identical teeth on [0, 1]: barriers of height ``v0``
at x = 0, 1/k, ..., 1 and a single interior minimum per tooth at offset
``a`` from the left barrier.  Both ramps are degree-9 smoothsteps, so the
profile is C^4 across every junction and strictly monotone between a
barrier and the adjacent minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RatchetPotential"]


def _smoothstep(t: np.ndarray, order: int = 0) -> np.ndarray:
    """Degree-9 smoothstep S and its derivatives.

    S(t) = 126 t^5 - 420 t^6 + 540 t^7 - 315 t^8 + 70 t^9 satisfies
    S(0) = 0, S(1) = 1 and S', S'', S''', S'''' all vanish at t = 0, 1;
    S'(t) = 630 t^4 (1-t)^4 > 0 on (0, 1).
    """
    t = np.asarray(t, dtype=float)
    if order == 0:
        return t**5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + t * 70.0))))
    if order == 1:
        return 630.0 * t**4 * (1.0 - t) ** 4
    if order == 2:
        return 2520.0 * t**3 * (1.0 - t) ** 3 * (1.0 - 2.0 * t)
    if order == 3:
        return 2520.0 * t**2 * (1.0 - t) ** 2 * (14.0 * t * (t - 1.0) + 3.0)
    if order == 4:
        return (15120.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
                * (7.0 * t * (t - 1.0) + 1.0))
    raise ValueError(f"smoothstep derivative order must be 0..4, got {order}")


@dataclass(frozen=True)
class RatchetPotential:
    """Asymmetric 1/k-periodic potential on [0, 1].

    Attributes:
        k: number of teeth (>= 2).
        a: offset of the minimum inside each tooth, in (0, 1/k).  Minima
           sit in the left half of each tooth when a < 1/(2k).
        v0: barrier height (> 0).

    Immutable after construction; all evaluators are pure.
    """

    k: int
    a: float
    v0: float = 1.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ValueError(f"tooth count k must be an integer >= 2, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if not 0.0 < self.a < 1.0 / self.k:
            raise ValueError(
                f"minimum offset a must lie in (0, 1/k) = (0, {1.0 / self.k}), got {self.a}")
        if not self.v0 > 0.0:
            raise ValueError(f"barrier height v0 must be positive, got {self.v0}")

    # -- geometry -----------------------------------------------------------

    def well_boundaries(self) -> np.ndarray:
        """Barrier positions x_i = (i-1)/k, i = 1..k+1 (exact)."""
        return np.arange(self.k + 1) / self.k

    def minima(self) -> np.ndarray:
        """Minimum positions a_i = a + (i-1)/k, i = 1..k."""
        return self.a + np.arange(self.k) / self.k

    def reflected(self) -> "RatchetPotential":
        """Potential with minima mirrored inside each tooth (a -> 1/k - a).

        Equals x -> psi(1 - x) of the original profile.
        """
        return RatchetPotential(self.k, 1.0 / self.k - self.a, self.v0)

    # -- evaluation ----------------------------------------------------------

    def _local(self, x):
        """Normalized tooth coordinate r in [0, 1) and validity check."""
        x = np.asarray(x, dtype=float)
        if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
            raise ValueError("position outside [0, 1]")
        return np.mod(x * self.k, 1.0)

    def psi(self, x):
        """Potential value; v0 at barriers, 0 at minima.

        The falling ramp is evaluated through the smoothstep symmetry
        S(1 - t) = 1 - S(t), so values near the minima come out as small
        positive numbers instead of a cancellation-noisy 1 - S.
        """
        r = self._local(x)
        alpha = self.a * self.k  # minimum position in tooth coordinates
        down = self.v0 * _smoothstep(1.0 - np.minimum(r, alpha) / alpha)
        up = self.v0 * _smoothstep((np.maximum(r, alpha) - alpha) / (1.0 - alpha))
        out = np.where(r <= alpha, down, up)
        return out if out.ndim else float(out)

    def dpsi(self, x, order: int = 1):
        """Derivative of the potential; order 1 is the drift slope b = psi'.

        Orders up to 4 are available in closed form (the profile is C^4, so
        one-sided values agree at junctions).
        """
        if not 1 <= order <= 4:
            raise ValueError(f"derivative order must be 1..4, got {order}")
        r = self._local(x)
        alpha = self.a * self.k
        # chain rule: d/dx = k * d/dr, then per-ramp scaling by ramp width
        sign = -1.0 if order % 2 else 1.0
        down = sign * self.v0 * _smoothstep(
            1.0 - np.minimum(r, alpha) / alpha, order) / alpha**order
        up = self.v0 * _smoothstep(
            (np.maximum(r, alpha) - alpha) / (1.0 - alpha), order) / (1.0 - alpha)**order
        out = np.where(r <= alpha, down, up) * float(self.k) ** order
        return out if out.ndim else float(out)
