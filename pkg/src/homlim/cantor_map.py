"""The stage-k homeomorphism carrying one nested-cube set onto another.

Inside the level-i frame Q'_{v(i)} \\ Q_{v(i)} the map is radial in the
sup norm: x = z + t u with |u|_inf = 1 goes to z~ + lambda(t) u, where
lambda is affine with lambda(r_i) = r~_i and lambda(r'_i) = r~'_i.  On a
level-k inner cube it is the linear scaling by r~_k / r_k.  Because
r'_i = r_{i-1}/2 and r~'_i = r~_{i-1}/2 the frame maps agree with the
enclosing linear map on both boundaries, so no glue region is needed and
the piecewise inverse is exact.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import DomainError
from .geometry import ParameterSchedule

__all__ = ["CantorHomeomorphism"]


class CantorHomeomorphism:
    """Bijection of [-1,1]^n mapping the stage-k source cells onto target cells.

    Parameters
    ----------
    src, dst : ParameterSchedule
        Source and target schedules (same n).  alpha_0 = beta_0 = 1 makes
        the map the identity on the cube boundary.
    stage : int
        Construction depth k; the map is linear on the 2^{nk} level-k cells.
    """

    def __init__(self, src: ParameterSchedule, dst: ParameterSchedule, stage: int):
        if src.n != dst.n:
            raise ValueError("source and target schedules disagree on n")
        if stage < 1:
            raise ValueError("stage must be >= 1")
        self.src = src
        self.dst = dst
        self.stage = stage
        self.n = src.n
        self._rs, self._rs_out = src.radii(stage)
        self._rt, self._rt_out = dst.radii(stage)

    # -- evaluation ---------------------------------------------------------

    def forward_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.ascontiguousarray(points, dtype=float)
        out = np.empty_like(pts)
        _kernels.cantor_map_points(
            pts, self._rs, self._rs_out, self._rt, self._rt_out, self.stage, out
        )
        return out

    def inverse_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.ascontiguousarray(points, dtype=float)
        out = np.empty_like(pts)
        _kernels.cantor_map_points(
            pts, self._rt, self._rt_out, self._rs, self._rs_out, self.stage, out
        )
        return out

    def forward(self, point) -> np.ndarray:
        return self.forward_many(np.asarray(point, dtype=float)[None, :])[0]

    def inverse(self, point) -> np.ndarray:
        return self.inverse_many(np.asarray(point, dtype=float)[None, :])[0]

    # -- derivative ---------------------------------------------------------

    def derivative(self, point, forward: bool = True) -> np.ndarray:
        """Analytic Jacobian matrix; undefined on the sup-norm edge set
        (non-unique max coordinate), where the first max index is used."""
        x = np.asarray(point, dtype=float)
        if np.max(np.abs(x)) > 1.0:
            raise DomainError("point outside [-1,1]^n")
        if forward:
            rs, rs_out, rt, rt_out = self._rs, self._rs_out, self._rt, self._rt_out
        else:
            rs, rs_out, rt, rt_out = self._rt, self._rt_out, self._rs, self._rs_out
        n = self.n
        zs = np.zeros(n)
        for lev in range(1, self.stage + 1):
            sign = np.where(x >= zs, 1.0, -1.0)
            zs = zs + 0.5 * rs[lev - 1] * sign
            xi = x - zs
            t = float(np.max(np.abs(xi)))
            if t >= rs[lev]:
                lam_slope = (rt_out[lev] - rt[lev]) / (rs_out[lev] - rs[lev])
                lam = rt[lev] + (t - rs[lev]) * lam_slope
                mx = int(np.argmax(np.abs(xi)))
                d = (lam / t) * np.eye(n)
                d += ((lam_slope - lam / t) / t) * np.outer(
                    xi, np.sign(xi[mx]) * np.eye(n)[mx]
                )
                return d
        return (rt[self.stage] / rs[self.stage]) * np.eye(n)

    def derivative_bound(self, level: int, forward: bool = True) -> float:
        """Sharp sup of the radial-map stretch on the level-i frame:
        max{beta_i/alpha_i, (beta_{i-1}-beta_i)/(alpha_{i-1}-alpha_i)}
        for the forward map, the reciprocal roles for the inverse."""
        if not 1 <= level <= self.stage:
            raise ValueError("level out of range")
        a0, a1 = self.src.alpha(level - 1), self.src.alpha(level)
        b0, b1 = self.dst.alpha(level - 1), self.dst.alpha(level)
        if forward:
            return max(b1 / a1, (b0 - b1) / (a0 - a1))
        return max(a1 / b1, (a0 - a1) / (b0 - b1))
