"""Assembled counterexample stages and preimage-continuum witnesses.

Variants:

* T1: f_k = g_k^{-1} o L_k^{-1} o h_k   (squeeze; fat-target limit has
  continuum preimages over a positive-measure set),
* T2: f~_k = g_k^{-1} o L_k^{-1} o h~_k o L_k o g_k  (stretch; one-to-one
  limit whose generalized inverse collapses continua),
* W:  w_k  = g_k^{-1} o L_k^{-1} o h~_k^{-1} o L_k o g_k  (the stage
  generalized inverse: w_k o f~_k = id exactly),
* FL: f_L = S o L_k o g_k on the harmonic fat schedule, with S the
  axis-collapse squeeze; Lipschitz, non-injective, sends the limit set
  to a shrinking neighborhood of one point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cantor_map import CantorHomeomorphism
from .errors import DomainError
from .geometry import Address, ParameterSchedule, cell_center, harmonic_schedule
from .tentacles import (
    SQUEEZE,
    STRETCH,
    SqueezeStage,
    StretchStage,
    TentacleSchedule,
    _Shift,
    solve_parameters,
)
from .tower import TowerMapping, slot_correspondence

__all__ = ["CompositeStage", "build_stage", "composite_eval", "ContinuumWitness",
           "continuum_witness", "AxisCollapse"]

VARIANTS = ("T1", "T2", "W", "FL")


class AxisCollapse:
    """Lipschitz squeeze of the vertical axis segment to a point.

    On Q(0, 1-delta): (x_1, ..., x_n) -> (x_1, ..., x_{n-1},
    x_n sqrt(x_1^2+...+x_{n-1}^2)); blended radially (sup norm) to the
    identity on the cube boundary.  Not injective on the axis.
    """

    def __init__(self, n: int, delta: float = 1.0 / 16.0):
        self.n = n
        self.delta = delta

    def _core(self, x: np.ndarray) -> np.ndarray:
        out = x.copy()
        out[-1] = x[-1] * math.sqrt(float(np.sum(x[:-1] ** 2)))
        return out

    def forward(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        sup = float(np.max(np.abs(x)))
        inner = 1.0 - self.delta
        if sup <= inner:
            return self._core(x)
        t = min((sup - inner) / self.delta, 1.0)
        return (1.0 - t) * self._core(x) + t * x

    def lipschitz_bound(self) -> float:
        # |D core| <= 1 + sqrt(n-1); the blend adds at most |core-id|/delta
        return 1.0 + math.sqrt(self.n - 1) + 2.0 / self.delta


@dataclass
class CompositeStage:
    """One stage of a counterexample composition."""

    variant: str
    k: int
    n: int
    beta: float
    mode: str
    g: CantorHomeomorphism
    tower: TowerMapping
    tentacle: SqueezeStage | StretchStage | None = None
    collapse: AxisCollapse | None = None
    schedule: TentacleSchedule | None = None

    def forward(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        if np.max(np.abs(x)) > 1.0:
            raise DomainError("point outside [-1,1]^n")
        if self.variant == "T1":
            return self.g.inverse(self.tower.inverse(self.tentacle.forward(x)))
        if self.variant == "T2":
            y = self.tower.forward(self.g.forward(x))
            return self.g.inverse(self.tower.inverse(self.tentacle.forward(y)))
        if self.variant == "W":
            y = self.tower.forward(self.g.forward(x))
            return self.g.inverse(self.tower.inverse(self.tentacle.inverse(y)))
        y = self.tower.forward(self.g.forward(x))
        return self.collapse.forward(y)

    def inverse(self, point) -> np.ndarray:
        y = np.asarray(point, dtype=float)
        if self.variant == "T1":
            return self.tentacle.inverse(self.tower.forward(self.g.forward(y)))
        if self.variant == "T2":
            z = self.tower.forward(self.g.forward(y))
            return self.g.inverse(self.tower.inverse(self.tentacle.inverse(z)))
        if self.variant == "W":
            z = self.tower.forward(self.g.forward(y))
            return self.g.inverse(self.tower.inverse(self.tentacle.forward(z)))
        raise DomainError("the FL stage collapses the axis and has no inverse")

    def derivative(self, point) -> np.ndarray:
        """Analytic Jacobian by the chain rule through every factor."""
        x = np.asarray(point, dtype=float)
        if self.variant == "T1":
            x1 = self.tentacle.forward(x)
            x2 = self.tower.inverse(x1)
            # DL^{-1}(x1) = [DL(L^{-1} x1)]^{-1}
            d = np.linalg.inv(self.tower.derivative(x2, forward=True)) @ self.tentacle.derivative(x)
            return self.g.derivative(x2, forward=False) @ d
        if self.variant in ("T2", "W"):
            y1 = self.g.forward(x)
            y2 = self.tower.forward(y1)
            d = self.tower.derivative(y1, forward=True) @ self.g.derivative(x, forward=True)
            if self.variant == "T2":
                y3 = self.tentacle.forward(y2)
                d = self.tentacle.derivative(y2) @ d
            else:
                y3 = self.tentacle.inverse(y2)
                d = np.linalg.inv(self.tentacle.derivative(y3)) @ d
            y4 = self.tower.inverse(y3)
            d = np.linalg.inv(self.tower.derivative(y4, forward=True)) @ d
            return self.g.derivative(y4, forward=False) @ d
        raise DomainError("FL derivative is piecewise; use finite differences")

    def forward_many(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.forward(p) for p in points])


@lru_cache(maxsize=32)
def _tentacle_sched(n: int, beta: float, family: str, mode: str, k_max: int):
    return solve_parameters(n, beta, mode, family, k_max)


def build_stage(variant: str, k: int, n: int = 3, beta: float = 4.0,
                mode: str = "demo") -> CompositeStage:
    """Construct one composite stage with shared, cached factor maps."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    sched_b = ParameterSchedule(n=n, beta=beta, kind="B")
    tower = TowerMapping(sched_b, k)
    if variant == "FL":
        g = CantorHomeomorphism(harmonic_schedule(n), sched_b, k)
        return CompositeStage(variant, k, n, beta, mode, g, tower,
                              collapse=AxisCollapse(n))
    g = CantorHomeomorphism(ParameterSchedule(n=n, beta=beta, kind="A"), sched_b, k)
    if variant == "T1":
        ts = _tentacle_sched(n, beta, SQUEEZE, mode, k)
        tent = SqueezeStage(ts, k)
    else:
        ts = _tentacle_sched(n, beta, STRETCH, mode, k)
        tent = StretchStage(ts, k)
    return CompositeStage(variant, k, n, beta, mode, g, tower,
                          tentacle=tent, schedule=ts)


def composite_eval(variant: str, k: int, point, n: int = 3, beta: float = 4.0,
                   mode: str = "demo") -> np.ndarray:
    return build_stage(variant, k, n, beta, mode).forward(point)


# ---------------------------------------------------------------------------
# Preimage-continuum witnesses.
# ---------------------------------------------------------------------------


@dataclass
class ContinuumWitness:
    """A sampled stage-k tentacle chain and the spread of its image.

    ``polyline`` runs from the tentacle tip down to the tower cell; it
    approximates the continuum collapsing onto the target point, so its
    endpoints stay far apart while ``image_diameter`` shrinks with k.
    """

    variant: str
    k: int
    target_word: tuple
    target_point: np.ndarray
    polyline: np.ndarray
    images: np.ndarray
    endpoint_separation: float = field(init=False)
    image_diameter: float = field(init=False)

    def __post_init__(self):
        self.endpoint_separation = float(
            np.linalg.norm(self.polyline[0] - self.polyline[-1])
        )
        diffs = self.images[:, None, :] - self.images[None, :, :]
        self.image_diameter = float(np.sqrt((diffs**2).sum(-1)).max())


def _tentacle_chain_points(sched: TentacleSchedule, word_hat, k: int,
                           samples: int) -> np.ndarray:
    """Points along the centerline of the level-k twisted tentacle, from
    the tip (x_1 near a_k) down to the tower cell center."""
    n = sched.n
    lv = sched.level(k)
    heights = [w[-1] for w in word_hat]
    z_n = sum(sched.level(j + 1).r_hat_prev * heights[j] for j in range(k))
    sh = _Shift(sched, heights)
    ts = np.geomspace(lv.r_hat, lv.a, samples - 1)[::-1]
    pts = []
    for t in ts:
        p = np.zeros(n)
        p[0] = t
        p[-1] = z_n + sh.sigma(t)
        pts.append(p)
    tip_first = pts
    center = np.zeros(n)
    center[-1] = z_n
    return np.array(tip_first + [center])


def continuum_witness(word, k: int, variant: str = "T1", n: int = 3,
                      beta: float = 4.0, samples: int = 24) -> ContinuumWitness:
    """Witness for the collapse of a tentacle chain over one target cell.

    ``word`` addresses a cell of the fat construction; the matched tower
    address is its letterwise slot image.  For T1 the polyline lies along
    the twisted tentacle centerline and is pushed through f_k; for T2 the
    polyline is pulled back to the domain side and pushed through w_k.
    """
    if variant not in ("T1", "T2"):
        raise ValueError("witnesses exist for variants T1 and T2")
    word = tuple(tuple(v) for v in word)
    if len(word) != k:
        raise ValueError("address word length must equal the stage")
    word_hat = tuple(slot_correspondence(v) for v in word)
    stage = build_stage(variant if variant == "T1" else "W", k, n, beta)
    chain = _tentacle_chain_points(stage.schedule, word_hat, k, samples)
    sched_a = ParameterSchedule(n=n, beta=beta, kind="A")
    target = cell_center(sched_a, Address("setA", word))
    if variant == "T1":
        polyline = chain
        images = stage.forward_many(chain)
    else:
        # domain-side continuum: pull the chain back through (L o g)^{-1};
        # w_k images equal g^{-1} L^{-1} (stretch-inverse of the chain), and
        # the stretch inverse is applied in chart form because the deep
        # squeezed tubes are narrower than float resolution
        polyline = np.array(
            [stage.g.inverse(stage.tower.inverse(p)) for p in chain]
        )
        pulled = _stretch_inverse_on_chain(stage.schedule, word_hat, k, chain)
        images = np.array(
            [stage.g.inverse(stage.tower.inverse(p)) for p in pulled]
        )
    return ContinuumWitness(variant, k, word, target, polyline, images)


def _stretch_inverse_on_chain(sched: TentacleSchedule, word_hat, k: int,
                              chain: np.ndarray) -> np.ndarray:
    """Stretch-stage inverse restricted to the level-k tentacle centerline.

    On the centerline the transverse radius is 0, so the modulation sits
    at its clamp value and the axial pullback is a fixed monotone PL map;
    evaluating it directly avoids membership tests on tubes that are
    thinner than one ulp."""
    from .tentacles import _knots, pl_inverse

    lv = sched.level(k)
    heights = [w[-1] for w in word_hat]
    z_n = sum(sched.level(j + 1).r_hat_prev * heights[j] for j in range(k))
    sh = _Shift(sched, heights)
    knots = _knots(lv, STRETCH, lv.e_range)
    out = []
    for p in chain:
        t = p[0]
        if t < lv.r_hat:
            out.append(p.copy())
            continue
        t_back = pl_inverse(min(t, knots.ss[-1]), knots)
        q = np.zeros_like(p)
        q[0] = t_back
        q[-1] = z_n + sh.sigma(t_back)
        out.append(q)
    return np.array(out)
