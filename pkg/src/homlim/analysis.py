"""Numerical Sobolev seminorms, Cauchy tables, Jacobian and boundary probes.

Quadrature is midpoint-rule over explicit box decompositions; thin
tentacle tubes are integrated in their straight chart (the shift shear
has unit Jacobian) with transverse stratification into geometric
sup-norm annuli, which is what makes the 1/(rho log 1/rho) profiles
integrable on a grid.  All randomness flows from one counter-based
generator seeded by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .composite import build_stage
from .geometry import tower_slots
from .tentacles import _Shift, TentacleSchedule

__all__ = [
    "QuadratureConfig",
    "SeminormResult",
    "seminorm",
    "stratified_tube_boxes",
    "CauchyTable",
    "cauchy_table",
    "SurveyReport",
    "jacobian_survey",
    "boundary_identity_check",
    "make_rng",
]


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so identical seeds replay identically."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class QuadratureConfig:
    """Grid resolutions and probe steps for the numeric checks."""

    resolution: int = 6              # per-axis midpoint resolution in generic boxes
    axial_resolution: int = 8        # along tentacle tubes (per axial segment)
    axial_levels: int = 6            # geometric axial splits per tube piece
    transverse_resolution: int = 4   # per annulus strip / modulation grid
    transverse_levels: int = 6       # geometric annuli between d and b
    cells_cap: int = 16              # addresses sampled per level in tables
    fd_step: float | None = None     # None: derive from the active stage
    seed: int = 0

    def __post_init__(self):
        if self.resolution < 4:
            raise ValueError("resolution must be >= 4 per axis")


@dataclass
class SeminormResult:
    value: float
    refined_value: float
    rel_change: float


def _box_grid(lo, hi, res_per_axis):
    axes = [
        lo[d] + (hi[d] - lo[d]) * (np.arange(r) + 0.5) / r
        for d, r in enumerate(res_per_axis)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vol = np.prod([(hi[d] - lo[d]) / r for d, r in enumerate(res_per_axis)])
    return pts, float(vol)


def _integrate_boxes(integrand, boxes, res_fn):
    total = 0.0
    for lo, hi in boxes:
        pts, vol = _box_grid(np.asarray(lo, float), np.asarray(hi, float), res_fn(lo, hi))
        total += vol * sum(integrand(p) for p in pts)
    return total


def seminorm(map_like, p: float, boxes, config: QuadratureConfig,
             refine: bool = True) -> SeminormResult:
    """Midpoint integral of |Df|_F^p over a union of boxes.

    Uses the map's analytic ``derivative`` when present, else central
    differences.  One uniform refinement step estimates the
    discretization error.
    """
    deriv = getattr(map_like, "derivative", None)
    if deriv is None:
        fwd = map_like.forward
        h = config.fd_step or 1e-7

        def deriv(x):
            return _fd_jacobian(fwd, x, h)

    def integrand(x):
        return float(np.linalg.norm(deriv(x), "fro") ** p)

    n = len(boxes[0][0])
    base = config.resolution

    def res(lo, hi):
        return [base] * n

    def res2(lo, hi):
        return [2 * base] * n

    v1 = _integrate_boxes(integrand, boxes, res)
    if not refine:
        return SeminormResult(v1, v1, 0.0)
    v2 = _integrate_boxes(integrand, boxes, res2)
    rel = abs(v2 - v1) / max(abs(v2), 1e-300)
    return SeminormResult(v1, v2, rel)


def stratified_tube_boxes(width_outer: float, width_inner: float,
                          axial, levels: int, axial_levels: int = 0):
    """Boxes covering the tube with geometric sup-annuli down to the
    inner width (the core below it is one box per segment).

    ``axial`` is a breakpoint list; the tube is split at each breakpoint
    so the short, steep axial pieces (e.g. the far cap of a tentacle,
    whose length is a deep power of the scale) get their own grid instead
    of vanishing inside one long box.  With ``axial_levels`` > 0 every
    piece is further split geometrically toward its lower end, where the
    image of the squeezing profile runs through exponentially many scale
    interfaces of the composed maps.
    """
    segs = []
    for lo_a, hi_a in zip(axial, axial[1:]):
        if axial_levels <= 0:
            segs.append((lo_a, hi_a))
            continue
        cuts = [lo_a + (hi_a - lo_a) * 2.0**-j for j in range(axial_levels, 0, -1)]
        segs.extend(zip([lo_a] + cuts, cuts + [hi_a]))
    radii = list(np.geomspace(width_outer, max(width_inner, 1e-300), levels + 1))
    boxes = []
    for lo_a, hi_a in segs:
        for r_out, r_in in zip(radii, radii[1:]):
            # four rectangles tile the sup-annulus
            strips = [
                ((-r_out, r_in), (r_out, r_out)),
                ((-r_out, -r_out), (r_out, -r_in)),
                ((-r_out, -r_in), (-r_in, r_in)),
                ((r_in, -r_in), (r_out, r_in)),
            ]
            for (x2l, x3l), (x2h, x3h) in strips:
                boxes.append((np.array([lo_a, x2l, x3l]), np.array([hi_a, x2h, x3h])))
        rc = radii[-1]
        boxes.append((np.array([lo_a, -rc, -rc]), np.array([hi_a, rc, rc])))
    return boxes


def _fd_jacobian(f, x, h):
    n = len(x)
    J = np.empty((n, n))
    for d in range(n):
        e = np.zeros(n)
        e[d] = h
        J[:, d] = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h)
    return J


# ---------------------------------------------------------------------------
# Cauchy difference table.
# ---------------------------------------------------------------------------


@dataclass
class CauchyRow:
    k: int
    integral: float
    envelope: float
    passed: bool
    rel_change: float = float("nan")


@dataclass
class CauchyTable:
    variant: str
    p: float
    rows: list[CauchyRow]
    fitted_c: float

    def decreasing(self) -> bool:
        vals = [r.integral for r in self.rows]
        return all(b < a for a, b in zip(vals, vals[1:]))

    def summable(self) -> bool:
        """Tail-sum ratios below one (mirrors series convergence)."""
        vals = [r.integral for r in self.rows]
        tails = [sum(vals[i:]) for i in range(len(vals))]
        return all(t2 / t1 < 1.0 for t1, t2 in zip(tails, tails[1:]) if t1 > 0)

    def to_csv_rows(self):
        yield "k,integral,envelope,pass"
        for r in self.rows:
            yield f"{r.k},{r.integral:.17g},{r.envelope:.17g},{int(r.passed)}"


def tube_axial_knots(sched: TentacleSchedule, k: int) -> list[float]:
    """Axial breakpoints of the level-k tube (the PL knot planes)."""
    from .tentacles import _knots

    return list(_knots(sched.level(k), sched.family, 0.0).ts)


def _change_region_boxes(sched: TentacleSchedule, k: int, config: QuadratureConfig):
    """Straight-chart boxes for the level-k tube P'_k of the family."""
    lv = sched.level(k)
    return stratified_tube_boxes(lv.d, lv.b, tube_axial_knots(sched, k),
                                 config.transverse_levels, config.axial_levels)


def _sample_words(n: int, level: int, cap: int, rng) -> tuple[list, float]:
    """Tower letter words at ``level`` (all if few, else a seeded sample);
    returns the words and the inflation factor total/sampled."""
    slots = tower_slots(n)
    total = len(slots) ** level
    if total <= cap:
        words = [()]
        for _ in range(level):
            words = [w + (s,) for w in words for s in slots]
        return words, 1.0
    words = [tuple(slots[rng.integers(len(slots))] for _ in range(level))
             for _ in range(cap)]
    return words, total / cap


def _geom_segments(breaks, levels: int):
    """Split each interval geometrically toward its lower end."""
    segs = []
    for lo, hi in zip(breaks, breaks[1:]):
        if levels <= 0:
            segs.append((lo, hi))
            continue
        cuts = [lo + (hi - lo) * 2.0**-j for j in range(levels, 0, -1)]
        segs.extend(zip([lo] + cuts, cuts + [hi]))
    return segs


def _tube_integral(sched: TentacleSchedule, k: int, word, weight_fn,
                   config: QuadratureConfig, res_mult: int = 1) -> float:
    """Integral of a pointwise weight over one twisted level-k tube.

    The grid lives in the chart (t, E): t is the axial coordinate (split
    at the knot planes and geometrically toward each piece's low end,
    where the composed maps run through their scale cascade) and E the
    transverse log-log modulation.  The sup-annulus measure per strip,
    2 rho^2 u dE dt with u = log(1/rho), is exact, which absorbs the
    1/(rho u) transverse gradient of the squeeze profile into a bounded
    integrand.
    """
    from .tentacles import _knots

    lv = sched.level(k)
    n = sched.n
    heights = [w[-1] for w in word]
    z_n = sum(sched.level(j + 1).r_hat_prev * heights[j] for j in range(k))
    sh = _Shift(sched, heights)
    segs = _geom_segments(_knots(lv, sched.family, 0.0).ts, config.axial_levels)
    t_res = config.axial_resolution * res_mult
    e_res = config.transverse_resolution * res_mult
    u_d, e_rng = lv.u_d, lv.e_range
    core_area = (2.0 * lv.b) ** (n - 1)
    dirs = [(axis, sign) for axis in range(1, n) for sign in (1.0, -1.0)]
    total = 0.0
    x = np.zeros(n)
    for t_lo, t_hi in segs:
        dt = (t_hi - t_lo) / t_res
        for it in range(t_res):
            t = t_lo + (it + 0.5) * dt
            sig = sh.sigma(t)
            # shell: strips at transverse sup radius rho(E)
            de = e_rng / e_res
            for ie in range(e_res):
                e = (ie + 0.5) * de
                u = u_d * math.exp(e)
                rho = math.exp(-u)
                meas = 2.0 * rho * rho * u * de * dt
                if meas == 0.0:
                    continue
                for axis, sign in dirs:
                    x[:] = 0.0
                    x[0] = t
                    x[axis] = sign * rho
                    x[n - 1] += z_n + sig
                    total += weight_fn(x) * meas
            # core below the clamp radius: no transverse gradient
            if core_area > 0.0:
                x[:] = 0.0
                x[0] = t
                x[n - 1] = z_n + sig
                total += weight_fn(x) * core_area * dt
    return total


def cauchy_table(variant: str, p: float, k_max: int, config: QuadratureConfig,
                 n: int = 3, beta: float = 4.0, refine: bool = False) -> CauchyTable:
    """Integrals of |Df_k - Df_{k-1}|_F^p over the stage-k change region.

    The change region is the union of the level-k tentacle tubes (where
    the new squeeze acts) and the level-(k-1) tower cells (where the
    deeper nested-cube and relocation structure appears); both maps agree
    elsewhere.  Tubes are integrated on the exact-measure chart grid of
    ``_tube_integral``, cells by midpoint boxes.  Addresses are
    subsampled above ``config.cells_cap`` and rescaled by the cell count.
    """
    if variant not in ("T1", "T2"):
        raise ValueError("cauchy tables exist for variants T1 and T2")
    rng = make_rng(config.seed)
    rows = []
    stages = {k: build_stage(variant, k, n, beta) for k in range(1, k_max + 1)}
    sched = stages[k_max].schedule
    res_mult = 2 if refine else 1

    for k in range(2, k_max + 1):
        fk, fk1 = stages[k], stages[k - 1]

        def diff(x):
            return float(
                np.linalg.norm(fk.derivative(x) - fk1.derivative(x), "fro") ** p
            )

        total = 0.0
        words, inflate = _sample_words(n, k, config.cells_cap, rng)
        for word in words:
            total += inflate * _tube_integral(sched, k, word, diff, config, res_mult)
        # level-(k-1) tower cells
        words1, inflate1 = _sample_words(n, k - 1, config.cells_cap, rng)
        r_in = sched.base.r(k - 1)
        for word in words1:
            z = np.zeros(n)
            for j, s in enumerate(word):
                z = z + sched.base.r(j) * np.array(s)
            cube = [(z - r_in, z + r_in)]
            total += inflate1 * _integrate_boxes(
                diff, cube, lambda lo, hi: [config.resolution * res_mult] * n
            )
        rows.append(CauchyRow(k, total, 0.0, True))

    env = [2.0 ** (-k * beta) + 1.0 / k**2 for k in range(2, k_max + 1)]
    c = max((r.integral / e for r, e in zip(rows, env)), default=0.0)
    for r, e in zip(rows, env):
        r.envelope = c * e
        r.passed = r.integral <= r.envelope * (1 + 1e-12)
    return CauchyTable(variant, p, rows, c)


# ---------------------------------------------------------------------------
# Jacobian survey and boundary identity.
# ---------------------------------------------------------------------------


@dataclass
class SurveyReport:
    fraction_positive: float
    min_det: float
    exceptions: list = field(default_factory=list)
    hard_failures: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.exceptions)


def jacobian_survey(map_like, count: int, config: QuadratureConfig,
                    box=None, n: int = 3, step: float | None = None) -> SurveyReport:
    """Central-difference Jacobian determinants at seeded random points.

    A point with non-positive finite-difference determinant is an
    exception; it counts as a hard failure only if the analytic
    determinant (when available) is also non-positive and the sign does
    not recover under a refined step, i.e. only genuine orientation
    defects survive, not interface-straddling artifacts.
    """
    rng = make_rng(config.seed)
    if box is None:
        lo, hi = -np.ones(n), np.ones(n)
    else:
        lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
    h = step or config.fd_step
    if h is None:
        k = getattr(map_like, "k", None) or getattr(map_like, "stage", 1)
        beta = getattr(map_like, "beta", 4.0)
        h = min(1e-6, 1e-3 * 2.0 ** (-(k) * (beta + 1)))
    fwd = map_like.forward
    deriv = getattr(map_like, "derivative", None)
    margin = 10 * h
    pts = lo + (hi - lo) * rng.random((count, len(lo)))
    pts = np.clip(pts, lo + margin, hi - margin)
    positives = 0
    min_det = math.inf
    exceptions = []
    hard = []
    for x in pts:
        det = float(np.linalg.det(_fd_jacobian(fwd, x, h)))
        min_det = min(min_det, det)
        if det > 0:
            positives += 1
            continue
        exceptions.append((x.copy(), det))
        fine = float(np.linalg.det(_fd_jacobian(fwd, x, h / 8)))
        analytic = None
        if deriv is not None:
            try:
                analytic = float(np.linalg.det(deriv(x)))
            except Exception:
                analytic = None
        if fine <= 0 and (analytic is None or analytic <= 0):
            hard.append((x.copy(), det, fine, analytic))
    return SurveyReport(positives / count, min_det, exceptions, hard)


def boundary_identity_check(map_like, n: int, samples_per_face: int,
                            seed: int = 0) -> tuple[bool, float]:
    """Max deviation |f(x) - x| over samples of every face of the cube."""
    rng = make_rng(seed)
    worst = 0.0
    fwd = map_like.forward
    for axis in range(n):
        for side in (-1.0, 1.0):
            pts = rng.uniform(-1, 1, (samples_per_face, n))
            pts[:, axis] = side
            for x in pts:
                worst = max(worst, float(np.max(np.abs(fwd(x) - x))))
    return worst <= 1e-12, worst
