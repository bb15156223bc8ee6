"""Tentacle geometry and the squeezing / stretching stage maps.

Each tower cell carries a long thin tentacle: the cell cube united with
the tube P(r, rho1, rho2) = [rho1, rho2) x (-r, r)^{n-1} in a chart whose
first axis points away from the cell.  Tentacles of consecutive levels
are nested after a volume-preserving shift (a shear in the last
coordinate driven by the first), and inside every tentacle an axial
piecewise-linear profile with a log log 1/|x| transverse modulation
squeezes the tube onto the cell scale (or stretches it back out).  The
transverse widths b_k < d_k solve hard smallness constraints; in the
strict schedules they fall far below floating-point range and are kept
in log-magnitude form, so geometric evaluation of the stage maps is a
demo-schedule feature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (
    DomainError,
    InfeasibleScheduleError,
    NotInitializedError,
    UnsupportedDimensionError,
)
from .geometry import ParameterSchedule, tower_slots

__all__ = [
    "PLKnots",
    "pl_interpolate",
    "pl_inverse",
    "pl_slope",
    "TentacleLevel",
    "TentacleSchedule",
    "solve_parameters",
    "shift_forward",
    "shift_inverse",
    "SqueezeStage",
    "StretchStage",
    "StraightTentacleMap",
    "tentacle_seminorm_bound",
    "log_tentacle_union_measure",
    "shift_bound",
    "conjugation_constant",
]

SQUEEZE = "squeeze"
STRETCH = "stretch"
MODES = ("demo", "strict-T1", "strict-T2")

# largest u = log(1/d) for which exp(-u) is still a positive double
_FLOAT_LOG_RANGE = 700.0


# ---------------------------------------------------------------------------
# Piecewise-linear interpolation through monotone knots.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PLKnots:
    """Monotone knot lists (t_i, s_i); both strictly increasing."""

    ts: tuple[float, ...]
    ss: tuple[float, ...]

    def __post_init__(self):
        if len(self.ts) != len(self.ss) or len(self.ts) < 2:
            raise ValueError("need matching knot lists of length >= 2")
        if any(b <= a for a, b in zip(self.ts, self.ts[1:])):
            raise ValueError(f"t-knots not strictly increasing: {self.ts}")
        if any(b <= a for a, b in zip(self.ss, self.ss[1:])):
            raise ValueError(f"s-knots not strictly increasing: {self.ss}")


def _pl_piece(v: float, knots: tuple[float, ...]) -> int:
    for i in range(len(knots) - 2):
        if v <= knots[i + 1]:
            return i
    return len(knots) - 2


def pl_interpolate(t: float, knots: PLKnots) -> float:
    """Value of the piecewise-linear interpolant at t in [t_1, t_last]."""
    if t < knots.ts[0] or t > knots.ts[-1]:
        raise DomainError(f"t={t} outside [{knots.ts[0]}, {knots.ts[-1]}]")
    i = _pl_piece(t, knots.ts)
    return knots.ss[i] + (t - knots.ts[i]) * (knots.ss[i + 1] - knots.ss[i]) / (
        knots.ts[i + 1] - knots.ts[i]
    )


def pl_inverse(s: float, knots: PLKnots) -> float:
    """Exact inverse of the interpolant (swap the knot roles)."""
    if s < knots.ss[0] or s > knots.ss[-1]:
        raise DomainError(f"s={s} outside [{knots.ss[0]}, {knots.ss[-1]}]")
    i = _pl_piece(s, knots.ss)
    return knots.ts[i] + (s - knots.ss[i]) * (knots.ts[i + 1] - knots.ts[i]) / (
        knots.ss[i + 1] - knots.ss[i]
    )


def pl_slope(t: float, knots: PLKnots) -> float:
    i = _pl_piece(t, knots.ts)
    return (knots.ss[i + 1] - knots.ss[i]) / (knots.ts[i + 1] - knots.ts[i])


# ---------------------------------------------------------------------------
# Per-level parameters.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TentacleLevel:
    """Solved constants of one tentacle level (one squeezing family).

    u_d, u_b are log(1/d_k), log(1/b_k); d/b themselves may underflow to
    0.0 and are materialized only on demand.  ``bend`` is the modulation
    coefficient of the middle knot (A_k when squeezing, the analogous
    constant when stretching); it is None at level 1 where that knot
    leaves the cube and is dropped.  ``shift_drop`` = r_{k-1} - b_{k-1}
    feeds the level-k shear.
    """

    k: int
    r_hat: float
    r_hat_prev: float
    a: float
    c: float
    a_sq: float
    c_sq: float
    u_d: float
    u_b: float
    e_range: float
    bend: float | None
    line_prev_at_a: float
    line_prev_at_c: float
    mid_knot: float | None
    delta_budget: float | None
    delta_tilde: float | None
    shift_drop: float

    @property
    def d(self) -> float:
        return math.exp(-self.u_d)

    @property
    def b(self) -> float:
        return math.exp(-self.u_b)


@dataclass
class TentacleSchedule:
    """Solved tentacle parameters for levels 1..k_max of one family."""

    n: int
    beta: float
    family: str
    mode: str
    base: ParameterSchedule
    levels: list[TentacleLevel]

    def level(self, k: int) -> TentacleLevel:
        if not 1 <= k <= len(self.levels):
            raise NotInitializedError(f"level {k} not solved (have {len(self.levels)})")
        return self.levels[k - 1]

    @property
    def geometric(self) -> bool:
        """True when b_k, d_k are representable and stage maps can run."""
        return self.mode == "demo"


def _r_hat(beta: float, k: int) -> float:
    return 2.0 ** (-k * (beta + 1))


def _axial_extents(beta: float, k: int) -> tuple[float, float]:
    """(a_k, c_k): a_k = 1 - sum_{i=2}^{k+2} r_i, c_k = a_{k-1}."""
    a = 1.0
    for j in range(2, k + 3):
        a -= _r_hat(beta, j)
    c = 1.0
    for j in range(2, k + 2):
        c -= _r_hat(beta, j)
    return a, c


def _squeeze_line(beta: float, k_line: int):
    """The axial boundary line l_k: identity below r_k, then the chord
    through (r_k, r_k) and (a_k, a~_k)."""
    if k_line == 0:
        return lambda t: t
    r = _r_hat(beta, k_line)
    a, _ = _axial_extents(beta, k_line)
    a_sq = 2.0 * _r_hat(beta, k_line)
    slope = (a_sq - r) / (a - r)

    def line(t: float) -> float:
        if t <= r:
            return t
        return r + slope * (t - r)

    return line


def _stretch_line(beta: float, k_line: int):
    """The line l~_k: identity below r_k, then the chord through
    (r_k, r_k) and (a~_k, a_k); l~_0 is the identity."""
    if k_line == 0:
        return lambda t: t
    r = _r_hat(beta, k_line)
    a, _ = _axial_extents(beta, k_line)
    a_sq = 2.0 * r
    slope = (a - r) / (a_sq - r)

    def line(t: float) -> float:
        if t <= r:
            return t
        return r + slope * (t - r)

    return line


def shift_bound(n: int, beta: float) -> float:
    """Uniform bound on the shear slope of every shifting map."""
    return (1.0 - 2.0**-n) / (1.0 - 2.0 ** -(beta + 1))


def conjugation_constant(n: int, beta: float) -> float:
    """Transport constant for integrals through the shift conjugation:
    |D(S o F o S^{-1})| <= (1+s)^2 |DF| with s the shear-slope bound and
    unit shear Jacobian, so energies pick up at most (1+s)^{2(n-1)}."""
    s = shift_bound(n, beta)
    return (1.0 + s) ** (2 * (n - 1))


def _coeff_sup(n: int, beta: float, family: str) -> float:
    """k-independent bound on the knot modulation coefficients."""
    if family == SQUEEZE:
        # A_k <= (r_{k-1} - r_k) / (r_{k-1} - 2 r_k), constant in k
        q = 2.0 ** -(beta + 1)
        return max(1.0, (1.0 - q) / (1.0 - 2.0 * q))
    # stretch: coefficient <= 1/(a_k - a~_k) <= 1/(a_inf - a~_1)
    q = 2.0 ** -(beta + 1)
    a_inf = 1.0 - q * q / (1.0 - q)
    return max(1.0, 1.0 / (a_inf - 2.0 * q))


def geometry_constant(n: int, beta: float, family: str) -> float:
    """Surface constant of the sup-norm polar integration of the
    transverse-gradient term: (n-1) 2^{n-1} (coefficient bound)^{n-1}."""
    return (n - 1) * 2.0 ** (n - 1) * _coeff_sup(n, beta, family) ** (n - 1)


def fixd_constant(n: int, beta: float, family: str) -> float:
    """The constant making the closed-form transverse bound land at delta_k."""
    return (n - 2) / geometry_constant(n, beta, family)


def delta_tilde(mode: str, n: int, beta: float, k: int) -> float:
    """Per-stage energy budget for the assembled map."""
    if mode == "strict-T1":
        return 2.0 ** (-k * beta * (n - 1)) / k**2
    if mode == "strict-T2":
        return 2.0 ** (-k * beta * (2 * n - 1)) / k**2
    raise ValueError(f"no delta-tilde schedule in mode {mode!r}")


def solve_parameters(
    n: int,
    beta: float,
    mode: str,
    family: str | None = None,
    k_max: int = 4,
) -> TentacleSchedule:
    """Solve tentacle levels 1..k_max by induction.

    Strict modes derive d_k from the smallness condition
    2^{(beta+1)k(n-1)} / log^{n-2}(1/d_k) < C_fixd delta_k with
    delta_k = 2^{-nk} delta~_k / C_shift, then b_k from the boundary
    matching log log(1/b_k) = log log(1/d_k) + Delta_k; everything stays
    in log magnitude.  Demo mode starts from d_1 = 1/20 and shrinks d_k
    geometrically, clamped by the ordering constraints d_k <= 4^{-n}
    b_{k-1} and d_k < 2^{-n} r_{k-1}, keeping all widths representable.
    """
    if n < 3:
        raise UnsupportedDimensionError("tentacle construction needs n >= 3")
    if beta < n + 1:
        raise InfeasibleScheduleError("tentacles need beta >= n+1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if family is None:
        family = STRETCH if mode == "strict-T2" else SQUEEZE
    if family not in (SQUEEZE, STRETCH):
        raise ValueError(f"unknown family {family!r}")

    base = ParameterSchedule(n=n, beta=beta, kind="B")
    c_shift = conjugation_constant(n, beta)
    c_fixd = fixd_constant(n, beta, family)

    levels: list[TentacleLevel] = []
    prev: TentacleLevel | None = None
    for k in range(1, k_max + 1):
        r = _r_hat(beta, k)
        r_prev = _r_hat(beta, k - 1)
        a, c = _axial_extents(beta, k)
        a_sq = 2.0 * r
        c_sq = c if k == 1 else 2.0 * r_prev  # level-1 overshoot clamp

        if family == SQUEEZE:
            line_prev = _squeeze_line(beta, k - 1)
            e_range = line_prev(a) - a_sq
        else:
            line_prev = _stretch_line(beta, k - 1)
            e_range = a - line_prev(a_sq)
        if e_range <= 0:
            raise InfeasibleScheduleError(f"level {k}: non-positive modulation range")

        dt = db = None
        if mode == "demo":
            u_d = math.log(20.0) + (k - 1) * math.log(4.0)
            floor = -math.log(2.0 ** -(n + 1) * r_prev)
            u_d = max(u_d, floor)
            if prev is not None:
                u_d = max(u_d, prev.u_b + n * math.log(4.0))
        else:
            dt = delta_tilde(mode, n, beta, k)
            db = 2.0**(-n * k) * dt / c_shift
            u_d = (2.0 ** ((beta + 1) * k * (n - 1)) / (c_fixd * db)) ** (1.0 / (n - 2))
            u_d = max(u_d, -math.log(2.0 ** -(n + 1) * r_prev))
            if prev is not None:
                u_d = max(u_d, prev.u_b + n * math.log(4.0))
        u_b = u_d * math.exp(e_range)

        if u_b <= u_d:
            raise InfeasibleScheduleError(f"level {k}: b >= d")
        if prev is not None and u_d < prev.u_b + n * math.log(4.0) - 1e-9:
            raise InfeasibleScheduleError(f"level {k}: d_k > 4^-n b_(k-1)")
        if mode == "demo" and u_b > _FLOAT_LOG_RANGE:
            raise InfeasibleScheduleError(
                f"level {k}: demo width b_k underflows doubles (log 1/b = {u_b:.1f})"
            )

        if family == SQUEEZE:
            if k == 1:
                bend = None
                mid = None
            else:
                line_k_at_rprev = r + (a_sq - r) * (r_prev - r) / (a - r)
                bend = (r_prev - line_k_at_rprev) / e_range
                mid = line_k_at_rprev
            lv = TentacleLevel(
                k, r, r_prev, a, c, a_sq, c_sq, u_d, u_b, e_range, bend,
                line_prev(a), line_prev(c), mid, db, dt,
                0.0 if k == 1 else r_prev - math.exp(-prev.u_b),
            )
        else:
            if k == 1:
                bend = None
                mid = None
            else:
                mid = 0.5 * (a + c)
                bend = (mid - r_prev) / e_range
            lv = TentacleLevel(
                k, r, r_prev, a, c, a_sq, c_sq, u_d, u_b, e_range, bend,
                line_prev(a_sq), line_prev(c_sq), mid, db, dt,
                0.0 if k == 1 else r_prev - math.exp(-prev.u_b),
            )
        levels.append(lv)
        prev = lv
    return TentacleSchedule(n, beta, family, mode, base, levels)


# ---------------------------------------------------------------------------
# Knot tables.
# ---------------------------------------------------------------------------


def _knots(level: TentacleLevel, family: str, e: float) -> PLKnots:
    """Axial knots of the level map at transverse modulation e in [0, E]."""
    lv = level
    if family == SQUEEZE:
        phi = lv.line_prev_at_a - e
        if lv.k == 1:
            return PLKnots((lv.r_hat, lv.a, lv.c), (lv.r_hat, phi, lv.line_prev_at_c))
        psi = lv.r_hat_prev - lv.bend * e
        return PLKnots(
            (lv.r_hat, lv.r_hat_prev, lv.a, lv.c),
            (lv.r_hat, psi, phi, lv.line_prev_at_c),
        )
    phi = lv.line_prev_at_a + e
    if lv.k == 1:
        return PLKnots((lv.r_hat, lv.a_sq, lv.c_sq), (lv.r_hat, phi, lv.line_prev_at_c))
    psi = lv.r_hat_prev + lv.bend * e
    return PLKnots(
        (lv.r_hat, lv.a_sq, lv.r_hat_prev, lv.c_sq),
        (lv.r_hat, phi, psi, lv.line_prev_at_c),
    )


def _knot_e_coeffs(level: TentacleLevel, family: str) -> tuple[float, ...]:
    """d s_i / d e for the knot table above."""
    if family == SQUEEZE:
        if level.k == 1:
            return (0.0, -1.0, 0.0)
        return (0.0, -level.bend, -1.0, 0.0)
    if level.k == 1:
        return (0.0, 1.0, 0.0)
    return (0.0, 1.0, level.bend, 0.0)


def _modulation(level: TentacleLevel, rho: float) -> tuple[float, float]:
    """(e, de/drho) for transverse sup radius rho.

    e = log log(1/max(b, rho)) - log log(1/d), clamped to [0, E]."""
    if rho <= 0.0:
        return level.e_range, 0.0
    u = -math.log(rho)
    if u >= level.u_b:
        return level.e_range, 0.0
    if u <= level.u_d:
        return 0.0, 0.0
    return math.log(u) - math.log(level.u_d), -1.0 / (rho * u)


# ---------------------------------------------------------------------------
# Shifting maps.
# ---------------------------------------------------------------------------


def _taper(t: float, r_k: float, r_prev: float) -> float:
    if t <= r_k:
        return 0.0
    if t >= r_prev:
        return 1.0
    return (t - r_k) / (r_prev - r_k)


def _taper_slope(t: float, r_k: float, r_prev: float) -> float:
    if r_k < t < r_prev:
        return 1.0 / (r_prev - r_k)
    return 0.0


class _Shift:
    """The composed shear S of a tower-address prefix: x_n += sigma(x_1)."""

    def __init__(self, sched: TentacleSchedule, heights: list[float]):
        # heights[i] = last coordinate of the level-(i+1) letter
        self.sched = sched
        self.heights = heights

    def sigma(self, t: float) -> float:
        total = 0.0
        for i, h in enumerate(self.heights):
            lv = self.sched.level(i + 1)
            total -= lv.shift_drop * h * _taper(t, lv.r_hat, lv.r_hat_prev)
        return total

    def sigma_slope(self, t: float) -> float:
        total = 0.0
        for i, h in enumerate(self.heights):
            lv = self.sched.level(i + 1)
            total -= lv.shift_drop * h * _taper_slope(t, lv.r_hat, lv.r_hat_prev)
        return total


def shift_forward(sched: TentacleSchedule, word, point) -> np.ndarray:
    """Apply the composed shifting map of the tower-address ``word``."""
    x = np.asarray(point, dtype=float).copy()
    sh = _Shift(sched, [w[-1] for w in word])
    x[-1] += sh.sigma(x[0])
    return x


def shift_inverse(sched: TentacleSchedule, word, point) -> np.ndarray:
    y = np.asarray(point, dtype=float).copy()
    sh = _Shift(sched, [w[-1] for w in word])
    y[-1] -= sh.sigma(y[0])
    return y


# ---------------------------------------------------------------------------
# The assembled stage maps.
# ---------------------------------------------------------------------------


class _TentacleStage:
    """Common machinery: locate the deepest twisted tentacle containing a
    point, work in its straight chart, apply the per-slice axial map."""

    family: str
    forward_from_squeezed: bool  # domain tubes end at c~ instead of c

    def __init__(self, sched: TentacleSchedule, stage: int):
        if sched.family != self.family:
            raise ValueError(f"schedule family {sched.family!r} != {self.family!r}")
        if not sched.geometric:
            raise NotInitializedError(
                "strict schedules keep widths in log form; stage maps need demo mode"
            )
        if stage > len(sched.levels):
            raise NotInitializedError(f"stage {stage} beyond solved levels")
        self.sched = sched
        self.stage = stage
        self.n = sched.n
        self._slots = [s[-1] for s in tower_slots(sched.n)]

    # -- descent --------------------------------------------------------------

    def _tube_end(self, lv: TentacleLevel, squeezed: bool) -> float:
        return lv.c_sq if squeezed else lv.c

    def _descend(self, x: np.ndarray, squeezed: bool):
        """Find the deepest level J and chart data for point x.

        Returns (J, heights, z_n, w) where heights are the address height
        letters, z_n the tentacle center height, and w the chart point
        (shift removed, center subtracted); J = 0 when x is outside every
        level-1 tentacle.
        """
        n = self.n
        t = x[0]
        heights: list[float] = []
        z_n = 0.0
        q_n = x[-1]
        found = 0
        w = None
        for j in range(1, self.stage + 1):
            lv = self.sched.level(j)
            nu = lv.r_hat_prev - lv.shift_drop * _taper(t, lv.r_hat, lv.r_hat_prev)
            if nu <= 0.0:
                # the sibling stacking pitch fell below float resolution;
                # deeper tentacles are indistinguishable from their parent
                break
            m = int(math.floor((q_n / nu + 1.0) * 2 ** (n - 1)))
            m = min(max(m, 0), 2**n - 1)
            s_hat = self._slots[m]
            w_n = q_n - s_hat * nu
            w_cand = np.empty(n)
            w_cand[0] = t
            w_cand[1 : n - 1] = x[1 : n - 1]
            w_cand[n - 1] = w_n
            in_cube = np.max(np.abs(w_cand)) < lv.r_hat
            d_j = lv.d
            end = self._tube_end(lv, squeezed)
            in_tube = (
                lv.r_hat <= t < end
                and np.max(np.abs(w_cand[1:])) < d_j
            )
            if not (in_cube or in_tube):
                break
            heights.append(s_hat)
            z_n += lv.r_hat_prev * s_hat
            q_n = w_n
            found = j
            w = w_cand
        return found, heights, z_n, w

    # -- per-slice axial maps ---------------------------------------------------

    def _axial_forward(self, lv: TentacleLevel, w: np.ndarray):
        rho = float(np.max(np.abs(w[1:])))
        e, _ = _modulation(lv, rho)
        return pl_interpolate(w[0], _knots(lv, self.family, e))

    def _axial_inverse(self, lv: TentacleLevel, w: np.ndarray):
        rho = float(np.max(np.abs(w[1:])))
        e, _ = _modulation(lv, rho)
        return pl_inverse(w[0], _knots(lv, self.family, e))

    # -- public API ---------------------------------------------------------------

    def forward(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        J, heights, z_n, w = self._descend(x, squeezed=self.forward_from_squeezed)
        if J == 0:
            return x.copy()
        lv = self.sched.level(J)
        out_w = w.copy()
        if w[0] >= lv.r_hat:
            out_w[0] = self._axial_forward(lv, w)
        sh = _Shift(self.sched, heights)
        out = out_w.copy()
        out[-1] += z_n + sh.sigma(out_w[0])
        return out

    def inverse(self, point) -> np.ndarray:
        y = np.asarray(point, dtype=float)
        J, heights, z_n, w = self._descend(y, squeezed=not self.forward_from_squeezed)
        if J == 0:
            return y.copy()
        lv = self.sched.level(J)
        out_w = w.copy()
        if w[0] >= lv.r_hat:
            out_w[0] = self._axial_inverse(lv, w)
        sh = _Shift(self.sched, heights)
        out = out_w.copy()
        out[-1] += z_n + sh.sigma(out_w[0])
        return out

    def derivative(self, point) -> np.ndarray:
        """Analytic Jacobian of the forward map (off interface surfaces)."""
        x = np.asarray(point, dtype=float)
        n = self.n
        J, heights, z_n, w = self._descend(x, squeezed=self.forward_from_squeezed)
        if J == 0:
            return np.eye(n)
        lv = self.sched.level(J)
        sh = _Shift(self.sched, heights)
        if w[0] < lv.r_hat:
            return np.eye(n)
        rho = float(np.max(np.abs(w[1:])))
        e, de_drho = _modulation(lv, rho)
        knots = _knots(lv, self.family, e)
        i = _pl_piece(w[0], knots.ts)
        lam = (w[0] - knots.ts[i]) / (knots.ts[i + 1] - knots.ts[i])
        slope = pl_slope(w[0], knots)
        coeffs = _knot_e_coeffs(lv, self.family)
        deta_de = coeffs[i] * (1 - lam) + coeffs[i + 1] * lam
        eta = knots.ss[i] + lam * (knots.ss[i + 1] - knots.ss[i])

        # straight-chart Jacobian: first row (slope, d eta/d w_perp), rest id
        b = np.eye(n)
        b[0, 0] = slope
        if de_drho != 0.0:
            arg = 1 + int(np.argmax(np.abs(w[1:])))
            b[0, arg] = deta_de * de_drho * math.copysign(1.0, w[arg])
        # shear conjugation: out = Sh(q + z), q = B-chart, in = Sh^{-1}(x) - z
        c = np.eye(n)
        c[n - 1, 0] = -sh.sigma_slope(x[0])
        a = np.eye(n)
        a[n - 1, 0] = sh.sigma_slope(eta)
        return a @ b @ c

    def forward_many(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.forward(p) for p in points])

    def inverse_many(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.inverse(p) for p in points])


class SqueezeStage(_TentacleStage):
    """h_k: identity outside the twisted tentacles, squeezes every level-j
    tentacle tube onto the squeezed tube, the identity on the tower cells,
    linear on the inner tubes."""

    family = SQUEEZE
    forward_from_squeezed = False


class StretchStage(_TentacleStage):
    """h~_k: the mirror map carrying squeezed tubes back onto full tubes;
    not the pointwise inverse of the squeeze (the interiors differ), but
    the same tentacle bookkeeping."""

    family = STRETCH
    forward_from_squeezed = True


class StraightTentacleMap:
    """One level of the straight-chart squeeze/stretch on P'_k, for
    quadrature cross-checks: x -> (eta(x_1, |x_perp|), x_perp)."""

    def __init__(self, sched: TentacleSchedule, k: int):
        if not sched.geometric:
            raise NotInitializedError("straight maps need a demo schedule")
        self.sched = sched
        self.lv = sched.level(k)
        self.family = sched.family
        self.n = sched.n

    def forward(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        lv = self.lv
        rho = float(np.max(np.abs(x[1:])))
        e, _ = _modulation(lv, rho)
        out = x.copy()
        out[0] = pl_interpolate(x[0], _knots(lv, self.family, e))
        return out

    def inverse(self, point) -> np.ndarray:
        y = np.asarray(point, dtype=float)
        lv = self.lv
        rho = float(np.max(np.abs(y[1:])))
        e, _ = _modulation(lv, rho)
        out = y.copy()
        out[0] = pl_inverse(y[0], _knots(lv, self.family, e))
        return out

    def derivative(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        lv = self.lv
        n = self.n
        rho = float(np.max(np.abs(x[1:])))
        e, de_drho = _modulation(lv, rho)
        knots = _knots(lv, self.family, e)
        i = _pl_piece(x[0], knots.ts)
        lam = (x[0] - knots.ts[i]) / (knots.ts[i + 1] - knots.ts[i])
        coeffs = _knot_e_coeffs(lv, self.family)
        deta_de = coeffs[i] * (1 - lam) + coeffs[i + 1] * lam
        d = np.eye(n)
        d[0, 0] = pl_slope(x[0], knots)
        if de_drho != 0.0:
            arg = 1 + int(np.argmax(np.abs(x[1:])))
            d[0, arg] = deta_de * de_drho * math.copysign(1.0, x[arg])
        return d

    def tube_box(self, outer: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Chart box of P'_k (outer) or P_k (inner) for this family's domain."""
        lv = self.lv
        squeezed_domain = self.family == STRETCH
        if outer:
            end, width = (lv.c_sq if squeezed_domain else lv.c), lv.d
        else:
            end, width = (lv.a_sq if squeezed_domain else lv.a), lv.b
        lo = np.array([lv.r_hat] + [-width] * (self.n - 1))
        hi = np.array([end] + [width] * (self.n - 1))
        return lo, hi


# ---------------------------------------------------------------------------
# Energy bounds.
# ---------------------------------------------------------------------------


def tentacle_seminorm_bound(sched: TentacleSchedule, k: int) -> float:
    """Upper bound / estimate for the P'_k energy of one straight level map.

    Strict modes: the log-space closed form
        c_geom 2^{(beta+1)k(n-1)} (u_d^{2-n} - u_b^{2-n}) / (n-2)
    plus the axial-slope volume term (which underflows to 0 there).
    Demo mode (n = 3): a tight semi-analytic evaluation of the exact
    Frobenius energy, exact in the axial variable, 1-D quadrature in the
    transverse log radius; it cross-validates against grid quadrature.
    """
    n = sched.n
    if n == 2:
        raise UnsupportedDimensionError("the transverse exponent degenerates at n = 2")
    lv = sched.level(k)
    if sched.mode == "demo":
        if n != 3:
            raise UnsupportedDimensionError("demo-mode tight energy implemented for n = 3")
        return _demo_energy(sched, k)
    c_geom = geometry_constant(n, sched.beta, sched.family)
    bracket = lv.u_d ** (2 - n) - lv.u_b ** (2 - n)
    main = c_geom * 2.0 ** ((sched.beta + 1) * k * (n - 1)) * bracket / (n - 2)
    # axial term: (max slope)^{n-1} * |P'_k|, evaluated via logs
    max_slope = _max_axial_slope(lv, sched.family)
    log_axial = (
        (n - 1) * math.log(max_slope)
        + math.log(lv.c_sq if sched.family == STRETCH else lv.c)
        + (n - 1) * (math.log(2.0) - lv.u_d)
    )
    axial = math.exp(log_axial) if log_axial > -745.0 else 0.0
    return main + axial


def _max_axial_slope(lv: TentacleLevel, family: str) -> float:
    worst = 1.0
    for e in (0.0, lv.e_range):
        kn = _knots(lv, family, e)
        for i in range(len(kn.ts) - 1):
            worst = max(worst, (kn.ss[i + 1] - kn.ss[i]) / (kn.ts[i + 1] - kn.ts[i]))
    return worst


def _demo_energy(sched: TentacleSchedule, k: int) -> float:
    """Exact-in-axial, 1-D-quadrature-in-rho evaluation of
    int_{P'_k} |D eta-map|_F^2 for n = 3."""
    lv = sched.level(k)
    family = sched.family
    u_d, u_b, e_rng = lv.u_d, lv.u_b, lv.e_range
    d, b = lv.d, lv.b

    # transverse moments over the sup-annulus b < rho < d (area el. 8 rho drho)
    def moment(j):
        val, _ = quad(
            lambda u: 8.0 * math.exp(-2.0 * u) * (math.log(u / u_d)) ** j,
            u_d,
            u_b,
            limit=200,
        )
        return val

    area_ann = (2 * d) ** 2 - (2 * b) ** 2
    a0, a1, a2 = area_ann, moment(1), moment(2)
    g2 = 8.0 * (1.0 / u_d - 1.0 / u_b)
    core = (2 * b) ** 2

    kn0 = _knots(lv, family, 0.0)
    coeffs = _knot_e_coeffs(lv, family)
    total = 0.0
    for i in range(len(kn0.ts) - 1):
        t_lo, t_hi = kn0.ts[i], kn0.ts[i + 1]
        length = t_hi - t_lo
        s_lo0, s_hi0 = kn0.ss[i], kn0.ss[i + 1]
        c_lo, c_hi = coeffs[i], coeffs[i + 1]
        # axial slope m(E) = m0 + m1 E on this piece
        m0 = (s_hi0 - s_lo0) / length
        m1 = (c_hi - c_lo) / length
        # identity rows: (n-1) = 2 over the full cross-section
        total += 2.0 * length * ((2 * d) ** 2)
        # slope^2 term: integrate (m0 + m1 E)^2 over annulus + core (E = range)
        total += length * (m0 * m0 * a0 + 2 * m0 * m1 * a1 + m1 * m1 * a2)
        total += length * (m0 + m1 * e_rng) ** 2 * core
        # transverse-gradient term: (c_lo + lam (c_hi - c_lo))^2 averaged in lam
        w_mean = c_lo * c_lo + c_lo * (c_hi - c_lo) + (c_hi - c_lo) ** 2 / 3.0
        total += length * w_mean * g2
    return total


def log_tentacle_union_measure(sched: TentacleSchedule, k: int) -> float:
    """log of 2^{nk} (d_k^{n-1} c_k 2^{n-1} + (2 r_k)^n), stable for
    log-form widths; the sequence must decrease to -inf."""
    n = sched.n
    lv = sched.level(k)
    log_tube = (n - 1) * (-lv.u_d) + math.log(lv.c) + (n - 1) * math.log(2.0)
    log_cube = n * math.log(2.0 * lv.r_hat)
    hi = max(log_tube, log_cube)
    lo = min(log_tube, log_cube)
    return n * k * math.log(2.0) + hi + math.log1p(math.exp(lo - hi))
