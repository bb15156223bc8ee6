"""Nested-cube geometry: parameter schedules, addresses, point location.

Everything else in the package is built on the family of nested cubes
inside [-1,1]^n.  A schedule supplies the shrinking half-widths
r_k = 2^{-k} alpha_k and r'_k = 2^{-k} alpha_{k-1}; an address (a word of
child letters) names one cell of the construction.  Three constructions
share the machinery:

* ``setA`` / ``setB``: 2^n children per cell, centered at the parent
  center plus (r_{k-1}/2) v for v in {-1,1}^n.
* ``towerB``: 2^n children stacked along the last axis, centered at the
  parent center plus r_{k-1} vhat for the 2^n slot vectors vhat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidAddressError, UnsupportedDimensionError

DEPTH_CAP = 24

SET_A = "setA"
SET_B = "setB"
TOWER_B = "towerB"


@lru_cache(maxsize=None)
def cube_vertices(n: int) -> tuple[tuple[int, ...], ...]:
    """The 2^n vertices of [-1,1]^n, lexicographic with -1 before 1."""
    if n < 1:
        raise UnsupportedDimensionError("need n >= 1")
    verts = [()]
    for _ in range(n):
        verts = [v + (s,) for v in verts for s in (-1, 1)]
    return tuple(verts)


@lru_cache(maxsize=None)
def tower_slots(n: int) -> tuple[tuple[float, ...], ...]:
    """Slot vectors (0, ..., 0, -1 + (2j-1)/2^n) for j = 1..2^n."""
    if n < 2:
        raise UnsupportedDimensionError("tower construction needs n >= 2")
    zeros = (0.0,) * (n - 1)
    return tuple(zeros + (-1.0 + (2 * j - 1) / 2**n,) for j in range(1, 2**n + 1))


@dataclass(frozen=True)
class ParameterSchedule:
    """A decreasing sequence alpha_k driving a nested-cube construction.

    kind 'A' is the fat sequence alpha_k = (1 + 2^{-k beta})/2, kind 'B'
    the thin sequence 2^{-k beta}; kind 'custom' takes an explicit table
    (alpha_0 must be 1 and the table strictly decreasing).
    """

    n: int
    beta: float = 4.0
    kind: str = "A"
    custom_alpha: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.n < 2:
            raise UnsupportedDimensionError("need n >= 2")
        if self.kind not in ("A", "B", "custom"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind in ("A", "B") and self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.kind == "custom":
            a = self.custom_alpha
            if len(a) < 2 or a[0] != 1.0:
                raise ValueError("custom schedule needs alpha_0 = 1 and depth >= 1")
            if any(a[i + 1] >= a[i] for i in range(len(a) - 1)) or a[-1] <= 0:
                raise ValueError("custom schedule must be strictly decreasing and positive")

    def alpha(self, k: int) -> float:
        if k < 0:
            raise ValueError("level must be >= 0")
        if self.kind == "A":
            return 0.5 * (1.0 + 2.0 ** (-k * self.beta))
        if self.kind == "B":
            return 2.0 ** (-k * self.beta)
        if k >= len(self.custom_alpha):
            raise ValueError(f"custom schedule only defined up to level {len(self.custom_alpha) - 1}")
        return self.custom_alpha[k]

    def alpha_limit(self) -> float:
        if self.kind == "A":
            return 0.5
        if self.kind == "B":
            return 0.0
        return self.custom_alpha[-1]

    def r(self, k: int) -> float:
        """Inner half-width r_k = 2^{-k} alpha_k."""
        return 2.0**-k * self.alpha(k)

    def r_outer(self, k: int) -> float:
        """Outer half-width r'_k = 2^{-k} alpha_{k-1}; r'_0 := r_0."""
        if k == 0:
            return self.alpha(0)
        return 2.0**-k * self.alpha(k - 1)

    def radii(self, k_max: int) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (r_0..r_k, r'_0..r'_k) for kernel-style consumers."""
        r = np.array([self.r(k) for k in range(k_max + 1)])
        ro = np.array([self.r_outer(k) for k in range(k_max + 1)])
        return r, ro


def harmonic_schedule(n: int, depth: int = DEPTH_CAP) -> ParameterSchedule:
    """Custom schedule alpha_k = 1/(k+1): measure-zero limit, full dimension."""
    return ParameterSchedule(
        n=n, kind="custom", custom_alpha=tuple(1.0 / (k + 1) for k in range(depth + 1))
    )


def _alphabet(construction: str, n: int):
    if construction in (SET_A, SET_B):
        return cube_vertices(n)
    if construction == TOWER_B:
        return tower_slots(n)
    raise InvalidAddressError(f"unknown construction {construction!r}")


@dataclass(frozen=True)
class Address:
    """A word of child letters naming one cell of a construction."""

    construction: str
    word: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if not self.word:
            return
        n = len(self.word[0])
        allowed = set(_alphabet(self.construction, n))
        for letter in self.word:
            if len(letter) != n or tuple(letter) not in allowed:
                raise InvalidAddressError(f"letter {letter!r} not in the {self.construction} alphabet")

    @property
    def level(self) -> int:
        return len(self.word)

    def parent(self) -> "Address":
        if not self.word:
            raise InvalidAddressError("root address has no parent")
        return Address(self.construction, self.word[:-1])

    def child(self, letter) -> "Address":
        return Address(self.construction, self.word + (tuple(letter),))


def cell_center(schedule: ParameterSchedule, address: Address) -> np.ndarray:
    """Center of the cell named by ``address`` under ``schedule``.

    setA/setB recursion: z_k = z_{k-1} + (r_{k-1}/2) v_k;
    towerB recursion:    z_k = z_{k-1} + r_{k-1} vhat_k.
    """
    n = schedule.n
    z = np.zeros(n)
    half = address.construction != TOWER_B
    for j, letter in enumerate(address.word, start=1):
        if len(letter) != n:
            raise InvalidAddressError("letter dimension does not match schedule")
        step = schedule.r(j - 1)
        if half:
            step *= 0.5
        z += step * np.asarray(letter, dtype=float)
    return z


@dataclass(frozen=True)
class CubeSpec:
    """A concrete cube Q(center, half_width) with its construction role."""

    center: tuple[float, ...]
    half_width: float
    role: str = "inner"  # 'inner' or 'outer'

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    def contains(self, point, half_open: bool = True) -> bool:
        c = np.asarray(self.center)
        p = np.asarray(point, dtype=float)
        if half_open:
            return bool(np.all(p >= c - self.half_width) and np.all(p < c + self.half_width))
        return bool(np.max(np.abs(p - c)) <= self.half_width)


def cell_cubes(schedule: ParameterSchedule, address: Address) -> tuple[CubeSpec, CubeSpec]:
    """(inner, outer) cubes of the addressed cell."""
    z = tuple(cell_center(schedule, address))
    k = address.level
    return (
        CubeSpec(z, schedule.r(k), "inner"),
        CubeSpec(z, schedule.r_outer(k), "outer"),
    )


@dataclass(frozen=True)
class Location:
    """Result of point location: the deepest address and the zone there.

    zone 'frame': the point sits in Q'\\Q of ``address`` (level = |word|);
    zone 'core':  the point is still inside the inner cube at the depth cap;
    zone 'outside': towerB only, the point escaped every child cell.
    """

    address: Address
    zone: str
    sup_offset: float


def locate(
    schedule: ParameterSchedule,
    construction: str,
    point,
    max_level: int,
) -> Location:
    """Descend the address tree under the half-open face convention.

    At each level the child is chosen by per-coordinate comparison with
    the current center (setA/setB) or by binning the last coordinate into
    the 2^n slot tiles (towerB); descent stops in the first frame, at the
    depth cap, or (towerB) when the point escapes the chosen child cell.
    """
    x = np.asarray(point, dtype=float)
    n = schedule.n
    if x.shape != (n,):
        raise ValueError("point dimension does not match schedule")
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    if construction in (SET_A, SET_B):
        return _locate_set(schedule, construction, x, max_level)
    if construction == TOWER_B:
        return _locate_tower(schedule, x, max_level)
    raise InvalidAddressError(f"unknown construction {construction!r}")


def _locate_set(schedule, construction, x, max_level):
    n = schedule.n
    z = np.zeros(n)
    word = []
    for lev in range(1, max_level + 1):
        v = tuple(1 if x[d] >= z[d] else -1 for d in range(n))
        z = z + 0.5 * schedule.r(lev - 1) * np.asarray(v, dtype=float)
        word.append(v)
        t = float(np.max(np.abs(x - z)))
        if t >= schedule.r(lev):
            return Location(Address(construction, tuple(word)), "frame", t)
    return Location(Address(construction, tuple(word)), "core", t)


def _locate_tower(schedule, x, max_level):
    n = schedule.n
    slots = tower_slots(n)
    z = np.zeros(n)
    word = []
    for lev in range(1, max_level + 1):
        r_prev = schedule.r(lev - 1)
        tile = int(math.floor((x[n - 1] - z[n - 1] + r_prev) / (2.0 * r_prev / 2**n)))
        tile = min(max(tile, 0), 2**n - 1)
        slot = slots[tile]
        z = z + r_prev * np.asarray(slot)
        word.append(slot)
        t = float(np.max(np.abs(x - z)))
        if t < schedule.r(lev):
            continue
        if t <= schedule.r_outer(lev):
            return Location(Address(TOWER_B, tuple(word)), "frame", t)
        return Location(Address(TOWER_B, tuple(word)), "outside", t)
    return Location(Address(TOWER_B, tuple(word)), "core", t)


def schedule_radii(schedule: ParameterSchedule, k: int) -> tuple[float, float]:
    """(r_k, r'_k); level 0 returns (alpha_0, alpha_0)."""
    return schedule.r(k), schedule.r_outer(k)


def stage_measure(schedule: ParameterSchedule, k: int) -> float:
    """Volume of the k-th stage union, 2^{nk} (2 r_k)^n = (2 alpha_k)^n."""
    return (2.0 * schedule.alpha(k)) ** schedule.n


def limit_measure(schedule: ParameterSchedule) -> float:
    """Volume of the limit set, (2 lim alpha_k)^n."""
    return (2.0 * schedule.alpha_limit()) ** schedule.n


def frame_measure(schedule: ParameterSchedule, k: int) -> float:
    """Volume of one frame Q'_{v(k)} \\ Q_{v(k)}."""
    n = schedule.n
    return (2.0 * schedule.r_outer(k)) ** n - (2.0 * schedule.r(k)) ** n


@dataclass(frozen=True, order=False)
class LogMagnitude:
    """A positive quantity exp(-u) stored by u = log(1/value).

    Used for the transverse tentacle widths whose strict schedules push
    them far below the floating-point range; all arithmetic stays on u.
    """

    u: float

    def __post_init__(self):
        if not (self.u >= 0.0):
            raise ValueError("LogMagnitude represents values <= 1 (u >= 0)")

    @classmethod
    def from_value(cls, value: float) -> "LogMagnitude":
        if not (0.0 < value <= 1.0):
            raise ValueError("value must lie in (0, 1]")
        return cls(-math.log(value))

    @property
    def value(self) -> float:
        """exp(-u); may underflow to exactly 0.0 (by design)."""
        return math.exp(-self.u)

    @property
    def log_inverse(self) -> float:
        """log(1/value) = u."""
        return self.u

    @property
    def loglog_inverse(self) -> float:
        """log log (1/value) = log u."""
        if self.u <= 0.0:
            raise ValueError("loglog undefined for value 1")
        return math.log(self.u)

    def mul_exp(self, delta: float) -> "LogMagnitude":
        """The quantity times e^{delta} (still represented in log form)."""
        return LogMagnitude(self.u - delta)

    def times(self, other: "LogMagnitude") -> "LogMagnitude":
        return LogMagnitude(self.u + other.u)

    def power(self, p: float) -> "LogMagnitude":
        return LogMagnitude(self.u * p)

    def __lt__(self, other):
        return self.u > other.u

    def __le__(self, other):
        return self.u >= other.u

    def __gt__(self, other):
        return self.u < other.u

    def __ge__(self, other):
        return self.u <= other.u
