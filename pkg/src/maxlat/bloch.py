"""Bloch-boundary null modes of the standard Kagome cell (Fleck-Hutchinson modes).

Complex displacements on the smallest cell with phase factors across cell
boundaries produce whole families of periodic GH modes at rational wave
numbers.  The diagonal family is one-periodic along the horizontal lattice
direction; the other two families follow from the 120 degree rotation
symmetry about a triangle center.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import SOutOfRange
from .lattice import SQRT3, PeriodicLattice, build_standard_kagome
from .secondorder import consistency_condition_kagome

# Primitive pair used by the Bloch boundary condition (60 and 120 degree
# directions) and its reciprocal pair.
BLOCH_PRIMITIVES = np.array([[1.0, SQRT3], [-1.0, SQRT3]])
RECIPROCAL_PRIMITIVES = np.array(
    [[0.5, 0.5 / SQRT3], [-0.5, 0.5 / SQRT3]]
)

_CASE_TOL = 1e-9

# Null displacement on (A, B, C) for the diagonal case, constant in the wave
# number; the other two cases are its images under the lattice's three-fold
# rotation about the triangle center.
_NULL_DIAG = np.array([[0.0, 0.0], [SQRT3 / 2, -0.5], [SQRT3 / 2, 0.5]])
_NULL_W2ZERO = np.array([[-SQRT3 / 2, 0.5], [0.0, 0.0], [0.0, 1.0]])
_NULL_W1ZERO = np.array([[-SQRT3 / 2, -0.5], [0.0, -1.0], [0.0, 0.0]])

_TRI_CENTER = np.array([0.0, SQRT3 / 3])


@dataclass(frozen=True)
class BlochWave:
    """Wave number w1 a1 + w2 a2 on the reciprocal primitive pair."""

    w1: float
    w2: float

    def __post_init__(self):
        if not (0.0 <= self.w1 < 1.0 and 0.0 <= self.w2 < 1.0):
            raise ValueError("wave coefficients must lie in [0, 1)")

    def vector(self) -> np.ndarray:
        return self.w1 * RECIPROCAL_PRIMITIVES[0] + self.w2 * RECIPROCAL_PRIMITIVES[1]


def complex_compatibility(w: BlochWave) -> np.ndarray:
    """6x6 complex compatibility matrix of the smallest standard Kagome cell."""
    z1 = cmath.exp(2j * math.pi * w.w1)
    z2 = cmath.exp(2j * math.pi * w.w2)
    h = SQRT3 / 2
    return np.array(
        [
            [-0.5, -h, 0.5, h, 0, 0],
            [0, 0, 1, 0, -1, 0],
            [0.5, -h, 0, 0, -0.5, h],
            [0, 0, -1, 0, z1 * z2.conjugate(), 0],
            [-0.5 * z2, h * z2, 0, 0, 0.5, -h],
            [0.5, h, -0.5 * z1.conjugate(), -h * z1.conjugate(), 0, 0],
        ],
        dtype=complex,
    )


def _circle_dist(x: float) -> float:
    frac = x - math.floor(x)
    return min(frac, 1.0 - frac)


def fh_null_vector(w: BlochWave) -> np.ndarray | None:
    """Null displacement of the complex compatibility matrix, or None.

    Nontrivial null vectors exist exactly when w1 = w2, w2 = 0 or w1 = 0 (on
    the unit circle); in each case the null space is one-dimensional and the
    vector is constant in w.  Normalization fixes d(A) = 0 and d(B) real with
    positive first component in the diagonal case.
    """
    if _circle_dist(w.w1 - w.w2) < _CASE_TOL:
        return _NULL_DIAG.astype(complex)
    if _circle_dist(w.w2) < _CASE_TOL:
        return _NULL_W2ZERO.astype(complex)
    if _circle_dist(w.w1) < _CASE_TOL:
        return _NULL_W1ZERO.astype(complex)
    return None


# -- expanding Bloch null vectors into periodic modes -------------------------

_BASE_POINTS = np.array([[0.0, 0.0], [0.5, SQRT3 / 2], [-0.5, SQRT3 / 2]])
_MY_PRIMITIVES = np.array([[2.0, 0.0], [1.0, SQRT3]])


def _classify_vertex(p: np.ndarray) -> tuple[int, int, int]:
    """Identify a plane point as (type, i, j): base point + i v1 + j v2."""
    for t in range(3):
        q = p - _BASE_POINTS[t]
        j = q[1] / SQRT3
        i = (q[0] - j) / 2.0
        ri, rj = round(i), round(j)
        rec = _BASE_POINTS[t] + ri * _MY_PRIMITIVES[0] + rj * _MY_PRIMITIVES[1]
        if abs(rec[0] - p[0]) < 1e-6 and abs(rec[1] - p[1]) < 1e-6:
            return t, ri, rj
    raise ValueError(f"point {p} is not a standard Kagome vertex")


def _rot_about(p: np.ndarray, angle: float, center: np.ndarray) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    r = np.array([[c, -s], [s, c]])
    return r @ (p - center) + center


def _wave_factor(part: str, s: int, j: int, n: int) -> float:
    """cos or sin of 2 pi s j / n, exact at multiples of pi/2."""
    r = (2 * s * j) % (2 * n)  # angle is pi * r / n
    quarters, rem = divmod(2 * r, n)  # angle in quarter turns
    if rem == 0:
        quarter = quarters % 4
        if part == "real":
            return (1.0, 0.0, -1.0, 0.0)[quarter]
        return (0.0, 1.0, 0.0, -1.0)[quarter]
    angle = math.pi * r / n
    return math.cos(angle) if part == "real" else math.sin(angle)


def _diag_value(s: int, n: int, part: str) -> Callable[[np.ndarray], np.ndarray]:
    def value(p: np.ndarray) -> np.ndarray:
        t, _, j = _classify_vertex(p)
        return _wave_factor(part, s, j, n) * _NULL_DIAG[t]

    return value


def _rotated_value(base: Callable, turns: int) -> Callable[[np.ndarray], np.ndarray]:
    angle = turns * 2.0 * math.pi / 3.0
    c, s = math.cos(angle), math.sin(angle)
    r = np.array([[c, -s], [s, c]])

    def value(p: np.ndarray) -> np.ndarray:
        return r @ base(_rot_about(p, -angle, _TRI_CENTER))

    return value


_FAMILY_TURNS = {"diag": 0, "w2zero": 1, "w1zero": 2}


@dataclass(frozen=True)
class FHMode:
    """One real Fleck-Hutchinson mode, tagged by (s, N, family, part).

    field holds the values on the mode's natural cell; sample() evaluates on
    any standard-Kagome supercell.
    """

    s: int
    N: int
    family: str
    part: str
    cell: PeriodicLattice = field(repr=False)
    field_values: np.ndarray = field(repr=False)
    _value: Callable = field(repr=False)

    def sample(self, lat: PeriodicLattice) -> np.ndarray:
        return np.array([self._value(p) for p in lat.vertices])


@lru_cache(maxsize=None)
def _natural_cell(family: str, n: int) -> PeriodicLattice:
    if family == "diag":
        return build_standard_kagome(1, n)
    return build_standard_kagome(n, n)


def _make_mode(s: int, n: int, family: str, part: str) -> FHMode:
    value = _rotated_value(_diag_value(s, n, part), _FAMILY_TURNS[family])
    cell = _natural_cell(family, n)
    values = np.array([value(p) for p in cell.vertices])
    return FHMode(s, n, family, part, cell, values, value)


def fh_modes(s: int, N: int) -> tuple[FHMode, FHMode]:
    """The cosine and sine modes of the diagonal family on the N-by-one cell."""
    if N < 2 or not 0 <= s <= N // 2:
        raise SOutOfRange(f"need N >= 2 and 0 <= s <= N//2, got s={s}, N={N}")
    return _make_mode(s, N, "diag", "real"), _make_mode(s, N, "diag", "imag")


def fh_basis(N: int) -> list[FHMode]:
    """N independent diagonal-family modes: a basis of the N-by-one GH modes."""
    if N < 2:
        raise SOutOfRange("need N >= 2")
    modes = [_make_mode(s, N, "diag", "real") for s in range(N // 2 + 1)]
    modes += [_make_mode(s, N, "diag", "imag") for s in range(1, (N - 1) // 2 + 1)]
    gram = np.array(
        [[np.sum(a.field_values * b.field_values) for b in modes] for a in modes]
    )
    if np.linalg.matrix_rank(gram, tol=1e-9) != N:
        raise RuntimeError("Fleck-Hutchinson basis lost rank")
    return modes


def fh_full_basis(N: int) -> list[FHMode]:
    """All three families, the shared one-periodic mode kept once: 3N-2 modes."""
    modes = fh_basis(N)
    for fam in ("w2zero", "w1zero"):
        modes += [_make_mode(s, N, fam, "real") for s in range(1, N // 2 + 1)]
        modes += [_make_mode(s, N, fam, "imag") for s in range(1, (N - 1) // 2 + 1)]
    return modes


# -- classification ------------------------------------------------------------

ONE_PERIODIC = "OnePeriodicMechanism"
TWO_BY_ONE = "TwoByOneMechanism"
FOUR_BY_ONE = "FourByOneMechanism"
NO_MECHANISM = "NoMechanism"


def classify_fh_combination(
    s: int, N: int, t1: float, t2: float, verify: bool = False
) -> str:
    """Which mechanism family, if any, the combination t1 u1 + t2 u2 starts.

    Verdicts: s = 0 gives the one-periodic mechanism; s = N/2 the two-by-one
    (the sine mode vanishes there); s = N/4 with |t1| = |t2| the four-by-one;
    anything else starts no mechanism.  Combinations whose field vanishes
    identically inherit the verdict of their family.  With verify=True the
    verdict is cross-checked against the consistency condition on the
    expanded field.
    """
    if N < 2 or not 0 <= s <= N // 2:
        raise SOutOfRange(f"need N >= 2 and 0 <= s <= N//2, got s={s}, N={N}")
    if t1 == 0.0 and t2 == 0.0:
        raise ValueError("(t1, t2) must be nonzero")
    sine_vanishes = s == 0 or (N % 2 == 0 and s == N // 2)
    eff_t2 = 0.0 if sine_vanishes else t2
    if s == 0:
        verdict = ONE_PERIODIC
    elif N % 2 == 0 and s == N // 2:
        verdict = TWO_BY_ONE
    elif t1 == 0.0 or eff_t2 == 0.0:
        verdict = NO_MECHANISM
    elif N % 4 == 0 and s == N // 4 and math.isclose(abs(t1), abs(t2), rel_tol=1e-12):
        verdict = FOUR_BY_ONE
    else:
        verdict = NO_MECHANISM
    if verify:
        u1, u2 = fh_modes(s, N)
        fld = t1 * u1.field_values + t2 * u2.field_values
        passes, _ = consistency_condition_kagome(u1.cell, fld)
        if passes != (verdict != NO_MECHANISM):
            raise RuntimeError(
                f"verdict {verdict} disagrees with the consistency condition "
                f"at s={s}, N={N}, t=({t1}, {t2})"
            )
    return verdict


__all__ = [
    "BlochWave",
    "FHMode",
    "complex_compatibility",
    "fh_null_vector",
    "fh_modes",
    "fh_basis",
    "fh_full_basis",
    "classify_fh_combination",
    "ONE_PERIODIC",
    "TWO_BY_ONE",
    "FOUR_BY_ONE",
    "NO_MECHANISM",
]
