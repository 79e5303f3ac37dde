"""Finite-depth curves, snowflakes, double-sided sets and their cells.

Every map in the family is an orientation-preserving similarity, so a
composite ``phi_w1 o ... o phi_wk`` is stored as the complex affine map
``z -> a z + b``. Words are enumerated in lexicographic order, which makes
the depth-``k`` index of a word equal to its base-4 value; children of word
``i`` are ``4 i + d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .choices import ChoiceSequence, SnowflakeSpec
from .geometry import DEFAULT_TOL, Point2, Polyline, Rhombus
from .ifs import REDUCED_LABELS, MapFamily

# Cell vertices of V in cyclic (counter-clockwise) order: P-, Q-, P+, Q+.
SIDE_NAMES = ("s", "t", "r")


def _v_corners(family: MapFamily) -> np.ndarray:
    h = family.params.height
    return np.array([-0.5, -1j * h, 0.5, 1j * h])


def _side_coefficients(family: MapFamily) -> List[Tuple[complex, complex]]:
    return [m.as_complex() for m in family.sides]


def word_maps(family: MapFamily, s: ChoiceSequence, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Complex coefficients ``(a, b)`` of all ``4**k`` depth-``k`` composites."""
    if k < 0:
        raise ValueError("depth must be non-negative")
    if k > s.depth:
        raise ValueError(f"depth {k} exceeds the sequence depth {s.depth}")
    coef = family.complex_coefficients()
    a = np.ones(1, dtype=complex)
    b = np.zeros(1, dtype=complex)
    digits = np.arange(4)
    for level in range(k):
        flips = s.levels[level].astype(np.intp)
        scale = coef[digits[None, :], flips[:, None], 0]
        shift = coef[digits[None, :], flips[:, None], 1]
        b = (a[:, None] * shift + b[:, None]).reshape(-1)
        a = (a[:, None] * scale).reshape(-1)
    return a, b


def _snowflake_word_maps(family: MapFamily, spec: SnowflakeSpec, k: int):
    """Side-major composites ``side_map o word_map`` for the three sides."""
    if k > spec.depth:
        raise ValueError(f"depth {k} exceeds the spec depth {spec.depth}")
    aa, bb = [], []
    for (sa, sb), seq in zip(_side_coefficients(family), spec.sequences):
        a, b = word_maps(family, seq, k)
        aa.append(sa * a)
        bb.append(sa * b + sb)
    return np.concatenate(aa), np.concatenate(bb)


def _to_xy(z: np.ndarray) -> np.ndarray:
    return np.column_stack([z.real, z.imag])


@dataclass(frozen=True)
class CurveApprox:
    depth: int
    polyline: Polyline
    side: Optional[str] = None

    @property
    def vertices(self) -> np.ndarray:
        return self.polyline.vertices


@dataclass(frozen=True)
class SnowflakeApprox:
    """Closed polyline of ``3 * 4**k`` vertices, counter-clockwise from P+."""

    depth: int
    polyline: Polyline

    @property
    def vertices(self) -> np.ndarray:
        return self.polyline.vertices


@dataclass(frozen=True)
class CellPath:
    side: int
    word: Tuple[int, ...]


def _curve_vertices(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    starts = b - 0.5 * a
    ends = b + 0.5 * a
    gap = np.abs(starts[1:] - ends[:-1])
    if gap.size and gap.max() > tol:
        raise AssertionError(f"adjacent segments fail to meet (gap {gap.max():.3g})")
    z = np.concatenate([starts[:1], ends])
    # The endpoints are exact fixed points; snap them.
    z[0], z[-1] = -0.5, 0.5
    return z


def curve_polyline(family: MapFamily, s: ChoiceSequence, k: int,
                   tol: float = DEFAULT_TOL) -> CurveApprox:
    """The depth-``k`` approximation: ``4**k + 1`` vertices from P- to P+."""
    a, b = word_maps(family, s, k)
    return CurveApprox(k, Polyline(_to_xy(_curve_vertices(a, b, tol))))


def _apply_complex(m, z: np.ndarray) -> np.ndarray:
    a, b = m
    return a * z + b


def snowflake_polyline(family: MapFamily, spec: SnowflakeSpec, k: int,
                       tol: float = DEFAULT_TOL) -> SnowflakeApprox:
    """Closed polyline following the counter-clockwise snowflake parameterisation.

    Order: the ``s`` curve reversed (P+ to P-), then ``f2`` of the ``r``
    curve reversed, then ``f1`` of the ``t`` curve reversed. The repeated
    corner vertices are dropped so the list is cyclic.
    """
    if k > spec.depth:
        raise ValueError(f"depth {k} exceeds the spec depth {spec.depth}")
    _, f1, f2 = _side_coefficients(family)
    zs = [_curve_vertices(*word_maps(family, q, k), tol) for q in spec.sequences]
    pieces = [zs[0][::-1], _apply_complex(f2, zs[2])[::-1], _apply_complex(f1, zs[1])[::-1]]
    z = np.concatenate([piece[:-1] for piece in pieces])
    return SnowflakeApprox(k, Polyline(_to_xy(z)))


def double_sided_maps(family: MapFamily, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composites over the six-letter reduced alphabet, ``6**k`` of them."""
    coef = family.complex_coefficients()
    scale = np.array([coef[a, b, 0] for a, b in REDUCED_LABELS])
    shift = np.array([coef[a, b, 1] for a, b in REDUCED_LABELS])
    a = np.ones(1, dtype=complex)
    b = np.zeros(1, dtype=complex)
    for _ in range(k):
        b = (a[:, None] * shift[None, :] + b[:, None]).reshape(-1)
        a = (a[:, None] * scale[None, :]).reshape(-1)
    return a, b


def double_sided_segments(family: MapFamily, k: int, snowflake: bool = False) -> np.ndarray:
    """Segment endpoints as an ``(n, 2, 2)`` array.

    With ``snowflake=True`` the set is placed on all three sides.
    """
    if k < 0:
        raise ValueError("depth must be non-negative")
    a, b = double_sided_maps(family, k)
    if snowflake:
        sides = _side_coefficients(family)
        a, b = (np.concatenate([sa * a for sa, _ in sides]),
                np.concatenate([sa * b + sb for sa, sb in sides]))
    ends = np.stack([b - 0.5 * a, b + 0.5 * a], axis=1)
    return np.stack([ends.real, ends.imag], axis=-1)


def double_sided_polylines(family: MapFamily, k: int) -> List[Polyline]:
    """The ``6**k`` segments of the double-sided set, one polyline each."""
    return [Polyline(seg) for seg in double_sided_segments(family, k)]


def base4_digits(t: float, k: int) -> List[int]:
    """First ``k`` base-4 digits of ``t``, using the terminating expansion.

    Multiplying a float by 4 is exact, so the digits are exact for the
    binary value of ``t``. ``t = 1`` is the all-threes expansion.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if t == 1.0:
        return [3] * k
    digits = []
    for _ in range(k):
        t *= 4.0
        d = int(t)
        digits.append(d)
        t -= d
    return digits


def _word_map(family: MapFamily, s: ChoiceSequence, digits: Sequence[int]) -> Tuple[complex, complex]:
    coef = family.complex_coefficients()
    a, b, idx = 1 + 0j, 0j, 0
    for level, d in enumerate(digits):
        flip = s.bit(level, idx)
        sc, sh = coef[d, flip]
        a, b = a * sc, a * sh + b
        idx = 4 * idx + d
    return a, b


def rho(family: MapFamily, s: ChoiceSequence, t: float, k: int) -> Point2:
    """Cell-centre approximation of the curve parameterisation at ``t``.

    The true point lies in the same depth-``k`` cell, so the error is at
    most ``p**k`` times half the diameter of ``V``.
    """
    if k > s.depth:
        raise ValueError(f"depth {k} exceeds the sequence depth {s.depth}")
    digits = base4_digits(t, k)
    _, b = _word_map(family, s, digits)
    if k == 0 or t in (0.0, 1.0):
        # All-zero / all-three words converge to the exact endpoints.
        if t == 0.0:
            return family.P_minus
        if t == 1.0:
            return family.P_plus
    return Point2(float(b.real), float(b.imag))


def gamma(family: MapFamily, spec: SnowflakeSpec, t: float, k: int) -> Point2:
    """Counter-clockwise snowflake parameterisation, ``t`` in ``[0, 1]``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if t < 1 / 3:
        return rho(family, spec.s, 1 - 3 * t, k)
    if t < 2 / 3:
        side, seq, u = family.f2, spec.r, 2 - 3 * t
    else:
        side, seq, u = family.f1, spec.t, 3 - 3 * t
    pt = rho(family, seq, min(max(u, 0.0), 1.0), k)
    x, y = side(pt)
    return Point2(x, y)


def cell_corners(family: MapFamily, s: ChoiceSequence, k: int) -> np.ndarray:
    """Vertices of all depth-``k`` cells as a ``(4**k, 4, 2)`` array."""
    a, b = word_maps(family, s, k)
    z = a[:, None] * _v_corners(family)[None, :] + b[:, None]
    return np.stack([z.real, z.imag], axis=-1)


def snowflake_cell_corners(family: MapFamily, spec: SnowflakeSpec, k: int) -> np.ndarray:
    """Side-major ``(3 * 4**k, 4, 2)`` cell vertices for the whole snowflake."""
    a, b = _snowflake_word_maps(family, spec, k)
    z = a[:, None] * _v_corners(family)[None, :] + b[:, None]
    return np.stack([z.real, z.imag], axis=-1)


def index_to_word(i: int, k: int) -> Tuple[int, ...]:
    word = []
    for _ in range(k):
        word.append(i % 4)
        i //= 4
    return tuple(reversed(word))


def cells(family: MapFamily, s: ChoiceSequence, k: int, side: int = 0) -> List[Tuple[CellPath, Rhombus]]:
    """The ``4**k`` depth-``k`` rhombi covering the curve, in word order."""
    corners = cell_corners(family, s, k)
    if side:
        sa, sb = _side_coefficients(family)[side]
        z = sa * (corners[..., 0] + 1j * corners[..., 1]) + sb
        corners = np.stack([z.real, z.imag], axis=-1)
    return [(CellPath(side, index_to_word(i, k)), Rhombus(c)) for i, c in enumerate(corners)]


# --- plain-text export ---------------------------------------------------

def polyline_to_text(poly: Polyline, comments: Iterable[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [f"{x:.17g} {y:.17g}" for x, y in poly.vertices]
    return "\n".join(lines) + "\n"


def polyline_from_text(text: str) -> Polyline:
    rows = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {n}: expected 'x y', got {line!r}")
        rows.append((float(parts[0]), float(parts[1])))
    return Polyline(np.array(rows))
