"""The map family of the generalised p-Koch construction.

``phi[(a, b)]`` are the eight contractions (four distinct per orientation
bit ``b``), ``f1``/``f2`` rotate a side curve onto the other two sides of the
unit equilateral triangle, and ``V`` is the rhombus every curve lives in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .geometry import DEFAULT_TOL, Point2, Rhombus, Similarity2, apply, convex_contains

LOWER = 0.25
UPPER = 1.0 / 3.0

MapLabel = Tuple[int, int]

LABELS: Tuple[MapLabel, ...] = tuple((a, b) for b in (0, 1) for a in range(4))
# Reduced alphabet: (0, 1) and (3, 1) alias (0, 0) and (3, 0).
REDUCED_LABELS: Tuple[MapLabel, ...] = ((0, 0), (1, 0), (2, 0), (3, 0), (1, 1), (2, 1))


def parse_p(value: Union[str, float, int, Fraction]) -> Tuple[float, Optional[Fraction]]:
    """Parse ``"1/3"``, ``"0.3"`` or a number into ``(float, exact-or-None)``.

    Rational strings keep their exact value; decimal strings are read exactly
    as decimals too, so ``"0.3"`` is ``3/10``.
    """
    if isinstance(value, Fraction):
        return float(value), value
    if isinstance(value, str):
        text = value.strip()
        try:
            exact = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse p from {value!r}") from exc
        return float(exact), exact
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"cannot parse p from {value!r}")
    return float(value), None


@dataclass(frozen=True)
class KochParams:
    """Parameter ``p`` in the half-open interval ``(1/4, 1/3]``."""

    p: float
    exact: Optional[Fraction] = field(default=None, compare=False)

    def __post_init__(self):
        p = self.p
        if self.exact is not None:
            ok = Fraction(1, 4) < self.exact <= Fraction(1, 3)
        else:
            ok = math.isfinite(p) and LOWER < p <= UPPER
        if not ok:
            raise ValueError(f"p must lie in (1/4, 1/3], got {self.label}")

    @classmethod
    def parse(cls, value) -> "KochParams":
        p, exact = parse_p(value)
        return cls(p, exact)

    @property
    def label(self) -> str:
        """Exact textual form when known, else ``repr`` of the float."""
        if self.exact is not None:
            return str(self.exact)
        return repr(self.p)

    @property
    def rational(self) -> Fraction:
        """Exact rational value (the float itself when no exact form was given)."""
        return self.exact if self.exact is not None else Fraction(self.p)

    @property
    def is_boundary(self) -> bool:
        """True at the classical value p = 1/3 where adjacent cells may touch."""
        if self.exact is not None:
            return self.exact == Fraction(1, 3)
        return self.p == UPPER

    @property
    def height(self) -> float:
        """Half of the short diagonal of ``V``."""
        return 0.5 * math.sqrt(4 * self.p - 1)


@dataclass(frozen=True)
class MapFamily:
    params: KochParams
    phi: Dict[MapLabel, Similarity2]
    f1: Similarity2
    f2: Similarity2
    V: Rhombus
    P_plus: Point2
    P_minus: Point2
    Q_plus: Point2
    Q_minus: Point2

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def sides(self) -> Tuple[Similarity2, Similarity2, Similarity2]:
        """Placement maps for the three snowflake sides (identity, f1, f2)."""
        return (Similarity2.identity(), self.f1, self.f2)

    def complex_coefficients(self) -> np.ndarray:
        """``coef[a, b] = (scale, shift)`` with ``phi[(a, b)](z) = scale*z + shift``."""
        out = np.empty((4, 2, 2), dtype=complex)
        for (a, b), m in self.phi.items():
            out[a, b] = m.as_complex()
        return out


def build_family(params: Union[KochParams, float, str]) -> MapFamily:
    """Materialise every map from its closed form."""
    if not isinstance(params, KochParams):
        params = KochParams.parse(params)
    p = params.p
    r = math.sqrt(4 * p - 1)
    h = 0.5 * r

    psi0 = Similarity2(p, 0.0, 0.0, p, -0.5 * (1 - p), 0.0)
    psi1 = Similarity2(0.5 * (1 - 2 * p), -0.5 * r, 0.5 * r, 0.5 * (1 - 2 * p),
                       0.25 * (2 * p - 1), 0.25 * r)
    psi2 = Similarity2(0.5 * (1 - 2 * p), 0.5 * r, -0.5 * r, 0.5 * (1 - 2 * p),
                       0.25 * (1 - 2 * p), 0.25 * r)
    psi3 = Similarity2(p, 0.0, 0.0, p, 0.5 * (1 - p), 0.0)
    phi11 = Similarity2(0.5 * (1 - 2 * p), 0.5 * r, -0.5 * r, 0.5 * (1 - 2 * p),
                        0.25 * (2 * p - 1), -0.25 * r)
    phi21 = Similarity2(0.5 * (1 - 2 * p), -0.5 * r, 0.5 * r, 0.5 * (1 - 2 * p),
                        0.25 * (1 - 2 * p), -0.25 * r)
    phi = {
        (0, 0): psi0, (1, 0): psi1, (2, 0): psi2, (3, 0): psi3,
        (0, 1): psi0, (1, 1): phi11, (2, 1): phi21, (3, 1): psi3,
    }

    s3 = math.sqrt(3)
    f1 = Similarity2(-0.5, 0.5 * s3, -0.5 * s3, -0.5, 0.25, -0.25 * s3)
    f2 = Similarity2(-0.5, -0.5 * s3, 0.5 * s3, -0.5, -0.25, -0.25 * s3)

    P_plus, P_minus = Point2(0.5, 0.0), Point2(-0.5, 0.0)
    Q_plus, Q_minus = Point2(0.0, h), Point2(0.0, -h)
    V = Rhombus(np.array([P_minus, Q_minus, P_plus, Q_plus]))
    return MapFamily(params, phi, f1, f2, V, P_plus, P_minus, Q_plus, Q_minus)


def in_V(family: MapFamily, pts, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Membership test ``|2x| + |2y / sqrt(4p-1)| <= 1 + tol``."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    r = math.sqrt(4 * family.p - 1)
    return np.abs(2 * pts[:, 0]) + np.abs(2 * pts[:, 1] / r) <= 1 + tol


def image_strips(family: MapFamily) -> Dict[MapLabel, Tuple[Tuple[float, float], Tuple[float, float]]]:
    """The coordinate boxes that confine each open image ``phi[(a, b)](U)``."""
    p, h = family.p, family.params.height
    inf = math.inf
    return {
        (0, 0): ((-0.5, p - 0.5), (-inf, inf)),
        (0, 1): ((-0.5, p - 0.5), (-inf, inf)),
        (1, 0): ((p - 0.5, 0.0), (0.0, h)),
        (1, 1): ((p - 0.5, 0.0), (-h, 0.0)),
        (2, 0): ((0.0, 0.5 - p), (0.0, h)),
        (2, 1): ((0.0, 0.5 - p), (-h, 0.0)),
        (3, 0): ((0.5 - p, 0.5), (-inf, inf)),
        (3, 1): ((0.5 - p, 0.5), (-inf, inf)),
    }


def _open_intervals_disjoint(i, j, tol) -> bool:
    return i[1] <= j[0] + tol or j[1] <= i[0] + tol


@dataclass
class OSCReport:
    nested: bool
    interiors_disjoint: bool
    witnesses: list
    contacts: list

    def to_dict(self) -> dict:
        return {
            "nested": self.nested,
            "interiors_disjoint": self.interiors_disjoint,
            "witnesses": self.witnesses,
            "contacts": self.contacts,
        }


def verify_nesting_and_osc(family: MapFamily, tol: float = DEFAULT_TOL) -> OSCReport:
    """Numerically check that every image of ``V`` lies in ``V`` and that, per
    orientation bit, the four open images are pairwise disjoint.

    Disjointness is certified by confining each image to a coordinate strip
    and checking that the strips themselves are pairwise disjoint.
    ``contacts`` lists the pairs of same-bit images whose closures meet
    (allowed; they still have disjoint interiors).
    """
    witnesses = []
    nested = True
    verts = family.V.vertices
    images = {lab: apply(m, verts) for lab, m in family.phi.items()}
    for lab, img in images.items():
        bad = ~in_V(family, img, tol)
        if bad.any():
            nested = False
            for v in img[bad]:
                witnesses.append({"kind": "not_nested", "label": list(lab),
                                  "vertex": [float(v[0]), float(v[1])]})

    strips = image_strips(family)
    disjoint = True
    for lab, img in images.items():
        (x0, x1), (y0, y1) = strips[lab]
        if img[:, 0].min() < x0 - tol or img[:, 0].max() > x1 + tol or \
                img[:, 1].min() < y0 - tol or img[:, 1].max() > y1 + tol:
            disjoint = False
            witnesses.append({"kind": "outside_strip", "label": list(lab)})

    contacts = []
    for b in (0, 1):
        for a in range(4):
            for a2 in range(a + 1, 4):
                sa, sb = strips[(a, b)], strips[(a2, b)]
                if not (_open_intervals_disjoint(sa[0], sb[0], tol)
                        or _open_intervals_disjoint(sa[1], sb[1], tol)):
                    disjoint = False
                    witnesses.append({"kind": "strips_overlap", "labels": [[a, b], [a2, b]]})
                shared = _shared_boundary(images[(a, b)], images[(a2, b)], tol)
                if shared:
                    contacts.append({"labels": [[a, b], [a2, b]], "points": shared})
    return OSCReport(nested, disjoint, witnesses, contacts)


def _shared_boundary(r1: np.ndarray, r2: np.ndarray, tol: float) -> list:
    """Vertices of either rhombus that lie on the other (closed) rhombus."""
    pts = [v for v in r1 if convex_contains(r2, v[None, :], tol)[0]]
    pts += [v for v in r2 if convex_contains(r1, v[None, :], tol)[0]]
    uniq = []
    for v in pts:
        if not any(np.hypot(*(v - u)) <= tol for u in uniq):
            uniq.append(v)
    return [[float(v[0]), float(v[1])] for v in uniq]
