"""Planar primitives: points, similarity maps, polylines and rhombi.

Everything is 64-bit floating point. Tolerances are passed explicitly;
``DEFAULT_TOL`` is only a default argument value, never read implicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence, Union

import numpy as np

DEFAULT_TOL = 1e-9


class Point2(NamedTuple):
    x: float
    y: float


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Similarity2:
    """Affine map ``x -> L x + t`` with ``L = [[m00, m01], [m10, m11]]``."""

    m00: float
    m01: float
    m10: float
    m11: float
    tx: float = 0.0
    ty: float = 0.0

    @classmethod
    def identity(cls) -> "Similarity2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, linear, translation=(0.0, 0.0)) -> "Similarity2":
        (a, b), (c, d) = linear
        return cls(float(a), float(b), float(c), float(d),
                   float(translation[0]), float(translation[1]))

    @property
    def linear(self) -> np.ndarray:
        return np.array([[self.m00, self.m01], [self.m10, self.m11]])

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.tx, self.ty])

    @property
    def det(self) -> float:
        return self.m00 * self.m11 - self.m01 * self.m10

    @property
    def ratio(self) -> float:
        """Contraction ratio ``c`` with ``L^T L = c^2 I``."""
        return math.sqrt(abs(self.det))

    def is_similarity(self, tol: float = 1e-12) -> bool:
        gram = self.linear.T @ self.linear
        c2 = abs(self.det)
        return bool(c2 > 0 and np.allclose(gram, c2 * np.eye(2), atol=tol, rtol=0))

    def __call__(self, pts):
        return apply(self, pts)

    def as_complex(self, tol: float = 1e-12) -> tuple[complex, complex]:
        """Return ``(a, b)`` such that the map is ``z -> a z + b``.

        Only orientation-preserving similarities have this form.
        """
        if abs(self.m00 - self.m11) > tol or abs(self.m01 + self.m10) > tol:
            raise ValueError("map is not an orientation-preserving similarity")
        return complex(self.m00, self.m10), complex(self.tx, self.ty)


def apply(m: Similarity2, pt):
    """Apply ``m`` to a point, or to an ``(n, 2)`` array of points."""
    if isinstance(pt, Point2) or (not isinstance(pt, np.ndarray) and len(pt) == 2
                                  and np.isscalar(pt[0])):
        x, y = float(pt[0]), float(pt[1])
        return Point2(m.m00 * x + m.m01 * y + m.tx, m.m10 * x + m.m11 * y + m.ty)
    arr = np.asarray(pt, dtype=float)
    return arr @ m.linear.T + m.translation


def compose(outer: Similarity2, inner: Similarity2) -> Similarity2:
    """The map ``x -> outer(inner(x))``."""
    lin = outer.linear @ inner.linear
    t = outer.linear @ inner.translation + outer.translation
    return Similarity2.from_matrix(lin, t)


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered, open vertex list. Closure is decided by the caller."""

    vertices: np.ndarray

    def __post_init__(self):
        v = _frozen(self.vertices)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError(f"vertices must have shape (n, 2), got {v.shape}")
        if len(v) < 2:
            raise ValueError("a polyline needs at least 2 vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        if np.any(np.all(v[1:] == v[:-1], axis=1)):
            raise ValueError("consecutive vertices must be distinct")
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyline) and np.array_equal(self.vertices, other.vertices)

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.hypot(*np.diff(self.vertices, axis=0).T)

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    def reversed(self) -> "Polyline":
        return Polyline(self.vertices[::-1])

    def transformed(self, m: Similarity2) -> "Polyline":
        return Polyline(apply(m, self.vertices))


@dataclass(frozen=True, eq=False)
class Rhombus:
    """Four vertices in cyclic order; opposite sides parallel and equal."""

    vertices: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        v = _frozen(self.vertices)
        if v.shape != (4, 2):
            raise ValueError("a rhombus has exactly 4 vertices")
        scale = max(1.0, float(np.abs(v).max()))
        if not np.allclose(v[1] - v[0], v[2] - v[3], atol=self.tol * scale, rtol=0) or \
                not np.allclose(v[3] - v[0], v[2] - v[1], atol=self.tol * scale, rtol=0):
            raise ValueError("opposite sides must be parallel and of equal length")
        if abs(_shoelace(v)) <= 0:
            raise ValueError("degenerate rhombus")
        object.__setattr__(self, "vertices", v)

    @property
    def area(self) -> float:
        return abs(_shoelace(self.vertices))

    @property
    def diameter(self) -> float:
        v = self.vertices
        return float(max(np.hypot(*(v[2] - v[0])), np.hypot(*(v[3] - v[1]))))

    @property
    def center(self) -> Point2:
        c = self.vertices.mean(axis=0)
        return Point2(float(c[0]), float(c[1]))

    def contains(self, pts, tol: float = DEFAULT_TOL) -> np.ndarray:
        """Boolean mask of points inside the closed rhombus (within ``tol``)."""
        return convex_contains(self.vertices, np.atleast_2d(pts), tol)


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def signed_area(poly: Union[Polyline, np.ndarray, Sequence]) -> float:
    """Shoelace signed area of the closed traversal; positive if counter-clockwise.

    A repeated closing vertex is dropped, otherwise the vertex list is treated
    cyclically.
    """
    v = poly.vertices if isinstance(poly, Polyline) else np.asarray(poly, dtype=float)
    if len(v) > 1 and np.array_equal(v[0], v[-1]):
        v = v[:-1]
    if len(np.unique(v, axis=0)) < 3:
        raise ValueError("signed area needs at least 3 distinct vertices")
    # Centre first: reduces cancellation for curves far from the origin.
    v = v - v.mean(axis=0)
    return _shoelace(v)


def convex_contains(poly: np.ndarray, pts: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Points inside a convex polygon given counter- or clockwise."""
    poly = np.asarray(poly, dtype=float)
    edges = np.roll(poly, -1, axis=0) - poly
    sign = 1.0 if _shoelace(poly) > 0 else -1.0
    rel = pts[:, None, :] - poly[None, :, :]
    cross = edges[None, :, 0] * rel[..., 1] - edges[None, :, 1] * rel[..., 0]
    dist = sign * cross / np.hypot(edges[:, 0], edges[:, 1])[None, :]
    return np.all(dist >= -tol, axis=1)


class Contact(str, Enum):
    DISJOINT = "disjoint"
    TOUCH = "touch"
    CROSS = "cross"


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    return float(np.hypot(*(a + t * ab - p)))


def segments_intersect(a1, a2, b1, b2, tol: float = DEFAULT_TOL) -> Contact:
    """Classify two closed segments as disjoint, touching or crossing.

    ``touch``: the segments meet in a single point (within ``tol``) without
    passing through each other. ``cross``: a transversal interior
    intersection, or a collinear overlap of positive length.
    """
    a1, a2, b1, b2 = (np.asarray(p, dtype=float) for p in (a1, a2, b1, b2))
    if np.array_equal(a1, a2) or np.array_equal(b1, b2):
        raise ValueError("segment endpoints must be distinct")

    def side(p, q, r):
        d = q - p
        return float(d[0] * (r[1] - p[1]) - d[1] * (r[0] - p[0])) / float(np.hypot(*d))

    d1, d2 = side(a1, a2, b1), side(a1, a2, b2)
    d3, d4 = side(b1, b2, a1), side(b1, b2, a2)
    if (d1 > tol and d2 < -tol or d1 < -tol and d2 > tol) and \
            (d3 > tol and d4 < -tol or d3 < -tol and d4 > tol):
        return Contact.CROSS

    gap = min(_point_segment_distance(a1, b1, b2), _point_segment_distance(a2, b1, b2),
              _point_segment_distance(b1, a1, a2), _point_segment_distance(b2, a1, a2))
    if gap > tol:
        return Contact.DISJOINT

    if max(abs(d1), abs(d2), abs(d3), abs(d4)) <= tol:
        # collinear: measure the overlap along a's direction
        u = (a2 - a1) / np.hypot(*(a2 - a1))
        ta = sorted([0.0, float(np.dot(a2 - a1, u))])
        tb = sorted([float(np.dot(b1 - a1, u)), float(np.dot(b2 - a1, u))])
        overlap = min(ta[1], tb[1]) - max(ta[0], tb[0])
        return Contact.CROSS if overlap > tol else Contact.TOUCH
    return Contact.TOUCH
