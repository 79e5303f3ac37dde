"""Independent reference computations used by the tests.

Nothing here calls the vectorised code paths under test: maps are built
from two-point correspondences, curves by explicit composition of
``Similarity2`` objects, and sums with mpmath or exact rationals.
"""

import math
from fractions import Fraction

import mpmath
import numpy as np

from kochforge.geometry import Similarity2, apply, compose
from kochforge.choices import omega_encode


def endpoint_table(p):
    """Images of P-, P+, Q-, Q+ for each label, written out coordinate by coordinate."""
    r = math.sqrt(4 * p - 1)
    Pm, Pp = (-0.5, 0.0), (0.5, 0.0)
    Qp, Qm = (0.0, 0.5 * r), (0.0, -0.5 * r)
    a = (p - 0.5, 0.0)
    c = (0.5 - p, 0.0)
    return {
        (0, 0): {"Pm": Pm, "Pp": a, "Qp": ((p - 1) / 2, p / 2 * r), "Qm": ((p - 1) / 2, -p / 2 * r)},
        (1, 0): {"Pm": a, "Pp": Qp, "Qp": (-p / 2, (1 - p) / 2 * r), "Qm": ((3 * p - 1) / 2, p / 2 * r)},
        (1, 1): {"Pm": a, "Pp": Qm, "Qp": ((3 * p - 1) / 2, -p / 2 * r), "Qm": (-p / 2, -(1 - p) / 2 * r)},
        (2, 0): {"Pm": Qp, "Pp": c, "Qp": (p / 2, (1 - p) / 2 * r), "Qm": ((1 - 3 * p) / 2, p / 2 * r)},
        (2, 1): {"Pm": Qm, "Pp": c, "Qp": ((1 - 3 * p) / 2, -p / 2 * r), "Qm": (p / 2, -(1 - p) / 2 * r)},
        (3, 0): {"Pm": c, "Pp": Pp, "Qp": ((1 - p) / 2, p / 2 * r), "Qm": ((1 - p) / 2, -p / 2 * r)},
    }


def map_from_endpoints(src0, src1, dst0, dst1) -> Similarity2:
    """The orientation-preserving similarity sending src0 -> dst0 and src1 -> dst1."""
    s0, s1 = complex(*src0), complex(*src1)
    d0, d1 = complex(*dst0), complex(*dst1)
    a = (d1 - d0) / (s1 - s0)
    b = d0 - a * s0
    return Similarity2(a.real, -a.imag, a.imag, a.real, b.real, b.imag)


def naive_word_map(family, s, word) -> Similarity2:
    m = Similarity2.identity()
    for lab in omega_encode(word, s):
        m = compose(m, family.phi[lab])
    return m


def naive_curve(family, s, k) -> np.ndarray:
    """Vertices of the depth-k curve from explicit per-word compositions."""
    pts = [(-0.5, 0.0)]
    for i in range(4 ** k):
        word = [(i // 4 ** (k - 1 - j)) % 4 for j in range(k)]
        m = naive_word_map(family, s, word)
        pts.append(tuple(apply(m, (0.5, 0.0))))
    return np.array(pts)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def mp_expansion(taus, p_exact: Fraction, dps: int = 50):
    """High-precision sum of taus[k] * p**(2k)."""
    with mpmath.workdps(dps):
        p = mpmath.mpf(p_exact.numerator) / p_exact.denominator
        return sum(mpmath.mpf(t) * p ** (2 * k) for k, t in enumerate(taus))


def mp_closed_forms(p_exact: Fraction, dps: int = 50):
    with mpmath.workdps(dps):
        p = mpmath.mpf(p_exact.numerator) / p_exact.denominator
        d = mpmath.mpf(3) / 4 * mpmath.sqrt(4 * p - 1) / (1 + 2 * p)
        base = mpmath.sqrt(3) / 4
        return base - d, base + d


def shoelace_loop(pts) -> float:
    """Plain Python shoelace over a cyclic vertex list."""
    s = 0.0
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s / 2
