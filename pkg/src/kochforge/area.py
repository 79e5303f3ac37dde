"""Enclosed-area analytics for generalised snowflakes.

Enclosed area means the signed shoelace area of the counter-clockwise
traversal. Each outward bump at level ``k`` adds, and each inward bump
removes, one triangle of area ``q_k = p**(2k) (1-2p) sqrt(4p-1) / 4``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from .analysis import JORDAN, jordan_classify
from .choices import SnowflakeSpec
from .curves import snowflake_polyline
from .geometry import signed_area
from .ifs import KochParams, build_family

A0 = math.sqrt(3) / 4


@dataclass(frozen=True)
class TauSeries:
    """Outward-bump counts per level; ``taus[k]`` lies in ``[0, 3 * 4**k]``."""

    p: float
    taus: Tuple[int, ...]

    def __post_init__(self):
        taus = tuple(int(t) for t in self.taus)
        for k, t in enumerate(taus):
            if not 0 <= t <= 3 * 4 ** k:
                raise ValueError(f"tau_{k} = {t} outside [0, {3 * 4 ** k}]")
        object.__setattr__(self, "taus", taus)

    def __len__(self) -> int:
        return len(self.taus)

    def __getitem__(self, k: int) -> int:
        return self.taus[k]


def _params(p) -> KochParams:
    return p if isinstance(p, KochParams) else KochParams.parse(p)


def triangle_area(p: float, k: int) -> float:
    """Area of one level-``k`` bump triangle."""
    return p ** (2 * k) * (1 - 2 * p) * math.sqrt(4 * p - 1) / 4


def closed_forms(params) -> Tuple[float, float]:
    """``(x_p, y_p)``: the anti-snowflake and snowflake areas."""
    p = _params(params).p
    d = 0.75 * math.sqrt(4 * p - 1) / (1 + 2 * p)
    return A0 - d, A0 + d


def residual_bound(p: float, K: int) -> float:
    """``sum_{k >= K} 3 * 4**k * q_k`` in closed form."""
    q = 4 * p * p
    return 3 * q ** K / (1 - q) * (1 - 2 * p) * math.sqrt(4 * p - 1) / 4


def tau_of_spec(spec: SnowflakeSpec) -> TauSeries:
    """Zero bits per level, summed over the three side sequences."""
    counts = [sum(c) for c in zip(*(q.zero_counts() for q in spec.sequences))]
    return TauSeries(spec.p, tuple(counts))


@dataclass(frozen=True)
class AreaReport:
    p: float
    taus: Tuple[int, ...]
    a: Tuple[float, ...]
    a_lower: Tuple[float, ...]
    a_upper: Tuple[float, ...]
    x_p: float
    y_p: float
    limit_estimate: float
    residual_bound: float
    fill: Optional[str]
    injectivity: Optional[str] = None

    @property
    def depth(self) -> int:
        return len(self.a) - 1

    def rows(self) -> List[Tuple[int, Optional[int], float, float, float]]:
        """``(k, tau_k, a_k, a_k_minus, a_k_plus)``; ``tau_K`` is empty."""
        out = []
        for k in range(len(self.a)):
            tau = self.taus[k] if k < len(self.taus) else None
            out.append((k, tau, self.a[k], self.a_lower[k], self.a_upper[k]))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "tau_k", "a_k", "a_k_minus", "a_k_plus"])
        for k, tau, a, lo, hi in self.rows():
            w.writerow([k, "" if tau is None else tau, repr(a), repr(lo), repr(hi)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "p": self.p, "taus": list(self.taus), "a": list(self.a),
            "a_lower": list(self.a_lower), "a_upper": list(self.a_upper),
            "x_p": self.x_p, "y_p": self.y_p, "limit_estimate": self.limit_estimate,
            "residual_bound": self.residual_bound, "fill": self.fill,
            "injectivity": self.injectivity,
        }


def area_series(taus: TauSeries, K: Optional[int] = None, fill: Optional[str] = "one") -> AreaReport:
    """Partial areas ``a_0..a_K``, envelopes and a limit estimate.

    ``fill`` is the assumption about levels ``>= K`` used for
    ``limit_estimate``: ``"one"`` (all inward, gives ``a_K - R_K``),
    ``"zero"`` (all outward, ``a_K + R_K``) or ``None`` for the midpoint
    ``a_K``. Whatever the tail, the limit lies in ``[a_K - R_K, a_K + R_K]``.
    """
    K = len(taus) if K is None else K
    if not 0 <= K <= len(taus):
        raise ValueError(f"K = {K} must lie in [0, {len(taus)}]")
    p = taus.p
    half_v = 0.25 * math.sqrt(4 * p - 1)   # area(V) / 2
    a = [A0]
    for k in range(K):
        a.append(a[k] + (2 * taus[k] - 3 * 4 ** k) * triangle_area(p, k))
    spread = [3 * (4 * p * p) ** k * half_v for k in range(K + 1)]
    lower = tuple(x - s for x, s in zip(a, spread))
    upper = tuple(x + s for x, s in zip(a, spread))
    x_p, y_p = closed_forms(p)
    R = residual_bound(p, K)
    if fill == "one":
        # Sum the realised digits from x_p directly: avoids a_K - R_K cancellation.
        c = (1 - 2 * p) * math.sqrt(4 * p - 1) / 2
        est = x_p + c * math.fsum(t * p ** (2 * k) for k, t in enumerate(taus.taus[:K]))
    elif fill == "zero":
        est = a[K] + R
    elif fill is None:
        est = a[K]
    else:
        raise ValueError(f"fill must be 'one', 'zero' or None, got {fill!r}")
    est = min(max(est, x_p), y_p)
    return AreaReport(p, taus.taus[:K], tuple(a), lower, upper, x_p, y_p, est, R, fill)


def spec_area_report(spec: SnowflakeSpec, K: Optional[int] = None,
                     check_depth: int = 5) -> AreaReport:
    """Area series of a spec, with the limit estimate following its fill rule.

    The signed area only equals the enclosed area when the snowflake is a
    Jordan curve. Below p = 1/3 that always holds; at p = 1/3 the spec is
    classified at ``min(depth, check_depth)`` and the verdict is stored in
    ``injectivity`` so self-touching cases are flagged.
    """
    fill = spec.fill if spec.fill in ("zero", "one") else None
    rep = area_series(tau_of_spec(spec), K, fill=fill)
    if spec.params.is_boundary:
        verdict = jordan_classify(spec, min(spec.depth, check_depth)).verdict
    else:
        verdict = JORDAN
    return replace(rep, injectivity=verdict)


def shoelace_check(spec: SnowflakeSpec, k: int) -> Tuple[float, float, float]:
    """``(recursion_area, shoelace_area, |difference|)`` at depth ``k``."""
    family = build_family(spec.params)
    rec = area_series(tau_of_spec(spec), k).a[k]
    shoe = signed_area(snowflake_polyline(family, spec, k).polyline)
    return rec, shoe, abs(rec - shoe)
