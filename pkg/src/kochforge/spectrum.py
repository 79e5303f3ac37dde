"""Inverse area problem: realise a target area with a snowflake.

The area of a snowflake is ``x_p + c * sum_k tau_k p**(2k)`` with
``c = (1-2p) sqrt(4p-1) / 2``. Writing ``beta = p**-2`` and
``z = (y - x_p) / c`` turns the problem into a beta-expansion
``z = sum_k tau_k beta**-k`` with digit caps ``3 * 4**k``.

Digits are extracted in exact rational arithmetic (``fractions.Fraction``)
using the exact ``p`` when one was given, so the greedy loop cannot drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .area import TauSeries, closed_forms
from .choices import ChoiceSequence, SnowflakeSpec, level_size, packed_size
from .ifs import KochParams

Layout = Union[str, Tuple[str, int]]


class ExpansionInvariantError(AssertionError):
    """The greedy remainder left the interval it provably stays in."""


class InfeasibleTargetError(ValueError):
    """Target outside the admissible interval, or margins too tight."""

    def __init__(self, message: str, interval: Tuple[float, float]):
        super().__init__(message)
        self.interval = interval


def _params(p) -> KochParams:
    return p if isinstance(p, KochParams) else KochParams.parse(p)


def area_scale(p: float) -> float:
    """``c = (1-2p) sqrt(4p-1) / 2``: area per unit of ``z``."""
    return (1 - 2 * p) * math.sqrt(4 * p - 1) / 2


def tail(beta: Union[float, Fraction], K: int):
    """``sum_{j >= K} 3 * 4**j * beta**-j``; exact when ``beta`` is a Fraction."""
    r = 4 / beta if not isinstance(beta, Fraction) else Fraction(4) / beta
    return 3 * r ** K / (1 - r)


@dataclass(frozen=True)
class BetaProblem:
    params: KochParams
    target: float
    z: Fraction

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def beta_exact(self) -> Fraction:
        return 1 / self.params.rational ** 2

    @property
    def beta(self) -> float:
        return float(self.beta_exact)

    @property
    def z_max(self) -> float:
        return 3 / (1 - 4 * self.p ** 2)


def rescale(params, y: float) -> BetaProblem:
    """Map a target area to ``z`` in ``[0, 3 / (1 - 4p**2)]``."""
    params = _params(params)
    p = params.p
    x_p, y_p = closed_forms(params)
    if not (math.isfinite(y) and x_p <= y <= y_p):
        raise InfeasibleTargetError(
            f"target area {y!r} outside [x_p, y_p] = [{x_p:.6f}, {y_p:.6f}] for p = {params.label}",
            (x_p, y_p))
    z = Fraction((y - x_p) / area_scale(p))
    q = 4 * params.rational ** 2
    z_max = 3 / (1 - q)
    # Float rounding near y_p may step just past the exact maximum.
    z = min(max(z, Fraction(0)), z_max)
    return BetaProblem(params, float(y), z)


def solve_tau(problem: BetaProblem, K: int) -> TauSeries:
    """Greedy digits ``tau_k = min(3 * 4**k, floor(z_k beta**k))``.

    The remainder satisfies ``0 <= z_K <= tail(K)``, so the expansion
    undershoots ``z`` by at most ``tail(K)``.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    beta = problem.beta_exact
    rem = problem.z
    taus = []
    scale = Fraction(1)          # beta**-k
    for k in range(K):
        cap = 3 * 4 ** k
        d = min(cap, math.floor(rem / scale))
        rem -= d * scale
        scale /= beta
        if rem < 0 or rem > tail(beta, k + 1):
            raise ExpansionInvariantError(f"remainder {float(rem)!r} escaped [0, tail({k + 1})]")
        taus.append(d)
    return TauSeries(problem.p, tuple(taus))


def expansion_value(taus: Sequence[int], beta: Fraction) -> Fraction:
    """Exact ``sum_k taus[k] * beta**-k``."""
    total, scale = Fraction(0), Fraction(1)
    for t in taus:
        total += t * scale
        scale /= beta
    return total


# --- tau -> spec ----------------------------------------------------------

def _slot_order(k: int, layout: Layout) -> np.ndarray:
    """Flattened slot indices ``j * 4**k + i`` in the order zeros are placed."""
    n = level_size(k)
    if layout == "lex":
        return np.arange(3 * n)
    if layout == "balanced":
        m = np.arange(3 * n)
        return (m % 3) * n + m // 3
    if isinstance(layout, (tuple, list)) and len(layout) == 2 and layout[0] == "seeded":
        rng = np.random.default_rng(np.random.SeedSequence([int(layout[1]), k]))
        return rng.permutation(3 * n)
    raise ValueError(f"layout must be 'lex', 'balanced' or ('seeded', n), got {layout!r}")


def parse_layout(text: str) -> Layout:
    """``"lex"``, ``"balanced"`` or ``"seeded:<n>"``."""
    if text in ("lex", "balanced"):
        return text
    if text.startswith("seeded:"):
        tail_ = text.split(":", 1)[1]
        if tail_.isdigit():
            return ("seeded", int(tail_))
    raise ValueError(f"layout must be lex, balanced or seeded:<n> with n >= 0, got {text!r}")


def _prefix_zero_level(k: int, zeros: int) -> np.ndarray:
    """Packed level whose first ``zeros`` slots are 0 and the rest 1."""
    n = level_size(k)
    out = np.full(packed_size(k), 0xFF, dtype=np.uint8)
    full, part = divmod(zeros, 8)
    out[:full] = 0
    if part:
        out[full] = (0xFF << part) & 0xFF
    if n % 8:
        out[-1] &= (1 << (n % 8)) - 1
    return out


def realise_spec(taus: TauSeries, layout: Layout = "lex", params: Optional[KochParams] = None,
                 fill="one") -> SnowflakeSpec:
    """A spec whose level-``k`` zero count over ``s, t, r`` equals ``tau_k``.

    Zeros are placed along a slot order over the flattened index
    ``j * 4**k + i`` (``j`` = 0, 1, 2 for ``s``, ``t``, ``r``). With the
    default ``fill="one"`` the levels past the end are all inward, which
    matches the remainder convention of ``solve_tau``.
    """
    params = params if params is not None else KochParams(taus.p)
    seqs: List[list] = [[], [], []]
    for k, tau in enumerate(taus.taus):
        n = level_size(k)
        if layout == "lex":
            for j in range(3):
                seqs[j].append(_prefix_zero_level(k, min(max(tau - j * n, 0), n)))
            continue
        flat = np.ones(3 * n, dtype=np.uint8)
        flat[_slot_order(k, layout)[:tau]] = 0
        for j in range(3):
            seqs[j].append(np.packbits(flat[j * n:(j + 1) * n], bitorder="little"))
    return SnowflakeSpec(params, *(ChoiceSequence.from_packed(levels, copy=False) for levels in seqs),
                         fill=fill)


@dataclass(frozen=True)
class Realisation:
    """A realising spec. ``residual`` is the certified bound ``c * tail(K)``;
    ``error`` is the actual ``target - achieved``."""

    target: float
    z: float
    taus: TauSeries
    spec: SnowflakeSpec
    achieved: float
    residual: float
    error: float

    def to_dict(self) -> dict:
        return {"target": self.target, "z": self.z, "taus": list(self.taus.taus),
                "achieved": self.achieved, "residual": self.residual, "error": self.error}


def _achieved(params: KochParams, taus: Sequence[int]) -> float:
    x_p, _ = closed_forms(params)
    value = expansion_value(taus, 1 / params.rational ** 2)
    return x_p + area_scale(params.p) * float(value)


def solve_area(params, y: float, K: int, layout: Layout = "lex") -> Realisation:
    """Rescale, extract digits, lay them out as a spec."""
    params = _params(params)
    prob = rescale(params, y)
    taus = solve_tau(prob, K)
    spec = realise_spec(taus, layout, params)
    achieved = _achieved(params, taus.taus)
    residual = area_scale(params.p) * float(tail(prob.beta_exact, K))
    return Realisation(float(y), float(prob.z), taus, spec, achieved, residual, float(y) - achieved)


# --- many realisations ----------------------------------------------------

def ejk_lhs(p: float, k: int) -> float:
    q = (4 * p * p) ** k
    return q / (1 - q)


def ejk_rhs(p: float) -> float:
    q = 4 * p * p
    return q / (1 - q) - 1 / 3


def ejk_feasible_k(params, k_max: int = 10_000) -> int:
    """Smallest ``k >= 2`` with ``(4p^2)^k / (1 - (4p^2)^k) < 4p^2 / (1 - 4p^2) - 1/3``."""
    p = _params(params).p
    rhs = ejk_rhs(p)
    for k in range(2, k_max):
        if ejk_lhs(p, k) < rhs:
            return k
    raise RuntimeError("no feasible k found")  # pragma: no cover - rhs > 0 on (1/4, 1/3]


def nonmultiple_tail(p: float, k: int, m: int) -> float:
    """``sum_{j > m, k does not divide j} 3 (4p^2)^j`` in closed form."""
    q = 4 * p * p
    first_multiple = (m // k + 1) * k
    return 3 * q ** (m + 1) / (1 - q) - 3 * q ** first_multiple / (1 - q ** k)


def ejk_lemma_holds(p: float, k: int, m: int) -> bool:
    """Tail over non-multiples of ``k`` beyond ``m`` covers ``p**(2m)``."""
    return nonmultiple_tail(p, k, m) >= p ** (2 * m)


def _strict_greedy(rem: Fraction, positions: Sequence[int], beta: Fraction) -> Tuple[dict, Fraction]:
    digits = {}
    for m in positions:
        scale = beta ** -m
        cap = 3 * 4 ** m
        # largest eta with eta * scale < rem
        eta = min(cap, math.ceil(rem / scale) - 1)
        eta = max(eta, 0)
        digits[m] = eta
        rem -= eta * scale
    return digits, rem


def ejk_witnesses(params, y: float, count: int, seed: int, K: int) -> List[Realisation]:
    """``count`` distinct digit sequences realising the area ``y``.

    The leading digit is ``min(3, ceil(z) - 1)``. The digits at multiples of
    ``k = ejk_feasible_k`` are sampled uniformly within the window that keeps
    the rest strictly inside the range the remaining positions can reach;
    the other positions are filled greedily with the strict rule
    ``eta * p**(2m) + partial < z``.
    """
    params = _params(params)
    p = params.p
    if count < 1:
        raise ValueError("count must be >= 1")
    prob = rescale(params, y)
    beta = prob.beta_exact
    q = 4 * params.rational ** 2
    k = ejk_feasible_k(params)
    z = prob.z
    z_top = 3 / (1 - q)
    if not 0 < z < z_top:
        raise InfeasibleTargetError("target must lie strictly inside (x_p, y_p)", closed_forms(params))
    v0 = min(3, math.ceil(z) - 1)
    y1 = z - v0

    multiples = [m for m in range(k, K, k)]
    others = [m for m in range(1, K) if m % k]
    upper = 3 * (q / (1 - q) - q ** k / (1 - q ** k))   # non-multiple total
    caps = {m: 3 * 4 ** m for m in multiples}
    after = {}
    acc = Fraction(0)
    for m in reversed(multiples):
        after[m] = acc
        acc += caps[m] * beta ** -m
    total_multiples = acc
    if not 0 < y1 < upper + total_multiples:
        x_p, _ = closed_forms(params)
        c = area_scale(p)
        lo = x_p + c * float(v0)
        hi = x_p + c * float(v0 + upper + total_multiples)
        raise InfeasibleTargetError(
            f"no witnesses at depth {K}: rescaled remainder {float(y1):.6g} outside "
            f"(0, {float(upper + total_multiples):.6g}); feasible areas ({lo:.6f}, {hi:.6f})",
            (lo, hi))

    rng = np.random.default_rng(np.random.SeedSequence([int(seed), K, k]))
    c = area_scale(p)
    bound = float(tail(beta, K))
    seen = set()
    out: List[Realisation] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 1000 * count:
            raise InfeasibleTargetError(
                f"found only {len(out)} distinct witnesses at depth {K}; increase K",
                closed_forms(params))
        rem = y1
        deltas = {}
        for m in multiples:
            scale = beta ** -m
            # rem - delta * scale must stay in (0, upper + after[m])
            lo = max(0, math.floor((rem - upper - after[m]) / scale) + 1)
            hi = min(caps[m], math.ceil(rem / scale) - 1)
            if hi < lo:
                raise ExpansionInvariantError(f"empty sampling window at position {m}")
            deltas[m] = int(rng.integers(lo, hi + 1))
            rem -= deltas[m] * scale
        nus, rem = _strict_greedy(rem, others, beta)
        digits = [v0] + [deltas.get(m, nus.get(m, 0)) for m in range(1, K)]
        key = tuple(digits)
        if key in seen:
            continue
        if rem < 0 or rem > tail(beta, K):
            raise ExpansionInvariantError(f"witness remainder {float(rem)!r} exceeds tail({K})")
        seen.add(key)
        taus = TauSeries(p, key)
        achieved = _achieved(params, key)
        spec = realise_spec(taus, "lex", params)
        out.append(Realisation(float(y), float(z), taus, spec, achieved, c * bound,
                               float(y) - achieved))
    return out

