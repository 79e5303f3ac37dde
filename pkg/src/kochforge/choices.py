"""Truncated choice sequences and snowflake specs.

A choice sequence stores, for each level ``k < depth``, a bit array of
length ``4**k``; bit ``i`` of level ``k`` is ``s_k(i)``. Bit 0 puts the
triangle bump on the outward side, bit 1 on the inward side.

Random bits come from numpy's PCG64 (``np.random.default_rng``) seeded with
``SeedSequence([seed, stream, level])``. A level is therefore a function of
``(seed, stream, level)`` only, so a deeper random sequence always extends a
shallower one with the same seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

from .ifs import KochParams, MapLabel

Fill = Union[str, dict]


def level_size(k: int) -> int:
    return 4 ** k


def _random_level(seed: int, stream: int, k: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), int(k)]))
    return rng.integers(0, 2, size=level_size(k), dtype=np.uint8)


def normalise_fill(fill: Fill) -> Fill:
    """Validate a tail rule: ``"zero"``, ``"one"`` or ``{"seed": n}``."""
    if fill in ("zero", "one"):
        return fill
    if isinstance(fill, dict) and set(fill) == {"seed"} and isinstance(fill["seed"], int) \
            and not isinstance(fill["seed"], bool) and fill["seed"] >= 0:
        return {"seed": fill["seed"]}
    raise ValueError(f"fill must be 'zero', 'one' or {{'seed': n}}, got {fill!r}")


def packed_size(k: int) -> int:
    return -(-level_size(k) // 8)


def _pack(bits: np.ndarray) -> np.ndarray:
    return np.packbits(bits, bitorder="little")


def _unpack(packed: np.ndarray, k: int) -> np.ndarray:
    return np.unpackbits(packed, count=level_size(k), bitorder="little")


def _padding_mask(k: int) -> int:
    """Bits of the last byte that lie past the end of level ``k``."""
    used = level_size(k) % 8
    return 0 if used == 0 else (0xFF << used) & 0xFF


def _popcount(packed: np.ndarray) -> int:
    if packed.size % 8 == 0:
        packed = packed.view(np.uint64)
    return int(np.bitwise_count(packed).sum())


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class ChoiceSequence:
    """Depth-``K`` prefix of an element of the choice-sequence space.

    Each level is stored packed, eight slots per byte, little-endian within
    the byte (slot ``i`` is bit ``i % 8`` of byte ``i // 8``).
    """

    __slots__ = ("_packed", "_levels")

    def __init__(self, levels: Sequence):
        packed = []
        for k, lev in enumerate(levels):
            arr = np.asarray(lev).reshape(-1)
            if arr.size != level_size(k):
                raise ValueError(f"level {k} must have {level_size(k)} bits, got {arr.size}")
            if np.any((arr != 0) & (arr != 1)):
                raise ValueError(f"level {k} contains values other than 0/1")
            packed.append(_freeze(_pack(arr.astype(np.uint8))))
        self._packed = tuple(packed)
        self._levels = None

    @classmethod
    def from_packed(cls, packed: Sequence[np.ndarray], copy: bool = True) -> "ChoiceSequence":
        """Build from packed levels. ``copy=False`` takes ownership of the arrays."""
        out = cls.__new__(cls)
        frozen = []
        for k, lev in enumerate(packed):
            arr = np.array(lev, dtype=np.uint8, copy=copy or None).reshape(-1)
            if arr.size != packed_size(k):
                raise ValueError(f"level {k} must have {packed_size(k)} bytes, got {arr.size}")
            if arr[-1] & _padding_mask(k):
                raise ValueError(f"level {k} has set padding bits")
            frozen.append(_freeze(arr))
        out._packed = tuple(frozen)
        out._levels = None
        return out

    @property
    def packed(self) -> Tuple[np.ndarray, ...]:
        return self._packed

    @property
    def levels(self) -> Tuple[np.ndarray, ...]:
        """Unpacked read-only bit arrays, one per level (computed once)."""
        if self._levels is None:
            self._levels = tuple(_freeze(_unpack(b, k)) for k, b in enumerate(self._packed))
        return self._levels

    @property
    def depth(self) -> int:
        return len(self._packed)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.levels[k]

    def bit(self, k: int, i: int) -> int:
        if not 0 <= i < level_size(k):
            raise IndexError(f"slot {i} out of range for level {k}")
        return int(self._packed[k][i >> 3] >> (i & 7)) & 1

    def bits_at(self, k: int, slots: np.ndarray) -> np.ndarray:
        """Vectorised ``bit(k, i)`` for an integer array of slots."""
        slots = np.asarray(slots, dtype=np.int64)
        return (self._packed[k][slots >> 3] >> (slots & 7).astype(np.uint8)) & 1

    def __eq__(self, other) -> bool:
        return (isinstance(other, ChoiceSequence) and self.depth == other.depth
                and all(np.array_equal(a, b) for a, b in zip(self._packed, other._packed)))

    def __hash__(self):
        return hash(tuple(lev.tobytes() for lev in self._packed))

    def __repr__(self) -> str:
        return f"ChoiceSequence(depth={self.depth}, zeros={self.zero_counts()})"

    @classmethod
    def uniform(cls, depth: int, bit: int) -> "ChoiceSequence":
        if depth < 0 or bit not in (0, 1):
            raise ValueError("depth must be >= 0 and bit 0 or 1")
        levels = []
        for k in range(depth):
            arr = np.full(packed_size(k), 0xFF if bit else 0, dtype=np.uint8)
            arr[-1] &= ~np.uint8(_padding_mask(k))
            levels.append(arr)
        return cls.from_packed(levels)

    @classmethod
    def random(cls, depth: int, seed: int, stream: int = 0) -> "ChoiceSequence":
        if depth < 0:
            raise ValueError("depth must be >= 0")
        return cls([_random_level(seed, stream, k) for k in range(depth)])

    def extended(self, depth: int, fill: Fill, stream: int = 0) -> "ChoiceSequence":
        """Extend (or truncate) to ``depth`` levels using the tail rule ``fill``."""
        fill = normalise_fill(fill)
        levels = list(self._packed[:depth])
        for k in range(self.depth, depth):
            if fill == "zero":
                levels.append(ChoiceSequence.uniform(k + 1, 0)._packed[k])
            elif fill == "one":
                levels.append(ChoiceSequence.uniform(k + 1, 1)._packed[k])
            else:
                levels.append(_pack(_random_level(fill["seed"], stream, k)))
        return ChoiceSequence.from_packed(levels)

    def zero_counts(self) -> List[int]:
        return [level_size(k) - _popcount(b) for k, b in enumerate(self._packed)]


def omega_encode(u: Sequence[int], s: ChoiceSequence) -> List[MapLabel]:
    """Map labels ``(u_k, s_{k-1}(index of u_1..u_{k-1}))`` for a digit word ``u``."""
    if len(u) > s.depth:
        raise ValueError(f"word of length {len(u)} needs {len(u)} levels, sequence has {s.depth}")
    out = []
    idx = 0
    for k, d in enumerate(u):
        if d not in (0, 1, 2, 3):
            raise ValueError(f"digit {d!r} is not in 0..3")
        out.append((int(d), s.bit(k, idx)))
        idx = 4 * idx + int(d)
    return out


@dataclass(frozen=True, eq=False)
class SnowflakeSpec:
    """Parameter, depth and the three side sequences ``s``, ``t``, ``r``.

    ``s`` runs along the top edge, ``t`` is placed by ``f1`` and ``r`` by
    ``f2``. ``fill`` is the tail rule for levels beyond ``depth``.
    """

    params: KochParams
    s: ChoiceSequence
    t: ChoiceSequence
    r: ChoiceSequence
    fill: Fill = field(default="zero")

    def __post_init__(self):
        if not (self.s.depth == self.t.depth == self.r.depth):
            raise ValueError("the three sequences must have equal depth")
        object.__setattr__(self, "fill", normalise_fill(self.fill))

    @property
    def depth(self) -> int:
        return self.s.depth

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def sequences(self) -> Tuple[ChoiceSequence, ChoiceSequence, ChoiceSequence]:
        return (self.s, self.t, self.r)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SnowflakeSpec) and self.params.p == other.params.p
                and self.fill == other.fill and self.sequences == other.sequences)

    @classmethod
    def uniform(cls, params: KochParams, depth: int, bit: int) -> "SnowflakeSpec":
        seq = ChoiceSequence.uniform(depth, bit)
        return cls(params, seq, seq, seq, fill="zero" if bit == 0 else "one")

    @classmethod
    def random(cls, params: KochParams, depth: int, seed: int) -> "SnowflakeSpec":
        seqs = [ChoiceSequence.random(depth, seed, stream=j) for j in range(3)]
        return cls(params, *seqs, fill={"seed": seed})

    def extended(self, depth: int) -> "SnowflakeSpec":
        seqs = [q.extended(depth, self.fill, stream=j) for j, q in enumerate(self.sequences)]
        return SnowflakeSpec(self.params, *seqs, fill=self.fill)


# --- serialisation -------------------------------------------------------

def level_to_hex(packed: np.ndarray, k: int) -> str:
    """Hex digit ``j`` holds slots ``4j..4j+3``, slot ``4j + m`` at weight ``2**m``."""
    lo = packed & 0x0F
    hi = packed >> 4
    nibbles = np.stack([lo, hi], axis=1).reshape(-1)[:-(-level_size(k) // 4)]
    return "".join("0123456789abcdef"[v] for v in nibbles)


def hex_to_level(text: str, k: int) -> np.ndarray:
    """Inverse of ``level_to_hex``; returns the packed level."""
    want = -(-level_size(k) // 4)
    if not isinstance(text, str) or len(text) != want:
        raise ValueError(f"level {k} needs {want} hex digits, got {text!r}")
    if any(c not in "0123456789abcdef" for c in text):
        raise ValueError(f"malformed hex in level {k} (lowercase, no prefix): {text!r}")
    nibbles = np.array([int(c, 16) for c in text], dtype=np.uint8)
    if nibbles.size % 2:
        nibbles = np.append(nibbles, np.uint8(0))
    packed = nibbles[0::2] | (nibbles[1::2] << 4)
    if packed[-1] & _padding_mask(k):
        raise ValueError(f"level {k} has set padding bits: {text!r}")
    return packed


def spec_to_dict(spec: SnowflakeSpec) -> dict:
    p = spec.params
    return {
        "p": p.label if p.exact is not None else p.p,
        "depth": spec.depth,
        "fill": spec.fill,
        "s": [level_to_hex(b, k) for k, b in enumerate(spec.s.packed)],
        "t": [level_to_hex(b, k) for k, b in enumerate(spec.t.packed)],
        "r": [level_to_hex(b, k) for k, b in enumerate(spec.r.packed)],
    }


def serialize(spec: SnowflakeSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"


def spec_from_dict(data: dict) -> SnowflakeSpec:
    if not isinstance(data, dict):
        raise ValueError("spec must be a JSON object")
    missing = {"p", "depth", "fill", "s", "t", "r"} - set(data)
    if missing:
        raise ValueError(f"spec missing keys: {sorted(missing)}")
    params = KochParams.parse(data["p"])
    depth = data["depth"]
    if not isinstance(depth, int) or isinstance(depth, bool) or depth < 0:
        raise ValueError(f"depth must be a non-negative integer, got {depth!r}")
    seqs = []
    for name in ("s", "t", "r"):
        levels = data[name]
        if not isinstance(levels, list) or len(levels) != depth:
            raise ValueError(f"{name!r} must list {depth} levels")
        seqs.append(ChoiceSequence.from_packed([hex_to_level(h, k) for k, h in enumerate(levels)]))
    return SnowflakeSpec(params, *seqs, fill=data["fill"])


def parse(text: str) -> SnowflakeSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"spec is not valid JSON: {exc}") from exc
    return spec_from_dict(data)
