"""ω-convex and ω-extreme sets, their hulls, and the ω-interior.

Hulls are computed by iterating the one-step image / preimage maps to a
fixed point; on a finite carrier this stops after at most ``size`` rounds.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List

import numpy as np
from numpy.typing import NDArray

from algebra import OperationFamily, Verdict
from errors import DimensionMismatch, OutOfRange

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Subset:
    """A subset of ``{0, ..., size-1}`` stored as an int bitset."""

    size: int
    bits: int = 0

    @classmethod
    def from_indices(cls, size: int, indices: Iterable[int]) -> "Subset":
        bits = 0
        for i in indices:
            if not 0 <= i < size:
                raise OutOfRange(f"element {i} is outside a carrier of size {size}", {"element": i})
            bits |= 1 << i
        return cls(size, bits)

    @classmethod
    def full(cls, size: int) -> "Subset":
        return cls(size, (1 << size) - 1)

    @classmethod
    def empty(cls, size: int) -> "Subset":
        return cls(size, 0)

    @classmethod
    def from_mask(cls, mask: NDArray[np.bool_]) -> "Subset":
        return cls.from_indices(len(mask), (int(i) for i in np.flatnonzero(mask)))

    def indices(self) -> List[int]:
        return [i for i in range(self.size) if self.bits >> i & 1]

    def mask(self) -> NDArray[np.bool_]:
        out = np.zeros(self.size, dtype=bool)
        out[self.indices()] = True
        return out

    def __contains__(self, x: int) -> bool:
        return 0 <= x < self.size and bool(self.bits >> x & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices())

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def _same_carrier(self, other: "Subset") -> None:
        if self.size != other.size:
            raise DimensionMismatch(f"subsets over carriers of size {self.size} and {other.size}")

    def __or__(self, other: "Subset") -> "Subset":
        self._same_carrier(other)
        return Subset(self.size, self.bits | other.bits)

    def __and__(self, other: "Subset") -> "Subset":
        self._same_carrier(other)
        return Subset(self.size, self.bits & other.bits)

    def __sub__(self, other: "Subset") -> "Subset":
        self._same_carrier(other)
        return Subset(self.size, self.bits & ~other.bits)

    def __invert__(self) -> "Subset":
        return Subset(self.size, ~self.bits & ((1 << self.size) - 1))

    def __le__(self, other: "Subset") -> bool:
        self._same_carrier(other)
        return self.bits & ~other.bits == 0

    def is_full(self) -> bool:
        return self.bits == (1 << self.size) - 1

    def __repr__(self) -> str:
        return f"Subset({self.indices()})"


def all_subsets(size: int) -> Iterator[Subset]:
    for bits in range(1 << size):
        yield Subset(size, bits)


def _check_carrier(family: OperationFamily, subset: Subset) -> None:
    if subset.size != family.size:
        raise DimensionMismatch(
            f"subset is over {subset.size} elements, carrier has {family.size}",
            {"subset_size": subset.size, "carrier_size": family.size},
        )


def is_convex_set(family: OperationFamily, subset: Subset) -> Verdict:
    """Every operation maps tuples from the set back into the set."""
    _check_carrier(family, subset)
    members = np.array(subset.indices(), dtype=np.int64)
    if members.size == 0:
        return Verdict.ok()
    inside = subset.mask()
    for name, op in family.items():
        values = op.table[np.ix_(*([members] * op.arity))]
        escaped = ~inside[values]
        if escaped.any():
            pos = np.unravel_index(int(np.argmax(escaped)), escaped.shape)
            args = [int(members[p]) for p in pos]
            return Verdict.fail({"op": name, "args": args, "value": int(values[pos])})
    return Verdict.ok()


def is_extreme_set(family: OperationFamily, subset: Subset) -> Verdict:
    """Whenever an operation's value lies in the set, so do all its arguments."""
    _check_carrier(family, subset)
    inside = subset.mask()
    for name, op in family.items():
        hits = inside[op.table]
        args_inside = inside[np.indices(op.table.shape)].all(axis=0)
        leaking = hits & ~args_inside
        if leaking.any():
            pos = np.unravel_index(int(np.argmax(leaking)), leaking.shape)
            return Verdict.fail({"op": name, "args": [int(p) for p in pos], "value": int(op.table[pos])})
    return Verdict.ok()


def image(family: OperationFamily, gamma: str, subset: Subset) -> Subset:
    """ω_γ(E^n)."""
    _check_carrier(family, subset)
    op = family.op(gamma)
    members = np.array(subset.indices(), dtype=np.int64)
    out = np.zeros(family.size, dtype=bool)
    if members.size:
        out[np.unique(op.table[np.ix_(*([members] * op.arity))])] = True
    return Subset.from_mask(out)


def preimage_coordinates(family: OperationFamily, gamma: str, subset: Subset) -> Subset:
    """Every coordinate of every tuple that ω_γ maps into the set."""
    _check_carrier(family, subset)
    op = family.op(gamma)
    hits = subset.mask()[op.table]
    out = np.zeros(family.size, dtype=bool)
    for axis in range(op.arity):
        others = tuple(a for a in range(op.arity) if a != axis)
        out |= hits.any(axis=others) if others else hits
    return Subset.from_mask(out)


def hull_trace(family: OperationFamily, subset: Subset, kind: str = "convex") -> List[Subset]:
    """The sequence C_0, C_1, ... (or D_0, D_1, ...) up to its first repeat."""
    if kind not in ("convex", "extreme"):
        raise ValueError(f"unknown hull kind '{kind}'")
    step = image if kind == "convex" else preimage_coordinates
    _check_carrier(family, subset)
    trace = [subset]
    current = subset
    while True:
        nxt = current
        for name in family.indices:
            nxt = nxt | step(family, name, current)
        if nxt == current:
            break
        trace.append(nxt)
        current = nxt
    _LOGGER.debug(f"{kind} hull stabilised after {len(trace) - 1} steps")
    return trace


def convex_hull(family: OperationFamily, subset: Subset) -> Subset:
    return hull_trace(family, subset, "convex")[-1]


def extreme_hull(family: OperationFamily, subset: Subset) -> Subset:
    return hull_trace(family, subset, "extreme")[-1]


def omega_interior(family: OperationFamily) -> Subset:
    size = family.size
    internal = [p for p in range(size) if extreme_hull(family, Subset.from_indices(size, [p])).is_full()]
    return Subset.from_indices(size, internal)


def omega_boundary(family: OperationFamily) -> Subset:
    return ~omega_interior(family)
