"""Finite carriers and families of finitary operations.

Operation tables are dense numpy arrays of shape ``(size,) * arity``; the
row-major flattening is the wire layout used by instance documents.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

import const
from errors import ArityMismatch, InvalidInput, OutOfRange, ResourceLimit, UnknownIndex

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a pass/witness predicate. Truthy when the predicate holds."""

    passed: bool
    witness: Optional[Dict[str, Any]] = None
    note: str = ""

    def __bool__(self) -> bool:
        return self.passed

    @classmethod
    def ok(cls, note: str = "") -> "Verdict":
        return cls(True, None, note)

    @classmethod
    def fail(cls, witness: Dict[str, Any], note: str = "") -> "Verdict":
        return cls(False, witness, note)

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"verdict": "pass" if self.passed else "fail"}
        if self.witness is not None:
            payload["witness"] = self.witness
        if self.note:
            payload["note"] = self.note
        return payload


@dataclass(frozen=True)
class Carrier:
    size: int
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.size < 1:
            raise InvalidInput(f"carrier size must be positive, got {self.size}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != self.size:
                raise InvalidInput(f"{len(self.labels)} labels for a carrier of size {self.size}")
            if len(set(self.labels)) != self.size:
                raise InvalidInput("carrier labels must be distinct")

    def elements(self) -> range:
        return range(self.size)

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels else str(x)


def _check_cells(size: int, arity: int, max_cells: Optional[int]) -> None:
    limit = max_cells or const.MAX_TABLE_CELLS
    if size**arity > limit:
        raise ResourceLimit(
            f"table of {size}^{arity} cells exceeds the cap of {limit}",
            {"size": size, "arity": arity, "max_cells": limit},
        )


class Operation:
    """A total map X^arity -> X stored as a read-only table."""

    __slots__ = ("size", "arity", "table")

    def __init__(self, size: int, arity: int, table, max_cells: Optional[int] = None):
        if arity < 1:
            raise ArityMismatch(f"arity must be at least 1, got {arity}")
        _check_cells(size, arity, max_cells)
        arr = np.asarray(table, dtype=np.int64)
        if arr.size != size**arity:
            raise ArityMismatch(f"table has {arr.size} entries, expected {size}^{arity}={size ** arity}")
        arr = arr.reshape((size,) * arity).copy()
        if arr.size and (arr.min() < 0 or arr.max() >= size):
            bad = int(np.flatnonzero((arr < 0) | (arr >= size))[0])
            raise OutOfRange(f"table entry {bad} is outside the carrier", {"position": bad})
        arr.setflags(write=False)
        self.size = size
        self.arity = arity
        self.table: NDArray[np.int64] = arr

    @classmethod
    def from_callable(cls, size: int, arity: int, fn: Callable[..., int], max_cells: Optional[int] = None) -> "Operation":
        _check_cells(size, arity, max_cells)
        flat = [fn(*args) for args in np.ndindex(*((size,) * arity))]
        return cls(size, arity, flat, max_cells)

    def __call__(self, *args: int) -> int:
        return int(self.table[args])

    def flat(self) -> List[int]:
        return [int(v) for v in self.table.ravel()]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Operation)
            and self.size == other.size
            and self.arity == other.arity
            and bool(np.array_equal(self.table, other.table))
        )

    def __hash__(self) -> int:
        return hash((self.size, self.arity, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"Operation(size={self.size}, arity={self.arity})"


class OperationFamily:
    """Indexed operations ``{name: Operation}`` over one carrier; insertion order is the index order."""

    def __init__(self, carrier: Carrier, ops: Mapping[str, Operation]):
        self.carrier = carrier
        self._ops: Dict[str, Operation] = {}
        for name, op in ops.items():
            if op.size != carrier.size:
                raise InvalidInput(f"operation '{name}' is over {op.size} elements, carrier has {carrier.size}")
            self._ops[name] = op

    @property
    def size(self) -> int:
        return self.carrier.size

    @property
    def indices(self) -> Tuple[str, ...]:
        return tuple(self._ops)

    def arity_of(self, name: str) -> int:
        return self.op(name).arity

    def op(self, name: str) -> Operation:
        try:
            return self._ops[name]
        except KeyError:
            raise UnknownIndex(f"unknown operation '{name}'", {"index": name}) from None

    def items(self) -> Iterator[Tuple[str, Operation]]:
        return iter(self._ops.items())

    def __len__(self) -> int:
        return len(self._ops)

    def __contains__(self, name: str) -> bool:
        return name in self._ops

    def signature(self) -> Dict[str, int]:
        return {name: op.arity for name, op in self._ops.items()}

    def __repr__(self) -> str:
        return f"OperationFamily(size={self.size}, ops={self.signature()})"


def evaluate(family: OperationFamily, gamma: str, args: Sequence[int]) -> int:
    op = family.op(gamma)
    if len(args) != op.arity:
        raise ArityMismatch(
            f"'{gamma}' takes {op.arity} arguments, got {len(args)}",
            {"index": gamma, "expected": op.arity, "given": len(args)},
        )
    for a in args:
        if not 0 <= a < family.size:
            raise OutOfRange(f"argument {a} is outside the carrier", {"index": gamma, "argument": a})
    return op(*args)


def check_reflexive(family: OperationFamily) -> Verdict:
    """ω_γ(x, ..., x) = x for every γ and x; first failing (γ, x) otherwise."""
    diagonal = np.arange(family.size)
    for name, op in family.items():
        values = op.table[(diagonal,) * op.arity]
        bad = np.flatnonzero(values != diagonal)
        if bad.size:
            x = int(bad[0])
            return Verdict.fail({"op": name, "x": x, "value": int(values[x])})
    return Verdict.ok()


def _distributivity_counterexample(outer: Operation, inner: Operation, slot: int) -> Optional[Dict[str, Any]]:
    n, m, size = outer.arity, inner.arity, outer.size
    grids = np.indices((size,) * (n - 1 + m), sparse=True)
    xs = list(grids[: n - 1])
    ys = list(grids[n - 1 :])

    lhs = outer.table[tuple(xs[:slot] + [inner.table[tuple(ys)]] + xs[slot:])]
    parts = [outer.table[tuple(xs[:slot] + [y] + xs[slot:])] for y in ys]
    rhs = inner.table[tuple(parts)]
    lhs, rhs = np.broadcast_arrays(lhs, rhs)

    mismatch = lhs != rhs
    if not mismatch.any():
        return None
    pos = np.unravel_index(int(np.argmax(mismatch)), mismatch.shape)
    coords = [int(c) for c in pos]
    return {
        "slot": slot + 1,
        "x": coords[: n - 1],
        "y": coords[n - 1 :],
        "lhs": int(lhs[pos]),
        "rhs": int(rhs[pos]),
    }


def check_mutually_distributive(family: OperationFamily, max_cells: Optional[int] = None) -> Verdict:
    """Every ω_γ distributes over every ω_β in every slot.

    Counterexamples are searched in lexicographic order of
    (γ-index, β-index, slot, argument tuple), where the argument tuple lists
    the outer operation's other arguments in slot order followed by the inner
    arguments.
    """
    limit = max_cells or const.MAX_TABLE_CELLS
    names = family.indices
    for gamma in names:
        outer = family.op(gamma)
        for beta in names:
            inner = family.op(beta)
            cells = family.size ** (outer.arity + inner.arity - 1)
            if cells > limit:
                raise ResourceLimit(
                    f"distributivity check {gamma}/{beta} needs {cells} cells, cap is {limit}",
                    {"outer": gamma, "inner": beta, "cells": cells, "max_cells": limit},
                )
            for slot in range(outer.arity):
                found = _distributivity_counterexample(outer, inner, slot)
                if found is not None:
                    _LOGGER.debug(f"distributivity fails for {gamma} over {beta} at slot {slot + 1}")
                    return Verdict.fail({"outer": gamma, "inner": beta, **found})
    return Verdict.ok()


def check_associative(op: Operation) -> Verdict:
    t = op.table
    x, y, z = np.indices((op.size,) * 3, sparse=True)
    bad = t[t[x, y], z] != t[x, t[y, z]]
    if bad.any():
        a, b, c = (int(v) for v in np.unravel_index(int(np.argmax(bad)), bad.shape))
        return Verdict.fail({"args": [a, b, c]})
    return Verdict.ok()


def check_commutative(op: Operation) -> Verdict:
    bad = op.table != op.table.T
    if bad.any():
        a, b = (int(v) for v in np.unravel_index(int(np.argmax(bad)), bad.shape))
        return Verdict.fail({"args": [a, b]})
    return Verdict.ok()


def find_identity(op: Operation) -> Optional[int]:
    elems = np.arange(op.size)
    for e in range(op.size):
        if (op.table[e, :] == elems).all() and (op.table[:, e] == elems).all():
            return e
    return None


def build_modular_linear_family(
    m: int,
    coefficient_lists: Sequence[Sequence[int]],
    names: Optional[Sequence[str]] = None,
    max_cells: Optional[int] = None,
) -> OperationFamily:
    """(x1, ..., xk) -> (c1*x1 + ... + ck*xk) mod m, one operation per coefficient tuple."""
    if m < 2:
        raise InvalidInput(f"modulus must be at least 2, got {m}")
    if names is None:
        names = [f"omega{i + 1}" for i in range(len(coefficient_lists))]
    if len(names) != len(coefficient_lists):
        raise InvalidInput("one name per coefficient tuple is required")
    ops: Dict[str, Operation] = {}
    for name, coeffs in zip(names, coefficient_lists):
        if not coeffs:
            raise ArityMismatch(f"coefficient tuple for '{name}' is empty")
        k = len(coeffs)
        _check_cells(m, k, max_cells)
        grids = np.indices((m,) * k)
        table = np.zeros((m,) * k, dtype=np.int64)
        for c, g in zip(coeffs, grids):
            # reduce before multiplying so the int64 table never wraps
            table = np.mod(table + (int(c) % m) * g, m)
        ops[name] = Operation(m, k, table, max_cells)
    return OperationFamily(Carrier(m), ops)


def min_family(size: int, name: str = "min2") -> OperationFamily:
    """Binary minimum on the chain 0 < 1 < ... < size-1."""
    x, y = np.indices((size, size))
    return OperationFamily(Carrier(size), {name: Operation(size, 2, np.minimum(x, y))})


def family_from_callables(size: int, spec: Mapping[str, Tuple[int, Callable[..., int]]]) -> OperationFamily:
    ops = {name: Operation.from_callable(size, arity, fn) for name, (arity, fn) in spec.items()}
    return OperationFamily(Carrier(size), ops)
