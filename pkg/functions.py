"""(ω,Ω)-convex, concave and affine maps into an ordered range.

A range is either *finite* (a poset with table operations Ω) or *linear*
(Q^d ordered by a rational cone, each Ω_γ given by matrices A_{γ,1..n} acting
as ``Ω_γ(y_1, ..., y_n) = A_{γ,1} y_1 + ... + A_{γ,n} y_n``).
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from algebra import OperationFamily, Verdict, check_mutually_distributive, check_reflexive
from convexity import Subset
from errors import DimensionMismatch, EmptySet, FamilyMismatch, InvalidInput, NoInfimum, NoSupremum, NotAChain, OutOfRange, UnknownIndex
from order import FinitePoset, RationalCone, cone_leq
from rational_utils import (
    Matrix,
    add,
    format_matrix,
    format_vector,
    identity,
    invert_matrix,
    is_square,
    mat,
    mat_mul,
    mat_sum,
    mat_vec,
    parse_rational,
    vec,
    zeros,
)

_LOGGER = logging.getLogger(__name__)


class OrderedRange:
    """The ordered range (Y, <=, Ω)."""

    def __init__(
        self,
        flavor: str,
        poset: Optional[FinitePoset] = None,
        ops: Optional[OperationFamily] = None,
        dim: int = 0,
        cone: Optional[RationalCone] = None,
        matrices: Optional[Mapping[str, Sequence[Matrix]]] = None,
    ):
        self.flavor = flavor
        self.poset = poset
        self.ops = ops
        self.dim = dim
        self.cone = cone
        self.matrices: Dict[str, Tuple[Matrix, ...]] = {}
        if flavor == "finite":
            if poset is None or ops is None:
                raise InvalidInput("a finite range needs a poset and an operation family")
            if ops.size != poset.size:
                raise DimensionMismatch(f"Ω acts on {ops.size} elements, the poset has {poset.size}")
        elif flavor == "linear":
            if cone is None or matrices is None:
                raise InvalidInput("a linear range needs a cone and matrices")
            if cone.dim != dim:
                raise DimensionMismatch(f"cone lives in Q^{cone.dim}, range is Q^{dim}")
            for name, mats in matrices.items():
                converted = tuple(mat(m) for m in mats)
                if not converted:
                    raise InvalidInput(f"Ω_{name} needs at least one matrix")
                for i, m in enumerate(converted):
                    if not is_square(m, dim):
                        raise DimensionMismatch(f"matrix {i + 1} of Ω_{name} is not {dim}x{dim}", {"op": name, "slot": i + 1})
                self.matrices[name] = converted
        else:
            raise InvalidInput(f"unknown range flavor '{flavor}'")

    @classmethod
    def finite(cls, poset: FinitePoset, ops: OperationFamily) -> "OrderedRange":
        return cls("finite", poset=poset, ops=ops)

    @classmethod
    def linear(cls, dim: int, cone: RationalCone, matrices: Mapping[str, Sequence[Matrix]]) -> "OrderedRange":
        return cls("linear", dim=dim, cone=cone, matrices=matrices)

    @classmethod
    def scalar(cls, coefficients: Mapping[str, Sequence], cone: Optional[RationalCone] = None) -> "OrderedRange":
        """Q with the usual order and Ω_γ(u_1, ...) = c_1 u_1 + ..."""
        matrices = {name: [[[c]] for c in coeffs] for name, coeffs in coefficients.items()}
        return cls.linear(1, cone or RationalCone.orthant(1), matrices)

    @property
    def indices(self) -> Tuple[str, ...]:
        if self.flavor == "finite":
            return self.ops.indices
        return tuple(self.matrices)

    def arity_of(self, gamma: str) -> int:
        if self.flavor == "finite":
            return self.ops.arity_of(gamma)
        if gamma not in self.matrices:
            raise UnknownIndex(f"unknown range operation '{gamma}'", {"index": gamma})
        return len(self.matrices[gamma])

    def apply(self, gamma: str, values: Sequence[Any]) -> Any:
        if self.flavor == "finite":
            return self.ops.op(gamma)(*values)
        total = zeros(self.dim)
        for a, y in zip(self.matrices[gamma], values):
            total = add(total, mat_vec(a, y))
        return total

    def leq(self, y: Any, z: Any) -> bool:
        if self.flavor == "finite":
            return self.poset.le(y, z)
        return cone_leq(self.cone, y, z)

    def validate_value(self, value: Any) -> Any:
        if self.flavor == "finite":
            if not isinstance(value, (int, np.integer)) or not 0 <= value < self.poset.size:
                raise OutOfRange(f"value {value!r} is not an element of the range poset")
            return int(value)
        v = vec(value)
        if len(v) != self.dim:
            raise DimensionMismatch(f"value has length {len(v)}, range is Q^{self.dim}")
        return v

    def format_value(self, value: Any) -> Any:
        if self.flavor == "finite":
            return int(value)
        return format_vector(value)

    def to_dict(self) -> Dict[str, Any]:
        if self.flavor == "finite":
            return {"flavor": "finite", "size": self.poset.size, "operations": self.ops.signature()}
        return {
            "flavor": "linear",
            "dim": self.dim,
            "cone": self.cone.to_dict(),
            "matrices": {name: [format_matrix(m) for m in mats] for name, mats in self.matrices.items()},
        }


@dataclass(frozen=True)
class FunctionTable:
    """Values of a map X -> Y, indexed by carrier element."""

    values: Tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    @classmethod
    def scalars(cls, values: Sequence) -> "FunctionTable":
        return cls(tuple((parse_rational(v),) for v in values))

    @classmethod
    def vectors(cls, values: Sequence[Sequence]) -> "FunctionTable":
        return cls(tuple(vec(v) for v in values))

    @classmethod
    def elements(cls, values: Sequence[int]) -> "FunctionTable":
        return cls(tuple(int(v) for v in values))

    @property
    def size(self) -> int:
        return len(self.values)

    def __call__(self, x: int) -> Any:
        return self.values[x]

    def __len__(self) -> int:
        return len(self.values)


def check_compatible(omega: OperationFamily, rng: OrderedRange) -> None:
    """Shared index set Γ with matching arities."""
    if set(omega.indices) != set(rng.indices):
        raise FamilyMismatch(
            "ω and Ω are indexed differently",
            {"omega": list(omega.indices), "Omega": list(rng.indices)},
        )
    for gamma in omega.indices:
        if omega.arity_of(gamma) != rng.arity_of(gamma):
            raise FamilyMismatch(
                f"arity of '{gamma}' differs: {omega.arity_of(gamma)} vs {rng.arity_of(gamma)}",
                {"index": gamma},
            )


def _check_table(f: FunctionTable, omega: OperationFamily, rng: OrderedRange) -> None:
    if f.size != omega.size:
        raise DimensionMismatch(f"function has {f.size} values, carrier has {omega.size} elements")
    for v in f.values:
        rng.validate_value(v)


def _tuples(members: Sequence[int], n: int) -> Iterator[Tuple[int, ...]]:
    return product(members, repeat=n)


def _compare_map(f, omega, rng, domain: Optional[Subset], relation: str) -> Verdict:
    check_compatible(omega, rng)
    _check_table(f, omega, rng)
    members = domain.indices() if domain is not None else list(range(omega.size))
    for gamma in omega.indices:
        op = omega.op(gamma)
        for args in _tuples(members, op.arity):
            lhs = f(op(*args))
            rhs = rng.apply(gamma, [f(x) for x in args])
            if relation == "convex":
                holds = rng.leq(lhs, rhs)
            elif relation == "concave":
                holds = rng.leq(rhs, lhs)
            else:
                holds = lhs == rhs
            if not holds:
                return Verdict.fail(
                    {
                        "op": gamma,
                        "args": list(args),
                        "lhs": rng.format_value(lhs),
                        "rhs": rng.format_value(rhs),
                    }
                )
    return Verdict.ok()


def is_convex_map(f: FunctionTable, omega: OperationFamily, rng: OrderedRange, domain: Optional[Subset] = None) -> Verdict:
    """f(ω_γ(x̄)) <= Ω_γ(f(x_1), ..., f(x_n)) for every γ and tuple."""
    return _compare_map(f, omega, rng, domain, "convex")


def is_concave_map(f: FunctionTable, omega: OperationFamily, rng: OrderedRange, domain: Optional[Subset] = None) -> Verdict:
    return _compare_map(f, omega, rng, domain, "concave")


def is_affine_map(f: FunctionTable, omega: OperationFamily, rng: OrderedRange, domain: Optional[Subset] = None) -> Verdict:
    return _compare_map(f, omega, rng, domain, "affine")


def pointwise_sup(fs: Sequence[FunctionTable], rng: OrderedRange) -> FunctionTable:
    if not fs:
        raise EmptySet("supremum of an empty family of functions")
    size = fs[0].size
    if any(f.size != size for f in fs):
        raise DimensionMismatch("functions have different domains")
    if rng.flavor == "finite":
        values = []
        for x in range(size):
            point_values = sorted({f(x) for f in fs})
            sup = rng.poset.supremum(point_values)
            if sup is None:
                raise NoSupremum(f"no least upper bound at {x}", {"x": x, "values": point_values})
            values.append(sup)
        return FunctionTable(values)
    if not rng.cone.is_orthant():
        raise NoSupremum("pointwise suprema need an orthant (lattice) order", {"cone": rng.cone.to_dict()})
    values = [tuple(max(c) for c in zip(*(f(x) for f in fs))) for x in range(size)]
    return FunctionTable(values)


def _pointwise_le(f: FunctionTable, g: FunctionTable, rng: OrderedRange) -> bool:
    return all(rng.leq(f(x), g(x)) for x in range(f.size))


def pointwise_inf_chain(fs: Sequence[FunctionTable], rng: OrderedRange) -> FunctionTable:
    if not fs:
        raise EmptySet("infimum of an empty chain")
    size = fs[0].size
    if any(f.size != size for f in fs):
        raise DimensionMismatch("functions have different domains")
    for i, f in enumerate(fs):
        for j in range(i + 1, len(fs)):
            g = fs[j]
            if not (_pointwise_le(f, g, rng) or _pointwise_le(g, f, rng)):
                raise NotAChain(f"functions {i} and {j} are incomparable", {"pair": [i, j]})
    if rng.flavor == "finite":
        values = []
        for x in range(size):
            point_values = sorted({f(x) for f in fs})
            inf = rng.poset.infimum(point_values)
            if inf is None:
                raise NoInfimum(f"no greatest lower bound at {x}", {"x": x, "values": point_values})
            values.append(inf)
        return FunctionTable(values)
    least = next(f for f in fs if all(_pointwise_le(f, g, rng) for g in fs))
    return FunctionTable(least.values)


# --- hypotheses on Ω -------------------------------------------------------


def _finite_sections(rng: OrderedRange, gamma: str, slot: int) -> Iterator[Tuple[List[int], np.ndarray]]:
    table = rng.ops.op(gamma).table
    n = table.ndim
    for fixed in product(range(rng.poset.size), repeat=n - 1):
        index = list(fixed[:slot]) + [slice(None)] + list(fixed[slot:])
        yield list(fixed), table[tuple(index)]


def _maps_cone_into(a: Matrix, cone: RationalCone) -> Optional[Tuple]:
    """First generator g with A g outside the cone, or None."""
    for g in cone.generators():
        image = mat_vec(a, g)
        if not cone.contains(image):
            return g, image
    return None


def _is_positive_scaling(a: Matrix, d: int) -> bool:
    c = a[0][0]
    return c > 0 and all(a[i][j] == (c if i == j else 0) for i in range(d) for j in range(d))


def linear_automorphism(a: Matrix, cone: RationalCone) -> Verdict:
    """A invertible with A(K) = K."""
    inverse = invert_matrix(a)
    if inverse is None:
        return Verdict.fail({"reason": "singular"})
    if not cone.is_finitely_generated():
        if _is_positive_scaling(a, cone.dim):
            return Verdict.ok()
        return Verdict.fail({"reason": "uncertified"}, "only positive scalings are certified on L2 Lorenz cones")
    for m, reason in ((a, "A(K) not inside K"), (inverse, "A^-1(K) not inside K")):
        escaped = _maps_cone_into(m, cone)
        if escaped is not None:
            g, image = escaped
            return Verdict.fail({"reason": reason, "generator": format_vector(g), "image": format_vector(image)})
    return Verdict.ok()


def check_order_automorphism(rng: OrderedRange, gamma: str, slot: int) -> Verdict:
    """Each section of Ω_γ in the given (1-based) slot is an order automorphism."""
    n = rng.arity_of(gamma)
    if not 1 <= slot <= n:
        raise OutOfRange(f"slot {slot} is outside 1..{n}", {"op": gamma, "slot": slot})
    if rng.flavor == "linear":
        verdict = linear_automorphism(rng.matrices[gamma][slot - 1], rng.cone)
        if verdict:
            return verdict
        return Verdict.fail({"op": gamma, "slot": slot, **verdict.witness}, verdict.note)

    leq = rng.poset.matrix
    size = rng.poset.size
    for fixed, section in _finite_sections(rng, gamma, slot - 1):
        if len(set(section.tolist())) != size:
            return Verdict.fail({"op": gamma, "slot": slot, "fixed": fixed, "reason": "not a bijection"})
        if not np.array_equal(leq, leq[np.ix_(section, section)]):
            return Verdict.fail({"op": gamma, "slot": slot, "fixed": fixed, "reason": "not an order isomorphism"})
    return Verdict.ok()


def check_range_automorphisms(rng: OrderedRange) -> Verdict:
    """check_order_automorphism over every operation and slot; first failure wins."""
    for gamma in rng.indices:
        for slot in range(1, rng.arity_of(gamma) + 1):
            verdict = check_order_automorphism(rng, gamma, slot)
            if not verdict:
                return verdict
    return Verdict.ok()


def check_nondecreasing(rng: OrderedRange, gamma: str) -> Verdict:
    """Ω_γ is nondecreasing in each of its variables."""
    n = rng.arity_of(gamma)
    if rng.flavor == "linear":
        if not rng.cone.is_finitely_generated():
            for slot, a in enumerate(rng.matrices[gamma], start=1):
                if not _is_positive_scaling(a, rng.dim) and any(any(row) for row in a):
                    return Verdict.fail({"op": gamma, "slot": slot, "reason": "uncertified"})
            return Verdict.ok()
        for slot, a in enumerate(rng.matrices[gamma], start=1):
            escaped = _maps_cone_into(a, rng.cone)
            if escaped is not None:
                g, image = escaped
                return Verdict.fail({"op": gamma, "slot": slot, "generator": format_vector(g), "image": format_vector(image)})
        return Verdict.ok()

    leq = rng.poset.matrix
    pairs = [(y, z) for y in range(rng.poset.size) for z in range(rng.poset.size) if y != z and leq[y, z]]
    for slot in range(n):
        for fixed, section in _finite_sections(rng, gamma, slot):
            for y, z in pairs:
                if not leq[section[y], section[z]]:
                    return Verdict.fail({"op": gamma, "slot": slot + 1, "fixed": fixed, "pair": [y, z]})
    return Verdict.ok()


def check_range_distributive(rng: OrderedRange, max_cells: Optional[int] = None) -> Verdict:
    """Mutual distributivity of Ω.

    For matrices this reduces to A_{γ,k} A_{β,j} = A_{β,j} A_{γ,k} and, when
    Ω_γ has another slot i, (Σ_j A_{β,j}) A_{γ,i} = A_{γ,i}.
    """
    if rng.flavor == "finite":
        return check_mutually_distributive(rng.ops, max_cells)
    for gamma in rng.indices:
        outer = rng.matrices[gamma]
        for beta in rng.indices:
            inner = rng.matrices[beta]
            inner_sum = mat_sum(inner, rng.dim)
            for k, a in enumerate(outer):
                for j, b in enumerate(inner):
                    if mat_mul(a, b) != mat_mul(b, a):
                        return Verdict.fail({"outer": gamma, "inner": beta, "slot": k + 1, "reason": f"A_{gamma},{k + 1} and A_{beta},{j + 1} do not commute"})
                for i, other in enumerate(outer):
                    if i != k and mat_mul(inner_sum, other) != other:
                        return Verdict.fail({"outer": gamma, "inner": beta, "slot": k + 1, "reason": f"(sum A_{beta}) A_{gamma},{i + 1} != A_{gamma},{i + 1}"})
    return Verdict.ok()


def check_range_reflexive(rng: OrderedRange) -> Verdict:
    if rng.flavor == "finite":
        return check_reflexive(rng.ops)
    eye = identity(rng.dim)
    for gamma, mats in rng.matrices.items():
        if mat_sum(mats, rng.dim) != eye:
            return Verdict.fail({"op": gamma, "reason": "matrices do not sum to the identity"})
    return Verdict.ok()
