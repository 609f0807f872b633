"""Finite posets, semigroup orders and exact rational cone orders.

Duals use the ``phi(y) >= 0`` convention throughout: the dual of a cone K is
``{phi : <phi, y> >= 0 for all y in K}``. For a Lorenz cone
``K_eps = {(x, t) : eps*||x|| <= t}`` this gives
``K_eps° = {(phi, c) : ||phi||_* <= eps*c}``.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from algebra import Operation, Verdict, check_associative, check_commutative, find_identity
from convexity import Subset
from errors import (
    ArityMismatch,
    DimensionMismatch,
    EmptySet,
    InternalError,
    InvalidInput,
    InvalidStructure,
    NotAChain,
    NotAPartialOrder,
    NotClosed,
    NotPointed,
    NotSalient,
    NotSharp,
    UnsupportedNorm,
)
from ratlp import LinearProgram, LPStatus, ProgramBuilder, Relation, Row, lp_feasible, lp_optimize
from rational_utils import Vector, dot, format_rational, format_vector, sub, vec, zeros

_LOGGER = logging.getLogger(__name__)

_ZERO = Fraction(0)
_ONE = Fraction(1)


# --- finite posets -----------------------------------------------------------


class FinitePoset:
    """A partial order on ``{0, ..., size-1}`` given by its ``leq`` matrix."""

    def __init__(self, leq, labels: Optional[Sequence[str]] = None):
        matrix = np.asarray(leq, dtype=bool)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
            raise NotAPartialOrder(f"leq must be a nonempty square matrix, got shape {matrix.shape}")
        size = matrix.shape[0]
        if labels is not None and len(labels) != size:
            raise InvalidInput(f"{len(labels)} labels for a poset of size {size}")

        diag = np.flatnonzero(~np.diag(matrix))
        if diag.size:
            raise NotAPartialOrder("leq is not reflexive", {"element": int(diag[0])})
        both = matrix & matrix.T & ~np.eye(size, dtype=bool)
        if both.any():
            x, y = (int(v) for v in np.argwhere(both)[0])
            raise NotAPartialOrder("leq is not antisymmetric", {"pair": [x, y]})
        composed = (matrix.astype(np.int64) @ matrix.astype(np.int64)) > 0
        missing = composed & ~matrix
        if missing.any():
            x, z = (int(v) for v in np.argwhere(missing)[0])
            raise NotAPartialOrder("leq is not transitive", {"pair": [x, z]})

        matrix = matrix.copy()
        matrix.setflags(write=False)
        self.size = size
        self.matrix: NDArray[np.bool_] = matrix
        self.labels = tuple(labels) if labels is not None else None

    @classmethod
    def chain(cls, n: int) -> "FinitePoset":
        x, y = np.indices((n, n))
        return cls(x <= y)

    @classmethod
    def antichain(cls, n: int) -> "FinitePoset":
        return cls(np.eye(n, dtype=bool))

    @classmethod
    def from_relation(cls, size: int, pairs: Iterable[Tuple[int, int]], labels: Optional[Sequence[str]] = None) -> "FinitePoset":
        """Reflexive-transitive closure of the given pairs."""
        matrix = np.eye(size, dtype=bool)
        for x, y in pairs:
            if not (0 <= x < size and 0 <= y < size):
                raise InvalidInput(f"pair ({x}, {y}) is outside a poset of size {size}")
            matrix[x, y] = True
        for k in range(size):
            matrix |= np.outer(matrix[:, k], matrix[k, :])
        return cls(matrix, labels)

    @classmethod
    def divisibility(cls, values: Sequence[int]) -> "FinitePoset":
        matrix = [[b % a == 0 for b in values] for a in values]
        return cls(matrix, [str(v) for v in values])

    def le(self, x: int, y: int) -> bool:
        return bool(self.matrix[x, y])

    def comparable(self, x: int, y: int) -> bool:
        return bool(self.matrix[x, y] or self.matrix[y, x])

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels else str(x)

    def upper_bounds(self, elems: Sequence[int]) -> List[int]:
        return [u for u in range(self.size) if all(self.matrix[e, u] for e in elems)]

    def lower_bounds(self, elems: Sequence[int]) -> List[int]:
        return [v for v in range(self.size) if all(self.matrix[v, e] for e in elems)]

    def supremum(self, elems: Sequence[int]) -> Optional[int]:
        bounds = self.upper_bounds(elems)
        return next((u for u in bounds if all(self.matrix[u, w] for w in bounds)), None)

    def infimum(self, elems: Sequence[int]) -> Optional[int]:
        bounds = self.lower_bounds(elems)
        return next((v for v in bounds if all(self.matrix[w, v] for w in bounds)), None)

    def relabel(self, permutation: Sequence[int]) -> "FinitePoset":
        """The isomorphic poset in which element x is renamed permutation[x]."""
        perm = np.asarray(permutation, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.size)):
            raise InvalidInput("relabelling must be a permutation")
        inverse = np.argsort(perm)
        return FinitePoset(self.matrix[np.ix_(inverse, inverse)])

    def __eq__(self, other) -> bool:
        return isinstance(other, FinitePoset) and bool(np.array_equal(self.matrix, other.matrix))

    def __repr__(self) -> str:
        return f"FinitePoset(size={self.size})"


def infimum_of_chain(poset: FinitePoset, chain: Subset) -> int:
    elems = chain.indices()
    if chain.size != poset.size:
        raise DimensionMismatch(f"chain is over {chain.size} elements, poset has {poset.size}")
    if not elems:
        raise EmptySet("infimum of an empty chain")
    for i, x in enumerate(elems):
        for y in elems[i + 1 :]:
            if not poset.comparable(x, y):
                raise NotAChain(f"{poset.label(x)} and {poset.label(y)} are incomparable", {"pair": [x, y]})
    return next(x for x in elems if all(poset.le(x, y) for y in elems))


def is_lower_chain_complete(poset: FinitePoset) -> Verdict:
    return Verdict.ok("finite poset: every nonempty chain has a least element, which is its infimum")


# --- semigroup orders --------------------------------------------------------


@dataclass(frozen=True)
class SemigroupOrderSpec:
    addition: Operation
    zero: int
    S: Subset


def semigroup_order(spec: SemigroupOrderSpec) -> FinitePoset:
    """x <= y iff y - x lies in S, on a finite abelian group."""
    add = spec.addition
    if add.arity != 2:
        raise ArityMismatch(f"addition must be binary, got arity {add.arity}")
    if spec.S.size != add.size:
        raise DimensionMismatch("S and the addition table live on different carriers")
    verdict = check_associative(add)
    if not verdict:
        raise InvalidStructure("addition is not associative", verdict.witness)
    verdict = check_commutative(add)
    if not verdict:
        raise InvalidStructure("addition is not commutative", verdict.witness)
    if find_identity(add) != spec.zero:
        raise InvalidStructure(f"{spec.zero} is not the identity of the addition", {"zero": spec.zero})

    table = add.table
    negation = []
    for x in range(add.size):
        inverses = np.flatnonzero(table[x, :] == spec.zero)
        if inverses.size == 0:
            raise InvalidStructure(f"element {x} has no additive inverse", {"element": x})
        negation.append(int(inverses[0]))

    members = spec.S.indices()
    if spec.zero not in spec.S:
        raise NotPointed("S does not contain zero", {"zero": spec.zero})
    for y in members:
        if y != spec.zero and negation[y] in spec.S:
            raise NotSalient(f"both {y} and its negation lie in S", {"element": y, "negation": negation[y]})
    for s in members:
        for t in members:
            if int(table[s, t]) not in spec.S:
                raise NotClosed(f"{s}+{t} leaves S", {"args": [s, t], "value": int(table[s, t])})

    inside = spec.S.mask()
    leq = [[bool(inside[table[y, negation[x]]]) for y in range(add.size)] for x in range(add.size)]
    return FinitePoset(leq)


# --- norms -------------------------------------------------------------------


class Norm(str, Enum):
    L1 = "l1"
    LINF = "linf"
    L2 = "l2"

    @property
    def dual(self) -> "Norm":
        return {Norm.L1: Norm.LINF, Norm.LINF: Norm.L1, Norm.L2: Norm.L2}[self]


def norm_value(v: Sequence[Fraction], norm: Norm) -> Fraction:
    """Exact L1 / LINF norm. L2 has no rational value in general."""
    if norm is Norm.L1:
        return sum((abs(a) for a in v), _ZERO)
    if norm is Norm.LINF:
        return max((abs(a) for a in v), default=_ZERO)
    raise UnsupportedNorm("the L2 norm is only compared in squared form", {"norm": norm.value})


def norm_at_most(v: Sequence[Fraction], norm: Norm, bound: Fraction) -> bool:
    """||v|| <= bound, exact for every norm (L2 through squares)."""
    if norm is Norm.L2:
        return bound >= 0 and dot(v, v) <= bound * bound
    return norm_value(v, norm) <= bound


def _sign_vectors(d: int) -> List[Tuple[int, ...]]:
    return list(product((1, -1), repeat=d))


# --- cones -------------------------------------------------------------------


@dataclass(frozen=True)
class RationalCone:
    """A polyhedral cone given by generators, or a Lorenz cone in Q^(d+1).

    For Lorenz cones ``base_dim`` is d and the last coordinate is t.
    """

    dim: int
    generator_list: Optional[Tuple[Vector, ...]] = None
    epsilon: Optional[Fraction] = None
    norm: Optional[Norm] = None

    @classmethod
    def polyhedral(cls, generators: Iterable[Sequence]) -> "RationalCone":
        gens = tuple(vec(g) for g in generators)
        if not gens:
            raise InvalidInput("a polyhedral cone needs at least one generator")
        d = len(gens[0])
        if d < 1:
            raise DimensionMismatch("generators must have positive length")
        for i, g in enumerate(gens):
            if len(g) != d:
                raise DimensionMismatch(f"generator {i} has length {len(g)}, expected {d}", {"generator": i})
            if not any(g):
                raise InvalidInput(f"generator {i} is zero", {"generator": i})
        return cls(d, gens)

    @classmethod
    def orthant(cls, d: int) -> "RationalCone":
        return cls.polyhedral([[int(i == j) for j in range(d)] for i in range(d)])

    @classmethod
    def lorenz(cls, epsilon, base_dim: int, norm) -> "RationalCone":
        eps = Fraction(epsilon)
        if eps <= 0:
            raise InvalidInput(f"epsilon must be positive, got {eps}")
        if base_dim < 1:
            raise DimensionMismatch("Lorenz base dimension must be at least 1")
        return cls(base_dim + 1, None, eps, Norm(norm))

    @property
    def kind(self) -> str:
        return "polyhedral" if self.generator_list is not None else "lorenz"

    @property
    def base_dim(self) -> int:
        return self.dim - 1

    def is_orthant(self) -> bool:
        if self.kind != "polyhedral":
            return False
        units = {tuple(Fraction(int(i == j)) for j in range(self.dim)) for i in range(self.dim)}
        gens = set(self.generator_list)
        return units <= gens and all(all(c >= 0 for c in g) for g in gens)

    def _effective_norm(self) -> Norm:
        # in one dimension |x| is every norm
        if self.norm is Norm.L2 and self.base_dim == 1:
            return Norm.L1
        return self.norm

    def is_finitely_generated(self) -> bool:
        return self.kind == "polyhedral" or self._effective_norm() is not Norm.L2

    def generators(self) -> Tuple[Vector, ...]:
        if self.kind == "polyhedral":
            return self.generator_list
        norm = self._effective_norm()
        d, eps = self.base_dim, self.epsilon
        if norm is Norm.L1:
            gens = []
            for i in range(d):
                for sign in (1, -1):
                    gens.append(tuple(Fraction(sign if j == i else 0) for j in range(d)) + (eps,))
            return tuple(gens)
        if norm is Norm.LINF:
            return tuple(tuple(Fraction(s) for s in signs) + (eps,) for signs in _sign_vectors(d))
        raise UnsupportedNorm("an L2 Lorenz cone has no finite generating set", {"norm": "l2", "dim": d})

    def halfspaces(self) -> Tuple[Vector, ...]:
        """Normals h with K = {y : <h, y> >= 0}; Lorenz cones only."""
        if self.kind == "polyhedral":
            if self.is_orthant():
                return tuple(tuple(Fraction(int(i == j)) for j in range(self.dim)) for i in range(self.dim))
            raise InvalidInput("halfspace form is only available for orthants and Lorenz cones")
        norm = self._effective_norm()
        d, eps = self.base_dim, self.epsilon
        if norm is Norm.L1:
            return tuple(tuple(-eps * s for s in signs) + (_ONE,) for signs in _sign_vectors(d))
        if norm is Norm.LINF:
            rows = []
            for i in range(d):
                for sign in (1, -1):
                    rows.append(tuple(-eps * sign if j == i else _ZERO for j in range(d)) + (_ONE,))
            return tuple(rows)
        raise UnsupportedNorm("an L2 Lorenz cone is not polyhedral", {"norm": "l2", "dim": d})

    def has_halfspaces(self) -> bool:
        return self.kind == "lorenz" and self.is_finitely_generated() or self.is_orthant()

    def contains(self, v: Sequence[Fraction]) -> bool:
        point = vec(v)
        if len(point) != self.dim:
            raise DimensionMismatch(f"point has length {len(point)}, cone lives in Q^{self.dim}")
        if self.kind == "lorenz":
            return lorenz_member(self, (point[:-1], point[-1]))
        if self.is_orthant():
            return all(c >= 0 for c in point)
        return _polyhedral_contains(self.generator_list, point)

    def to_dict(self) -> Dict:
        if self.kind == "polyhedral":
            return {"kind": "polyhedral", "generators": [format_vector(g) for g in self.generator_list]}
        return {
            "kind": "lorenz",
            "epsilon": format_rational(self.epsilon),
            "dim": self.base_dim,
            "norm": self.norm.value,
        }


@lru_cache(maxsize=4096)
def _polyhedral_contains(generators: Tuple[Vector, ...], point: Vector) -> bool:
    d, k = len(point), len(generators)
    rows = [Row(tuple(g[c] for g in generators), Relation.EQ, point[c], f"coord{c}") for c in range(d)]
    lp = LinearProgram(k, rows, bounds=((_ZERO, None),) * k)
    return lp_feasible(lp).status is LPStatus.FEASIBLE


@dataclass(frozen=True)
class DualCone:
    """K° = {phi : <phi, g> >= 0 for every generator g}."""

    primal: RationalCone
    inequalities: Tuple[Vector, ...]

    def contains(self, phi: Sequence[Fraction]) -> bool:
        point = vec(phi)
        if len(point) != self.primal.dim:
            raise DimensionMismatch(f"functional has length {len(point)}, expected {self.primal.dim}")
        if self.primal.kind == "lorenz":
            return lorenz_dual_member(self.primal, (point[:-1], point[-1]))
        return all(dot(h, point) >= 0 for h in self.inequalities)

    def to_dict(self) -> Dict:
        payload = {"inequalities": [format_vector(h) for h in self.inequalities], "convention": "<phi,g> >= 0"}
        if self.primal.kind == "lorenz":
            eps = format_rational(self.primal.epsilon)
            payload["closed_form"] = f"||phi||_{self.primal.norm.dual.value} <= {eps}*c"
        return payload


def dual_cone(cone: RationalCone) -> DualCone:
    gens = cone.generators() if cone.is_finitely_generated() else ()
    return DualCone(cone, gens)


def is_sharp(cone: RationalCone) -> Verdict:
    """Looks for phi with <phi, g> >= 1 on every generator."""
    if cone.kind == "lorenz":
        phi = zeros(cone.base_dim) + (1 / cone.epsilon,)
        return Verdict(True, {"phi": format_vector(phi)}, "Lorenz cones are sharp")
    gens = cone.generators()
    rows = [Row(g, Relation.GE, _ONE, f"generator{i}") for i, g in enumerate(gens)]
    result = lp_feasible(LinearProgram(cone.dim, rows))
    if result.status is LPStatus.FEASIBLE:
        return Verdict(True, {"phi": format_vector(result.point)})
    # sum mu_k g_k = 0 with mu >= 0, mu != 0: zero is a nontrivial conic combination
    return Verdict.fail({"certificate": result.certificate_strings()}, "generators combine conically to zero")


def sharp_functional(cone: RationalCone) -> Vector:
    verdict = is_sharp(cone)
    if not verdict:
        raise NotSharp("cone is not sharp", verdict.witness)
    return vec(verdict.witness["phi"])


def is_salient_cone(cone: RationalCone) -> Verdict:
    """Lineality space {0}; witness is a generator whose negation is also in the cone."""
    if cone.kind == "lorenz":
        return Verdict.ok("Lorenz cones are salient")
    gens = cone.generators()
    k = len(gens)
    rows = [Row(tuple(g[c] for g in gens), Relation.EQ, _ZERO, f"coord{c}") for c in range(cone.dim)]
    rows.append(Row((_ONE,) * k, Relation.EQ, _ONE, "normalisation"))
    result = lp_feasible(LinearProgram(k, rows, bounds=((_ZERO, None),) * k))
    if result.status is not LPStatus.FEASIBLE:
        return Verdict.ok()
    pos = next(i for i, lam in enumerate(result.point) if lam > 0)
    return Verdict.fail({"y": format_vector(gens[pos]), "generator": pos})


@dataclass(frozen=True)
class ControllabilityCertificate:
    """||y|| <= scale * <phi, y> on the cone."""

    phi: Vector
    scale: Fraction
    norm: Norm

    def bound_holds(self, y: Sequence[Fraction]) -> bool:
        return norm_value(y, self.norm) <= self.scale * dot(self.phi, y)

    def to_dict(self) -> Dict:
        return {"phi": format_vector(self.phi), "scale": format_rational(self.scale), "norm": self.norm.value}


def controllability_functional(cone: RationalCone, norm) -> ControllabilityCertificate:
    """Minimise ||psi||_* subject to <psi, g> >= ||g|| and split psi = scale * phi."""
    norm = Norm(norm)
    if norm is Norm.L2:
        raise UnsupportedNorm("controllability is computed for L1 and LINF only", {"norm": "l2"})
    verdict = is_sharp(cone)
    if not verdict:
        raise NotSharp("cone is not sharp", verdict.witness)
    gens = cone.generators()
    d = cone.dim

    builder = ProgramBuilder()
    psi = builder.add_block("psi", d)
    (t,) = builder.add_block("t", 1)
    for i, g in enumerate(gens):
        builder.add_row({psi[c]: g[c] for c in range(d)}, Relation.GE, norm_value(g, norm), f"generator{i}")
    if norm.dual is Norm.LINF:
        for c in range(d):
            builder.add_row({t: 1, psi[c]: -1}, Relation.GE, 0)
            builder.add_row({t: 1, psi[c]: 1}, Relation.GE, 0)
    else:
        w = builder.add_block("w", d)
        for c in range(d):
            builder.add_row({w[c]: 1, psi[c]: -1}, Relation.GE, 0)
            builder.add_row({w[c]: 1, psi[c]: 1}, Relation.GE, 0)
        builder.add_row({t: 1, **{w[c]: -1 for c in range(d)}}, Relation.EQ, 0)
    result = lp_optimize(builder.build({t: 1}, "min"))
    if result.status is not LPStatus.OPTIMAL:
        raise InternalError(f"controllability LP ended {result.status.value} on a sharp cone")

    psi_value = tuple(result.point[j] for j in psi)
    scale = result.point[t]
    if scale == 0:
        certificate = ControllabilityCertificate(zeros(d), _ONE, norm)
    else:
        certificate = ControllabilityCertificate(tuple(c / scale for c in psi_value), scale, norm)
    for g in gens:
        if not certificate.bound_holds(g):
            raise InternalError("controllability certificate fails on a generator")
    _LOGGER.debug(f"controllability: scale={scale} after {result.pivots} pivots")
    return certificate


def lorenz_member(cone: RationalCone, point: Tuple[Sequence[Fraction], Fraction]) -> bool:
    """eps*||x|| <= t."""
    if cone.kind != "lorenz":
        raise InvalidInput("lorenz_member needs a Lorenz cone")
    x, t = vec(point[0]), Fraction(point[1])
    if len(x) != cone.base_dim:
        raise DimensionMismatch(f"x has length {len(x)}, expected {cone.base_dim}")
    if cone.norm is Norm.L2:
        return t >= 0 and cone.epsilon**2 * dot(x, x) <= t * t
    return cone.epsilon * norm_value(x, cone.norm) <= t


def lorenz_dual_member(cone: RationalCone, point: Tuple[Sequence[Fraction], Fraction]) -> bool:
    """||phi||_* <= eps*c, the dual under the phi(y) >= 0 convention."""
    if cone.kind != "lorenz":
        raise InvalidInput("lorenz_dual_member needs a Lorenz cone")
    phi, c = vec(point[0]), Fraction(point[1])
    if len(phi) != cone.base_dim:
        raise DimensionMismatch(f"phi has length {len(phi)}, expected {cone.base_dim}")
    return norm_at_most(phi, cone.norm.dual, cone.epsilon * c)


def cone_leq(cone: RationalCone, y: Sequence[Fraction], z: Sequence[Fraction]) -> bool:
    """y <=_K z, i.e. z - y in K."""
    y, z = vec(y), vec(z)
    if len(y) != cone.dim or len(z) != cone.dim:
        raise DimensionMismatch(f"vectors must live in Q^{cone.dim}")
    return cone.contains(sub(z, y))


def bipolar_member(cone: RationalCone, y: Sequence[Fraction]) -> bool:
    """y in (K°)°: min <phi, y> over K° is 0 rather than unbounded."""
    point = vec(y)
    if len(point) != cone.dim:
        raise DimensionMismatch(f"point has length {len(point)}, cone lives in Q^{cone.dim}")
    gens = cone.generators()
    rows = [Row(g, Relation.GE, _ZERO, f"generator{i}") for i, g in enumerate(gens)]
    result = lp_optimize(LinearProgram(cone.dim, rows, objective=point, sense="min"))
    return result.status is LPStatus.OPTIMAL
