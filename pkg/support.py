"""Supporting (ω,Ω)-affine minorants.

``support_extend`` looks for an affine g with g <= f everywhere and g = f on
an anchor set D. Linear ranges are solved as an exact LP over the unknown
values g(x); finite ranges by exhaustive search in lexicographic order of the
value table. The remaining entry points specialise the construction
(interior points, subadditive and sublinear maps, the linear-combination
compiler, delta-convex maps) or certify relative interiority by an explicit
chain of points.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

import const
from algebra import Carrier, Operation, OperationFamily, Verdict, check_associative, check_commutative, check_mutually_distributive, check_reflexive
from convexity import Subset, extreme_hull, is_convex_set, omega_interior
from errors import (
    ArityMismatch,
    ConditionFailure,
    DimensionMismatch,
    HypothesisFailure,
    Infeasible,
    InternalError,
    InvalidInput,
    InvalidStructure,
    NotDeltaConvex,
    NotInterior,
    NotReflexive,
    NotRelativeInterior,
    NotSharp,
    NotSubadditive,
    NotSublinear,
    OutOfRange,
    ResourceLimit,
    TheoremViolation,
    UnsupportedNorm,
)
from functions import (
    FunctionTable,
    OrderedRange,
    check_compatible,
    check_range_automorphisms,
    check_range_distributive,
    check_range_reflexive,
    is_affine_map,
    is_convex_map,
    linear_automorphism,
)
from order import Norm, RationalCone, cone_leq, is_lower_chain_complete, is_sharp, norm_at_most
from ratlp import LPStatus, ProgramBuilder, Relation, active_rows, lp_feasible, lp_optimize
from rational_utils import (
    Matrix,
    Vector,
    add,
    dot,
    format_matrix,
    format_rational,
    format_vector,
    identity,
    is_square,
    mat,
    mat_mul,
    mat_sum,
    mat_vec,
    scale,
    sub,
    vec,
    zeros,
)

_LOGGER = logging.getLogger(__name__)

_ZERO = Fraction(0)
_ONE = Fraction(1)


# --- instances and certificates ---------------------------------------------


@dataclass(frozen=True)
class SupportInstance:
    omega: OperationFamily
    range: OrderedRange
    f: FunctionTable
    D: Subset

    @property
    def X(self) -> Carrier:
        return self.omega.carrier


@dataclass(frozen=True)
class CertificateReport:
    """Named checks of a certificate; passes when every check does."""

    checks: Dict[str, Verdict]

    @property
    def failures(self) -> List[str]:
        return [name for name, verdict in self.checks.items() if not verdict]

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {name: verdict.to_dict() for name, verdict in self.checks.items()}


@dataclass(frozen=True)
class SupportCertificate:
    g: FunctionTable
    checks: CertificateReport
    backend: str = "lp"
    D: Optional[Subset] = None

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "g": [v if isinstance(v, int) else format_vector(v) for v in self.g.values],
            "checks": self.checks.to_dict(),
            "backend": self.backend,
        }
        if self.D is not None:
            payload["D"] = self.D.indices()
        return payload


# --- hypotheses --------------------------------------------------------------


def validate_instance(inst: SupportInstance, max_cells: Optional[int] = None) -> Dict[str, Verdict]:
    """Every hypothesis of the support construction, in reporting order."""
    omega, rng = inst.omega, inst.range
    check_compatible(omega, rng)
    if inst.f.size != omega.size:
        raise DimensionMismatch(f"f has {inst.f.size} values, carrier has {omega.size} elements")
    if inst.D.size != omega.size:
        raise DimensionMismatch(f"D is over {inst.D.size} elements, carrier has {omega.size}")

    verdicts: Dict[str, Verdict] = {}
    verdicts["D_nonempty"] = Verdict.ok() if len(inst.D) else Verdict.fail({"D": []})
    verdicts["D_convex"] = is_convex_set(omega, inst.D)
    verdicts["f_convex"] = is_convex_map(inst.f, omega, rng)
    verdicts["f_affine_on_D"] = is_affine_map(inst.f, omega, rng, domain=inst.D)
    hull = extreme_hull(omega, inst.D)
    verdicts["extreme_hull_covers"] = Verdict.ok() if hull.is_full() else Verdict.fail({"missing": (~hull).indices()})
    if rng.flavor == "finite":
        verdicts["lower_chain_complete"] = is_lower_chain_complete(rng.poset)
    else:
        sharp = is_sharp(rng.cone)
        verdicts["lower_chain_complete"] = Verdict(sharp.passed, sharp.witness, "order generated by a sharp cone" if sharp else sharp.note)
    verdicts["omega_distributive"] = check_mutually_distributive(omega, max_cells)
    verdicts["range_distributive"] = check_range_distributive(rng, max_cells)
    verdicts["order_automorphism"] = check_range_automorphisms(rng)
    for name, verdict in verdicts.items():
        _LOGGER.debug(f"hypothesis {name}: {'pass' if verdict else 'fail'}")
    return verdicts


# --- LP plumbing -------------------------------------------------------------


Expr = Dict[int, Fraction]


def _add_cone_rows(builder: ProgramBuilder, cone: RationalCone, exprs: Sequence[Expr], target: Sequence[Fraction], label: str) -> None:
    """target - v in K, with v given coordinatewise by linear expressions."""
    if cone.has_halfspaces():
        for idx, h in enumerate(cone.halfspaces()):
            coeffs: Expr = defaultdict(Fraction)
            for c, hc in enumerate(h):
                if hc:
                    for j, w in exprs[c].items():
                        coeffs[j] += hc * w
            builder.add_row(coeffs, Relation.LE, dot(h, target), f"{label}:cone{idx}")
        return
    if not cone.is_finitely_generated():
        raise UnsupportedNorm("L2 Lorenz orders are not linear constraints", {"norm": "l2", "dim": cone.base_dim})
    gens = cone.generators()
    lam = builder.add_block(f"lambda:{label}", len(gens))
    for j in lam:
        builder.add_row({j: _ONE}, Relation.GE, _ZERO, f"{label}:lambda>=0")
    for c in range(cone.dim):
        coeffs: Expr = defaultdict(Fraction, exprs[c])
        for k, g in zip(lam, gens):
            if g[c]:
                coeffs[k] += g[c]
        builder.add_row(coeffs, Relation.EQ, target[c], f"{label}:cone[{c}]")


def _objective_functional(cone: RationalCone) -> Vector:
    verdict = is_sharp(cone)
    if verdict:
        return vec(verdict.witness["phi"])
    return zeros(cone.dim)


def _solve_linear(inst: SupportInstance, max_pivots: Optional[int]):
    omega, rng = inst.omega, inst.range
    d, size = rng.dim, omega.size
    builder = ProgramBuilder()
    block = builder.add_block("g", size * d)

    def gv(x: int, c: int) -> int:
        return block[x * d + c]

    seen = set()
    for gamma in omega.indices:
        op = omega.op(gamma)
        mats = rng.matrices[gamma]
        for args in product(range(size), repeat=op.arity):
            target = op(*args)
            for c in range(d):
                coeffs: Expr = defaultdict(Fraction)
                coeffs[gv(target, c)] += 1
                for a, x in zip(mats, args):
                    for c2 in range(d):
                        if a[c][c2]:
                            coeffs[gv(x, c2)] -= a[c][c2]
                key = tuple(sorted((j, w) for j, w in coeffs.items() if w))
                if not key or key in seen:
                    continue
                seen.add(key)
                builder.add_row(dict(key), Relation.EQ, _ZERO, f"affine:{gamma}{list(args)}[{c}]")

    for x in range(size):
        exprs = [{gv(x, c): _ONE} for c in range(d)]
        _add_cone_rows(builder, rng.cone, exprs, inst.f(x), f"dominated:{x}")
    for x in inst.D:
        for c in range(d):
            builder.add_row({gv(x, c): _ONE}, Relation.EQ, inst.f(x)[c], f"anchor:{x}[{c}]")

    phi = _objective_functional(rng.cone)
    objective = {gv(x, c): phi[c] for x in range(size) for c in range(d) if phi[c]}
    lp = builder.build(objective, "max")
    _LOGGER.debug(f"support LP: {lp.num_vars} variables, {len(lp.rows)} rows")
    result = lp_optimize(lp, max_pivots)
    if result.status is LPStatus.INFEASIBLE:
        return None, lp, result
    values = [tuple(result.point[gv(x, c)] for c in range(d)) for x in range(size)]
    return FunctionTable(values), lp, result


def _search(
    inst: SupportInstance,
    candidates: Sequence[Sequence[Any]],
    first_only: bool,
    max_nodes: Optional[int],
) -> List[FunctionTable]:
    """Depth-first search over value tables, checking each affine equation as soon as it is fully assigned."""
    omega, rng = inst.omega, inst.range
    size = omega.size
    limit = max_nodes or const.MAX_SEARCH_NODES
    constraints: Dict[int, List[Tuple[str, Tuple[int, ...], int]]] = defaultdict(list)
    for gamma in omega.indices:
        op = omega.op(gamma)
        for args in product(range(size), repeat=op.arity):
            target = op(*args)
            constraints[max(target, *args)].append((gamma, args, target))

    found: List[FunctionTable] = []
    assignment: List[Any] = [None] * size
    nodes = 0

    def consistent(x: int) -> bool:
        for gamma, args, target in constraints[x]:
            if assignment[target] != rng.apply(gamma, [assignment[a] for a in args]):
                return False
        return True

    def visit(x: int) -> bool:
        nonlocal nodes
        if x == size:
            found.append(FunctionTable(list(assignment)))
            return first_only
        for value in candidates[x]:
            nodes += 1
            if nodes > limit:
                raise ResourceLimit(f"search exceeded {limit} nodes", {"max_nodes": limit})
            assignment[x] = value
            if consistent(x) and visit(x + 1):
                return True
        assignment[x] = None
        return False

    visit(0)
    _LOGGER.debug(f"search visited {nodes} nodes, found {len(found)} tables")
    return found


def _certificate_candidates(inst: SupportInstance, pool: Sequence[Any]) -> List[List[Any]]:
    rng = inst.range
    out = []
    for x in range(inst.omega.size):
        fx = inst.f(x)
        if x in inst.D:
            out.append([v for v in pool if v == fx])
        else:
            out.append([v for v in pool if rng.leq(v, fx)])
    return out


# --- certificate verification ------------------------------------------------


def verify_support_certificate(inst: SupportInstance, g: FunctionTable) -> CertificateReport:
    omega, rng = inst.omega, inst.range
    if g.size != omega.size:
        raise DimensionMismatch(f"g has {g.size} values, carrier has {omega.size} elements")
    checks: Dict[str, Verdict] = {"affine": is_affine_map(g, omega, rng)}
    dominated = Verdict.ok()
    for x in range(omega.size):
        if not rng.leq(g(x), inst.f(x)):
            dominated = Verdict.fail({"x": x, "g": rng.format_value(g(x)), "f": rng.format_value(inst.f(x))})
            break
    checks["dominated"] = dominated
    agrees = Verdict.ok()
    for x in inst.D:
        if g(x) != inst.f(x):
            agrees = Verdict.fail({"x": x, "g": rng.format_value(g(x)), "f": rng.format_value(inst.f(x))})
            break
    checks["agrees_on_D"] = agrees
    return CertificateReport(checks)


# --- main construction -------------------------------------------------------


def support_extend(
    inst: SupportInstance,
    override: bool = False,
    advisory: Iterable[str] = (),
    max_cells: Optional[int] = None,
    max_pivots: Optional[int] = None,
    max_nodes: Optional[int] = None,
) -> SupportCertificate:
    """An affine g with g <= f and g = f on D.

    Hypotheses named in ``advisory`` are reported but do not block the
    construction; ``override`` lets every failing hypothesis through.
    """
    verdicts = validate_instance(inst, max_cells)
    advisory = frozenset(advisory)
    failing = [name for name, verdict in verdicts.items() if not verdict]
    gating = [name for name in failing if name not in advisory]
    if gating and not override:
        first = gating[0]
        raise HypothesisFailure(first, {"details": verdicts[first].witness}, failures=gating)

    if inst.range.flavor == "linear":
        g, lp, result = _solve_linear(inst, max_pivots)
        backend = "lp"
        if g is None:
            detail = {"active_rows": active_rows(lp, result.certificate), "failed_hypotheses": failing}
            if failing:
                raise Infeasible("support LP is infeasible", result.certificate_strings(), detail)
            _LOGGER.error("support LP infeasible although every hypothesis passed")
            raise TheoremViolation("support LP is infeasible on an instance satisfying every hypothesis", {**detail, "certificate": result.certificate_strings()})
    else:
        pool = list(range(inst.range.poset.size))
        found = _search(inst, _certificate_candidates(inst, pool), True, max_nodes)
        backend = "search"
        if not found:
            if failing:
                raise Infeasible("no certificate table exists", None, {"failed_hypotheses": failing})
            _LOGGER.error("exhaustive search empty although every hypothesis passed")
            raise TheoremViolation("no certificate table exists on an instance satisfying every hypothesis")
        g = found[0]

    report = verify_support_certificate(inst, g)
    if not report:
        raise InternalError("constructed certificate fails verification", {"failures": report.failures})
    return SupportCertificate(g, report, backend, inst.D)


def enumerate_certificates(
    inst: SupportInstance,
    value_grid: Optional[Sequence[Any]] = None,
    max_nodes: Optional[int] = None,
) -> List[FunctionTable]:
    """Every certificate table whose values come from ``value_grid``.

    Finite ranges default to all poset elements; linear ranges need a grid
    (scalars are accepted for one-dimensional ranges).
    """
    rng = inst.range
    if value_grid is None:
        if rng.flavor != "finite":
            raise InvalidInput("a value grid is required for linear ranges")
        pool = list(range(rng.poset.size))
    else:
        pool = []
        for v in value_grid:
            if rng.flavor == "linear" and not isinstance(v, (tuple, list)):
                v = (v,)
            pool.append(rng.validate_value(v))
    return _search(inst, _certificate_candidates(inst, pool), False, max_nodes)


def support_at_point(
    omega: OperationFamily,
    rng: OrderedRange,
    f: FunctionTable,
    p: int,
    override: bool = False,
    max_cells: Optional[int] = None,
    max_pivots: Optional[int] = None,
) -> SupportCertificate:
    """support_extend with D = {p} at an ω-interior point of a reflexive structure."""
    if not 0 <= p < omega.size:
        raise OutOfRange(f"point {p} is outside the carrier", {"p": p})
    verdict = check_reflexive(omega)
    if not verdict:
        raise NotReflexive("ω is not reflexive", {"family": "omega", **verdict.witness})
    verdict = check_range_reflexive(rng)
    if not verdict:
        raise NotReflexive("Ω is not reflexive", {"family": "Omega", **verdict.witness})
    interior = omega_interior(omega)
    if p not in interior:
        raise NotInterior(f"{p} is not an ω-interior point", {"p": p, "interior": interior.indices()})
    D = Subset.from_indices(omega.size, [p])
    return support_extend(SupportInstance(omega, rng, f, D), override, max_cells=max_cells, max_pivots=max_pivots)


# --- subadditive maps --------------------------------------------------------


def _scalar_values(f: FunctionTable) -> List[Fraction]:
    values = []
    for v in f.values:
        if len(v) != 1:
            raise DimensionMismatch("subadditive support needs rational-valued f")
        values.append(v[0])
    return values


def subadditive_support(
    addition: Operation,
    f: FunctionTable,
    p: int,
    override: bool = False,
    max_pivots: Optional[int] = None,
) -> SupportCertificate:
    """An additive g <= f with g(p) = f(p) for subadditive f on a finite abelian semigroup."""
    if addition.arity != 2:
        raise ArityMismatch(f"addition must be binary, got arity {addition.arity}")
    size = addition.size
    if f.size != size:
        raise DimensionMismatch(f"f has {f.size} values, semigroup has {size} elements")
    if not 0 <= p < size:
        raise OutOfRange(f"point {p} is outside the semigroup", {"p": p})
    for check, what in ((check_associative, "associative"), (check_commutative, "commutative")):
        verdict = check(addition)
        if not verdict:
            raise InvalidStructure(f"addition is not {what}", verdict.witness)
    values = _scalar_values(f)

    for x in range(size):
        for y in range(size):
            z = addition(x, y)
            if values[z] > values[x] + values[y]:
                raise NotSubadditive(
                    f"f({x}+{y}) > f({x}) + f({y})",
                    {"args": [x, y], "lhs": format_rational(values[z]), "rhs": format_rational(values[x] + values[y])},
                )

    # D = {np : n >= 1}, walked until the orbit repeats; the repeat is checked too
    multiples = [p]
    while True:
        nxt = addition(multiples[-1], p)
        multiples.append(nxt)
        if nxt in multiples[:-1]:
            break
    for n, q in enumerate(multiples, start=1):
        if values[q] != n * values[p]:
            raise ConditionFailure(
                "i",
                {"n": n, "point": q, "f(np)": format_rational(values[q]), "n*f(p)": format_rational(n * values[p])},
            )
    D = Subset.from_indices(size, multiples)
    for x in range(size):
        if not any(addition(x, y) in D for y in range(size)):
            raise ConditionFailure("ii", {"x": x, "D": D.indices()})

    omega = OperationFamily(Carrier(size), {"add": addition})
    rng = OrderedRange.scalar({"add": [1, 1]})
    inst = SupportInstance(omega, rng, f, D)
    # + is not self-distributive in the required sense; the certificate is verified independently
    return support_extend(inst, override, advisory=("omega_distributive", "range_distributive"), max_pivots=max_pivots)


# --- sampled sublinear maps ----------------------------------------------------


@dataclass(frozen=True)
class SampledCertificate:
    """A linear map G (d x k) with G x <=_K f(x) on the sample and G p = f(p)."""

    matrix: Matrix
    values: Tuple[Vector, ...]
    checks: CertificateReport

    def to_dict(self) -> Dict[str, Any]:
        return {
            "matrix": format_matrix(self.matrix),
            "values": [format_vector(v) for v in self.values],
            "checks": self.checks.to_dict(),
        }


def _index_points(points: Sequence[Vector]) -> Dict[Vector, int]:
    index: Dict[Vector, int] = {}
    for i, pt in enumerate(points):
        index.setdefault(pt, i)
    return index


def verify_sampled_certificate(
    sample: Sequence[Vector], f_values: Sequence[Vector], cone: RationalCone, p: Vector, G: Matrix
) -> CertificateReport:
    dominated = Verdict.ok()
    for x, fx in zip(sample, f_values):
        if not cone_leq(cone, mat_vec(G, x), fx):
            dominated = Verdict.fail({"x": format_vector(x), "g": format_vector(mat_vec(G, x)), "f": format_vector(fx)})
            break
    index = _index_points(sample)
    gp, fp = mat_vec(G, p), f_values[index[p]]
    agrees = Verdict.ok() if gp == fp else Verdict.fail({"g": format_vector(gp), "f": format_vector(fp)})
    return CertificateReport({"dominated": dominated, "agrees_at_p": agrees})


def _check_reaches_ray(points: Sequence[Vector], x: Vector, p: Vector, max_pivots: Optional[int]) -> None:
    """Some y in the cone spanned by the sample and t >= 0 with x + y = t p."""
    builder = ProgramBuilder()
    lam = builder.add_block("lambda", len(points))
    t = builder.add_block("t", 1)[0]
    for j in [*lam, t]:
        builder.add_row({j: _ONE}, Relation.GE, _ZERO, "nonnegative")
    for c in range(len(p)):
        coeffs: Expr = {j: s[c] for j, s in zip(lam, points) if s[c]}
        coeffs[t] = -p[c]
        builder.add_row(coeffs, Relation.EQ, -x[c], f"x+y=tp[{c}]")
    lp = builder.build()
    result = lp_feasible(lp, max_pivots)
    if result.status is LPStatus.INFEASIBLE:
        raise ConditionFailure(
            "ii",
            {"x": format_vector(x), "p": format_vector(p), "certificate": result.certificate_strings()},
        )


def sublinear_support(
    sample: Sequence[Sequence],
    f_values: Sequence[Sequence],
    cone: RationalCone,
    p: Sequence,
    multipliers: Optional[Sequence] = None,
    max_pivots: Optional[int] = None,
) -> SampledCertificate:
    """Linear G with G x <=_K f(x) on the sample and G p = f(p).

    Sublinearity and positive homogeneity at p are only checked on
    combinations t*x + s*y that land back in the sample, with t, s drawn from
    ``multipliers``. Every sample point x must satisfy x + y = t p for some
    y in the cone spanned by the sample.
    """
    points = [vec(x) for x in sample]
    values = [vec(v) for v in f_values]
    p = vec(p)
    mults = [Fraction(m) for m in (multipliers or const.DEFAULT_MULTIPLIERS)]
    if not points:
        raise InvalidInput("sample is empty")
    k, d = len(points[0]), cone.dim
    if any(len(x) != k for x in points) or len(p) != k:
        raise DimensionMismatch(f"sample points must all have length {k}")
    if len(values) != len(points) or any(len(v) != d for v in values):
        raise DimensionMismatch(f"need one value in Q^{d} per sample point")
    if any(m <= 0 for m in mults):
        raise InvalidInput("multipliers must be positive")
    index = _index_points(points)
    if p not in index:
        raise InvalidInput("p must be a sample point", {"p": format_vector(p)})

    sharp = is_sharp(cone)
    if not sharp:
        raise NotSharp("cone is not sharp", sharp.witness)

    for i, x in enumerate(points):
        for j, y in enumerate(points):
            for t in mults:
                for s in mults:
                    z = add(scale(t, x), scale(s, y))
                    if z in index:
                        bound = add(scale(t, values[i]), scale(s, values[j]))
                        if not cone_leq(cone, values[index[z]], bound):
                            raise NotSublinear(
                                "f(tx+sy) exceeds t f(x) + s f(y)",
                                {"x": format_vector(x), "y": format_vector(y), "t": format_rational(t), "s": format_rational(s)},
                            )
    fp = values[index[p]]
    for t in mults:
        tp = scale(t, p)
        if tp in index and values[index[tp]] != scale(t, fp):
            raise ConditionFailure("i", {"t": format_rational(t), "f(tp)": format_vector(values[index[tp]]), "t*f(p)": format_vector(scale(t, fp))})
    for x in points:
        _check_reaches_ray(points, x, p, max_pivots)

    builder = ProgramBuilder()
    block = builder.add_block("G", d * k)

    def gv(r: int, c: int) -> int:
        return block[r * k + c]

    for i, (x, fx) in enumerate(zip(points, values)):
        exprs = [{gv(r, c): x[c] for c in range(k) if x[c]} for r in range(d)]
        _add_cone_rows(builder, cone, exprs, fx, f"dominated:{i}")
    for r in range(d):
        builder.add_row({gv(r, c): p[c] for c in range(k) if p[c]}, Relation.EQ, fp[r], f"anchor[{r}]")
    phi = _objective_functional(cone)
    totals = [sum((x[c] for x in points), _ZERO) for c in range(k)]
    objective = {gv(r, c): phi[r] * totals[c] for r in range(d) for c in range(k) if phi[r] * totals[c]}
    lp = builder.build(objective, "max")
    result = lp_optimize(lp, max_pivots)
    if result.status is LPStatus.INFEASIBLE:
        raise Infeasible(
            "sampled sublinear constraints are inconsistent",
            result.certificate_strings(),
            {"active_rows": active_rows(lp, result.certificate)},
        )
    G = tuple(tuple(result.point[gv(r, c)] for c in range(k)) for r in range(d))
    report = verify_sampled_certificate(points, values, cone, p, G)
    if not report:
        raise InternalError("sampled certificate fails verification", {"failures": report.failures})
    return SampledCertificate(G, tuple(mat_vec(G, x) for x in points), report)


# --- chains certifying relative interiority -----------------------------------


class RationalSpace:
    """Exact arithmetic in Q^d."""

    def dyadic(self, k: int, n: int) -> Fraction:
        return Fraction(k, 2**n)

    def scale(self, c, u):
        return tuple(c * a for a in u)

    def add(self, u, v):
        return tuple(a + b for a, b in zip(u, v))

    def sub(self, u, v):
        return tuple(a - b for a, b in zip(u, v))

    def apply(self, a, u):
        return mat_vec(a, u)

    def format(self, u) -> List[str]:
        return format_vector(u)


class ModularSpace:
    """Arithmetic in (Z_m)^d for odd m, where halving is multiplication by 2^-1."""

    def __init__(self, modulus: int):
        if modulus < 3 or modulus % 2 == 0:
            raise InvalidInput(f"modulus must be odd and at least 3, got {modulus}")
        self.m = modulus

    def reduce(self, value: Fraction) -> int:
        value = Fraction(value)
        try:
            inverse = pow(value.denominator, -1, self.m)
        except ValueError:
            raise InvalidInput(f"{format_rational(value)} has no residue modulo {self.m}") from None
        return value.numerator * inverse % self.m

    def reduce_matrix(self, a: Matrix) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(self.reduce(c) for c in row) for row in a)

    def dyadic(self, k: int, n: int) -> int:
        return k * pow(2, -n, self.m) % self.m

    def scale(self, c, u):
        return tuple(c * a % self.m for a in u)

    def add(self, u, v):
        return tuple((a + b) % self.m for a, b in zip(u, v))

    def sub(self, u, v):
        return tuple((a - b) % self.m for a, b in zip(u, v))

    def apply(self, a, u):
        return tuple(sum(c * x for c, x in zip(row, u)) % self.m for row in a)

    def format(self, u) -> List[int]:
        return [int(a) for a in u]


@dataclass(frozen=True)
class RiInstance:
    """A rational polytope {x : <h, x> <= c}, an additive map a, and points p, x."""

    dim: int
    halfspaces: Tuple[Tuple[Vector, Fraction], ...]
    a: Matrix
    p: Vector
    x: Vector
    n_max: int = const.RI_N_MAX

    def contains(self, point: Sequence[Fraction]) -> bool:
        return all(dot(h, point) <= c for h, c in self.halfspaces)


@dataclass(frozen=True)
class RiCertificate:
    """Chain x_{-2}, ..., x_{2^(n+1)} with its verification record."""

    n: int
    chain: Tuple[Any, ...]
    membership: Verdict
    identities: Verdict
    space: Any = field(default=None, compare=False, repr=False)

    @property
    def passed(self) -> bool:
        return self.membership.passed and self.identities.passed

    def __bool__(self) -> bool:
        return self.passed

    def indices(self) -> range:
        return range(-2, 2 ** (self.n + 1) + 1)

    def to_dict(self) -> Dict[str, Any]:
        fmt = self.space.format if self.space is not None else format_vector
        return {
            "n": self.n,
            "first_index": -2,
            "chain": [fmt(pt) for pt in self.chain],
            "membership": self.membership.to_dict(),
            "identities": self.identities.to_dict(),
        }


def build_ri_chain(space, a, p, x, n: int, member: Callable[[Any], bool]) -> RiCertificate:
    """Even entries x_{2k} = (k/2^n) x + (1 - k/2^n) p, odd entries x_{2k-1} = ω(x_{2k-2}, x_{2k})."""
    steps = 2**n
    if 2 * steps + 3 > const.MAX_TABLE_CELLS:
        raise ResourceLimit(f"chain for n={n} is too long", {"n": n})

    def omega(u, v):
        return space.add(space.apply(a, u), space.sub(v, space.apply(a, v)))

    evens = {k: space.add(space.scale(space.dyadic(k, n), x), space.scale(space.dyadic(steps - k, n), p)) for k in range(-1, steps + 1)}
    odds = {k: omega(evens[k - 1], evens[k]) for k in range(0, steps + 1)}

    chain = [evens[-1]]
    for k in range(0, steps + 1):
        chain.append(odds[k])
        chain.append(evens[k])

    membership = Verdict.ok()
    for offset, point in enumerate(chain):
        if not member(point):
            membership = Verdict.fail({"index": offset - 2, "point": space.format(point)})
            break
    identities = Verdict.ok()
    for k in range(0, steps):
        if omega(odds[k + 1], odds[k]) != evens[k]:
            identities = Verdict.fail({"k": k})
            break
    return RiCertificate(n, tuple(chain), membership, identities, space)


def _least_n(space, p, x, n_max: int, member: Callable[[Any], bool]) -> Optional[int]:
    for n in range(n_max + 1):
        point = space.add(p, space.scale(space.dyadic(1, n), space.sub(p, x)))
        if member(point):
            return n
    return None


def ri_certificate(inst: RiInstance) -> RiCertificate:
    """Certify p + 2^-n (p - x) in X for the least n and emit the chain."""
    p, x = vec(inst.p), vec(inst.x)
    if len(p) != inst.dim or len(x) != inst.dim:
        raise DimensionMismatch(f"p and x must live in Q^{inst.dim}")
    if not is_square(inst.a, inst.dim):
        raise DimensionMismatch(f"a must be {inst.dim}x{inst.dim}")
    for h, _ in inst.halfspaces:
        if len(h) != inst.dim:
            raise DimensionMismatch(f"halfspace normals must live in Q^{inst.dim}")
    if not inst.contains(p):
        raise OutOfRange("p is not in X", {"p": format_vector(p)})
    if not inst.contains(x):
        raise OutOfRange("x is not in X", {"x": format_vector(x)})
    space = RationalSpace()
    n = _least_n(space, p, x, inst.n_max, inst.contains)
    if n is None:
        raise NotRelativeInterior(
            f"p + 2^-n (p - x) leaves X for every n <= {inst.n_max}",
            {"p": format_vector(p), "x": format_vector(x), "n_max": inst.n_max, "inconclusive_beyond": inst.n_max},
        )
    certificate = build_ri_chain(space, inst.a, p, x, n, inst.contains)
    _LOGGER.debug(f"ri chain: n={n}, {len(certificate.chain)} points, verified={certificate.passed}")
    return certificate


# --- compiling linear-combination structures ---------------------------------


@dataclass(frozen=True)
class Mt2Compilation:
    instance: SupportInstance
    points: Tuple[Any, ...]
    conditions: Dict[str, Verdict]
    interior: Verdict
    chains: Tuple[RiCertificate, ...]
    modulus: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        fmt = (lambda u: [int(a) for a in u]) if self.modulus else format_vector
        return {
            "carrier": [fmt(pt) for pt in self.points],
            "modulus": self.modulus,
            "conditions": {name: v.to_dict() for name, v in self.conditions.items()},
            "interior": self.interior.to_dict(),
            "D": self.instance.D.indices(),
            "chains": len(self.chains),
        }


def mt2_compile(
    a_maps: Sequence[Matrix],
    A_maps: Sequence[Matrix],
    cone: RationalCone,
    grid: Sequence[Sequence],
    f: Optional[Sequence[Sequence]] = None,
    p: Optional[int] = None,
    modulus: Optional[int] = None,
    n_max: Optional[int] = None,
    max_cells: Optional[int] = None,
) -> Mt2Compilation:
    """Check the four structural conditions and package ω(x̄) = Σ a_i x_i, Ω(ȳ) = Σ A_i y_i.

    With ``modulus`` the grid lives in (Z_m)^d and the a_i act through their
    residues; otherwise the grid is a finite subset of Q^d.
    """
    a_maps = [mat(a) for a in a_maps]
    A_maps = [mat(a) for a in A_maps]
    n = len(a_maps)
    if n == 0:
        raise ArityMismatch("at least one map a_i is required")
    if len(A_maps) != n:
        raise ArityMismatch(f"{n} maps a_i but {len(A_maps)} maps A_i")
    d = len(a_maps[0])
    e = cone.dim
    for i, a in enumerate(a_maps):
        if not is_square(a, d):
            raise DimensionMismatch(f"a_{i + 1} is not {d}x{d}")
    for i, a in enumerate(A_maps):
        if not is_square(a, e):
            raise DimensionMismatch(f"A_{i + 1} is not {e}x{e}")

    space: Any
    if modulus is not None:
        space = ModularSpace(modulus)
        points = []
        for pt in grid:
            coords = vec(pt)
            if any(c.denominator != 1 or not 0 <= c < modulus for c in coords):
                raise InvalidInput(f"grid point {format_vector(coords)} is not a residue vector modulo {modulus}")
            points.append(tuple(int(c) for c in coords))
        maps = [space.reduce_matrix(a) for a in a_maps]
    else:
        space = RationalSpace()
        points = [vec(pt) for pt in grid]
        maps = a_maps
    if not points:
        raise InvalidInput("grid is empty")
    if any(len(pt) != d for pt in points):
        raise DimensionMismatch(f"grid points must have length {d}")
    if len(set(points)) != len(points):
        raise InvalidInput("grid points must be distinct")
    index = {pt: i for i, pt in enumerate(points)}

    conditions: Dict[str, Verdict] = {}
    for i in range(n):
        for j in range(i + 1, n):
            if mat_mul(a_maps[i], a_maps[j]) != mat_mul(a_maps[j], a_maps[i]):
                raise ConditionFailure("i", {"pair": [i + 1, j + 1]})
    conditions["i"] = Verdict.ok()
    total = mat_sum(a_maps, d)
    if total != identity(d):
        raise ConditionFailure("ii", {"sum": format_matrix(total)})
    conditions["ii"] = Verdict.ok()

    size = len(points)
    limit = max_cells or const.MAX_TABLE_CELLS
    if size**n > limit:
        raise ResourceLimit(f"table of {size}^{n} cells exceeds the cap of {limit}", {"size": size, "arity": n})
    table = np.zeros((size,) * n, dtype=np.int64)
    for args in product(range(size), repeat=n):
        combo = points[args[0]]
        combo = space.apply(maps[0], combo)
        for a, arg in zip(maps[1:], args[1:]):
            combo = space.add(combo, space.apply(a, points[arg]))
        if combo not in index:
            fmt = space.format(combo) if modulus else format_vector(combo)
            raise ConditionFailure("iii", {"args": list(args), "value": fmt})
        table[args] = index[combo]
    conditions["iii"] = Verdict.ok()

    for i, a in enumerate(A_maps):
        verdict = linear_automorphism(a, cone)
        if not verdict:
            raise ConditionFailure("iv", {"slot": i + 1, **verdict.witness})
    conditions["iv"] = Verdict.ok()

    carrier = Carrier(size)
    op = Operation(size, n, table, max_cells)
    omega = OperationFamily(carrier, {"omega1": op})
    rng = OrderedRange.linear(e, cone, {"omega1": A_maps})
    values = [vec(v) for v in f] if f is not None else [zeros(e)] * size
    if len(values) != size or any(len(v) != e for v in values):
        raise DimensionMismatch(f"f needs one value in Q^{e} per grid point")
    if p is not None and not 0 <= p < size:
        raise OutOfRange(f"point {p} is outside the grid", {"p": p})
    D = Subset.from_indices(size, [p]) if p is not None else Subset.full(size)
    instance = SupportInstance(omega, rng, FunctionTable(values), D)

    # ω*(x, y) = ω(x, y, ..., y)
    if n == 1:
        star = omega
    else:
        x_idx, y_idx = np.indices((size, size))
        star_table = table[(x_idx,) + (y_idx,) * (n - 1)]
        star = OperationFamily(carrier, {"omega_star": Operation(size, 2, star_table)})

    chains: List[RiCertificate] = []
    if p is None:
        interior = Verdict.ok("no anchor point")
    else:
        hull = extreme_hull(star, D)
        if hull.is_full():
            interior = Verdict.ok()
        else:
            interior = Verdict.fail({"p": p, "missing": (~hull).indices()})
        members = set(points)
        bound = n_max if n_max is not None else const.RI_N_MAX
        anchor = points[p]
        for x in points:
            steps = _least_n(space, anchor, x, bound, members.__contains__)
            if steps is not None:
                chains.append(build_ri_chain(space, maps[0], anchor, x, steps, members.__contains__))
    _LOGGER.debug(f"compiled {size}-point carrier, arity {n}, {len(chains)} chains")
    return Mt2Compilation(instance, tuple(points), conditions, interior, tuple(chains), modulus)


# --- delta-convex maps ---------------------------------------------------------


@dataclass(frozen=True)
class DeltaInstance:
    sample: Tuple[Vector, ...]
    s: Fraction
    t: Fraction
    F: Tuple[Vector, ...]
    f: Tuple[Fraction, ...]
    p: Vector
    norm: Norm

    @classmethod
    def build(cls, sample, s, t, F, f, p, norm) -> "DeltaInstance":
        points = tuple(vec(x) if isinstance(x, (list, tuple)) else vec([x]) for x in sample)
        F_values = tuple(vec(v) if isinstance(v, (list, tuple)) else vec([v]) for v in F)
        p = vec(p) if isinstance(p, (list, tuple)) else vec([p])
        return cls(points, Fraction(s), Fraction(t), F_values, tuple(vec(f)), p, Norm(norm))


@dataclass(frozen=True)
class DeltaCertificate:
    A: Tuple[Vector, ...]
    a: Tuple[Fraction, ...]
    checks: CertificateReport

    def to_dict(self) -> Dict[str, Any]:
        return {
            "A": [format_vector(v) for v in self.A],
            "a": format_vector(self.a),
            "checks": self.checks.to_dict(),
        }


def _validate_delta(inst: DeltaInstance) -> Dict[Vector, int]:
    if not (0 < inst.s < 1 and 0 < inst.t < 1):
        raise InvalidInput("s and t must lie strictly between 0 and 1")
    if not inst.sample:
        raise InvalidInput("sample is empty")
    k = len(inst.sample[0])
    if any(len(x) != k for x in inst.sample) or len(inst.p) != k:
        raise DimensionMismatch(f"sample points must all have length {k}")
    if len(inst.F) != len(inst.sample) or len(inst.f) != len(inst.sample):
        raise DimensionMismatch("F and f need one value per sample point")
    m = len(inst.F[0])
    if any(len(v) != m for v in inst.F):
        raise DimensionMismatch(f"F values must all have length {m}")
    index = _index_points(inst.sample)
    if inst.p not in index:
        raise InvalidInput("p must be a sample point", {"p": format_vector(inst.p)})
    return index


def _triples(inst: DeltaInstance, index: Dict[Vector, int]) -> Iterable[Tuple[int, int, int]]:
    for i, x in enumerate(inst.sample):
        for j, y in enumerate(inst.sample):
            if i == j:
                continue
            z = add(scale(inst.s, x), scale(1 - inst.s, y))
            if z in index:
                yield i, j, index[z]


def check_delta_convex(inst: DeltaInstance) -> Verdict:
    """||t F(x) + (1-t) F(y) - F(z)|| <= t f(x) + (1-t) f(y) - f(z) on in-sample z = s x + (1-s) y."""
    index = _validate_delta(inst)
    t = inst.t
    for i, j, z in _triples(inst, index):
        gap = sub(add(scale(t, inst.F[i]), scale(1 - t, inst.F[j])), inst.F[z])
        bound = t * inst.f[i] + (1 - t) * inst.f[j] - inst.f[z]
        if not norm_at_most(gap, inst.norm, bound):
            return Verdict.fail({"pair": [format_vector(inst.sample[i]), format_vector(inst.sample[j])], "indices": [i, j]})
    return Verdict.ok()


def verify_delta_certificate(inst: DeltaInstance, A: Sequence[Sequence], a: Sequence) -> CertificateReport:
    index = _validate_delta(inst)
    A = tuple(vec(v) if isinstance(v, (list, tuple)) else vec([v]) for v in A)
    a = tuple(vec(a))
    if len(A) != len(inst.sample) or len(a) != len(inst.sample):
        raise DimensionMismatch("A and a need one value per sample point")
    t = inst.t
    affine = Verdict.ok()
    for i, j, z in _triples(inst, index):
        if A[z] != add(scale(t, A[i]), scale(1 - t, A[j])) or a[z] != t * a[i] + (1 - t) * a[j]:
            affine = Verdict.fail({"indices": [i, j, z]})
            break
    pi = index[inst.p]
    anchored = Verdict.ok() if A[pi] == inst.F[pi] and a[pi] == inst.f[pi] else Verdict.fail({"p": format_vector(inst.p)})
    dominated = Verdict.ok()
    for i in range(len(inst.sample)):
        if not norm_at_most(sub(inst.F[i], A[i]), inst.norm, inst.f[i] - a[i]):
            dominated = Verdict.fail({"index": i, "x": format_vector(inst.sample[i])})
            break
    return CertificateReport({"affine": affine, "anchored": anchored, "dominated": dominated})


def delta_support(inst: DeltaInstance, max_pivots: Optional[int] = None) -> DeltaCertificate:
    """(s,t)-affine (A, a) anchored at p with ||F - A|| <= f - a on the sample."""
    index = _validate_delta(inst)
    verdict = check_delta_convex(inst)
    if not verdict:
        raise NotDeltaConvex("delta convexity fails on a sample pair", verdict.witness)
    m = len(inst.F[0])
    lifted = RationalCone.lorenz(1, m, inst.norm)
    if not lifted.is_finitely_generated():
        raise UnsupportedNorm("constructive L2 delta support needs m = 1; verify a candidate instead", {"norm": "l2", "m": m})

    N = len(inst.sample)
    builder = ProgramBuilder()
    A_block = builder.add_block("A", N * m)
    a_block = builder.add_block("a", N)

    def Av(x: int, c: int) -> int:
        return A_block[x * m + c]

    t = inst.t
    for i, j, z in _triples(inst, index):
        for c in range(m):
            terms = [(Av(z, c), 1), (Av(i, c), -t), (Av(j, c), -(1 - t))]
            builder.add_row(_collect(terms), Relation.EQ, 0, f"affine:A{[i, j, z]}[{c}]")
        builder.add_row(_collect([(a_block[z], 1), (a_block[i], -t), (a_block[j], -(1 - t))]), Relation.EQ, 0, f"affine:a{[i, j, z]}")
    pi = index[inst.p]
    for c in range(m):
        builder.add_row({Av(pi, c): 1}, Relation.EQ, inst.F[pi][c], f"anchor:A[{c}]")
    builder.add_row({a_block[pi]: 1}, Relation.EQ, inst.f[pi], "anchor:a")
    for x in range(N):
        exprs = [{Av(x, c): _ONE} for c in range(m)] + [{a_block[x]: _ONE}]
        _add_cone_rows(builder, lifted, exprs, inst.F[x] + (inst.f[x],), f"dominated:{x}")

    lp = builder.build({j: 1 for j in a_block}, "max")
    result = lp_optimize(lp, max_pivots)
    if result.status is LPStatus.INFEASIBLE:
        raise Infeasible(
            "sampled delta-support constraints are inconsistent",
            result.certificate_strings(),
            {"active_rows": active_rows(lp, result.certificate)},
        )
    A = tuple(tuple(result.point[Av(x, c)] for c in range(m)) for x in range(N))
    a = tuple(result.point[j] for j in a_block)
    report = verify_delta_certificate(inst, A, a)
    if not report:
        raise InternalError("delta certificate fails verification", {"failures": report.failures})
    return DeltaCertificate(A, a, report)


def _collect(terms: Iterable[Tuple[int, Fraction]]) -> Expr:
    out: Expr = defaultdict(Fraction)
    for j, w in terms:
        out[j] += Fraction(w)
    return out
