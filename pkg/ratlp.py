"""Exact rational linear programming.

Two-phase primal simplex over ``fractions.Fraction`` with Bland's rule.
Every point, ray and infeasibility certificate is re-substituted into the
original rows before it is returned; a failed re-check raises
``InternalError``. There are no tolerances anywhere in this module.

Infeasibility certificates are reported in ">=-normalized" form: a row
``a.x <= b`` is read as ``-a.x >= -b``. The certificate is a multiplier per
row (nonnegative for inequality rows, any sign for equalities) whose
combination of the normalized rows reads ``0 >= c`` with ``c > 0``.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import const
from errors import DimensionMismatch, InternalError, InvalidInput, ResourceLimit
from rational_utils import dot, format_rational, parse_rational

_LOGGER = logging.getLogger(__name__)

_ZERO = Fraction(0)
_ONE = Fraction(1)


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class LPStatus(str, Enum):
    FEASIBLE = "feasible"
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Row:
    coeffs: Tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction
    label: str = ""

    def holds_at(self, point: Sequence[Fraction]) -> bool:
        lhs = dot(self.coeffs, point)
        if self.relation is Relation.LE:
            return lhs <= self.rhs
        if self.relation is Relation.GE:
            return lhs >= self.rhs
        return lhs == self.rhs

    def recedes_along(self, direction: Sequence[Fraction]) -> bool:
        """True when moving along ``direction`` never violates the row."""
        lhs = dot(self.coeffs, direction)
        if self.relation is Relation.LE:
            return lhs <= 0
        if self.relation is Relation.GE:
            return lhs >= 0
        return lhs == 0

    def normalized(self) -> Tuple[Tuple[Fraction, ...], Fraction]:
        if self.relation is Relation.LE:
            return tuple(-c for c in self.coeffs), -self.rhs
        return self.coeffs, self.rhs


def row(coeffs, relation, rhs, label: str = "") -> Row:
    """Convenience constructor accepting ints / ``"p/q"`` strings."""
    return Row(
        tuple(parse_rational(c) for c in coeffs),
        Relation(relation),
        parse_rational(rhs),
        label,
    )


Bound = Tuple[Optional[Fraction], Optional[Fraction]]


@dataclass(frozen=True)
class LinearProgram:
    """A system of rows over ``num_vars`` variables.

    Variables are free unless ``bounds`` says otherwise; a bound of ``None``
    means unbounded in that direction.
    """

    num_vars: int
    rows: Tuple[Row, ...]
    objective: Optional[Tuple[Fraction, ...]] = None
    sense: str = "min"
    bounds: Optional[Tuple[Bound, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if self.objective is not None:
            object.__setattr__(self, "objective", tuple(parse_rational(c) for c in self.objective))
            if len(self.objective) != self.num_vars:
                raise DimensionMismatch(f"objective has {len(self.objective)} entries, expected {self.num_vars}")
        if self.bounds is not None:
            object.__setattr__(self, "bounds", tuple(self.bounds))
            if len(self.bounds) != self.num_vars:
                raise DimensionMismatch(f"bounds has {len(self.bounds)} entries, expected {self.num_vars}")
        if self.sense not in ("min", "max"):
            raise InvalidInput(f"unknown sense '{self.sense}'")
        for i, r in enumerate(self.rows):
            if len(r.coeffs) != self.num_vars:
                raise DimensionMismatch(f"row {i} has {len(r.coeffs)} coefficients, expected {self.num_vars}")

    def all_rows(self) -> Tuple[Row, ...]:
        """Rows followed by one row per finite variable bound."""
        if not self.bounds:
            return self.rows
        extra: List[Row] = []
        for j, (lower, upper) in enumerate(self.bounds):
            unit = tuple(_ONE if k == j else _ZERO for k in range(self.num_vars))
            if lower is not None:
                extra.append(Row(unit, Relation.GE, Fraction(lower), f"bound:x{j}>="))
            if upper is not None:
                extra.append(Row(unit, Relation.LE, Fraction(upper), f"bound:x{j}<="))
        return self.rows + tuple(extra)


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    point: Optional[Tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None
    ray: Optional[Tuple[Fraction, ...]] = None
    certificate: Optional[Tuple[Fraction, ...]] = None
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status is not LPStatus.INFEASIBLE

    def certificate_strings(self) -> Optional[List[str]]:
        if self.certificate is None:
            return None
        return [format_rational(c) for c in self.certificate]


class ProgramBuilder:
    """Allocates named variable blocks and collects sparse rows."""

    def __init__(self):
        self.num_vars = 0
        self._blocks: Dict[str, Tuple[int, int]] = {}
        self._rows: List[Tuple[Dict[int, Fraction], Relation, Fraction, str]] = []

    def add_block(self, name: str, count: int) -> range:
        start = self.num_vars
        self._blocks[name] = (start, count)
        self.num_vars += count
        return range(start, start + count)

    def block(self, name: str) -> range:
        start, count = self._blocks[name]
        return range(start, start + count)

    def add_row(self, coeffs: Dict[int, Fraction], relation, rhs, label: str = "") -> None:
        cleaned = {j: Fraction(c) for j, c in coeffs.items() if c != 0}
        self._rows.append((cleaned, Relation(relation), Fraction(rhs), label))

    @property
    def num_rows(self) -> int:
        return len(self._rows)

    def build(self, objective: Optional[Dict[int, Fraction]] = None, sense: str = "min") -> LinearProgram:
        rows = []
        for coeffs, relation, rhs, label in self._rows:
            dense = [_ZERO] * self.num_vars
            for j, c in coeffs.items():
                dense[j] += c
            rows.append(Row(tuple(dense), relation, rhs, label))
        obj = None
        if objective is not None:
            dense_obj = [_ZERO] * self.num_vars
            for j, c in objective.items():
                dense_obj[j] += Fraction(c)
            obj = tuple(dense_obj)
        return LinearProgram(self.num_vars, tuple(rows), obj, sense)


class _Simplex:
    """Dense tableau over x = u - v, u, v >= 0, plus slacks and one artificial per row."""

    def __init__(self, lp: LinearProgram, max_pivots: int):
        self.lp = lp
        self.rows = lp.all_rows()
        self.n = lp.num_vars
        self.max_pivots = max_pivots
        self.pivots = 0

        m = len(self.rows)
        slack_col: Dict[int, int] = {}
        col = 2 * self.n
        for i, r in enumerate(self.rows):
            if r.relation is not Relation.EQ:
                slack_col[i] = col
                col += 1
        self.art_start = col
        self.num_cols = col + m

        self.sigma: List[int] = []
        self.T: List[List[Fraction]] = []
        for i, r in enumerate(self.rows):
            sigma = -1 if r.rhs < 0 else 1
            self.sigma.append(sigma)
            line = [_ZERO] * (self.num_cols + 1)
            for j, a in enumerate(r.coeffs):
                if a:
                    line[j] = sigma * a
                    line[self.n + j] = -sigma * a
            if i in slack_col:
                line[slack_col[i]] = Fraction(sigma if r.relation is Relation.LE else -sigma)
            line[self.art_start + i] = _ONE
            line[-1] = sigma * r.rhs
            self.T.append(line)
        self.basis = [self.art_start + i for i in range(m)]

    # -- tableau mechanics -------------------------------------------------

    def _pivot(self, r: int, c: int) -> None:
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise ResourceLimit(
                f"simplex exceeded {self.max_pivots} pivots",
                {"max_pivots": self.max_pivots},
            )
        prow = self.T[r]
        p = prow[c]
        if p != 1:
            prow = [x / p for x in prow]
            self.T[r] = prow
        nonzero = [j for j, x in enumerate(prow) if x]
        for i, line in enumerate(self.T):
            if i == r:
                continue
            factor = line[c]
            if factor:
                for j in nonzero:
                    line[j] -= factor * prow[j]
        self.basis[r] = c

    def _reduced_costs(self, cost: Sequence[Fraction]) -> List[Fraction]:
        reduced = list(cost)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                line = self.T[i]
                for j in range(self.num_cols):
                    if line[j]:
                        reduced[j] -= cb * line[j]
        return reduced

    def _run(self, cost: Sequence[Fraction], allowed: Sequence[int]) -> Optional[int]:
        """Bland's rule to optimality; returns the entering column of an unbounded ray, else None."""
        while True:
            reduced = self._reduced_costs(cost)
            entering = next((j for j in allowed if reduced[j] < 0), None)
            if entering is None:
                return None
            leave = None
            best = None
            for i, line in enumerate(self.T):
                a = line[entering]
                if a > 0:
                    ratio = line[-1] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                return entering
            self._pivot(leave, entering)

    def _basic_solution(self) -> List[Fraction]:
        z = [_ZERO] * self.num_cols
        for i, b in enumerate(self.basis):
            z[b] = self.T[i][-1]
        return z

    def _to_x(self, z: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        return tuple(z[j] - z[self.n + j] for j in range(self.n))

    # -- phases ------------------------------------------------------------

    def phase_one(self) -> Optional[Tuple[Fraction, ...]]:
        """Drives artificials to zero; returns a certificate when that is impossible."""
        cost = [_ZERO] * self.art_start + [_ONE] * (self.num_cols - self.art_start)
        self._run(cost, range(self.art_start))
        residual = sum((self.T[i][-1] for i, b in enumerate(self.basis) if b >= self.art_start), _ZERO)
        if residual > 0:
            return self._farkas_certificate(cost)

        i = 0
        while i < len(self.basis):
            if self.basis[i] >= self.art_start:
                line = self.T[i]
                col = next((j for j in range(self.art_start) if line[j] != 0), None)
                if col is None:
                    # redundant row
                    del self.T[i]
                    del self.basis[i]
                    continue
                self._pivot(i, col)
            i += 1
        return None

    def _farkas_certificate(self, cost: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        multipliers = []
        for i, r in enumerate(self.rows):
            art = self.art_start + i
            y = sum((cost[b] * self.T[k][art] for k, b in enumerate(self.basis) if cost[b]), _ZERO)
            lam = self.sigma[i] * y
            multipliers.append(-lam if r.relation is Relation.LE else lam)
        certificate = tuple(multipliers)
        verify_certificate(self.rows, self.n, certificate)
        return certificate

    def phase_two(self, objective: Sequence[Fraction], sense: str):
        sign = 1 if sense == "min" else -1
        cost = [_ZERO] * self.num_cols
        for j, c in enumerate(objective):
            cost[j] = sign * c
            cost[self.n + j] = -sign * c
        entering = self._run(cost, range(self.art_start))
        point = self._to_x(self._basic_solution())
        if entering is None:
            return point, None
        dz = [_ZERO] * self.num_cols
        dz[entering] = _ONE
        for i, b in enumerate(self.basis):
            dz[b] = -self.T[i][entering]
        return point, self._to_x(dz)


def verify_point(rows: Sequence[Row], point: Sequence[Fraction]) -> None:
    for i, r in enumerate(rows):
        if not r.holds_at(point):
            raise InternalError(f"solver point violates row {i} ({r.label or 'unlabelled'})")


def verify_certificate(rows: Sequence[Row], num_vars: int, certificate: Sequence[Fraction]) -> None:
    combo = [_ZERO] * num_vars
    bound = _ZERO
    for r, mu in zip(rows, certificate):
        if r.relation is not Relation.EQ and mu < 0:
            raise InternalError("negative multiplier on an inequality row")
        coeffs, rhs = r.normalized()
        if mu:
            for j, c in enumerate(coeffs):
                combo[j] += mu * c
            bound += mu * rhs
    if any(combo) or bound <= 0:
        raise InternalError("infeasibility certificate does not combine to a contradiction")


def _verify_ray(lp: LinearProgram, rows: Sequence[Row], ray: Sequence[Fraction]) -> None:
    for i, r in enumerate(rows):
        if not r.recedes_along(ray):
            raise InternalError(f"unbounded ray leaves row {i}")
    gain = dot(lp.objective, ray)
    if (lp.sense == "min" and gain >= 0) or (lp.sense == "max" and gain <= 0):
        raise InternalError("unbounded ray does not improve the objective")


def lp_feasible(lp: LinearProgram, max_pivots: Optional[int] = None) -> LPResult:
    """Find any point satisfying every row, or a Farkas certificate."""
    solver = _Simplex(lp, max_pivots or const.MAX_PIVOTS)
    _LOGGER.debug(f"feasibility: {lp.num_vars} vars, {len(solver.rows)} rows")
    certificate = solver.phase_one()
    if certificate is not None:
        _LOGGER.debug(f"infeasible after {solver.pivots} pivots")
        return LPResult(LPStatus.INFEASIBLE, certificate=certificate, pivots=solver.pivots)
    point = solver._to_x(solver._basic_solution())
    verify_point(solver.rows, point)
    return LPResult(LPStatus.FEASIBLE, point=point, pivots=solver.pivots)


def lp_optimize(lp: LinearProgram, max_pivots: Optional[int] = None) -> LPResult:
    """Optimal vertex under Bland's rule, an improving ray, or a certificate."""
    if lp.objective is None:
        raise InvalidInput("lp_optimize requires an objective")
    solver = _Simplex(lp, max_pivots or const.MAX_PIVOTS)
    _LOGGER.debug(f"optimize ({lp.sense}): {lp.num_vars} vars, {len(solver.rows)} rows")
    certificate = solver.phase_one()
    if certificate is not None:
        return LPResult(LPStatus.INFEASIBLE, certificate=certificate, pivots=solver.pivots)
    point, ray = solver.phase_two(lp.objective, lp.sense)
    verify_point(solver.rows, point)
    if ray is not None:
        _verify_ray(lp, solver.rows, ray)
        return LPResult(LPStatus.UNBOUNDED, point=point, ray=ray, pivots=solver.pivots)
    _LOGGER.debug(f"optimal after {solver.pivots} pivots")
    return LPResult(LPStatus.OPTIMAL, point=point, value=dot(lp.objective, point), pivots=solver.pivots)


def active_rows(lp: LinearProgram, certificate: Sequence[Fraction]) -> List[str]:
    """Labels of the rows a certificate actually uses."""
    rows = lp.all_rows()
    return [r.label or f"row{i}" for i, (r, mu) in enumerate(zip(rows, certificate)) if mu != 0]
