"""
JSON instance documents: parsing, validation and serialization.

Validation runs in two passes. The structural pass checks the document
against ``schemas/instance.schema.json`` (JSON Schema draft 2020-12) and
collects every violation with its JSON path, such as
``$.structure.operations[0].table``. The semantic pass then builds the
engine objects and adds what a schema cannot express: table sizes, index
ranges, exact rational parsing and references between sections. Both
passes report together as one ``SchemaError``.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from jsonschema import Draft202012Validator

import const
from algebra import Carrier, Operation, OperationFamily
from convexity import Subset
from errors import InvalidInput, SchemaError
from functions import FunctionTable, OrderedRange
from order import FinitePoset, Norm, RationalCone
from rational_utils import format_matrix, format_rational, format_vector, parse_rational
from support import DeltaInstance, RiInstance

_LOGGER = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parent / "schemas" / "instance.schema.json"
INSTANCE_SCHEMA: Dict[str, Any] = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))

_VALIDATOR = Draft202012Validator(INSTANCE_SCHEMA)


class _Violation(Exception):
    def __init__(self, path: str, message: str):
        super().__init__(message)
        self.path = path
        self.message = message


class _Unavailable(Exception):
    """A referenced section exists but failed validation; its own violation already stands."""


class _Collector:
    """Runs section parsers and records their violations instead of stopping."""

    def __init__(self, violations: Optional[List[Dict[str, str]]] = None):
        self.violations: List[Dict[str, str]] = list(violations or [])

    def add(self, path: str, message: str) -> None:
        self.violations.append({"path": path, "message": message})

    def clean(self, path: str) -> bool:
        """No violation was recorded at or below ``path``."""
        for v in self.violations:
            seen = v["path"]
            if seen == path or seen.startswith(path + ".") or seen.startswith(path + "["):
                return False
        return True

    def run(self, path: str, parser: Callable[..., Any], *args) -> Any:
        try:
            return parser(*args)
        except _Unavailable:
            pass
        except _Violation as err:
            self.add(err.path, err.message)
        except InvalidInput as err:
            self.add(path, err.message)
        except (ValueError, TypeError) as err:
            self.add(path, str(err))
        return None


def schema_violations(data: Any) -> List[Dict[str, str]]:
    """Structural violations of ``data`` against the instance schema, one per offending location."""
    out: List[Dict[str, str]] = []
    for error in sorted(_VALIDATOR.iter_errors(data), key=lambda e: e.json_path):
        if error.validator == "additionalProperties":
            known = error.schema.get("properties", {})
            out.extend({"path": f"{error.json_path}.{key}", "message": "unknown key"} for key in error.instance if key not in known)
        elif error.validator == "required":
            out.extend(
                {"path": f"{error.json_path}.{key}", "message": "required key is missing"}
                for key in error.validator_value
                if key not in error.instance
            )
        else:
            out.append({"path": error.json_path, "message": error.message})
    unique: List[Dict[str, str]] = []
    for v in out:
        if v not in unique:
            unique.append(v)
    return unique


# --- task blocks -------------------------------------------------------------


@dataclass(frozen=True)
class SupportTask:
    f: str
    D: Subset
    p: Optional[int] = None
    D_name: Optional[str] = None


@dataclass(frozen=True)
class SubadditiveTask:
    operation: str
    f: FunctionTable
    p: int


@dataclass(frozen=True)
class SublinearTask:
    sample: tuple
    f: tuple
    cone: RationalCone
    p: tuple
    multipliers: Optional[tuple] = None
    cone_name: Optional[str] = None


@dataclass(frozen=True)
class Mt2Task:
    a: tuple
    A: tuple
    cone: RationalCone
    grid: tuple
    modulus: Optional[int] = None
    f: Optional[tuple] = None
    p: Optional[int] = None
    n_max: Optional[int] = None
    cone_name: Optional[str] = None


@dataclass(frozen=True)
class DeltaTask:
    instance: DeltaInstance
    candidate: Optional[Dict[str, tuple]] = None


@dataclass
class InstanceDocument:
    schema_version: str
    family: Optional[OperationFamily] = None
    range: Optional[OrderedRange] = None
    sets: Dict[str, Subset] = field(default_factory=dict)
    functions: Dict[str, FunctionTable] = field(default_factory=dict)
    cones: Dict[str, RationalCone] = field(default_factory=dict)
    tasks: Dict[str, Any] = field(default_factory=dict)
    range_cone_name: Optional[str] = None

    def require_family(self) -> OperationFamily:
        if self.family is None:
            raise SchemaError([{"path": "$.structure", "message": "this command needs a structure block"}])
        return self.family

    def require_range(self) -> OrderedRange:
        if self.range is None:
            raise SchemaError([{"path": "$.range", "message": "this command needs a range block"}])
        return self.range

    def require_task(self, name: str) -> Any:
        if name not in self.tasks:
            raise SchemaError([{"path": f"$.{name}", "message": f"this command needs a {name} block"}])
        return self.tasks[name]

    def subset(self, name: str) -> Subset:
        if name not in self.sets:
            raise SchemaError([{"path": f"$.sets.{name}", "message": f"unknown set '{name}'"}])
        return self.sets[name]

    def function(self, name: str) -> FunctionTable:
        if name not in self.functions:
            raise SchemaError([{"path": f"$.functions.{name}", "message": f"unknown function '{name}'"}])
        return self.functions[name]

    def cone(self, name: str) -> RationalCone:
        if name not in self.cones:
            raise SchemaError([{"path": f"$.cones.{name}", "message": f"unknown cone '{name}'"}])
        return self.cones[name]



# --- primitive parsers -------------------------------------------------------
# The structural pass has already run; these only see schema-valid shapes.


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _Violation(path, "expected an integer")
    return value


def _rational(value: Any, path: str):
    try:
        return parse_rational(value)
    except ValueError as err:
        raise _Violation(path, str(err)) from None


def _vector(value: Any, path: str, length: Optional[int] = None) -> tuple:
    if not isinstance(value, list):
        value = [value]
    out = tuple(_rational(v, f"{path}[{i}]") for i, v in enumerate(value))
    if length is not None and len(out) != length:
        raise _Violation(path, f"expected {length} entries, got {len(out)}")
    return out


def _vectors(values: List[Any], path: str, length: Optional[int] = None) -> tuple:
    return tuple(_vector(v, f"{path}[{i}]", length) for i, v in enumerate(values))


def _matrix(value: List[Any], path: str, dim: Optional[int] = None) -> tuple:
    rows = _vectors(value, path)
    d = dim if dim is not None else len(rows)
    if len(rows) != d or any(len(r) != d for r in rows):
        raise _Violation(path, f"expected a {d}x{d} matrix")
    return rows


def _index(value: int, size: int, path: str) -> int:
    if value >= size:
        raise _Violation(path, f"element {value} is outside a carrier of size {size}")
    return int(value)


def _index_list(value: List[int], size: int, path: str) -> List[int]:
    return [_index(x, size, f"{path}[{i}]") for i, x in enumerate(value)]


def _flatten(value: Any, path: str, size: int, depth: int) -> List[int]:
    if depth == 0:
        return [_int(value, path)]
    if not isinstance(value, list) or len(value) != size:
        raise _Violation(path, f"expected a nested array of shape {size}^{depth}")
    out: List[int] = []
    for i, v in enumerate(value):
        out.extend(_flatten(v, f"{path}[{i}]", size, depth - 1))
    return out


def _table(value: List[Any], size: int, arity: int, path: str) -> List[int]:
    if value and not isinstance(value[0], list):
        if len(value) != size**arity:
            raise _Violation(path, f"table has {len(value)} entries, expected {size}^{arity}={size ** arity}")
        return [_int(v, f"{path}[{i}]") for i, v in enumerate(value)]
    return _flatten(value, path, size, arity)


def _operations(value: List[Dict[str, Any]], size: int, path: str, max_cells: Optional[int]) -> Dict[str, Operation]:
    ops: Dict[str, Operation] = {}
    for i, body in enumerate(value):
        where = f"{path}[{i}]"
        name = body["name"]
        if name in ops:
            raise _Violation(f"{where}.name", f"duplicate operation '{name}'")
        arity = int(body["arity"])
        flat = _table(body["table"], size, arity, f"{where}.table")
        try:
            ops[name] = Operation(size, arity, flat, max_cells)
        except InvalidInput as err:
            raise _Violation(f"{where}.table", err.message) from None
    return ops


def _section(raw: Dict[str, Any], key: str) -> Dict[str, Any]:
    body = raw.get(key, {})
    return body if isinstance(body, dict) else {}


# --- references between sections ---------------------------------------------


def _family_for(doc: InstanceDocument, raw: Dict[str, Any], block: str) -> OperationFamily:
    if doc.family is not None:
        return doc.family
    if "structure" in raw:
        raise _Unavailable()
    raise _Violation("$.structure", f"a {block} block needs a structure")


def _function_ref(name: str, doc: InstanceDocument, raw: Dict[str, Any], path: str) -> FunctionTable:
    if name in doc.functions:
        return doc.functions[name]
    if name in _section(raw, "functions"):
        raise _Unavailable()
    raise _Violation(path, f"unknown function '{name}'")


def _cone_ref(value: Any, doc: InstanceDocument, raw: Dict[str, Any], path: str) -> RationalCone:
    if not isinstance(value, str):
        return _parse_cone(value, path)
    if value in doc.cones:
        return doc.cones[value]
    if value in _section(raw, "cones"):
        raise _Unavailable()
    raise _Violation(path, f"unknown cone '{value}'")


def _set_ref(value: Any, doc: InstanceDocument, raw: Dict[str, Any], size: int, path: str) -> Subset:
    if not isinstance(value, str):
        return Subset.from_indices(size, _index_list(value, size, path))
    if value in doc.sets:
        return doc.sets[value]
    if value in _section(raw, "sets"):
        raise _Unavailable()
    raise _Violation(path, f"unknown set '{value}'")


# --- section parsers ---------------------------------------------------------


def _parse_structure(body: Dict[str, Any], max_cells: Optional[int]) -> OperationFamily:
    size = int(body["carrier_size"])
    labels = body.get("labels")
    carrier = Carrier(size, tuple(labels) if labels is not None else None)
    return OperationFamily(carrier, _operations(body["operations"], size, "$.structure.operations", max_cells))


def _parse_cone(body: Dict[str, Any], path: str) -> RationalCone:
    kind = body["kind"]
    if kind == "orthant":
        return RationalCone.orthant(int(body["dim"]))
    if kind == "polyhedral":
        return RationalCone.polyhedral(_vectors(body["generators"], f"{path}.generators"))
    eps = _rational(body.get("epsilon", 1), f"{path}.epsilon")
    return RationalCone.lorenz(eps, int(body["dim"]), body.get("norm", "l1"))


def _parse_poset(body: Dict[str, Any], path: str) -> FinitePoset:
    kind = body["kind"]
    labels = body.get("labels")
    if kind == "chain":
        return FinitePoset.chain(int(body["size"]))
    if kind == "antichain":
        return FinitePoset.antichain(int(body["size"]))
    if kind == "relation":
        size = int(body["size"])
        pairs = [tuple(_index_list(pair, size, f"{path}.pairs[{i}]")) for i, pair in enumerate(body.get("pairs", []))]
        return FinitePoset.from_relation(size, pairs, labels)
    if kind == "matrix":
        return FinitePoset(body["leq"], labels)
    return FinitePoset.divisibility([int(v) for v in body["values"]])


def _parse_range(body: Dict[str, Any], doc: InstanceDocument, raw: Dict[str, Any], max_cells: Optional[int]) -> OrderedRange:
    path = "$.range"
    if body["flavor"] == "finite":
        poset = _parse_poset(body["poset"], f"{path}.poset")
        ops = _operations(body["operations"], poset.size, f"{path}.operations", max_cells)
        return OrderedRange.finite(poset, OperationFamily(Carrier(poset.size), ops))
    cone = _cone_ref(body["cone"], doc, raw, f"{path}.cone")
    dim = int(body.get("dim", cone.dim))
    if "coefficients" in body:
        if dim != 1:
            raise _Violation(f"{path}.coefficients", "scalar coefficients need dim 1")
        parsed = {name: _vector(c, f"{path}.coefficients.{name}") for name, c in body["coefficients"].items()}
        return OrderedRange.scalar(parsed, cone)
    parsed = {}
    for name, mats in body["matrices"].items():
        parsed[name] = [_matrix(m, f"{path}.matrices.{name}[{i}]", dim) for i, m in enumerate(mats)]
    return OrderedRange.linear(dim, cone, parsed)


def _parse_values(value: List[Any], path: str, rng: Optional[OrderedRange]) -> FunctionTable:
    if rng is not None and rng.flavor == "finite":
        return FunctionTable.elements([_int(v, f"{path}[{i}]") for i, v in enumerate(value)])
    dim = rng.dim if rng is not None else None
    return FunctionTable(_vectors(value, path, dim))


def _parse_support(body: Dict[str, Any], doc: InstanceDocument, raw: Dict[str, Any]) -> SupportTask:
    path = "$.support"
    size = _family_for(doc, raw, "support").size
    f_name = body["f"]
    _function_ref(f_name, doc, raw, f"{path}.f")
    D_value = body.get("D", [])
    D = _set_ref(D_value, doc, raw, size, f"{path}.D")
    p = body.get("p")
    if p is not None:
        p = _index(p, size, f"{path}.p")
    return SupportTask(f_name, D, p, D_value if isinstance(D_value, str) else None)


def _parse_subadditive(body: Dict[str, Any], doc: InstanceDocument, raw: Dict[str, Any]) -> SubadditiveTask:
    path = "$.subadditive"
    family = _family_for(doc, raw, "subadditive")
    operation = body.get("operation", family.indices[0])
    if operation not in family:
        raise _Violation(f"{path}.operation", f"unknown operation '{operation}'")
    f_value = body["f"]
    if isinstance(f_value, str):
        f = _function_ref(f_value, doc, raw, f"{path}.f")
    else:
        f = _parse_values(f_value, f"{path}.f", None)
    p = _index(body.get("p", 0), family.size, f"{path}.p")
    return SubadditiveTask(operation, f, p)


def _parse_sublinear(body: Dict[str, Any], doc: InstanceDocument, raw: Dict[str, Any]) -> SublinearTask:
    path = "$.sublinear"
    cone_value = body["cone"]
    multipliers = body.get("multipliers")
    return SublinearTask(
        _vectors(body["sample"], f"{path}.sample"),
        _vectors(body["f"], f"{path}.f"),
        _cone_ref(cone_value, doc, raw, f"{path}.cone"),
        _vector(body["p"], f"{path}.p"),
        _vector(multipliers, f"{path}.multipliers") if multipliers is not None else None,
        cone_value if isinstance(cone_value, str) else None,
    )


def _parse_mt2(body: Dict[str, Any], doc: InstanceDocument, raw: Dict[str, Any]) -> Mt2Task:
    path = "$.mt2"
    a_maps = tuple(_matrix(m, f"{path}.a[{i}]") for i, m in enumerate(body["a"]))
    A_maps = tuple(_matrix(m, f"{path}.A[{i}]") for i, m in enumerate(body["A"]))
    cone_value = body["cone"]
    cone = _cone_ref(cone_value, doc, raw, f"{path}.cone")
    points = _vectors(body["grid"], f"{path}.grid")
    f = body.get("f")
    if f is not None:
        f = _vectors(f, f"{path}.f")
    p = body.get("p")
    if p is not None:
        p = _index(p, len(points), f"{path}.p")
    modulus, n_max = body.get("modulus"), body.get("n_max")
    return Mt2Task(
        a_maps,
        A_maps,
        cone,
        points,
        int(modulus) if modulus is not None else None,
        f,
        p,
        int(n_max) if n_max is not None else None,
        cone_value if isinstance(cone_value, str) else None,
    )


def _parse_ri(body: Dict[str, Any], doc: InstanceDocument, raw: Dict[str, Any]) -> RiInstance:
    path = "$.ri"
    dim = int(body["dim"])
    halfspaces = tuple(
        (_vector(h["normal"], f"{path}.halfspaces[{i}].normal", dim), _rational(h["bound"], f"{path}.halfspaces[{i}].bound"))
        for i, h in enumerate(body["halfspaces"])
    )
    a = _matrix(body["a_matrix"], f"{path}.a_matrix", dim)
    p = _vector(body["p"], f"{path}.p", dim)
    x = _vector(body["x"], f"{path}.x", dim)
    return RiInstance(dim, halfspaces, a, p, x, int(body.get("n_max", const.RI_N_MAX)))


def _parse_delta(body: Dict[str, Any], doc: InstanceDocument, raw: Dict[str, Any]) -> DeltaTask:
    path = "$.delta"
    instance = DeltaInstance(
        _vectors(body["sample"], f"{path}.sample"),
        _rational(body["s"], f"{path}.s"),
        _rational(body["t"], f"{path}.t"),
        _vectors(body["F"], f"{path}.F"),
        _vector(body["f"], f"{path}.f"),
        _vector(body["p"], f"{path}.p"),
        Norm(body.get("norm", "l1")),
    )
    candidate = body.get("candidate")
    if candidate is not None:
        candidate = {"A": _vectors(candidate["A"], f"{path}.candidate.A"), "a": _vector(candidate["a"], f"{path}.candidate.a")}
    return DeltaTask(instance, candidate)


_TASK_PARSERS = {
    "support": _parse_support,
    "subadditive": _parse_subadditive,
    "sublinear": _parse_sublinear,
    "mt2": _parse_mt2,
    "ri": _parse_ri,
    "delta": _parse_delta,
}


# --- public API --------------------------------------------------------------


def parse_document(data: Any, max_cells: Optional[int] = None) -> InstanceDocument:
    """Validate an already-decoded JSON value."""
    collector = _Collector(schema_violations(data))
    if not isinstance(data, dict):
        raise SchemaError(collector.violations)
    doc = InstanceDocument(schema_version=const.SCHEMA_VERSION)

    if "structure" in data and collector.clean("$.structure"):
        doc.family = collector.run("$.structure", _parse_structure, data["structure"], max_cells)

    for name, body in _section(data, "cones").items():
        where = f"$.cones.{name}"
        if collector.clean(where):
            cone = collector.run(where, _parse_cone, body, where)
            if cone is not None:
                doc.cones[name] = cone

    if "range" in data and collector.clean("$.range"):
        doc.range = collector.run("$.range", _parse_range, data["range"], doc, data, max_cells)
        cone_value = data["range"].get("cone")
        doc.range_cone_name = cone_value if isinstance(cone_value, str) else None

    sets = _section(data, "sets")
    if sets and "structure" not in data:
        collector.add("$.sets", "sets need a structure block")
    elif doc.family is not None:
        for name, members in sets.items():
            where = f"$.sets.{name}"
            if collector.clean(where):
                indices = collector.run(where, _index_list, members, doc.family.size, where)
                if indices is not None:
                    doc.sets[name] = Subset.from_indices(doc.family.size, indices)

    range_pending = "range" in data and doc.range is None
    for name, values in _section(data, "functions").items():
        where = f"$.functions.{name}"
        if not collector.clean(where) or range_pending:
            continue
        table = collector.run(where, _parse_values, values, where, doc.range)
        if table is None:
            continue
        if doc.family is not None and table.size != doc.family.size:
            collector.add(where, f"function has {table.size} values, carrier has {doc.family.size} elements")
            continue
        doc.functions[name] = table

    for name, parser in _TASK_PARSERS.items():
        if name in data and collector.clean(f"$.{name}"):
            task = collector.run(f"$.{name}", parser, data[name], doc, data)
            if task is not None:
                doc.tasks[name] = task

    if collector.violations:
        _LOGGER.debug(f"schema validation found {len(collector.violations)} violation(s)")
        raise SchemaError(collector.violations)
    return doc


def parse_instance(text: str, max_cells: Optional[int] = None) -> InstanceDocument:
    """Parse and validate a UTF-8 JSON instance document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError([{"path": "$", "message": f"invalid JSON: {err.msg} at line {err.lineno} column {err.colno}"}]) from None
    return parse_document(data, max_cells)


def load_instance(path: Path, max_cells: Optional[int] = None) -> InstanceDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        raise InvalidInput(f"cannot read {path}: {err}", {"file": str(path)}) from None
    return parse_instance(text, max_cells)


# --- serialization -----------------------------------------------------------


def _serialize_operations(family: OperationFamily) -> List[Dict[str, Any]]:
    return [{"name": name, "arity": op.arity, "table": op.table.tolist()} for name, op in family.items()]


def serialize_cone(cone: RationalCone) -> Dict[str, Any]:
    if cone.kind == "lorenz":
        return {"kind": "lorenz", "epsilon": format_rational(cone.epsilon), "dim": cone.base_dim, "norm": cone.norm.value}
    if cone.is_orthant() and len(cone.generator_list) == cone.dim:
        return {"kind": "orthant", "dim": cone.dim}
    return {"kind": "polyhedral", "generators": [format_vector(g) for g in cone.generator_list]}


def _serialize_poset(poset: FinitePoset) -> Dict[str, Any]:
    body: Dict[str, Any] = {"kind": "matrix", "leq": poset.matrix.tolist()}
    if poset.labels is not None:
        body["labels"] = list(poset.labels)
    return body


def _serialize_range(rng: OrderedRange, cone_name: Optional[str]) -> Dict[str, Any]:
    if rng.flavor == "finite":
        return {"flavor": "finite", "poset": _serialize_poset(rng.poset), "operations": _serialize_operations(rng.ops)}
    return {
        "flavor": "linear",
        "dim": rng.dim,
        "cone": cone_name if cone_name is not None else serialize_cone(rng.cone),
        "matrices": {name: [format_matrix(m) for m in mats] for name, mats in rng.matrices.items()},
    }


def _serialize_values(table: FunctionTable) -> List[Any]:
    return [v if isinstance(v, int) else format_vector(v) for v in table.values]


def _cone_or_name(cone: RationalCone, name: Optional[str]) -> Any:
    return name if name is not None else serialize_cone(cone)


def serialize_instance(doc: InstanceDocument) -> Dict[str, Any]:
    """The inverse of ``parse_document`` up to notation (flat vs nested tables, named vs inline references)."""
    out: Dict[str, Any] = {"schema_version": doc.schema_version}
    if doc.family is not None:
        structure: Dict[str, Any] = {"carrier_size": doc.family.size, "operations": _serialize_operations(doc.family)}
        if doc.family.carrier.labels is not None:
            structure["labels"] = list(doc.family.carrier.labels)
        out["structure"] = structure
    if doc.cones:
        out["cones"] = {name: serialize_cone(c) for name, c in doc.cones.items()}
    if doc.range is not None:
        out["range"] = _serialize_range(doc.range, doc.range_cone_name)
    if doc.sets:
        out["sets"] = {name: s.indices() for name, s in doc.sets.items()}
    if doc.functions:
        out["functions"] = {name: _serialize_values(t) for name, t in doc.functions.items()}

    for name, task in doc.tasks.items():
        if isinstance(task, SupportTask):
            body: Dict[str, Any] = {"f": task.f, "D": task.D_name if task.D_name is not None else task.D.indices()}
            if task.p is not None:
                body["p"] = task.p
        elif isinstance(task, SubadditiveTask):
            body = {"operation": task.operation, "f": _serialize_values(task.f), "p": task.p}
        elif isinstance(task, SublinearTask):
            body = {
                "sample": [format_vector(x) for x in task.sample],
                "f": [format_vector(v) for v in task.f],
                "cone": _cone_or_name(task.cone, task.cone_name),
                "p": format_vector(task.p),
            }
            if task.multipliers is not None:
                body["multipliers"] = format_vector(task.multipliers)
        elif isinstance(task, Mt2Task):
            body = {
                "a": [format_matrix(m) for m in task.a],
                "A": [format_matrix(m) for m in task.A],
                "cone": _cone_or_name(task.cone, task.cone_name),
                "grid": [format_vector(x) for x in task.grid],
            }
            for key in ("modulus", "p", "n_max"):
                if getattr(task, key) is not None:
                    body[key] = getattr(task, key)
            if task.f is not None:
                body["f"] = [format_vector(v) for v in task.f]
        elif isinstance(task, RiInstance):
            body = {
                "dim": task.dim,
                "halfspaces": [{"normal": format_vector(h), "bound": format_rational(c)} for h, c in task.halfspaces],
                "a_matrix": format_matrix(task.a),
                "p": format_vector(task.p),
                "x": format_vector(task.x),
                "n_max": task.n_max,
            }
        elif isinstance(task, DeltaTask):
            inst = task.instance
            body = {
                "sample": [format_vector(x) for x in inst.sample],
                "s": format_rational(inst.s),
                "t": format_rational(inst.t),
                "F": [format_vector(v) for v in inst.F],
                "f": format_vector(inst.f),
                "p": format_vector(inst.p),
                "norm": inst.norm.value,
            }
            if task.candidate is not None:
                body["candidate"] = {"A": [format_vector(v) for v in task.candidate["A"]], "a": format_vector(task.candidate["a"])}
        else:
            continue
        out[name] = body
    return out


def dump_instance(doc: InstanceDocument) -> str:
    return json.dumps(serialize_instance(doc), indent=2, sort_keys=True)


def parse_index_list(text: str, size: int) -> Subset:
    """``"0,2,3"`` from the command line, as a subset of the carrier."""
    try:
        indices = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidInput(f"'{text}' is not a comma separated index list") from None
    return Subset.from_indices(size, indices)


def parse_vector_arg(text: str) -> Sequence:
    try:
        return tuple(parse_rational(part) for part in text.split(",") if part.strip())
    except ValueError as err:
        raise InvalidInput(str(err)) from None
