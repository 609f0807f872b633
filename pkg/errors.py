"""Exception hierarchy shared by every module.

Each error carries an optional ``witness`` mapping that the CLI serializes
verbatim, so the values stored there must already be JSON friendly
(ints, strings, lists, dicts). Rationals are stored as ``"p/q"`` strings.
"""

from typing import Any, Dict, List, Optional

from const import EXIT_INTERNAL_ERROR, EXIT_INVALID_INPUT, EXIT_PREDICATE_FALSE, EXIT_RESOURCE_LIMIT


class OmegaError(Exception):
    """Base class for all engine errors."""

    exit_code = EXIT_PREDICATE_FALSE
    kind = "error"

    def __init__(self, message: str = "", witness: Optional[Dict[str, Any]] = None):
        super().__init__(message or self.kind)
        self.message = message or self.kind
        self.witness = witness or {}

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"error": self.kind, "message": self.message}
        if self.witness:
            payload["witness"] = self.witness
        return payload


# --- invalid input (exit 2) -------------------------------------------------


class InvalidInput(OmegaError):
    exit_code = EXIT_INVALID_INPUT
    kind = "InvalidInput"


class UnknownIndex(InvalidInput):
    kind = "UnknownIndex"


class ArityMismatch(InvalidInput):
    kind = "ArityMismatch"


class OutOfRange(InvalidInput):
    kind = "OutOfRange"


class DimensionMismatch(InvalidInput):
    kind = "DimensionMismatch"


class FamilyMismatch(InvalidInput):
    kind = "FamilyMismatch"


class NotAPartialOrder(InvalidInput):
    kind = "NotAPartialOrder"


class SchemaError(InvalidInput):
    """One or more schema violations, each tagged with a JSON path."""

    kind = "SchemaError"

    def __init__(self, violations: List[Dict[str, str]]):
        self.violations = violations
        first = violations[0] if violations else {"path": "$", "message": "invalid document"}
        super().__init__(f"{first['path']}: {first['message']}", {"violations": violations})

    @property
    def path(self) -> str:
        return self.violations[0]["path"] if self.violations else "$"


# --- resource limits (exit 3) ------------------------------------------------


class ResourceLimit(OmegaError):
    exit_code = EXIT_RESOURCE_LIMIT
    kind = "ResourceLimit"


# --- predicate false / refuted (exit 1) -------------------------------------


class Refuted(OmegaError):
    kind = "Refuted"


class EmptySet(Refuted):
    kind = "EmptySet"


class NotAChain(Refuted):
    kind = "NotAChain"


class NotPointed(Refuted):
    kind = "NotPointed"


class NotSalient(Refuted):
    kind = "NotSalient"


class NotClosed(Refuted):
    kind = "NotClosed"


class InvalidStructure(Refuted):
    """Semigroup data that is not an abelian monoid."""

    kind = "InvalidStructure"


class NotSharp(Refuted):
    kind = "NotSharp"


class UnsupportedNorm(Refuted):
    kind = "UnsupportedNorm"


class NoSupremum(Refuted):
    kind = "NoSupremum"


class NoInfimum(Refuted):
    kind = "NoInfimum"


class NotInterior(Refuted):
    kind = "NotInterior"


class NotReflexive(Refuted):
    kind = "NotReflexive"


class NotSubadditive(Refuted):
    kind = "NotSubadditive"


class NotSublinear(Refuted):
    kind = "NotSublinear"


class NotRelativeInterior(Refuted):
    kind = "NotRelativeInterior"


class NotDeltaConvex(Refuted):
    kind = "NotDeltaConvex"


class HypothesisFailure(Refuted):
    kind = "HypothesisFailure"

    def __init__(self, name: str, witness: Optional[Dict[str, Any]] = None, failures: Optional[List[str]] = None):
        self.name = name
        self.failures = failures or [name]
        super().__init__(f"hypothesis {name} failed", {"hypothesis": name, "failed": self.failures, **(witness or {})})


class ConditionFailure(Refuted):
    kind = "ConditionFailure"

    def __init__(self, condition: str, witness: Optional[Dict[str, Any]] = None):
        self.condition = condition
        super().__init__(f"condition ({condition}) failed", {"condition": condition, **(witness or {})})


class Infeasible(Refuted):
    """LP infeasibility with a Farkas-style certificate."""

    kind = "Infeasible"

    def __init__(self, message: str = "", certificate: Optional[List[str]] = None, witness: Optional[Dict[str, Any]] = None):
        self.certificate = certificate
        detail = dict(witness or {})
        if certificate is not None:
            detail["certificate"] = certificate
        super().__init__(message or "linear system is infeasible", detail)


class TheoremViolation(Refuted):
    """An infeasible support LP on an instance whose hypotheses all passed."""

    kind = "TheoremViolation"


class InternalError(OmegaError):
    """A solver result failed exact re-substitution, or the engine crashed."""

    exit_code = EXIT_INTERNAL_ERROR
    kind = "InternalError"
