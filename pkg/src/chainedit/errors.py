"""Exception hierarchy shared across the package.

Every domain failure raises a ChainEditError subclass so callers (CLI,
service) can separate domain errors from programming errors and usage
errors.
"""

from __future__ import annotations


class ChainEditError(Exception):
    """Base class for all domain errors raised by this package."""


class IngestError(ChainEditError):
    """A triple or label file could not be parsed.  Message names the line."""


class CatalogError(ChainEditError):
    """A relation-metadata file or entry is invalid."""


class UnknownRelationError(ChainEditError):
    """An operation referenced a relation the store has no instances of."""

    def __init__(self, relation: str, context: str = "") -> None:
        self.relation = relation
        msg = f"unknown relation {relation!r}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class PathSyntaxError(ChainEditError):
    """A dot-path expression failed to parse.

    `offset` is the zero-based character offset of the offending token.
    """

    def __init__(self, message: str, offset: int) -> None:
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


class RulesetError(ChainEditError):
    """A ruleset or candidate file is malformed.  Message names the entry."""


class RulesetIntegrityError(ChainEditError):
    """A directive rule violates a structural invariant."""


class NotAutoDerivableError(ChainEditError):
    """Signal: the rule shape has no automatic directive derivation.

    Not a failure.  Callers route these candidates to manual authoring.
    """

    def __init__(self, rule: object, reason: str) -> None:
        self.rule = rule
        self.reason = reason
        super().__init__(reason)


class MissingRelationMetaError(ChainEditError):
    """An operation required RelationMeta that the catalog does not have."""

    def __init__(self, relation: str) -> None:
        self.relation = relation
        super().__init__(f"no relation metadata for {relation!r}")


class OracleTransportError(ChainEditError):
    """The oracle endpoint could not be reached or kept failing.

    Distinct from an oracle *answering* that it does not know a fact;
    transport failures abort the surrounding operation.
    """


class ConflictError(ChainEditError):
    """Two edits in one batch disagree under conflict policy `error`."""


class BatchFormatError(ChainEditError):
    """An edit-batch file or payload violates the batch wire format."""


class DatasetSchemaError(ChainEditError):
    """A benchmark case file violates the documented schema."""


class VariantError(ChainEditError):
    """A dataset variant transformation was applied to an ineligible input."""


class ReportError(ChainEditError):
    """An alignment report or decision log could not be read."""


class ProtocolError(ChainEditError):
    """A subject-model protocol exchange violated the wire contract."""
