"""Dot-path expressions over edit placeholders.

Grammar: an optional single inverse prefix (`rel.`), one root token
(`S`, `O`, or `X`), then forward suffix steps (`.rel`).  `S.birthplace`
is the birthplace of the edited subject; `father.S` is the entity whose
father is the edited subject.  Steps resolve left to right.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PathSyntaxError
from .mining import BodyStep, FORWARD, INVERSE, forward, inverse

ROOTS = ("S", "O", "X")


@dataclass(frozen=True)
class PathExpr:
    root: str
    steps: tuple[BodyStep, ...] = ()

    def __post_init__(self) -> None:
        if self.root not in ROOTS:
            raise ValueError(f"root must be one of {ROOTS}, got {self.root!r}")
        for i, step in enumerate(self.steps):
            if step.direction == INVERSE and i != 0:
                raise ValueError("an inverse step is only supported as the single leading prefix")
            if "." in step.relation or step.relation in ROOTS:
                raise ValueError(f"invalid relation token {step.relation!r}")

    @property
    def is_bare_root(self) -> bool:
        return not self.steps


def _tokenize(text: str) -> list[tuple[int, str]]:
    tokens: list[tuple[int, str]] = []
    start = 0
    for i, ch in enumerate(text):
        if ch == ".":
            tokens.append((start, text[start:i]))
            start = i + 1
    tokens.append((start, text[start:]))
    return tokens


def parse_path(text: str) -> PathExpr:
    """Parse a dot-path; raises PathSyntaxError with a character offset."""
    if not text:
        raise PathSyntaxError("empty path expression", 0)
    tokens = _tokenize(text)
    for offset, token in tokens:
        if not token:
            raise PathSyntaxError("empty path segment", offset)
    root_positions = [i for i, (_, token) in enumerate(tokens) if token in ROOTS]
    if not root_positions:
        raise PathSyntaxError("missing root token (expected S, O, or X)", 0)
    root_at = root_positions[0]
    if root_at > 1:
        raise PathSyntaxError(
            "at most one inverse prefix is allowed before the root", tokens[1][0]
        )
    if len(root_positions) > 1:
        raise PathSyntaxError("unexpected extra root token", tokens[root_positions[1]][0])
    steps: list[BodyStep] = []
    if root_at == 1:
        steps.append(inverse(tokens[0][1]))
    root = tokens[root_at][1]
    steps.extend(forward(token) for _, token in tokens[root_at + 1 :])
    return PathExpr(root, tuple(steps))


def render_path(expr: PathExpr) -> str:
    """Canonical text form; parse_path(render_path(e)) == e for all valid e."""
    if expr.steps and expr.steps[0].direction == INVERSE:
        out = f"{expr.steps[0].relation}.{expr.root}"
        rest = expr.steps[1:]
    else:
        out = expr.root
        rest = expr.steps
    for step in rest:
        out += f".{step.relation}"
    return out
