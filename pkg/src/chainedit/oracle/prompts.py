"""Chat message construction for knowledge queries and rule judging."""

from __future__ import annotations

QUERY_SYSTEM_PROMPT = "Complete the sentence with only the name of the correct entity."

JUDGE_SYSTEM_PROMPT = (
    "You will be shown a rule about relations between entities. State your own "
    "supporting or opposing rule as a one-sentence rationale, then end with a "
    "final line of the form 'Answer: <label>', where <label> is one of: "
    "True, Usually True, Sometimes True, False, Uncertain."
)

# Fixed few-shot exchange prepended to every judging request.
JUDGE_FEW_SHOT: tuple[tuple[str, str], ...] = (
    (
        "When the father of X is Y, then the sibling of X is the child of Y.",
        "The sibling of an person is his father's child. Answer: True",
    ),
    (
        "When the country of X is Y, then the continent of X is the continent of Y.",
        "The continent of a location is usually the same as the continent of the "
        "country location belongs to. Answer: Usually True",
    ),
)


def query_messages(prompt: str) -> list[dict]:
    return [
        {"role": "system", "content": QUERY_SYSTEM_PROMPT},
        {"role": "user", "content": prompt},
    ]


def judge_messages(verbalization: str) -> list[dict]:
    messages: list[dict] = [{"role": "system", "content": JUDGE_SYSTEM_PROMPT}]
    for user, assistant in JUDGE_FEW_SHOT:
        messages.append({"role": "user", "content": user})
        messages.append({"role": "assistant", "content": assistant})
    messages.append({"role": "user", "content": verbalization})
    return messages
