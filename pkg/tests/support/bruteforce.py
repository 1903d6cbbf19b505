"""Exhaustive reference miner used to cross-check the sampling miner.

Everything here is deliberately naive and shares no code with the
package: a plain adjacency dict built straight from the triple list and
nested loops over it.  Feed the real miner a sample size covering the
full population so both sides see every head instance; then the support
counts must match exactly.
"""

from __future__ import annotations

from collections import defaultdict


def _dedup(triples) -> list[tuple[str, str, str]]:
    return sorted({(s, r, o) for s, r, o in triples})


def brute_inverse(triples, relation: str) -> dict[str, int]:
    """Support of every `relation <- inverse:r2` rule, as {r2: count}.

    An instance (a, relation, b) supports r2 when (b, r2, a) is present.
    Each instance contributes at most 1 per r2.
    """
    rows = _dedup(triples)
    counts: dict[str, int] = defaultdict(int)
    for a, r, b in rows:
        if r != relation:
            continue
        seen = {r2 for s, r2, o in rows if s == b and o == a}
        for r2 in seen:
            counts[r2] += 1
    return dict(counts)


def brute_paths(triples, relation: str, max_hops: int = 3) -> dict[tuple[str, ...], int]:
    """Support of forward-chain rules, as {(r1, r2[, r3]): count}.

    For each instance (a, relation, b), every distinct relation sequence
    realizing a 2-hop walk a -> m -> b (or a 3-hop walk when max_hops is
    3) counts once, regardless of how many intermediate entities realize
    the same sequence.
    """
    rows = _dedup(triples)
    adj: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for s, r, o in rows:
        adj[s].append((r, o))
    counts: dict[tuple[str, ...], int] = defaultdict(int)
    for a, r, b in rows:
        if r != relation:
            continue
        found: set[tuple[str, ...]] = set()
        for r1, m1 in adj[a]:
            for r2, m2 in adj[m1]:
                if m2 == b:
                    found.add((r1, r2))
                if max_hops >= 3:
                    for r3, o3 in adj[m2]:
                        if o3 == b:
                            found.add((r1, r2, r3))
        for seq in found:
            counts[seq] += 1
    return dict(counts)
