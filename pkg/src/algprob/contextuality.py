"""The 18-vector, 9-context Kochen-Specker configuration in C^4.

All configuration checks use exact integer/rational arithmetic.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

# vectors |1> .. |18>, 1-based in the tables
KS_VECTORS: tuple[tuple[int, int, int, int], ...] = (
    (0, 0, 0, 1), (1, -1, 1, -1), (0, 0, 1, 0), (1, -1, -1, 1), (1, 1, -1, 1),
    (1, 1, 1, -1), (0, 1, 0, 0), (1, 1, 1, 1), (-1, 1, 1, 1),
    (1, 1, 0, 0), (1, 0, 1, 0), (1, 0, -1, 0), (1, 0, 0, 1), (1, 0, 0, -1),
    (1, -1, 0, 0), (0, 0, 1, 1), (0, 1, 0, -1), (0, 1, -1, 0),
)

# contexts Pi_1 .. Pi_9 as 1-based vector indices
KS_CONTEXTS: tuple[tuple[int, int, int, int], ...] = (
    (1, 3, 10, 15), (1, 7, 11, 12), (2, 4, 10, 16), (2, 8, 12, 17), (3, 7, 13, 14),
    (4, 8, 14, 18), (5, 6, 15, 16), (5, 9, 11, 17), (6, 9, 13, 18),
)


@dataclass(frozen=True, eq=False)
class KSConfiguration:
    vectors: tuple
    contexts: tuple
    projections: tuple

    def projection_exact(self, j: int) -> list[list[Fraction]]:
        """P_j = |j><j| / <j|j> with rational entries (j is 1-based)."""
        v = self.vectors[j - 1]
        nrm = sum(x * x for x in v)
        return [[Fraction(a * b, nrm) for b in v] for a in v]


def ks_configuration() -> KSConfiguration:
    projs = []
    for v in KS_VECTORS:
        a = np.array(v, dtype=float)
        projs.append(np.outer(a, a) / a.dot(a))
    return KSConfiguration(KS_VECTORS, KS_CONTEXTS, tuple(projs))


def validate_configuration(cfg: KSConfiguration) -> dict:
    """Exact orthogonality/completeness per context and occurrence counts."""
    problems = []
    for c, ctx in enumerate(cfg.contexts, start=1):
        for i, a in enumerate(ctx):
            for b in ctx[i + 1:]:
                ip = sum(x * y for x, y in zip(cfg.vectors[a - 1], cfg.vectors[b - 1]))
                if ip != 0:
                    problems.append(f"context {c}: <{a}|{b}> = {ip}")
        total = [[Fraction(0)] * 4 for _ in range(4)]
        for j in ctx:
            pj = cfg.projection_exact(j)
            total = [[total[r][s] + pj[r][s] for s in range(4)] for r in range(4)]
        if any(total[r][s] != (1 if r == s else 0) for r in range(4) for s in range(4)):
            problems.append(f"context {c}: projections do not sum to the identity")
    occ = Counter(j for ctx in cfg.contexts for j in ctx)
    occurrences = {j: occ.get(j, 0) for j in range(1, len(cfg.vectors) + 1)}
    for j, k in occurrences.items():
        if k != 2:
            problems.append(f"projection {j} appears {k} times")
    return {
        "contexts_valid": not any(p.startswith("context") for p in problems),
        "occurrences": occurrences,
        "all_twice": all(k == 2 for k in occurrences.values()),
        "problems": problems,
    }


def search_valuations(cfg: KSConfiguration, contexts: Sequence[int] | None = None) -> list[dict]:
    """All 0/1 assignments with exactly one 1 in each listed context.

    ``contexts`` selects a subset (0-based positions); default is all nine.
    Branches context by context over the choice of the single 1, propagating
    values of shared indices. Output order is deterministic.
    """
    ctxs = [cfg.contexts[i] for i in (range(len(cfg.contexts)) if contexts is None else contexts)]
    solutions: list[dict] = []

    def branch(k: int, assign: dict) -> None:
        if k == len(ctxs):
            solutions.append(dict(sorted(assign.items())))
            return
        ctx = ctxs[k]
        ones = [j for j in ctx if assign.get(j) == 1]
        if len(ones) > 1:
            return
        for pick in ctx:
            if assign.get(pick) == 0 or (ones and pick != ones[0]):
                continue
            if any(assign.get(j) == 1 for j in ctx if j != pick):
                continue
            new = dict(assign)
            for j in ctx:
                new[j] = 1 if j == pick else 0
            branch(k + 1, new)

    branch(0, {})
    return solutions


def parity_argument(cfg: KSConfiguration) -> dict:
    """Nine contexts each need one 1 (odd total); each index counted twice (even total)."""
    occ = Counter(j for ctx in cfg.contexts for j in ctx)
    required = len(cfg.contexts)
    doubles = all(k == 2 for k in occ.values())
    return {
        "required_ones": required,
        "required_parity": "odd" if required % 2 else "even",
        "double_count_parity": "even" if doubles else "undetermined",
        "contradiction": bool(doubles and required % 2 == 1),
    }


def proof_transcript(cfg: KSConfiguration) -> str:
    rep = validate_configuration(cfg)
    par = parity_argument(cfg)
    sols = search_valuations(cfg)
    lines = ["Kochen-Specker configuration: 18 rays in C^4, 9 contexts of 4"]
    for c, ctx in enumerate(cfg.contexts, start=1):
        vecs = "  ".join(f"|{j}>={cfg.vectors[j - 1]}" for j in ctx)
        lines.append(f"  context {c}: {vecs}")
    lines.append(f"every context orthogonal and complete: {rep['contexts_valid']}")
    lines.append(f"every projection appears exactly twice: {rep['all_twice']}")
    lines.append(
        f"a valuation puts one 1 in each context: {par['required_ones']} ones ({par['required_parity']})"
    )
    lines.append(f"each projection is counted twice, so the total is {par['double_count_parity']}")
    lines.append(f"contradiction: {par['contradiction']}")
    lines.append(f"exhaustive search found {len(sols)} valuations")
    return "\n".join(lines) + "\n"
