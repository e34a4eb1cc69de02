"""Set-packing instances encoded as candidate sets, and a direct solver.

Every body line may pick any subset from the family; a subset becomes a line
declaring one variable per element. Two lines picking overlapping subsets
redeclare a variable in the same scope, so a symbol-table-valid program
exists exactly when the family holds ``L`` pairwise disjoint sets.
"""
from __future__ import annotations

import itertools
import random
from typing import Sequence

from .evaluate import ConfigError
from .ingest import CodePiece, Problem, PseudoLine


def declaration_line(subset: Sequence[int]) -> str:
    return " ".join(f"int v{v};" for v in sorted(subset))


def gen_setpacking(
    universe: int,
    family: Sequence[Sequence[int]],
    L: int,
    probs: Sequence[float] | None = None,
    problem_id: str = "setpacking",
) -> Problem:
    """An ``L + 2`` line problem: ``int main() {``, L body lines, ``}``.

    Elements are 1-based. With ``probs`` unset every candidate is equally
    likely.
    """
    if universe < 1:
        raise ConfigError("universe size must be >= 1")
    if L < 1:
        raise ConfigError("L must be >= 1")
    if not family:
        raise ConfigError("family must not be empty")
    for subset in family:
        if not subset:
            raise ConfigError("family members must be non-empty")
        for v in subset:
            if not 1 <= v <= universe:
                raise ConfigError(f"element {v} outside universe 1..{universe}")
    if probs is None:
        probs = [1.0 / len(family)] * len(family)
    if len(probs) != len(family):
        raise ConfigError("need one probability per family member")

    lines = [PseudoLine(0, "", 0, "int main() {")]
    lines += [PseudoLine(i, f"declare set {i}", 1, None) for i in range(1, L + 1)]
    lines.append(PseudoLine(L + 1, "", 0, "}"))

    # candidates sorted by descending prob, ties in family order
    order = sorted(range(len(family)), key=lambda s: -probs[s])
    cands = [(CodePiece(0, 0, "int main() {", 1.0),)]
    for i in range(1, L + 1):
        cands.append(tuple(
            CodePiece(i, c, declaration_line(family[s]), probs[s]) for c, s in enumerate(order)
        ))
    cands.append((CodePiece(L + 1, 0, "}", 1.0),))
    return Problem(problem_id, tuple(lines), tuple(cands))


def has_packing(family: Sequence[Sequence[int]], L: int) -> bool:
    """Brute force: are there L members of ``family`` that are pairwise disjoint?"""
    sets = [frozenset(s) for s in family]
    for combo in itertools.combinations(range(len(sets)), L):
        chosen = [sets[i] for i in combo]
        if all(a.isdisjoint(b) for a, b in itertools.combinations(chosen, 2)):
            return True
    return False


def random_family(rng: random.Random, universe: int, size: int, max_subset: int | None = None):
    max_subset = max_subset or universe
    family = []
    for _ in range(size):
        k = rng.randint(1, min(max_subset, universe))
        family.append(sorted(rng.sample(range(1, universe + 1), k)))
    return family


def adversarial_instance(seed: int, L: int = 6, variants: int = 4, decoys: int = 3) -> Problem:
    """Packing instance whose likely completions collide only on the last line.

    Body lines ``1..L-1`` each declare their own pair of variables, written
    ``variants`` ways that differ only in initial values (one configuration,
    many code pieces). The last body line's likely candidates redeclare a
    variable from an earlier line; its one valid candidate is improbable.
    Unconstrained enumeration checks every variant combination against every
    decoy before reaching a valid program; grouping by configuration does not.
    """
    rng = random.Random(seed)
    lines = [PseudoLine(0, "", 0, "int main() {")]
    cands = [(CodePiece(0, 0, "int main() {", 1.0),)]
    for i in range(1, L):
        lines.append(PseudoLine(i, f"declare pair {i}", 1, None))
        a, b = 2 * i - 1, 2 * i
        weights = sorted((rng.uniform(0.8, 1.2) for _ in range(variants)), reverse=True)
        total = sum(weights)
        cands.append(tuple(
            CodePiece(i, c, f"int v{a} = {c}, v{b} = {c + 1};", w / total)
            for c, w in enumerate(weights)
        ))
    lines.append(PseudoLine(L, "declare the last one", 1, None))
    taken = list(range(1, 2 * (L - 1) + 1))
    fresh = 2 * (L - 1) + 1
    last = []
    for d in range(decoys):
        clash = rng.choice(taken)
        last.append((f"int v{clash} = {d}, v{fresh} = {d};", 0.3 + 0.01 * rng.random()))
    last.append((f"int v{fresh} = 0;", 0.001))
    last.sort(key=lambda item: -item[1])
    cands.append(tuple(CodePiece(L, c, code, p) for c, (code, p) in enumerate(last)))
    lines.append(PseudoLine(L + 1, "", 0, "}"))
    cands.append((CodePiece(L + 1, 0, "}", 1.0),))
    return Problem(f"adversarial-{seed}", tuple(lines), tuple(cands))
