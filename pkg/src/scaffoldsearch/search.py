"""Search over per-line candidates: unconstrained best-first, regular beam,
hierarchical scaffold search (with backoff) and quota-limited brute force.

Scores are sums of log-probabilities taken left to right over the lines, and
every ordering in this module is by ``(-score, choices)``: higher score
first, then the lexicographically smallest vector of candidate ranks.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from . import pe_parser as pe
from .ingest import Problem, Program, make_program
from .scaffold import (
    EMPTY_STATE,
    SYMTABLE,
    SYNTACTIC,
    Configuration,
    Verifier,
    Violation,
    check_choices,
    config_of,
    finish,
)

log = logging.getLogger(__name__)

NONE = "none"
BACKOFF = "backoff"
REGIMES = (NONE, SYNTACTIC, SYMTABLE, BACKOFF)


class EmptyLine(ValueError):
    def __init__(self, line: int):
        super().__init__(f"line {line} has no parseable candidates")
        self.line = line


class EmptyScaffolds(RuntimeError):
    def __init__(self, verifier_calls: int = 0):
        super().__init__("no valid scaffold found")
        self.verifier_calls = verifier_calls


@dataclass
class SearchBudget:
    B: int = 100
    W: int | None = 50
    K: int | None = None
    quota: int | None = None

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("B must be >= 1")
        if self.K is None:
            self.K = 20 if self.W is None else min(self.W, 20)


@dataclass
class SearchResult:
    programs: list[Program]
    regime: str
    verifier_calls: int = 0
    backoff: bool = False
    scaffolds: int = 0


@dataclass(frozen=True)
class ConfigGroup:
    config: Configuration
    mass: float
    ranks: tuple[int, ...]

    @property
    def logmass(self) -> float:
        return math.log(self.mass)


@dataclass(frozen=True)
class ScaffoldCandidate:
    groups: tuple[int, ...]
    configs: tuple[Configuration, ...]
    logscore: float


# ---------------------------------------------------------------------------
# lazy k-best over a product of sorted lists


def iter_product(
    logp: Sequence[Sequence[float]],
    allowed: Sequence[Sequence[int]] | None = None,
) -> Iterator[tuple[float, tuple[int, ...]]]:
    """Yield ``(score, ranks)`` over the product of per-line lists, best first.

    ``logp[l][r]`` must be non-increasing in ``r``; ``allowed[l]`` optionally
    restricts line ``l`` to an ascending subset of ranks. Each vector is pushed
    exactly once: its parent is the vector with the last non-zero local index
    decremented, so the children of ``v`` increment positions at or after the
    last non-zero index of ``v``.
    """
    L = len(logp)
    if allowed is None:
        allowed = [range(len(row)) for row in logp]
    allowed = [tuple(a) for a in allowed]
    if any(len(a) == 0 for a in allowed):
        return

    def score(local):
        total = 0.0
        for l, i in enumerate(local):
            total += logp[l][allowed[l][i]]
        return total

    def ranks(local):
        return tuple(allowed[l][i] for l, i in enumerate(local))

    start = (0,) * L
    heap = [(-score(start), ranks(start), start)]
    while heap:
        neg, rk, local = heapq.heappop(heap)
        yield -neg, rk
        last = 0
        for j in range(L - 1, -1, -1):
            if local[j]:
                last = j
                break
        for j in range(last, L):
            if local[j] + 1 < len(allowed[j]):
                child = local[:j] + (local[j] + 1,) + local[j + 1:]
                heapq.heappush(heap, (-score(child), ranks(child), child))


def _logp_table(problem: Problem) -> list[list[float]]:
    return [[piece.logprob for piece in slot] for slot in problem.candidates]


def best_first(problem: Problem, B: int) -> list[Program]:
    """Exact top-B programs with no constraints at all."""
    out = []
    for score, choices in iter_product(_logp_table(problem)):
        out.append(make_program(choices, problem, score))
        if len(out) >= B:
            break
    return out


# ---------------------------------------------------------------------------
# shared preparation


def prepare(problem: Problem, regime: str, extra_types=None) -> list[list[tuple[int, Configuration]]]:
    """Per line, the parseable candidates as ``(rank, configuration)``."""
    out = []
    for slot in problem.candidates:
        row = []
        for piece in slot:
            parse = pe.try_parse(piece.code, extra_types)
            if parse is not None:
                row.append((piece.cand, config_of(parse, regime)))
        out.append(row)
    return out


def _ordered(hyps, width):
    hyps.sort(key=lambda h: (-h[0], h[1]))
    return hyps if width is None else hyps[:width]


# ---------------------------------------------------------------------------
# regular beam search over code pieces


def beam_search(
    problem: Problem,
    W: int | None,
    B: int,
    regime: str = SYMTABLE,
    verifier: Verifier | None = None,
    extra_types=None,
) -> SearchResult:
    verifier = verifier or Verifier(regime)
    prepared = prepare(problem, regime, extra_types)
    logp = _logp_table(problem)
    beam = [(0.0, (), EMPTY_STATE)]
    for line in problem.lines:
        l = line.index
        grown = []
        for score, choices, state in beam:
            for rank, cfg in prepared[l]:
                nxt = verifier.extend(state, cfg, line.indent)
                if isinstance(nxt, Violation):
                    continue
                grown.append((score + logp[l][rank], choices + (rank,), nxt))
        beam = _ordered(grown, W)
        if not beam:
            break
    done = [h for h in beam if len(h[1]) == problem.L and not isinstance(finish(h[2]), Violation)]
    done = _ordered(done, B)
    programs = [make_program(choices, problem, score) for score, choices, _ in done]
    return SearchResult(programs, regime, verifier.calls)


# ---------------------------------------------------------------------------
# hierarchical scaffold search


def config_distributions(problem: Problem, regime: str = SYMTABLE, extra_types=None) -> list[list[ConfigGroup]]:
    """Group each line's parseable candidates by configuration.

    A group's mass is the sum of its members' probabilities; groups come in
    descending mass, ties by their best member's rank.
    """
    out = []
    for l, row in enumerate(prepare(problem, regime, extra_types)):
        if not row:
            raise EmptyLine(l)
        members: dict[Configuration, list[int]] = {}
        for rank, cfg in row:
            members.setdefault(cfg, []).append(rank)
        slot = problem.candidates[l]
        groups = []
        for cfg, ranks in members.items():
            mass = 0.0
            for r in ranks:
                mass += slot[r].prob
            groups.append(ConfigGroup(cfg, mass, tuple(ranks)))
        groups.sort(key=lambda g: (-g.mass, g.ranks[0]))
        out.append(groups)
    return out


def scaffold_beam(
    problem: Problem,
    W: int | None,
    K: int | None,
    regime: str = SYMTABLE,
    verifier: Verifier | None = None,
    groups: list[list[ConfigGroup]] | None = None,
    extra_types=None,
) -> list[ScaffoldCandidate]:
    """Beam search over configurations scored by marginal mass; top-K complete scaffolds."""
    verifier = verifier or Verifier(regime)
    if groups is None:
        groups = config_distributions(problem, regime, extra_types)
    beam = [(0.0, (), EMPTY_STATE)]
    for line in problem.lines:
        l = line.index
        grown = []
        for score, picked, state in beam:
            for g, group in enumerate(groups[l]):
                nxt = verifier.extend(state, group.config, line.indent)
                if isinstance(nxt, Violation):
                    continue
                grown.append((score + group.logmass, picked + (g,), nxt))
        beam = _ordered(grown, W)
        if not beam:
            return []
    done = [h for h in beam if not isinstance(finish(h[2]), Violation)]
    done = _ordered(done, K)
    return [
        ScaffoldCandidate(picked, tuple(groups[l][g].config for l, g in enumerate(picked)), score)
        for score, picked, _ in done
    ]


def programs_from_scaffold(
    problem: Problem,
    scaffold: ScaffoldCandidate,
    groups: list[list[ConfigGroup]],
    regime: str = SYMTABLE,
    debug: bool = False,
) -> Iterator[Program]:
    """Programs whose every line has the scaffold's configuration, best first."""
    allowed = [groups[l][g].ranks for l, g in enumerate(scaffold.groups)]
    for l, ranks in enumerate(allowed):
        assert ranks, f"scaffold admits no candidate on line {l}"
    for score, choices in iter_product(_logp_table(problem), allowed):
        program = make_program(choices, problem, score)
        if debug:
            verdict = check_choices(choices, problem, regime)
            assert verdict is True, f"scaffold program failed its constraints: {verdict}"
        yield program


def merge_streams(streams: Iterable[Iterator[Program]], B: int) -> list[Program]:
    """K-way merge of best-first program streams by ``(-score, choices)``."""
    heap = []
    iters = list(streams)
    for idx, it in enumerate(iters):
        first = next(it, None)
        if first is not None:
            heap.append((-first.score, first.choices, idx, first))
    heapq.heapify(heap)
    out: list[Program] = []
    seen = set()
    while heap and len(out) < B:
        _, choices, idx, program = heapq.heappop(heap)
        # configurations partition each line's candidates, so streams are disjoint
        assert choices not in seen, f"duplicate program {choices} across scaffolds"
        seen.add(choices)
        out.append(program)
        nxt = next(iters[idx], None)
        if nxt is not None:
            heapq.heappush(heap, (-nxt.score, nxt.choices, idx, nxt))
    return out


def hierarchical_search(
    problem: Problem,
    W: int | None,
    K: int | None,
    B: int,
    regime: str = SYMTABLE,
    verifier: Verifier | None = None,
    extra_types=None,
    debug: bool = False,
) -> SearchResult:
    """Scaffold beam search, then a lazy merge of per-scaffold program streams.

    Raises EmptyScaffolds when no complete valid scaffold exists.
    """
    verifier = verifier or Verifier(regime)
    try:
        groups = config_distributions(problem, regime, extra_types)
    except EmptyLine:
        raise EmptyScaffolds(verifier.calls) from None
    scaffolds = scaffold_beam(problem, W, K, regime, verifier, groups)
    if not scaffolds:
        raise EmptyScaffolds(verifier.calls)
    streams = [programs_from_scaffold(problem, s, groups, regime, debug) for s in scaffolds]
    programs = merge_streams(streams, B)
    return SearchResult(programs, regime, verifier.calls, scaffolds=len(scaffolds))


def backoff_search(
    problem: Problem,
    W: int | None,
    K: int | None,
    B: int,
    extra_types=None,
    debug: bool = False,
) -> SearchResult:
    """SymTable hierarchical search, falling back to syntactic when it finds no scaffold."""
    try:
        return hierarchical_search(problem, W, K, B, SYMTABLE, extra_types=extra_types, debug=debug)
    except EmptyScaffolds as exc:
        spent = exc.verifier_calls
    log.info("%s: no symtable scaffold, backing off to syntactic", problem.id)
    try:
        result = hierarchical_search(problem, W, K, B, SYNTACTIC, extra_types=extra_types, debug=debug)
    except EmptyScaffolds as exc:
        return SearchResult([], SYNTACTIC, spent + exc.verifier_calls, backoff=True)
    result.verifier_calls += spent
    result.backoff = True
    return result


# ---------------------------------------------------------------------------
# brute force with a verifier quota


def brute_force_quota(
    problem: Problem,
    quota: int,
    B: int | None = None,
    regime: str = SYMTABLE,
    extra_types=None,
) -> SearchResult:
    """Walk the unconstrained best-first stream, rejecting invalid programs.

    Each line check costs one verifier call and a program is abandoned at its
    first failing line. Stops when the quota is spent, the stream runs dry,
    or ``B`` valid programs have been found.
    """
    if quota < 0:
        raise ValueError("quota must be >= 0")
    verifier = Verifier(regime)
    configs = []
    for slot in problem.candidates:
        row = []
        for piece in slot:
            parse = pe.try_parse(piece.code, extra_types)
            row.append(None if parse is None else config_of(parse, regime))
        configs.append(row)
    found: list[Program] = []
    exhausted = False
    for score, choices in iter_product(_logp_table(problem)):
        state = EMPTY_STATE
        ok = True
        for line, c in zip(problem.lines, choices):
            if verifier.calls >= quota:
                exhausted = True
                ok = False
                break
            cfg = configs[line.index][c]
            if cfg is None:
                verifier.tick()
                ok = False
                break
            nxt = verifier.extend(state, cfg, line.indent)
            if isinstance(nxt, Violation):
                ok = False
                break
            state = nxt
        if exhausted:
            break
        if ok and not isinstance(finish(state), Violation):
            found.append(make_program(choices, problem, score))
            if B is not None and len(found) >= B:
                break
    return SearchResult(found, regime, verifier.calls)


# ---------------------------------------------------------------------------
# driver


def run(
    problem: Problem,
    regime: str = BACKOFF,
    budget: SearchBudget | None = None,
    method: str = "hierarchical",
    extra_types=None,
) -> SearchResult:
    """Dispatch on constraint regime and search method."""
    budget = budget or SearchBudget()
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if regime == NONE:
        return SearchResult(best_first(problem, budget.B), NONE)
    if method == "beam":
        if regime == BACKOFF:
            result = beam_search(problem, budget.W, budget.B, SYMTABLE, extra_types=extra_types)
            if result.programs:
                return result
            again = beam_search(problem, budget.W, budget.B, SYNTACTIC, extra_types=extra_types)
            again.verifier_calls += result.verifier_calls
            again.backoff = True
            return again
        return beam_search(problem, budget.W, budget.B, regime, extra_types=extra_types)
    if method == "bruteforce":
        quota = budget.quota if budget.quota is not None else 10 ** 6
        inner = SYMTABLE if regime == BACKOFF else regime
        return brute_force_quota(problem, quota, budget.B, inner, extra_types)
    if method != "hierarchical":
        raise ValueError(f"unknown method {method!r}")
    if regime == BACKOFF:
        return backoff_search(problem, budget.W, budget.K, budget.B, extra_types)
    try:
        return hierarchical_search(problem, budget.W, budget.K, budget.B, regime, extra_types=extra_types)
    except EmptyScaffolds as exc:
        return SearchResult([], regime, exc.verifier_calls)
