"""Judging attempts and summarising search efficiency."""
from __future__ import annotations

import math
import os
import random
import shlex
import subprocess
import tempfile
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from . import pe_parser as pe
from .ingest import Problem, Program

INF = math.inf

LENGTH_BUCKETS = ((0, 10), (10, 20), (20, 30), (30, 40), (40, None))


class JudgeUnavailable(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


class EmptyEval(ValueError):
    pass


class EvalError(ValueError):
    pass


class RangeError(ValueError):
    pass


class InsufficientPrograms(ValueError):
    pass


@dataclass(frozen=True)
class JudgeVerdict:
    passed: bool
    attempt_index: int = 1
    timed_out: bool = False


# ---------------------------------------------------------------------------
# judges


def normalize(code: str) -> str:
    try:
        return " ".join(pe.tokenize(code))
    except pe.ParseFailure:
        return " ".join(code.split())


def line_matches(code: str, gold: str) -> bool:
    return normalize(code) == normalize(gold)


def judge_gold(program: Program, problem: Problem, attempt_index: int = 1) -> JudgeVerdict:
    """Pass iff every chosen piece equals its gold line up to token spacing."""
    for line, c in zip(problem.lines, program.choices):
        if line.gold is None:
            raise JudgeUnavailable(f"{problem.id}: line {line.index} has no gold code")
        if not line_matches(problem.candidates[line.index][c].code, line.gold):
            return JudgeVerdict(False, attempt_index)
    return JudgeVerdict(True, attempt_index)


def judge_external(
    program: Program,
    template: str,
    timeout: float = 10.0,
    attempt_index: int = 1,
) -> JudgeVerdict:
    """Run a shell command on the program source; exit status 0 passes.

    ``{file}`` in the template is replaced by the path of a temporary file
    holding the program text.
    """
    fd, path = tempfile.mkstemp(suffix=".cpp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(program.code + "\n")
        try:
            command = template.format(file=shlex.quote(path))
        except (KeyError, IndexError, ValueError) as exc:
            raise ConfigError(f"bad judge template {template!r}: {exc}") from None
        try:
            proc = subprocess.run(command, shell=True, timeout=timeout,
                                  stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        except subprocess.TimeoutExpired:
            return JudgeVerdict(False, attempt_index, timed_out=True)
        return JudgeVerdict(proc.returncode == 0, attempt_index)
    finally:
        os.unlink(path)


def make_judge(kind: str, timeout: float = 10.0) -> Callable[[Program, Problem, int], JudgeVerdict]:
    """``gold`` or ``cmd:<template>``."""
    if kind == "gold":
        return judge_gold
    if kind.startswith("cmd:"):
        template = kind[4:]
        if not template.strip():
            raise ConfigError("empty judge command")
        return lambda program, problem, attempt=1: judge_external(program, template, timeout, attempt)
    raise ConfigError(f"unknown judge {kind!r}")


# ---------------------------------------------------------------------------
# curves and lead


@dataclass(frozen=True)
class FCurve:
    budgets: tuple[int, ...]
    fractions: tuple[float, ...]

    def at(self, B: int) -> float:
        i = bisect_left(self.budgets, B)
        if i == len(self.budgets) or self.budgets[i] != B:
            raise RangeError(f"budget {B} not on the curve's grid")
        return self.fractions[i]


def first_pass(verdicts: Sequence[bool]) -> int | None:
    """1-based attempt of the first pass, or None."""
    for i, ok in enumerate(verdicts, start=1):
        if ok:
            return i
    return None


def f_curve(logs: Mapping[str, Sequence[bool]], budgets: Iterable[int]) -> FCurve:
    """Fraction of problems with a pass within the first B attempts, per budget."""
    if not logs:
        raise EmptyEval("no problems to evaluate")
    budgets = tuple(sorted(set(int(b) for b in budgets)))
    if not budgets or budgets[0] < 1:
        raise ValueError("budgets must be positive")
    firsts = sorted(fp for fp in (first_pass(v) for v in logs.values()) if fp is not None)
    n = len(logs)
    fractions = []
    for B in budgets:
        solved = 0
        while solved < len(firsts) and firsts[solved] <= B:
            solved += 1
        fractions.append(solved / n)
    return FCurve(budgets, tuple(fractions))


def dense_curve(logs: Mapping[str, Sequence[bool]], max_budget: int = 1000) -> FCurve:
    return f_curve(logs, range(1, max_budget + 1))


def lead(f1: FCurve, f2: FCurve, B: int) -> float:
    """Extra budget the second algorithm needs to match the first at budget B.

    ``inf{X >= 0 : f2(B + X) >= f1(B)}`` scanned over the shared grid;
    ``math.inf`` if the grid ends first.
    """
    if f1.budgets != f2.budgets:
        raise RangeError("curves must share a budget grid")
    target = f1.at(B)
    start = f1.budgets.index(B)
    for i in range(start, len(f2.budgets)):
        if f2.fractions[i] >= target:
            return f2.budgets[i] - B
    return INF


# ---------------------------------------------------------------------------
# oracle bound


def solvable(problem: Problem, matches: Callable[[str, str], bool] = line_matches) -> bool:
    for line in problem.lines:
        if line.gold is None:
            raise JudgeUnavailable(f"{problem.id}: line {line.index} has no gold code")
        if not any(matches(piece.code, line.gold) for piece in problem.candidates[line.index]):
            return False
    return True


def oracle_bound(problems: Sequence[Problem], matches: Callable[[str, str], bool] = line_matches) -> float:
    """Fraction of problems where every line has some gold-equivalent candidate."""
    if not problems:
        raise EmptyEval("no problems")
    return sum(solvable(p, matches) for p in problems) / len(problems)


# ---------------------------------------------------------------------------
# variation analysis


@dataclass
class Divergence:
    """Where each non-representative program first leaves the representative branch."""

    length: int
    representative: tuple[int, ...]
    indices: list[int]
    identical: int

    @property
    def first_half(self) -> int:
        half = math.ceil(self.length / 2)
        return sum(1 for i in self.indices if i < half)

    @property
    def fraction_first_half(self) -> float:
        return self.first_half / len(self.indices) if self.indices else 0.0


@dataclass
class DivergenceReport:
    buckets: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    identical: int = 0

    def to_json(self) -> dict:
        return {"first_half_fraction": self.buckets, "divergences": self.counts, "identical": self.identical}


def bucket_label(length: int) -> str:
    for lo, hi in LENGTH_BUCKETS:
        if hi is None or length <= hi:
            if length > lo:
                return f"({lo}, {'inf' if hi is None else hi}]"
    raise ValueError(f"length {length} is not positive")


def representative_branch(columns: Sequence[Sequence[int]], rng: random.Random) -> tuple[int, ...]:
    """Walk the prefix tree of ``columns`` taking the child with the most leaves."""
    alive = list(range(len(columns)))
    length = len(columns[0])
    path = []
    for depth in range(length):
        counts = Counter(columns[j][depth] for j in alive)
        best = max(counts.values())
        tied = sorted(v for v, c in counts.items() if c == best)
        choice = tied[0] if len(tied) == 1 else rng.choice(tied)
        path.append(choice)
        alive = [j for j in alive if columns[j][depth] == choice]
    return tuple(path)


def variation_analysis(programs: Sequence[Sequence[int]], L: int | None = None, seed: int = 0) -> Divergence:
    """Divergence points of the top programs from their representative branch.

    Programs identical to the representative are not divergences; they are
    counted in ``identical`` (the representative itself excluded).
    """
    columns = [tuple(p.choices if isinstance(p, Program) else p) for p in programs]
    if len(columns) < 2:
        raise InsufficientPrograms("need at least two programs")
    length = len(columns[0]) if L is None else L
    if any(len(c) != length for c in columns):
        raise ValueError("all programs must have length L")
    rep = representative_branch(columns, random.Random(seed))
    indices = []
    identical = -1
    for col in columns:
        idx = next((i for i in range(length) if col[i] != rep[i]), None)
        if idx is None:
            identical += 1
        else:
            indices.append(idx)
    return Divergence(length, rep, indices, identical)


def divergence_report(results: Iterable[Divergence]) -> DivergenceReport:
    """Pool divergences by program-length bucket."""
    first: Counter = Counter()
    total: Counter = Counter()
    identical = 0
    for d in results:
        label = bucket_label(d.length)
        first[label] += d.first_half
        total[label] += len(d.indices)
        identical += d.identical
    report = DivergenceReport(identical=identical)
    for lo, hi in LENGTH_BUCKETS:
        label = f"({lo}, {'inf' if hi is None else hi}]"
        if total[label]:
            report.buckets[label] = first[label] / total[label]
            report.counts[label] = total[label]
    return report


# ---------------------------------------------------------------------------
# attempt logs


def attempt_logs(records: Iterable[Mapping]) -> dict[str, list[bool]]:
    """Group ``{problem, attempt, passed}`` records into per-problem verdict lists.

    Position ``i`` of a list holds the verdict of attempt ``i + 1``.
    """
    grouped: dict[str, list[tuple[int, bool]]] = {}
    for rec in records:
        if rec.get("empty"):
            # a search that emitted nothing still counts as an unsolved problem
            grouped.setdefault(str(rec["problem"]), [])
            continue
        try:
            problem = str(rec["problem"])
            attempt = int(rec.get("attempt", rec.get("rank")))
            passed = bool(rec["passed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise EvalError(f"bad attempt record {rec!r}: {exc}") from None
        grouped.setdefault(problem, []).append((attempt, passed))
    out = {}
    for problem, items in grouped.items():
        verdicts = [False] * max((a for a, _ in items), default=0)
        seen = set()
        for attempt, ok in items:
            if attempt < 1 or attempt in seen:
                raise EvalError(f"{problem}: bad or repeated attempt index {attempt}")
            seen.add(attempt)
            # attempts missing from the log count as failures
            verdicts[attempt - 1] = ok
        out[problem] = verdicts
    return out
