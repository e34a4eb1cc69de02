"""Problem and candidate files, plus the product-of-probabilities program score.

Problem file (TAB separated, ``#`` comments allowed)::

    index  indent  text  gold

Candidate file::

    line  rank  prob  code
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class FormatError(ValueError):
    """Malformed problem or candidate file."""

    def __init__(self, message: str, lineno: int | None = None, path=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}"
        super().__init__(f"{where}: {message}" if where else message)
        self.lineno = lineno


@dataclass(frozen=True)
class PseudoLine:
    index: int
    text: str
    indent: int
    gold: str | None = None


@dataclass(frozen=True)
class CodePiece:
    line: int
    cand: int
    code: str
    prob: float

    @property
    def logprob(self) -> float:
        return math.log(self.prob)


@dataclass(frozen=True)
class Problem:
    id: str
    lines: tuple[PseudoLine, ...]
    candidates: tuple[tuple[CodePiece, ...], ...] = ()

    @property
    def L(self) -> int:
        return len(self.lines)

    @property
    def indents(self) -> tuple[int, ...]:
        return tuple(line.indent for line in self.lines)

    def with_candidates(self, candidates) -> "Problem":
        cands = tuple(tuple(c) for c in candidates)
        if len(cands) != len(self.lines):
            raise FormatError(f"expected candidates for {len(self.lines)} lines, got {len(cands)}")
        for l, slot in enumerate(cands):
            if not slot:
                raise FormatError(f"line {l} has no candidates")
            for piece in slot:
                if piece.line != l:
                    raise FormatError(f"candidate for line {piece.line} stored in slot {l}")
        return Problem(self.id, self.lines, cands)


@dataclass(frozen=True)
class Program:
    choices: tuple[int, ...]
    code: str
    score: float
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def prob(self) -> float:
        return math.exp(self.score)


def _records(path):
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line.split("\t")


def _parse_int(value: str, what: str, lineno: int, path) -> int:
    try:
        return int(value)
    except ValueError:
        raise FormatError(f"bad {what} {value!r}", lineno, path) from None


def load_problem(path, problem_id: str | None = None) -> Problem:
    path = Path(path)
    lines = []
    for lineno, fields in _records(path):
        if len(fields) < 3 or len(fields) > 4:
            raise FormatError(f"expected 3 or 4 fields, got {len(fields)}", lineno, path)
        index = _parse_int(fields[0], "index", lineno, path)
        indent = _parse_int(fields[1], "indent", lineno, path)
        if indent < 0:
            raise FormatError("negative indent", lineno, path)
        gold = fields[3] if len(fields) == 4 else None
        lines.append((lineno, PseudoLine(index, fields[2], indent, gold)))
    lines.sort(key=lambda item: item[1].index)
    for expected, (lineno, line) in enumerate(lines):
        if line.index != expected:
            raise FormatError(f"non-contiguous line index {line.index}, expected {expected}", lineno, path)
    if problem_id is None:
        problem_id = path.name.split(".")[0]
    return Problem(problem_id, tuple(line for _, line in lines))


def load_candidates(path, num_lines: int | None = None, cap: int = 100) -> list[list[CodePiece]]:
    """Per-line candidate lists, highest probability first, at most ``cap`` each.

    Probabilities are kept as read; nothing is renormalised after truncation.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    path = Path(path)
    slots: dict[int, list[tuple[int, int, str, float]]] = {}
    for order, (lineno, fields) in enumerate(_records(path)):
        if len(fields) < 4:
            raise FormatError(f"expected 4 fields, got {len(fields)}", lineno, path)
        line = _parse_int(fields[0], "line", lineno, path)
        rank = _parse_int(fields[1], "rank", lineno, path)
        try:
            prob = float(fields[2])
        except ValueError:
            raise FormatError(f"bad prob {fields[2]!r}", lineno, path) from None
        if not prob > 0 or math.isinf(prob):
            raise FormatError(f"probability must be positive, got {fields[2]}", lineno, path)
        if line < 0 or (num_lines is not None and line >= num_lines):
            raise FormatError(f"candidate for unknown line {line}", lineno, path)
        # code may legitimately contain tabs in the tail field
        code = "\t".join(fields[3:])
        slots.setdefault(line, []).append((rank, order, code, prob))
    n = num_lines if num_lines is not None else (max(slots) + 1 if slots else 0)
    out = []
    for l in range(n):
        entries = slots.get(l, [])
        # stable: equal probabilities keep file order
        entries.sort(key=lambda e: -e[3])
        out.append([CodePiece(l, c, code, prob) for c, (_, _, code, prob) in enumerate(entries[:cap])])
    return out


def load(problem_path, candidates_path, cap: int = 100, problem_id: str | None = None) -> Problem:
    problem = load_problem(problem_path, problem_id)
    cands = load_candidates(candidates_path, problem.L, cap)
    for l, slot in enumerate(cands):
        if not slot:
            raise FormatError(f"line {l} has no candidates", path=candidates_path)
    return problem.with_candidates(cands)


def _clean(text: str | None) -> str:
    return "" if text is None else text.replace("\t", " ").replace("\n", " ")


def write_problem(problem: Problem, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for line in problem.lines:
            fields = [str(line.index), str(line.indent), _clean(line.text)]
            if line.gold is not None:
                fields.append(_clean(line.gold))
            f.write("\t".join(fields) + "\n")


def write_candidates(candidates: Iterable[Sequence[CodePiece]], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for slot in candidates:
            for piece in slot:
                f.write(f"{piece.line}\t{piece.cand}\t{piece.prob!r}\t{_clean(piece.code)}\n")


def score_program(choices: Sequence[int], candidates: Sequence[Sequence[CodePiece]]) -> float:
    """Sum of log-probabilities of the chosen pieces, accumulated left to right."""
    if len(choices) != len(candidates):
        raise ValueError(f"need {len(candidates)} choices, got {len(choices)}")
    total = 0.0
    for c, slot in zip(choices, candidates):
        if c < 0:
            raise IndexError(f"rank {c} out of range")
        total += slot[c].logprob
    return total


def render(choices: Sequence[int], problem: Problem) -> str:
    out = []
    for line, c in zip(problem.lines, choices):
        out.append("  " * line.indent + problem.candidates[line.index][c].code.strip())
    return "\n".join(out)


def make_program(choices: Sequence[int], problem: Problem, score: float | None = None) -> Program:
    choices = tuple(choices)
    if score is None:
        score = score_program(choices, problem.candidates)
    return Program(choices, render(choices, problem), score)
