"""Problems built from gold C++ sources, with perturbed candidate lists.

There is no translation model here. Candidates for a line are the gold piece
plus small edits of it (flipped operators, dropped or added declarations,
moved braces, renamed variables), which is enough to exercise every
constraint the search enforces.
"""
from __future__ import annotations

import random
import re
from pathlib import Path
from typing import Sequence

from . import pe_parser as pe
from .ingest import CodePiece, Problem, PseudoLine, write_candidates, write_problem

INDENT_WIDTH = 2

_FLIPS = (
    ("+=", "-="), ("-=", "+="), ("++", "--"), ("--", "++"),
    ("<=", "<"), (">=", ">"), ("==", "!="), ("!=", "=="),
    (" < ", " <= "), (" > ", " >= "), ("&&", "||"), ("||", "&&"),
)
_DECL = re.compile(r"^(?:const\s+)?(?:long long|int|char|bool|string|double|long)\s+(?=[A-Za-z_])")
_ASSIGN = re.compile(r"^([A-Za-z_]\w*)\s*=\s*[^=]")


def source_lines(text: str) -> list[tuple[int, str]]:
    """``(indent, code)`` per non-blank line; indent is leading spaces over two."""
    out = []
    for raw in text.splitlines():
        if not raw.strip():
            continue
        spaces = len(raw) - len(raw.lstrip(" "))
        out.append((spaces // INDENT_WIDTH, raw.strip()))
    return out


def pseudo_text(code: str) -> str:
    """A stand-in annotation. Brace-only lines get none, like the real data."""
    if set(code) <= set("{} "):
        return ""
    try:
        words = [t for t in pe.tokenize(code) if re.match(r"\w", t)]
    except pe.ParseFailure:
        words = code.split()
    return " ".join(words).lower()


def problem_from_source(text: str, problem_id: str) -> Problem:
    lines = tuple(
        PseudoLine(i, pseudo_text(code), indent, code)
        for i, (indent, code) in enumerate(source_lines(text))
    )
    return Problem(problem_id, lines)


def load_corpus(directory) -> list[Problem]:
    """Every ``*.cpp`` file in ``directory`` as a gold-only problem, sorted by name."""
    return [
        problem_from_source(path.read_text(encoding="utf-8"), path.stem)
        for path in sorted(Path(directory).glob("*.cpp"))
    ]


def _identifiers(problem: Problem) -> list[str]:
    seen: set[str] = set()
    for line in problem.lines:
        parse = pe.try_parse(line.gold or "")
        if parse is None:
            continue
        for declared, used in pe.extract_variables(line.gold, parse):
            seen |= declared | used
    return sorted(seen)


def perturbations(code: str, names: Sequence[str] = ()) -> list[str]:
    """Distinct plausible mistakes for one gold piece, in a fixed order."""
    out: list[str] = []

    def add(variant):
        variant = variant.strip()
        if variant and variant != code and variant not in out:
            out.append(variant)

    for a, b in _FLIPS:
        if a in code:
            add(code.replace(a, b, 1))
    m = _DECL.match(code)
    if m:
        add(code[m.end():])
    elif _ASSIGN.match(code):
        add("int " + code)
    if code.endswith("{"):
        add(code[:-1])
    elif code.endswith(")"):
        add(code + " {")
    if code.startswith("}"):
        add(code[1:])
        add("} else {")
        add("{")
    else:
        add("} " + code)
    if code == "}":
        add("return 0;")
        add("} }")
    for old in re.findall(r"\b[A-Za-z_]\w*\b", code):
        if old in names:
            for new in names:
                if new != old:
                    add(re.sub(rf"\b{re.escape(old)}\b", new, code, count=1))
                    break
    return out


def synthetic_candidates(
    problem: Problem,
    rng: random.Random,
    C: int = 10,
    gold_top: float = 0.7,
    blank_gold_top: float = 0.3,
) -> Problem:
    """Attach ``C`` candidates per line: the gold piece plus perturbations.

    The gold piece is ranked first with probability ``gold_top`` (or
    ``blank_gold_top`` on lines without pseudocode), otherwise at a uniform
    rank among the rest. Probabilities are random and sorted.
    """
    names = _identifiers(problem)
    slots = []
    for line in problem.lines:
        gold = line.gold or ""
        pool = perturbations(gold, names)
        rng.shuffle(pool)
        pieces = pool[: max(0, C - 1)]
        top = gold_top if line.text else blank_gold_top
        rank = 0 if rng.random() < top or not pieces else rng.randint(1, len(pieces))
        pieces.insert(rank, gold)
        weights = sorted((rng.random() + 1e-3 for _ in pieces), reverse=True)
        total = sum(weights)
        slots.append(tuple(
            CodePiece(line.index, c, code, round(w / total, 6) or 1e-6)
            for c, (code, w) in enumerate(zip(pieces, weights))
        ))
    return problem.with_candidates(slots)


def write_fixture(problem: Problem, directory) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ppath = directory / f"{problem.id}.problem.tsv"
    cpath = directory / f"{problem.id}.cands.tsv"
    write_problem(problem, ppath)
    write_candidates(problem.candidates, cpath)
    return ppath, cpath


def demo_problems(corpus_dir, seed: int = 0, C: int = 10, **kwargs) -> list[Problem]:
    """Corpus problems with synthetic candidates, each from its own seeded stream."""
    return [
        synthetic_candidates(problem, random.Random(f"{seed}:{problem.id}"), C, **kwargs)
        for problem in load_corpus(corpus_dir)
    ]
