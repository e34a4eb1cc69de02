"""Random instances and exhaustive oracles shared by the tests."""
from __future__ import annotations

import itertools
import random

from scaffoldsearch.ingest import CodePiece, Problem, PseudoLine, score_program
from scaffoldsearch.scaffold import check_choices
from scaffoldsearch.synth import perturbations

PROBS = (0.05, 0.1, 0.2, 0.25, 0.4, 0.5)

NOISE = (
    "}", "{", "} else {", "else", "do {", "} while (v1);", "return 0;",
    "int v1 = 0;", "int v2;", "v1++;", "v2 += v1;", "v9 = 1;", "if (v1) {",
    "while (v1 > 0) {", "for (int i = 0; i < v1; i++)", "int main() {",
    "if (v1) v1--;", "cout << v1 << endl;", "int v1, v2;",
)


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.lines: list[tuple[int, str]] = []
        self.counter = 0

    def fresh(self):
        self.counter += 1
        return f"v{self.counter}"

    def stmt(self, depth, scope):
        rng = self.rng
        visible = [v for s in scope for v in s]
        if visible and rng.random() < 0.5:
            v = rng.choice(visible)
            self.lines.append((depth, rng.choice((f"{v} += 1;", f"{v} -= 1;", f"cin >> {v};", f"{v}++;"))))
        else:
            v = self.fresh()
            scope[-1].append(v)
            self.lines.append((depth, f"int {v} = {rng.randint(0, 9)};"))

    def cond(self, scope):
        visible = [v for s in scope for v in s]
        return self.rng.choice(visible) if visible else "1"

    def block(self, depth, scope, budget):
        """Append at most ``budget`` lines."""
        rng = self.rng
        while budget > 0:
            kind = rng.choice(("stmt", "stmt", "if", "while", "for", "brace1", "do", "ifelse", "stop"))
            if kind == "stop" and self.lines:
                return
            if kind in ("if", "while", "for") and budget >= 3:
                inner = [[]]
                if kind == "if":
                    head = f"if ({self.cond(scope)} > 0) {{"
                elif kind == "while":
                    head = f"while ({self.cond(scope)}) {{"
                else:
                    i = self.fresh()
                    inner[0].append(i)
                    head = f"for (int {i} = 0; {i} < 3; {i}++) {{"
                self.lines.append((depth, head))
                used = len(self.lines)
                self.block(depth + 1, scope + inner, rng.randint(1, budget - 2))
                self.lines.append((depth, "}"))
                budget -= len(self.lines) - used + 1
            elif kind == "brace1" and budget >= 2:
                self.lines.append((depth, f"if ({self.cond(scope)} != 0)"))
                self.stmt(depth + 1, scope + [[]])
                budget -= 2
            elif kind == "do" and budget >= 3:
                self.lines.append((depth, "do {"))
                used = len(self.lines)
                self.block(depth + 1, scope + [[]], rng.randint(1, budget - 2))
                self.lines.append((depth, f"}} while ({self.cond(scope)} < 5);"))
                budget -= len(self.lines) - used + 1
            elif kind == "ifelse" and budget >= 4:
                self.lines.append((depth, f"if ({self.cond(scope)}) {{"))
                self.stmt(depth + 1, scope + [[]])
                self.lines.append((depth, "} else {"))
                self.stmt(depth + 1, scope + [[]])
                self.lines.append((depth, "}"))
                budget -= 5
            else:
                self.stmt(depth, scope)
                budget -= 1


def random_program(rng: random.Random, max_lines: int = 6) -> list[tuple[int, str]]:
    """A valid program of 1..max_lines lines as ``(indent, code)``."""
    while True:
        gen = _Gen(rng)
        if max_lines >= 3 and rng.random() < 0.4:
            gen.lines.append((0, "int main() {"))
            gen.block(1, [[], []], rng.randint(1, max_lines - 2))
            gen.lines.append((0, "}"))
        else:
            gen.block(0, [[]], rng.randint(1, max_lines))
        if len(gen.lines) <= max_lines:
            return gen.lines


def random_instance(rng: random.Random, max_lines: int = 6, max_c: int = 4, probs=PROBS) -> Problem:
    """Gold from ``random_program`` plus perturbed and unrelated candidates."""
    gold = random_program(rng, max_lines)
    names = sorted({f"v{i}" for i in range(1, 10)})
    lines, slots = [], []
    for idx, (indent, code) in enumerate(gold):
        pool = perturbations(code, names) + [n for n in NOISE if n != code]
        C = rng.randint(1, max_c)
        pieces = rng.sample(pool, min(C - 1, len(pool)))
        pieces.insert(rng.randint(0, len(pieces)), code)
        ps = sorted((rng.choice(probs) for _ in pieces), reverse=True)
        lines.append(PseudoLine(idx, f"line {idx}", indent, code))
        slots.append(tuple(CodePiece(idx, c, piece, p) for c, (piece, p) in enumerate(zip(pieces, ps))))
    return Problem(f"rand{rng.random():.8f}", tuple(lines), tuple(slots))


def all_choices(problem: Problem):
    return itertools.product(*(range(len(slot)) for slot in problem.candidates))


def enumerate_sorted(problem: Problem) -> list[tuple[float, tuple[int, ...]]]:
    """Every program as ``(score, choices)``, ordered by ``(-score, choices)``."""
    out = [(score_program(ch, problem.candidates), ch) for ch in all_choices(problem)]
    out.sort(key=lambda item: (-item[0], item[1]))
    return out


def valid_sorted(problem: Problem, regime: str) -> list[tuple[float, tuple[int, ...]]]:
    return [item for item in enumerate_sorted(problem) if check_choices(item[1], problem, regime) is True]
