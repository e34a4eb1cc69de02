"""Configurations and incremental prefix-scaffold checking.

The checker is a deterministic stack machine over symbol kinds. Each frame on
the stack is one unfinished construct (a function body, a control statement in
some phase, a terminal statement waiting for its ``;``). Scopes are opened by
control keywords, function headers and bare ``{`` and closed when the
construct they belong to completes. Symbol tables are a tuple of frozensets,
one per open scope plus the global scope, so extending a state never mutates
it.

Indentation: a line's indent must equal the number of open scopes at the
point the line starts. Two adjustments make this match ordinary source
layout: a line opening with ``}`` is measured after that brace closes, and a
``{`` that supplies the body of a header on the previous line is measured at
the header's depth.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence

from . import pe_parser as pe
from .ingest import Problem, Program

SYNTACTIC = "syntactic"
SYMTABLE = "symtable"

GRAMMAR_DEAD = "GrammarDead"
INDENT_MISMATCH = "IndentMismatch"
UNDECLARED_USE = "UndeclaredUse"
REDECLARATION = "Redeclaration"
INCOMPLETE_AT_END = "IncompleteAtEnd"


_CONTROL = {
    pe.FOR_START: "for",
    pe.WHILE_START: "while",
    pe.IF_START: "if",
    pe.DO_START: "do",
}


class UsageError(RuntimeError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    line: int

    def to_json(self) -> dict:
        return {"violation": self.kind, "detail": self.detail, "line": self.line}


@dataclass(frozen=True)
class Binding:
    declared: tuple[str, ...] = ()
    used: tuple[str, ...] = ()
    func: str | None = None
    params: tuple[str, ...] = ()


_EMPTY = Binding()


@dataclass(frozen=True)
class Configuration:
    """What a code piece contributes to constraint checking, and nothing else.

    ``bindings`` runs parallel to ``symbols``: the names each symbol declares
    or uses. Under the syntactic regime every binding is empty, so pieces that
    differ only in variable names collapse together.
    """

    symbols: tuple[str, ...]
    scope_events: tuple[str, ...]
    bindings: tuple[Binding, ...]

    @property
    def declared(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(b.declared) | frozenset(b.params) for b in self.bindings)

    @property
    def used(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(b.used) for b in self.bindings)

    def to_json(self) -> dict:
        return {
            "symbols": list(self.symbols),
            "scope_events": list(self.scope_events),
            "bindings": [
                {"declared": list(b.declared), "used": list(b.used), "func": b.func, "params": list(b.params)}
                for b in self.bindings
            ],
        }


def config_of(parse: pe.LineParse, regime: str = SYMTABLE) -> Configuration:
    symbols = tuple(s.kind for s in parse.symbols)
    if regime == SYNTACTIC:
        bindings = (_EMPTY,) * len(symbols)
    else:
        bindings = tuple(
            Binding(tuple(sorted(s.declared)), tuple(sorted(s.used)), s.func, tuple(s.params))
            for s in parse.symbols
        )
    return Configuration(symbols, parse.scope_events, bindings)


@dataclass(frozen=True)
class ScaffoldState:
    frames: tuple = (("prog",),)
    tables: tuple[frozenset, ...] = (frozenset(),)
    functions: frozenset = frozenset()
    lines_done: int = 0

    @property
    def open_scopes(self) -> int:
        return len(self.tables) - 1


EMPTY_STATE = ScaffoldState()


class _Dead(Exception):
    pass


class _Run:
    """Mutable scratch copy of a state for the duration of one extend."""

    def __init__(self, state: ScaffoldState, check_symbols: bool, line: int):
        self.frames = list(state.frames)
        self.tables = list(state.tables)
        self.functions = state.functions
        self.check = check_symbols
        self.line = line
        self.symbol_violation: Violation | None = None
        self.indent_violation: Violation | None = None

    # scopes and names ---------------------------------------------------

    def open_scope(self):
        self.tables.append(frozenset())

    def close_scope(self):
        if len(self.tables) <= 1:
            raise _Dead("close of global scope")
        self.tables.pop()

    def _flag(self, kind, name):
        if self.symbol_violation is None:
            self.symbol_violation = Violation(kind, name, self.line)

    def use(self, names):
        if not self.check:
            return
        for name in names:
            if name in self.functions:
                continue
            if not any(name in t for t in self.tables):
                self._flag(UNDECLARED_USE, name)

    def declare(self, names):
        if not self.check:
            return
        for name in names:
            top = self.tables[-1]
            if name in top or (len(self.tables) == 1 and name in self.functions):
                self._flag(REDECLARATION, name)
            self.tables[-1] = top | {name}

    def declare_function(self, name):
        if not self.check or name is None:
            return
        if name in self.tables[-1]:
            self._flag(REDECLARATION, name)
        self.functions = self.functions | {name}

    def bind(self, b: Binding):
        self.use(b.used)
        self.declare(b.declared)

    # grammar ------------------------------------------------------------

    def top(self):
        return self.frames[-1]

    def stmt_done(self):
        top = self.frames[-1]
        if top[0] == "ctl" and top[2] == "braceless":
            self.complete_control(top[1])

    def complete_control(self, kw):
        self.close_scope()
        if kw in ("if", "elif"):
            self.frames[-1] = ("ifdone",)
        elif kw == "do":
            self.frames[-1] = ("ctl", "do", "tail")
        else:
            self.frames.pop()
            self.stmt_done()

    def resolve_else(self, kind):
        """Pop finished if-chains unless ``kind`` continues one."""
        if kind in (pe.ELIF_START, pe.ELSE_START):
            return
        while self.frames[-1][0] == "ifdone":
            self.frames.pop()
            self.stmt_done()

    def pending_header(self):
        top = self.frames[-1]
        return top[0] == "fhead" or (top[0] == "ctl" and top[2] == "body")

    def feed(self, kind, b: Binding):
        top = self.frames[-1]
        tag = top[0]
        if tag == "ctl":
            kw, phase = top[1], top[2]
            if phase == "head":
                if kind != pe.TERMINAL_PARENS:
                    raise _Dead(f"{kw} needs a parenthesised header")
                self.frames[-1] = ("ctl", kw, "body")
                self.bind(b)
                return
            if phase == "body":
                if kind == pe.OPEN_BRACE_START:
                    self.frames[-1] = ("ctl", kw, "braced")
                    return
                self.frames[-1] = ("ctl", kw, "braceless")
                self.start(kind, b)
                return
            if phase == "tail":
                if kind not in (pe.WHILE_TAIL_END, pe.WHILE_START):
                    raise _Dead("do body must be followed by while")
                self.frames[-1] = ("ctl", "do", "tailp")
                return
            if phase == "tailp":
                if kind != pe.TERMINAL_PARENS:
                    raise _Dead("while tail needs a condition")
                self.frames[-1] = ("ctl", "do", "tails")
                self.bind(b)
                return
            if phase == "tails":
                if kind != pe.SEMI:
                    raise _Dead("do-while must end with ';'")
                self.frames.pop()
                self.stmt_done()
                return
            # braced or braceless context: statements
        elif tag == "stmt":
            if kind == pe.TERMINAL_STMT:
                self.bind(b)
                return
            if kind == pe.SEMI:
                self.frames.pop()
                self.stmt_done()
                return
            raise _Dead(f"{kind} inside an unfinished statement")
        elif tag == "fhead":
            if kind != pe.OPEN_BRACE_START:
                raise _Dead("function header must be followed by '{'")
            self.frames[-1] = ("func",)
            return
        elif tag == "ifdone":
            self.frames.pop()
            if kind == pe.ELIF_START:
                self.open_scope()
                self.frames.append(("ctl", "elif", "head"))
            else:
                self.open_scope()
                self.frames.append(("ctl", "else", "body"))
            return
        self.start(kind, b)

    def start(self, kind, b: Binding):
        """A symbol beginning a statement in the current context."""
        top = self.frames[-1]
        if kind in _CONTROL:
            kw = _CONTROL[kind]
            self.open_scope()
            self.frames.append(("ctl", kw, "body" if kw == "do" else "head"))
        elif kind == pe.OPEN_BRACE_START:
            self.open_scope()
            self.frames.append(("block",))
        elif kind == pe.TERMINAL_STMT:
            self.frames.append(("stmt",))
            self.bind(b)
        elif kind == pe.SEMI:
            self.stmt_done()
        elif kind == pe.PROTOTYPE:
            self.declare_function(b.func)
            self.stmt_done()
        elif kind in (pe.FUNCTION_HEADER_START, pe.RETURN_TYPE):
            if top != ("prog",):
                raise _Dead("function definition outside global scope")
            self.declare_function(b.func)
            self.open_scope()
            self.declare(b.params)
            self.frames.append(("func",) if kind == pe.FUNCTION_HEADER_START else ("fhead",))
        elif kind == pe.CLOSE_BRACE_END:
            if top in (("block",), ("func",)):
                self.close_scope()
                self.frames.pop()
                self.stmt_done()
            elif top[0] == "ctl" and top[2] == "braced":
                self.complete_control(top[1])
            else:
                raise _Dead("'}' with no open block")
        else:
            raise _Dead(f"{kind} cannot start a statement")

    def consume_line(self, config: Configuration, indent: int | None):
        for pos, (kind, b) in enumerate(zip(config.symbols, config.bindings)):
            self.resolve_else(kind)
            if pos == 0 and indent is not None:
                depth = len(self.tables) - 1
                if kind == pe.CLOSE_BRACE_END or (kind == pe.OPEN_BRACE_START and self.pending_header()):
                    depth -= 1
                if depth != indent:
                    self.indent_violation = Violation(
                        INDENT_MISMATCH, f"indent {indent} but {depth} open scopes", self.line
                    )
            self.feed(kind, b)
        if not config.symbols and indent is not None:
            # blank piece: nothing to derive, but indentation still applies
            if len(self.tables) - 1 != indent:
                self.indent_violation = Violation(
                    INDENT_MISMATCH, f"indent {indent} but {len(self.tables) - 1} open scopes", self.line
                )


def extend(
    state: ScaffoldState,
    config: Configuration,
    indent: int | None,
    regime: str = SYMTABLE,
) -> ScaffoldState | Violation:
    """Consume one line. Returns the successor state or the first Violation.

    Violations are reported grammar first, then indentation, then symbol
    tables. ``state`` is never modified.
    """
    run = _Run(state, regime == SYMTABLE, state.lines_done)
    try:
        run.consume_line(config, indent)
    except _Dead as exc:
        return Violation(GRAMMAR_DEAD, str(exc), state.lines_done)
    if run.indent_violation is not None:
        return run.indent_violation
    if run.symbol_violation is not None:
        return run.symbol_violation
    return ScaffoldState(tuple(run.frames), tuple(run.tables), run.functions, state.lines_done + 1)


def finish(state: ScaffoldState) -> ScaffoldState | Violation:
    """Resolve trailing if-chains; Violation if something is left open."""
    run = _Run(state, False, state.lines_done)
    run.resolve_else(None)
    if run.frames != [("prog",)] or len(run.tables) != 1:
        return Violation(INCOMPLETE_AT_END, f"{len(run.tables) - 1} scopes open at end", state.lines_done)
    return ScaffoldState(tuple(run.frames), tuple(run.tables), run.functions, state.lines_done)


def is_complete(state: ScaffoldState, expected_lines: int | None = None) -> bool:
    if expected_lines is not None and state.lines_done != expected_lines:
        raise UsageError(f"state has consumed {state.lines_done} of {expected_lines} lines")
    return not isinstance(finish(state), Violation)


class Verifier:
    """Counts line-level constraint checks for one search.

    Every call to :meth:`extend` is one verifier call, whatever its outcome.
    """

    def __init__(self, regime: str = SYMTABLE):
        if regime not in (SYNTACTIC, SYMTABLE):
            raise ValueError(f"unknown regime {regime!r}")
        self.regime = regime
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def tick(self, n: int = 1) -> None:
        with self._lock:
            self._calls += n

    def extend(self, state, config, indent):
        self.tick()
        return extend(state, config, indent, self.regime)


def verifier_calls(verifier: Verifier) -> int:
    return verifier.calls


def _unparseable(line: int, code: str, exc: Exception) -> Violation:
    return Violation(GRAMMAR_DEAD, f"unparseable piece {code!r}: {exc}", line)


def check_choices(
    choices: Sequence[int],
    problem: Problem,
    regime: str = SYMTABLE,
    verifier: Verifier | None = None,
    extra_types=None,
) -> bool | Violation:
    """Fold :func:`extend` over every line, then test completeness."""
    if len(choices) != problem.L:
        raise ValueError(f"need {problem.L} choices, got {len(choices)}")
    verifier = verifier or Verifier(regime)
    state = EMPTY_STATE
    for line, c in zip(problem.lines, choices):
        piece = problem.candidates[line.index][c]
        try:
            parse = pe.parse_piece(piece.code, extra_types)
        except pe.ParseFailure as exc:
            verifier.tick()
            return _unparseable(line.index, piece.code, exc)
        result = verifier.extend(state, config_of(parse, verifier.regime), line.indent)
        if isinstance(result, Violation):
            return result
        state = result
    done = finish(state)
    if isinstance(done, Violation):
        return done
    return True


def check_program(
    program: Program,
    problem: Problem,
    regime: str = SYMTABLE,
    verifier: Verifier | None = None,
    extra_types=None,
) -> bool | Violation:
    return check_choices(program.choices, problem, regime, verifier, extra_types)


def check_source(lines: Sequence[tuple[int, str]], regime: str = SYMTABLE, extra_types=None) -> bool | Violation:
    """Check raw ``(indent, code)`` lines without building a Problem."""
    state = EMPTY_STATE
    for idx, (indent, code) in enumerate(lines):
        try:
            parse = pe.parse_piece(code, extra_types)
        except pe.ParseFailure as exc:
            return _unparseable(idx, code, exc)
        result = extend(state, config_of(parse, regime), indent, regime)
        if isinstance(result, Violation):
            return result
        state = result
    done = finish(state)
    return done if isinstance(done, Violation) else True
