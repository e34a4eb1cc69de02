"""Primary-expression parser for single lines of C++.

A code piece is turned into a flat sequence of coarse symbols (control
keywords, parenthesised headers, terminal statements, braces, function
headers) together with the variable names each symbol declares or uses.
Nothing here looks at neighbouring lines; stitching symbols together across
lines is the job of :mod:`scaffoldsearch.scaffold`.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field

FOR_START = "FOR_START"
WHILE_START = "WHILE_START"
DO_START = "DO_START"
IF_START = "IF_START"
ELIF_START = "ELIF_START"
ELSE_START = "ELSE_START"
TERMINAL_PARENS = "TERMINAL_PARENS"
TERMINAL_STMT = "TERMINAL_STMT"
SEMI = "SEMI"
OPEN_BRACE_START = "OPEN_BRACE_START"
CLOSE_BRACE_END = "CLOSE_BRACE_END"
FUNCTION_HEADER_START = "FUNCTION_HEADER_START"
WHILE_TAIL_END = "WHILE_TAIL_END"
RETURN_TYPE = "RETURN_TYPE"
PROTOTYPE = "PROTOTYPE"

KINDS = (
    FOR_START, WHILE_START, DO_START, IF_START, ELIF_START, ELSE_START,
    TERMINAL_PARENS, TERMINAL_STMT, SEMI, OPEN_BRACE_START, CLOSE_BRACE_END,
    FUNCTION_HEADER_START, WHILE_TAIL_END, RETURN_TYPE, PROTOTYPE,
)

OPEN = "Open"
CLOSE = "Close"

# a single line may change the open-scope count by at most this much
MAX_SCOPE_DELTA = 2


class ParseFailure(ValueError):
    pass


BUILTIN_TYPES = frozenset("""
    int long short char bool float double void unsigned signed auto size_t
    wchar_t int8_t int16_t int32_t int64_t uint8_t uint16_t uint32_t uint64_t
    string
""".split())

STD_TYPES = frozenset("""
    vector map set multiset multimap unordered_map unordered_set pair queue
    priority_queue stack deque list array bitset tuple stringstream
    istringstream ostringstream complex iterator
""".split())

# common competitive-programming aliases; extend per corpus via extra_types
DEFAULT_EXTRA_TYPES = frozenset("ll ull ld lli pii pll vi vll vii".split())

QUALIFIERS = frozenset("const static volatile register inline constexpr extern mutable".split())
INTEGER_WORDS = frozenset("unsigned signed long short int char double".split())

KEYWORDS = frozenset("""
    for while if else do return break continue sizeof new delete true false
    nullptr const static unsigned signed auto struct class using namespace
    typedef template typename operator this goto switch case default inline
    extern volatile register static_cast const_cast reinterpret_cast
    dynamic_cast public private protected friend virtual enum union throw try
    catch constexpr mutable and or not xor
""".split()) | BUILTIN_TYPES

# identifiers provided by the standard library / headers
BUILTIN_NAMES = frozenset("""
    std cin cout cerr clog endl npos INT_MAX INT_MIN LLONG_MAX LLONG_MIN
    LONG_MAX LONG_MIN UINT_MAX ULLONG_MAX SHRT_MAX CHAR_MAX EOF NULL M_PI
    greater less plus minus ios ios_base stdin stdout stderr fixed
    setprecision setw setfill boolalpha noskipws main
""".split())

CONTROL_WORDS = frozenset(("for", "while", "if", "else", "do"))

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<str>"(?:\\.|[^"\\\n])*")
  | (?P<chr>'(?:\\.|[^'\\\n])*')
  | (?P<num>0[xX][0-9a-fA-F]+[uUlL]*|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[a-zA-Z]*)
  | (?P<id>[A-Za-z_]\w*)
  | (?P<op>::|->\*?|\.\.\.|<<=|>>=|\+\+|--|<<|>>|&&|\|\||[-+*/%&|^!=<>]=?|[(){}\[\];,.?:~])
  | (?P<bad>["'#@$`\\]|/\*)
    """,
    re.VERBOSE | re.DOTALL,
)
_IDENT_RE = re.compile(r"[A-Za-z_]\w*\Z")


def tokenize(code: str) -> list[str]:
    """Split a line of C++ into tokens.

    Literals stay whole, comments disappear and a preprocessor directive is a
    single token.
    """
    stripped = code.strip()
    if stripped.startswith("#"):
        return [stripped]
    tokens = []
    pos = 0
    while pos < len(code):
        if code.startswith("/*", pos) and "*/" not in code[pos + 2:]:
            raise ParseFailure(f"unterminated comment at column {pos}")
        m = _TOKEN_RE.match(code, pos)
        if m is None or m.lastgroup == "bad":
            ch = code[pos]
            if ch in "\"'":
                raise ParseFailure(f"unterminated literal at column {pos}")
            raise ParseFailure(f"unexpected character {ch!r} at column {pos}")
        if m.lastgroup not in ("ws", "comment"):
            tokens.append(m.group())
        pos = m.end()
    return tokens


def is_ident(tok: str) -> bool:
    return bool(_IDENT_RE.match(tok))


@dataclass(frozen=True)
class PESymbol:
    kind: str
    text: str
    declared: tuple[str, ...] = ()
    used: tuple[str, ...] = ()
    func: str | None = None
    params: tuple[str, ...] = ()


@dataclass(frozen=True)
class Segment:
    declared: frozenset = frozenset()
    used: frozenset = frozenset()


@dataclass(frozen=True)
class LineParse:
    code: str
    tokens: tuple[str, ...]
    symbols: tuple[PESymbol, ...]
    scope_events: tuple[str, ...]
    segments: tuple[Segment, ...]
    functions: tuple[str, ...] = field(default=())

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(s.kind for s in self.symbols)

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "tokens": list(self.tokens),
            "symbols": [
                {k: v for k, v in (
                    ("kind", s.kind), ("text", s.text), ("declared", list(s.declared)),
                    ("used", list(s.used)), ("function", s.func), ("params", list(s.params)),
                ) if v or k in ("kind", "text")}
                for s in self.symbols
            ],
            "scope_events": list(self.scope_events),
            "segments": [
                {"declared": sorted(seg.declared), "used": sorted(seg.used)} for seg in self.segments
            ],
            "functions": list(self.functions),
        }


# ---------------------------------------------------------------------------
# token-span helpers


def _match(tokens, i, open_tok, close_tok):
    """Index just past the bracket closing tokens[i]; ParseFailure if unbalanced."""
    depth = 0
    for j in range(i, len(tokens)):
        t = tokens[j]
        if t == open_tok:
            depth += 1
        elif t == close_tok:
            depth -= 1
            if depth == 0:
                return j + 1
    raise ParseFailure(f"unbalanced {open_tok!r}")


def _split_top(tokens, sep):
    """Split on ``sep`` outside any brackets."""
    parts, cur, depth = [], [], 0
    for t in tokens:
        if t in "([{":
            depth += 1
        elif t in ")]}":
            depth -= 1
        if t == sep and depth == 0:
            parts.append(cur)
            cur = []
        else:
            cur.append(t)
    parts.append(cur)
    return parts


def _skip_angles(tokens, i):
    """tokens[i] is '<'; return index past the matching '>' (``>>`` closes two)."""
    depth = 0
    j = i
    while j < len(tokens):
        t = tokens[j]
        if t == "<":
            depth += 1
        elif t == ">":
            depth -= 1
        elif t == ">>":
            depth -= 2
        elif t in (";", "{", "}"):
            return None
        j += 1
        if depth <= 0:
            return j if depth == 0 else None
    return None


class _Lexicon:
    def __init__(self, extra_types=DEFAULT_EXTRA_TYPES):
        self.types = BUILTIN_TYPES | STD_TYPES | frozenset(extra_types)

    def parse_type(self, tokens, i):
        """Return the index past a type starting at tokens[i], or None."""
        n = len(tokens)
        while i < n and tokens[i] in QUALIFIERS:
            i += 1
        if i >= n:
            return None
        t = tokens[i]
        if t in INTEGER_WORDS:
            while i < n and tokens[i] in INTEGER_WORDS:
                i += 1
        elif t == "std" and i + 2 < n and tokens[i + 1] == "::" and is_ident(tokens[i + 2]):
            i += 3
            if i < n and tokens[i] == "<":
                i = _skip_angles(tokens, i)
                if i is None:
                    return None
        elif t in self.types:
            i += 1
            if i < n and tokens[i] == "<":
                i = _skip_angles(tokens, i)
                if i is None:
                    return None
        else:
            return None
        # nested names such as vector<int>::iterator
        while i + 1 < n and tokens[i] == "::" and is_ident(tokens[i + 1]):
            i += 2
        while i < n and tokens[i] in ("const",):
            i += 1
        return i

    def uses(self, tokens, exclude=()) -> list[str]:
        out = []
        n = len(tokens)
        i = 0
        while i < n:
            t = tokens[i]
            if t in self.types and i + 1 < n and tokens[i + 1] == "<":
                j = _skip_angles(tokens, i + 1)
                if j is not None:
                    i = j
                    continue
            if (
                is_ident(t)
                and t not in KEYWORDS
                and t not in BUILTIN_NAMES
                and t not in self.types
                and t not in exclude
                and not (i > 0 and tokens[i - 1] in (".", "->", "::"))
                and not (i + 1 < n and tokens[i + 1] in ("(", "::"))
                and t not in out
            ):
                out.append(t)
            i += 1
        return out

    def declaration(self, tokens):
        """``(declared, used)`` if ``tokens`` is a declaration statement, else None."""
        j = self.parse_type(tokens, 0)
        if j is None or j >= len(tokens):
            return None
        declared: list[str] = []
        used: list[str] = []
        n = len(tokens)
        while True:
            while j < n and tokens[j] in ("*", "&", "&&", "const"):
                j += 1
            if j >= n or not is_ident(tokens[j]) or tokens[j] in KEYWORDS:
                return None
            name = tokens[j]
            j += 1
            init: list[str] = []
            while j < n and tokens[j] == "[":
                k = _match(tokens, j, "[", "]")
                init.extend(tokens[j + 1:k - 1])
                j = k
            if j < n and tokens[j] in ("=", "(", "{"):
                # initializer runs to the next top-level comma
                start = j + 1 if tokens[j] == "=" else j
                depth = 0
                k = start
                while k < n:
                    t = tokens[k]
                    if t in "([{":
                        depth += 1
                    elif t in ")]}":
                        depth -= 1
                        if depth < 0:
                            raise ParseFailure("unbalanced initializer")
                    elif t == "," and depth == 0:
                        break
                    k += 1
                if depth != 0:
                    raise ParseFailure("unbalanced initializer")
                init.extend(tokens[start:k])
                j = k
            for u in self.uses(init):
                # names declared earlier in the same statement are always in scope
                if u not in declared and u not in used:
                    used.append(u)
            declared.append(name)
            if j >= n:
                return declared, used
            if tokens[j] != ",":
                return None
            j += 1

    def statement(self, tokens):
        """(declared, used) for a statement without its trailing semicolon."""
        if not tokens:
            return [], []
        if tokens[0] in ("typedef", "using", "namespace", "template", "struct", "class"):
            return [], []
        decl = self.declaration(tokens)
        if decl is not None:
            return decl
        return [], self.uses(tokens)

    def for_header(self, inner):
        parts = _split_top(inner, ";")
        if len(parts) == 1:
            # range-based for: decl : expr
            colon = [k for k, t in enumerate(inner) if t == ":"]
            if colon:
                k = colon[0]
                decl = self.declaration(inner[:k])
                if decl is not None:
                    declared, used = decl
                    more = [u for u in self.uses(inner[k + 1:]) if u not in used]
                    return declared, used + more
            return [], self.uses(inner)
        if len(parts) != 3:
            raise ParseFailure("for header needs two semicolons")
        declared, used = self.statement(parts[0])
        for part in parts[1:]:
            for u in self.uses(part):
                if u not in declared and u not in used:
                    used.append(u)
        return declared, used

    def params(self, inner):
        """Parameter names, or None if the list is not a parameter list."""
        if not inner or inner == ["void"]:
            return []
        names = []
        for part in _split_top(inner, ","):
            if part == ["..."]:
                continue
            j = self.parse_type(part, 0)
            if j is None:
                return None
            while j < len(part) and part[j] in ("*", "&", "&&", "const"):
                j += 1
            if j < len(part) and is_ident(part[j]) and part[j] not in KEYWORDS:
                names.append(part[j])
                j += 1
            # tolerate array brackets and default values
            rest = part[j:]
            if rest and rest[0] not in ("[", "="):
                return None
        return names

    def function_header(self, tokens):
        """Match ``type name ( params ) [const]`` at the start of ``tokens``.

        Returns ``(name, params, end_index, is_prototype_list)`` or None.
        """
        j = self.parse_type(tokens, 0)
        if j is None:
            return None
        while j < len(tokens) and tokens[j] in ("*", "&"):
            j += 1
        if j + 1 >= len(tokens) or not is_ident(tokens[j]) or tokens[j + 1] != "(":
            return None
        name = tokens[j]
        if name in KEYWORDS:
            return None
        k = _match(tokens, j + 1, "(", ")")
        params = self.params(tokens[j + 2:k - 1])
        if params is None:
            return None
        while k < len(tokens) and tokens[k] == "const":
            k += 1
        return name, params, k


_DEFAULT_LEXICON = _Lexicon()


def _lexicon(extra_types):
    if extra_types is None:
        return _DEFAULT_LEXICON
    return _Lexicon(DEFAULT_EXTRA_TYPES | frozenset(extra_types))


# ---------------------------------------------------------------------------
# symbolization


def _symbolize(tokens, lex: _Lexicon):
    syms: list[PESymbol] = []
    n = len(tokens)
    i = 0

    if n == 1 and tokens[0].startswith("#"):
        return [PESymbol(TERMINAL_STMT, tokens[0]), PESymbol(SEMI, "")]

    header = lex.function_header(tokens) if n else None
    if header is not None:
        name, params, k = header
        text = " ".join(tokens[:k])
        if k < n and tokens[k] == "{":
            syms.append(PESymbol(FUNCTION_HEADER_START, text + " {", func=name, params=tuple(params)))
            i = k + 1
        elif k < n and tokens[k] == ";":
            syms.append(PESymbol(PROTOTYPE, text + " ;", func=name))
            i = k + 1
        elif k == n:
            syms.append(PESymbol(RETURN_TYPE, text, func=name, params=tuple(params)))
            i = k

    def parens(i, kind_text):
        if i >= n or tokens[i] != "(":
            raise ParseFailure(f"{kind_text} must be followed by '('")
        return _match(tokens, i, "(", ")")

    while i < n:
        t = tokens[i]
        if t in ("for", "while", "if"):
            kind = {"for": FOR_START, "while": WHILE_START, "if": IF_START}[t]
            if t == "while" and syms and syms[-1].kind == CLOSE_BRACE_END:
                kind = WHILE_TAIL_END
            syms.append(PESymbol(kind, t))
            k = parens(i + 1, t)
            inner = tokens[i + 2:k - 1]
            if t == "for":
                declared, used = lex.for_header(inner)
            else:
                declared, used = [], lex.uses(inner)
            syms.append(PESymbol(TERMINAL_PARENS, " ".join(tokens[i + 1:k]), tuple(declared), tuple(used)))
            i = k
        elif t == "else":
            if i + 1 < n and tokens[i + 1] == "if":
                syms.append(PESymbol(ELIF_START, "else if"))
                k = parens(i + 2, "else if")
                syms.append(PESymbol(TERMINAL_PARENS, " ".join(tokens[i + 2:k]), (), tuple(lex.uses(tokens[i + 3:k - 1]))))
                i = k
            else:
                syms.append(PESymbol(ELSE_START, t))
                i += 1
        elif t == "do":
            syms.append(PESymbol(DO_START, t))
            i += 1
        elif t == "{":
            syms.append(PESymbol(OPEN_BRACE_START, t))
            i += 1
        elif t == "}":
            syms.append(PESymbol(CLOSE_BRACE_END, t))
            i += 1
        elif t == ";":
            syms.append(PESymbol(SEMI, t))
            i += 1
        elif t in (")", "]"):
            raise ParseFailure(f"unbalanced {t!r}")
        else:
            j = i
            depth = 0
            while j < n:
                u = tokens[j]
                if depth == 0 and (u == ";" or u == "}" or u in CONTROL_WORDS):
                    break
                if u in "([{":
                    depth += 1
                elif u in ")]}":
                    depth -= 1
                    if depth < 0:
                        raise ParseFailure(f"unbalanced {u!r}")
                elif depth > 0 and (u == ";" or u in CONTROL_WORDS):
                    raise ParseFailure(f"{u!r} inside brackets")
                j += 1
            if depth != 0:
                raise ParseFailure("unbalanced brackets in statement")
            body = tokens[i:j]
            declared, used = lex.statement(body)
            syms.append(PESymbol(TERMINAL_STMT, " ".join(body), tuple(declared), tuple(used)))
            i = j
    return syms


def _local_scopes(syms):
    """Scope events and per-segment variable sets as seen from this line alone."""
    events: list[str] = []
    segments = [[set(), set()]]
    stack: list[str] = []  # 'head', 'braced', 'braceless'

    def open_():
        events.append(OPEN)
        segments.append([set(), set()])

    def close():
        events.append(CLOSE)
        segments.append([set(), set()])

    def bind(sym, params=False):
        segments[-1][0].update(sym.params if params else sym.declared)
        segments[-1][1].update(sym.used)

    def finish_body():
        while stack and stack[-1] == "braceless":
            stack.pop()
            close()

    for s in syms:
        k = s.kind
        if k in (FOR_START, WHILE_START, IF_START, ELIF_START, ELSE_START, DO_START):
            if stack and stack[-1] == "head":
                stack[-1] = "braceless"
            open_()
            stack.append("head")
        elif k in (FUNCTION_HEADER_START, RETURN_TYPE):
            open_()
            bind(s, params=True)
            stack.append("braced" if k == FUNCTION_HEADER_START else "head")
        elif k == OPEN_BRACE_START:
            if stack and stack[-1] == "head":
                stack[-1] = "braced"
            else:
                open_()
                stack.append("braced")
        elif k == CLOSE_BRACE_END:
            close()
            if stack and stack[-1] == "braced":
                stack.pop()
        elif k == TERMINAL_PARENS:
            bind(s)
        elif k == TERMINAL_STMT:
            if stack and stack[-1] == "head":
                stack[-1] = "braceless"
            bind(s)
        elif k == SEMI:
            if stack and stack[-1] == "head":
                stack[-1] = "braceless"
            finish_body()
    return tuple(events), tuple(Segment(frozenset(d), frozenset(u)) for d, u in segments)


@functools.lru_cache(maxsize=1 << 16)
def _parse_cached(code: str, extra: frozenset | None) -> LineParse:
    lex = _lexicon(extra)
    tokens = tokenize(code)
    syms = _symbolize(tokens, lex)
    events, segments = _local_scopes(syms)
    if abs(events.count(OPEN) - events.count(CLOSE)) > MAX_SCOPE_DELTA:
        raise ParseFailure("piece opens or closes too many scopes for one line")
    funcs = tuple(s.func for s in syms if s.func)
    return LineParse(code, tuple(tokens), tuple(syms), events, segments, funcs)


def parse_piece(code: str, extra_types=None) -> LineParse:
    """Symbolize one code piece; raises ParseFailure if that is impossible."""
    extra = None if extra_types is None else frozenset(extra_types)
    return _parse_cached(code, extra)


def try_parse(code: str, extra_types=None) -> LineParse | None:
    try:
        return parse_piece(code, extra_types)
    except ParseFailure:
        return None


def extract_variables(code: str, parse: LineParse | None = None) -> list[tuple[frozenset, frozenset]]:
    """Per scope segment ``(declared, used)`` name sets."""
    if parse is None:
        parse = parse_piece(code)
    return [(seg.declared, seg.used) for seg in parse.segments]
