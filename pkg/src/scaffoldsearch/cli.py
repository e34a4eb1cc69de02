"""Command-line entry point.

Every command writes UTF-8 JSON-lines to stdout (or ``--out``); summaries
and diagnostics go to stderr. Usage and configuration errors exit with 2,
unreadable or inconsistent data with 1.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import evaluate as ev
from . import pe_parser as pe
from .ingest import FormatError, load, make_program
from .scaffold import SYMTABLE, Violation, check_choices, check_source, config_of
from .search import BACKOFF, REGIMES, SearchBudget, run
from .setpacking import gen_setpacking, has_packing, random_family
from .synth import source_lines, write_fixture

log = logging.getLogger("scaffoldsearch")

PROBLEM_SUFFIX = ".problem.tsv"
CANDS_SUFFIX = ".cands.tsv"
TABLE_BUDGETS = (1, 10, 100, 1000)


class UsageFailure(Exception):
    """Bad configuration; reported with exit status 2."""


def setup_logging() -> None:
    level = os.environ.get("SCAFFOLD_LOG", "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise UsageFailure(f"SCAFFOLD_LOG must be a logging level name, got {level!r}")
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def dumps(record) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True, allow_nan=False)


def finite(x: float):
    return "inf" if math.isinf(x) else x


def open_out(path):
    if path is None or str(path) == "-":
        return sys.stdout
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="\n")


def emit(records, out) -> None:
    stream = open_out(out)
    try:
        for rec in records:
            stream.write(dumps(rec) + "\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


# ---------------------------------------------------------------------------
# inputs


def find_problems(paths, candidates=None) -> list[tuple[Path, Path]]:
    """``(problem, candidates)`` path pairs; directories are searched for problem files."""
    pairs = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            pairs.extend((p, None) for p in sorted(path.glob(f"*{PROBLEM_SUFFIX}")))
        elif path.is_file():
            pairs.append((path, None))
        else:
            raise UsageFailure(f"no such file or directory: {path}")
    if not pairs:
        raise UsageFailure("no problem files given")
    if candidates is not None and len(pairs) != 1:
        raise UsageFailure("--candidates needs exactly one problem file")
    out = []
    for problem, _ in pairs:
        if candidates is not None:
            cands = Path(candidates)
        elif problem.name.endswith(PROBLEM_SUFFIX):
            cands = problem.with_name(problem.name[: -len(PROBLEM_SUFFIX)] + CANDS_SUFFIX)
        else:
            cands = problem.with_suffix(CANDS_SUFFIX)
        if not cands.is_file():
            raise UsageFailure(f"no candidate file for {problem} (looked for {cands})")
        out.append((problem, cands))
    return out


def parse_choices(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageFailure(f"bad --choices {text!r}") from None


def parse_family(text: str) -> list[list[int]]:
    try:
        return [[int(v) for v in part.split(",")] for part in text.split(";") if part.strip()]
    except ValueError:
        raise UsageFailure(f"bad --family {text!r}; expected e.g. '1,2;3,4'") from None


# ---------------------------------------------------------------------------
# search


def _search_one(job):
    problem_path, cands_path, regime, budget, method, cap, judge_name = job
    problem = load(problem_path, cands_path, cap=cap)
    result = run(problem, regime, budget, method)
    judge = ev.make_judge(judge_name) if judge_name else None
    records = []
    for attempt, program in enumerate(result.programs, start=1):
        rec = {
            "problem": problem.id,
            "attempt": attempt,
            "rank": attempt,
            "score": program.score,
            "regime": result.regime,
            "backoff": result.backoff,
            "choices": list(program.choices),
            "code": program.code,
        }
        if judge is not None:
            rec["passed"] = judge(program, problem, attempt).passed
        records.append(rec)
    if not records:
        records.append({"problem": problem.id, "empty": True, "regime": result.regime})
    summary = {
        "problem": problem.id,
        "programs": len(result.programs),
        "verifier_calls": result.verifier_calls,
        "regime": result.regime,
        "backoff": result.backoff,
    }
    if judge is not None:
        summary["solved"] = any(r.get("passed") for r in records)
    return problem.id, records, summary


def cmd_search(args) -> int:
    pairs = find_problems(args.problems, args.candidates)
    if args.judge:
        ev.make_judge(args.judge)
    budget = SearchBudget(B=args.B, W=args.W, K=args.K, quota=args.quota)
    jobs = [(str(p), str(c), args.constraint, budget, args.method, args.C, args.judge) for p, c in pairs]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_search_one, jobs))
    else:
        results = [_search_one(job) for job in jobs]
    results.sort(key=lambda item: item[0])
    emit((rec for _, records, _ in results for rec in records), args.out)
    for _, _, summary in results:
        sys.stderr.write(dumps(summary) + "\n")
    return 0


# ---------------------------------------------------------------------------
# eval


def read_jsonl(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ev.EvalError(f"{path}:{lineno}: {exc}") from None
    return records


def _named_logs(items) -> dict[str, Path]:
    named = {}
    for item in items:
        name, sep, path = item.partition("=")
        if not sep:
            path = item
            name = Path(item).name.split(".")[0]
        if name in named:
            raise UsageFailure(f"duplicate log name {name!r}; use NAME=PATH")
        if not Path(path).is_file():
            raise UsageFailure(f"no such log file: {path}")
        named[name] = Path(path)
    return named


def divergences(records, top: int, seed: int) -> ev.DivergenceReport:
    by_problem: dict[str, list[tuple[int, tuple]]] = {}
    for rec in records:
        if rec.get("empty") or "choices" not in rec:
            continue
        by_problem.setdefault(str(rec["problem"]), []).append((int(rec["attempt"]), tuple(rec["choices"])))
    results = []
    for problem in sorted(by_problem):
        programs = [c for _, c in sorted(by_problem[problem])[:top]]
        if len(programs) >= 2:
            results.append(ev.variation_analysis(programs, seed=seed))
    return ev.divergence_report(results)


def evaluate_logs(named: dict, max_budget: int, top: int, seed: int):
    raw = {name: read_jsonl(path) for name, path in named.items()}
    logs = {name: ev.attempt_logs(recs) for name, recs in raw.items()}
    names = list(logs)
    reference = set(logs[names[0]])
    for name in names[1:]:
        if set(logs[name]) != reference:
            missing = sorted(reference ^ set(logs[name]))[:5]
            raise ev.EvalError(f"log {name!r} covers different problems from {names[0]!r}, e.g. {missing}")
    curves = {name: ev.dense_curve(log_, max_budget) for name, log_ in logs.items()}
    table = [b for b in TABLE_BUDGETS if b <= max_budget]
    leads = {}
    for a in names:
        for b in names:
            if a != b:
                leads[f"{a}>{b}"] = {B: ev.lead(curves[a], curves[b], B) for B in table}
    divs = {name: divergences(recs, top, seed) for name, recs in raw.items()}
    return curves, table, leads, divs


def cmd_eval(args) -> int:
    if args.max_budget < 1:
        raise UsageFailure("--max-budget must be >= 1")
    if args.div_top < 2:
        raise UsageFailure("--div-top must be >= 2")
    named = _named_logs(args.logs)
    curves, table, leads, divs = evaluate_logs(named, args.max_budget, args.div_top, args.seed)
    records = []
    for name, curve in curves.items():
        records.append({"log": name, "problems": None, "f": {str(B): curve.at(B) for B in table}})
    counts = {name: len(ev.attempt_logs(read_jsonl(path))) for name, path in named.items()}
    for rec in records:
        rec["problems"] = counts[rec["log"]]
    for pair, series in leads.items():
        a, b = pair.split(">")
        records.append({"pair": [a, b], "lead": {str(B): finite(v) for B, v in series.items()}})
    for name, report in divs.items():
        records.append({"log": name, "divergence": report.to_json()})
    emit(records, None)
    if args.out:
        write_report(Path(args.out), curves, table, leads, divs)
    return 0


def write_report(out: Path, curves, table, leads, divs) -> None:
    from . import plots

    out.mkdir(parents=True, exist_ok=True)
    report = {
        "f": {name: {str(B): c.at(B) for B in table} for name, c in curves.items()},
        "leads": {pair: {str(B): finite(v) for B, v in s.items()} for pair, s in leads.items()},
        "divergence": {name: d.to_json() for name, d in divs.items()},
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with open(out / "report.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        names = list(curves)
        writer.writerow(["budget", *names])
        grid = curves[names[0]].budgets
        for i, B in enumerate(grid):
            writer.writerow([B, *(repr(curves[n].fractions[i]) for n in names)])
    plots.plot_curves(curves, out / "f_curve.png")
    lead_grid = {}
    for pair in leads:
        a, b = pair.split(">")
        lead_grid[pair] = {B: ev.lead(curves[a], curves[b], B) for B in curves[a].budgets}
    plots.plot_leads(lead_grid, out / "leads.png")
    for name, d in divs.items():
        plots.plot_divergence(d.buckets, out / f"divergence_{name}.png")


# ---------------------------------------------------------------------------
# parse, check, oracle, gen-setpacking


def cmd_parse(args) -> int:
    try:
        parse = pe.parse_piece(args.code)
    except pe.ParseFailure as exc:
        emit([{"code": args.code, "error": str(exc)}], args.out)
        return 1
    rec = parse.to_json()
    rec["configuration"] = config_of(parse, args.constraint).to_json()
    emit([rec], args.out)
    return 0


def _check_regime(constraint: str) -> str:
    if constraint not in ("syntactic", "symtable"):
        raise UsageFailure("check needs --constraint syntactic or symtable")
    return constraint


def cmd_check(args) -> int:
    regime = _check_regime(args.constraint)
    if args.source:
        path = Path(args.source)
        if not path.is_file():
            raise UsageFailure(f"no such file: {path}")
        verdict = check_source(source_lines(path.read_text(encoding="utf-8")), regime)
        target = str(path)
    else:
        if not args.problem:
            raise UsageFailure("check needs a problem file or --source")
        ((ppath, cpath),) = find_problems([args.problem], args.candidates)
        problem = load(ppath, cpath, cap=args.C)
        choices = parse_choices(args.choices) if args.choices else (0,) * problem.L
        if len(choices) != problem.L:
            raise UsageFailure(f"--choices needs {problem.L} ranks")
        try:
            make_program(choices, problem)
        except IndexError as exc:
            raise UsageFailure(f"--choices out of range: {exc}") from None
        verdict = check_choices(choices, problem, regime)
        target = problem.id
    rec = {"target": target, "regime": regime, "valid": verdict is True}
    if isinstance(verdict, Violation):
        rec["violation"] = verdict.to_json()
    emit([rec], args.out)
    return 0 if verdict is True else 1


def cmd_oracle(args) -> int:
    pairs = find_problems(args.problems)
    problems = [load(p, c, cap=args.C) for p, c in pairs]
    problems.sort(key=lambda p: p.id)
    records = [{"problem": p.id, "solvable": ev.solvable(p)} for p in problems]
    records.append({"oracle_bound": ev.oracle_bound(problems), "problems": len(problems)})
    emit(records, args.out)
    return 0


def cmd_gen_setpacking(args) -> int:
    if args.random is not None:
        if args.random < 1:
            raise UsageFailure("--random must be >= 1")
        rng = random.Random(args.seed)
        instances = []
        for i in range(args.random):
            size = rng.randint(1, args.max_family)
            instances.append((f"setpacking-{args.seed}-{i}", random_family(rng, args.universe, size), rng.randint(1, args.L)))
    else:
        if args.family is None:
            raise UsageFailure("gen-setpacking needs --family or --random")
        instances = [(args.name, parse_family(args.family), args.L)]
    out_dir = Path(args.out or ".")
    records = []
    for name, family, L in instances:
        try:
            problem = gen_setpacking(args.universe, family, L, problem_id=name)
        except ev.ConfigError as exc:
            raise UsageFailure(str(exc)) from None
        ppath, cpath = write_fixture(problem, out_dir)
        records.append({
            "problem": name, "universe": args.universe, "family": family, "L": L,
            "packing": has_packing(family, L), "problem_path": str(ppath), "cands_path": str(cpath),
        })
    emit(records, None)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scaffoldsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, constraint_default=BACKOFF, choices=REGIMES):
        p.add_argument("--constraint", choices=choices, default=constraint_default)
        p.add_argument("-C", type=positive, default=100, help="candidates kept per line")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output file (default stdout)")

    s = sub.add_parser("search", help="emit ranked programs for each problem")
    s.add_argument("problems", nargs="+", help="problem files or directories of *.problem.tsv")
    s.add_argument("--candidates", help="candidate file when searching a single problem")
    common(s)
    s.add_argument("-B", type=positive, default=100, help="programs to emit per problem")
    s.add_argument("-W", type=positive, default=50, help="beam width")
    s.add_argument("-K", type=positive, default=None, help="scaffolds kept (default min(W, 20))")
    s.add_argument("--method", choices=("hierarchical", "beam", "bruteforce"), default="hierarchical")
    s.add_argument("--quota", type=positive, default=None, help="verifier calls allowed for bruteforce")
    s.add_argument("--judge", help="gold or cmd:<template with {file}>")
    s.add_argument("--jobs", type=positive, default=1)
    s.set_defaults(func=cmd_search)

    e = sub.add_parser("eval", help="success curves, leads and divergence from attempt logs")
    e.add_argument("logs", nargs="+", help="attempt logs, optionally NAME=PATH")
    e.add_argument("--max-budget", type=int, default=1000)
    e.add_argument("--div-top", type=int, default=25, help="programs per problem for divergence")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", help="directory for report.json, report.csv and figures")
    e.set_defaults(func=cmd_eval)

    p = sub.add_parser("parse", help="primary expressions and variables of one code piece")
    p.add_argument("code")
    p.add_argument("--constraint", choices=("syntactic", "symtable"), default=SYMTABLE)
    p.add_argument("--out")
    p.set_defaults(func=cmd_parse)

    c = sub.add_parser("check", help="check a program against the grammar and symbol tables")
    c.add_argument("problem", nargs="?")
    c.add_argument("--candidates")
    c.add_argument("--choices", help="comma-separated ranks (default all zero)")
    c.add_argument("--source", help="check a C++ file with two-space indentation instead")
    common(c, SYMTABLE)
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("gen-setpacking", help="write set-packing reduction instances")
    g.add_argument("--universe", type=positive, required=True)
    g.add_argument("--family", help="subsets as '1,2;3,4'")
    g.add_argument("-L", type=positive, default=2)
    g.add_argument("--name", default="setpacking")
    g.add_argument("--random", type=int, help="sample this many random instances instead")
    g.add_argument("--max-family", type=positive, default=6)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output directory (default .)")
    g.set_defaults(func=cmd_gen_setpacking)

    o = sub.add_parser("oracle", help="fraction of problems whose gold lines all appear among candidates")
    o.add_argument("problems", nargs="+")
    o.add_argument("-C", type=positive, default=100)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        setup_logging()
        return args.func(args)
    except (UsageFailure, ev.ConfigError) as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")
    except (FormatError, ev.EvalError, ev.JudgeUnavailable, ev.EmptyEval) as exc:
        sys.stderr.write(f"{parser.prog}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
