import itertools
import math
import random

import pytest

from helpers import random_instance, valid_sorted
from scaffoldsearch.ingest import CodePiece, Problem, PseudoLine
from scaffoldsearch.scaffold import EMPTY_STATE, SYMTABLE, SYNTACTIC, Verifier, Violation, check_choices, extend, finish
from scaffoldsearch.search import (
    EmptyLine, EmptyScaffolds, SearchBudget, backoff_search, beam_search, best_first, brute_force_quota,
    config_distributions, hierarchical_search, iter_product, merge_streams, programs_from_scaffold, run,
    scaffold_beam,
)


def make(rows, ident="t"):
    """``rows``: ``(indent, [(code, prob), ...])`` per line, already sorted by prob."""
    lines, slots = [], []
    for i, (indent, cands) in enumerate(rows):
        lines.append(PseudoLine(i, "", indent, cands[0][0]))
        slots.append(tuple(CodePiece(i, c, code, p) for c, (code, p) in enumerate(cands)))
    return Problem(ident, tuple(lines), tuple(slots))


def scores(programs):
    return [math.exp(p.score) for p in programs]


def test_best_first_two_lines():
    p = make([(0, [("a;", 0.6), ("b;", 0.4)]), (0, [("c;", 0.7), ("d;", 0.3)])])
    top = best_first(p, 3)
    assert [pr.choices for pr in top] == [(0, 0), (1, 0), (0, 1)]
    assert scores(top) == pytest.approx([0.42, 0.28, 0.18])


def test_best_first_single_line():
    p = make([(0, [("a;", 0.5), ("b;", 0.3), ("c;", 0.2)])])
    assert [pr.choices for pr in best_first(p, 10)] == [(0,), (1,), (2,)]


def test_best_first_stops_at_product_size():
    p = make([(0, [("a;", 0.6), ("b;", 0.4)])] * 3)
    assert len(best_first(p, 100)) == 8


def test_iter_product_restricted():
    logp = [[math.log(x) for x in (0.5, 0.3, 0.2)], [math.log(x) for x in (0.6, 0.4)]]
    got = [ranks for _, ranks in iter_product(logp, [(1, 2), (0, 1)])]
    assert sorted(got) == sorted(itertools.product((1, 2), (0, 1)))
    assert got[0] == (1, 0)


FIG1 = [
    (0, [("int main() {", 0.6), ("int main()", 0.4)]),
    (1, [("int n;", 0.5), ("n = 0;", 0.5)]),
    (1, [("int n;", 0.7), ("cin >> n;", 0.3)]),
    (1, [("for (int i = 0; i < n; i++) {", 0.6), ("for (int i = 0; i < n; i++)", 0.4)]),
    (2, [("cout << j << endl;", 0.6), ("cout << i << endl;", 0.4)]),
    (1, [("}", 0.8), ("} }", 0.2)]),
    (0, [("}", 0.9), ("return 0;", 0.1)]),
]


def test_beam_search_only_emits_valid():
    p = make(FIG1)
    result = beam_search(p, None, 100, SYMTABLE)
    # closing both scopes early leaves a global statement, which is still valid
    assert [pr.choices for pr in result.programs] == [(0, 0, 1, 0, 1, 0, 0), (0, 0, 1, 0, 1, 1, 1)]
    for pr in result.programs:
        assert check_choices(pr.choices, p) is True


def test_beam_search_unbounded_matches_oracle():
    for seed in range(40):
        p = random_instance(random.Random(seed))
        for regime in (SYNTACTIC, SYMTABLE):
            want = valid_sorted(p, regime)
            got = beam_search(p, None, 10 ** 6, regime).programs
            assert [(pr.score, pr.choices) for pr in got] == want


def test_beam_search_all_undeclared():
    p = make([(0, [("int y;", 1.0)]), (0, [("x = 1;", 0.5), ("x++;", 0.5)])])
    assert beam_search(p, 10, 10, SYMTABLE).programs == []
    assert len(beam_search(p, 10, 10, SYNTACTIC).programs) == 2


def test_beam_width_prunes():
    p = make([(0, [("int a;", 0.6), ("int b;", 0.4)]), (0, [("b++;", 1.0)])])
    assert beam_search(p, 1, 10, SYMTABLE).programs == []
    assert [pr.choices for pr in beam_search(p, 2, 10, SYMTABLE).programs] == [(1, 0)]


def test_group_mass():
    p = make([(0, [("a += 1;", 0.3), ("a -= 1;", 0.2), ("int b;", 0.1)])])
    (groups,) = config_distributions(p)
    assert [g.ranks for g in groups] == [(0, 1), (2,)]
    assert groups[0].mass == pytest.approx(0.5)


def test_distinct_configs_are_singletons():
    p = make([(0, [("int a;", 0.4), ("int b;", 0.3), ("c++;", 0.2), ("}", 0.1)])])
    (groups,) = config_distributions(p)
    assert [g.ranks for g in groups] == [(0,), (1,), (2,), (3,)]


def test_grouping_by_hand():
    p = make([(0, [("int a = 1;", 0.5), ("a += 1;", 0.4), ("a -= 1;", 0.1)])])
    (groups,) = config_distributions(p)
    assert [g.ranks for g in groups] == [(0,), (1, 2)]
    assert [g.mass for g in groups] == pytest.approx([0.5, 0.5])


def test_unparseable_line():
    p = make([(0, [("int a;", 1.0)]), (0, [("if (x {", 0.6), ('"open', 0.4)])])
    with pytest.raises(EmptyLine) as err:
        config_distributions(p)
    assert err.value.line == 1


def test_single_scaffold():
    p = make([(0, [("int a;", 0.6), ("int a = 0;", 0.4)]), (0, [("a++;", 0.7), ("a--;", 0.3)])])
    (s,) = scaffold_beam(p, 10, 10)
    assert math.exp(s.logscore) == pytest.approx(1.0)


def exhaustive_scaffolds(problem, regime, K):
    groups = config_distributions(problem, regime)
    out = []
    for picked in itertools.product(*(range(len(g)) for g in groups)):
        state = EMPTY_STATE
        for line, gi in zip(problem.lines, picked):
            state = extend(state, groups[line.index][gi].config, line.indent, regime)
            if isinstance(state, Violation):
                break
        else:
            if not isinstance(finish(state), Violation):
                score = 0.0
                for l, gi in enumerate(picked):
                    score += groups[l][gi].logmass
                out.append((score, picked))
    out.sort(key=lambda item: (-item[0], item[1]))
    return out[:K]


def test_scaffold_beam_matches_exhaustive():
    for seed in range(60):
        p = random_instance(random.Random(seed))
        for regime in (SYNTACTIC, SYMTABLE):
            want = exhaustive_scaffolds(p, regime, 5)
            got = [(s.logscore, s.groups) for s in scaffold_beam(p, None, 5, regime)]
            assert got == want


def test_low_mass_scaffold_found():
    p = make([
        (0, [("int a;", 0.9), ("int b;", 0.1)]),
        (0, [("int a;", 0.95), ("b++;", 0.05)]),
    ])
    (s,) = scaffold_beam(p, 4, 1)
    assert s.groups == (1, 0) or s.groups == (0, 1)
    assert [pr.choices for pr in hierarchical_search(p, 4, 1, 5).programs] == [(1, 0)]


def test_scaffold_restricts_candidates():
    p = make([(0, [("N = 222222;", 0.6), ("int N = 222222;", 0.4)]), (0, [("N++;", 1.0)])])
    groups = config_distributions(p)
    (s,) = scaffold_beam(p, 10, 10, groups=groups)
    programs = list(programs_from_scaffold(p, s, groups))
    assert [pr.choices for pr in programs] == [(1, 0)]
    assert programs[0].code.startswith("int N = 222222;")


def test_singleton_scaffold_program():
    p = make([(0, [("int a;", 0.5)]), (0, [("a++;", 0.25)])])
    groups = config_distributions(p)
    (s,) = scaffold_beam(p, 10, 10, groups=groups)
    (only,) = list(programs_from_scaffold(p, s, groups, debug=True))
    assert math.exp(only.score) == pytest.approx(0.125)


def test_scaffold_stream_matches_filtered_enumeration():
    for seed in range(40):
        p = random_instance(random.Random(seed))
        groups = config_distributions(p)
        for s in scaffold_beam(p, None, 3, groups=groups):
            got = [(pr.score, pr.choices) for pr in programs_from_scaffold(p, s, groups, debug=True)]
            allowed = [set(groups[l][g].ranks) for l, g in enumerate(s.groups)]
            want = [item for item in valid_sorted(p, SYMTABLE)
                    if all(c in allowed[l] for l, c in enumerate(item[1]))]
            assert got == want


def test_k1_is_best_scaffold_stream():
    p = make(FIG1[:3] + [(1, [("cout << n << endl;", 0.5), ("cout << n;", 0.5)]), (0, [("}", 1.0)])])
    groups = config_distributions(p)
    (s,) = scaffold_beam(p, 50, 1, groups=groups)
    stream = list(programs_from_scaffold(p, s, groups))
    got = hierarchical_search(p, 50, 1, 100).programs
    assert got == stream[: len(got)]


def test_merge_interleaves():
    # two configurations per line; the best program alternates between scaffolds
    p = make([
        (0, [("int a;", 0.3), ("int b;", 0.28), ("int a = 1;", 0.22), ("int b = 1;", 0.2)]),
        (0, [("return 0;", 1.0)]),
    ])
    assert len(scaffold_beam(p, 10, 10)) == 2
    got = hierarchical_search(p, 10, 10, 10).programs
    assert [pr.choices for pr in got] == [(0, 0), (1, 0), (2, 0), (3, 0)]
    assert scores(got) == sorted(scores(got), reverse=True)


def test_merge_streams_rejects_duplicates():
    p = make([(0, [("a;", 1.0)])])
    (prog,) = best_first(p, 1)
    with pytest.raises(AssertionError):
        merge_streams([iter([prog]), iter([prog])], 5)


def test_hierarchical_no_scaffold():
    p = make([(0, [("x++;", 1.0)])])
    with pytest.raises(EmptyScaffolds):
        hierarchical_search(p, 10, 10, 10)


def test_backoff_same_as_symtable_when_valid():
    p = make(FIG1)
    a = backoff_search(p, 50, 20, 10)
    b = hierarchical_search(p, 50, 20, 10, SYMTABLE)
    assert not a.backoff and a.regime == SYMTABLE
    assert a.programs == b.programs


def test_backoff_falls_back_to_syntactic():
    p = make([
        (0, [("int a;", 0.6), ("int b;", 0.4)]),
        (0, [("int a;", 0.5), ("int b;", 0.3), ("int a, b;", 0.2)]),
        (0, [("int a = 0, b = 0;", 0.6), ("int b, a;", 0.4)]),
    ])
    result = backoff_search(p, 50, 20, 10)
    assert result.backoff and result.regime == SYNTACTIC
    assert result.programs
    for pr in result.programs:
        assert check_choices(pr.choices, p, SYNTACTIC) is True


def test_backoff_nothing_valid():
    p = make([(0, [("} else {", 1.0)])])
    result = backoff_search(p, 50, 20, 10)
    assert result.programs == [] and result.backoff


def test_quota_zero():
    result = brute_force_quota(make(FIG1), 0)
    assert result.programs == [] and result.verifier_calls == 0


def test_quota_top_program_valid():
    p = make([(0, [("int a;", 0.6), ("a++;", 0.4)]), (0, [("a++;", 0.9), ("int a;", 0.1)])])
    result = brute_force_quota(p, 100, B=1)
    assert [pr.choices for pr in result.programs] == [(0, 0)]
    assert result.verifier_calls <= p.L


def test_quota_respected():
    for seed in range(20):
        p = random_instance(random.Random(seed))
        for quota in (1, 5, 17):
            assert brute_force_quota(p, quota).verifier_calls <= quota


def test_quota_matches_oracle_when_unlimited():
    for seed in range(30):
        p = random_instance(random.Random(seed))
        got = brute_force_quota(p, 10 ** 9).programs
        assert [(pr.score, pr.choices) for pr in got] == valid_sorted(p, SYMTABLE)


def test_verifier_calls_deterministic():
    p = random_instance(random.Random(3))
    calls = {run(p, SYMTABLE, SearchBudget(B=5, W=4)).verifier_calls for _ in range(3)}
    assert len(calls) == 1


def test_run_dispatch():
    p = make(FIG1)
    assert run(p, "none", SearchBudget(B=3)).regime == "none"
    assert run(p, SYMTABLE, SearchBudget(B=3), "beam").programs
    assert run(p, "backoff", SearchBudget(B=3), "beam").programs
    assert run(p, SYMTABLE, SearchBudget(B=3), "bruteforce").programs
    with pytest.raises(ValueError):
        run(p, "strict")
    with pytest.raises(ValueError):
        run(p, SYMTABLE, method="annealing")


def test_none_regime_keeps_unparseable():
    p = make([(0, [("if (x {", 0.9), ("int a;", 0.1)])])
    assert run(p, "none", SearchBudget(B=1)).programs[0].choices == (0,)


def test_budget_defaults():
    assert SearchBudget().K == 20
    assert SearchBudget(W=5).K == 5
    with pytest.raises(ValueError):
        SearchBudget(B=0)


def test_shared_verifier_counts_beam():
    p = make(FIG1)
    v = Verifier()
    result = beam_search(p, None, 10, SYMTABLE, verifier=v)
    assert result.verifier_calls == v.calls > 0
