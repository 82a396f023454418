import pytest
from hypothesis import given, strategies as st

from closestring import (SearchState, build_model, decide, distance_lower_bound,
                         encode_strings, enumerate_all, hamming_diameter, max_distance,
                         position_domains, propagate, root_sac_probe, solve_min)
from closestring.solver import Search, Unsatisfiable, search_tree_bound

from conftest import instances
from oracle import oracle_min, oracle_solutions

A, C, G, T = 1, 2, 3, 4


def radius(witness, s):
    return max_distance(encode_strings([witness]).codes[0], s)


# -- model -----------------------------------------------------------------------

def test_build_model_pair(at):
    m = build_model(at, "optimize", domain_mode="restricted")
    assert (m.bounds.d_low, m.bounds.d_high) == (2, 3)
    assert m.domains == ({A, T},) * 3


def test_build_model_single():
    m = build_model(encode_strings(["AAA"]))
    assert (m.bounds.d_low, m.bounds.d_high) == (0, 0)


@pytest.mark.parametrize("d", [-1, 4])
def test_build_model_bad_d(at, d):
    with pytest.raises(ValueError):
        build_model(at, "decide", d=d)


def test_unknown_options(at):
    for kw in ({"mode": "x"}, {"heuristic": "x"}, {"domain_mode": "x"}):
        with pytest.raises(ValueError):
            build_model(at, **kw)


# -- propagation -----------------------------------------------------------------

def test_propagate_forces_last_position(at):
    state = SearchState.initial(build_model(at))
    state.assignment = [T, T, None]
    assert propagate(at, state, cap=2)
    assert state.domains[2] == {A}
    assert state.mismatches == [2, 0]


def test_propagate_cap_zero_fails(at):
    assert not propagate(at, SearchState.initial(build_model(at)), cap=0)


@given(instances(n=(1, 5), length=(1, 7)))
def test_propagate_cap_length_never_fails(s):
    m = build_model(s, domain_mode="unrestricted")
    state = SearchState.initial(m)
    assert propagate(s, state, cap=s.length)
    assert state.domains == list(m.domains)


@given(instances(n=(1, 5), length=(2, 7)), st.data())
def test_propagate_keeps_sums_under_cap(s, data):
    m = build_model(s)
    cap = data.draw(st.integers(0, s.length))
    state = SearchState.initial(m)
    for j in range(s.length):
        if data.draw(st.booleans()):
            state.assignment[j] = data.draw(st.sampled_from(sorted(m.domains[j])))
    before = [set(d) for d in state.domains]
    if propagate(s, state, cap):
        for x, f in zip(state.mismatches, state.forced_mismatches):
            assert x + f <= cap
        assert all(set(d) <= b for d, b in zip(state.domains, before))
    else:
        # failure is only reported when no completion fits under the cap
        fixed = {j: v for j, v in enumerate(state.assignment) if v is not None}
        sols = oracle_solutions(s, cap, m.domains)
        assert not any(all(s.alphabet.code(w[j]) == v for j, v in fixed.items())
                       for w in sols)


# -- optimisation ----------------------------------------------------------------

@pytest.mark.parametrize("rows,d", [(["AAA", "TTT"], 2), (["ACGT"], 0),
                                    (["AAAA", "AATT", "TTTT"], 2)])
def test_solve_min_examples(rows, d):
    s = encode_strings(rows)
    res = solve_min(build_model(s))
    assert res.status == "solved" and res.best_d == d
    assert radius(res.witnesses[0], s) == d


def test_solve_min_known_witness():
    s = encode_strings(["AAAA", "AATT", "TTTT"])
    assert solve_min(build_model(s)).witnesses == ["AATT"]


def test_node_limit_before_incumbent():
    s = encode_strings(["ACGTAC", "TGCATG", "CATGCA"])
    res = solve_min(build_model(s), {"node_limit": 0})
    assert res.status == "resource-limit" and res.best_d is None
    assert res.frontier is not None


def test_solve_min_rejects_other_modes(at):
    with pytest.raises(ValueError):
        solve_min(build_model(at, "decide", d=2))


@given(instances(n=(1, 5), length=(1, 6)), st.sampled_from(["pwm", "sdf"]),
       st.sampled_from(["restricted", "unrestricted"]))
def test_solve_min_matches_oracle(s, heuristic, domain_mode):
    m = build_model(s, heuristic=heuristic, domain_mode=domain_mode)
    res = solve_min(m)
    d = oracle_min(s)
    assert res.status == "solved" and res.best_d == d
    assert radius(res.witnesses[0], s) == d
    assert distance_lower_bound(s) <= res.best_d <= hamming_diameter(s)
    ds = [x for _, x in res.trace]
    assert all(a > b for a, b in zip(ds, ds[1:]))
    assert ds[-1] == d
    assert res.nodes <= search_tree_bound(m)


@given(instances(n=(2, 5), length=(2, 6)), st.integers(0, 1000))
def test_tie_seed_and_pair_bound_keep_answers(s, seed):
    d = oracle_min(s)
    assert solve_min(build_model(s, tie_seed=seed)).best_d == d
    m = build_model(s, pair_bound=True)
    assert solve_min(m).best_d == d
    assert sorted(enumerate_all(build_model(s, "enumerate", d=d, pair_bound=True)).witnesses) \
        == sorted(oracle_solutions(s, d, m.domains))


@given(instances(n=(2, 5), length=(2, 6)))
def test_root_sac_keeps_answers(s):
    assert solve_min(build_model(s, root_sac=True)).best_d == oracle_min(s)


# -- decision --------------------------------------------------------------------

def test_decide_examples(at):
    assert decide(build_model(at, "decide", d=1)).status == "unsat"
    res = decide(build_model(at, "decide", d=2))
    assert res.status == "solved" and radius(res.witnesses[0], at) <= 2
    assert decide(build_model(at, "decide", d=3)).status == "solved"


@given(instances(n=(1, 5), length=(1, 6)), st.data())
def test_decide_matches_oracle(s, data):
    d = data.draw(st.integers(0, s.length))
    dm = data.draw(st.sampled_from(["restricted", "unrestricted"]))
    res = decide(build_model(s, "decide", domain_mode=dm, d=d))
    assert (res.status == "solved") == (oracle_min(s) <= d)
    if res.status == "solved":
        assert radius(res.witnesses[0], s) <= d


def test_decide_switches_d(at):
    m = build_model(at, "optimize")
    assert decide(m, 2).status == "solved"
    with pytest.raises(ValueError):
        decide(m)


# -- enumeration -----------------------------------------------------------------

def test_enumerate_examples(at):
    res = enumerate_all(build_model(at, "enumerate", d=2))
    assert res.solutions == 6
    assert set(res.witnesses) == {"AAT", "ATA", "TAA", "ATT", "TAT", "TTA"}
    assert enumerate_all(build_model(at, "enumerate", domain_mode="unrestricted", d=2)) \
        .solutions == 18
    single = encode_strings(["AAA"])
    assert enumerate_all(build_model(single, "enumerate", d=0)).witnesses == ["AAA"]


@given(instances(n=(1, 5), length=(1, 6)), st.sampled_from(["pwm", "sdf"]))
def test_enumerate_matches_oracle(s, heuristic):
    d = oracle_min(s)
    full = enumerate_all(build_model(s, "enumerate", heuristic, "unrestricted", d))
    rest = enumerate_all(build_model(s, "enumerate", heuristic, "restricted", d))
    assert len(full.witnesses) == len(set(full.witnesses)) == full.solutions
    assert set(full.witnesses) == oracle_solutions(s, d)
    assert set(rest.witnesses) == oracle_solutions(s, d, position_domains(s))
    assert set(rest.witnesses) <= set(full.witnesses)
    assert all(radius(w, s) == d for w in full.witnesses)


@given(instances(n=(2, 4), length=(2, 5)))
def test_heuristics_agree_on_sets(s):
    d = oracle_min(s)
    sets = [set(enumerate_all(build_model(s, "enumerate", h, "unrestricted", d)).witnesses)
            for h in ("pwm", "sdf")]
    assert sets[0] == sets[1]


def test_enumeration_order_is_reproducible():
    s = encode_strings(["ACGTA", "TTGCA", "ACCTG"])
    runs = [enumerate_all(build_model(s, "enumerate", domain_mode="unrestricted", d=3))
            .witnesses for _ in range(2)]
    assert runs[0] == runs[1]


# -- resuming --------------------------------------------------------------------

@given(instances(n=(2, 5), length=(3, 6)), st.integers(1, 30),
       st.sampled_from(["optimize", "enumerate"]))
def test_resume_repeats_nothing(s, chunk, mode):
    d = oracle_min(s) if mode == "enumerate" else None
    model = build_model(s, mode, domain_mode="unrestricted", d=d)
    whole = Search(model).run()
    frontier, nodes, found, best = (), 0, [], None
    for _ in range(10_000):
        search = Search(model, frontier, incumbent=best)
        res = search.run(node_limit=chunk)
        nodes += res.nodes
        found += res.witnesses if mode == "enumerate" else []
        if res.best_d is not None:
            best = res.best_d
        if res.finished:
            break
        frontier = res.frontier
    if mode == "enumerate":
        assert nodes == whole.nodes
        assert found == whole.witnesses
    else:
        # a resumed search starts at the tighter cap, so it can only prune more
        assert nodes <= whole.nodes
        assert best == whole.best_d


def test_zero_time_limit_keeps_frontier(at):
    m = build_model(at)
    res = Search(m).run(time_limit=0)
    assert res.status == "timeout" and res.frontier == [] and res.nodes == 0


def test_bad_frontier_rejected(at):
    from closestring.solver import FrontierStep
    with pytest.raises(ValueError):
        Search(build_model(at), [FrontierStep(0, C)])


# -- root probe ------------------------------------------------------------------

def test_root_sac_examples(at):
    m = build_model(at)
    assert root_sac_probe(m, cap=3).domains == m.domains
    assert root_sac_probe(m, cap=2).domains == m.domains
    with pytest.raises(Unsatisfiable):
        root_sac_probe(m, cap=1)


def test_root_sac_narrows():
    # position 3 cannot be A at cap 1: string 2 would already be 2 away
    s = encode_strings(["AAA", "ATT"])
    m = root_sac_probe(build_model(s), cap=1)
    assert m.domains[0] == {A}
