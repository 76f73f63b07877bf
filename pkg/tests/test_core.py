import itertools

import pytest
from hypothesis import given, strategies as st

from buchiavg.core import (
    Mdp,
    bsccs,
    classical_buchi,
    format_mdp,
    gen_worst_case,
    oracle_almost_sure,
    parse_mdp,
    random_attractor,
    reverse_reachable,
)
from buchiavg.errors import CapacityError, InputError, ParseError

from conftest import mdps


def naive_attractor(mdp, u, alive):
    """X_{i+1} = X_i plus random vertices with an edge into X_i plus
    player-1 vertices whose alive successors all lie in X_i; round by round."""
    current = set(u)
    while True:
        nxt = set(current)
        for v in alive - current:
            succ = [w for w in mdp.succ[v] if w in alive]
            if mdp.kinds[v] == "R" and any(w in current for w in succ):
                nxt.add(v)
            if mdp.kinds[v] == "P" and all(w in current for w in succ):
                nxt.add(v)
        if nxt == current:
            return frozenset(current)
        current = nxt


def naive_reach(succ, targets, alive):
    reach = set(targets)
    changed = True
    while changed:
        changed = False
        for v in alive - reach:
            if any(w in reach for w in succ[v] if w in alive):
                reach.add(v)
                changed = True
    return frozenset(reach)


# ---------------------------------------------------------------- Mdp type


def test_mdp_rejects_vertex_without_successor():
    with pytest.raises(InputError):
        Mdp(((0,), ()), "PP", frozenset())


def test_mdp_rejects_out_of_range_edge_and_buchi():
    with pytest.raises(InputError):
        Mdp(((1,),), "P", frozenset())
    with pytest.raises(InputError):
        Mdp(((0,),), "P", frozenset({3}))


def test_mdp_rejects_bad_kind_and_duplicates():
    with pytest.raises(InputError):
        Mdp(((0,),), "X", frozenset())
    with pytest.raises(InputError):
        Mdp(((0, 0),), "P", frozenset())


# ------------------------------------------------------- reverse_reachable


def test_reverse_reachable_all_targets():
    g = [(1,), (0,), (2,)]
    assert reverse_reachable(g, {0, 1, 2}) == {0, 1, 2}


def test_reverse_reachable_chain():
    assert reverse_reachable([(1,), (2,), (2,)], {2}) == {0, 1, 2}


def test_reverse_reachable_two_components():
    assert reverse_reachable([(0,), (2,), (2,)], {2}) == {1, 2}


def test_reverse_reachable_respects_alive():
    # v0 -> v1 -> v2 with v1 removed: v0 is cut off
    assert reverse_reachable([(1,), (2,), (2,)], {2}, alive={0, 2}) == {2}


def test_reverse_reachable_errors():
    with pytest.raises(InputError):
        reverse_reachable([(0,)], {5})
    with pytest.raises(InputError):
        reverse_reachable([(0,), (1,)], {1}, alive={0})


@given(mdps(), st.data())
def test_reverse_reachable_matches_fixed_point(mdp, data):
    alive = data.draw(st.frozensets(st.integers(0, mdp.n - 1)))
    targets = data.draw(st.frozensets(st.sampled_from(sorted(alive)))) if alive else frozenset()
    got = reverse_reachable(mdp, targets, alive)
    assert got == naive_reach(mdp.succ, targets, set(alive))
    # closed: no edge from alive minus S into S
    for v in alive - got:
        assert not any(w in got for w in mdp.succ[v])


@given(mdps(), st.data())
def test_reverse_reachable_idempotent_and_monotone(mdp, data):
    a = data.draw(st.frozensets(st.integers(0, mdp.n - 1)))
    b = data.draw(st.frozensets(st.integers(0, mdp.n - 1)))
    s = reverse_reachable(mdp, a)
    assert reverse_reachable(mdp, s) == s
    assert s <= reverse_reachable(mdp, a | b)


# -------------------------------------------------------- random_attractor


def test_attractor_of_empty_set(srb):
    assert random_attractor(srb, set()) == frozenset()


def test_attractor_random_vertex_joins(srb):
    assert random_attractor(srb, {0}) == {0, 1}


def test_attractor_player1_needs_all_successors():
    # p=0 player 1 with successors a=1, c=2; u = {a}; c is a self-looping player-1 vertex
    mdp = Mdp(((1, 2), (1,), (2,)), "PPP", frozenset())
    assert 0 not in random_attractor(mdp, {1})


@given(mdps(), st.data())
def test_attractor_matches_inductive_rule(mdp, data):
    alive = set(range(mdp.n))
    u = data.draw(st.frozensets(st.integers(0, mdp.n - 1)))
    got = random_attractor(mdp, u)
    assert got == naive_attractor(mdp, u, alive)
    assert got >= u
    for v in got - u:
        if mdp.kinds[v] == "R":
            assert any(w in got for w in mdp.succ[v])
        else:
            assert all(w in got for w in mdp.succ[v])


@given(mdps(), st.data())
def test_attractor_is_minimal(mdp, data):
    # dropping any derived vertex leaves a set the rule immediately re-grows
    u = data.draw(st.frozensets(st.integers(0, mdp.n - 1)))
    got = random_attractor(mdp, u)
    for v in got - u:
        smaller = got - {v}
        assert naive_attractor(mdp, smaller, set(range(mdp.n))) != smaller


# ----------------------------------------------------------- classical_buchi


def test_single_buchi_self_loop():
    res = classical_buchi(Mdp(((0,),), "P", frozenset({0})))
    assert res.winning == {0} and res.iterations == 1 and res.removals == ()


def test_srb_fixture(srb):
    res = classical_buchi(srb)
    assert res.winning == {2}
    assert res.iterations == 2
    assert res.removals == (frozenset({0, 1}),)


def test_worst_case_three_stages():
    res = classical_buchi(gen_worst_case(3))
    assert res.iterations == 4 and res.winning == {0}


def test_degenerate_empty_graph_counts_final_pass():
    # no Büchi vertex: everything is removed at once, then one empty pass
    res = classical_buchi(Mdp(((1,), (0,)), "PR", frozenset()))
    assert res.winning == frozenset()
    assert res.iterations == 2
    assert res.removals == (frozenset({0, 1}),)
    assert res.reach_sizes == (0, 0)


@given(mdps())
def test_solve_result_invariants(mdp):
    res = classical_buchi(mdp)
    seen = set(res.winning)
    for r in res.removals:
        assert r and not (r & seen)
        seen |= r
    assert seen == set(range(mdp.n))
    assert res.iterations == len(res.removals) + 1 <= mdp.n + 1
    assert res.work <= res.iterations * mdp.edge_count
    assert res.winning <= reverse_reachable(mdp, mdp.buchi)


@given(mdps())
def test_classical_matches_oracle(mdp):
    assert classical_buchi(mdp).winning == oracle_almost_sure(mdp)


# -------------------------------------------------------------------- oracle


def test_oracle_srb(srb):
    assert oracle_almost_sure(srb) == {2}


def test_oracle_all_buchi():
    mdp = Mdp(((1, 2), (0,), (2, 0)), "PRP", frozenset({0, 1, 2}))
    assert oracle_almost_sure(mdp) == {0, 1, 2}


def test_oracle_worst_case_two_stages():
    assert oracle_almost_sure(gen_worst_case(2)) == {0}


def test_oracle_capacity_guard():
    mdp = Mdp(tuple((0, 1) for _ in range(12)), "P" * 12, frozenset({0}))
    with pytest.raises(CapacityError):
        oracle_almost_sure(mdp, limit=1000)


# --------------------------------------------------------------------- bsccs


def test_bscc_self_loop():
    assert bsccs([(0,)]) == [frozenset({0})]


def test_bscc_two_cycle():
    assert bsccs([(1,), (0,)]) == [frozenset({0, 1})]


def test_bscc_transient_root():
    assert sorted(bsccs([(1, 2), (1,), (2,)]), key=min) == [frozenset({1}), frozenset({2})]


@given(mdps())
def test_every_vertex_reaches_a_bscc(mdp):
    comps = bsccs(mdp.succ)
    union = frozenset().union(*comps)
    for comp in comps:
        # bottom: nothing leaves, and it is strongly connected
        assert all(w in comp for v in comp for w in mdp.succ[v])
        for v in comp:
            assert naive_reach(mdp.succ, {v}, set(range(mdp.n))) >= comp
    for v in range(mdp.n):
        assert naive_reach(mdp.succ, union, set(range(mdp.n))) >= {v}


# ------------------------------------------------------------ worst case


def test_worst_case_one_stage():
    mdp = gen_worst_case(1)
    assert mdp.n == 4 and classical_buchi(mdp).iterations == 2


def test_worst_case_removes_one_stage_per_iteration():
    res = classical_buchi(gen_worst_case(4))
    assert res.removals == tuple(frozenset({3 * i - 2, 3 * i - 1, 3 * i}) for i in range(1, 5))


@pytest.mark.parametrize("stages", [1, 2, 3])
def test_worst_case_oracle_agrees(stages):
    mdp = gen_worst_case(stages)
    assert oracle_almost_sure(mdp) == classical_buchi(mdp).winning == {0}


def test_worst_case_linear_iterations():
    for s in range(1, 51):
        mdp = gen_worst_case(s)
        assert mdp.n == 3 * s + 1
        assert classical_buchi(mdp).iterations == s + 1


def test_worst_case_rejects_zero():
    with pytest.raises(InputError):
        gen_worst_case(0)


# --------------------------------------------------------------- text format


@given(mdps(), st.lists(st.text(alphabet="abc =:", max_size=10), max_size=2))
def test_text_round_trip(mdp, comments):
    text = format_mdp(mdp, comments)
    assert parse_mdp(text) == mdp
    assert format_mdp(parse_mdp(text), comments) == text


def test_parse_names_line_of_bad_kind():
    with pytest.raises(ParseError, match="line 3"):
        parse_mdp("2\n0 P 1 1 0\n1 X 0 1 0\n")


@pytest.mark.parametrize(
    "text, line",
    [
        ("2\n0 P 1 1 0\n0 P 0 1 0\n", 3),  # duplicate id
        ("1\n0 P 1 2 0\n", 2),  # count mismatch
        ("1\n0 P 2 1 0\n", 2),  # bad Büchi flag
        ("1\n0 P 1 1 4\n", 2),  # successor out of range
        ("x\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_mdp(text)
    assert info.value.line == line


def test_parse_skips_comments():
    mdp = parse_mdp("# hello\n1  # one vertex\n0 P 1 1 0\n")
    assert mdp == Mdp(((0,),), "P", frozenset({0}))


def test_exhaustive_two_vertices_against_oracle():
    options = [(0,), (1,), (0, 1)]
    for succ in itertools.product(options, repeat=2):
        for kinds in ("PP", "PR", "RP", "RR"):
            for b in range(4):
                mdp = Mdp(succ, kinds, frozenset(v for v in range(2) if b >> v & 1))
                assert classical_buchi(mdp).winning == oracle_almost_sure(mdp)
