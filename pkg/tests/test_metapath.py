import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_expr, random_tpg
from regrank.fixtures import fixture
from regrank.metapath import (
    CANNED,
    Concat,
    Join,
    MetaPathSyntaxError,
    MetaPathTypeError,
    Repeat,
    Select,
    Seq,
    WalkLimitError,
    all_sequences,
    canned,
    enumerate_paths,
    expand,
    join,
    matches,
    parse_description,
    render,
    repeat,
    seq,
    simplify,
    walk_types,
)
from regrank.preferences import build_tpg, derive_preferences

SEQS_11 = list(all_sequences(11))


def denotation(e, n=11):
    return {s for s in SEQS_11 if len(s) <= n and matches(e, s)}


# -- parsing ---------------------------------------------------------------


def test_parse_grank_structure():
    e = parse_description("U[PUP|PRP]*R")
    assert e == Concat((Seq("U"), Repeat(Select((Seq("PUP"), Seq("PRP")))), Seq("R")))
    assert e == canned("grank")


def test_parse_unc_structure():
    e = parse_description("(UPU|UPRPU)*PR")
    assert e == Concat((Repeat(Select((Seq("UPU"), Seq("UPRPU")))), Seq("PR")))
    assert parse_description("unc") == e


def test_parse_type_mismatch():
    with pytest.raises(MetaPathTypeError):
        parse_description("UR")


@pytest.mark.parametrize("text", ["", "U(", "UP)", "U|", "UX", "*U", "U[P"])
def test_parse_syntax_errors(text):
    with pytest.raises((MetaPathSyntaxError, MetaPathTypeError)):
        parse_description(text)


def test_syntax_error_reports_position():
    with pytest.raises(MetaPathSyntaxError) as info:
        parse_description("UPX")
    assert info.value.pos == 2


@pytest.mark.parametrize("name", sorted(CANNED))
def test_render_round_trip(name):
    e = canned(name)
    assert parse_description(render(e)) == e


# -- constructors ----------------------------------------------------------


def test_join_literals():
    assert join(seq("UP"), seq("PR")) == Seq("UPR")
    assert join(seq("U"), seq("UP")) == Seq("UP")
    assert join(seq("UP"), seq("PU")) == Seq("UPU")
    with pytest.raises(MetaPathTypeError):
        join(seq("UP"), seq("UP"))


def test_repeat_semantics():
    r = repeat(seq("UPU"))
    assert expand(r, 7) == {"U", "UPU", "UPUPU", "UPUPUPU"}
    assert matches(r, "U")
    assert not matches(r, "UPUP")
    with pytest.raises(MetaPathTypeError):
        repeat(seq("UP"))


# -- matching --------------------------------------------------------------


def test_unreliable_grank_path():
    assert matches(canned("grank"), "UPRPRPR")
    for name in ("unc", "pnc", "rnc"):
        assert not matches(canned(name), "UPRPRPR")


@pytest.mark.parametrize("name", ["unc", "pnc", "rnc", "grank"])
def test_upr_is_reliable_everywhere(name):
    assert matches(canned(name), "UPR")


def test_rnc_short_sequences():
    rnc = canned("rnc")
    assert not matches(rnc, "UPUPR")
    assert {s for s in expand(rnc, 5)} == {"UPR"}


def test_canned_witnesses():
    unc, pnc, rnc = canned("unc"), canned("pnc"), canned("rnc")
    assert [matches(d, "UPUPR") for d in (unc, pnc, rnc)] == [True, True, False]
    assert [matches(d, "UPRPUPR") for d in (unc, pnc, rnc)] == [True, False, True]


def test_unc_contains_pnc_and_rnc():
    unc, pnc, rnc = (denotation(canned(n)) for n in ("unc", "pnc", "rnc"))
    assert pnc <= unc and rnc <= unc
    assert pnc != unc and rnc != unc


def test_empty_sequence_never_matches():
    assert not matches(canned("grank"), "")


@pytest.mark.parametrize("k", range(60))
def test_matcher_agrees_with_expansion(k):
    e = random_expr(random.Random(1000 + k), ops=4)
    assert denotation(e) == set(expand(e, 11))


def test_non_schema_sequences_never_match():
    exprs = [canned(n) for n in CANNED] + [random_expr(random.Random(k), 4) for k in range(20)]
    bad = [s for s in all_sequences(6, schema_only=False) if s not in set(all_sequences(6))]
    assert not any(matches(e, s) for e in exprs for s in bad)


# -- simplification ----------------------------------------------------------


def test_simplify_grank_join_form():
    e = parse_description("UP.[PUP|PRP]*.PR")
    assert simplify(e) == parse_description("U[PUP|PRP]*R")


def test_simplify_repeat_free_is_identity():
    for text in ("UPU", "UPR|UPR", "UPRPU"):
        e = parse_description(text)
        assert simplify(e) == e


def test_simplify_repeat_then_literal():
    e = Join((Repeat(Seq("UPU")), Seq("UPR")))
    s = simplify(e)
    assert not isinstance(s, Join)
    assert denotation(s) == denotation(parse_description("(UPU)*PR")) == denotation(e)


@pytest.mark.parametrize("k", range(200))
def test_simplify_preserves_denotation(k):
    e = random_expr(random.Random(k), ops=4)
    assert denotation(simplify(e)) == denotation(e)


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_simplify_is_idempotent(k):
    s = simplify(random_expr(random.Random(k), ops=4))
    assert simplify(s) == s


# -- walk enumeration --------------------------------------------------------


def test_fig6_contains_unreliable_walk():
    g = build_tpg(derive_preferences(fixture("fig6")))
    jack = g.user_index["Jack"]
    labels = lambda w: tuple(
        str(g.users[k]) if t == "U" else (f"{g.items[g.pref_loser[k]]}<{g.items[g.pref_winner[k]]}" if t == "P" else str(g.rep_node(k)))
        for t, k in w
    )
    walks = {labels(w): walk_types(w) for w in enumerate_paths(g, ("U", jack), 6)}
    target = ("Jack", "A<B", "B_d", "C<B", "C_u", "C<A", "A_d")
    assert walks[target] == "UPRPRPR"


def test_zero_length_enumeration():
    g = build_tpg([("u", "A", "B")])
    assert enumerate_paths(g, ("U", 0), 0) == {(("U", 0),)}


def test_minimal_graph_walk_count():
    # u; u-p; u-p-u, u-p-A_d, u-p-B_u
    g = build_tpg([("u", "A", "B")])
    walks = enumerate_paths(g, ("U", 0), 2)
    assert len(walks) == 5
    assert sorted(walk_types(w) for w in walks) == ["U", "UP", "UPR", "UPR", "UPU"]


def test_walk_cap():
    g = random_tpg(3)
    with pytest.raises(WalkLimitError):
        enumerate_paths(g, ("U", 0), 9, cap=100)
