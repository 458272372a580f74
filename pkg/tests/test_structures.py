import itertools

import pytest
from hypothesis import given, strategies as st

from teamsem.errors import DomainError
from teamsem.structures import (RelStructure, Structure, Team,
                                enumerate_retraction_homs, extend_universal,
                                full_team, identity_type_of, restrict_team,
                                team_equiv_on, team_projection)
from teamsem.syntax import parse_formula, to_text
from teamsem.tarski import tarski_eval


M_AB = Structure(["a", "b"])


def team(rows, variables=("x", "y")):
    return Team(variables, rows)


class TestTeamProjection:
    def test_direct(self):
        x = team([("a", "b"), ("b", "b")])
        assert team_projection(x, ("y",)) == {("b",)}

    def test_empty_team(self):
        assert team_projection(Team(["x"]), ("x",)) == set()

    def test_repetition(self):
        x = team([("a", "b")])
        assert team_projection(x, ("x", "x", "y")) == {("a", "a", "b")}

    def test_unknown_variable(self):
        with pytest.raises(DomainError):
            team_projection(team([("a", "b")]), ("z",))

    def test_cardinality_bound(self):
        x = team([("a", "a"), ("a", "b"), ("b", "a")])
        assert len(team_projection(x, ("x",))) <= len(x.rows)

    @given(st.sets(st.tuples(st.sampled_from("ab"), st.sampled_from("ab"))))
    def test_projection_composes(self, rows):
        x = team(sorted(rows))
        once = team_projection(x, ("y", "x"))
        again = {(r[1], r[0]) for r in once}
        assert again == team_projection(x, ("x", "y"))


class TestTeamEquivOn:
    def test_agree_on_x(self):
        x = team([("a", "b")])
        y = team([("a", "c")], ("x", "y"))
        assert team_equiv_on(x, y, {"x"})

    def test_empty_pair(self):
        assert team_equiv_on(Team(["x"]), Team(["x"]), {"x"})

    def test_differ(self):
        x = Team(["x"], [("a",)])
        y = Team(["x"], [("a",), ("b",)])
        assert not team_equiv_on(x, y, {"x"})

    def test_equivalence_relation(self):
        teams = [team(rows) for rows in
                 itertools.combinations([("a", "a"), ("a", "b"), ("b", "a")], 2)]
        for a in teams:
            assert team_equiv_on(a, a, {"x"})
            for b in teams:
                assert team_equiv_on(a, b, {"x"}) == team_equiv_on(b, a, {"x"})
                for c in teams:
                    if team_equiv_on(a, b, {"x"}) and team_equiv_on(b, c, {"x"}):
                        assert team_equiv_on(a, c, {"x"})


class TestRestrictTeam:
    def test_equality_guard(self):
        x = team([("a", "b"), ("b", "b")])
        got = restrict_team(x, parse_formula("x=y"), M_AB)
        assert got.rows == {("b", "b")}

    def test_tautology(self):
        x = team([("a", "b"), ("b", "b")])
        assert restrict_team(x, parse_formula("x=x"), M_AB) == x

    def test_contradiction(self):
        x = team([("a", "b")])
        assert restrict_team(x, parse_formula("x!=x"), M_AB).rows == frozenset()

    def test_rejects_dependency_atoms(self):
        with pytest.raises(TypeError):
            restrict_team(team([("a", "b")]), parse_formula("dep(x;y)"), M_AB)

    @given(st.sets(st.tuples(st.sampled_from("ab"), st.sampled_from("ab"))))
    def test_idempotent(self, rows):
        x = team(sorted(rows))
        guard = parse_formula("x=y")
        once = restrict_team(x, guard, M_AB)
        assert restrict_team(once, guard, M_AB) == once


class TestExtendUniversal:
    def test_fresh_variable(self):
        x = Team(["x"], [("a",)])
        got = extend_universal(x, "y", M_AB)
        assert got.vars == ("x", "y")
        assert got.rows == {("a", "a"), ("a", "b")}

    def test_empty(self):
        got = extend_universal(Team(["x"]), "y", M_AB)
        assert got.rows == frozenset() and got.vars == ("x", "y")

    def test_overwrite(self):
        x = Team(["x"], [("a",)])
        got = extend_universal(x, "x", M_AB)
        assert got.rows == {("a",), ("b",)}

    def test_projection_off_new_var_unchanged(self):
        x = team([("a", "b"), ("b", "a")])
        got = extend_universal(x, "z", M_AB)
        assert team_projection(got, ("x", "y")) == team_projection(x, ("x", "y"))


class TestIdentityType:
    def test_pattern_formula(self):
        t = identity_type_of(("a", "a", "b"))
        assert to_text(t.formula()) == "x1=x2 & x1!=x3 & x2!=x3"

    def test_singleton_trivial(self):
        assert to_text(identity_type_of(("a",)).formula()) == "x1=x1"

    def test_renaming_invariance(self):
        assert identity_type_of(("a", "b")) == identity_type_of(("c", "d"))
        assert identity_type_of(("a", "a")) != identity_type_of(("c", "d"))

    def test_empty_tuple_rejected(self):
        with pytest.raises(DomainError):
            identity_type_of(())

    def test_satisfied_by_itself_and_pattern_twins(self):
        source = ("a", "a", "b")
        t = identity_type_of(source)
        m = Structure(["a", "b", "c"])
        names = ["x1", "x2", "x3"]
        for cand in itertools.product(m.domain, repeat=3):
            want = identity_type_of(cand) == t
            got = tarski_eval(m, dict(zip(names, cand)), t.formula(names))
            assert got == want
        assert t.matches(source)


class TestRetractionHoms:
    def test_loop_absorbs_pendant(self):
        sub = RelStructure.make(["a"], 2, [("a", "a")])
        sup = RelStructure.make(["a", "b"], 2, [("a", "a"), ("a", "b")])
        homs = list(enumerate_retraction_homs(sub, sup))
        # Independent check: only candidate maps send b to a.
        assert homs == [{"a": "a", "b": "a"}]

    def test_identity_on_equal_structures(self):
        s = RelStructure.make(["a", "b"], 1, [("a",)])
        assert list(enumerate_retraction_homs(s, s)) == [{"a": "a", "b": "b"}]

    def test_no_hom_without_loop(self):
        sub = RelStructure.make(["a"], 2, [])
        sup = RelStructure.make(["a", "b"], 2, [("a", "b")])
        assert list(enumerate_retraction_homs(sub, sup)) == []

    def test_exhaustive_against_direct_enumeration(self):
        # Oracle: filter all |A|^|B\A| maps directly.
        domain_b = ["a", "b", "c"]
        for s_rel in itertools.combinations(
                list(itertools.product(domain_b, repeat=2)), 3):
            sup = RelStructure.make(domain_b, 2, s_rel)
            aset = {"a", "b"}
            trace = {t for t in sup.tuples if aset.issuperset(t)}
            sub = RelStructure.make(sorted(aset), 2, trace)
            want = []
            for image in itertools.product(sorted(aset), repeat=1):
                h = {"a": "a", "b": "b", "c": image[0]}
                if all(tuple(h[e] for e in t) in sub.tuples for t in sup.tuples):
                    want.append(h)
            assert list(enumerate_retraction_homs(sub, sup)) == want

    def test_precondition(self):
        sub = RelStructure.make(["a"], 1, [("a",)])
        sup = RelStructure.make(["a", "b"], 1, [])
        with pytest.raises(DomainError):
            list(enumerate_retraction_homs(sub, sup))


class TestStructure:
    def test_nonempty_domain(self):
        with pytest.raises(DomainError):
            Structure([])

    def test_constant_outside_domain(self):
        with pytest.raises(DomainError):
            Structure(["a"], {"c": "z"})

    def test_tuple_arity_checked(self):
        with pytest.raises(DomainError):
            Structure(["a"], {}, {"E": (2, [("a",)])})

    def test_teams_collapse_duplicates(self):
        x = Team(["x"], [("a",), ("a",)])
        assert len(x.rows) == 1

    def test_full_team(self):
        assert len(full_team(("x", "y"), M_AB).rows) == 4
