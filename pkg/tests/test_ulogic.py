import itertools

import pytest

from teamsem.dependencies import Registry, fo_dependency
from teamsem.errors import DomainError, ValidationError
from teamsem.harness import check_semantic_equivalence, enumerate_teams
from teamsem.structures import (RelStructure, Structure, Team,
                                enumerate_relations, identity_type_of)
from teamsem.syntax import (USentence, parse_formula, to_text,
                            validate_usentence)
from teamsem.tarski import tarski_eval, tarski_sentence
from teamsem.teameval import team_eval
from teamsem.ulogic import (disjunction_translate, inline_dependency,
                            u_embedding_check, usentence_conjoin,
                            usentence_translate)

NE_U = validate_usentence("exists x. (R(x) & forall y. (R(y) -> y=y))")
CONST_U = validate_usentence("exists x. forall y. (R(y) -> y=x)")
SINGLETON_U = validate_usentence("exists x. (R(x) & forall y. (R(y) -> y=x))")
EMPTY_U = validate_usentence("exists x. forall y. (R(y) -> y!=y)")
TRIVIAL_U = validate_usentence("exists x. (x=x & forall y. (R(y) -> y=y))")


def rel_structures(max_domain, arity):
    for m in range(1, max_domain + 1):
        domain = [f"e{i + 1}" for i in range(m)]
        for rel in enumerate_relations(domain, arity):
            yield domain, rel


def tarski_holds(sentence: USentence, domain, rel) -> bool:
    structure = Structure(domain, {}, {sentence.rel_name: (sentence.rel_arity, rel)})
    return tarski_sentence(structure, sentence.to_formula())


class TestConjoin:
    def test_ne_and_constancy_give_singleton(self):
        conj = usentence_conjoin(NE_U, CONST_U)
        for domain, rel in rel_structures(3, 1):
            want = tarski_holds(NE_U, domain, rel) and \
                tarski_holds(CONST_U, domain, rel)
            assert tarski_holds(conj, domain, rel) == want
            assert want == tarski_holds(SINGLETON_U, domain, rel)

    def test_trivial_is_neutral(self):
        conj = usentence_conjoin(SINGLETON_U, TRIVIAL_U)
        for domain, rel in rel_structures(3, 1):
            assert tarski_holds(conj, domain, rel) == \
                tarski_holds(SINGLETON_U, domain, rel)

    def test_exhaustive_over_catalogue_pairs(self):
        catalogue = [NE_U, CONST_U, SINGLETON_U, EMPTY_U, TRIVIAL_U]
        for a, b in itertools.product(catalogue, repeat=2):
            conj = usentence_conjoin(a, b)
            for domain, rel in rel_structures(2, 1):
                want = tarski_holds(a, domain, rel) and tarski_holds(b, domain, rel)
                assert tarski_holds(conj, domain, rel) == want

    def test_arity_mismatch_rejected(self):
        two = validate_usentence("exists x. forall y1,y2. (R(y1,y2) -> y1=y2)")
        with pytest.raises(ValidationError):
            usentence_conjoin(NE_U, two)

    def test_variable_renaming_is_deterministic(self):
        conj = usentence_conjoin(SINGLETON_U, SINGLETON_U)
        assert conj.exists_vars == ("x", "x_1")


class TestTranslate:
    def test_singleton_compiled_form(self):
        compiled = usentence_translate(SINGLETON_U)
        assert to_text(compiled) == "exists x. const(x) & (x=x | ne(x) & x=y) & y=x"

    def test_singleton_team_verdicts(self):
        compiled = usentence_translate(SINGLETON_U)
        m = Structure(["a", "b"])
        assert team_eval(m, Team(["y"], [("a",)]), compiled)
        assert not team_eval(m, Team(["y"], [("a",), ("b",)]), compiled)

    def test_empty_team_rejected_when_r_asserted(self):
        # The nonemptiness disjunct cannot be realized on the empty team,
        # matching the sentence's failure on the empty relation.
        compiled = usentence_translate(SINGLETON_U)
        m = Structure(["a", "b"])
        assert not team_eval(m, Team(["y"]), compiled)

    def test_constancy_class_compiles_to_constancy(self):
        compiled = usentence_translate(CONST_U)
        assert to_text(compiled) == "exists x. const(x) & y=x"
        verdict = check_semantic_equivalence(
            compiled, parse_formula("const(y)"), max_domain=3)
        assert verdict.passed

    def test_soundness_exhaustive_unary(self):
        for sentence in (NE_U, CONST_U, SINGLETON_U, EMPTY_U, TRIVIAL_U):
            compiled = usentence_translate(sentence)
            for m in range(1, 3):
                domain = [f"e{i + 1}" for i in range(m)]
                structure = Structure(domain)
                for team in enumerate_teams(domain, sentence.forall_vars):
                    rel = {row for row in team.rows}
                    want = tarski_holds(sentence, domain, rel)
                    assert team_eval(structure, team, compiled, "optimized") == want

    def test_soundness_binary(self):
        diag = validate_usentence("exists x. forall y1,y2. (R(y1,y2) -> y1=y2)")
        compiled = usentence_translate(diag)
        domain = ["e1", "e2"]
        structure = Structure(domain)
        for team in enumerate_teams(domain, ("y1", "y2")):
            rel = set(team.rows)
            assert team_eval(structure, team, compiled, "optimized") == \
                tarski_holds(diag, domain, rel)

    def test_constants_rejected(self):
        with_const = validate_usentence(
            "exists x. (x=c & forall y. (R(y) -> y=x))", constants=("c",))
        with pytest.raises(ValidationError):
            usentence_translate(with_const)


class TestDisjunctionTranslate:
    def test_empty_class_or_nonempty_is_everything(self):
        compiled = disjunction_translate([EMPTY_U, NE_U])
        for m in range(1, 3):
            domain = [f"e{i + 1}" for i in range(m)]
            structure = Structure(domain)
            for team in enumerate_teams(domain, ("y",)):
                assert team_eval(structure, team, compiled)

    def test_single_is_plain_translation(self):
        assert to_text(disjunction_translate([SINGLETON_U])) == \
            to_text(usentence_translate(SINGLETON_U))

    def test_constancy_or_singleton(self):
        compiled = disjunction_translate([CONST_U, SINGLETON_U])
        target = parse_formula("const(y) <|> const(y) & ne(y)")
        assert check_semantic_equivalence(compiled, target, max_domain=3).passed

    def test_universal_tuples_renamed_to_match(self):
        other = validate_usentence("exists x. forall w. (R(w) -> w=x)")
        compiled = disjunction_translate([CONST_U, other])
        from teamsem.syntax import free_vars
        assert free_vars(compiled) == {"y1"}
        m = Structure(["a", "b"])
        assert team_eval(m, Team(["y1"], [("a",)]), compiled)

    def test_arity_mismatch(self):
        two = validate_usentence("exists x. forall y1,y2. (R(y1,y2) -> y1=y2)")
        with pytest.raises(DomainError):
            disjunction_translate([NE_U, two])

    def test_empty_list(self):
        with pytest.raises(ValidationError):
            disjunction_translate([])


class TestUEmbedding:
    def test_identity_embedding_passes(self):
        s = RelStructure.make(["a", "b"], 2, [("a", "b")])
        assert u_embedding_check(s, s).passed

    def test_fresh_tuple_fails(self):
        sub = RelStructure.make(["a", "b"], 1, [("a",)])
        sup = RelStructure.make(["a", "b", "c"], 1, [("a",), ("c",)])
        verdict = u_embedding_check(sub, sup)
        assert not verdict.passed
        assert verdict.counterexample["condition"] == 2
        assert verdict.counterexample["tuple"] == ["c"]

    def test_trace_violation_fails_condition_one(self):
        sub = RelStructure.make(["a", "b"], 2, [("a", "b")])
        sup = RelStructure.make(["a", "b"], 2, [("a", "b"), ("b", "a")])
        verdict = u_embedding_check(sub, sup)
        assert not verdict.passed
        assert verdict.counterexample["condition"] == 1

    def test_domains_must_nest(self):
        sub = RelStructure.make(["a", "z"], 1, [])
        sup = RelStructure.make(["a", "b"], 1, [])
        with pytest.raises(DomainError):
            u_embedding_check(sub, sup)

    def test_reduction_matches_quantifier_free_transfer(self):
        # When the check fails, the negated identity type of the offending
        # tuple is a concrete universally guarded property that transfers
        # downward but not upward; when it passes, no quantifier-free
        # property from a generated corpus may violate transfer.
        def guarded_transfer(struct: RelStructure, theta, names, params) -> bool:
            s = struct.as_structure()
            return all(tarski_eval(s, dict(zip(names, t + params)), theta)
                       for t in struct.tuples)

        domain_b = ["e1", "e2", "e3"]
        for s_rel in [frozenset(), frozenset({("e1",)}),
                      frozenset({("e1",), ("e3",)}),
                      frozenset({("e2",), ("e3",)})]:
            sup = RelStructure.make(domain_b, 1, s_rel)
            for size_a in (1, 2):
                for dom_a in itertools.combinations(domain_b, size_a):
                    aset = set(dom_a)
                    trace = {t for t in s_rel if aset.issuperset(t)}
                    sub = RelStructure.make(dom_a, 1, trace)
                    verdict = u_embedding_check(sub, sup)
                    params = tuple(sub.domain)
                    names = ["y1"] + [f"a{i}" for i in range(len(params))]
                    if verdict.passed:
                        # corpus: identity types of all candidate tuples
                        for cand in itertools.product(sub.domain, repeat=1):
                            tau = identity_type_of(cand + params).formula(names)
                            if guarded_transfer(sub, tau, names, params):
                                assert guarded_transfer(sup, tau, names, params)
                    else:
                        bad = tuple(verdict.counterexample["tuple"])
                        from teamsem.syntax import Not, to_nnf
                        tau = identity_type_of(bad + params)
                        theta = to_nnf(Not(tau.formula(names)))
                        assert guarded_transfer(sub, theta, names, params)
                        assert not guarded_transfer(sup, theta, names, params)


class TestInlineDependency:
    def test_compiler_composition_preserves_satisfaction(self):
        constcls = fo_dependency("constcls", 1, CONST_U.to_formula())
        registry = Registry([constcls])
        translation = usentence_translate(CONST_U)
        hosts = [
            "exists u. (D:constcls(u) & E(u,x))",
            "D:constcls(x) | E(x,x)",
            "forall u. (E(u,u) ->> D:constcls(u))",
        ]
        for text in hosts:
            host = parse_formula(text, registry)
            inlined = inline_dependency(host, "constcls", translation,
                                        CONST_U.forall_vars)
            for m in range(1, 3):
                domain = [f"e{i + 1}" for i in range(m)]
                for rel in enumerate_relations(domain, 2):
                    structure = Structure(domain, {}, {"E": (2, rel)})
                    for team in enumerate_teams(domain, ("x",)):
                        assert team_eval(structure, team, host, "memoized",
                                         registry) == \
                            team_eval(structure, team, inlined, "memoized",
                                      registry), (text, team)

    def test_bound_variables_freshened(self):
        constcls = fo_dependency("c2", 1, CONST_U.to_formula())
        registry = Registry([constcls])
        translation = usentence_translate(CONST_U)  # binds x internally
        host = parse_formula("exists x. (D:c2(x) & ne(x))", registry)
        inlined = inline_dependency(host, "c2", translation,
                                    CONST_U.forall_vars)
        # the translation's own bound x must not capture the host's x
        assert "x_1" in to_text(inlined) or "const(x)" not in to_text(inlined)
