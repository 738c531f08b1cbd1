"""Temporal formula semantics, templates, and automaton compilation."""

import itertools

import pytest

from hybridmon.automata import complete, determinize, label_states, minimize
from hybridmon.conditions import (
    AbstractAlphabet,
    Comparison,
    Event,
    EventSignature,
    NameAtom,
    Partition,
    SignatureSet,
    abstract_trace,
    concretize_event,
    make_trace,
)
from hybridmon.errors import HybridmonError, UnknownTemplateError
from hybridmon.temporal import (
    And,
    Leaf,
    Next,
    Not,
    Top,
    Until,
    empty_trace_eval,
    eval_formula,
    eventually,
    expand_template,
    formula_to_automaton,
    parse_formula,
    satisfies,
)


def ev(name, **payload):
    return Event.of(name, payload)


class TestParseFormula:
    def test_negation_response_shape(self, two_signatures):
        got = parse_formula("G(a -> !X F (b & z > 10))", two_signatures)
        inner_target = And(Leaf(NameAtom("b")), Leaf(Comparison("z", ">", 10.0)))
        expected = Not(
            Until(
                Top(),
                And(Leaf(NameAtom("a")), Next(Until(Top(), inner_target))),
            )
        )
        assert got == expected

    def test_eventually_desugars_to_until(self, two_signatures):
        assert parse_formula("F(b)", two_signatures) == Until(Top(), Leaf(NameAtom("b")))

    def test_not_coexistence_formalization(self):
        sigs = SignatureSet(
            [EventSignature("AT", frozenset()), EventSignature("WT", frozenset())]
        )
        got = parse_formula("G(AT -> !F(WT))", sigs)
        # Shape check through semantics: violated as soon as AT precedes WT.
        assert satisfies(got, make_trace(ev("AT"), ev("WT"))) is False
        assert satisfies(got, make_trace(ev("WT"), ev("AT"))) is True

    def test_until_is_right_associative(self, two_signatures):
        got = parse_formula("a U b U a", two_signatures)
        assert got == Until(Leaf(NameAtom("a")), Until(Leaf(NameAtom("b")), Leaf(NameAtom("a"))))


class TestEvalFormula:
    def test_negation_response_violated(self, two_signatures):
        f = parse_formula("G(a -> !X F (b & z > 10))", two_signatures)
        trace = make_trace(ev("a", x=0, y=0), ev("b", z=11))
        assert eval_formula(f, trace, 1) is False

    def test_strong_next_at_last_position(self, two_signatures):
        f = parse_formula("X a", two_signatures)
        assert eval_formula(f, make_trace(ev("a", x=0, y=0)), 1) is False

    def test_until_unfolding(self, two_signatures):
        f = parse_formula("a U b", two_signatures)
        trace = make_trace(ev("a", x=0, y=0), ev("a", x=0, y=0), ev("b", z=0))
        assert eval_formula(f, trace, 1) is True

    def test_position_out_of_range(self, two_signatures):
        f = parse_formula("a", two_signatures)
        with pytest.raises(HybridmonError):
            eval_formula(f, make_trace(ev("a", x=0, y=0)), 2)

    def test_empty_trace_convention(self, two_signatures):
        assert empty_trace_eval(parse_formula("true", two_signatures)) is True
        assert empty_trace_eval(parse_formula("a", two_signatures)) is False
        assert empty_trace_eval(parse_formula("X true", two_signatures)) is False
        assert empty_trace_eval(parse_formula("G(a -> b)", two_signatures)) is True
        assert satisfies(parse_formula("F(a)", two_signatures), ()) is False


class TestTemplates:
    @pytest.fixture
    def sigs(self):
        return SignatureSet(
            [
                EventSignature("AT", frozenset()),
                EventSignature("WT", frozenset()),
                EventSignature("b", frozenset({"z"})),
            ]
        )

    def test_response(self, sigs):
        f = expand_template(
            "response",
            activation="AT",
            target="b",
            target_condition="z > 10",
            signatures=sigs,
        )
        assert f == parse_formula("G(AT -> F(b & z > 10))", sigs) or satisfies(
            f, make_trace(ev("AT"), ev("b", z=11))
        )
        assert satisfies(f, make_trace(ev("AT"), ev("b", z=11))) is True
        assert satisfies(f, make_trace(ev("AT"), ev("b", z=9))) is False

    def test_not_coexistence(self, sigs):
        f = expand_template("not-coexistence", activation="AT", target="WT", signatures=sigs)
        assert satisfies(f, make_trace(ev("AT"), ev("WT"))) is False
        assert satisfies(f, make_trace(ev("WT"), ev("AT"))) is False
        assert satisfies(f, make_trace(ev("AT"), ev("AT"))) is True

    def test_existence(self, sigs):
        f = expand_template("existence", target="AT", signatures=sigs)
        assert f == eventually(Leaf(NameAtom("AT")))

    def test_precedence(self, sigs):
        f = expand_template("precedence", activation="AT", target="WT", signatures=sigs)
        assert satisfies(f, make_trace(ev("WT"),)) is False
        assert satisfies(f, make_trace(ev("AT"), ev("WT"))) is True
        assert satisfies(f, ()) is True

    def test_chain_templates(self, sigs):
        chain = expand_template("chain response", activation="AT", target="WT", signatures=sigs)
        assert satisfies(chain, make_trace(ev("AT"), ev("WT"))) is True
        assert satisfies(chain, make_trace(ev("AT"), ev("AT"), ev("WT"))) is False
        chain_prec = expand_template(
            "chain precedence", activation="AT", target="WT", signatures=sigs
        )
        assert satisfies(chain_prec, make_trace(ev("AT"), ev("WT"))) is True
        assert satisfies(chain_prec, make_trace(ev("WT"),)) is False

    def test_alternate_response(self, sigs):
        f = expand_template(
            "alternate response", activation="AT", target="WT", signatures=sigs
        )
        assert satisfies(f, make_trace(ev("AT"), ev("WT"))) is True
        assert satisfies(f, make_trace(ev("AT"), ev("AT"), ev("WT"))) is False

    def test_unknown_template(self, sigs):
        with pytest.raises(UnknownTemplateError):
            expand_template("no such pattern", activation="AT", target="WT", signatures=sigs)


# ---------------------------------------------------------------------------
# Automaton compilation
# ---------------------------------------------------------------------------


@pytest.fixture
def setting(two_signatures):
    partition = Partition([10.0])
    return two_signatures, partition, AbstractAlphabet(two_signatures, partition)


class TestFormulaToAutomaton:
    def test_true_is_one_accepting_true_loop(self, setting):
        _, _, alphabet = setting
        ga = formula_to_automaton(parse_formula("true", alphabet.signatures), alphabet)
        assert ga.n_states == 1
        assert ga.finals == {0}
        assert len(ga.edges) == 1
        assert all(
            alphabet.satisfies(ga.edges[0].guard, u) for u in range(len(alphabet))
        )

    def test_negation_response_language(self, setting, two_signatures):
        _, partition, alphabet = setting
        f = parse_formula("G(a -> !X F (b & z > 10))", two_signatures)
        ga = formula_to_automaton(f, alphabet)
        rejected = abstract_trace(
            partition, make_trace(ev("a", x=0, y=0), ev("b", z=11))
        )
        accepted = abstract_trace(
            partition, make_trace(ev("a", x=0, y=0), ev("b", z=9))
        )
        assert ga.accepts(alphabet, rejected) is False
        assert ga.accepts(alphabet, accepted) is True

    def test_existence_rejects_empty_and_accepts_with_occurrence(self, setting):
        two_signatures, partition, alphabet = setting
        f = parse_formula("F(a)", two_signatures)
        ga = formula_to_automaton(f, alphabet)
        assert ga.accepts(alphabet, ()) is False
        # Cross-check against the reference semantics on every abstract
        # trace of length <= 3 over class representatives.
        _assert_language_matches(ga, f, alphabet, partition, max_len=3)

    def test_completeness(self, setting, two_signatures, rng):
        _, _, alphabet = setting
        for _ in range(25):
            f = _random_formula(rng, two_signatures, [10.0], depth=3)
            ga = formula_to_automaton(f, alphabet)
            for q in range(ga.n_states):
                for u in range(len(alphabet)):
                    assert any(
                        alphabet.satisfies(e.guard, u) for e in ga.out_edges(q)
                    ), f"state {q} cannot process letter {u} of {f}"

    def test_boolean_closure(self, setting, two_signatures, rng):
        _, partition, alphabet = setting
        letters = list(alphabet.letters)
        for _ in range(15):
            f = _random_formula(rng, two_signatures, [10.0], depth=2)
            ga = formula_to_automaton(f, alphabet)
            ga_neg = formula_to_automaton(Not(f), alphabet)
            for n in range(0, 3):
                for combo in itertools.product(letters, repeat=n):
                    assert ga.accepts(alphabet, combo) != ga_neg.accepts(
                        alphabet, combo
                    )

    def test_agreement_with_eval_on_random_formulas(self, setting, two_signatures, rng):
        _, partition, alphabet = setting
        for _ in range(40):
            f = _random_formula(rng, two_signatures, [10.0], depth=3)
            ga = formula_to_automaton(f, alphabet)
            _assert_language_matches(ga, f, alphabet, partition, max_len=3)

    def test_unsatisfiable_formula_never_accepts(self, setting, two_signatures):
        _, partition, alphabet = setting
        f = parse_formula("a & !a", two_signatures)
        ga = formula_to_automaton(f, alphabet)
        dfa = minimize(complete(determinize(ga, alphabet)))
        verdicts = label_states(dfa)
        assert verdicts[dfa.initial].value == "PV"


def _random_formula(rng, signatures, constants, depth, max_leaves=3):
    leaves = []
    names = sorted(signatures.activity_names)
    attrs = sorted(signatures.attribute_names)
    for _ in range(max_leaves):
        if rng.random() < 0.5:
            leaves.append(Leaf(NameAtom(rng.choice(names))))
        else:
            leaves.append(
                Leaf(Comparison(rng.choice(attrs), rng.choice("<=>"), rng.choice(constants)))
            )

    def build(d):
        if d == 0 or rng.random() < 0.25:
            return rng.choice(leaves)
        op = rng.randrange(5)
        if op == 0:
            return Not(build(d - 1))
        if op == 1:
            return And(build(d - 1), build(d - 1))
        if op == 2:
            return Next(build(d - 1))
        if op == 3:
            return Until(build(d - 1), build(d - 1))
        return eventually(build(d - 1))

    return build(depth)


def _assert_language_matches(ga, formula, alphabet, partition, max_len):
    """Exhaustively compare automaton acceptance with the trace semantics.

    Traces range over one representative letter per leaf-valuation class;
    both the automaton (guards are class conjunctions) and the semantics
    (only leaf truths touch the event) are invariant within a class.
    """
    from hybridmon.temporal import formula_leaves

    leaves = formula_leaves(formula)
    representatives = {}
    for letter in alphabet.letters:
        key = tuple(
            alphabet.satisfies(leaf, alphabet.index[letter]) for leaf in leaves
        )
        representatives.setdefault(key, letter)
    reps = list(representatives.values())
    for n in range(0, max_len + 1):
        for combo in itertools.product(reps, repeat=n):
            concrete = make_trace(*(concretize_event(e) for e in combo))
            expected = satisfies(formula, concrete)
            assert ga.accepts(alphabet, abstract_trace(partition, concrete)) == expected
