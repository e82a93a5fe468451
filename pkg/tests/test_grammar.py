import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moltraverse.grammar import (
    DeriveError,
    GrammarConflictError,
    GrammarError,
    GrammarFileError,
    RuleSequence,
    SmilesParseError,
    check_ring_pairing,
    derive,
    encode_onehot_chars,
    encode_onehot_rules,
    load_grammar,
    parse,
    stack_decode,
    valid_mask,
)


class TestLoadGrammar:
    def test_toy_grammar_shape(self, toy_grammar):
        assert len(toy_grammar.productions) == 2
        assert len(toy_grammar.nonterminals) == 1
        assert len(toy_grammar.terminals) == 3

    def test_default_grammar_size(self, grammar):
        assert grammar.n_productions >= 70

    def test_unknown_symbol(self):
        with pytest.raises(GrammarFileError, match="unknown symbol"):
            load_grammar("S -> Q\n")

    def test_duplicate_production(self):
        with pytest.raises(GrammarFileError, match="duplicate"):
            load_grammar("S -> 'a'\nS -> 'a'\n")

    def test_syntax_error_reports_line(self):
        with pytest.raises(GrammarFileError, match="line 2"):
            load_grammar("S -> 'a'\nbogus line\n")

    def test_ll1_conflict_rejected(self):
        with pytest.raises(GrammarConflictError):
            load_grammar("S -> 'a'\nS -> 'a' S\n")

    def test_comment_and_blank_lines(self):
        g = load_grammar("# header\n\nS -> 'a'  # trailing\n")
        assert g.n_productions == 1

    def test_quoted_hash_is_not_comment(self):
        g = load_grammar("S -> '#'\n")
        assert g.terminals == ("#",)

    def test_start_symbol_is_first_lhs(self):
        g = load_grammar("A -> 'x' B\nB -> 'y'\n")
        assert g.nonterminals[g.start_symbol] == "A"

    def test_production_order_is_file_order(self, grammar):
        # rule ids are canonical: re-derive the lhs sequence from the file
        from importlib import resources

        text = resources.files("moltraverse.data").joinpath("smiles.grammar").read_text()
        lhs_names = []
        for line in text.splitlines():
            line = line.split("#")[0].strip()
            if line:
                lhs_names.append(line.split("->")[0].strip())
        assert len(lhs_names) == grammar.n_productions
        for pid, name in enumerate(lhs_names):
            assert grammar.nonterminals[grammar.productions[pid].lhs] == name


class TestParse:
    def test_toy_parse(self, toy_grammar):
        assert parse("(a)", toy_grammar).rule_ids == (1, 0)

    def test_toy_parse_nested(self, toy_grammar):
        assert parse("((a))", toy_grammar).rule_ids == (1, 1, 0)

    def test_roundtrip_simple(self, grammar):
        rules = parse("C", grammar)
        assert rules.complete
        assert derive(rules, grammar).text == "C"

    def test_parse_failure_position(self, grammar):
        with pytest.raises(SmilesParseError) as err:
            parse("C(((", grammar)
        assert err.value.position == 3

    def test_no_derivation_exists_for_open_parens(self, toy_grammar):
        # exhaustively derive every toy-grammar string up to depth 6: none is "((("
        strings = set()

        def expand(sent, depth):
            if depth > 6:
                return
            for i, sym in enumerate(sent):
                if sym == "S":
                    for rhs in (["a"], ["(", "S", ")"]):
                        expand(sent[:i] + rhs + sent[i + 1:], depth + 1)
                    return
            strings.add("".join(sent))

        expand(["S"], 0)
        assert "(((" not in strings
        with pytest.raises(SmilesParseError):
            parse("(((", toy_grammar)

    def test_unknown_character(self, grammar):
        with pytest.raises(SmilesParseError) as err:
            parse("xyz!!", grammar)
        assert err.value.position == 1

    def test_trailing_input(self, toy_grammar):
        with pytest.raises(SmilesParseError):
            parse("aa", toy_grammar)

    def test_empty_string_rejected(self, grammar):
        with pytest.raises(SmilesParseError):
            parse("", grammar)

    def test_maximal_munch_two_letter_elements(self, grammar):
        rules = parse("CCl", grammar)
        assert derive(rules, grammar).text == "CCl"
        mol_tokens = [grammar.terminals[t] for _, t in grammar.tokenize("CCl")]
        assert mol_tokens == ["C", "Cl"]

    @pytest.mark.parametrize(
        "smiles",
        [
            "c1ccccc1",
            "CC(=O)Oc1ccccc1",
            "C1CCCCC1",
            "[13CH4]",
            "[O-]C(=O)C",
            "C/C=C/C",
            "CC.OC",
            "C%12CCCC%12",
            "[C@@H](N)C(=O)O",
            "Clc1ccc(Br)cc1",
        ],
    )
    def test_roundtrip_examples(self, grammar, smiles):
        rules = parse(smiles, grammar)
        assert rules.complete
        assert derive(rules, grammar).text == smiles

    def test_roundtrip_whole_corpus(self, grammar, corpus):
        for rec in corpus:
            result = derive(parse(rec.smiles, grammar), grammar)
            assert result.text == rec.smiles
            assert result.complete


class TestDerive:
    def test_toy_derive(self, toy_grammar):
        assert derive([1, 0], toy_grammar).text == "(a)"

    def test_single_rule(self, toy_grammar):
        assert derive([0], toy_grammar).text == "a"

    def test_incomplete_derivation(self, toy_grammar):
        result = derive([1], toy_grammar)
        assert result.text == "("
        assert not result.complete

    def test_lhs_mismatch_reports_step(self, grammar):
        # production 0 is smiles -> chain; applying it twice fails at step 1
        with pytest.raises(DeriveError) as err:
            derive([0, 0], grammar)
        assert err.value.step == 1

    def test_rule_id_out_of_range(self, toy_grammar):
        with pytest.raises(DeriveError):
            derive([7], toy_grammar)

    def test_overlong_sequence(self, toy_grammar):
        with pytest.raises(DeriveError, match="complete"):
            derive([0, 0], toy_grammar)


class TestOneHot:
    def test_rules_onehot(self, toy_grammar):
        mat = encode_onehot_rules([1, 0], toy_grammar, t_max=3)
        expected = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
        assert np.array_equal(mat, expected)

    def test_empty_sequence_all_pad(self, toy_grammar):
        mat = encode_onehot_rules([], toy_grammar, t_max=2)
        assert np.array_equal(mat, np.array([[0, 0, 1], [0, 0, 1]], dtype=float))

    def test_too_long_errors(self, toy_grammar):
        with pytest.raises(ValueError):
            encode_onehot_rules([0] * 5, toy_grammar, t_max=3)

    def test_chars_onehot(self):
        mat = encode_onehot_chars("CC", ["C", "O", "$"], t_max=3)
        assert np.array_equal(mat, np.array([[1, 0, 0], [1, 0, 0], [0, 0, 1]], dtype=float))

    def test_chars_empty_all_pad(self):
        mat = encode_onehot_chars("", ["C", "O", "$"], t_max=2)
        assert np.array_equal(mat, np.array([[0, 0, 1], [0, 0, 1]], dtype=float))

    def test_chars_unknown(self):
        with pytest.raises(ValueError, match="unknown character"):
            encode_onehot_chars("X", ["C", "O", "$"], t_max=2)


class TestValidMask:
    def test_toy_mask(self, toy_grammar):
        mask = valid_mask(0, toy_grammar)
        assert mask.tolist() == [True, True, False]  # pad column never selected

    def test_mask_counts_match_file(self, grammar):
        from importlib import resources

        text = resources.files("moltraverse.data").joinpath("smiles.grammar").read_text()
        counts: dict[str, int] = {}
        for line in text.splitlines():
            line = line.split("#")[0].strip()
            if line:
                counts[line.split("->")[0].strip()] = counts.get(line.split("->")[0].strip(), 0) + 1
        for nt, name in enumerate(grammar.nonterminals):
            assert int(valid_mask(nt, grammar).sum()) == counts[name]

    def test_mask_partition(self, grammar):
        total = np.zeros(grammar.encoding_width, dtype=int)
        for nt in range(len(grammar.nonterminals)):
            total += valid_mask(nt, grammar).astype(int)
        assert (total[: grammar.n_productions] == 1).all()
        assert total[grammar.pad_index] == 0

    def test_dead_nonterminal(self):
        from moltraverse.grammar import Grammar, Production, SymbolRef

        g = Grammar(["S", "Q"], ["a"], [Production(0, (SymbolRef(True, 0),))])
        with pytest.raises(GrammarError, match="no productions"):
            valid_mask(1, g)


class TestStackDecode:
    def test_favor_rule0(self, toy_grammar):
        logits = np.zeros((4, 3))
        logits[:, 0] = 1.0
        result = stack_decode(logits, toy_grammar)
        assert result.text == "a"
        assert result.complete

    def test_two_step(self, toy_grammar):
        logits = np.zeros((4, 3))
        logits[0, 1] = 1.0
        logits[1, 0] = 1.0
        result = stack_decode(logits, toy_grammar)
        assert result.text == "(a)"
        assert result.complete
        assert result.rules.rule_ids == (1, 0)

    def test_never_terminates_flagged(self, toy_grammar):
        logits = np.zeros((4, 3))
        logits[:, 1] = 1.0
        result = stack_decode(logits, toy_grammar)
        assert not result.complete

    def test_tie_break_lowest_index(self, toy_grammar):
        logits = np.zeros((4, 3))  # all ties -> production 0 everywhere
        result = stack_decode(logits, toy_grammar)
        assert result.rules.rule_ids == (0,)

    def test_determinism(self, grammar):
        rng = np.random.default_rng(5)
        logits = rng.standard_normal((30, grammar.encoding_width))
        a = stack_decode(logits, grammar)
        b = stack_decode(logits, grammar)
        assert a == b

    def test_non_finite_rows_fall_back_to_lowest_index(self, toy_grammar):
        logits = np.full((3, 3), -np.inf)
        result = stack_decode(logits, toy_grammar)
        assert result.rules.rule_ids == (0,)

    def test_wrong_shape(self, toy_grammar):
        with pytest.raises(ValueError):
            stack_decode(np.zeros((3, 5)), toy_grammar)

    def test_soundness_random_matrices(self, grammar):
        # acceptance-grade property at smaller scale; the full 1000-matrix
        # run lives in test_acceptance.py
        rng = np.random.default_rng(42)
        for _ in range(200):
            logits = rng.standard_normal((40, grammar.encoding_width))
            result = stack_decode(logits, grammar)
            if result.complete:
                replay = parse(result.text, grammar)
                assert replay.complete

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_soundness_property(self, grammar, seed):
        rng = np.random.default_rng(seed)
        logits = rng.standard_normal((25, grammar.encoding_width)) * 3.0
        result = stack_decode(logits, grammar)
        if result.complete:
            assert parse(result.text, grammar).complete


class TestRingPairing:
    def test_paper_accepted_example(self):
        ok, unpaired = check_ring_pairing("c1ccccc1C2CCCC2")
        assert ok and unpaired == []

    def test_paper_rejected_example(self):
        ok, unpaired = check_ring_pairing("c1ccccc1C2CCCC")
        assert not ok
        assert unpaired == [2]

    def test_empty_string(self):
        assert check_ring_pairing("") == (True, [])

    def test_bracket_digits_ignored(self):
        assert check_ring_pairing("[13CH4]")[0]
        assert check_ring_pairing("C[O-]C1CC1")[0]

    def test_two_digit_form(self):
        assert check_ring_pairing("C%12CCCC%12")[0]
        ok, unpaired = check_ring_pairing("C%12CCCC")
        assert not ok and unpaired == [12]

    def test_reuse_after_close(self):
        assert check_ring_pairing("C1CC1C1CC1")[0]

    @given(st.text(alphabet="Cc12()=[]O", max_size=30))
    @settings(max_examples=120, deadline=None)
    def test_digit_swap_invariance(self, s):
        def swap(text):
            out, depth = [], 0
            for ch in text:
                if ch == "[":
                    depth += 1
                elif ch == "]":
                    depth = max(0, depth - 1)
                if depth == 0 and ch in "12":
                    out.append("2" if ch == "1" else "1")
                else:
                    out.append(ch)
            return "".join(out)

        assert check_ring_pairing(s)[0] == check_ring_pairing(swap(s))[0]


class TestRuleSequenceInvariants:
    def test_parse_results_replayable(self, grammar, corpus):
        for rec in corpus[:50]:
            rules = parse(rec.smiles, grammar)
            assert isinstance(rules, RuleSequence)
            result = derive(rules, grammar)
            assert result.complete
