from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, strategies as st

from histbank.core import LengthMismatch, damerau_levenshtein
from histbank.normalize import (NormalizationLexicon, TransliterationTable,
                                distance_profile, evaluate_normalization, normalize_token,
                                transliterate)

TABLE = TransliterationTable.load()


class TestTransliterate:
    @pytest.mark.parametrize("token,expected", [
        ("Miſſverſtändniſſen", "Missverständnissen"),
        ("Haus", "Haus"),
        ("ſoldens", "soldens"),
        ("Muͤhe", "Mühe"),
        ("Mißverſtändnüſſen", "Missverständnüssen"),
    ])
    def test_examples(self, token, expected):
        assert transliterate(token, TABLE) == expected

    def test_character_scan(self):
        token = "ſoldens"
        scanned = "".join("s" if c == "ſ" else c for c in token)
        assert transliterate(token, TABLE) == scanned

    @given(st.text(alphabet="aouſßꝛeͤAU", max_size=12))
    def test_idempotent_and_clean(self, token):
        once = transliterate(token, TABLE)
        assert transliterate(once, TABLE) == once
        for hist, _ in TABLE.pairs:
            assert hist not in once

    def test_longest_match_first(self):
        table = TransliterationTable((("a", "x"), ("ab", "y")))
        assert transliterate("abab", table) == "yy"

    def test_rejects_self_feeding_table(self):
        with pytest.raises(ValueError):
            TransliterationTable((("a", "b"), ("c", "ab")))


class TestNormalizeToken:
    def test_exact_match_first(self):
        lex = NormalizationLexicon({"Haus": 3, "Maus": 9})
        assert normalize_token("Haus", TABLE, lex, 1)[0] == ("Haus", 0, 3)

    def test_wider_wieder(self):
        lex = NormalizationLexicon({"wider": 4, "wieder": 135})
        assert [c[:2] for c in normalize_token("wider", TABLE, lex, 1)] == [
            ("wider", 0), ("wieder", 1)]

    def test_frequency_breaks_ties(self):
        lex = NormalizationLexicon({"Geld": 53, "Gel": 1})
        got = normalize_token("Gelt", TABLE, lex, 1)
        expected = sorted(((f, damerau_levenshtein("Gelt", f), n)
                           for f, n in lex.frequencies.items()
                           if damerau_levenshtein("Gelt", f) <= 1),
                          key=lambda c: (c[1], -c[2], c[0]))
        assert got == expected and got[0][0] == "Geld"

    def test_transliterates_first(self):
        lex = NormalizationLexicon({"soll": 2})
        assert normalize_token("ſoll", TABLE, lex, 0) == [("soll", 0, 2)]

    def test_empty_and_negative(self):
        assert normalize_token("xyz", TABLE, NormalizationLexicon({"abcdef": 1}), 1) == []
        with pytest.raises(ValueError):
            normalize_token("x", TABLE, NormalizationLexicon({}), -1)

    @given(st.text(alphabet="abcſ", max_size=6), st.integers(min_value=0, max_value=3))
    def test_bound_and_total_order(self, token, max_d):
        lex = NormalizationLexicon({w: 1 + len(w) % 3 for w in
                                    ["", "a", "ab", "abc", "ba", "cab", "bca", "aa", "sab"]})
        got = normalize_token(token, TABLE, lex, max_d)
        assert all(d <= max_d for _, d, _ in got)
        keys = [(d, -f, w) for w, d, f in got]
        assert keys == sorted(keys) and len(set(keys)) == len(keys)

    def test_lexicon_loading(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("Haus\t2\n# comment\nHaus\t1\nMaus\t4\n", encoding="utf-8")
        assert NormalizationLexicon.load(path).frequencies == {"Haus": 3, "Maus": 4}
        with pytest.raises(ValueError):
            NormalizationLexicon({"x": 0})


class TestEvaluate:
    def test_identical(self):
        words = ["a", "b", "c", "d", "e"]
        res = evaluate_normalization(words, words, words)
        assert (res.tp, res.fp, res.fn, res.tn) == (0, 0, 0, 5)
        assert res.precision == res.recall == res.f_score == 1.0

    def test_das_dass(self):
        res = evaluate_normalization(["das"], ["das"], ["dass"])
        assert res.fn == 1 and res.recall == 0.0
        assert res.pairs_by_gold() == [(("das", "dass"), 1)]

    def test_decision_table_walk(self):
        res = evaluate_normalization(["a", "b", "c"], ["x", "y", "c"], ["x", "b", "c"])
        assert (res.tp, res.fp, res.fn, res.tn) == (1, 1, 0, 1)
        assert res.precision == 0.5 and res.recall == 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            evaluate_normalization(["a"], ["a", "b"], ["a"])

    def test_tp_plus_fn_counts_gold_changes_on_random_layers(self):
        rng = random.Random(7)
        for _ in range(200):
            n = rng.randint(0, 30)
            orig = [rng.choice("abc") for _ in range(n)]
            gold = [rng.choice("abc") for _ in range(n)]
            sys = [rng.choice("abc") for _ in range(n)]
            res = evaluate_normalization(orig, sys, gold)
            assert res.tp + res.fn == sum(g != o for g, o in zip(gold, orig))

    def test_swap_exchanges_precision_and_recall_without_wrong_changes(self):
        rng = random.Random(3)
        for _ in range(100):
            orig, sys, gold = [], [], []
            for _ in range(20):
                o = rng.choice("abc")
                kind = rng.choice(["tn", "tp", "fp", "fn"])
                changed = o + "'"
                orig.append(o)
                sys.append(changed if kind in ("tp", "fp") else o)
                gold.append(changed if kind in ("tp", "fn") else o)
            a = evaluate_normalization(orig, sys, gold)
            b = evaluate_normalization(orig, gold, sys)
            assert (a.precision, a.recall) == (b.recall, b.precision)


class TestDistanceProfile:
    def test_one_edit_each(self):
        prof = distance_profile(["ab", "cd"], ["abx", "c"], ["abx", "c"])
        assert prof.system.mean == prof.gold.mean == 1.0
        assert prof.system.std == prof.gold.std == 0.0

    def test_population_std(self):
        orig = ["a", "a", "a"]
        gold = ["b", "bc", "bcd"]
        prof = distance_profile(orig, orig, gold)
        assert prof.gold.mean == 2.0
        assert abs(prof.gold.std - math.sqrt(2 / 3)) <= 1e-12
        assert prof.gold.histogram == {1: 1, 2: 1, 3: 1}
        assert prof.system.mean == 0.0

    def test_empty_relevant_set(self):
        prof = distance_profile(["a"], ["b"], ["a"])
        assert prof.relevant == 0
        assert not prof.system.defined and not prof.gold.defined
