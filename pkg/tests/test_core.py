from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from histbank.core import (DocMeta, LayeredText, MacroKind, Span, atomic_write,
                           damerau_levenshtein, runs, validate)

words = st.text(alphabet="abcſäeͤ", max_size=8)


class TestSpan:
    def test_basic_algebra(self):
        s = Span(2, 5)
        assert len(s) == 3
        assert 2 in s and 5 not in s
        assert list(s) == [2, 3, 4]
        assert str(s) == "[2,5)"
        assert s.overlaps(Span(4, 6)) and not s.overlaps(Span(5, 6))
        assert s.contains_span(Span(3, 5)) and not s.contains_span(Span(1, 3))
        assert s.shift(3) == Span(5, 8)

    @pytest.mark.parametrize("start,end", [(-1, 2), (3, 3), (4, 2)])
    def test_rejects_invalid(self, start, end):
        with pytest.raises(ValueError):
            Span(start, end)

    def test_runs(self):
        assert runs([5, 1, 2, 3, 7, 6]) == [Span(1, 4), Span(5, 8)]
        assert runs([]) == []


class TestDistance:
    @pytest.mark.parametrize("a,b,expected", [
        ("ward", "wart", 1),
        ("ab", "ba", 1),
        ("Verhältniffe", "Verhältnisse", 2),
        ("", "", 0),
        ("", "abc", 3),
        ("ca", "abc", 3),
    ])
    def test_examples(self, a, b, expected):
        assert damerau_levenshtein(a, b) == expected

    def test_combining_marks_count_as_scalars(self):
        # u + combining small e is two scalars, so it is one insertion away from u
        assert damerau_levenshtein("u", "uͤ") == 1

    def test_triangle_inequality_can_fail(self):
        # the restricted variant edits no substring twice
        d = damerau_levenshtein
        assert d("ca", "ac") + d("ac", "abc") < d("ca", "abc")

    @given(words, words)
    def test_symmetric(self, a, b):
        assert damerau_levenshtein(a, b) == damerau_levenshtein(b, a)

    @given(words, words)
    def test_identity_of_indiscernibles(self, a, b):
        assert (damerau_levenshtein(a, b) == 0) == (a == b)

    @given(words, words)
    def test_bounds(self, a, b):
        d = damerau_levenshtein(a, b)
        assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))


def three_tokens(**kwargs) -> LayeredText:
    return LayeredText.from_tokens(("a", "b", "c"), **kwargs)


class TestValidate:
    def test_well_formed(self):
        doc = three_tokens(norm=("A", "", "C"), macro_units=((Span(0, 2), "s"),),
                           orth_sentences=(Span(0, 3),), meta=DocMeta("t", 17, "fiction", "D"))
        report = validate(doc)
        assert report.ok and report.errors == []

    def test_overlapping_macro_units(self):
        doc = three_tokens(macro_units=((Span(0, 2), "s"), (Span(1, 3), "kg")))
        report = validate(doc)
        assert len(report.errors) == 1
        location, _ = report.errors[0]
        assert "[0,2)" in location and "[1,3)" in location

    def test_partition_short(self):
        doc = LayeredText(tokens=tuple("abcdef"),
                          source_tokens=((Span(0, 5), "abcde"),))
        report = validate(doc)
        assert len(report.errors) == 1
        assert "[0,5)" in report.errors[0][1] and "6" in report.errors[0][1]

    def test_partition_gap(self):
        doc = LayeredText(tokens=("a", "b"), source_tokens=((Span(1, 2), "b"),))
        assert not validate(doc).ok

    def test_layer_lengths(self):
        doc = three_tokens(norm=("A", "B"), layers={"pos": ("X",)})
        assert len(validate(doc).errors) == 2

    def test_norm_cannot_start_merged(self):
        assert not validate(three_tokens(norm=("", "b", "c"))).ok

    def test_units_out_of_order_and_range(self):
        doc = three_tokens(orth_sentences=(Span(2, 3), Span(0, 1)),
                           macro_units=((Span(2, 4), "ni"),))
        messages = [m for _, m in validate(doc).errors]
        assert any("order" in m for m in messages)
        assert any("exceeds" in m for m in messages)

    def test_metadata_domains(self):
        doc = three_tokens(meta=DocMeta("t", 16, "poetry", "X"))
        assert len(validate(doc).errors) == 3

    def test_never_raises_on_empty(self):
        assert validate(LayeredText()).ok


def test_layered_text_is_hashable_and_immutable():
    doc = three_tokens(macro_units=((Span(0, 3), "s"),), layers={"pos": ["X", "Y", "Z"]})
    assert doc.macro_units[0][1] is MacroKind.S
    assert hash(doc) == hash(doc.replace())
    with pytest.raises(AttributeError):
        doc.tokens = ()


def test_macro_kind_at():
    doc = three_tokens(macro_units=((Span(1, 3), "kg"),))
    assert doc.macro_kind_at() == [None, MacroKind.KG, MacroKind.KG]


def test_atomic_write(tmp_path):
    target = tmp_path / "out.txt"
    target.write_bytes(b"old")
    atomic_write(target, b"new")
    assert target.read_bytes() == b"new"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]
