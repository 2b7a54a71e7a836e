from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from histbank.core import LayeredText, Span
from histbank.segment import (CrossingUnit, InvalidSpans, MacroPattern, extract_patterns,
                              segment_orthographic, segmentation_agreement)


@pytest.mark.parametrize("tokens,terminators,expected", [
    (["a", ".", "b", "."], None, [Span(0, 2), Span(2, 4)]),
    (["a", "b"], None, [Span(0, 2)]),
    (["x", "/", "y", ".", "z"], {".", "/"}, [Span(0, 2), Span(2, 4), Span(4, 5)]),
    ([], None, []),
])
def test_segment_orthographic(tokens, terminators, expected):
    args = (tokens,) if terminators is None else (tokens, terminators)
    assert segment_orthographic(*args) == expected


@given(st.lists(st.sampled_from(["a", "b", ".", "?", "/"]), max_size=30))
def test_orthographic_spans_partition(tokens):
    spans = segment_orthographic(tokens)
    covered = [i for s in spans for i in s]
    assert covered == list(range(len(tokens)))


def doc_with(units, sentences, n=None):
    n = n or max(s.end for s in sentences)
    return LayeredText.from_tokens(["w"] * n, macro_units=units, orth_sentences=sentences)


class TestPatterns:
    def test_single_sentence(self):
        counts = extract_patterns(doc_with(((Span(0, 3), "s"),), (Span(0, 3),)))
        assert counts.positional == {"s": 1}
        assert counts.combination == {"{s:1}": 1}

    def test_s_kg_s(self):
        units = ((Span(0, 2), "s"), (Span(2, 3), "kg"), (Span(3, 5), "s"))
        assert extract_patterns(doc_with(units, (Span(0, 5),))).positional == {"s kg s": 1}

    def test_positional_versus_combination(self):
        units = ((Span(0, 1), "s"), (Span(1, 2), "kg"), (Span(2, 3), "s"),
                 (Span(3, 4), "s"), (Span(4, 5), "s"), (Span(5, 6), "kg"))
        counts = extract_patterns(doc_with(units, (Span(0, 3), Span(3, 6))))
        assert set(counts.positional) == {"s kg s", "s s kg"}
        assert counts.combination == {"{kg:1, s:2}": 2}

    def test_crossing_unit(self):
        doc = doc_with(((Span(1, 3), "s"),), (Span(0, 2), Span(2, 4)))
        with pytest.raises(CrossingUnit):
            extract_patterns(doc)
        lenient = extract_patterns(doc, strict=False)
        assert len(lenient.issues) == 1 and not lenient.positional

    def test_uncovered_unit_is_reported(self):
        doc = doc_with(((Span(3, 4), "ni"),), (Span(0, 2),), n=4)
        assert "outside" in extract_patterns(doc).issues[0][1]

    @given(st.lists(st.lists(st.sampled_from(["s", "kg", "ni"]), min_size=1, max_size=4),
                    min_size=1, max_size=8))
    def test_more_positional_than_combination_types(self, sentences):
        units, spans, pos = [], [], 0
        for kinds in sentences:
            start = pos
            for kind in kinds:
                units.append((Span(pos, pos + 1), kind))
                pos += 1
            spans.append(Span(start, pos))
        counts = extract_patterns(doc_with(tuple(units), tuple(spans)))
        assert len(counts.positional) >= len(counts.combination)
        assert sum(counts.positional.values()) == len(sentences)

    def test_combination_is_sorted_positional(self):
        pattern = MacroPattern(("s", "kg", "s", "ni"))
        assert pattern.combination == MacroPattern(tuple(sorted(pattern.kinds))).combination


class TestAgreement:
    def test_identical(self):
        spans = [Span(0, 2), Span(2, 5)]
        res = segmentation_agreement(spans, spans, 5)
        assert res.token_assignment_agreement == res.identical_unit_proportion == 1.0

    def test_split_unit(self):
        res = segmentation_agreement([Span(0, 4)], [Span(0, 2), Span(2, 4)], 4)
        assert res.identical_unit_proportion == 0.0
        assert res.token_assignment_agreement == pytest.approx(2 / 3, abs=1e-15)

    def test_empty(self):
        res = segmentation_agreement([], [], 0)
        assert res.token_assignment_agreement == res.identical_unit_proportion == 1.0

    def test_invalid(self):
        with pytest.raises(InvalidSpans):
            segmentation_agreement([Span(0, 2), Span(1, 3)], [], 3)
        with pytest.raises(InvalidSpans):
            segmentation_agreement([Span(0, 5)], [], 3)

    @given(st.lists(st.booleans(), min_size=1, max_size=15),
           st.lists(st.booleans(), min_size=1, max_size=15))
    def test_symmetric_and_bounded(self, cuts_a, cuts_b):
        n = min(len(cuts_a), len(cuts_b)) + 1

        def spans(cuts):
            out, start = [], 0
            for i in range(1, n):
                if cuts[i - 1]:
                    out.append(Span(start, i))
                    start = i
            out.append(Span(start, n))
            return out

        a, b = spans(cuts_a), spans(cuts_b)
        ab, ba = segmentation_agreement(a, b, n), segmentation_agreement(b, a, n)
        assert ab == ba
        assert 0 <= ab.token_assignment_agreement <= 1
        assert 0 <= ab.identical_unit_proportion <= 1
