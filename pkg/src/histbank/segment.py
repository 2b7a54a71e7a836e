"""Macro-unit patterns and segmentation agreement, plus a baseline orthographic splitter."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import HistbankError, LayeredText, MacroKind, Span

DEFAULT_TERMINATORS = frozenset({".", "?", "!", ";", "/", "…", "..."})


class CrossingUnit(HistbankError):
    pass


class InvalidSpans(HistbankError, ValueError):
    pass


@dataclass(frozen=True)
class MacroPattern:
    kinds: tuple[str, ...]

    @property
    def positional(self) -> str:
        return " ".join(self.kinds)

    @property
    def combination(self) -> str:
        counts = sorted(Counter(self.kinds).items())
        return "{" + ", ".join(f"{k}:{n}" for k, n in counts) + "}"


@dataclass
class PatternCounts:
    positional: Counter = field(default_factory=Counter)
    combination: Counter = field(default_factory=Counter)
    issues: list[tuple[str, str]] = field(default_factory=list)


@dataclass(frozen=True)
class SegmentationAgreement:
    token_assignment_agreement: float
    identical_unit_proportion: float


def segment_orthographic(tokens: Sequence[str],
                         terminators: Iterable[str] = DEFAULT_TERMINATORS) -> list[Span]:
    """Split after every terminator token; a trailing remainder is a final span.

    >>> segment_orthographic(["a", ".", "b", "."])
    [Span(start=0, end=2), Span(start=2, end=4)]
    """
    terminators = frozenset(terminators)
    spans, start = [], 0
    for i, tok in enumerate(tokens):
        if tok in terminators:
            spans.append(Span(start, i + 1))
            start = i + 1
    if start < len(tokens):
        spans.append(Span(start, len(tokens)))
    return spans


def extract_patterns(doc: LayeredText, strict: bool = True) -> PatternCounts:
    """Count macro-unit sequences per orthographic sentence.

    A macro unit straddling a sentence boundary raises :class:`CrossingUnit`
    unless ``strict`` is false, in which case it is recorded in ``issues``
    and left out of every pattern.  Sentences without macro units are skipped.
    """
    result = PatternCounts()
    units = sorted(doc.macro_units, key=lambda u: u[0])
    placed, reported = set(), set()
    for sent in doc.orth_sentences:
        kinds = []
        for k, (span, kind) in enumerate(units):
            if sent.contains_span(span):
                kinds.append(MacroKind(kind).value)
                placed.add(k)
            elif sent.overlaps(span):
                msg = f"macro unit {kind} {span} crosses sentence {sent}"
                if strict:
                    raise CrossingUnit(msg)
                if k not in reported:
                    reported.add(k)
                    result.issues.append((str(span), msg))
        if kinds:
            pattern = MacroPattern(tuple(kinds))
            result.positional[pattern.positional] += 1
            result.combination[pattern.combination] += 1
    for k, (span, kind) in enumerate(units):
        if k not in placed and not any(s.overlaps(span) for s in doc.orth_sentences):
            result.issues.append((str(span), f"macro unit {kind} {span} outside every sentence"))
    return result


def _unit_ids(spans: Sequence[Span], n: int) -> list[int | None]:
    ids: list[int | None] = [None] * n
    for k, span in enumerate(spans):
        if span.end > n:
            raise InvalidSpans(f"span {span} exceeds {n} tokens")
        for i in span:
            if ids[i] is not None:
                raise InvalidSpans(f"span {span} overlaps another span")
            ids[i] = k
    return ids


def segmentation_agreement(a: Sequence[Span], b: Sequence[Span],
                           n_tokens: int) -> SegmentationAgreement:
    """Boundary agreement and exact-unit agreement of two segmentations.

    Token assignment agreement is the share of adjacent token pairs on which
    both segmentations agree whether the pair lies in one unit.  Tokens
    outside every unit never share a unit with a neighbour.
    """
    ids_a, ids_b = _unit_ids(a, n_tokens), _unit_ids(b, n_tokens)
    pairs = n_tokens - 1
    if pairs <= 0:
        boundary = 1.0
    else:
        agree = 0
        for i in range(pairs):
            same_a = ids_a[i] is not None and ids_a[i] == ids_a[i + 1]
            same_b = ids_b[i] is not None and ids_b[i] == ids_b[i + 1]
            agree += same_a == same_b
        boundary = agree / pairs
    if not a and not b:
        identical = 1.0
    else:
        identical = len(set(a) & set(b)) / max(len(a), len(b))
    return SegmentationAgreement(boundary, identical)
