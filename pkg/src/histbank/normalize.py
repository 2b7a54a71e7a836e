"""Normalization candidates and the normalization evaluation harness.

Candidate generation transliterates historical glyphs and then looks the
result up in a frequency lexicon of modern forms, ranking every entry within
a bounded edit distance.  The evaluation side scores any normalizer's output
layer against a gold layer relative to the original tokens::

    gold != orig  and  sys == gold   -> TP
    gold != orig  and  sys != gold   -> FN
    sys  != orig  and  sys != gold   -> FP
    gold == orig  and  sys == orig   -> TN

A wrong change (``sys`` differs from both) is therefore both FP and FN.
All comparisons are case-sensitive.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from . import kernels
from .core import HistbankError, LengthMismatch


@dataclass(frozen=True)
class TransliterationTable:
    """Ordered (historical, modern) replacements, applied longest match first."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        pairs = tuple((h, m) for h, m in self.pairs)
        for hist, modern in pairs:
            if not hist:
                raise ValueError("empty historical sequence")
            for other, _ in pairs:
                if other in modern:
                    raise ValueError(
                        f"modern form {modern!r} contains historical sequence {other!r}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def load(cls, path=None) -> "TransliterationTable":
        source = path if path is not None else resources.files("histbank") / "data" / "translit.tsv"
        text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, Path)) \
            else source.read_text(encoding="utf-8")
        pairs = []
        for line in text.splitlines():
            if not line or line.startswith("#"):
                continue
            hist, modern = line.split("\t")
            pairs.append((hist, modern))
        return cls(tuple(pairs))

    def _by_length(self):
        return sorted(self.pairs, key=lambda p: -len(p[0]))


@dataclass(frozen=True)
class NormalizationLexicon:
    frequencies: Mapping[str, int]

    def __post_init__(self):
        for form, freq in self.frequencies.items():
            if freq < 1:
                raise ValueError(f"frequency of {form!r} must be >= 1")
        object.__setattr__(self, "frequencies", dict(self.frequencies))

    def __contains__(self, form):
        return form in self.frequencies

    def __len__(self):
        return len(self.frequencies)

    @classmethod
    def load(cls, path) -> "NormalizationLexicon":
        freqs: Counter = Counter()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line or line.startswith("#"):
                continue
            form, freq = line.split("\t")
            freqs[form] += int(freq)
        return cls(dict(freqs))

    @classmethod
    def from_tokens(cls, tokens) -> "NormalizationLexicon":
        return cls(dict(Counter(t for t in tokens if t)))


@dataclass
class NormEvalResult:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f_score: float
    mismatches: Counter = field(default_factory=Counter)

    def pairs_by_gold(self) -> list[tuple[tuple[str, str], int]]:
        """(original, gold) pairs the system missed, most frequent first."""
        agg: Counter = Counter()
        for (orig, _sys, gold), n in self.mismatches.items():
            if orig != gold:
                agg[(orig, gold)] += n
        return sorted(agg.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass
class DistanceStats:
    mean: float | None
    std: float | None
    histogram: dict[int, int]

    @property
    def defined(self) -> bool:
        return self.mean is not None


@dataclass
class DistanceProfile:
    relevant: int
    system: DistanceStats
    gold: DistanceStats


def transliterate(token: str, table: TransliterationTable) -> str:
    """Rewrite historical glyphs; idempotent.

    >>> transliterate("Miſſverſtändniſſen", TransliterationTable.load())
    'Missverständnissen'
    """
    pairs = table._by_length()
    out = []
    i, n = 0, len(token)
    while i < n:
        for hist, modern in pairs:
            if token.startswith(hist, i):
                out.append(modern)
                i += len(hist)
                break
        else:
            out.append(token[i])
            i += 1
    result = "".join(out)
    # a replacement can expose a new match across its boundary
    return result if result == token else transliterate(result, table)


def normalize_token(token: str, table: TransliterationTable,
                    lexicon: NormalizationLexicon,
                    max_distance: int) -> list[tuple[str, int, int]]:
    """Lexicon entries within ``max_distance`` of the transliterated token.

    Sorted by distance, then descending frequency, then form.
    """
    if max_distance < 0:
        raise ValueError("max_distance must be >= 0")
    query = transliterate(token, table)
    forms = list(lexicon.frequencies)
    dists = kernels.osa_batch(query, forms, max_distance)
    freqs = lexicon.frequencies
    hits = [(form, d, freqs[form]) for form, d in zip(forms, dists) if d <= max_distance]
    hits.sort(key=lambda h: (h[1], -h[2], h[0]))
    return hits


def _check_lengths(*layers):
    lengths = {len(layer) for layer in layers}
    if len(lengths) > 1:
        raise LengthMismatch(f"layer lengths differ: {[len(x) for x in layers]}")


def evaluate_normalization(originals: Sequence[str], system: Sequence[str],
                           gold: Sequence[str]) -> NormEvalResult:
    _check_lengths(originals, system, gold)
    tp = fp = fn = tn = 0
    mismatches: Counter = Counter()
    for orig, sys, ref in zip(originals, system, gold):
        if ref != orig and sys == ref:
            tp += 1
        if ref != orig and sys != ref:
            fn += 1
        if sys != orig and sys != ref:
            fp += 1
        if ref == orig and sys == orig:
            tn += 1
        if sys != ref:
            mismatches[(orig, sys, ref)] += 1
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return NormEvalResult(tp, fp, fn, tn, precision, recall, f, mismatches)


def _stats(values: list[int]) -> DistanceStats:
    hist = dict(sorted(Counter(values).items()))
    if not values:
        return DistanceStats(None, None, hist)
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return DistanceStats(mean, math.sqrt(var), hist)


def distance_profile(originals: Sequence[str], system: Sequence[str],
                     gold: Sequence[str]) -> DistanceProfile:
    """Edit distances from the original, over tokens whose gold form changed.

    Standard deviations are population deviations.  With no relevant tokens
    both statistics are undefined (``mean is None``).
    """
    _check_lengths(originals, system, gold)
    to_sys, to_gold = [], []
    for orig, sys, ref in zip(originals, system, gold):
        if ref == orig:
            continue
        to_sys.append(kernels.osa_distance(orig, sys))
        to_gold.append(kernels.osa_distance(orig, ref))
    return DistanceProfile(len(to_gold), _stats(to_sys), _stats(to_gold))
