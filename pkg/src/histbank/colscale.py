"""Conceptual orality/literacy scale.

Nine text-internal features are extracted per text, the best ones are
selected by point-biserial correlation with an expert N/D labelling, and
the selection is reduced to one dimension: the first principal component
of the correlation matrix.  The sign is fixed so that the loading of mean
grammatical-sentence length is non-negative, which puts texts of distance
(long sentences) on the positive side.

Segment sampling mirrors excerpt selection: windows of ``window`` tokens
every ``stride`` tokens, with a last window anchored at the end of the text.
"""
from __future__ import annotations

import math
import unicodedata
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import HistbankError, LayeredText, MacroKind, Span
from .treegrid import ConstituencyNode

FEATURES = (
    "mean_sentence_length",
    "mean_orth_sentence_length",
    "interjection_rate",
    "pronoun_rate",
    "mean_depth",
    "ni_rate",
    "kg_rate",
    "type_token_ratio",
    "subordinate_rate",
)
ANCHOR = "mean_sentence_length"
TTR_WINDOW = 100
SUBORDINATE_LABELS = frozenset({"ns", "ns_un", "ik"})


class EmptyDocument(HistbankError):
    pass


class DegenerateMatrix(HistbankError):
    pass


class DegenerateInput(HistbankError):
    pass


class MissingFeature(HistbankError, KeyError):
    pass


class InvalidWindow(HistbankError, ValueError):
    pass


def _lexicon(name: str) -> frozenset[str]:
    text = (resources.files("histbank") / "data" / name).read_text(encoding="utf-8")
    return frozenset(l.strip() for l in text.splitlines() if l.strip() and not l.startswith("#"))


@dataclass(frozen=True)
class FeatureLexicons:
    interjections: frozenset[str]
    pronouns: frozenset[str]
    subordinate_labels: frozenset[str] = SUBORDINATE_LABELS

    @classmethod
    def load(cls, interjections=None, pronouns=None) -> "FeatureLexicons":
        def read(path, default):
            if path is None:
                return _lexicon(default)
            lines = Path(path).read_text(encoding="utf-8").splitlines()
            return frozenset(l.strip() for l in lines if l.strip() and not l.startswith("#"))
        return cls(read(interjections, "interjections.txt"), read(pronouns, "pronouns.txt"))


def is_punctuation(token: str) -> bool:
    return bool(token) and all(unicodedata.category(c).startswith("P") for c in token)


def _depths(forest: Sequence[ConstituencyNode]) -> list[int]:
    """Depth of every terminal, counting the root constituent as 1."""
    out = []

    def visit(node, depth):
        for child in node.children:
            if isinstance(child, ConstituencyNode):
                visit(child, depth + 1)
            else:
                out.append(depth)

    for root in forest:
        visit(root, 1)
    return out


def _sttr(words: Sequence[str], window: int) -> float:
    if not words:
        return 0.0
    if len(words) < window:
        return len(set(words)) / len(words)
    chunks = [words[i:i + window] for i in range(0, len(words) - window + 1, window)]
    return math.fsum(len(set(c)) / window for c in chunks) / len(chunks)


def extract_col_features(doc: LayeredText,
                         forest: Sequence[ConstituencyNode] | None = None,
                         lexicons: FeatureLexicons | None = None) -> dict[str, float]:
    """The nine feature values of one text.

    Rates per 1,000 tokens count non-punctuation tokens; lexicon lookups use
    the lowercased normalization where present, else the token.  Without a
    forest the depth and subordination features are 0 (with a warning).
    """
    lex = lexicons or FeatureLexicons.load()
    if not doc.tokens:
        raise EmptyDocument("document has no tokens")
    words = []
    for i, tok in enumerate(doc.tokens):
        if is_punctuation(tok):
            continue
        norm = doc.norm[i] if doc.norm and doc.norm[i] else tok
        words.append(norm.lower())
    n_words = len(words) or 1

    sentences = [span for span, kind in doc.macro_units if kind is MacroKind.S]
    units = len(doc.macro_units)
    feats = {
        "mean_sentence_length": (sum(len(s) for s in sentences) / len(sentences)
                                 if sentences else 0.0),
        "mean_orth_sentence_length": (sum(len(s) for s in doc.orth_sentences)
                                      / len(doc.orth_sentences) if doc.orth_sentences else 0.0),
        "interjection_rate": 1000.0 * sum(w in lex.interjections for w in words) / n_words,
        "pronoun_rate": 1000.0 * sum(w in lex.pronouns for w in words) / n_words,
        "ni_rate": (sum(k is MacroKind.NI for _, k in doc.macro_units) / units
                    if units else 0.0),
        "kg_rate": (sum(k is MacroKind.KG for _, k in doc.macro_units) / units
                    if units else 0.0),
        "type_token_ratio": _sttr(words, TTR_WINDOW),
    }
    if forest is None:
        warnings.warn("no syntax trees: depth features set to 0", stacklevel=2)
        feats["mean_depth"] = 0.0
        feats["subordinate_rate"] = 0.0
    else:
        depths = _depths(forest)
        feats["mean_depth"] = sum(depths) / len(depths) if depths else 0.0
        subs = sum(node.form_label in lex.subordinate_labels
                   for root in forest for node in root.walk())
        feats["subordinate_rate"] = subs / len(sentences) if sentences else 0.0
    return {name: float(feats[name]) for name in FEATURES}


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation.

    >>> pearson([1, 2, 3], [1, 2, 3])
    1.0
    """
    if len(x) != len(y) or len(x) < 2:
        raise DegenerateInput("need two equal-length sequences of at least 2 values")
    mx = math.fsum(x) / len(x)
    my = math.fsum(y) / len(y)
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = math.fsum(v * v for v in dx)
    syy = math.fsum(v * v for v in dy)
    if sxx == 0 or syy == 0:
        raise DegenerateInput("constant input")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def select_features(matrix: Sequence[Sequence[float]], names: Sequence[str],
                    labels: Sequence[str], k: int) -> list[str]:
    """Top ``k`` features by absolute point-biserial correlation with N/D.

    ``D`` is coded 1 and ``N`` 0.  Constant features are skipped with a
    warning; ties are broken by name.
    """
    coding = []
    for label in labels:
        if label not in ("N", "D"):
            raise ValueError(f"label must be N or D, got {label!r}")
        coding.append(1.0 if label == "D" else 0.0)
    if coding.count(1.0) < 2 or coding.count(0.0) < 2:
        raise DegenerateInput("need at least two texts per class")
    if k > len(names):
        raise ValueError(f"k={k} exceeds {len(names)} candidates")
    columns = np.asarray(matrix, dtype=float)
    scored = []
    for j, name in enumerate(names):
        column = columns[:, j]
        if np.all(column == column[0]):
            warnings.warn(f"feature {name} has zero variance and is excluded", stacklevel=2)
            continue
        scored.append((-abs(pearson(column.tolist(), coding)), name))
    scored.sort()
    return [name for _, name in scored[:k]]


@dataclass(frozen=True)
class ColModel:
    features: tuple[str, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]
    loadings: tuple[float, ...]
    orientation: int
    eigenvalue: float

    def dumps(self) -> str:
        lines = ["feature\tmean\tstd\tloading"]
        for row in zip(self.features, self.means, self.stds, self.loadings):
            lines.append("\t".join([row[0]] + [repr(float(v)) for v in row[1:]]))
        lines.append(f"#orientation\t{self.orientation}")
        lines.append(f"#eigenvalue\t{self.eigenvalue!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ColModel":
        feats, means, stds, loads = [], [], [], []
        orientation, eigenvalue = 1, float("nan")
        for line in text.splitlines()[1:]:
            parts = line.split("\t")
            if parts[0] == "#orientation":
                orientation = int(parts[1])
            elif parts[0] == "#eigenvalue":
                eigenvalue = float(parts[1])
            elif line:
                feats.append(parts[0])
                means.append(float(parts[1]))
                stds.append(float(parts[2]))
                loads.append(float(parts[3]))
        return cls(tuple(feats), tuple(means), tuple(stds), tuple(loads), orientation, eigenvalue)


def leading_eigenvector(matrix: np.ndarray, tol: float = 1e-10,
                        max_squarings: int = 64, max_iter: int = 10_000) -> tuple[float, np.ndarray]:
    """Dominant eigenpair of a symmetric positive semi-definite matrix.

    Power iteration on repeated squares of the matrix (each squaring doubles
    the number of power steps), then plain power steps until the residual
    ``|A v - lambda v|`` falls below ``tol``.
    """
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0]), np.ones(1)
    scale = np.linalg.norm(a)
    if scale == 0:
        raise DegenerateMatrix("zero matrix")
    p = a / scale
    for _ in range(max_squarings):
        q = p @ p
        q /= np.linalg.norm(q)
        if np.allclose(q, p, rtol=0, atol=1e-15):
            break
        p = q
    # the column of largest norm of the projector-like power spans the top eigenspace
    v = p[:, int(np.argmax(np.linalg.norm(p, axis=0)))].copy()
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = a @ v
        lam = float(v @ w)
        if np.linalg.norm(w - lam * v) <= tol * max(1.0, abs(lam)):
            return lam, v
        v = w / np.linalg.norm(w)
    raise DegenerateMatrix("power iteration did not converge")


def fit_scale(matrix: Sequence[Sequence[float]], names: Sequence[str],
              anchor: str = ANCHOR) -> ColModel:
    """Standardize columns and keep the first principal component.

    Uses population standard deviations, so the variance of the fitted
    scores equals the leading eigenvalue of the correlation matrix.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 3:
        raise DegenerateMatrix("need at least 3 texts")
    if x.shape[1] != len(names):
        raise ValueError("column count does not match feature names")
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    if np.any(stds == 0) or not np.all(np.isfinite(x)):
        raise DegenerateMatrix("a feature has zero variance or non-finite values")
    z = (x - means) / stds
    corr = (z.T @ z) / x.shape[0]
    lam, v = leading_eigenvector(corr)
    v = v / np.linalg.norm(v)
    names = list(names)
    anchor_index = names.index(anchor) if anchor in names else int(np.argmax(np.abs(v)))
    orientation = -1 if v[anchor_index] < 0 else 1
    v = v * orientation
    return ColModel(tuple(names), tuple(means.tolist()), tuple(stds.tolist()),
                    tuple(v.tolist()), orientation, lam)


def score(model: ColModel, features: Mapping[str, float]) -> float:
    total = 0.0
    for name, mean, std, loading in zip(model.features, model.means,
                                        model.stds, model.loadings):
        if name not in features:
            raise MissingFeature(name)
        total += loading * (features[name] - mean) / std
    return total


def segment_offsets(length: int, window: int, stride: int) -> list[Span]:
    """Windows at 0, stride, 2*stride, ... plus one anchored at the end.

    >>> segment_offsets(24000, 12000, 6000)
    [Span(start=0, end=12000), Span(start=6000, end=18000), Span(start=12000, end=24000)]
    """
    if window <= 0 or stride <= 0:
        raise InvalidWindow("window and stride must be positive")
    if length <= 0:
        return []
    if length <= window:
        return [Span(0, length)]
    spans = [Span(s, s + window) for s in range(0, length - window + 1, stride)]
    if spans[-1].end < length:
        spans.append(Span(length - window, length))
    return spans


def slice_document(doc: LayeredText, span: Span,
                   forest: Sequence[ConstituencyNode] | None = None):
    """Sub-document of the tokens in ``span``, with units clipped to it.

    Trees are kept only when their whole yield lies inside the span.
    """
    def clip(s: Span) -> Span | None:
        a, b = max(s.start, span.start), min(s.end, span.end)
        return Span(a - span.start, b - span.start) if a < b else None

    def shift(node: ConstituencyNode) -> ConstituencyNode:
        kids = [shift(c) if isinstance(c, ConstituencyNode) else c - span.start
                for c in node.children]
        return ConstituencyNode(node.form_label, node.function_label, tuple(kids))

    tokens = doc.tokens[span.start:span.end]
    norm = doc.norm[span.start:span.end] if doc.norm else ()
    if norm and norm[0] == "":
        norm = (tokens[0],) + norm[1:]
    sub = LayeredText.from_tokens(
        tokens, norm=norm,
        macro_units=tuple((c, k) for s, k in doc.macro_units if (c := clip(s))),
        orth_sentences=tuple(c for s in doc.orth_sentences if (c := clip(s))),
        meta=doc.meta,
        layers={k: v[span.start:span.end] for k, v in doc.layers.items()},
    )
    sub_forest = None
    if forest is not None:
        sub_forest = [shift(t) for t in forest
                      if span.start <= min(t.yield_) and max(t.yield_) < span.end]
    return sub, sub_forest


@dataclass
class SegmentReport:
    segments: list[Span]
    scores: list[float]
    median: float
    iqr: float


def segment_scores(doc: LayeredText, window: int, stride: int, model: ColModel,
                   forest: Sequence[ConstituencyNode] | None = None,
                   lexicons: FeatureLexicons | None = None) -> SegmentReport:
    """Score overlapping windows of a text; IQR uses linear-interpolation quartiles."""
    if window <= 0 or stride <= 0:
        raise InvalidWindow("window and stride must be positive")
    if len(doc.tokens) < window:
        warnings.warn(f"text has {len(doc.tokens)} tokens, fewer than the window; "
                      "scoring it as one segment", stacklevel=2)
    spans = segment_offsets(len(doc.tokens), window, stride)
    lex = lexicons or FeatureLexicons.load()
    scores = []
    for span in spans:
        sub, sub_forest = slice_document(doc, span, forest)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            feats = extract_col_features(sub, sub_forest, lex)
        scores.append(score(model, feats))
    q1, med, q3 = np.percentile(scores, [25, 50, 75]) if scores else (math.nan,) * 3
    return SegmentReport(spans, scores, float(med), float(q3 - q1))
