"""Shared domain types and document validation.

Token indices are the only coordinate system: every layer of a
:class:`LayeredText` refers to positions in the fine-grained token sequence.
Character offsets are derived on demand and never stored.

The string distance exported here is the *optimal string alignment* variant
of Damerau-Levenshtein (no substring is edited twice).  Unlike the
unrestricted variant it does not satisfy the triangle inequality, e.g.
``d("ca", "ac") + d("ac", "abc") = 2`` while ``d("ca", "abc") = 3``.
"""
from __future__ import annotations

import enum
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import kernels

__all__ = [
    "Span",
    "MacroKind",
    "DocMeta",
    "LayeredText",
    "ValidationReport",
    "HistbankError",
    "LengthMismatch",
    "damerau_levenshtein",
    "validate",
    "RESERVED_CHARS",
    "atomic_write",
]

#: Characters that may never appear inside a structural label.
RESERVED_CHARS = frozenset("\t\n|⟨⟩")

CENTURIES = (17, 18, 19)
TEXT_TYPES = ("everyday", "science", "utility", "fiction")
COL_LABELS = ("N", "D", "unlabeled")


class HistbankError(Exception):
    """Base class of all data errors raised by the toolkit."""


class LengthMismatch(HistbankError, ValueError):
    pass


@dataclass(frozen=True, order=True)
class Span:
    """Half-open token range ``[start, end)``."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"invalid span [{self.start},{self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def __contains__(self, index: int) -> bool:
        return self.start <= index < self.end

    def __iter__(self):
        return iter(range(self.start, self.end))

    def __str__(self) -> str:
        return f"[{self.start},{self.end})"

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def contains_span(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def shift(self, offset: int) -> "Span":
        return Span(self.start + offset, self.end + offset)


def runs(indices: Iterable[int]) -> list[Span]:
    """Maximal contiguous runs of a set of token indices, left to right."""
    out: list[Span] = []
    start = prev = None
    for i in sorted(set(indices)):
        if prev is not None and i == prev + 1:
            prev = i
            continue
        if start is not None:
            out.append(Span(start, prev + 1))
        start = prev = i
    if start is not None:
        out.append(Span(start, prev + 1))
    return out


class MacroKind(str, enum.Enum):
    S = "s"     # grammatical sentence
    KG = "kg"   # unit of cohesion
    NI = "ni"   # non-sentence

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DocMeta:
    text_id: str = ""
    century: int | None = None
    text_type: str | None = None
    col_label: str = "unlabeled"


@dataclass(frozen=True)
class LayeredText:
    """A token sequence with aligned annotation layers.

    ``norm`` is either empty (no normalization layer) or token-aligned.  An
    empty string in ``norm`` marks a token whose normalization cell is merged
    with the previous token's (the merged value sits on the first token).
    ``layers`` holds further named token-aligned layers such as native PoS.
    """

    tokens: tuple[str, ...] = ()
    norm: tuple[str, ...] = ()
    source_tokens: tuple[tuple[Span, str], ...] = ()
    macro_units: tuple[tuple[Span, MacroKind], ...] = ()
    orth_sentences: tuple[Span, ...] = ()
    meta: DocMeta = field(default_factory=DocMeta)
    layers: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "norm", tuple(self.norm))
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        object.__setattr__(
            self, "macro_units",
            tuple((span, MacroKind(kind)) for span, kind in self.macro_units))
        object.__setattr__(self, "orth_sentences", tuple(self.orth_sentences))
        object.__setattr__(
            self, "layers", {k: tuple(v) for k, v in dict(self.layers).items()})

    def __hash__(self):
        return hash((self.tokens, self.norm, self.source_tokens,
                     self.macro_units, self.orth_sentences, self.meta,
                     tuple(sorted(self.layers.items()))))

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], **kwargs) -> "LayeredText":
        """Document whose source tokens coincide with its tokens."""
        tokens = tuple(tokens)
        source = tuple((Span(i, i + 1), t) for i, t in enumerate(tokens))
        return cls(tokens=tokens, source_tokens=source, **kwargs)

    def __len__(self) -> int:
        return len(self.tokens)

    def replace(self, **changes) -> "LayeredText":
        values = {
            "tokens": self.tokens, "norm": self.norm,
            "source_tokens": self.source_tokens,
            "macro_units": self.macro_units,
            "orth_sentences": self.orth_sentences,
            "meta": self.meta, "layers": self.layers,
        }
        values.update(changes)
        return LayeredText(**values)

    def macro_kind_at(self) -> list[MacroKind | None]:
        out: list[MacroKind | None] = [None] * len(self.tokens)
        for span, kind in self.macro_units:
            for i in span:
                if i < len(out):
                    out[i] = kind
        return out


@dataclass
class ValidationReport:
    errors: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, location: str, message: str) -> None:
        self.errors.append((location, message))

    def warn(self, location: str, message: str) -> None:
        self.warnings.append((location, message))

    def extend(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)

    def format(self) -> str:
        lines = [f"error\t{loc}\t{msg}" for loc, msg in self.errors]
        lines += [f"warning\t{loc}\t{msg}" for loc, msg in self.warnings]
        return "\n".join(lines)


def damerau_levenshtein(a: str, b: str) -> int:
    """Optimal-string-alignment distance over Unicode scalar values.

    >>> damerau_levenshtein("ward", "wart")
    1
    >>> damerau_levenshtein("ab", "ba")
    1
    """
    return kernels.osa_distance(a, b)


def _check_ordered(report: ValidationReport, name: str,
                   spans: Sequence[Span], n: int) -> None:
    for span in spans:
        if span.end > n:
            report.error(f"{name} {span}", f"span exceeds token count {n}")
    for prev, cur in zip(spans, spans[1:]):
        if prev.overlaps(cur):
            report.error(f"{name} {prev} {cur}", "overlapping spans")
        elif cur.start < prev.start:
            report.error(f"{name} {prev} {cur}", "spans out of order")


def validate(doc: LayeredText) -> ValidationReport:
    """Check every structural invariant of ``doc``; never raises."""
    report = ValidationReport()
    n = len(doc.tokens)

    if doc.norm:
        if len(doc.norm) != n:
            report.error("norm", f"layer has {len(doc.norm)} items, expected {n}")
        elif doc.norm[0] == "":
            report.error("norm 0", "continuation without a preceding cell")
    for name, items in doc.layers.items():
        if len(items) != n:
            report.error(f"layer {name}",
                         f"layer has {len(items)} items, expected {n}")

    expected = 0
    for span, _text in doc.source_tokens:
        if span.start != expected:
            report.error(f"source_tokens {span}",
                         f"partition gap or overlap at token {expected}")
        expected = max(expected, span.end)
    if expected != n:
        report.error("source_tokens",
                     f"spans cover [0,{expected}) but token count is {n}")

    _check_ordered(report, "macro_units", [s for s, _ in doc.macro_units], n)
    _check_ordered(report, "orth_sentences", list(doc.orth_sentences), n)

    meta = doc.meta
    if meta.century is not None and meta.century not in CENTURIES:
        report.error("meta.century", f"unknown century {meta.century}")
    if meta.text_type is not None and meta.text_type not in TEXT_TYPES:
        report.error("meta.text_type", f"unknown text type {meta.text_type!r}")
    if meta.col_label not in COL_LABELS:
        report.error("meta.col_label", f"unknown label {meta.col_label!r}")
    return report


def atomic_write(path, data: bytes) -> None:
    """Write ``data`` to a temporary sibling of ``path``, then rename it.

    Readers never observe a partially written file.
    """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{os.path.basename(path)}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
