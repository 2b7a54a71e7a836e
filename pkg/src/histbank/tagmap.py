"""Derive a standard part-of-speech tagset from existing rich annotation.

Features combine the token surface with what the manual treebank already
encodes about the enclosing constituents, plus the native and donor
tags.  A deterministic frequency-backoff classifier maps them to the
target tag, consulting feature templates from most to least specific::

    0  all fields
    1  native tag, parent function, parent form
    2  parent function, suffix
    3  native tag
    4  suffix
    -  global majority tag

Ties between tags are broken lexicographically.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

from .core import HistbankError, LayeredText
from .treegrid import ConstituencyNode

ABSENT = "<none>"
MODEL_VERSION = "1"
GLOBAL = "global"


class EmptyTraining(HistbankError):
    pass


class SizeExceedsData(HistbankError):
    pass


@dataclass(frozen=True)
class TagFeatures:
    form: str = ABSENT
    norm: str = ABSENT
    native_pos: str = ABSENT
    donor: str = ABSENT
    parent_function: str = ABSENT
    parent_form: str = ABSENT
    grandparent_form: str = ABSENT
    suffix: str = ABSENT


FEATURE_NAMES = tuple(f.name for f in fields(TagFeatures))

DEFAULT_TEMPLATES: tuple[tuple[str, ...], ...] = (
    FEATURE_NAMES,
    ("native_pos", "parent_function", "parent_form"),
    ("parent_function", "suffix"),
    ("native_pos",),
    ("suffix",),
)


def _majority(counts: Counter) -> str:
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


@dataclass
class BackoffModel:
    templates: tuple[tuple[str, ...], ...]
    tables: list[dict[tuple[str, ...], Counter]]
    majority: str

    def key(self, template: int, features: TagFeatures) -> tuple[str, ...]:
        return tuple(getattr(features, name) for name in self.templates[template])

    def dumps(self) -> str:
        lines = [f"#histbank-tagmap\t{MODEL_VERSION}"]
        for k, template in enumerate(self.templates):
            lines.append(f"#template\t{k}\t{' '.join(template)}")
        lines.append(f"#majority\t{self.majority}")
        for k, table in enumerate(self.tables):
            for key in sorted(table):
                for tag, count in sorted(table[key].items()):
                    lines.append(f"{k}\t{' '.join(key)}\t{tag}\t{count}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "BackoffModel":
        lines = text.splitlines()
        if not lines or lines[0] != f"#histbank-tagmap\t{MODEL_VERSION}":
            raise ValueError("not a version-1 tagmap model")
        templates: list[tuple[str, ...]] = []
        majority = None
        rows = []
        for line in lines[1:]:
            parts = line.split("\t")
            if parts[0] == "#template":
                templates.append(tuple(parts[2].split(" ")))
            elif parts[0] == "#majority":
                majority = parts[1]
            elif line:
                rows.append(parts)
        tables: list[dict] = [dict() for _ in templates]
        for k, key, tag, count in rows:
            tables[int(k)].setdefault(tuple(key.split(" ")), Counter())[tag] = int(count)
        if majority is None:
            raise ValueError("model has no majority tag")
        return cls(tuple(templates), tables, majority)


def _value(v: str | None) -> str:
    if v is None or v == "":
        return ABSENT
    # model rows join feature values with single spaces
    return v.replace(" ", "_")


def _terminal_parents(forest: Sequence[ConstituencyNode]):
    parent: dict[int, tuple[ConstituencyNode, ConstituencyNode | None]] = {}

    def visit(node, up):
        for child in node.children:
            if isinstance(child, ConstituencyNode):
                visit(child, node)
            else:
                parent[child] = (node, up)

    for root in forest:
        visit(root, None)
    return parent


def extract_features(doc: LayeredText, forest: Sequence[ConstituencyNode],
                     index: int, pos_layer: str = "pos",
                     donor_layer: str = "donor", _parents=None) -> TagFeatures:
    """Feature bundle of token ``index``.

    The parent is the constituent holding the token as a terminal, the
    grandparent that constituent's parent.
    """
    parents = _parents if _parents is not None else _terminal_parents(forest)
    form = doc.tokens[index]
    norm = doc.norm[index] if doc.norm else None
    native = doc.layers.get(pos_layer)
    donor = doc.layers.get(donor_layer)
    node, up = parents.get(index, (None, None))
    return TagFeatures(
        form=_value(form),
        norm=_value(norm),
        native_pos=_value(native[index] if native else None),
        donor=_value(donor[index] if donor else None),
        parent_function=_value(node.function_label if node else None),
        parent_form=_value(node.form_label if node else None),
        grandparent_form=_value(up.form_label if up else None),
        suffix=_value(form[-3:]),
    )


def document_features(doc: LayeredText, forest: Sequence[ConstituencyNode],
                      **kwargs) -> list[TagFeatures]:
    parents = _terminal_parents(forest)
    return [extract_features(doc, forest, i, _parents=parents, **kwargs)
            for i in range(len(doc.tokens))]


def train(pairs: Iterable[tuple[TagFeatures, str]],
          templates: Sequence[Sequence[str]] = DEFAULT_TEMPLATES) -> BackoffModel:
    templates = tuple(tuple(t) for t in templates)
    tables: list[dict[tuple[str, ...], Counter]] = [dict() for _ in templates]
    overall: Counter = Counter()
    for features, tag in pairs:
        overall[tag] += 1
        for k, template in enumerate(templates):
            key = tuple(getattr(features, name) for name in template)
            tables[k].setdefault(key, Counter())[tag] += 1
    if not overall:
        raise EmptyTraining("no training pairs")
    return BackoffModel(templates, tables, _majority(overall))


def apply(model: BackoffModel, features: TagFeatures) -> tuple[str, int | str]:
    """Predicted tag and the id of the template that produced it."""
    for k, table in enumerate(model.tables):
        counts = table.get(model.key(k, features))
        if counts:
            return _majority(counts), k
    return model.majority, GLOBAL


def accuracy(model: BackoffModel, pairs: Sequence[tuple[TagFeatures, str]]) -> float:
    if not pairs:
        return 1.0
    hits = sum(apply(model, f)[0] == tag for f, tag in pairs)
    return hits / len(pairs)


def learning_curve(training: Sequence[tuple[TagFeatures, str]],
                   sizes: Sequence[int],
                   held_out: Sequence[tuple[TagFeatures, str]],
                   templates: Sequence[Sequence[str]] = DEFAULT_TEMPLATES) -> list[tuple[int, float]]:
    """Accuracy on ``held_out`` after training on the first ``size`` tokens."""
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    curve = []
    for size in sizes:
        if size > len(training):
            raise SizeExceedsData(f"size {size} exceeds {len(training)} training tokens")
        if size < 1:
            raise SizeExceedsData("size must be positive")
        model = train(training[:size], templates)
        curve.append((size, accuracy(model, held_out)))
    return curve
