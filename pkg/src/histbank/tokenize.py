"""Rule-based sub-tokenization of historical source tokens.

A coarse source token (an orthographic word of the edition) is split into
analysis tokens when its parts carry separate syntactic functions:
preposition+article contractions (``Vom``), pronominal adverbs
(``wovon``, ``darvon``), pronominal clitics (``ichs``, ``hastu``) and
particle verbs (``voraussehe``).

Every split keeps a character alignment: each emitted part owns a contiguous
slice of the source token and the slices partition it.  A part's emitted
text may differ from its slice only by a documented expansion (``s`` is
emitted as ``es``, ``Vo`` as ``Von``).

Rules are tried in a fixed priority order, closed classes first::

    contraction > pron_adverb > clitic > particle_verb

Unknown cases are left unsplit.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .core import HistbankError, LayeredText, LengthMismatch, Span

RULE_PRIORITY = ("contraction", "pron_adverb", "clitic", "particle_verb")

PRON_PREFIXES = ("da", "dar", "wo", "wor", "hie", "hier")
# prefixes that take any preposition; the others only consonant-initial ones
_R_PREFIXES = frozenset({"dar", "wor", "hier"})
_VOWELS = frozenset("aeiouäöüAEIOUÄÖÜ")

INFINITIVE_SUFFIXES = ("en", "n")
# inflectional endings accepted after a verb stem in the particle-verb rule
VERB_ENDINGS = frozenset({
    "", "e", "n", "en", "st", "est", "t", "et", "end", "ende",
    "te", "ten", "test", "tet", "ete", "eten", "etest", "etet",
})


class ConflictingRules(HistbankError):
    def __init__(self, message, position=None):
        super().__init__(message if position is None
                         else f"token {position}: {message}")
        self.position = position


class Part(NamedTuple):
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class SplitDecision:
    source: str
    parts: tuple[Part, ...]
    rule: str | None = None

    @classmethod
    def identity(cls, source: str) -> "SplitDecision":
        return cls(source, (Part(source, 0, len(source)),), None)

    @classmethod
    def from_texts(cls, source: str, texts: Sequence[str],
                   rule: str | None = None) -> "SplitDecision":
        """Decision whose parts own exactly their own text (no expansions)."""
        parts, pos = [], 0
        for text in texts:
            parts.append(Part(text, pos, pos + len(text)))
            pos += len(text)
        if pos != len(source):
            raise ValueError(f"{texts!r} does not partition {source!r}")
        return cls(source, tuple(parts), rule if len(parts) > 1 else None)

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(p.text for p in self.parts)

    @property
    def is_split(self) -> bool:
        return len(self.parts) > 1

    def owned(self) -> tuple[str, ...]:
        return tuple(self.source[p.start:p.end] for p in self.parts)


@dataclass(frozen=True)
class ParticleVerbLexicon:
    entries: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        for (particle, base), freq in self.entries.items():
            if not particle or not base or freq < 1:
                raise ValueError(f"bad entry {particle!r} {base!r} {freq}")
        object.__setattr__(self, "entries", dict(self.entries))

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    def by_particle(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for particle, base in sorted(self.entries):
            out.setdefault(particle, []).append(base)
        return out

    @classmethod
    def load(cls, path) -> "ParticleVerbLexicon":
        entries: Counter = Counter()
        for line in _data_lines(path):
            particle, base, freq = line.split("\t")
            entries[(particle, base)] += int(freq)
        return cls(dict(entries))

    def dump(self) -> str:
        return "".join(f"{p}\t{b}\t{f}\n"
                       for (p, b), f in sorted(self.entries.items()))


@dataclass(frozen=True)
class SplitRule:
    id: str
    description: str
    expansions: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class SplitRuleSet:
    """Contraction table and clitic patterns.

    ``contractions`` maps a lowercased contraction to its two parts, each a
    pair (owned source slice, emitted text).  ``clitics`` holds compiled
    patterns with named groups ``host`` and ``clitic`` plus the text emitted
    for the clitic.
    """

    contractions: Mapping[str, tuple[tuple[str, str], tuple[str, str]]]
    clitics: tuple[tuple[re.Pattern, str], ...]

    @classmethod
    def load(cls, contractions_path=None, clitics_path=None) -> "SplitRuleSet":
        table = {}
        for line in _data_lines(contractions_path or _default("contractions.tsv")):
            word, src1, out1, src2, out2 = line.split("\t")
            if src1 + src2 != word:
                raise ValueError(f"contraction {word!r}: parts do not partition it")
            table[word] = ((src1, out1), (src2, out2))
        clitics = []
        for line in _data_lines(clitics_path or _default("clitics.tsv")):
            pattern, expansion = line.split("\t")
            rx = re.compile(pattern, re.IGNORECASE)
            if set(rx.groupindex) != {"host", "clitic"}:
                raise ValueError(f"clitic pattern {pattern!r} needs groups host and clitic")
            clitics.append((rx, expansion))
        return cls(table, tuple(clitics))

    def rules(self) -> list[SplitRule]:
        return [
            SplitRule("contraction", "preposition + article",
                      {s1: o1 for (s1, o1), _ in self.contractions.values() if s1 != o1}),
            SplitRule("pron_adverb", "(da|dar|wo|wor|hie|hier) + preposition"),
            SplitRule("clitic", "verb or pronoun host + enclitic pronoun",
                      {rx.pattern: exp for rx, exp in self.clitics}),
            SplitRule("particle_verb", "separable particle + base verb form"),
        ]


@dataclass(frozen=True)
class Lexicons:
    prepositions: frozenset[str]
    particle_verbs: ParticleVerbLexicon
    particles: frozenset[str]

    @classmethod
    def load(cls, prepositions=None, particle_verbs=None, particles=None) -> "Lexicons":
        return cls(
            frozenset(_data_lines(prepositions or _default("prepositions.txt"))),
            ParticleVerbLexicon.load(particle_verbs or _default("particle_verbs.tsv")),
            frozenset(_data_lines(particles or _default("particles.txt"))),
        )


@dataclass
class SplitEvalResult:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f_score: float
    mismatches: list[tuple[str, tuple[str, ...], tuple[str, ...]]]


def _default(name):
    return resources.files("histbank") / "data" / name


def _data_lines(path) -> list[str]:
    if isinstance(path, (str, Path)):
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = path.read_text(encoding="utf-8")
    return [line.rstrip("\n") for line in text.splitlines()
            if line.strip() and not line.startswith("#")]


def default_rules() -> tuple[SplitRuleSet, Lexicons]:
    return SplitRuleSet.load(), Lexicons.load()


# -- harvesting ---------------------------------------------------------

def _zu_infinitive(token: str, particles) -> tuple[str, str] | None:
    if not token.islower():
        return None
    best = None
    for particle in particles:
        if not token.startswith(particle + "zu"):
            continue
        inf = token[len(particle) + 2:]
        if len(inf) < 3 or not inf.endswith(INFINITIVE_SUFFIXES):
            continue
        if best is None or len(particle) > len(best[0]):
            best = (particle, inf)
    return best


def harvest_particle_verbs(tokens: Iterable[str],
                           particles: Iterable[str] | None = None) -> ParticleVerbLexicon:
    """Collect (particle, infinitive) pairs from zu-infinitives.

    ``loszulaufen`` contributes ``(los, laufen)``.  When several particles
    fit, the longest wins (``hinzuzufügen`` is ``hinzu`` + ``fügen``).
    """
    if particles is None:
        particles = Lexicons.load().particles
    particles = sorted(set(particles))
    counts: Counter = Counter()
    for token in tokens:
        hit = _zu_infinitive(token, particles)
        if hit:
            counts[hit] += 1
    return ParticleVerbLexicon(dict(counts))


# -- splitting ----------------------------------------------------------

def _match_case(emitted: str, owned: str) -> str:
    if owned[:1].isupper():
        return emitted[:1].upper() + emitted[1:]
    return emitted


def _contraction(source, rules, lexicons):
    entry = rules.contractions.get(source.lower())
    if entry is None:
        return []
    (src1, out1), (src2, out2) = entry
    k = len(src1)
    return [(Part(_match_case(out1, source[:k]), 0, k),
             Part(out2, k, len(source)))]


def _pron_adverb(source, rules, lexicons):
    lower = source.lower()
    found = []
    for prefix in PRON_PREFIXES:
        if not lower.startswith(prefix):
            continue
        rest = lower[len(prefix):]
        if rest not in lexicons.prepositions:
            continue
        if prefix not in _R_PREFIXES and rest[0] in _VOWELS:
            continue
        k = len(prefix)
        found.append((Part(source[:k], 0, k), Part(source[k:], k, len(source))))
    return found


def _clitic(source, rules, lexicons):
    found = []
    for rx, expansion in rules.clitics:
        m = rx.fullmatch(source)
        if m is None or not m.group("host"):
            continue
        k = m.start("clitic")
        found.append((Part(source[:k], 0, k), Part(expansion, k, len(source))))
    return found


def _particle_verb(source, rules, lexicons):
    if not source[:1].islower():
        return []
    found = []
    for particle, bases in lexicons.particle_verbs.by_particle().items():
        if not source.startswith(particle) or len(source) == len(particle):
            continue
        rest = source[len(particle):]
        for base in bases:
            stem = base
            for suffix in INFINITIVE_SUFFIXES:
                if base.endswith(suffix):
                    stem = base[:-len(suffix)]
                    break
            if rest == base or (rest.startswith(stem)
                                and rest[len(stem):] in VERB_ENDINGS):
                k = len(particle)
                found.append((Part(particle, 0, k), Part(rest, k, len(source))))
                break
    return found


_MATCHERS = {
    "contraction": _contraction,
    "pron_adverb": _pron_adverb,
    "clitic": _clitic,
    "particle_verb": _particle_verb,
}


def split_token(source: str, rules: SplitRuleSet, lexicons: Lexicons) -> SplitDecision:
    """Split one source token with the highest-priority matching rule.

    >>> rules, lex = default_rules()
    >>> split_token("wovon", rules, lex).texts
    ('wo', 'von')
    >>> split_token("ichs", rules, lex).texts
    ('ich', 'es')
    """
    if not source or any(c.isspace() for c in source):
        raise ValueError(f"not a single source token: {source!r}")
    for rule_id in RULE_PRIORITY:
        found = set(_MATCHERS[rule_id](source, rules, lexicons))
        if len(found) > 1:
            shapes = sorted("+".join(p.text for p in parts) for parts in found)
            raise ConflictingRules(
                f"{source!r}: rule {rule_id} matches as {', '.join(shapes)}")
        if found:
            return SplitDecision(source, found.pop(), rule_id)
    return SplitDecision.identity(source)


def tokenize_document(doc: LayeredText, rules: SplitRuleSet,
                      lexicons: Lexicons) -> LayeredText:
    """Replace the token layer by the split parts of every source token.

    Span layers are remapped through source-token ownership; token-aligned
    layers (norm and extra layers) keep their value on the first part of
    each source token and mark the other parts as merged.
    """
    if doc.source_tokens:
        sources = doc.source_tokens
    else:
        sources = tuple((Span(i, i + 1), t) for i, t in enumerate(doc.tokens))

    owner = {}
    for k, (span, _) in enumerate(sources):
        for i in span:
            owner[i] = k

    tokens, new_sources = [], []
    for k, (span, text) in enumerate(sources):
        try:
            decision = split_token(text, rules, lexicons)
        except ConflictingRules as exc:
            raise ConflictingRules(str(exc), position=k) from None
        start = len(tokens)
        tokens.extend(decision.texts)
        new_sources.append((Span(start, len(tokens)), text))

    def remap(span: Span) -> Span:
        first = new_sources[owner[span.start]][0]
        last = new_sources[owner[span.end - 1]][0]
        return Span(first.start, last.end)

    def realign(items):
        if not items:
            return ()
        out = []
        for k, (span, _) in enumerate(sources):
            value = items[span.start]
            n_parts = len(new_sources[k][0])
            out.append(value)
            out.extend([""] * (n_parts - 1))
        return tuple(out)

    return doc.replace(
        tokens=tuple(tokens),
        norm=realign(doc.norm),
        source_tokens=tuple(new_sources),
        macro_units=tuple((remap(s), kind) for s, kind in doc.macro_units),
        orth_sentences=tuple(remap(s) for s in doc.orth_sentences),
        layers={name: realign(items) for name, items in doc.layers.items()},
    )


def evaluate_splits(predicted: Sequence[SplitDecision],
                    gold: Sequence[SplitDecision]) -> SplitEvalResult:
    """Score predicted splits against gold splits, per source token.

    A wrongly split token (both split, parts differ) counts as a false
    positive and a false negative.  Without any split on either side
    every score is 1 by convention.
    """
    if len(predicted) != len(gold):
        raise LengthMismatch(
            f"{len(predicted)} predicted vs {len(gold)} gold source tokens")
    tp = fp = fn = 0
    mismatches = []
    for pred, ref in zip(predicted, gold):
        if pred.source != ref.source:
            raise LengthMismatch(f"source tokens differ: {pred.source!r} vs {ref.source!r}")
        same = pred.texts == ref.texts
        if ref.is_split and same:
            tp += 1
            continue
        if pred.is_split and not same:
            fp += 1
        if ref.is_split and not same:
            fn += 1
        if not same:
            mismatches.append((ref.source, pred.texts, ref.texts))
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return SplitEvalResult(tp, fp, fn, precision, recall, f, mismatches)
