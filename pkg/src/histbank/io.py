"""File formats: grid TSV, dependency TSV, vertical and plain text, standoff XML.

Grid TSV
--------
Optional ``# key = value`` metadata lines, then a header row and one row per
token::

    idx  token  norm  src  macro  orth  [extra layers]  d0  d1 ...

``idx`` is 1-based.  A cell that spans several rows carries its value on the
first row and ``|`` on the following ones; ``_`` marks an absent value.
Literal values that would read as one of those markers get a leading
backslash, as do values that already start with one.  A discontinuous constituent part is
written ``⟨label⟩``.

The writer is canonical (fixed column order, extra layers sorted by name,
LF line endings, no trailing whitespace); the reader also accepts CRLF,
a byte-order mark, blank lines and trailing blanks.

Dependency TSV
--------------
``id form norm pos head deprel`` with one token per line and a blank line
between sentences.  The root has head 0.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Sequence

from .core import (HistbankError, DocMeta, LayeredText, MacroKind, Span,
                   ValidationReport, validate)
from .treegrid import (ConstituencyNode, DependencyGraph, GridCell, GridDocument,
                       check_dependency, check_grid)

FIXED_COLUMNS = ("idx", "token", "norm", "src", "macro", "orth")
DEP_COLUMNS = ("id", "form", "norm", "pos", "head", "deprel")
ABSENT = "_"
CONTINUE = "|"
OPEN, CLOSE = "⟨", "⟩"
_DEPTH = re.compile(r"d(0|[1-9][0-9]*)")
_META = re.compile(r"#\s*([A-Za-z_]+)\s*=\s*(.*?)\s*")


class ParseError(HistbankError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class EncodingError(ParseError):
    pass


class ValidationError(HistbankError, ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__(report.format())


def decode(data: bytes, what: str = "input") -> str:
    """Strict UTF-8 decoding; a leading byte-order mark is dropped."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[:exc.start].count(b"\n") + 1
        column = exc.start - (data.rfind(b"\n", 0, exc.start) + 1) + 1
        raise EncodingError(f"{what} is not valid UTF-8 (byte 0x{data[exc.start]:02x})",
                            line, column) from None
    return text[1:] if text.startswith("﻿") else text


def escape(value: str) -> str:
    if value in (ABSENT, CONTINUE) or value.startswith("\\"):
        return "\\" + value
    return value


def unescape(field: str) -> str:
    return field[1:] if field.startswith("\\") else field


def _check_field(value: str, where: str) -> None:
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"{where}: value {value!r} contains a tab or line break")


def _lines(text: str) -> list[tuple[int, str]]:
    """Numbered non-blank lines with line endings and trailing blanks removed."""
    out = []
    for number, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r").rstrip(" ")
        if line.strip():
            out.append((number, line))
    return out


# -- grid TSV -----------------------------------------------------------

def _span_column(n: int, spans: Iterable[tuple[Span, str]]) -> list[str]:
    column = [ABSENT] * n
    for span, value in spans:
        column[span.start] = escape(value)
        for r in range(span.start + 1, span.end):
            column[r] = CONTINUE
    return column


def _merged_column(values: Sequence[str]) -> list[str]:
    """Token-aligned layer where ``""`` means merged with the previous row."""
    return [CONTINUE if v == "" else escape(v) for v in values]


def write_grid(doc: LayeredText, grid: GridDocument | None = None) -> bytes:
    n = len(doc.tokens)
    grid = grid or GridDocument(doc.tokens)
    layer_names = sorted(doc.layers)
    lines = []
    meta = doc.meta
    if meta.text_id:
        lines.append(f"# text_id = {meta.text_id}")
    if meta.century is not None:
        lines.append(f"# century = {meta.century}")
    if meta.text_type is not None:
        lines.append(f"# text_type = {meta.text_type}")
    if meta.col_label != DocMeta().col_label:
        lines.append(f"# col_label = {meta.col_label}")
    width = grid.n_depths
    lines.append("\t".join(FIXED_COLUMNS + tuple(layer_names)
                           + tuple(f"d{d}" for d in range(width))))

    columns = [
        [str(i + 1) for i in range(n)],
        [escape(t) for t in doc.tokens],
        _merged_column(doc.norm) if doc.norm else [ABSENT] * n,
        _span_column(n, doc.source_tokens),
        _span_column(n, ((s, k.value) for s, k in doc.macro_units)),
        _span_column(n, ((s, "s") for s in doc.orth_sentences)),
    ]
    columns += [_merged_column(doc.layers[name]) for name in layer_names]
    for d in range(width):
        column = [ABSENT] * n
        for cell in grid.at_depth(d):
            label = f"{OPEN}{cell.label}{CLOSE}" if cell.discontinuous else cell.label
            column[cell.row_span.start] = label
            for r in range(cell.row_span.start + 1, cell.row_span.end):
                column[r] = CONTINUE
        columns.append(column)
    for r in range(n):
        row = [col[r] for col in columns]
        for k, value in enumerate(row):
            _check_field(value, f"row {r + 1}, column {k + 1}")
        lines.append("\t".join(row))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _read_spans(rows, k, header):
    """Decode a span column into (Span, value) pairs."""
    out: list[tuple[Span, str]] = []
    start, value = None, None
    for r, (lineno, fields) in enumerate(rows):
        f = fields[k]
        if f == CONTINUE:
            if start is None:
                raise ParseError(f"continuation in column {header[k]!r} without an open cell",
                                 lineno, k + 1)
            continue
        if start is not None:
            out.append((Span(start, r), value))
            start = None
        if f != ABSENT:
            start, value = r, unescape(f)
    if start is not None:
        out.append((Span(start, len(rows)), value))
    return out


def _read_merged(rows, k, header) -> tuple[str, ...]:
    values = []
    for r, (lineno, fields) in enumerate(rows):
        f = fields[k]
        if f == CONTINUE:
            values.append("")
        elif f == ABSENT:
            raise ParseError(f"absent value in token-aligned column {header[k]!r}",
                             lineno, k + 1)
        else:
            values.append(unescape(f))
    return tuple(values)


def _parse_meta(key: str, value: str, lineno: int, meta: dict) -> None:
    if key == "century":
        try:
            meta[key] = int(value)
        except ValueError:
            raise ParseError(f"century must be an integer, got {value!r}", lineno) from None
    elif key in ("text_id", "text_type", "col_label"):
        meta[key] = value
    else:
        raise ParseError(f"unknown metadata key {key!r}", lineno)


def read_grid(data: bytes, validate_doc: bool = True) -> tuple[LayeredText, GridDocument]:
    """Parse grid TSV bytes into a document and its grid."""
    text = decode(data, "grid file")
    meta: dict = {}
    header = None
    rows: list[tuple[int, list[str]]] = []
    for lineno, line in _lines(text):
        if header is None and line.startswith("#"):
            m = _META.fullmatch(line)
            if not m:
                raise ParseError("malformed metadata line (expected '# key = value')", lineno)
            _parse_meta(m.group(1), m.group(2), lineno, meta)
            continue
        fields = line.split("\t")
        if header is None:
            header = fields
            if tuple(header[:len(FIXED_COLUMNS)]) != FIXED_COLUMNS:
                raise ParseError("header must start with " + " ".join(FIXED_COLUMNS), lineno, 1)
            continue
        if len(fields) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(fields)}", lineno)
        rows.append((lineno, fields))
    if header is None:
        raise ParseError("missing header row", 1)

    extra = header[len(FIXED_COLUMNS):]
    depth_at = [k for k, name in enumerate(extra) if _DEPTH.fullmatch(name)]
    first_depth = depth_at[0] if depth_at else len(extra)
    layer_names = extra[:first_depth]
    depth_names = extra[first_depth:]
    if depth_names != [f"d{d}" for d in range(len(depth_names))]:
        raise ParseError("depth columns must be d0, d1, ... and come last", 1)
    if len(set(layer_names)) != len(layer_names) or set(layer_names) & set(FIXED_COLUMNS):
        raise ParseError("duplicate column name in header", 1)

    for r, (lineno, fields) in enumerate(rows):
        if fields[0] != str(r + 1):
            raise ParseError(f"idx {fields[0]!r} out of sequence, expected {r + 1}", lineno, 1)
    tokens = tuple(unescape(f[1]) for _, f in rows)
    norm_column = [f[2] for _, f in rows]
    norm = () if all(v == ABSENT for v in norm_column) else _read_merged(rows, 2, header)
    source = tuple(_read_spans(rows, 3, header))
    macro = []
    for span, value in _read_spans(rows, 4, header):
        try:
            macro.append((span, MacroKind(value)))
        except ValueError:
            raise ParseError(f"unknown macro unit kind {value!r}",
                             rows[span.start][0], 5) from None
    orth = tuple(span for span, _ in _read_spans(rows, 5, header))
    layers = {name: _read_merged(rows, len(FIXED_COLUMNS) + k, header)
              for k, name in enumerate(layer_names)}

    cells = []
    base = len(FIXED_COLUMNS) + len(layer_names)
    for d in range(len(depth_names)):
        for span, label in _read_spans(rows, base + d, header):
            discontinuous = label.startswith(OPEN) and label.endswith(CLOSE) and len(label) > 2
            if discontinuous:
                label = label[1:-1]
            cells.append(GridCell(d, span, label, discontinuous))

    doc = LayeredText(tokens=tokens, norm=norm, source_tokens=source,
                      macro_units=tuple(macro), orth_sentences=orth,
                      meta=DocMeta(**meta), layers=layers)
    grid = GridDocument(tokens, tuple(cells))
    if validate_doc:
        report = validate(doc)
        report.extend(check_grid(grid))
        if not report.ok:
            raise ValidationError(report)
    return doc, grid


# -- dependency TSV -----------------------------------------------------

def write_dependency(sentences: Sequence[DependencyGraph]) -> bytes:
    blocks = []
    for graph in sentences:
        lines = []
        for k in range(len(graph)):
            norm = graph.norms[k] if graph.norms else ""
            row = [str(k + 1), escape(graph.forms[k]), escape(norm) if norm else ABSENT,
                   escape(graph.pos[k]), str(graph.heads[k]), escape(graph.rels[k])]
            for value in row:
                _check_field(value, f"token {k + 1}")
            lines.append("\t".join(row))
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks).encode("utf-8")


def read_dependency(data: bytes) -> list[DependencyGraph]:
    text = decode(data, "dependency file")
    sentences: list[list[tuple[int, list[str]]]] = [[]]
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r").rstrip(" ")
        if not line.strip():
            if sentences[-1]:
                sentences.append([])
            continue
        if line.startswith("#"):
            continue
        sentences[-1].append((lineno, line.split("\t")))
    if not sentences[-1]:
        sentences.pop()

    graphs = []
    for rows in sentences:
        n = len(rows)
        forms, norms, pos, heads, rels = [], [], [], [], []
        for k, (lineno, fields) in enumerate(rows):
            if len(fields) != len(DEP_COLUMNS):
                raise ParseError(f"expected {len(DEP_COLUMNS)} fields, found {len(fields)}",
                                 lineno)
            if fields[0] != str(k + 1):
                raise ParseError(f"id {fields[0]!r} out of sequence, expected {k + 1}",
                                 lineno, 1)
            try:
                head = int(fields[4])
            except ValueError:
                raise ParseError(f"head {fields[4]!r} is not an integer", lineno, 5) from None
            if not 0 <= head <= n:
                raise ParseError(f"head {head} out of range 0..{n}", lineno, 5)
            forms.append(unescape(fields[1]))
            norms.append("" if fields[2] == ABSENT else unescape(fields[2]))
            pos.append(unescape(fields[3]))
            heads.append(head)
            rels.append(unescape(fields[5]))
        graph = DependencyGraph(tuple(forms), tuple(heads), tuple(rels), tuple(pos),
                                tuple(norms))
        check_dependency(graph)
        graphs.append(graph)
    return graphs


# -- plain and vertical text --------------------------------------------

def ingest_plaintext(data: bytes) -> LayeredText:
    """Whitespace tokenization: every maximal non-space run is one token."""
    return LayeredText.from_tokens(decode(data, "plain text").split())


def read_vertical(data: bytes) -> LayeredText:
    """One token per line, blank lines between orthographic sentences.

    An optional second tab-separated column holds the normalization.
    """
    text = decode(data, "vertical file")
    tokens, norms, sentences = [], [], []
    start = 0
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            if len(tokens) > start:
                sentences.append(Span(start, len(tokens)))
            start = len(tokens)
            continue
        fields = line.split("\t")
        if len(fields) > 2 or not fields[0].strip() or " " in fields[0].strip():
            raise ParseError("expected a token and an optional normalization", lineno)
        tokens.append(fields[0].strip())
        norms.append(fields[1].strip() if len(fields) == 2 else None)
    if len(tokens) > start:
        sentences.append(Span(start, len(tokens)))
    norm = ()
    if any(v is not None for v in norms):
        norm = tuple(t if v is None else v for t, v in zip(tokens, norms))
    return LayeredText.from_tokens(tokens, norm=norm, orth_sentences=tuple(sentences))


# -- standoff XML -------------------------------------------------------

def _tok_index(ref: str) -> int:
    if not ref.startswith("t") or not ref[1:].isdigit():
        raise ParseError(f"bad token reference {ref!r}")
    return int(ref[1:]) - 1


def _xml(path: Path) -> ET.Element:
    try:
        return ET.fromstring(decode(path.read_bytes(), str(path)))
    except ET.ParseError as exc:
        raise ParseError(f"{path.name}: {exc}", *exc.position) from None


def read_standoff(directory, doc_id: str) -> tuple[LayeredText, list[ConstituencyNode]]:
    """Re-import the three standoff files written by ``export_standoff``."""
    directory = Path(directory)
    text = _xml(directory / f"{doc_id}.text.xml")
    tokens = tuple(tok.text or "" for tok in text.iter("tok"))

    marks = _xml(directory / f"{doc_id}.mark.xml")
    layers: dict[str, list[tuple[Span, str]]] = {}
    for layer in marks.iter("layer"):
        layers[layer.get("name")] = [
            (Span(_tok_index(m.get("from")), _tok_index(m.get("to")) + 1), m.get("value"))
            for m in layer.iter("mark")]
    norm = ()
    if "norm" in layers:
        values = [""] * len(tokens)
        for span, value in layers["norm"]:
            values[span.start] = value
        norm = tuple(values)
    doc = LayeredText(
        tokens=tokens, norm=norm,
        source_tokens=tuple(layers.get("source", ())),
        macro_units=tuple((s, MacroKind(v)) for s, v in layers.get("macro", ())),
        orth_sentences=tuple(s for s, _ in layers.get("orth", ())))

    struct = _xml(directory / f"{doc_id}.struct.xml")
    elements = {el.get("id"): el for el in struct.iter("node")}

    def build(node_id: str, function: str) -> ConstituencyNode:
        el = elements.get(node_id)
        if el is None:
            raise ParseError(f"edge to unknown node {node_id!r}")
        children: list = []
        for child in el:
            if child.tag == "edge":
                children.append(build(child.get("target"), child.get("function")))
            elif child.tag == "term":
                children.append(_tok_index(child.get("ref")))
        return ConstituencyNode(el.get("form"), function, tuple(children))

    forest = [build(el.get("id"), el.get("function"))
              for el in struct.iter("node") if el.get("function") is not None]
    return doc, forest
