"""Spreadsheet-grid treebank model and structure conversions.

A grid has one row per token and one column per syntactic depth.  Even
depths hold form cells (constituent categories), odd depths hold function
cells (the edge label to the parent).  A function cell at depth ``d`` and
the form cell realizing it at ``d + 1`` cover the same rows.  A row ends at
its terminal depth, always a form cell; the token is a terminal child of
that constituent.

Because a function label occurs at most once among the children of a
constituent, the path of function labels from the root identifies a node.
This is what allows a discontinuous constituent to be spread over several
cells: the parts share parent and function label and are flagged
``discontinuous`` (shown in angle brackets in the TSV rendering).

Conversions:

* :func:`grid_to_tree` / :func:`tree_to_grid` are mutually inverse on valid
  grids and canonical forests (children ordered by leftmost token).
* :func:`tree_to_dependency` percolates lexical heads with an ordered table
  of head-marking function labels and a leftmost fallback.
* :func:`dependency_to_tree` builds one constituent per head token; the head
  itself sits below it under the function ``hd``.
"""
from __future__ import annotations

import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

from .core import (RESERVED_CHARS, HistbankError, LayeredText, Span,
                   ValidationReport, atomic_write, runs)

HEAD_FUNCTION = "hd"
TERMINAL_RELATION = "dep"


class StructureError(HistbankError):
    pass


class DuplicateFunction(StructureError):
    pass


class NoHeadFound(StructureError):
    pass


class CycleDetected(StructureError):
    pass


class MultipleRoots(StructureError):
    pass


class LabelCollisionWarning(UserWarning):
    pass


def check_label(label: str) -> str | None:
    """Why ``label`` cannot be a structural label, or None if it can."""
    if not label:
        return "empty label"
    if label == "_" or label.startswith("\\"):
        return f"label {label!r} is reserved"
    bad = sorted(set(label) & RESERVED_CHARS)
    if bad or any(c.isspace() for c in label):
        return f"label {label!r} contains a reserved character"
    return None


# -- grid ---------------------------------------------------------------

@dataclass(frozen=True, order=True)
class GridCell:
    depth: int
    row_span: Span
    label: str
    discontinuous: bool = False

    @property
    def kind(self) -> str:
        return "form" if self.depth % 2 == 0 else "function"


@dataclass(frozen=True)
class GridDocument:
    tokens: tuple[str, ...]
    cells: tuple[GridCell, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "cells", tuple(sorted(self.cells)))

    @property
    def n_depths(self) -> int:
        return max((c.depth for c in self.cells), default=-1) + 1

    def at_depth(self, depth: int) -> list[GridCell]:
        return [c for c in self.cells if c.depth == depth]

    def label_matrix(self, n_depths: int | None = None) -> list[list[str | None]]:
        """Row-by-depth matrix of cell labels, None where no cell exists."""
        width = self.n_depths if n_depths is None else n_depths
        matrix: list[list[str | None]] = [[None] * width for _ in self.tokens]
        for cell in self.cells:
            for r in cell.row_span:
                matrix[r][cell.depth] = cell.label
        return matrix


def check_grid(grid: GridDocument) -> ValidationReport:
    """Report every violated grid invariant (cell level, not the ID rule)."""
    report = ValidationReport()
    n = len(grid.tokens)
    by_depth: dict[int, list[GridCell]] = {}
    for cell in grid.cells:
        by_depth.setdefault(cell.depth, []).append(cell)
        problem = check_label(cell.label)
        if problem:
            report.error(f"d{cell.depth} {cell.row_span}", problem)
        if cell.depth < 0:
            report.error(f"d{cell.depth} {cell.row_span}", "negative depth")
        if cell.row_span.end > n:
            report.error(f"d{cell.depth} {cell.row_span}", f"exceeds {n} token rows")
    if not report.ok:
        return report

    owner: dict[int, list] = {}
    spans: dict[int, dict[Span, GridCell]] = {}
    for depth, cells in by_depth.items():
        rows = [None] * n
        for cell in cells:
            for r in cell.row_span:
                if rows[r] is not None:
                    report.error(f"d{depth} {rows[r].row_span} {cell.row_span}",
                                 "overlapping cells at one depth")
                rows[r] = cell
        owner[depth] = rows
        spans[depth] = {c.row_span: c for c in cells}
    if not report.ok:
        return report

    for cell in grid.cells:
        d, loc = cell.depth, f"d{cell.depth} {cell.row_span}"
        if d > 0:
            above = {id(owner.get(d - 1, [None] * n)[r]) for r in cell.row_span}
            parent = owner.get(d - 1, [None] * n)[cell.row_span.start]
            if parent is None or len(above) != 1:
                report.error(loc, f"not covered by exactly one cell at depth {d - 1}")
        if cell.kind == "function":
            below = spans.get(d + 1, {}).get(cell.row_span)
            if below is None:
                report.error(loc, "function cell without a form cell of the same rows")
            elif below.discontinuous != cell.discontinuous:
                report.error(loc, "function and form cell disagree on discontinuity")
        elif d > 0 and cell.row_span not in spans.get(d - 1, {}):
            report.error(loc, "form cell without a function cell of the same rows")
        if cell.depth == 0 and cell.discontinuous:
            report.error(loc, "depth-0 units cannot be discontinuous")

    max_depth = grid.n_depths
    for r in range(n):
        filled = [d for d in range(max_depth) if owner.get(d) and owner[d][r] is not None]
        if filled and filled != list(range(len(filled))):
            report.error(f"row {r}", f"column fill has holes (depths {filled})")
        elif filled and (len(filled) - 1) % 2:
            report.error(f"row {r}", "row ends on a function cell")
    return report


# -- constituency -------------------------------------------------------

Child = Union["ConstituencyNode", int]


@dataclass(frozen=True)
class ConstituencyNode:
    form_label: str
    function_label: str
    children: tuple[Child, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise StructureError(f"node {self.form_label} has no children")

    @cached_property
    def yield_(self) -> frozenset[int]:
        out: set[int] = set()
        for child in self.children:
            if isinstance(child, ConstituencyNode):
                out |= child.yield_
            else:
                out.add(child)
        return frozenset(out)

    @property
    def leftmost(self) -> int:
        return min(self.yield_)

    @property
    def node_children(self) -> list["ConstituencyNode"]:
        return [c for c in self.children if isinstance(c, ConstituencyNode)]

    def canonical(self) -> "ConstituencyNode":
        kids = [c.canonical() if isinstance(c, ConstituencyNode) else c
                for c in self.children]
        kids.sort(key=_leftmost)
        return ConstituencyNode(self.form_label, self.function_label, tuple(kids))

    def walk(self):
        """Preorder traversal."""
        yield self
        for child in self.node_children:
            yield from child.walk()

    def n_nodes(self) -> int:
        return sum(1 for _ in self.walk())

    def __str__(self) -> str:
        inner = " ".join(str(c) for c in self.children)
        return f"({self.function_label}:{self.form_label} {inner})"


def _leftmost(child: Child) -> int:
    return child.leftmost if isinstance(child, ConstituencyNode) else child


def check_node(node: ConstituencyNode) -> list[str]:
    problems = []
    for n in node.walk():
        seen: set[int] = set()
        for child in n.children:
            ys = child.yield_ if isinstance(child, ConstituencyNode) else {child}
            if seen & ys:
                problems.append(f"node {n.form_label}: child yields overlap")
            seen |= ys
        labels = [c.function_label for c in n.node_children]
        if len(labels) != len(set(labels)):
            problems.append(f"node {n.form_label}: duplicate sibling functions {sorted(labels)}")
    return problems


def grid_to_tree(grid: GridDocument) -> list[ConstituencyNode]:
    """One tree per depth-0 cell, in row order."""
    report = check_grid(grid)
    if not report.ok:
        loc, msg = report.errors[0]
        raise StructureError(f"{loc}: {msg}")
    n = len(grid.tokens)
    depth_cells: dict[int, list[GridCell]] = {}
    for cell in grid.cells:
        depth_cells.setdefault(cell.depth, []).append(cell)
    form_by_span = {d: {c.row_span: c for c in cs}
                    for d, cs in depth_cells.items() if d % 2 == 0}

    # skeleton nodes: [form, function, depth, child ids, terminals]
    skel: list[list] = []
    node_at: dict[int, list[int | None]] = {}

    rows0 = [None] * n
    for cell in depth_cells.get(0, []):
        skel.append([cell.label, cell.label, 0, [], []])
        for r in cell.row_span:
            rows0[r] = len(skel) - 1
    node_at[0] = rows0
    roots = [rows0[c.row_span.start] for c in depth_cells.get(0, [])]

    for d in range(1, grid.n_depths, 2):
        groups: dict[tuple[int, str], list[GridCell]] = {}
        for cell in depth_cells.get(d, []):
            parent = node_at[d - 1][cell.row_span.start]
            groups.setdefault((parent, cell.label), []).append(cell)
        rows = [None] * n
        for (parent, label), parts in groups.items():
            loc = f"d{d} {parts[0].row_span} {label}"
            flagged = [p.discontinuous for p in parts]
            if len(parts) > 1 and not all(flagged):
                raise DuplicateFunction(
                    f"{loc}: function {label!r} occurs {len(parts)} times under one node")
            if len(parts) == 1 and flagged[0]:
                raise StructureError(f"{loc}: single part flagged discontinuous")
            for a, b in zip(parts, parts[1:]):
                if a.row_span.end == b.row_span.start:
                    raise StructureError(f"{loc}: discontinuous parts are adjacent")
            forms = {form_by_span[d + 1][p.row_span].label for p in parts}
            if len(forms) != 1:
                raise StructureError(f"{loc}: parts disagree on form label {sorted(forms)}")
            skel.append([forms.pop(), label, d + 1, [], []])
            k = len(skel) - 1
            skel[parent][3].append(k)
            for p in parts:
                for r in p.row_span:
                    rows[r] = k
        node_at[d + 1] = rows

    for r in range(n):
        deepest = None
        for d in range(0, grid.n_depths, 2):
            if node_at.get(d) and node_at[d][r] is not None:
                deepest = node_at[d][r]
        if deepest is not None:
            skel[deepest][4].append(r)

    def build(k: int) -> ConstituencyNode:
        form, func, _, kids, terms = skel[k]
        children: list[Child] = [build(c) for c in kids] + list(terms)
        children.sort(key=_leftmost)
        return ConstituencyNode(form, func, tuple(children))

    return [build(k) for k in roots]


def tree_to_grid(forest: Sequence[ConstituencyNode],
                 tokens: Sequence[str]) -> GridDocument:
    """Render a forest as grid cells; inverse of :func:`grid_to_tree`."""
    cells: list[GridCell] = []
    n = len(tokens)
    taken: set[int] = set()

    def emit(node: ConstituencyNode, depth: int) -> None:
        labels = [c.function_label for c in node.node_children]
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        if dupes:
            raise DuplicateFunction(
                f"node {node.form_label}: sibling functions {dupes} are not unique")
        for child in node.node_children:
            parts = runs(child.yield_)
            flag = len(parts) > 1
            for span in parts:
                cells.append(GridCell(depth + 1, span, child.function_label, flag))
                cells.append(GridCell(depth + 2, span, child.form_label, flag))
            emit(child, depth + 2)

    for root in forest:
        problems = check_node(root)
        if problems:
            raise StructureError(problems[0])
        parts = runs(root.yield_)
        if len(parts) != 1:
            raise StructureError(f"root {root.form_label} has a discontinuous yield")
        if taken & root.yield_:
            raise StructureError(f"root {root.form_label} overlaps another root")
        if max(root.yield_) >= n:
            raise StructureError(f"root {root.form_label} exceeds {n} tokens")
        taken |= root.yield_
        cells.append(GridCell(0, parts[0], root.form_label))
        emit(root, 0)
    return GridDocument(tuple(tokens), tuple(cells))


# -- dependency ---------------------------------------------------------

@dataclass(frozen=True)
class DependencyGraph:
    """One sentence: heads are 1-based positions, 0 marks the root.

    ``anchors`` optionally maps positions to document token indices; it is
    not part of equality (the interchange file does not carry it).
    """

    forms: tuple[str, ...]
    heads: tuple[int, ...]
    rels: tuple[str, ...]
    pos: tuple[str, ...]
    norms: tuple[str, ...] = ()
    anchors: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("forms", "heads", "rels", "pos", "norms"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.norms and not any(self.norms):
            object.__setattr__(self, "norms", ())
        if self.anchors is not None:
            object.__setattr__(self, "anchors", tuple(self.anchors))
        n = len(self.forms)
        if not (len(self.heads) == len(self.rels) == len(self.pos) == n):
            raise StructureError("dependency columns differ in length")
        if self.norms and len(self.norms) != n:
            raise StructureError("norm column differs in length")
        if self.anchors is not None and len(self.anchors) != n:
            raise StructureError("anchors differ in length")

    def __len__(self):
        return len(self.forms)

    def doc_indices(self) -> tuple[int, ...]:
        return self.anchors if self.anchors is not None else tuple(range(len(self.forms)))


def check_dependency(graph: DependencyGraph) -> None:
    """Raise unless the heads form a single-rooted tree over the tokens."""
    n = len(graph)
    for k, h in enumerate(graph.heads):
        if not 0 <= h <= n or h == k + 1:
            raise StructureError(f"token {k + 1}: invalid head {h}")
    roots = [k for k, h in enumerate(graph.heads) if h == 0]
    if len(roots) > 1:
        raise MultipleRoots(f"{len(roots)} roots at positions {[r + 1 for r in roots]}")
    for k in range(n):
        seen = set()
        cur = k
        while graph.heads[cur] != 0:
            if cur in seen:
                raise CycleDetected(f"cycle through token {cur + 1}")
            seen.add(cur)
            cur = graph.heads[cur] - 1
    if not roots and n:
        raise CycleDetected("no root")


def is_projective(graph: DependencyGraph) -> bool:
    arcs = [(min(k, h - 1), max(k, h - 1)) for k, h in enumerate(graph.heads) if h]
    for a, b in arcs:
        for c, d in arcs:
            if a < c < b < d:
                return False
    return True


@dataclass(frozen=True)
class HeadRules:
    labels: tuple[str, ...] = (HEAD_FUNCTION, "pred", "head")
    fallback: str | None = "leftmost"

    @classmethod
    def load(cls, path=None, fallback: str | None = "leftmost") -> "HeadRules":
        source = path if path is not None else resources.files("histbank") / "data" / "head_rules.txt"
        text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, Path)) \
            else source.read_text(encoding="utf-8")
        labels = [l.strip() for l in text.splitlines() if l.strip() and not l.startswith("#")]
        return cls(tuple(labels), fallback)

    def head_index(self, node: ConstituencyNode) -> int:
        """Position of the head child among ``node.children``."""
        for label in self.labels:
            for k, child in enumerate(node.children):
                if isinstance(child, ConstituencyNode) and child.function_label == label:
                    return k
        if self.fallback == "leftmost":
            return 0
        raise NoHeadFound(f"no head child in {node}")


DEFAULT_HEAD_RULES = HeadRules()


def tree_to_dependency(tree: ConstituencyNode,
                       head_rules: HeadRules | None = None,
                       tokens: Sequence[str] | Mapping[int, str] | None = None,
                       norms: Sequence[str] | Mapping[int, str] | None = None) -> DependencyGraph:
    """Dependency graph over the yield of one tree via head percolation.

    The part of speech of a token is the form label of the constituent it
    is a terminal of.  ``tokens`` and ``norms`` are indexed by document
    token index.
    """
    rules = head_rules or DEFAULT_HEAD_RULES
    order = sorted(tree.yield_)
    position = {t: k for k, t in enumerate(order)}
    heads = [0] * len(order)
    rels = [""] * len(order)
    pos = [""] * len(order)

    def lexical_head(node: ConstituencyNode) -> int:
        child_heads = []
        for child in node.children:
            if isinstance(child, ConstituencyNode):
                child_heads.append(lexical_head(child))
            else:
                pos[position[child]] = node.form_label
                child_heads.append(child)
        chosen = rules.head_index(node)
        h = child_heads[chosen]
        for k, child in enumerate(node.children):
            if k == chosen:
                continue
            dep = child_heads[k]
            heads[position[dep]] = position[h] + 1
            rels[position[dep]] = (child.function_label if isinstance(child, ConstituencyNode)
                                   else TERMINAL_RELATION)
        return h

    root = lexical_head(tree)
    heads[position[root]] = 0
    rels[position[root]] = tree.function_label

    def column(values):
        if values is None:
            return None
        return [values[t] for t in order]

    forms = column(tokens) or [str(t) for t in order]
    graph = DependencyGraph(tuple(forms), tuple(heads), tuple(rels), tuple(pos),
                            tuple(column(norms) or ()), anchors=tuple(order))
    return graph


def dependency_to_tree(graph: DependencyGraph) -> ConstituencyNode:
    """Constituent tree with one node per head token.

    A token without dependents becomes a node over itself labelled with its
    part of speech.  A token with dependents becomes a phrase node (its part
    of speech plus ``P``) holding the token under ``hd`` and one subtree per
    dependent.  Co-dependents sharing a relation are told apart by an
    ordinal suffix (``obj``, ``obj#2``) and a :class:`LabelCollisionWarning`.
    """
    check_dependency(graph)
    n = len(graph)
    anchors = graph.doc_indices()
    dependents: list[list[int]] = [[] for _ in range(n)]
    root = None
    for k, h in enumerate(graph.heads):
        if h == 0:
            root = k
        else:
            dependents[h - 1].append(k)

    def build(k: int, function: str) -> ConstituencyNode:
        leaf = ConstituencyNode(graph.pos[k], HEAD_FUNCTION if dependents[k] else function,
                                (anchors[k],))
        if not dependents[k]:
            return leaf
        used = {HEAD_FUNCTION: 1}
        children: list[Child] = [leaf]
        for d in dependents[k]:
            rel = graph.rels[d]
            if rel in used:
                used[rel] += 1
                warnings.warn(f"token {k + 1}: relation {rel!r} repeated among dependents",
                              LabelCollisionWarning, stacklevel=3)
                rel = f"{rel}#{used[rel]}"
            else:
                used[rel] = 1
            children.append(build(d, rel))
        children.sort(key=_leftmost)
        return ConstituencyNode(graph.pos[k] + "P", function, tuple(children))

    if root is None:
        raise StructureError("empty dependency graph")
    return build(root, graph.rels[root])


# -- standoff export ----------------------------------------------------

def node_ids(forest: Sequence[ConstituencyNode]) -> list[tuple[str, ConstituencyNode]]:
    """Deterministic (id, node) pairs in preorder.

    A root is named by its function label and 1-based position in the
    forest; a descendant appends ``/`` and its function label.
    """
    out = []

    def visit(node, path):
        out.append((path, node))
        for child in node.node_children:
            visit(child, f"{path}/{child.function_label}")

    for i, root in enumerate(forest):
        visit(root, f"{root.function_label}{i + 1}")
    return out


def _tok(i: int) -> str:
    return f"t{i + 1}"


def _write_xml(root: ET.Element, path: Path) -> None:
    ET.indent(root)
    data = ET.tostring(root, encoding="unicode", xml_declaration=False)
    payload = ('<?xml version="1.0" encoding="UTF-8"?>\n' + data + "\n").encode("utf-8")
    atomic_write(path, payload)


def _mark(layer: ET.Element, span: Span, value: str) -> None:
    ET.SubElement(layer, "mark", {"from": _tok(span.start), "to": _tok(span.end - 1),
                                  "value": value})


def export_standoff(doc: LayeredText, forest: Sequence[ConstituencyNode],
                    directory, doc_id: str) -> list[Path]:
    """Write ``<id>.text.xml``, ``<id>.mark.xml`` and ``<id>.struct.xml``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    text = ET.Element("text", {"doc": doc_id})
    for i, tok in enumerate(doc.tokens):
        ET.SubElement(text, "tok", {"id": _tok(i)}).text = tok

    marks = ET.Element("markables", {"doc": doc_id})
    if doc.norm:
        layer = ET.SubElement(marks, "layer", {"name": "norm"})
        i = 0
        while i < len(doc.norm):
            j = i + 1
            while j < len(doc.norm) and doc.norm[j] == "":
                j += 1
            _mark(layer, Span(i, j), doc.norm[i])
            i = j
    if doc.source_tokens:
        layer = ET.SubElement(marks, "layer", {"name": "source"})
        for span, value in doc.source_tokens:
            _mark(layer, span, value)
    if doc.macro_units:
        layer = ET.SubElement(marks, "layer", {"name": "macro"})
        for span, kind in doc.macro_units:
            _mark(layer, span, kind.value)
    if doc.orth_sentences:
        layer = ET.SubElement(marks, "layer", {"name": "orth"})
        for span in doc.orth_sentences:
            _mark(layer, span, "s")

    struct = ET.Element("structure", {"doc": doc_id})
    roots = {id(r) for r in forest}
    for node_id, node in node_ids(forest):
        attrs = {"id": node_id, "form": node.form_label}
        if id(node) in roots:
            attrs["function"] = node.function_label
        el = ET.SubElement(struct, "node", attrs)
        for span in runs(node.yield_):
            ET.SubElement(el, "range", {"from": _tok(span.start), "to": _tok(span.end - 1)})
        for child in node.children:
            if isinstance(child, ConstituencyNode):
                ET.SubElement(el, "edge", {"function": child.function_label,
                                           "target": f"{node_id}/{child.function_label}"})
            else:
                ET.SubElement(el, "term", {"ref": _tok(child)})

    paths = []
    for suffix, element in (("text", text), ("mark", marks), ("struct", struct)):
        path = directory / f"{doc_id}.{suffix}.xml"
        _write_xml(element, path)
        paths.append(path)
    return paths
