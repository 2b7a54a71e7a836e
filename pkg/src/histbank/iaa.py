"""Inter-annotator agreement: tree edit distance and Krippendorff's alpha.

Tree edit distance follows Zhang and Shasha on ordered labelled trees.
Inserts and deletes cost one each.  An update costs either one for any label
change or the normalized string distance between the two labels.
The subtree-distance table comes from the compiled kernel; the edit script
is recovered in Python by re-deriving the forest-distance tables along the
optimal path.

Alpha values:

* :func:`nominal_alpha` uses the coincidence-matrix formulation,
  ``alpha = 1 - (n - 1) * sum_{c != k} o_ck / sum_{c != k} n_c * n_k``.
* :func:`distance_alpha` replaces label inequality by tree edit distance::

      alpha = 1 - mean(TED over pairs within an item)
                / mean(TED over all unordered pairs of annotations)

  The denominator pools every unordered pair of annotations, within and
  across items, each counted once.
* :func:`cell_alpha` is nominal alpha over the (token, depth) cells of two
  grids, a missing cell counting as the category ``NULL``.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import kernels
from .core import HistbankError
from .treegrid import ConstituencyNode, GridDocument

NULL = "NULL"


class DegenerateData(HistbankError):
    pass


class TokenMismatch(HistbankError):
    pass


@dataclass(frozen=True)
class Tree:
    """Ordered labelled tree for edit distance."""

    label: str
    children: tuple["Tree", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def __str__(self) -> str:
        if not self.children:
            return self.label
        return f"{self.label}({' '.join(str(c) for c in self.children)})"


def tree_from_node(node: ConstituencyNode, terminals: bool = True) -> Tree:
    """Graph view of a constituent: one node per function:form combination.

    Terminal tokens become leaves labelled with their token index.
    """
    kids = []
    for child in node.children:
        if isinstance(child, ConstituencyNode):
            kids.append(tree_from_node(child, terminals))
        elif terminals:
            kids.append(Tree(f"#{child}"))
    return Tree(f"{node.function_label}:{node.form_label}", tuple(kids))


def tree_from_forest(forest: Sequence[ConstituencyNode], terminals: bool = True) -> Tree:
    if len(forest) == 1:
        return tree_from_node(forest[0], terminals)
    return Tree("ROOT", tuple(tree_from_node(t, terminals) for t in forest))


@dataclass(frozen=True)
class TedCosts:
    insert: float = 1.0
    delete: float = 1.0
    update: float = 1.0
    mode: str = "unit"  # or "string"

    def __post_init__(self):
        if self.mode not in ("unit", "string"):
            raise ValueError(f"unknown update mode {self.mode!r}")

    def relabel(self, a: str, b: str) -> float:
        if a == b:
            return 0.0
        if self.mode == "unit":
            return self.update
        return self.update * kernels.osa_distance(a, b) / max(len(a), len(b))

    def scaled(self, factor: float) -> "TedCosts":
        return TedCosts(self.insert * factor, self.delete * factor,
                        self.update * factor, self.mode)


UNIT_COSTS = TedCosts()


@dataclass(frozen=True)
class EditOp:
    kind: str  # insert | remove | update
    old: str | None
    new: str | None
    cost: float


@dataclass(frozen=True)
class EditScript:
    ops: tuple[EditOp, ...]
    cost: float

    def __len__(self):
        return len(self.ops)

    def counts(self) -> Counter:
        return Counter(op.kind for op in self.ops)


class _Indexed:
    """Postorder labels of a tree with its leftmost-leaf table and keyroots."""

    def __init__(self, tree: Tree):
        labels, leftmost = [], []

        def visit(node: Tree) -> int:
            first = None
            for child in node.children:
                lm = visit(child)
                if first is None:
                    first = lm
            labels.append(node.label)
            leftmost.append(len(labels) - 1 if first is None else first)
            return leftmost[-1]

        visit(tree)
        self.labels = labels
        self.l = leftmost
        seen: dict[int, int] = {}
        for i, lm in enumerate(leftmost):
            seen[lm] = i
        self.keyroots = sorted(seen.values())


def _tables(t1: Tree, t2: Tree, costs: TedCosts):
    a, b = _Indexed(t1), _Indexed(t2)
    dele = np.full(len(a.labels), costs.delete)
    ins = np.full(len(b.labels), costs.insert)
    upd = np.array([[costs.relabel(x, y) for y in b.labels] for x in a.labels],
                   dtype=float).reshape(len(a.labels), len(b.labels))
    td = kernels.zs_treedist(a.l, a.keyroots, b.l, b.keyroots, dele, ins, upd)
    return a, b, dele, ins, upd, td


def _close(x: float, y: float) -> bool:
    return math.isclose(x, y, rel_tol=1e-12, abs_tol=1e-9)


def _backtrace(a, b, dele, ins, upd, td, i, j, ops):
    """Append the operations of an optimal mapping of subtrees ``i``, ``j``."""
    li, lj = a.l[i], b.l[j]
    rows, cols = i - li + 2, j - lj + 2
    fd = [[0.0] * cols for _ in range(rows)]
    for x in range(1, rows):
        fd[x][0] = fd[x - 1][0] + dele[li + x - 1]
    for y in range(1, cols):
        fd[0][y] = fd[0][y - 1] + ins[lj + y - 1]
    for x in range(1, rows):
        p = li + x - 1
        for y in range(1, cols):
            q = lj + y - 1
            best = min(fd[x - 1][y] + dele[p], fd[x][y - 1] + ins[q])
            if a.l[p] == li and b.l[q] == lj:
                best = min(best, fd[x - 1][y - 1] + upd[p][q])
            else:
                best = min(best, fd[a.l[p] - li][b.l[q] - lj] + td[p][q])
            fd[x][y] = best

    out: list[EditOp] = []
    x, y = rows - 1, cols - 1
    while x > 0 or y > 0:
        p, q = li + x - 1, lj + y - 1
        if x > 0 and _close(fd[x][y], fd[x - 1][y] + dele[p]):
            out.append(EditOp("remove", a.labels[p], None, float(dele[p])))
            x -= 1
        elif y > 0 and _close(fd[x][y], fd[x][y - 1] + ins[q]):
            out.append(EditOp("insert", None, b.labels[q], float(ins[q])))
            y -= 1
        elif a.l[p] == li and b.l[q] == lj:
            if a.labels[p] != b.labels[q]:
                out.append(EditOp("update", a.labels[p], b.labels[q], float(upd[p][q])))
            x -= 1
            y -= 1
        else:
            sub: list[EditOp] = []
            _backtrace(a, b, dele, ins, upd, td, p, q, sub)
            out.extend(reversed(sub))
            x, y = a.l[p] - li, b.l[q] - lj
    ops.extend(reversed(out))


def tree_edit_distance(t1: Tree, t2: Tree,
                       costs: TedCosts = UNIT_COSTS) -> tuple[float, EditScript]:
    """Zhang-Shasha distance and an edit script realizing it.

    >>> d, script = tree_edit_distance(Tree("a"), Tree("b"))
    >>> d, [op.kind for op in script.ops]
    (1.0, ['update'])
    """
    a, b, dele, ins, upd, td = _tables(t1, t2, costs)
    dist = float(td[-1, -1])
    ops: list[EditOp] = []
    _backtrace(a, b, dele, ins, upd.tolist(), td.tolist(),
               len(a.labels) - 1, len(b.labels) - 1, ops)
    return dist, EditScript(tuple(ops), math.fsum(op.cost for op in ops))


def ted(t1: Tree, t2: Tree, costs: TedCosts = UNIT_COSTS) -> float:
    """Distance only, without the edit script."""
    return float(_tables(t1, t2, costs)[-1][-1, -1])


# -- alpha --------------------------------------------------------------

def _pairable(items: Iterable[Sequence]) -> list[list]:
    out = []
    for values in items:
        present = [v for v in values if v is not None]
        if len(present) >= 2:
            out.append(present)
    return out


def nominal_alpha(items: Iterable[Sequence[Hashable | None]]) -> float:
    """Krippendorff's alpha for nominal data.

    ``items`` holds one sequence of values per unit; ``None`` marks a missing
    annotation.  Units with fewer than two values are not pairable.

    >>> round(nominal_alpha([("A", "A"), ("A", "B")]), 12)
    0.0
    """
    units = _pairable(items)
    coincidence: Counter = Counter()
    for values in units:
        m = len(values)
        for i, j in itertools.permutations(range(m), 2):
            coincidence[(values[i], values[j])] += 1.0 / (m - 1)
    marginals: Counter = Counter()
    for (c, _k), w in coincidence.items():
        marginals[c] += w
    n = math.fsum(marginals.values())
    if len(marginals) < 2:
        raise DegenerateData("alpha is undefined with fewer than two distinct values")
    observed = math.fsum(w for (c, k), w in coincidence.items() if c != k)
    expected = math.fsum(marginals[c] * marginals[k]
                         for c in marginals for k in marginals if c != k)
    return 1.0 - (n - 1) * observed / expected


def _distance_table(annotations, distance):
    cache = {}

    def d(i, j):
        key = (i, j) if i < j else (j, i)
        if key not in cache:
            cache[key] = distance(annotations[key[0]], annotations[key[1]])
        return cache[key]
    return d


def distance_alpha(items: Sequence[Sequence[Tree | None]],
                   costs: TedCosts = UNIT_COSTS,
                   normalize: str = "none") -> float:
    """Alpha with tree edit distance as the disagreement function.

    ``normalize="nodes"`` divides each pairwise distance by the mean node
    count of the two trees.
    """
    if normalize not in ("none", "nodes"):
        raise ValueError(f"unknown normalization {normalize!r}")
    units = _pairable(items)
    flat, owner = [], []
    for u, trees in enumerate(units):
        for t in trees:
            flat.append(t)
            owner.append(u)
    if len(units) < 1 or len(flat) < 2:
        raise DegenerateData("need annotations to compare")

    def dist(x, y):
        value = ted(x, y, costs)
        if normalize == "nodes":
            value /= (x.size() + y.size()) / 2
        return value

    d = _distance_table(flat, dist)
    within, every = [], []
    for i, j in itertools.combinations(range(len(flat)), 2):
        value = d(i, j)
        every.append(value)
        if owner[i] == owner[j]:
            within.append(value)
    expected = math.fsum(every) / len(every)
    if expected == 0:
        raise DegenerateData("expected distance is zero")
    observed = math.fsum(within) / len(within)
    return 1.0 - observed / expected


def cell_items(*grids: GridDocument) -> list[tuple[str, ...]]:
    """(token, depth) cells of annotator grids as nominal items, NULL-padded."""
    if len(grids) < 2:
        raise DegenerateData("need at least two grids")
    if any(g.tokens != grids[0].tokens for g in grids[1:]):
        raise TokenMismatch("grids cover different token sequences")
    width = max(g.n_depths for g in grids)
    matrices = [g.label_matrix(width) for g in grids]
    items = []
    for rows in zip(*matrices):
        for values in zip(*rows):
            items.append(tuple(NULL if v is None else v for v in values))
    return items


def cell_alpha(*grids: GridDocument) -> float:
    return nominal_alpha(cell_items(*grids))


@dataclass
class EditBreakdown:
    insert: float = 0.0
    remove: float = 0.0
    update: float = 0.0
    total: int = 0
    update_pairs: list[tuple[tuple[str, str], int]] = field(default_factory=list)


def edit_breakdown(scripts: Iterable[EditScript]) -> EditBreakdown:
    counts: Counter = Counter()
    pairs: Counter = Counter()
    for script in scripts:
        for op in script.ops:
            counts[op.kind] += 1
            if op.kind == "update":
                pairs[(op.old, op.new)] += 1
    total = sum(counts.values())
    if not total:
        return EditBreakdown()
    ranked = sorted(pairs.items(), key=lambda kv: (-kv[1], kv[0]))
    return EditBreakdown(counts["insert"] / total, counts["remove"] / total,
                         counts["update"] / total, total, ranked)
