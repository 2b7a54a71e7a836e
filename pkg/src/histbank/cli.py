"""Command-line front end: one subcommand per automatic pipeline step.

Reports go to standard output as ``key=value`` lines (or TSV tables),
diagnostics to standard error.  Exit status is 0 on success, 1 for data
errors and 2 for usage errors.  Files given with ``-o`` are written to a
temporary name and renamed, so an interrupted run leaves no partial output.
"""
from __future__ import annotations

import argparse
import os
import random
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__, colscale, iaa, io, normalize, segment, tagmap, tokenize, treegrid
from .core import HistbankError, LayeredText, MacroKind, Span, atomic_write, validate

LEXICON_ENV = "HISTBANK_LEXICON_DIR"


class UsageError(Exception):
    pass


# -- helpers ------------------------------------------------------------

def _emit(out, **pairs) -> None:
    for key, value in pairs.items():
        if isinstance(value, float):
            value = repr(value)
        out.write(f"{key}={value}\n")


def _write(path: str | None, data: bytes, out) -> None:
    if path is None or path == "-":
        out.write(data.decode("utf-8"))
    else:
        atomic_write(path, data)


def _read_bytes(path: str) -> bytes:
    return sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()


def _load_grid(path: str):
    return io.read_grid(_read_bytes(path))


def _forest(grid) -> list[treegrid.ConstituencyNode]:
    return treegrid.grid_to_tree(grid)


def _lexicon_file(args, name: str):
    directory = args.lexicon_dir or os.environ.get(LEXICON_ENV)
    if directory:
        path = Path(directory) / name
        if path.exists():
            return path
    return None


def _split_resources(args):
    rules = tokenize.SplitRuleSet.load(_lexicon_file(args, "contractions.tsv"),
                                       _lexicon_file(args, "clitics.tsv"))
    lexicons = tokenize.Lexicons.load(_lexicon_file(args, "prepositions.txt"),
                                      _lexicon_file(args, "particle_verbs.tsv"),
                                      _lexicon_file(args, "particles.txt"))
    return rules, lexicons


def _parallel_map(func: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def _paths(args) -> list[str]:
    paths = list(getattr(args, "files", []) or [])
    manifest = getattr(args, "manifest", None)
    if manifest:
        base = Path(manifest).parent
        for line in Path(manifest).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                paths.append(str(base / line))
    return paths


def _layer(doc: LayeredText, name: str) -> tuple[str, ...]:
    if name == "norm":
        if not doc.norm:
            raise HistbankError("document has no norm layer")
        return doc.norm
    if name == "token":
        return doc.tokens
    if name not in doc.layers:
        raise HistbankError(f"document has no layer {name!r}")
    return doc.layers[name]


# -- subcommands --------------------------------------------------------

def cmd_tokenize(args, out) -> int:
    data = _read_bytes(args.input)
    doc = io.read_vertical(data) if args.vertical else io.ingest_plaintext(data)
    rules, lexicons = _split_resources(args)
    decisions = [tokenize.split_token(text, rules, lexicons) for _, text in doc.source_tokens]
    result = tokenize.tokenize_document(doc, rules, lexicons)
    split_layer = []
    for d in decisions:
        split_layer.append(d.rule or "none")
        split_layer.extend([""] * (len(d.parts) - 1))
    result = result.replace(layers={**result.layers, "split": tuple(split_layer)})
    _write(args.output, io.write_grid(result), out)
    if args.output:
        _emit(out, source_tokens=len(doc.tokens), tokens=len(result.tokens),
              splits=sum(d.is_split for d in decisions))
    return 0


def cmd_harvest(args, out) -> int:
    tokens = []
    for path in args.files:
        tokens.extend(io.ingest_plaintext(_read_bytes(path)).tokens)
    particles = None
    if (p := _lexicon_file(args, "particles.txt")) is not None:
        particles = tokenize.Lexicons.load(particles=p).particles
    lexicon = tokenize.harvest_particle_verbs(tokens, particles)
    _write(args.output, lexicon.dump().encode("utf-8"), out)
    if args.output:
        _emit(out, types=len(lexicon), tokens=len(tokens))
    return 0


def cmd_normalize(args, out) -> int:
    doc, grid = _load_grid(args.grid)
    table = normalize.TransliterationTable.load(_lexicon_file(args, "translit.tsv"))
    lexicon = normalize.NormalizationLexicon.load(args.lexicon)
    candidates, found = [], 0
    for tok in doc.tokens:
        hits = normalize.normalize_token(tok, table, lexicon, args.max_distance)
        if hits:
            found += 1
            candidates.append(hits[0][0])
        else:
            candidates.append(normalize.transliterate(tok, table))
    doc = doc.replace(layers={**doc.layers, args.layer: tuple(candidates)})
    _write(args.output, io.write_grid(doc, grid), out)
    if args.output:
        _emit(out, tokens=len(doc.tokens), with_candidate=found)
    return 0


def _norm_triples(doc: LayeredText, system_layer: str):
    """Per-row value triples for every row that starts a norm cell."""
    gold = _layer(doc, "norm")
    system = _layer(doc, system_layer)
    rows = [i for i, g in enumerate(gold) if g != ""]
    return ([doc.tokens[i] for i in rows], [system[i] for i in rows], [gold[i] for i in rows])


def cmd_eval_norm(args, out) -> int:
    doc, _ = _load_grid(args.grid)
    res = normalize.evaluate_normalization(*_norm_triples(doc, args.system_layer))
    _emit(out, tp=res.tp, fp=res.fp, fn=res.fn, tn=res.tn,
          precision=res.precision, recall=res.recall, f_score=res.f_score)
    for (orig, gold), n in res.pairs_by_gold()[:args.top]:
        out.write(f"missed\t{orig}\t{gold}\t{n}\n")
    return 0


def cmd_dist_profile(args, out) -> int:
    doc, _ = _load_grid(args.grid)
    prof = normalize.distance_profile(*_norm_triples(doc, args.system_layer))
    _emit(out, relevant=prof.relevant)
    for name, stats in (("system", prof.system), ("gold", prof.gold)):
        _emit(out, **{f"{name}_mean": "NA" if stats.mean is None else stats.mean,
                      f"{name}_std": "NA" if stats.std is None else stats.std})
        for d, n in sorted(stats.histogram.items()):
            out.write(f"{name}_hist\t{d}\t{n}\n")
    return 0


def cmd_segment(args, out) -> int:
    doc, grid = _load_grid(args.grid)
    terminators = args.terminators.split(",") if args.terminators else segment.DEFAULT_TERMINATORS
    spans = segment.segment_orthographic(doc.tokens, terminators)
    doc = doc.replace(orth_sentences=tuple(spans))
    _write(args.output, io.write_grid(doc, grid), out)
    if args.output:
        _emit(out, sentences=len(spans))
    return 0


def cmd_patterns(args, out) -> int:
    doc, _ = _load_grid(args.grid)
    counts = segment.extract_patterns(doc, strict=not args.lenient)
    table = counts.combination if args.combination else counts.positional
    for pattern, n in sorted(table.items(), key=lambda kv: (-kv[1], kv[0])):
        out.write(f"{pattern}\t{n}\n")
    for span, msg in counts.issues:
        print(f"issue: {msg}", file=sys.stderr)
    _emit(out, patterns=len(table), issues=len(counts.issues))
    return 0


def cmd_seg_agree(args, out) -> int:
    doc_a, _ = _load_grid(args.a)
    doc_b, _ = _load_grid(args.b)
    if doc_a.tokens != doc_b.tokens:
        raise HistbankError("documents have different tokens")

    def spans(doc):
        if args.layer == "orth":
            return list(doc.orth_sentences)
        return [s for s, _ in doc.macro_units]

    res = segment.segmentation_agreement(spans(doc_a), spans(doc_b), len(doc_a.tokens))
    _emit(out, token_assignment_agreement=res.token_assignment_agreement,
          identical_unit_proportion=res.identical_unit_proportion)
    return 0


def cmd_grid2tree(args, out) -> int:
    doc, grid = _load_grid(args.grid)
    forest = _forest(grid)
    if args.standoff:
        doc_id = args.id or doc.meta.text_id or Path(args.grid).stem
        for path in treegrid.export_standoff(doc, forest, args.standoff, doc_id):
            print(f"wrote {path}", file=sys.stderr)
    if args.show:
        for tree in forest:
            out.write(f"{tree}\n")
    _emit(out, errors=0, roots=len(forest), nodes=sum(t.n_nodes() for t in forest))
    return 0


def cmd_tree2dep(args, out) -> int:
    doc, grid = _load_grid(args.grid)
    rules = treegrid.HeadRules.load(args.head_rules) if args.head_rules else None
    norm = doc.norm or None
    graphs = [treegrid.tree_to_dependency(tree, rules, doc.tokens, norm)
              for tree in _forest(grid)]
    _write(args.output, io.write_dependency(graphs), out)
    if args.output:
        _emit(out, sentences=len(graphs),
              non_projective=sum(not treegrid.is_projective(g) for g in graphs))
    return 0


def cmd_dep2tree(args, out) -> int:
    graphs = io.read_dependency(_read_bytes(args.dep))
    forest, tokens, norm, macro = [], [], [], []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", treegrid.LabelCollisionWarning)
        for graph in graphs:
            offset = len(tokens)
            anchored = treegrid.DependencyGraph(graph.forms, graph.heads, graph.rels,
                                                graph.pos, graph.norms,
                                                anchors=range(offset, offset + len(graph)))
            tree = treegrid.dependency_to_tree(anchored)
            if tree.node_children:
                # a grid root has one label; the phrase label is redundant with
                # the head leaf, so the root relation takes its place
                tree = treegrid.ConstituencyNode(tree.function_label, tree.function_label,
                                                 tree.children)
            forest.append(tree)
            tokens.extend(graph.forms)
            norm.extend(graph.norms or graph.forms)
            if tree.function_label in MacroKind._value2member_map_:
                macro.append((Span(offset, len(tokens)), MacroKind(tree.function_label)))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    doc = LayeredText.from_tokens(tokens, norm=tuple(norm) if any(norm) else (),
                                  macro_units=tuple(macro))
    grid = treegrid.tree_to_grid(forest, tokens)
    _write(args.output, io.write_grid(doc, grid), out)
    if args.output:
        _emit(out, sentences=len(graphs), tokens=len(tokens))
    return 0


def _costs(args) -> iaa.TedCosts:
    return iaa.TedCosts(mode=args.update)


def cmd_ted(args, out) -> int:
    _, grid_a = _load_grid(args.a)
    _, grid_b = _load_grid(args.b)
    t1 = iaa.tree_from_forest(_forest(grid_a))
    t2 = iaa.tree_from_forest(_forest(grid_b))
    dist, script = iaa.tree_edit_distance(t1, t2, _costs(args))
    counts = script.counts()
    value = int(dist) if float(dist).is_integer() else dist
    _emit(out, distance=value, insert=counts["insert"], remove=counts["remove"],
          update=counts["update"])
    if args.script:
        for op in script.ops:
            out.write(f"{op.kind}\t{op.old or '_'}\t{op.new or '_'}\t{op.cost!r}\n")
    return 0


def cmd_alpha(args, out) -> int:
    paths = _paths(args)
    if len(paths) < 2:
        raise UsageError("alpha needs at least two annotation files")
    loaded = [_load_grid(p) for p in paths]
    if args.mode == "cell":
        value = iaa.cell_alpha(*(grid for _, grid in loaded))
        n_items = len(iaa.cell_items(*(grid for _, grid in loaded)))
    elif args.mode == "nominal":
        columns = []
        for doc, _ in loaded:
            if args.layer == "macro":
                columns.append([None if k is None else k.value for k in doc.macro_kind_at()])
            else:
                columns.append([v or None for v in _layer(doc, args.layer)])
        if len({len(c) for c in columns}) != 1:
            raise iaa.TokenMismatch("annotations differ in length")
        items = list(zip(*columns))
        value = iaa.nominal_alpha(items)
        n_items = len(items)
    else:
        forests = [_forest(grid) for _, grid in loaded]
        if len({len(f) for f in forests}) != 1:
            raise iaa.TokenMismatch("annotators disagree on the number of root units")
        items = [tuple(iaa.tree_from_node(t) for t in unit) for unit in zip(*forests)]
        value = iaa.distance_alpha(items, _costs(args), args.normalize)
        n_items = len(items)
    _emit(out, mode=args.mode, items=n_items, annotators=len(paths), alpha=value)
    return 0


def _tag_pairs(paths, args, require_target=True):
    pairs = []
    for path in paths:
        doc, grid = _load_grid(path)
        feats = tagmap.document_features(doc, _forest(grid), pos_layer=args.pos_layer,
                                         donor_layer=args.donor_layer)
        target = doc.layers.get(args.target)
        if target is None and require_target:
            raise HistbankError(f"{path}: no layer {args.target!r}")
        for i, f in enumerate(feats):
            if target is None:
                pairs.append((f, None))
            elif target[i]:
                pairs.append((f, target[i]))
    return pairs


def cmd_tagmap_train(args, out) -> int:
    pairs = _tag_pairs(args.files, args)
    model = tagmap.train(pairs)
    _write(args.output, model.dumps().encode("utf-8"), out)
    if args.output:
        _emit(out, tokens=len(pairs), training_accuracy=tagmap.accuracy(model, pairs))
    return 0


def cmd_tagmap_apply(args, out) -> int:
    model = tagmap.BackoffModel.loads(Path(args.model).read_text(encoding="utf-8"))
    doc, grid = _load_grid(args.grid)
    feats = tagmap.document_features(doc, _forest(grid), pos_layer=args.pos_layer,
                                     donor_layer=args.donor_layer)
    predictions = [tagmap.apply(model, f) for f in feats]
    doc = doc.replace(layers={**doc.layers, args.layer: tuple(t for t, _ in predictions)})
    _write(args.output, io.write_grid(doc, grid), out)
    if args.output:
        used = {}
        for _, source in predictions:
            used[str(source)] = used.get(str(source), 0) + 1
        _emit(out, tokens=len(predictions),
              **{f"template_{k}": v for k, v in sorted(used.items())})
    return 0


def cmd_tagmap_curve(args, out) -> int:
    training = _tag_pairs(args.train, args)
    held_out = _tag_pairs(args.held_out, args)
    sizes = [int(s) for s in args.sizes.split(",")]
    for size, acc in tagmap.learning_curve(training, sizes, held_out):
        out.write(f"{size}\t{acc!r}\n")
    return 0


def _features_of(path: str) -> tuple[str, str, dict[str, float]]:
    doc, grid = io.read_grid(Path(path).read_bytes())
    forest = treegrid.grid_to_tree(grid) if grid.cells else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        feats = colscale.extract_col_features(doc, forest)
    return doc.meta.text_id or Path(path).stem, doc.meta.col_label, feats


def _read_features(path: str):
    """Rows of a feature table: (text, label, {feature: value})."""
    lines = [l for l in io.decode(_read_bytes(path), path).splitlines() if l.strip()]
    if not lines:
        raise HistbankError(f"{path}: empty feature table")
    header = lines[0].split("\t")
    if header[:2] != ["text", "label"]:
        raise HistbankError(f"{path}: header must start with text and label")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise io.ParseError(f"expected {len(header)} fields", lineno)
        try:
            values = {name: float(v) for name, v in zip(header[2:], fields[2:])}
        except ValueError as exc:
            raise io.ParseError(str(exc), lineno) from None
        rows.append((fields[0], fields[1], values))
    return header[2:], rows


def cmd_col_features(args, out) -> int:
    results = _parallel_map(_features_of, _paths(args), args.jobs)
    lines = ["\t".join(("text", "label") + colscale.FEATURES)]
    for text, label, feats in results:
        lines.append("\t".join([text, label] + [repr(feats[f]) for f in colscale.FEATURES]))
    _write(args.output, ("\n".join(lines) + "\n").encode("utf-8"), out)
    return 0


def cmd_col_select(args, out) -> int:
    names, rows = _read_features(args.features)
    labelled = [r for r in rows if r[1] in ("N", "D")]
    matrix = [[r[2][n] for n in names] for r in labelled]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        chosen = colscale.select_features(matrix, names, [r[1] for r in labelled], args.k)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(out, texts=len(labelled), selected=",".join(chosen))
    return 0


def cmd_col_fit(args, out) -> int:
    names, rows = _read_features(args.features)
    chosen = args.select.split(",") if args.select else names
    missing = [n for n in chosen if n not in names]
    if missing:
        raise colscale.MissingFeature(",".join(missing))
    model = colscale.fit_scale([[r[2][n] for n in chosen] for r in rows], chosen)
    _write(args.output, model.dumps().encode("utf-8"), out)
    if args.output:
        _emit(out, texts=len(rows), eigenvalue=model.eigenvalue,
              explained=model.eigenvalue / len(chosen))
    return 0


def _load_model(path: str) -> colscale.ColModel:
    return colscale.ColModel.loads(Path(path).read_text(encoding="utf-8"))


def cmd_col_score(args, out) -> int:
    model = _load_model(args.model)
    _, rows = _read_features(args.features)
    out.write("text\tlabel\tscore\n")
    for text, label, values in rows:
        out.write(f"{text}\t{label}\t{colscale.score(model, values)!r}\n")
    return 0


def cmd_col_segments(args, out) -> int:
    model = _load_model(args.model)
    doc, grid = _load_grid(args.grid)
    forest = _forest(grid) if grid.cells else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = colscale.segment_scores(doc, args.window, args.stride, model, forest)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    for k, (span, value) in enumerate(zip(report.segments, report.scores)):
        out.write(f"segment={k}\tstart={span.start}\tend={span.end}\tscore={value!r}\n")
    _emit(out, segments=len(report.segments), median=report.median, iqr=report.iqr)
    return 0


def cmd_pearson(args, out) -> int:
    lines = [l for l in io.decode(_read_bytes(args.table), args.table).splitlines() if l.strip()]
    header = lines[0].split("\t")
    try:
        ix, iy = header.index(args.x), header.index(args.y)
    except ValueError:
        raise UsageError(f"columns {args.x!r} and {args.y!r} must both be in the header") from None
    xs, ys = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        try:
            xs.append(float(fields[ix]))
            ys.append(float(fields[iy]))
        except (ValueError, IndexError):
            raise io.ParseError("non-numeric or missing value", lineno) from None
    _emit(out, n=len(xs), r=colscale.pearson(xs, ys))
    return 0


def _validate_one(path: str) -> tuple[str, list[str], list[str]]:
    data = Path(path).read_bytes()
    errors, warns = [], []
    try:
        if path.endswith((".dep", ".conll", ".conllu")):
            io.read_dependency(data)
        else:
            doc, grid = io.read_grid(data, validate_doc=False)
            report = validate(doc)
            report.extend(treegrid.check_grid(grid))
            if report.ok and grid.cells:
                treegrid.grid_to_tree(grid)
            errors += [f"{loc}: {msg}" for loc, msg in report.errors]
            warns += [f"{loc}: {msg}" for loc, msg in report.warnings]
    except (HistbankError, ValueError) as exc:
        errors.append(str(exc))
    return path, errors, warns


def cmd_validate(args, out) -> int:
    results = _parallel_map(_validate_one, args.files, args.jobs)
    n_err = n_warn = 0
    for path, errors, warns in results:
        for e in errors:
            print(f"{path}: error: {e}", file=sys.stderr)
        for w in warns:
            print(f"{path}: warning: {w}", file=sys.stderr)
        n_err += len(errors)
        n_warn += len(warns)
    _emit(out, files=len(results), errors=n_err, warnings=n_warn)
    return 1 if n_err else 0


# -- parser -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    def global_options(p, defaults: bool):
        keep = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        p.add_argument("--seed", type=int, default=keep(0),
                       help="seed for any randomized step (default 0)")
        p.add_argument("--jobs", type=int, default=keep(1),
                       help="worker processes for per-document work (default 1)")
        p.add_argument("--lexicon-dir", default=keep(None),
                       help=f"directory overriding shipped lexicons (default ${LEXICON_ENV})")

    parser = argparse.ArgumentParser(prog="histbank", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    global_options(parser, True)
    # the same flags are accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    global_options(common, False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, parents=[common])
        p.set_defaults(func=func)
        return p

    def output(p):
        p.add_argument("-o", "--output", help="output file (default stdout)")

    def tag_options(p):
        p.add_argument("--target", default="stts", help="layer holding the target tags")
        p.add_argument("--pos-layer", default="pos", help="layer holding native tags")
        p.add_argument("--donor-layer", default="donor", help="layer holding donor tags")

    p = add("tokenize", cmd_tokenize, "split source tokens; write a grid with a split layer")
    p.add_argument("input")
    p.add_argument("--vertical", action="store_true", help="input is one token per line")
    output(p)

    p = add("harvest", cmd_harvest, "collect particle verbs from zu-infinitives")
    p.add_argument("files", nargs="+")
    output(p)

    p = add("normalize", cmd_normalize, "add a normalization candidate layer to a grid")
    p.add_argument("grid")
    p.add_argument("--lexicon", required=True, help="TSV of modern form and frequency")
    p.add_argument("--max-distance", type=int, default=2)
    p.add_argument("--layer", default="candidate")
    output(p)

    for name, func, text in (("eval-norm", cmd_eval_norm, "score a candidate layer against norm"),
                             ("dist-profile", cmd_dist_profile,
                              "edit-distance profile of relevant tokens")):
        p = add(name, func, text)
        p.add_argument("grid")
        p.add_argument("--system-layer", default="candidate")
        if name == "eval-norm":
            p.add_argument("--top", type=int, default=20, help="missed pairs to list")

    p = add("segment", cmd_segment, "orthographic sentences from punctuation")
    p.add_argument("grid")
    p.add_argument("--terminators", help="comma-separated terminator tokens")
    output(p)

    p = add("patterns", cmd_patterns, "macro-unit patterns per orthographic sentence")
    p.add_argument("grid")
    p.add_argument("--combination", action="store_true", help="count unordered combinations")
    p.add_argument("--lenient", action="store_true", help="report crossing units, do not fail")

    p = add("seg-agree", cmd_seg_agree, "agreement of two segmentations")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--layer", choices=("orth", "macro"), default="macro")

    p = add("grid2tree", cmd_grid2tree, "validate a grid and convert it to trees")
    p.add_argument("grid")
    p.add_argument("--standoff", metavar="DIR", help="export standoff XML into DIR")
    p.add_argument("--id", help="document id for standoff files")
    p.add_argument("--show", action="store_true", help="print the trees")

    p = add("tree2dep", cmd_tree2dep, "convert grid trees to dependency TSV")
    p.add_argument("grid")
    p.add_argument("--head-rules", help="file of head-marking function labels")
    output(p)

    p = add("dep2tree", cmd_dep2tree, "convert dependency TSV to a grid")
    p.add_argument("dep")
    output(p)

    p = add("ted", cmd_ted, "tree edit distance between two grids")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--update", choices=("unit", "string"), default="unit")
    p.add_argument("--script", action="store_true", help="list the edit operations")

    p = add("alpha", cmd_alpha, "Krippendorff's alpha over annotator grids")
    p.add_argument("files", nargs="*")
    p.add_argument("--manifest", help="file listing one grid path per line")
    p.add_argument("--mode", choices=("nominal", "distance", "cell"), default="cell")
    p.add_argument("--layer", default="macro",
                   help="nominal mode: token layer to compare; macro and norm are built in")
    p.add_argument("--update", choices=("unit", "string"), default="unit")
    p.add_argument("--normalize", choices=("none", "nodes"), default="none")

    p = add("tagmap-train", cmd_tagmap_train, "train a tag mapping model")
    p.add_argument("files", nargs="+")
    tag_options(p)
    output(p)

    p = add("tagmap-apply", cmd_tagmap_apply, "add predicted tags to a grid")
    p.add_argument("model")
    p.add_argument("grid")
    p.add_argument("--layer", default="tag")
    tag_options(p)
    output(p)

    p = add("tagmap-curve", cmd_tagmap_curve, "held-out accuracy by training size")
    p.add_argument("--train", nargs="+", required=True)
    p.add_argument("--held-out", nargs="+", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated token counts")
    tag_options(p)

    p = add("col-features", cmd_col_features, "feature table of grid documents")
    p.add_argument("files", nargs="*")
    p.add_argument("--manifest")
    output(p)

    p = add("col-select", cmd_col_select, "rank features against N/D labels")
    p.add_argument("features")
    p.add_argument("-k", type=int, default=5)

    p = add("col-fit", cmd_col_fit, "fit the one-dimensional scale")
    p.add_argument("features")
    p.add_argument("--select", help="comma-separated features (default all)")
    output(p)

    p = add("col-score", cmd_col_score, "score texts of a feature table")
    p.add_argument("model")
    p.add_argument("features")

    p = add("col-segments", cmd_col_segments, "score overlapping windows of one text")
    p.add_argument("model")
    p.add_argument("grid")
    p.add_argument("--window", type=int, default=12000)
    p.add_argument("--stride", type=int, default=6000)

    p = add("pearson", cmd_pearson, "correlation of two columns of a TSV table")
    p.add_argument("table")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)

    p = add("validate", cmd_validate, "check grid or dependency files")
    p.add_argument("files", nargs="+")
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    random.seed(args.seed)
    np.random.seed(args.seed)
    if args.jobs < 1:
        print("histbank: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"histbank {args.command}: {exc}", file=sys.stderr)
        return 2
    except (HistbankError, ValueError, OSError) as exc:
        print(f"histbank {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
