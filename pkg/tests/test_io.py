from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from histbank import io
from histbank.core import DocMeta, LayeredText, MacroKind, Span
from histbank.treegrid import DependencyGraph, grid_to_tree, tree_to_grid

from generators import random_dependency, random_document, random_forest

FIXTURES = ["e2e.grid", "fig2.grid", "pred_brackets.grid"]


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_bytes_round_trip(fixtures, name):
    data = (fixtures / name).read_bytes()
    doc, grid = io.read_grid(data)
    assert io.write_grid(doc, grid) == data


def test_fig2_fixture(fixtures):
    doc, grid = io.read_grid((fixtures / "fig2.grid").read_bytes())
    assert doc.tokens == ("Von", "m", "Freunde")
    assert doc.norm == ("Vom", "", "Freunden")
    assert doc.source_tokens == ((Span(0, 2), "Vom"), (Span(2, 3), "Freunde"))
    assert grid.cells == ()


def test_e2e_fixture(fixtures):
    doc, grid = io.read_grid((fixtures / "e2e.grid").read_bytes())
    assert doc.meta == DocMeta("e2e", 18, "everyday", "N")
    assert doc.macro_units == ((Span(0, 4), MacroKind.S), (Span(5, 8), MacroKind.S))
    assert doc.layers["pos"][2] == "VVFIN"
    assert [t.form_label for t in grid_to_tree(grid)] == ["s", "s"]


def test_lenient_reader(fixtures):
    data = (fixtures / "e2e.grid").read_bytes()
    messy = b"\xef\xbb\xbf" + data.replace(b"\n", b"  \r\n").replace(b"idx", b"\r\nidx", 1) + b"\n\n"
    assert io.read_grid(messy) == io.read_grid(data)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_grid_round_trip(seed):
    rng = random.Random(seed)
    forest, tokens = random_forest(rng)
    doc = random_document(rng, len(tokens))
    doc = doc.replace(tokens=tokens, source_tokens=tuple((Span(i, i + 1), t) for i, t in enumerate(tokens)))
    grid = tree_to_grid(forest, tokens)
    data = io.write_grid(doc, grid)
    doc2, grid2 = io.read_grid(data)
    assert doc2 == doc and grid2 == grid
    assert io.write_grid(doc2, grid2) == data


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_document_round_trip(seed):
    doc = random_document(random.Random(seed))
    doc2, grid = io.read_grid(io.write_grid(doc))
    assert doc2 == doc
    assert grid.cells == ()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_dependency_round_trip(seed, count):
    rng = random.Random(seed)
    graphs = [random_dependency(rng) for _ in range(count)]
    data = io.write_dependency(graphs)
    assert io.read_dependency(data) == graphs
    assert io.write_dependency(io.read_dependency(data)) == data


def test_dependency_comments_and_blank_lines():
    data = b"# sent 1\n1\ter\t_\tPPER\t2\tsubj\n2\tkam\t_\tVVFIN\t0\ts\n\n\n1\tja\t_\tITJ\t0\tni\n"
    graphs = io.read_dependency(data)
    assert [g.forms for g in graphs] == [("er", "kam"), ("ja",)]
    assert graphs[0].heads == (2, 0)


@pytest.mark.parametrize("data,line,fragment", [
    (b"1\ta\t_\tX\t5\tr\n", 1, "out of range"),
    (b"1\ta\t_\tX\t0\tr\n3\tb\t_\tX\t1\tr\n", 2, "out of sequence"),
    (b"1\ta\t_\tX\tzero\tr\n", 1, "not an integer"),
    (b"1\ta\t_\tX\t0\n", 1, "expected 6 fields"),
])
def test_dependency_errors(data, line, fragment):
    with pytest.raises(io.ParseError, match=fragment) as info:
        io.read_dependency(data)
    assert info.value.line == line


@pytest.mark.parametrize("reader", [io.read_grid, io.read_dependency, io.ingest_plaintext,
                                    io.read_vertical])
def test_non_utf8_rejected(reader):
    with pytest.raises(io.EncodingError, match="not valid UTF-8") as info:
        reader("Straße\nabc".encode("latin-1"))
    assert info.value.line == 1 and info.value.column == 5


def test_grid_errors_carry_position(fixtures):
    data = (fixtures / "e2e.grid").read_text(encoding="utf-8")
    broken = data.replace("3\tgings", "3\tgings\textra", 1)
    with pytest.raises(io.ParseError) as info:
        io.read_grid(broken.encode())
    assert info.value.line == 8


def test_invalid_grid_reports_validation(fixtures):
    data = (fixtures / "e2e.grid").read_text(encoding="utf-8")
    broken = data.replace("obj\tnp", "_\tnp", 1)
    with pytest.raises(io.ValidationError) as info:
        io.read_grid(broken.encode())
    assert info.value.report.errors


def test_escape_round_trip():
    for value in ["_", "|", "\\", "\\_", "a", "", "⟨x⟩"]:
        assert io.unescape(io.escape(value)) == value


def scan_tokens(text: str) -> list[str]:
    """Character-by-character whitespace scan."""
    out, current = [], []
    for ch in text:
        if ch.isspace():
            if current:
                out.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        out.append("".join(current))
    return out


@settings(max_examples=300)
@given(st.text(alphabet=st.sampled_from(list("ab ſ.\n\t  x")), max_size=40))
def test_plaintext_matches_scan(text):
    doc = io.ingest_plaintext(text.encode("utf-8"))
    assert list(doc.tokens) == scan_tokens(text)


def test_vertical():
    data = "Vom\tVon dem\nFreunde\n\ngings\n".encode()
    doc = io.read_vertical(data)
    assert doc.tokens == ("Vom", "Freunde", "gings")
    assert doc.norm == ("Von dem", "Freunde", "gings")
    assert doc.orth_sentences == (Span(0, 2), Span(2, 3))
    assert io.read_vertical(b"a\nb\n").norm == ()
    with pytest.raises(io.ParseError):
        io.read_vertical(b"a\tb\tc\n")


def test_writer_rejects_tabs():
    with pytest.raises(ValueError):
        io.write_grid(LayeredText.from_tokens(("a\tb",)))
    with pytest.raises(ValueError):
        io.write_dependency([DependencyGraph(("a\tb",), (0,), ("r",), ("P",))])
