from __future__ import annotations

import io as stdio
import shutil

import pytest

from histbank import io
from histbank.cli import main


def run(*argv) -> tuple[int, dict[str, str], str]:
    out = stdio.StringIO()
    code = main([str(a) for a in argv], out)
    text = out.getvalue()
    report = dict(line.split("=", 1) for line in text.splitlines() if "=" in line and "\t" not in line)
    return code, report, text


@pytest.fixture
def work(tmp_path, fixtures):
    for name in ("e2e.grid", "e2e.txt", "fig2.grid", "pred_brackets.grid"):
        shutil.copy(fixtures / name, tmp_path / name)
    return tmp_path


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["no-such-command"]) == 2
    assert main(["ted", "only-one"]) == 2
    assert main(["--jobs", "0", "validate", "x.grid"]) == 2


def test_missing_file_is_data_error(work, capsys):
    assert main(["validate", str(work / "absent.grid")]) == 1
    assert "absent.grid" in capsys.readouterr().err


def test_global_options_after_subcommand(work):
    code, report, _ = run("validate", work / "e2e.grid", "--jobs", "2", "--seed", "4")
    assert code == 0 and report["errors"] == "0"


def test_tokenize_and_segment(work):
    code, report, _ = run("tokenize", work / "e2e.txt", "-o", work / "tok.grid")
    assert code == 0 and report["splits"] == "2"
    doc, _ = io.read_grid((work / "tok.grid").read_bytes())
    assert doc.tokens[:2] == ("Von", "m")
    assert doc.layers["split"][0] == "contraction"
    code, report, _ = run("segment", work / "tok.grid", "--terminators", ".", "-o", work / "seg.grid")
    assert code == 0
    doc, _ = io.read_grid((work / "seg.grid").read_bytes())
    assert doc.orth_sentences


def test_tokenize_vertical(work):
    (work / "v.txt").write_text("gings\nheim\n\nhastu\n", encoding="utf-8")
    code, report, _ = run("tokenize", work / "v.txt", "--vertical", "-o", work / "v.grid")
    assert code == 0 and report["splits"] == "2"
    doc, _ = io.read_grid((work / "v.grid").read_bytes())
    assert doc.tokens == ("ging", "es", "heim", "hast", "du")
    assert doc.orth_sentences[0].end == 3


def test_normalize_and_evaluate(work):
    (work / "lex.tsv").write_text("Freunden\t10\nheim\t5\nVom\t3\n", encoding="utf-8")
    code, _, _ = run("normalize", work / "e2e.grid", "--lexicon", work / "lex.tsv",
                     "-o", work / "n.grid")
    assert code == 0
    doc, _ = io.read_grid((work / "n.grid").read_bytes())
    assert "candidate" in doc.layers
    code, report, _ = run("eval-norm", work / "n.grid")
    assert code == 0 and {"tp", "fp", "fn", "tn"} <= set(report)
    code, report, _ = run("dist-profile", work / "n.grid")
    assert code == 0


def test_grid2tree_standoff(work):
    code, report, text = run("grid2tree", work / "pred_brackets.grid", "--show",
                             "--standoff", work / "sx", "--id", "pb")
    assert code == 0
    assert "(pred:vp 1 3)" in text
    assert sorted(p.name for p in (work / "sx").iterdir()) == [
        "pb.mark.xml", "pb.struct.xml", "pb.text.xml"]


def test_conversion_round_trip(work):
    assert run("tree2dep", work / "e2e.grid", "-o", work / "a.dep")[0] == 0
    assert run("dep2tree", work / "a.dep", "-o", work / "b.grid")[0] == 0
    assert run("tree2dep", work / "b.grid", "-o", work / "c.dep")[0] == 0
    assert (work / "a.dep").read_bytes() == (work / "c.dep").read_bytes()
    doc, _ = io.read_grid((work / "b.grid").read_bytes())
    assert [str(k) for _, k in doc.macro_units] == ["s", "s"]


def test_ted_and_alpha(work):
    code, report, _ = run("ted", work / "e2e.grid", work / "e2e.grid")
    assert code == 0 and report["distance"] == "0"
    code, report, _ = run("alpha", work / "e2e.grid", work / "e2e.grid")
    assert code == 0 and report["alpha"] == "1.0"
    code, report, _ = run("alpha", "--mode", "distance", work / "e2e.grid", work / "e2e.grid")
    assert code == 0 and report["alpha"] == "1.0"
    (work / "list.txt").write_text(f"{work / 'e2e.grid'}\n{work / 'e2e.grid'}\n")
    code, report, _ = run("alpha", "--manifest", work / "list.txt", "--mode", "nominal", "--layer", "pos")
    assert code == 0 and report["alpha"] == "1.0"


def test_alpha_degenerate_data(work, capsys):
    code = main(["alpha", "--mode", "nominal", str(work / "e2e.grid"), str(work / "e2e.grid")])
    assert code == 1
    assert "undefined" in capsys.readouterr().err


def test_patterns_and_seg_agree(work):
    code, _, text = run("patterns", work / "e2e.grid")
    assert code == 0 and "s" in text
    code, report, _ = run("seg-agree", work / "e2e.grid", work / "e2e.grid")
    assert code == 0


def test_validate_reports_errors(work, capsys):
    bad = (work / "e2e.grid").read_text(encoding="utf-8").replace("obj\tnp", "_\tnp", 1)
    (work / "bad.grid").write_text(bad, encoding="utf-8")
    assert main(["validate", str(work / "bad.grid")]) == 1
    assert "bad.grid" in capsys.readouterr().err


def test_non_utf8_diagnostic(work, capsys):
    (work / "latin.grid").write_bytes("idx\tStraße\n".encode("latin-1"))
    assert main(["validate", str(work / "latin.grid")]) == 1
    assert "UTF-8" in capsys.readouterr().err


def test_tagmap_commands(work):
    code, _, _ = run("tagmap-train", work / "e2e.grid", "--target", "pos", "-o", work / "m.tsv")
    assert code == 0
    code, _, _ = run("tagmap-apply", work / "m.tsv", work / "e2e.grid", "-o", work / "t.grid")
    assert code == 0
    doc, _ = io.read_grid((work / "t.grid").read_bytes())
    assert doc.layers["tag"] == doc.layers["pos"]
    code, _, text = run("tagmap-curve", "--train", work / "e2e.grid", "--held-out", work / "e2e.grid",
                        "--sizes", "3,9", "--target", "pos")
    assert code == 0 and "9" in text


def test_col_commands(work):
    grids = []
    for k, label in enumerate("NNDD"):
        text = (work / "e2e.grid").read_text(encoding="utf-8")
        text = text.replace("col_label = N", f"col_label = {label}").replace("e2e", f"t{k}")
        if k % 2:
            text = text.replace("Dann", "ach")
        if k > 1:
            text = text.replace("er\ter", "ich\tich")
        path = work / f"t{k}.grid"
        path.write_text(text, encoding="utf-8")
        grids.append(path)
    code, _, _ = run("col-features", *grids, "-o", work / "f.tsv")
    assert code == 0
    code, _, text = run("col-select", work / "f.tsv", "-k", "2")
    assert code == 0
    code, _, _ = run("col-fit", work / "f.tsv", "--select",
                     "interjection_rate,pronoun_rate", "-o", work / "col.tsv")
    assert code == 0
    code, _, text = run("col-score", work / "col.tsv", work / "f.tsv")
    assert code == 0 and "t3" in text
    code, report, _ = run("col-segments", work / "col.tsv", grids[0], "--window", "4", "--stride", "2")
    assert code == 0 and "median" in report
    code, report, _ = run("pearson", work / "f.tsv", "--x", "pronoun_rate", "--y", "interjection_rate")
    assert code == 0 and "r" in report
