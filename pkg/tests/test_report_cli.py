from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET

import httpx
import numpy as np
import pytest
from conftest import fixture_path
from hypothesis import given, settings
from hypothesis import strategies as st

from aptattrib.attribution import AttributionTable, consensus
from aptattrib.classifiers import ClassifierKind
from aptattrib.cli import cli_main
from aptattrib.errors import DataError
from aptattrib.intel_model import ActorName
from aptattrib.rag_llm import parse_llm_response
from aptattrib.report import (
    PLOT_H,
    ChartSpec,
    ReportBundle,
    UnknownFormat,
    parse_report,
    parse_table_csv,
    render_report,
    render_svg_chart,
    render_table,
)

SVG_NS = "{http://www.w3.org/2000/svg}"
LLM_LIKELIHOODS = (("Ember Bear", 85), ("Sandworm", 75), ("APT29", 65), ("Wizard Spider", 60), ("Gamaredon", 55))


def bars(svg: str):
    root = ET.fromstring(svg)
    return [r for r in root.iter(f"{SVG_NS}rect") if r.get("class") == "bar"]


# -- charts -------------------------------------------------------------------


def test_likelihood_bar_ratios_and_determinism():
    spec = ChartSpec(LLM_LIKELIHOODS)
    svg = render_svg_chart(spec)
    assert svg == render_svg_chart(ChartSpec(LLM_LIKELIHOODS))
    heights = [float(b.get("height")) for b in bars(svg)]
    for h, (_, v) in zip(heights, LLM_LIKELIHOODS):
        assert h / heights[0] == pytest.approx(v / 85, abs=1e-9)
    xs = [float(b.get("x")) for b in bars(svg)]
    assert xs == sorted(xs)
    root = ET.fromstring(svg)
    assert root.get("viewBox") == "0 0 1000 600"
    texts = [t.text for t in root.iter(f"{SVG_NS}text")]
    assert "APT Group Names" in texts and "Likelihood (%)" in texts
    labels = [t for t in root.iter(f"{SVG_NS}text") if t.get("class") == "label"]
    assert all("rotate(" in t.get("transform") for t in labels)


def test_full_and_empty_bars():
    (full,) = bars(render_svg_chart(ChartSpec((("x", 100),))))
    assert float(full.get("height")) == PLOT_H
    svg = render_svg_chart(ChartSpec((("zero", 0), ("over", 250), ("neg", -5))))
    hs = [float(b.get("height")) for b in bars(svg)]
    assert hs == [0.0, PLOT_H, 0.0]
    assert ">zero</text>" in svg


def test_chart_spec_invariants():
    with pytest.raises(DataError):
        ChartSpec(())
    with pytest.raises(DataError):
        ChartSpec((("a", 1),), color='red" onload="x')


@settings(max_examples=1000, deadline=None)
@given(
    st.lists(st.tuples(st.text(max_size=20).filter(lambda s: all(c.isprintable() for c in s)), st.floats(-50, 150)), min_size=1, max_size=15),
    st.text(max_size=30).filter(lambda s: all(c.isprintable() for c in s)),
    st.sampled_from(["lightblue", "violet", "#336699", "red"]),
)
def test_svg_well_formed(series, title, color):
    svg = render_svg_chart(ChartSpec(tuple(series), title=title, color=color))
    root = ET.fromstring(svg.encode("utf-8"))
    assert len(bars(svg)) == len(series)
    assert root.tag == f"{SVG_NS}svg"


# -- tables -------------------------------------------------------------------


def test_golden_matrix_csv_rendering(table1):
    text = render_table(table1, "csv")
    lines = text.splitlines()
    assert lines[0] == "actor,KNN,DecisionTree,RandomForest,AdaBoost,LinearSVM,RbfSVM,GaussianNB,NeuralNet"
    ember = next(ln for ln in lines if ln.startswith("EmberBear,"))
    assert ember.split(",")[7] == "91.836735"
    assert [ln.split(",")[0] for ln in lines[1:]] == [a.display for a in table1.actors]
    assert parse_table_csv(text) == table1


def test_text_and_json_formats(table1):
    text = render_table(table1, "text").splitlines()
    assert len({len(ln) for ln in text}) == 1  # every column right-aligned to a common width
    doc = json.loads(render_table(table1, "json"))
    assert doc["EmberBear"]["GaussianNB"] == 91.836735
    with pytest.raises(UnknownFormat):
        render_table(table1, "xlsx")


def test_single_actor_table():
    t = AttributionTable((ActorName.of("Turla"),), (ClassifierKind.KNN,), np.array([[100.0]]))
    assert render_table(t, "csv") == "actor,KNN\nTurla,100.000000\n"


@st.composite
def tables(draw):
    n = draw(st.integers(1, 80))
    actors = tuple(sorted(ActorName.of(a) for a in draw(st.sets(st.sampled_from(["A", "B", "C", "Turla", "APT28"]), min_size=1))))
    kinds = tuple(k for k in ClassifierKind if draw(st.booleans())) or (ClassifierKind.KNN,)
    cells = np.zeros((len(actors), len(kinds)))
    for j in range(len(kinds)):
        cuts = sorted(draw(st.lists(st.integers(0, n), min_size=len(actors) - 1, max_size=len(actors) - 1)))
        counts = np.diff([0, *cuts, n])
        cells[:, j] = 100.0 * counts / n
    return AttributionTable(actors, kinds, cells, n)


@settings(max_examples=200)
@given(tables())
def test_table_csv_round_trip(t):
    again = parse_table_csv(render_table(t, "csv"))
    assert again == t
    assert render_table(again, "csv") == render_table(t, "csv")


def test_table_csv_errors():
    with pytest.raises(DataError):
        parse_table_csv("group,KNN\nA,1\n")
    with pytest.raises(DataError):
        parse_table_csv("actor,Bogus\nA,1\n")
    with pytest.raises(DataError):
        parse_table_csv("actor,KNN\nA,1,2\n")


# -- report bundle ------------------------------------------------------------


def test_report_round_trip(table1):
    llm = parse_llm_response(fixture_path("gpt_rag_response.txt").read_text())
    r = ReportBundle("WhisperGate", 49, 42, None, table1, None, consensus(table1), llm, ("fixture",), {"hash_dim": 256})
    text = render_report(r)
    again = parse_report(text)
    assert again == r
    assert render_report(again) == text
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    assert doc["table"]["EmberBear"]["GaussianNB"] == 91.836735


def test_report_needs_a_section():
    with pytest.raises(DataError):
        ReportBundle("x", 1)
    with pytest.raises(DataError):
        parse_report("[1, 2]")
    with pytest.raises(DataError):
        parse_report('{"attack_name": "x"}')


# -- CLI ----------------------------------------------------------------------


def run(capsys, *argv):
    code = cli_main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture()
def no_network(monkeypatch):
    def boom(*a, **k):
        raise AssertionError("network access attempted")

    monkeypatch.setattr(httpx.Client, "send", boom)
    monkeypatch.setattr(httpx.HTTPTransport, "handle_request", boom)


def test_cli_validate(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", "fixtures/russian_apt_training.csv")
    assert code == 0 and "10 actors" in out
    bad = tmp_path / "bad.csv"
    bad.write_text("group,type,ioc\nAPT28,tool,x\n")
    code, out, err = run(capsys, "validate", str(bad))
    assert code == 2 and out == ""
    assert re.search(r"bad\.csv:1:", err)


def test_cli_usage_errors(capsys):
    assert run(capsys, "attribute", "--train")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "chart", "r.json", "--classifier", "KNN", "--llm")[0] == 1
    code, _, err = run(capsys, "attribute", "--train", "x", "--unknown", "y", "--hp", "bogus=1")
    assert code == 1 and "bogus" in err
    assert run(capsys, "llm", "attribute", "--no-rag", "--no-llm")[0] == 1


def test_cli_refang(capsys, tmp_path):
    assert run(capsys, "refang", "hxxps://cdn.discordapp[.]com/x")[1] == "https://cdn.discordapp.com/x\n"
    f = tmp_path / "iocs.txt"
    f.write_text("a[.]b\nhxxp://c[.]d\n")
    assert run(capsys, "refang", str(f))[1] == "a.b\nhttp://c.d\n"


def test_cli_ingest_infer_kinds(capsys, tmp_path):
    f = tmp_path / "iocs.txt"
    f.write_text("# cluster 1\nhxxps://cdn.discordapp[.]com/attachments/1/2/Tbopbh.jpg\nsaint.exe\nT1102\n3237[.]site\n")
    code, out, _ = run(capsys, "ingest", str(f), "--infer-kinds")
    assert code == 0
    assert out.splitlines() == [
        "kind,value", "url,https://cdn.discordapp.com/attachments/1/2/tbopbh.jpg", "filename,saint.exe",
        "technique,T1102", "domain,3237.site",
    ]


def test_cli_consensus_on_table1(capsys):
    code, out, _ = run(capsys, "consensus", "fixtures/table1.csv")
    doc = json.loads(out)
    assert code == 0 and doc["plurality"] == "Sandworm"
    assert sorted(k for k, _ in doc["dissenters"]) == ["DecisionTree", "GaussianNB", "KNN"]


def test_cli_rag(capsys):
    code, out, _ = run(capsys, "rag", "query", "fixtures/corpus", "SaintBot GrimPlant GraphSteel WhisperGate Discord CDN", "-k", "2")
    assert code == 0 and out.startswith("emberbear.txt\t")
    code, out, _ = run(capsys, "rag", "index", "fixtures/corpus")
    assert code == 0 and len(json.loads(out)["documents"]) == 10
    assert run(capsys, "rag", "index", "/nonexistent")[0] == 2


def test_cli_llm_transcript_mode(capsys, tmp_path, no_network):
    out_file = tmp_path / "llm.json"
    code, _, _ = run(
        capsys, "llm", "attribute", "--no-llm", "--transcript", "fixtures/gpt_rag_response.txt",
        "--train-context", "fixtures/corpus", "--out", str(out_file), "--chart", str(tmp_path / "l.svg"),
    )
    assert code == 0
    doc = json.loads(out_file.read_text())
    entries = doc["llm"]["entries"]
    assert len(entries) == 5
    assert (entries[0]["actor_canonical"], entries[0]["likelihood_pct"]) == ("EmberBear", 85.0)
    assert any("no network" in p for p in doc["provenance"])
    ET.fromstring((tmp_path / "l.svg").read_text())

    code, out, _ = run(capsys, "llm", "attribute", "--no-llm", "--transcript", "fixtures/gpt_rag_response.txt")
    assert code == 0 and json.loads(out)["llm"]["entries"][0]["likelihood_pct"] == 85.0
    code, svg, _ = run(capsys, "chart", str(out_file), "--llm")
    assert code == 0 and len(bars(svg)) == 5


def test_cli_llm_transcript_without_entries(capsys, tmp_path, no_network):
    t = tmp_path / "t.txt"
    t.write_text("I cannot help with that.")
    assert run(capsys, "llm", "attribute", "--no-rag", "--no-llm", "--transcript", str(t))[0] == 2


def test_cli_live_mode_errors(capsys, monkeypatch):
    monkeypatch.delenv("LLM_API_KEY", raising=False)
    assert run(capsys, "llm", "attribute", "--no-rag")[0] == 1
    monkeypatch.setenv("LLM_API_KEY", "k")

    def refuse(self, request):
        raise httpx.ConnectError("refused", request=request)

    monkeypatch.setattr(httpx.HTTPTransport, "handle_request", refuse)
    code, out, err = run(capsys, "llm", "attribute", "--no-rag", "--endpoint", "http://llm.invalid/v1")
    assert code == 3 and out == "" and "refused" in err


def test_cli_attribute_deterministic(capsys, tmp_path, no_network):
    args = ["attribute", "--train", "fixtures/russian_apt_training.csv", "--unknown", "fixtures/whispergate_unknown.csv", "--seed", "42"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, *args, "--out", str(a), "--chart", str(tmp_path / "m.svg"))[0] == 0
    assert run(capsys, *args, "--out", str(b), "--jobs", "4")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    report = parse_report(a.read_text())
    assert report.n_rows == 49 and report.seed == 42 and report.timestamp is None
    assert report.table is not None and report.consensus is not None
    code, svg, _ = run(capsys, "chart", str(a), "--classifier", "GaussianNB")
    assert code == 0 and len(bars(svg)) == 10
    code, out, _ = run(capsys, "consensus", str(a))
    assert code == 0 and json.loads(out) == report.consensus.to_dict()
    assert run(capsys, "chart", str(a), "--llm")[0] == 2
