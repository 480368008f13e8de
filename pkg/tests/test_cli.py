import json

import pytest

from mdqa.cli import build_parser, main


def jl(path, objs):
    path.write_text("".join(json.dumps(o, ensure_ascii=False) + "\n" for o in objs), encoding="utf-8")
    return str(path)


def read_jl(path):
    return [json.loads(line) for line in open(path, encoding="utf-8") if line.strip()]


@pytest.fixture
def data(tmp_path):
    train = jl(tmp_path / "train.jsonl", [
        {"sample_id": f"t{i}", "history": [{"question": "hi", "answer": f"hello {i}"}],
         "documents": ["doc one", "doc two"], "question": "what is up", "answer": f"not much {i}"}
        for i in range(3)
    ])
    ev = jl(tmp_path / "eval.jsonl", [
        {"sample_id": f"e{i}", "history": [], "documents": ["paris is the capital", "what is the capital of france"],
         "question": "what is the capital of france", "answer": "paris is the capital", "keywords": ["paris"]}
        for i in range(2)
    ])
    preds = jl(tmp_path / "preds.jsonl", [{"sample_id": f"e{i}", "answer": "paris is the capital"} for i in range(2)])
    return tmp_path, train, ev, preds


def test_prepare(data, capsys):
    tmp, train, _, _ = data
    out = tmp / "p.jsonl"
    assert main(["prepare", "--input", train, "--out", str(out), "--workers", "1"]) == 0
    recs = read_jl(out)
    assert len(recs) == 3
    assert recs[0]["text"] == "hi hello 0 what is up doc one doc two not much 0"
    assert recs[0]["mode"] == "multi" and len(recs[0]["target_spans"]) == 2
    meta = json.loads((tmp / "p.jsonl.meta.json").read_text())
    assert meta["command"] == "prepare" and meta["config"]["mode"] == "multi"
    assert main(["prepare", "--input", train, "--out", str(out), "--mode", "single"]) == 0
    assert all(len(r["target_spans"]) == 1 for r in read_jl(out))


def test_prepare_corrupt_line(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"question": "q", "answer": "a"}\n{"documents": [], "answer": "a"}\n')
    assert main(["prepare", "--input", str(bad), "--out", str(tmp_path / "o.jsonl")]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "question" in err


def test_prepare_missing_file(tmp_path):
    assert main(["prepare", "--input", str(tmp_path / "none.jsonl"), "--out", str(tmp_path / "o")]) == 1


def test_unknown_template(data):
    tmp, train, _, _ = data
    assert main(["prepare", "--input", train, "--out", str(tmp / "o.jsonl"), "--template", "zzz"]) == 6


def test_evaluate(data, capsys):
    tmp, _, ev, preds = data
    out = tmp / "r.json"
    assert main(["evaluate", "--refs", ev, "--hyps", preds, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["aggregate"] == {"w_rouge_l_f": 1.0, "c_rouge_l_f": 1.0, "kr": 1.0}
    assert "W-ROUGE-L 1.00000" in capsys.readouterr().out


def test_evaluate_mismatch(data):
    tmp, _, ev, _ = data
    hyps = jl(tmp / "h.jsonl", [{"sample_id": "zzz", "answer": "x"}])
    assert main(["evaluate", "--refs", ev, "--hyps", hyps, "--out", str(tmp / "r.json")]) == 3


def test_evaluate_beta_changes_only_f(data):
    tmp, _, ev, _ = data
    hyps = jl(tmp / "h.jsonl", [{"sample_id": f"e{i}", "answer": "paris capital of the world today"} for i in range(2)])
    reps = []
    for beta in ("1", "2"):
        out = tmp / f"r{beta}.json"
        assert main(["evaluate", "--refs", ev, "--hyps", hyps, "--out", str(out), "--beta", beta]) == 0
        reps.append(json.loads(out.read_text())["per_sample"][0]["w_rouge_l"])
    a, b = reps
    assert (a["recall"], a["precision"]) == (b["recall"], b["precision"])
    assert a["f"] != b["f"]


def test_filter_report_leaves_input_untouched(data):
    tmp, _, ev, _ = data
    before = open(ev, "rb").read()
    report = tmp / "f.json"
    assert main(["filter", "--input", ev, "--report", str(report), "--action", "report", "--out", str(tmp / "k.jsonl")]) == 0
    assert open(ev, "rb").read() == before
    rep = json.loads(report.read_text())
    assert rep["n_dropped"] == 0 and rep["n_flagged"] >= 2
    assert [len(s["documents"]) for s in read_jl(tmp / "k.jsonl")] == [2, 2]


def test_filter_drop(data):
    tmp, _, ev, _ = data
    out = tmp / "k.jsonl"
    assert main(["filter", "--input", ev, "--report", str(tmp / "f.json"), "--action", "drop", "--out", str(out)]) == 0
    kept = read_jl(out)
    assert all("what is the capital of france" not in s["documents"] for s in kept)


def test_filter_refuses_to_overwrite_input(data):
    tmp, _, ev, _ = data
    assert main(["filter", "--input", ev, "--report", str(tmp / "f.json"), "--out", ev]) == 6


def test_filter_bad_thresholds(data):
    tmp, _, ev, _ = data
    assert main(["filter", "--input", ev, "--report", str(tmp / "f.json"), "--cos-low", "0.99"]) == 6


def test_merge(data):
    tmp, train, ev, preds = data
    out = tmp / "m.jsonl"
    assert main(["merge", "--train", train, "--eval", ev, "--predictions", preds, "--out", str(out)]) == 0
    merged = read_jl(out)
    assert len(merged) == 3 + 2
    assert [m.get("pseudo", False) for m in merged] == [False] * 3 + [True] * 2


def test_merge_rejects_test(data):
    tmp, train, ev, preds = data
    args = ["merge", "--train", train, "--eval", ev, "--eval-split", "test", "--predictions", preds, "--out", str(tmp / "m.jsonl")]
    assert main(args) == 4
    assert main(args + ["--allow-test"]) == 0


def test_merge_missing_prediction(data):
    tmp, train, ev, _ = data
    preds = jl(tmp / "p1.jsonl", [{"sample_id": "e0", "answer": "x"}])
    assert main(["merge", "--train", train, "--eval", ev, "--predictions", preds, "--out", str(tmp / "m.jsonl")]) == 3


def test_ensemble_single_file_passthrough(data):
    tmp, _, _, preds = data
    out = tmp / "ens.jsonl"
    assert main(["ensemble", "--inputs", preds, "--out", str(out)]) == 0
    assert [r["answer"] for r in read_jl(out)] == [r["answer"] for r in read_jl(preds)]
    dec = read_jl(f"{out}.decisions.jsonl")
    assert dec[0] == {"sample_id": "e0", "quality": [0.0], "chosen_index": 0, "quantizer": "emb_a_s"}


def test_ensemble_with_question_and_sweep(data):
    tmp, _, ev, preds = data
    other = jl(tmp / "o.jsonl", [{"sample_id": f"e{i}", "answer": "london"} for i in range(2)])
    out = tmp / "ens.jsonl"
    args = ["ensemble", "--inputs", preds, other, preds, "--out", str(out), "--sweep-dir", str(tmp / "sw"), "--quantizer", "word_a_f"]
    assert main(args) == 0
    assert sorted(p.name for p in (tmp / "sw").iterdir()) == ["ensemble_m1.jsonl", "ensemble_m2.jsonl", "ensemble_m3.jsonl"]
    assert main(["ensemble", "--inputs", preds, other, "--out", str(out), "--with-question"]) == 6
    assert main(["ensemble", "--inputs", preds, other, "--out", str(out), "--with-question", "--samples", ev]) == 0


def test_ensemble_id_mismatch(data):
    tmp, _, _, preds = data
    other = jl(tmp / "o.jsonl", [{"sample_id": "x", "answer": "london"}])
    assert main(["ensemble", "--inputs", preds, other, "--out", str(tmp / "e.jsonl")]) == 3


def test_embed(tmp_path):
    inp = jl(tmp_path / "t.jsonl", [{"id": "a", "text": "ab"}, {"text": "hello"}])
    out = tmp_path / "e.jsonl"
    assert main(["embed", "--input", inp, "--out", str(out), "--embed-dim", "8"]) == 0
    rows = read_jl(out)
    assert [r["id"] for r in rows] == ["a", "2"]
    assert len(rows[0]["embedding"]) == 8
    assert sum(v > 0 for v in rows[0]["embedding"]) == 3


def test_embed_http_needs_url(tmp_path):
    inp = jl(tmp_path / "t.jsonl", [{"text": "x"}])
    assert main(["embed", "--input", inp, "--out", str(tmp_path / "e.jsonl"), "--provider", "http"]) == 6


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["evaluate", "--refs"])
    assert info.value.code == 64


@pytest.mark.parametrize("cmd", ["prepare", "evaluate", "filter", "merge", "ensemble", "embed"])
def test_help_documents_exit_codes(cmd, capsys):
    with pytest.raises(SystemExit) as info:
        main([cmd, "--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    assert "exit codes:" in text and "--workers" in text and "--config" in text


def test_global_flags_before_subcommand(data):
    tmp, train, _, _ = data
    out = tmp / "p.jsonl"
    assert main(["--template", "inst", "prepare", "--input", train, "--out", str(out)]) == 0
    assert read_jl(out)[0]["template_id"] == "inst"


def test_parser_builds():
    assert build_parser().prog == "mdqa"
