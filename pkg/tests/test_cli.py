import json
from pathlib import Path

import pytest

from mrkit.cli import main
from mrkit.corpus import data_dir


def corpus_path(name: str) -> str:
    return str(data_dir() / "corpus" / f"{name}.mir")


def write_mini_manifest(tmp_path, names_ids, labels: bool = True) -> Path:
    lines = ["method_id,name,source_kind,source_path"]
    for mid, name in names_ids:
        src = tmp_path / f"{name}.mir"
        src.write_text(Path(corpus_path(name)).read_text())
        lines.append(f"{mid},{name},mir,{name}.mir")
    man = tmp_path / "manifest.csv"
    man.write_text("\n".join(lines) + "\n")
    if labels:
        ref = {90: "1,1,1,1,1,1", 5: "1,1,1,0,0,1", 49: "1,1,1,1,1,1"}
        rows = ["method_id,ADD,MUL,PER,INC,EXC,INV"]
        for mid, _ in names_ids:
            rows.append(f"{mid},{ref[mid]}")
        (tmp_path / "labels.csv").write_text("\n".join(rows) + "\n")
    return man


TRIO = [(90, "sum"), (5, "average"), (49, "find_max")]


def test_extract_worked_example(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["extract", corpus_path("average"), "--out", str(out),
                 "--omit-exit-nf"])
    assert code == 0
    dot = (out / "average.dot").read_text()
    assert dot.count("->") == 14
    rows = (out / "average_features.csv").read_text().splitlines()
    assert "average,NF,assi-1-1,7" in rows
    assert "average,NF,if-2-2,1" in rows
    assert not any(",NF,exit-" in r for r in rows)
    assert "average,PF,start-assi-assi-goto-assi-if-assi,2" in rows
    assert sum(1 for r in rows if ",PF," in r) == 25


def test_extract_empty_inputs_warns(tmp_path, capsys):
    assert main(["extract", "--out", str(tmp_path / "o")]) == 0
    assert "no inputs" in capsys.readouterr().err


def test_extract_continues_past_bad_files(tmp_path, capsys):
    bad = tmp_path / "broken.dot"
    bad.write_text("digraph g {\n  a [label=\"nope\"];\n}\n")
    out = tmp_path / "out"
    code = main(["extract", str(bad), corpus_path("sum"), "--out", str(out)])
    assert code == 1
    assert (out / "sum.dot").exists()
    assert "broken.dot" in capsys.readouterr().err


def test_label_matches_published_rows(tmp_path, capsys):
    man = write_mini_manifest(tmp_path, TRIO)
    out = tmp_path / "labels_out.csv"
    code = main(["label", "--manifest", str(man), "--out", str(out), "--seed", "42"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method_id,ADD,MUL,PER,INC,EXC,INV"
    assert "90,1,1,1,1,1,1" in lines
    assert "5,1,1,1,0,0,1" in lines
    assert "49,1,1,1,1,1,1" in lines
    assert "discrepancy" not in capsys.readouterr().err


def test_label_stable_across_seeds(tmp_path):
    man = write_mini_manifest(tmp_path, TRIO)
    outputs = []
    for seed in ("42", "43"):
        out = tmp_path / f"labels{seed}.csv"
        main(["label", "--manifest", str(man), "--out", str(out), "--seed", seed])
        outputs.append(out.read_text())
    assert outputs[0] == outputs[1]


def test_label_trapping_method_gets_zero_row_and_diagnostic(tmp_path, capsys):
    src = tmp_path / "boom.mir"
    src.write_text("fn boom(a) {\n  x = a[0]\n  y = 0\n  return x / y\n}\n")
    man = tmp_path / "manifest.csv"
    man.write_text("method_id,name,source_kind,source_path\n1,boom,mir,boom.mir\n")
    out = tmp_path / "labels.csv"
    assert main(["label", "--manifest", str(man), "--out", str(out),
                 "--trials", "5"]) == 0
    assert "1,0,0,0,0,0,0" in out.read_text()
    assert "runtime trap" in capsys.readouterr().err


def test_label_partial_parse_failure_is_diagnostic_not_error(tmp_path, capsys):
    good = tmp_path / "sum.mir"
    good.write_text(Path(corpus_path("sum")).read_text())
    bad = tmp_path / "bad.mir"
    bad.write_text("fn bad(a) {\n  goto NOWHERE\n  return 0\n}\n")
    man = tmp_path / "manifest.csv"
    man.write_text("method_id,name,source_kind,source_path\n"
                   "90,sum,mir,sum.mir\n2,bad,mir,bad.mir\n")
    out = tmp_path / "labels.csv"
    assert main(["label", "--manifest", str(man), "--out", str(out)]) == 0
    assert "90,1,1,1,1,1,1" in out.read_text()
    assert "NOWHERE" in capsys.readouterr().err


def test_label_total_failure_is_error(tmp_path, capsys):
    bad = tmp_path / "bad.mir"
    bad.write_text("fn bad(a) {\n  goto NOWHERE\n  return 0\n}\n")
    man = tmp_path / "manifest.csv"
    man.write_text("method_id,name,source_kind,source_path\n2,bad,mir,bad.mir\n")
    assert main(["label", "--manifest", str(man), "--out",
                 str(tmp_path / "l.csv")]) == 1


def test_stats_prints_published_counts(capsys):
    assert main(["stats"]) == 0
    text = capsys.readouterr().out
    assert "ADD,56,44" in text
    assert "INV,63,37" in text
    assert "0,20" in text and "6,9" in text


def test_evaluate_usage_error_on_k_below_two(tmp_path, capsys):
    assert main(["evaluate", "--k", "1", "--out", str(tmp_path)]) == 2


def test_evaluate_deterministic_outputs(tmp_path):
    args = ["evaluate", "--features", "nf-pf", "--mr", "per", "--k", "5",
            "--seed", "42"]
    payloads = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(args + ["--out", str(out)]) == 0
        payloads.append(((out / "report.json").read_bytes(),
                         (out / "results.csv").read_bytes()))
    assert payloads[0] == payloads[1]


def test_evaluate_writes_schema(tmp_path):
    out = tmp_path / "eval"
    assert main(["evaluate", "--features", "rwk", "--mr", "all", "--k", "10",
                 "--seed", "42", "--out", str(out), "--dump-gram"]) == 0
    csv_lines = (out / "results.csv").read_text().splitlines()
    assert csv_lines[0] == "mr,featurization,accuracy,precision,recall,f_measure,auc,bsr"
    assert len(csv_lines) == 7
    for line in csv_lines[1:]:
        auc = float(line.split(",")[6])
        assert 0.0 <= auc <= 1.0
    report = json.loads((out / "report.json").read_text())
    assert report["k"] == 10 and report["root_seed"] == 42
    assert (out / "gram.csv").exists()


def test_evaluate_single_class_mr_skipped(tmp_path, capsys):
    man = write_mini_manifest(tmp_path, TRIO)
    code = main(["evaluate", "--manifest", str(man), "--features", "nf-pf",
                 "--mr", "add", "--k", "2", "--seed", "1"])
    assert code == 1  # ADD is all-positive on the trio: skipped, partial exit
    assert "single-class" in capsys.readouterr().err


def test_train_predict_round_trip(tmp_path, capsys):
    # train on the bundled corpus minus `sum`, then predict sum
    manifest = data_dir() / "manifest.csv"
    lines = [l for l in manifest.read_text().splitlines() if ",sum," not in l]
    man = tmp_path / "manifest.csv"
    man.write_text("\n".join(lines) + "\n")
    labels = data_dir() / "labels.csv"
    (tmp_path / "labels.csv").write_text(labels.read_text())
    (tmp_path / "corpus").mkdir()
    for mir in (data_dir() / "corpus").glob("*.mir"):
        (tmp_path / "corpus" / mir.name).write_text(mir.read_text())

    models = tmp_path / "models"
    assert main(["train", "--manifest", str(man), "--features", "nf-pf",
                 "--out", str(models), "--seed", "42"]) == 0
    assert sorted(p.name for p in models.glob("*.json")) == [
        "ADD.json", "EXC.json", "INC.json", "INV.json", "MUL.json", "PER.json"]

    out = tmp_path / "pred.csv"
    assert main(["predict", corpus_path("sum"), "--models", str(models),
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    assert header[:7] == ["method", "ADD", "MUL", "PER", "INC", "EXC", "INV"]
    assert len(header) == 13  # six bits plus six decision values
    row = lines[1].split(",")
    assert row[0] == "sum"
    assert all(bit in ("0", "1") for bit in row[1:7])
    for cell in row[7:]:
        float(cell)


def test_predict_refuses_featurization_mismatch(tmp_path, capsys):
    models = tmp_path / "models"
    assert main(["train", "--features", "nf-pf", "--out", str(models),
                 "--seed", "42"]) == 0
    code = main(["predict", corpus_path("sum"), "--models", str(models),
                 "--features", "rwk"])
    assert code == 2
    assert "refusing" in capsys.readouterr().err


def test_predict_warns_on_unseen_keys(tmp_path, capsys):
    models = tmp_path / "models"
    assert main(["train", "--features", "nf-pf", "--out", str(models),
                 "--seed", "42"]) == 0
    novel = tmp_path / "novel.mir"
    novel.write_text(
        "fn novel(a) {\n  x = a[0]\n  y = x % 7\n  z = y % 3\n"
        "  w = z % 2\n  q = w % 2\n  return q % 2\n}\n")
    assert main(["predict", str(novel), "--models", str(models)]) == 0
    err = capsys.readouterr().err
    assert "unseen feature keys" in err


def test_seed_env_override(tmp_path, monkeypatch):
    out_env = tmp_path / "env"
    monkeypatch.setenv("MRKIT_SEED", "7")
    assert main(["evaluate", "--features", "nf-pf", "--mr", "per", "--k", "4",
                 "--out", str(out_env)]) == 0
    monkeypatch.delenv("MRKIT_SEED")
    out_flag = tmp_path / "flag"
    assert main(["evaluate", "--features", "nf-pf", "--mr", "per", "--k", "4",
                 "--seed", "7", "--out", str(out_flag)]) == 0
    assert (out_env / "report.json").read_bytes() == (out_flag / "report.json").read_bytes()
