import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qtokens.cli import main
from qtokens.fixtures import fixture_points
from qtokens.scaling_law import ScalingConstants


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_score_two_corpora(write_corpus, capsys):
    a = write_corpus("rep.jsonl", [{"text": "spam " * 400}, {"text": "spam " * 300}])
    rng = np.random.default_rng(0)
    b = write_corpus(
        "rand.jsonl",
        [{"text": " ".join(f"w{v}" for v in rng.integers(0, 10**6, size=300))} for _ in range(2)],
    )
    code, out, err = run_cli(["score", a, b], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2
    assert rows[0]["corpus"] == "rep.jsonl"
    # repetitive corpus is less diverse
    assert float(rows[0]["dr"]) < float(rows[1]["dr"])
    # no scorer configured: syntheticity columns empty
    assert rows[0]["syntheticity"] == "" and rows[0]["avg_nll"] == ""


def test_score_with_kgram_scorer(write_corpus, capsys):
    ref = write_corpus("ref.jsonl", [{"text": "the cat sat on the mat " * 20}])
    corpus = write_corpus("c.jsonl", [{"text": "the cat sat on the mat"}])
    code, out, _ = run_cli(["score", corpus, "--scorer", f"kgram:{ref}"], capsys)
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert 0.0 < float(row["syntheticity"]) <= 1.0
    assert float(row["perplexity"]) == pytest.approx(
        math.exp(float(row["avg_nll"])), rel=1e-5
    )


def test_score_env_scorer(write_corpus, capsys, monkeypatch, mock_scorer_cmd):
    corpus = write_corpus("c.jsonl", [{"text": "x y z"}])
    monkeypatch.setenv("QTOKENS_SCORER", mock_scorer_cmd("const"))
    code, out, _ = run_cli(["score", corpus, "--sample-fraction", "1.0"], capsys)
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["avg_nll"]) == pytest.approx(1.0)


def test_score_unreadable_input(capsys):
    code, out, err = run_cli(["score", "/nonexistent/input.jsonl"], capsys)
    assert code == 1
    assert "error" in err
    assert out == ""


def test_fit_fixture_f1(capsys):
    code, out, _ = run_cli(["fit", "--fixture", "--form", "F1"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["pearson"] >= 0.80
    assert payload["n_points"] == 207
    assert payload["seed"] == 42
    assert len(payload["points"]) == 207
    assert set(payload["constants"]) == {"E", "A", "alpha", "B", "beta", "c1", "c2", "form"}


def test_fit_synthetic_csv_exact_recovery(tmp_path, capsys):
    truth = ScalingConstants(e=0.5, a=0.6, alpha=0.4, b=8.0, beta=0.3, c1=-1.0, c2=1.0)
    rng = np.random.default_rng(1)
    rows = []
    for i in range(10):
        n = (25, 50, 75, 125, 350, 500, 1500, 2000, 40, 90)[i]
        d = float(10 ** rng.uniform(8, 10))
        dr = float(rng.uniform(0.25, 0.5))
        s = float(rng.uniform(0.02, 0.15))
        dq = d * math.exp(truth.c1 * dr + truth.c2 * s)
        acc = truth.e + truth.a / n**truth.alpha + truth.b / dq**truth.beta
        rows.append((n, "Synthetic", 100, d, "", "", acc * 100, dr, s))
    path = tmp_path / "exp.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            "model_size_m,data_label,fraction_pct,n_tokens,train_loss,eval_loss,"
            "accuracy_pct,diversity,syntheticity".split(",")
        )
        writer.writerows(rows)
    init = tmp_path / "init.json"
    init.write_text(
        json.dumps(
            {"E": 0.55, "A": 0.5, "alpha": 0.45, "B": 9.0, "beta": 0.28,
             "c1": -1.2, "c2": 0.8, "form": "F1"}
        )
    )
    code, out, _ = run_cli(
        ["fit", "--experiments", str(path), "--init", str(init)], capsys
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["sse"] < 1e-10


def test_fit_five_rows_is_an_error(tmp_path, capsys):
    path = tmp_path / "exp.csv"
    header = (
        "model_size_m,data_label,fraction_pct,n_tokens,train_loss,eval_loss,"
        "accuracy_pct,diversity,syntheticity\n"
    )
    lines = [
        f"{n},X,100,1000000000,,,40.0,0.35,0.05\n" for n in (25, 50, 75, 125, 350)
    ]
    path.write_text(header + "".join(lines))
    code, out, err = run_cli(["fit", "--experiments", str(path)], capsys)
    assert code == 1
    assert "at least 8" in err


def test_fit_with_bootstrap(capsys, tmp_path):
    # small synthetic set so the bootstrap stays quick
    truth = ScalingConstants(e=0.2, a=1.0, alpha=0.3, b=50.0, beta=0.35, c1=-2.0, c2=1.5)
    rng = np.random.default_rng(2)
    header = (
        "model_size_m,data_label,fraction_pct,n_tokens,train_loss,eval_loss,"
        "accuracy_pct,diversity,syntheticity\n"
    )
    lines = []
    for i in range(24):
        n = (25, 50, 75, 125, 350, 500, 1500)[i % 7]
        d = float(10 ** rng.uniform(8, 10))
        dr = float(rng.uniform(0.25, 0.5))
        s = float(rng.uniform(0.02, 0.15))
        dq = d * math.exp(truth.c1 * dr + truth.c2 * s)
        acc = truth.e + truth.a / n**truth.alpha + truth.b / dq**truth.beta
        acc += float(rng.normal(0, 0.003))
        lines.append(f"{n},X,100,{d},,,{acc * 100},{dr},{s}\n")
    path = tmp_path / "exp.csv"
    path.write_text(header + "".join(lines))
    init = tmp_path / "init.json"
    init.write_text(
        json.dumps({"E": 0.2, "A": 1.0, "alpha": 0.3, "B": 50.0, "beta": 0.35,
                    "c1": -2.0, "c2": 1.5, "form": "F1"})
    )
    code, out, _ = run_cli(
        ["fit", "--experiments", str(path), "--init", str(init), "--bootstrap-n", "4"],
        capsys,
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["se"] is not None
    assert set(payload["se"]) == {"E", "A", "alpha", "B", "beta", "c1", "c2"}


def test_predict_preset_random_100(capsys):
    code, out, _ = run_cli(
        ["predict", "--constants", "paper-ours", "--n-millions", "25",
         "--d-tokens", "10993147242", "--dr", "0.36370", "--s", "0.02635"],
        capsys,
    )
    assert code == 0
    lines = dict(line.split() for line in out.strip().splitlines())
    assert float(lines["accuracy"]) == pytest.approx(0.380, abs=0.015)
    assert float(lines["effective_tokens"]) == pytest.approx(1.073e8, rel=1e-3)


def test_predict_constant_model(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(
        json.dumps({"E": 0.5, "A": 0.0, "alpha": 0.5, "B": 0.0, "beta": 0.5,
                    "c1": 0.0, "c2": 0.0, "form": "F1"})
    )
    code, out, _ = run_cli(
        ["predict", "--constants", str(path), "--n-millions", "100",
         "--d-tokens", "1e9", "--dr", "0.3", "--s", "0.1"],
        capsys,
    )
    assert code == 0
    assert float(out.splitlines()[0].split()[1]) == 0.5


def test_predict_sel_syn_1500(capsys):
    code, out, _ = run_cli(
        ["predict", "--constants", "paper-ours", "--n-millions", "1500",
         "--d-tokens", "2507011688", "--dr", "0.28578", "--s", "0.11902"],
        capsys,
    )
    assert code == 0
    accuracy = float(out.splitlines()[0].split()[1])
    assert accuracy == pytest.approx(0.4527, abs=0.05)  # observed accuracy


def test_predict_unknown_preset(capsys):
    code, _, err = run_cli(
        ["predict", "--constants", "nope", "--n-millions", "1",
         "--d-tokens", "1", "--dr", "1", "--s", "1"],
        capsys,
    )
    assert code == 1
    assert "unknown constants" in err


def test_invert_simple(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(
        json.dumps({"E": 1.0, "A": 0.0, "alpha": 0.5, "B": 1.0, "beta": 1.0,
                    "c1": 0.0, "c2": 0.0, "form": "F1"})
    )
    code, out, _ = run_cli(
        ["invert", "--constants", str(path), "--n-millions", "10", "--loss", "1.5"],
        capsys,
    )
    assert code == 0
    assert float(out.split()[1]) == pytest.approx(2.0, rel=1e-9)


def test_invert_out_of_domain(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(
        json.dumps({"E": 1.0, "A": 0.0, "alpha": 0.5, "B": 1.0, "beta": 1.0,
                    "c1": 0.0, "c2": 0.0, "form": "F1"})
    )
    code, _, err = run_cli(
        ["invert", "--constants", str(path), "--n-millions", "10", "--loss", "0.5"],
        capsys,
    )
    assert code == 1
    assert "unreachable" in err


def test_select_end_to_end(write_corpus, tmp_path, capsys):
    rng = np.random.default_rng(4)
    raw_rows = [
        {"id": f"r{i}", "text": " ".join(f"w{v}" for v in rng.integers(0, 50, size=20))}
        for i in range(30)
    ]
    target_rows = [
        {"id": f"t{i}", "text": " ".join(f"w{v}" for v in rng.integers(0, 10, size=20))}
        for i in range(10)
    ]
    raw = write_corpus("raw.jsonl", raw_rows)
    target = write_corpus("target.jsonl", target_rows)
    out_path = tmp_path / "selected.jsonl"
    report_path = tmp_path / "select_report.json"
    code, _, _ = run_cli(
        ["select", raw, "--target", target, "--budget-tokens", "200",
         "--out", str(out_path), "--report", str(report_path)],
        capsys,
    )
    assert code == 0
    from qtokens.corpus import load_jsonl

    selected = load_jsonl(str(out_path))
    assert 0 < selected.total_tokens <= 200
    side = json.loads(report_path.read_text())
    assert side["after"]["tokens"] <= side["before"]["tokens"]
    assert side["budget_tokens"] == 200
    assert "dr" in side["before"]


def test_dedup_end_to_end(write_corpus, tmp_path, capsys):
    rows = [{"id": "a", "text": "same text " * 50},
            {"id": "b", "text": "same text " * 50},
            {"id": "c", "text": "different content " * 50}]
    src = write_corpus("dup.jsonl", rows)
    out_path = tmp_path / "dedup.jsonl"
    report_path = tmp_path / "dedup_report.json"
    code, _, _ = run_cli(
        ["dedup", src, "--mode", "exact", "--out", str(out_path),
         "--report", str(report_path)],
        capsys,
    )
    assert code == 0
    from qtokens.corpus import load_jsonl

    survivors = load_jsonl(str(out_path))
    assert [d.id for d in survivors] == ["a", "c"]
    side = json.loads(report_path.read_text())
    assert side["after"]["documents"] == 2
    assert side["after"]["dr"] > side["before"]["dr"]


def test_report_from_fixture_fit(tmp_path, capsys):
    code, out, _ = run_cli(["fit", "--fixture", "--out", str(tmp_path / "fit.json")], capsys)
    assert code == 0
    out_dir = tmp_path / "plots"
    code, out, _ = run_cli(
        ["report", "--fit-report", str(tmp_path / "fit.json"), "--out-dir", str(out_dir)],
        capsys,
    )
    assert code == 0
    svg = (out_dir / "pred_vs_true.svg").read_text()
    assert svg.count("<circle") == 207
    assert (out_dir / "acc_vs_dq.svg").exists()
    surface = (out_dir / "q_surface.csv").read_text().splitlines()
    assert surface[0] == "diversity,syntheticity,q"
    assert len(surface) == 1 + 21 * 21
    # accuracy axis covers the fixture range [0.35, 0.50]
    from qtokens.report import _pad_limits

    points = json.loads((tmp_path / "fit.json").read_text())["points"]
    observed = [p["observed"] for p in points]
    predicted = [p["predicted"] for p in points]
    assert min(observed) >= 0.35 and max(observed) <= 0.50
    lo, hi = _pad_limits(observed + predicted)
    assert lo <= 0.35 and hi >= 0.50


def test_dedup_sidecar_with_kgram_scorer(write_corpus, tmp_path, capsys):
    rows = [{"id": "a", "text": "alpha beta gamma " * 30},
            {"id": "b", "text": "alpha beta gamma " * 30},
            {"id": "c", "text": "delta epsilon zeta " * 30}]
    src = write_corpus("dup2.jsonl", rows)
    ref = write_corpus("ref2.jsonl", [{"text": "alpha beta gamma delta epsilon zeta " * 10}])
    report_path = tmp_path / "side.json"
    code, _, _ = run_cli(
        ["dedup", src, "--mode", "exact", "--out", str(tmp_path / "o.jsonl"),
         "--report", str(report_path), "--scorer", f"kgram:{ref}"],
        capsys,
    )
    assert code == 0
    side = json.loads(report_path.read_text())
    assert 0 < side["before"]["syntheticity"] <= 1
    assert 0 < side["after"]["syntheticity"] <= 1


def test_fit_with_restarts_flag(capsys):
    code, out, _ = run_cli(["fit", "--fixture", "--restarts", "2"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["pearson"] >= 0.80


def test_report_single_point_rejected(tmp_path, capsys):
    payload = {
        "constants": {"E": 1, "A": 0, "alpha": 0.5, "B": 1, "beta": 0.5,
                      "c1": 0, "c2": 0, "form": "F1"},
        "se": None, "r2": 0.0, "pearson": 0.0, "sse": 0.0, "n_points": 1,
        "n_evals": 0, "n_iters": 0, "converged": True, "residuals": [0.0],
        "points": [{"n_millions": 25, "d_tokens": 1e9, "dr": 0.3, "s": 0.1,
                    "observed": 0.4, "predicted": 0.4, "residual": 0.0,
                    "label": "X", "fraction_pct": 100}],
    }
    path = tmp_path / "one.json"
    path.write_text(json.dumps(payload))
    code, _, err = run_cli(
        ["report", "--fit-report", str(path), "--out-dir", str(tmp_path / "o")], capsys
    )
    assert code == 1
    assert "2 points" in err


def _run_subprocess(args):
    return subprocess.run(
        [sys.executable, "-m", "qtokens.cli", *args],
        capture_output=True,
        timeout=120,
    )


def test_fit_fixture_byte_identical_across_runs():
    a = _run_subprocess(["fit", "--fixture", "--form", "F1"])
    b = _run_subprocess(["fit", "--fixture", "--form", "F1"])
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_report_files_byte_identical(tmp_path):
    fit = _run_subprocess(["fit", "--fixture", "--out", str(tmp_path / "f.json")])
    assert fit.returncode == 0
    r1 = _run_subprocess(["report", "--fit-report", str(tmp_path / "f.json"),
                          "--out-dir", str(tmp_path / "d1")])
    r2 = _run_subprocess(["report", "--fit-report", str(tmp_path / "f.json"),
                          "--out-dir", str(tmp_path / "d2")])
    assert r1.returncode == r2.returncode == 0
    for name in ("pred_vs_true.svg", "acc_vs_dq.svg", "q_surface.csv"):
        assert (tmp_path / "d1" / name).read_bytes() == (tmp_path / "d2" / name).read_bytes()


def test_score_threads_preserve_order(write_corpus, capsys):
    paths = [
        write_corpus(f"c{i}.jsonl", [{"text": f"alpha beta gamma delta {i} " * 30}])
        for i in range(4)
    ]
    code, out1, _ = run_cli(["--threads", "4", "score", *paths], capsys)
    assert code == 0
    code, out2, _ = run_cli(["score", *paths], capsys)
    assert out1 == out2
