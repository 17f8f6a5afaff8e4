"""Command-line interface.

Subcommands: score, fit, predict, invert, select, dedup, report. Data
goes to stdout (or --out files), errors to stderr with a nonzero exit
code. Every run is deterministic given its flags and --seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import diversity, fitting, fixtures, refine, report as report_mod
from .corpus import Corpus, Tokenizer, load_jsonl, write_jsonl
from .errors import QTokensError
from .scaling_law import (
    PRESETS,
    QualityInputs,
    ScalingConstants,
    default_initial_guess,
    effective_tokens,
    invert_effective_tokens,
    predict_accuracy,
)
from .syntheticity import external_scorer_connect, score_corpus, train_kgram_scorer

SCORER_ENV = "QTOKENS_SCORER"

SCORE_COLUMNS = [
    "corpus",
    "tokens",
    "cr",
    "dr",
    "ttr",
    "mattr",
    "ngram_diversity_2",
    "ngram_diversity_3",
    "ngram_diversity_4",
    "self_repetition",
    "avg_nll",
    "perplexity",
    "syntheticity",
]


def _load_constants(spec: str) -> ScalingConstants:
    if spec in PRESETS:
        return PRESETS[spec]
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            return ScalingConstants.from_dict(json.load(fh))
    raise QTokensError(
        f"unknown constants {spec!r}: not a preset ({', '.join(sorted(PRESETS))}) "
        f"or a JSON file"
    )


def _make_scorer(spec: str | None, tokenizer: Tokenizer, kgram_k: int, smoothing: float):
    if spec is None:
        spec = os.environ.get(SCORER_ENV) or "none"
        if spec != "none" and not spec.startswith(("kgram:", "external:")):
            spec = f"external:{spec}"
    if spec == "none":
        return None
    if spec.startswith("kgram:"):
        reference = load_jsonl(spec.split(":", 1)[1], tokenizer)
        return train_kgram_scorer(reference, k=kgram_k, smoothing=smoothing, tokenizer=tokenizer)
    if spec.startswith("external:"):
        return external_scorer_connect(spec.split(":", 1)[1])
    raise QTokensError(f"unknown scorer spec {spec!r}")


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _close_scorer(scorer) -> None:
    close = getattr(scorer, "close", None)
    if close is not None:
        close()


def cmd_score(args) -> int:
    tokenizer = Tokenizer.from_spec(args.tokenizer)
    scorer = _make_scorer(args.scorer, tokenizer, args.kgram_k, args.kgram_smoothing)

    def score_one(path: str) -> dict:
        corpus = load_jsonl(path, tokenizer)
        rep = diversity.score_corpus_diversity(
            corpus,
            tokenizer=tokenizer,
            level=args.level,
            mattr_window=args.mattr_window,
        )
        row = {
            "corpus": os.path.basename(path),
            "tokens": corpus.total_tokens,
            "cr": rep.cr,
            "dr": rep.dr,
            "ttr": rep.ttr,
            "mattr": rep.mattr,
            "ngram_diversity_2": rep.ngram_diversity.get(2),
            "ngram_diversity_3": rep.ngram_diversity.get(3),
            "ngram_diversity_4": rep.ngram_diversity.get(4),
            "self_repetition": rep.self_repetition,
            "avg_nll": None,
            "perplexity": None,
            "syntheticity": None,
        }
        if scorer is not None:
            result = score_corpus(
                scorer, corpus, args.sample_fraction, args.seed, tokenizer=tokenizer
            )
            row["avg_nll"] = result.avg_nll
            row["perplexity"] = result.perplexity
            row["syntheticity"] = result.s
        return row

    try:
        if args.threads > 1 and scorer is None:
            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                rows = list(pool.map(score_one, args.inputs))
        else:
            rows = [score_one(path) for path in args.inputs]
    finally:
        _close_scorer(scorer)

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SCORE_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt_cell(v) for k, v in row.items()})
    sys.stdout.write(buf.getvalue())
    return 0


def _quality_rows_from_csv(path: str) -> list[tuple]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row_no, row in enumerate(reader, start=2):
            try:
                rows.append(
                    (
                        row["data_label"],
                        int(row["fraction_pct"]),
                        float(row["diversity"]),
                        float(row["syntheticity"]),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise QTokensError(f"quality CSV row {row_no}: {exc}") from exc
    return rows


def cmd_fit(args) -> int:
    if args.fixture:
        points = fixtures.fixture_points()
    elif args.experiments:
        quality = _quality_rows_from_csv(args.quality) if args.quality else None
        points = fitting.load_experiments_csv(args.experiments, quality)
    else:
        raise QTokensError("fit needs --experiments CSV or --fixture")
    if args.init:
        init = _load_constants(args.init).with_form(args.form)
    else:
        init = default_initial_guess(args.form)
    report = fitting.fit_constants(
        points,
        init,
        form=args.form,
        max_evals=args.max_evals,
        max_iters=args.max_iters,
        clamp_during_fit=args.clamp,
        n_restarts=args.restarts,
        restart_seed=args.seed,
    )
    if args.bootstrap_n > 0:
        report.se = fitting.bootstrap_se(
            points,
            report,
            n_resamples=args.bootstrap_n,
            seed=args.seed,
            max_evals=args.max_evals,
            max_iters=args.max_iters,
            clamp_during_fit=args.clamp,
        )
    payload = fitting.fit_report_to_dict(report, points, seed=args.seed)
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_predict(args) -> int:
    consts = _load_constants(args.constants)
    q_in = QualityInputs(d=args.d_tokens, dr=args.dr, s=args.s, n_millions=args.n_millions)
    dq = effective_tokens(q_in, consts)
    acc = predict_accuracy(q_in, consts)
    sys.stdout.write(f"accuracy {acc:.6f}\n")
    sys.stdout.write(f"effective_tokens {dq:.6e}\n")
    return 0


def cmd_invert(args) -> int:
    consts = _load_constants(args.constants)
    dq = invert_effective_tokens(consts, args.n_millions, args.loss)
    sys.stdout.write(f"effective_tokens {dq:.6e}\n")
    return 0


def _refinement_sidecar(
    before: Corpus, after: Corpus, seed: int, scorer=None, tokenizer=None,
    sample_frac: float = 0.25,
) -> dict:
    side = {
        "seed": seed,
        "before": {"documents": len(before), "tokens": before.total_tokens},
        "after": {"documents": len(after), "tokens": after.total_tokens},
    }
    for key, corpus in (("before", before), ("after", after)):
        try:
            side[key]["dr"] = diversity.diversity_score(corpus)
        except QTokensError:
            side[key]["dr"] = None
        if scorer is not None:
            try:
                result = score_corpus(scorer, corpus, sample_frac, seed, tokenizer=tokenizer)
                side[key]["syntheticity"] = result.s
            except QTokensError:
                side[key]["syntheticity"] = None
        else:
            side[key]["syntheticity"] = None
    return side


def _write_sidecar(path: str | None, payload: dict) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def cmd_select(args) -> int:
    tokenizer = Tokenizer.from_spec(args.tokenizer)
    raw = load_jsonl(args.input, tokenizer)
    target = load_jsonl(args.target, tokenizer)
    raw_agg, raw_docs = refine.corpus_features(raw, tokenizer=tokenizer)
    target_agg, _ = refine.corpus_features(target, tokenizer=tokenizer)
    weights = refine.importance_weights(raw_agg, target_agg, raw_docs, args.smoothing)
    selected, warnings = refine.select_by_weight(
        raw, weights, args.budget_tokens, mode=args.mode, seed=args.seed
    )
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    write_jsonl(selected, args.out)
    if args.report:
        scorer = _make_scorer(args.scorer, tokenizer, args.kgram_k, 1.0)
        try:
            side = _refinement_sidecar(raw, selected, args.seed, scorer, tokenizer)
        finally:
            _close_scorer(scorer)
        side["budget_tokens"] = args.budget_tokens
        side["mode"] = args.mode
        _write_sidecar(args.report, side)
    return 0


def cmd_dedup(args) -> int:
    tokenizer = Tokenizer.from_spec(args.tokenizer)
    corpus = load_jsonl(args.input, tokenizer)
    if args.mode == "exact":
        deduped = refine.dedup_exact(corpus)
    else:
        deduped = refine.dedup_near(
            corpus,
            shingle_n=args.shingle_n,
            n_hashes=args.n_hashes,
            bands=args.bands,
            seed=args.seed,
            keep=args.keep,
        )
    write_jsonl(deduped, args.out)
    if args.report:
        scorer = _make_scorer(args.scorer, tokenizer, args.kgram_k, 1.0)
        try:
            side = _refinement_sidecar(corpus, deduped, args.seed, scorer, tokenizer)
        finally:
            _close_scorer(scorer)
        side["mode"] = args.mode
        _write_sidecar(args.report, side)
    return 0


def cmd_report(args) -> int:
    with open(args.fit_report, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    paths = report_mod.write_report(payload, args.out_dir)
    for path in paths:
        sys.stdout.write(path + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtokens",
        description="Corpus quality metrics and the effective-token scaling law.",
    )
    parser.add_argument("--seed", type=int, default=42, help="global random seed")
    parser.add_argument("--threads", type=int, default=1, help="worker threads")
    parser.add_argument(
        "--tokenizer",
        default="whitespace",
        help="whitespace | byte | vocab:<path>",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="diversity/syntheticity metrics per corpus")
    p.add_argument("inputs", nargs="+", help="JSONL corpus files")
    p.add_argument("--scorer", default=None,
                   help=f"none | kgram:<ref.jsonl> | external:<target> "
                        f"(default from ${SCORER_ENV} if set)")
    p.add_argument("--sample-fraction", type=float, default=0.25)
    p.add_argument("--level", type=int, default=diversity.DEFAULT_LEVEL)
    p.add_argument("--mattr-window", type=int, default=diversity.DEFAULT_MATTR_WINDOW)
    p.add_argument("--kgram-k", type=int, default=3)
    p.add_argument("--kgram-smoothing", type=float, default=1.0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("fit", help="estimate scaling-law constants")
    p.add_argument("--experiments", help="experiments CSV path")
    p.add_argument("--quality", help="separate quality CSV (label, pct, dr, s)")
    p.add_argument("--fixture", action="store_true", help="use the embedded dataset")
    p.add_argument("--form", default="F1", choices=["F1", "F2", "F3", "F4"])
    p.add_argument("--init", help="initial constants: preset name or JSON path")
    p.add_argument("--max-evals", type=int, default=fitting.DEFAULT_MAX_EVALS)
    p.add_argument("--max-iters", type=int, default=fitting.DEFAULT_MAX_ITERS)
    p.add_argument("--restarts", type=int, default=0,
                   help="extra fits from perturbed initial guesses; best SSE wins")
    p.add_argument("--bootstrap-n", type=int, default=0)
    p.add_argument("--clamp", action="store_true", help="clamp predictions during the fit")
    p.add_argument("--out", help="write report JSON here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict accuracy and effective tokens")
    p.add_argument("--constants", required=True, help="preset name or JSON path")
    p.add_argument("--n-millions", type=float, required=True)
    p.add_argument("--d-tokens", type=float, required=True)
    p.add_argument("--dr", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("invert", help="effective tokens needed for a target score")
    p.add_argument("--constants", required=True)
    p.add_argument("--n-millions", type=float, required=True)
    p.add_argument("--loss", type=float, required=True, help="unclamped model score")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("select", help="importance-sampling coreset selection")
    p.add_argument("input", help="raw corpus JSONL")
    p.add_argument("--target", required=True, help="target corpus JSONL")
    p.add_argument("--budget-tokens", type=int, required=True)
    p.add_argument("--mode", default="topk", choices=["topk", "gumbel-sample"])
    p.add_argument("--smoothing", type=float, default=1e-4)
    p.add_argument("--out", required=True, help="selected corpus JSONL")
    p.add_argument("--report", help="sidecar JSON with before/after stats")
    p.add_argument("--scorer", default=None,
                   help="syntheticity scorer for the sidecar report (as in score)")
    p.add_argument("--kgram-k", type=int, default=3)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("dedup", help="remove exact or near duplicates")
    p.add_argument("input", help="corpus JSONL")
    p.add_argument("--mode", default="exact", choices=["exact", "near"])
    p.add_argument("--shingle-n", type=int, default=refine.DEFAULT_SHINGLE_N)
    p.add_argument("--n-hashes", type=int, default=refine.DEFAULT_N_HASHES)
    p.add_argument("--bands", type=int, default=refine.DEFAULT_BANDS)
    p.add_argument("--keep", default="longest", choices=["longest", "first"])
    p.add_argument("--out", required=True, help="deduplicated corpus JSONL")
    p.add_argument("--report", help="sidecar JSON with before/after stats")
    p.add_argument("--scorer", default=None,
                   help="syntheticity scorer for the sidecar report (as in score)")
    p.add_argument("--kgram-k", type=int, default=3)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("report", help="render SVG/CSV report files for a fit")
    p.add_argument("--fit-report", required=True, help="fit report JSON path")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QTokensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
