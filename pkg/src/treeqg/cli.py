"""Command-line entry points for the full pipeline.

Commands: induce, build-models, generate, export-survey, serve, iaa,
metrics, stats. All structured outputs are plain text (TSV or JSONL) so
they diff and version cleanly.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from treeqg import conllu
from treeqg.config import Config, load_config
from treeqg.generate import overgenerate
from treeqg.induce import (
    TrainingTriple,
    build_idf,
    group_documents,
    induce_all,
    template_stats,
)
from treeqg.metrics import bleu_n, cider, first_two_words_dist, rouge_l_corpus
from treeqg.rank import (
    RankModels,
    StageCounts,
    basic_filter,
    build_morph_model,
    build_qword_model,
    generation_stats,
    load_idf_model,
    load_morph_model,
    load_qword_model,
    mean_filter,
    save_idf_model,
    save_morph_model,
    save_qword_model,
    score_candidate,
)
from treeqg.survey import (
    StoreError,
    iaa_report,
    load_eval_triples,
    load_judgements,
    pair_survey_triples,
    write_eval_triples,
    write_iaa_tsv,
)
from treeqg.template import TemplateSet, load_templates, save_templates


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _config_from(args: argparse.Namespace) -> Config:
    if getattr(args, "config", None):
        return load_config(args.config)
    return Config()


def _read_triples_tsv(path: str) -> list[tuple[str, str, str]]:
    rows: list[tuple[str, str, str]] = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 tab-separated columns")
        rows.append((fields[0], fields[1], fields[2]))
    return rows


def _training_triples(
    conllu_path: str, triples_path: str
) -> tuple[list[TrainingTriple], list[conllu.DepTree], int]:
    trees = conllu.load_conllu(conllu_path)
    by_id: dict[str, conllu.DepTree] = {}
    for tree in trees:
        by_id.setdefault(tree.sent_id, tree)
    triples: list[TrainingTriple] = []
    missing = 0
    for sent_id, question, answer in _read_triples_tsv(triples_path):
        tree = by_id.get(sent_id)
        if tree is None:
            missing += 1
            continue
        triples.append(TrainingTriple(tree=tree, question=question, answer=answer))
    return triples, trees, missing


def cmd_induce(args: argparse.Namespace) -> int:
    try:
        cfg = _config_from(args)
        triples, trees, missing = _training_triples(args.conllu, args.triples)
    except (OSError, ValueError) as err:
        return _fail(str(err))
    if missing:
        print(f"warning: {missing} triples had no matching sentence", file=sys.stderr)
    if not triples:
        return _fail("no usable training triples")
    idf = build_idf(group_documents(trees))
    templates, report = induce_all(triples, idf, cfg.theta_content)
    if not len(templates):
        return _fail(
            "no templates induced "
            f"(alignment failures: {report.alignment_failures}, "
            f"induction failures: {report.induction_failures})"
        )
    save_templates(templates, args.out)
    stats = template_stats(templates)
    print(
        f"triples\t{report.total}\n"
        f"induced\t{report.induced}\n"
        f"alignment_failures\t{report.alignment_failures}\n"
        f"induction_failures\t{report.induction_failures}\n"
        f"templates\t{stats.count}\n"
        f"support_mean\t{stats.support_mean:.4f}\n"
        f"support_std\t{stats.support_std:.4f}\n"
        f"support_median\t{stats.support_median:g}\n"
        f"support_range\t{stats.support_min}-{stats.support_max}"
    )
    return 0


def cmd_build_models(args: argparse.Namespace) -> int:
    try:
        cfg = _config_from(args)
        triples, trees, missing = _training_triples(args.conllu, args.triples)
        treebank = conllu.load_conllu(args.treebank)
    except (OSError, ValueError) as err:
        return _fail(str(err))
    if missing:
        print(f"warning: {missing} triples had no matching sentence", file=sys.stderr)
    if not treebank:
        return _fail("empty morphology treebank")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_idf_model(build_idf(group_documents(trees)), out / "idf.txt")
    save_morph_model(
        build_morph_model(treebank, n=cfg.ngram_order, alpha=cfg.alpha),
        out / "morph.txt",
    )
    save_qword_model(build_qword_model(triples, alpha=cfg.alpha), out / "qword.txt")
    print(f"models written to {out}")
    return 0


def load_models(models_dir: str | Path, weights: tuple[float, float]) -> RankModels:
    models = Path(models_dir)
    return RankModels(
        idf=load_idf_model(models / "idf.txt"),
        morph=load_morph_model(models / "morph.txt"),
        qword=load_qword_model(models / "qword.txt"),
        weights=weights,
    )


def run_pipeline(
    templates: TemplateSet,
    trees: list[conllu.DepTree],
    models: RankModels,
    cfg: Config,
) -> tuple[list, dict[str, StageCounts]]:
    """Overgenerate, score, and filter per sentence; candidates come back
    ranked (descending score) within each sentence."""
    survivors = []
    stages: dict[str, StageCounts] = {}
    for tree in trees:
        candidates = overgenerate(templates, tree)
        for c in candidates:
            score_candidate(c, tree, templates.templates[c.template_id], models)
        kept = basic_filter(candidates, rules=cfg.filters)
        final = mean_filter(kept)
        ranked = sorted(final, key=lambda c: -(c.score or 0.0))
        stages[tree.sent_id] = StageCounts(len(candidates), len(kept), len(final))
        survivors.extend(ranked)
    return survivors, stages


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        cfg = _config_from(args)
        templates = load_templates(args.templates)
        trees = conllu.load_conllu(args.conllu)
        models = load_models(args.models, cfg.weights)
    except (OSError, ValueError) as err:
        return _fail(str(err))
    survivors, stages = run_pipeline(templates, trees, models, cfg)
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for c in survivors:
            fh.write(
                json.dumps(
                    {
                        "sent_id": c.sent_id,
                        "template_id": c.template_id,
                        "question": c.question,
                        "answer": c.answer,
                        "score": c.score,
                        "score_parts": c.score_parts,
                        "source_text": c.source_text,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    stats = generation_stats(stages)
    print(
        f"sentences\t{stats.sentences}\n"
        f"generated\t{stats.total_generated}\n"
        f"ss_with_candidates\t{stats.ss_applicable}\n"
        f"ss_after_basic_filter\t{stats.ss_after_basic}\n"
        f"ss_after_mean_filter\t{stats.ss_after_mean}\n"
        f"pct_after_mean_filter\t{stats.pct_after_mean:.1f}\n"
        f"per_ss_mean\t{stats.per_ss_mean:.4f}\n"
        f"per_ss_std\t{stats.per_ss_std:.4f}\n"
        f"per_ss_median\t{stats.per_ss_median:g}\n"
        f"per_ss_max\t{stats.per_ss_max}"
    )
    return 0


def _read_generated(path: str) -> list[dict]:
    records: list[dict] = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as err:
            raise ValueError(f"{path}:{lineno}: bad JSON: {err}") from None
        if record.get("kind") == "meta":
            continue
        records.append(record)
    return records


def cmd_export_survey(args: argparse.Namespace) -> int:
    try:
        gold = _read_triples_tsv(args.gold)
        generated = _read_generated(args.generated)
    except (OSError, ValueError) as err:
        return _fail(str(err))
    triples, warnings = pair_survey_triples(gold, generated, args.set)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if not triples:
        return _fail("nothing to export")
    write_eval_triples(triples, args.out, seed=args.seed)
    print(f"exported {len(triples)} triples to {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from treeqg.survey import build_app

    try:
        triples, export_seed = load_eval_triples(args.triples)
        seed = args.seed if args.seed is not None else export_seed
        app = build_app(triples, args.store, seed=seed, ui_dir=args.ui)
    except (OSError, StoreError) as err:
        return _fail(str(err))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_iaa(args: argparse.Namespace) -> int:
    try:
        records = load_judgements(args.store)
    except StoreError as err:
        return _fail(str(err))
    judges = {r["judge_id"] for r in records}
    if len(judges) < 2:
        return _fail("agreement needs at least two judges in the store")
    triples = None
    if args.triples:
        try:
            triples, _ = load_eval_triples(args.triples)
        except (OSError, StoreError) as err:
            return _fail(str(err))
    rows = iaa_report(records, triples)
    if not rows:
        return _fail("no slice has two judges with complete overlapping items")
    write_iaa_tsv(rows, args.out)
    print(f"wrote {len(rows)} agreement rows to {args.out}")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    try:
        cfg = _config_from(args)
        rows = _read_triples_tsv(args.pairs)
    except (OSError, ValueError) as err:
        return _fail(str(err))
    if not rows:
        return _fail("no evaluation pairs")
    hypotheses = [hyp for _, hyp, _ in rows]
    references = [ref for _, _, ref in rows]
    lines = []
    for n, score in enumerate(bleu_n(hypotheses, references, 4), start=1):
        lines.append(f"bleu_{n}\t{score:.6f}")
    lines.append(
        f"rouge_l\t{rouge_l_corpus(hypotheses, references, cfg.rouge_beta):.6f}"
    )
    if len(rows) >= 2:
        lines.append(f"cider\t{cider(hypotheses, references):.6f}")
    else:
        print("warning: CIDEr skipped (needs at least two items)", file=sys.stderr)
    body = "\n".join(lines)
    Path(args.out).write_text(body + "\n", encoding="utf-8")
    print(body)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    try:
        lines = Path(args.questions).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        return _fail(str(err))
    questions = []
    for line in lines:
        if not line.strip():
            continue
        if args.column is not None:
            fields = line.split("\t")
            if args.column >= len(fields):
                continue
            questions.append(fields[args.column])
        else:
            questions.append(line)
    dist = first_two_words_dist(questions)
    body = "\n".join(f"{bigram}\t{count}" for bigram, count in dist)
    Path(args.out).write_text(body + "\n", encoding="utf-8")
    if args.csv:
        with Path(args.csv).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bigram", "count"])
            writer.writerows(dist)
    print(body)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeqg",
        description="Dependency-tree template question generation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("induce", help="induce templates from training triples")
    p.add_argument("--conllu", required=True, help="parsed training sentences")
    p.add_argument("--triples", required=True, help="TSV: sent_id, question, answer")
    p.add_argument("--out", required=True, help="template file to write")
    p.add_argument("--config", help="config file")
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("build-models", help="build idf, morph, and question-word models")
    p.add_argument("--conllu", required=True, help="parsed training sentences")
    p.add_argument("--triples", required=True, help="TSV: sent_id, question, answer")
    p.add_argument("--treebank", required=True, help="CoNLL-U treebank for morphology")
    p.add_argument("--out", required=True, help="directory for the model files")
    p.add_argument("--config", help="config file")
    p.set_defaults(func=cmd_build_models)

    p = sub.add_parser("generate", help="generate ranked QA pairs for new sentences")
    p.add_argument("--templates", required=True, help="template file")
    p.add_argument("--conllu", required=True, help="parsed input sentences")
    p.add_argument("--models", required=True, help="model directory")
    p.add_argument("--out", required=True, help="JSONL candidate file to write")
    p.add_argument("--config", help="config file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("export-survey", help="pair generated and gold QA for judging")
    p.add_argument("--gold", required=True, help="TSV: sent_id, question, answer")
    p.add_argument("--generated", required=True, help="JSONL from generate")
    p.add_argument("--set", required=True, choices=("dev", "test"), help="data split")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.add_argument("--out", required=True, help="survey triples file to write")
    p.set_defaults(func=cmd_export_survey)

    p = sub.add_parser("serve", help="run the survey HTTP API")
    p.add_argument("--triples", required=True, help="survey triples file")
    p.add_argument("--store", required=True, help="append-only judgement store")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=None, help="override the export seed")
    p.add_argument("--ui", help="directory with the built survey UI")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("iaa", help="inter-annotator agreement from the store")
    p.add_argument("--store", required=True, help="judgement store")
    p.add_argument("--triples", help="survey triples file (enables per-slice rows)")
    p.add_argument("--out", required=True, help="TSV report to write")
    p.set_defaults(func=cmd_iaa)

    p = sub.add_parser("metrics", help="BLEU, ROUGE-L, and CIDEr for QA pairs")
    p.add_argument("--pairs", required=True, help="TSV: id, hypothesis, reference")
    p.add_argument("--out", required=True, help="TSV report to write")
    p.add_argument("--config", help="config file")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("stats", help="question-opening bigram distribution")
    p.add_argument("--questions", required=True, help="question file (one per line)")
    p.add_argument("--column", type=int, help="take this tab column of each line")
    p.add_argument("--out", required=True, help="TSV distribution to write")
    p.add_argument("--csv", help="also write a plot-ready CSV")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
