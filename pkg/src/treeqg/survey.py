"""Human evaluation plumbing: triple export, judgement store, HTTP API.

Judges rate each (sentence, question, answer) triple against nine Likert
statements (1 = disagree .. 4 = agree). The judgement store is an
append-only JSONL file; resubmissions are kept and the latest record per
(judge, triple) wins during analysis.
"""

from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass, asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence, Union

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field, field_validator

from treeqg.metrics import AgreementResult, GammaNA, RatingMatrix, agreement


@dataclass(frozen=True)
class Criterion:
    """One Likert statement; direction says whether agreement is good."""

    code: str
    direction: str
    statement_en: str
    statement_sv: str


CRITERIA: tuple[Criterion, ...] = (
    Criterion(
        "C1", "up",
        "The question is grammatically correct.",
        "Frågan är grammatiskt korrekt.",
    ),
    Criterion(
        "C2", "up",
        "The question makes sense.",
        "Frågan är begriplig.",
    ),
    Criterion(
        "C3", "down",
        "The question would be clearer with more information.",
        "Frågan skulle bli tydligare med mer information.",
    ),
    Criterion(
        "C4", "down",
        "The question would be clearer with less information.",
        "Frågan skulle bli tydligare med mindre information.",
    ),
    Criterion(
        "C5", "up",
        "The question is relevant to the sentence shown.",
        "Frågan är relevant för den visade meningen.",
    ),
    Criterion(
        "C6", "up",
        "The suggested answer answers the question correctly.",
        "Det föreslagna svaret besvarar frågan korrekt.",
    ),
    Criterion(
        "C7", "down",
        "The suggested answer would be better phrased differently.",
        "Det föreslagna svaret skulle bli bättre med en annan formulering.",
    ),
    Criterion(
        "C8", "down",
        "The suggested answer would be clearer with more information.",
        "Det föreslagna svaret skulle bli tydligare med mer information.",
    ),
    Criterion(
        "C9", "down",
        "The suggested answer would be clearer with less information.",
        "Det föreslagna svaret skulle bli tydligare med mindre information.",
    ),
)

CRITERION_CODES = tuple(c.code for c in CRITERIA)
ANSWER_CRITERIA = ("C6", "C7", "C8", "C9")

GUIDELINES = {
    "en": (
        "You will see one sentence at a time together with a question and a "
        "suggested answer. For each statement, choose how much you agree, "
        "from 1 (do not agree) to 4 (fully agree). If the question is "
        "impossible to understand, choose 1 for every statement about the "
        "suggested answer. Please ignore formatting artifacts such as "
        "missing punctuation or capitalization."
    ),
    "sv": (
        "Du ser en mening i taget tillsammans med en fråga och ett "
        "föreslaget svar. Ange för varje påstående hur mycket du håller "
        "med, från 1 (håller inte med) till 4 (håller helt med). Om frågan "
        "inte går att förstå, välj 1 för alla påståenden som gäller det "
        "föreslagna svaret. Bortse från formateringsfel, till exempel "
        "skiljetecken eller versaler som saknas."
    ),
}


@dataclass(frozen=True)
class EvalTriple:
    """One survey item: a sentence with a QA pair of known origin."""

    triple_id: str
    source_sentence: str
    question: str
    answer: str
    origin: str  # "gold" | "generated"
    set_name: str  # "dev" | "test"

    def to_json(self) -> dict:
        record = asdict(self)
        record["set"] = record.pop("set_name")
        return record


class StoreError(ValueError):
    """The judgement store or triple export cannot be read."""


def pair_survey_triples(
    gold_rows: Sequence[tuple[str, str, str]],
    generated: Sequence[Mapping],
    set_name: str,
) -> tuple[list[EvalTriple], list[str]]:
    """Pair the top generated QA of each sentence with its gold QA.

    gold_rows are (sent_id, question, answer); generated are ranked
    candidate records (the first record per sent_id is its best one).
    Returns the triples plus warnings for sentences without a gold QA.
    """
    gold_by_sent: dict[str, tuple[str, str]] = {}
    for sent_id, question, answer in gold_rows:
        gold_by_sent.setdefault(sent_id, (question, answer))
    triples: list[EvalTriple] = []
    warnings: list[str] = []
    seen: set[str] = set()
    for record in generated:
        sent_id = record["sent_id"]
        if sent_id in seen:
            continue
        seen.add(sent_id)
        gold = gold_by_sent.get(sent_id)
        if gold is None:
            warnings.append(f"no gold question for sentence {sent_id!r}; skipped")
            continue
        sentence = record.get("source_text", "")
        triples.append(
            EvalTriple(
                triple_id=f"{set_name}-{sent_id}-gold",
                source_sentence=sentence,
                question=gold[0],
                answer=gold[1],
                origin="gold",
                set_name=set_name,
            )
        )
        triples.append(
            EvalTriple(
                triple_id=f"{set_name}-{sent_id}-gen",
                source_sentence=sentence,
                question=record["question"],
                answer=record["answer"],
                origin="generated",
                set_name=set_name,
            )
        )
    return triples, warnings


def write_eval_triples(
    triples: Sequence[EvalTriple], path: str | Path, seed: int = 0
) -> None:
    """Write the survey export: a meta line, then one JSON triple per line,
    shuffled deterministically by seed."""
    shuffled = list(triples)
    random.Random(seed).shuffle(shuffled)
    lines = [json.dumps({"kind": "meta", "seed": seed, "count": len(shuffled)})]
    lines.extend(json.dumps(t.to_json(), ensure_ascii=False) for t in shuffled)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_eval_triples(path: str | Path) -> tuple[list[EvalTriple], int]:
    """Read a survey export; returns the triples and the recorded seed."""
    triples: list[EvalTriple] = []
    seed = 0
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as err:
            raise StoreError(f"{path}:{lineno}: bad JSON: {err}") from None
        if record.get("kind") == "meta":
            seed = int(record.get("seed", 0))
            continue
        try:
            triples.append(
                EvalTriple(
                    triple_id=record["triple_id"],
                    source_sentence=record["source_sentence"],
                    question=record["question"],
                    answer=record["answer"],
                    origin=record["origin"],
                    set_name=record["set"],
                )
            )
        except KeyError as err:
            raise StoreError(f"{path}:{lineno}: missing field {err}") from None
    return triples, seed


def load_judgements(path: str | Path) -> list[dict]:
    """Read the append-only judgement store; corrupt lines are fatal."""
    store = Path(path)
    if not store.exists():
        return []
    records: list[dict] = []
    for lineno, line in enumerate(
        store.read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as err:
            raise StoreError(f"{path}:{lineno}: corrupt store line: {err}") from None
        if not isinstance(record, dict) or "judge_id" not in record:
            raise StoreError(f"{path}:{lineno}: corrupt store record")
        records.append(record)
    return records


def latest_judgements(records: Sequence[Mapping]) -> dict[tuple[str, str], Mapping]:
    """Last record per (judge, triple): resubmission wins."""
    latest: dict[tuple[str, str], Mapping] = {}
    for record in records:
        latest[(record["judge_id"], record["triple_id"])] = record
    return latest


def session_order(triple_ids: Sequence[str], seed: int, judge_id: str) -> list[str]:
    """Deterministic per-judge presentation order."""
    order = list(triple_ids)
    random.Random(f"{seed}:{judge_id}").shuffle(order)
    return order


class JudgementIn(BaseModel):
    judge_id: str = Field(min_length=1)
    triple_id: str = Field(min_length=1)
    scores: dict[str, int]

    @field_validator("scores")
    @classmethod
    def _complete_scores(cls, scores: dict[str, int]) -> dict[str, int]:
        if set(scores) != set(CRITERION_CODES):
            raise ValueError(f"scores must cover exactly {', '.join(CRITERION_CODES)}")
        for code, value in scores.items():
            if not 1 <= value <= 4:
                raise ValueError(f"{code}: score {value} outside 1..4")
        return scores


def build_app(
    triples: Sequence[EvalTriple],
    store_path: str | Path,
    seed: int = 0,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Assemble the survey API around a triple export and a store file."""
    by_id = {t.triple_id: t for t in triples}
    ids = [t.triple_id for t in triples]
    store = Path(store_path)
    records = load_judgements(store)  # fail fast on a corrupt store
    lock = threading.Lock()
    app = FastAPI(title="treeqg survey")

    criteria_payload = [
        {
            "code": c.code,
            "direction": c.direction,
            "statement": {"en": c.statement_en, "sv": c.statement_sv},
        }
        for c in CRITERIA
    ]

    @app.get("/api/session/{judge_id}")
    def get_session(judge_id: str) -> dict:
        with lock:
            judged = sorted(
                {r["triple_id"] for r in records if r["judge_id"] == judge_id}
            )
        return {
            "judge_id": judge_id,
            "order": session_order(ids, seed, judge_id),
            "judged": judged,
            "total": len(ids),
        }

    @app.get("/api/triple/{triple_id}")
    def get_triple(triple_id: str) -> dict:
        triple = by_id.get(triple_id)
        if triple is None:
            raise HTTPException(status_code=404, detail=f"unknown triple {triple_id!r}")
        return {
            "triple": triple.to_json(),
            "guidelines": GUIDELINES,
            "criteria": criteria_payload,
        }

    @app.post("/api/judgement")
    def post_judgement(judgement: JudgementIn) -> dict:
        if judgement.triple_id not in by_id:
            raise HTTPException(
                status_code=422, detail=f"unknown triple {judgement.triple_id!r}"
            )
        record = {
            "judge_id": judgement.judge_id,
            "triple_id": judgement.triple_id,
            "scores": judgement.scores,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        with lock:
            with store.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            records.append(record)
        return record

    @app.get("/api/export")
    def get_export() -> PlainTextResponse:
        with lock:
            latest = latest_judgements(records)
            lines = []
            for record in records:
                current = latest[(record["judge_id"], record["triple_id"])]
                flagged = dict(record)
                flagged["superseded"] = current is not record
                lines.append(json.dumps(flagged, ensure_ascii=False))
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(body, media_type="application/x-ndjson")

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


@dataclass(frozen=True)
class IaaRow:
    """Agreement for one criterion within one (set, origin) slice."""

    criterion: str
    direction: str
    set_name: str
    origin: str
    n_items: int
    n_raters: int
    result: AgreementResult


def iaa_report(
    records: Sequence[Mapping], triples: Sequence[EvalTriple] | None = None
) -> list[IaaRow]:
    """Agreement per criterion, split by (set, origin) when triples are given.

    Within each slice only judges who rated every item are used; slices
    with fewer than two judged items or two complete judges are left out.
    """
    latest = latest_judgements(records)
    if triples:
        meta = {t.triple_id: (t.set_name, t.origin) for t in triples}
        slice_keys: list[tuple[str, str]] = []
        for t in triples:
            key = (t.set_name, t.origin)
            if key not in slice_keys:
                slice_keys.append(key)
        slices = {
            key: sorted(tid for tid, m in meta.items() if m == key)
            for key in slice_keys
        }
    else:
        all_ids = sorted({tid for _, tid in latest})
        slices = {("all", "all"): all_ids}
    judges = sorted({judge for judge, _ in latest})
    rows: list[IaaRow] = []
    for (set_name, origin), slice_ids in slices.items():
        judged_ids = [tid for tid in slice_ids if any((j, tid) in latest for j in judges)]
        if len(judged_ids) < 2:
            continue
        complete = [
            j for j in judges if all((j, tid) in latest for tid in judged_ids)
        ]
        if len(complete) < 2:
            continue
        for criterion in CRITERIA:
            scores = tuple(
                tuple(
                    latest[(judge, tid)]["scores"][criterion.code]
                    for judge in complete
                )
                for tid in judged_ids
            )
            matrix = RatingMatrix(
                items=tuple(judged_ids),
                raters=tuple(complete),
                scores=scores,
                k=4,
                criterion=criterion.code,
                direction=criterion.direction,
            )
            rows.append(
                IaaRow(
                    criterion=criterion.code,
                    direction=criterion.direction,
                    set_name=set_name,
                    origin=origin,
                    n_items=len(judged_ids),
                    n_raters=len(complete),
                    result=agreement(matrix),
                )
            )
    return rows


def format_gamma(gamma: Union[float, GammaNA]) -> str:
    if isinstance(gamma, GammaNA):
        return str(gamma)
    return f"{gamma:.6f}"


def write_iaa_tsv(rows: Sequence[IaaRow], path: str | Path) -> None:
    lines = ["criterion\tdirection\tset\torigin\titems\traters\tkappa\tgamma"]
    for row in rows:
        lines.append(
            "\t".join(
                (
                    row.criterion,
                    row.direction,
                    row.set_name,
                    row.origin,
                    str(row.n_items),
                    str(row.n_raters),
                    f"{row.result.kappa:.6f}",
                    format_gamma(row.result.gamma),
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
