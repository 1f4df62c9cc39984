"""Overgeneration: apply every guard-matching template to a tree."""

from __future__ import annotations

from dataclasses import dataclass, field

from treeqg.conllu import DepTree, NoMatch, resolve_path
from treeqg.template import Template, TemplateSet, eval_expr


@dataclass
class GenCandidate:
    """One generated QA pair plus provenance and (once ranked) its score."""

    question: str
    answer: str
    template_id: int
    sent_id: str
    source_text: str
    score: float | None = None
    score_parts: dict[str, float] = field(default_factory=dict)


def sentence_text(tree: DepTree) -> str:
    """The normalized surface string candidates are generated from."""
    return " ".join(t.form for t in tree.tokens).lower()


def guard_matches(t: Template, tree: DepTree) -> bool:
    """True when every guard path resolves and the root UPOS agrees."""
    if t.guard.root_upos is not None and tree.root.upos != t.guard.root_upos:
        return False
    for path in t.guard.paths:
        try:
            resolve_path(tree, path)
        except NoMatch:
            return False
    return True


def apply_template(t: Template, tree: DepTree, template_id: int = -1) -> GenCandidate:
    """Evaluate a template against a tree into a lowercased QA candidate.

    Raises NoMatch when any expression fails to resolve (possible even after
    a guard match, since hints can steer evaluation down a different branch).
    """
    question = " ".join(eval_expr(e, tree) for e in t.question).lower()
    answer = " ".join(eval_expr(e, tree) for e in t.answer).lower()
    return GenCandidate(
        question=question,
        answer=answer,
        template_id=template_id,
        sent_id=tree.sent_id,
        source_text=sentence_text(tree),
    )


def overgenerate(ts: TemplateSet, tree: DepTree) -> list[GenCandidate]:
    """All successful template applications, in template order.

    Candidates that fail mid-evaluation or come out with an empty question
    or answer are dropped; duplicates are kept (filtering happens later).
    """
    candidates: list[GenCandidate] = []
    for template_id, t in enumerate(ts):
        if not guard_matches(t, tree):
            continue
        try:
            candidate = apply_template(t, tree, template_id)
        except NoMatch:
            continue
        if candidate.question and candidate.answer:
            candidates.append(candidate)
    return candidates
