"""Template induction from (tree, question, answer) training triples.

Each question token is matched against the source tree: a contiguous
multi-token span equal to a complete subtree yield becomes a subtree slot,
a single token equal to some token's form or lemma becomes a node slot,
and anything else stays literal. Unmatched literals that look like content
words (high IDF) abort the induction, since the resulting template could
never generalize. The answer becomes a single subtree slot when it is a
complete subtree, else one node slot per token.

Every slot is verified by re-evaluating it on the source tree, so a
successfully induced template always regenerates its own training pair.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from treeqg.conllu import DepTree, Token, token_path, subtree_yield
from treeqg.template import (
    Literal,
    NodeExpr,
    SubtreeExpr,
    Template,
    TemplateExpr,
    TemplateSet,
    eval_expr,
    make_guard,
)

_PUNCT = set("?!.,:;")


class AlignmentFailure(Exception):
    """The answer cannot be located in the source sentence."""


class InductionFailure(Exception):
    """No usable template can be induced from the triple."""


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization with leading/trailing punctuation detached."""
    out: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        trail: list[str] = []
        while chunk and chunk[0] in _PUNCT:
            lead.append(chunk[0])
            chunk = chunk[1:]
        while chunk and chunk[-1] in _PUNCT:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        out.extend(lead)
        if chunk:
            out.append(chunk)
        out.extend(reversed(trail))
    return out


@dataclass(frozen=True)
class TrainingTriple:
    """A source tree with a gold question and an answer drawn from it."""

    tree: DepTree
    question: str
    answer: str


@dataclass(frozen=True)
class IdfModel:
    """Inverse document frequencies over corpus lemmas.

    idf(w) = ln(doc_count / df(w)); a word never seen in any document is
    scored as if it occurred in half a document: ln(doc_count / 0.5).
    """

    idf: Mapping[str, float]
    doc_count: int
    df: Mapping[str, int] = field(default_factory=dict, compare=False)

    def lookup(self, word: str) -> float:
        folded = word.casefold()
        if folded in self.idf:
            return self.idf[folded]
        return math.log(self.doc_count / 0.5)


def build_idf(documents: Sequence[Sequence[DepTree]]) -> IdfModel:
    """Document frequencies of casefolded lemmas, one count per document."""
    if not documents:
        raise ValueError("cannot build an IDF model from an empty corpus")
    df: dict[str, int] = {}
    for doc in documents:
        lemmas = {t.lemma.casefold() for tree in doc for t in tree.tokens}
        for lemma in lemmas:
            df[lemma] = df.get(lemma, 0) + 1
    n = len(documents)
    idf = {lemma: math.log(n / count) for lemma, count in df.items()}
    return IdfModel(idf=idf, doc_count=n, df=df)


def group_documents(trees: Sequence[DepTree]) -> list[list[DepTree]]:
    """Split a treebank into documents on '# newdoc' comment boundaries.

    Without any newdoc markers every sentence counts as its own document.
    """
    def starts_doc(tree: DepTree) -> bool:
        return any(c.startswith("# newdoc") for c in tree.comments)

    if not any(starts_doc(t) for t in trees):
        return [[t] for t in trees]
    docs: list[list[DepTree]] = []
    current: list[DepTree] = []
    for tree in trees:
        if starts_doc(tree) and current:
            docs.append(current)
            current = []
        current.append(tree)
    if current:
        docs.append(current)
    return docs


def locate_answer(tree: DepTree, answer: str) -> tuple[tuple[Token, ...], Token | None]:
    """Find the answer as a contiguous token span; leftmost match wins.

    Returns (span, covering node). The covering node is the span token whose
    subtree yield is exactly the span, when such a token exists. Raises
    AlignmentFailure when the answer does not occur in the sentence.
    """
    wanted = [t.casefold() for t in tokenize(answer)]
    if not wanted:
        raise AlignmentFailure("empty answer")
    forms = [t.form.casefold() for t in tree.tokens]
    for start in range(len(forms) - len(wanted) + 1):
        if forms[start : start + len(wanted)] != wanted:
            continue
        span = tree.tokens[start : start + len(wanted)]
        span_ids = [t.id for t in span]
        covering = None
        for tok in span:
            if [y.id for y in subtree_yield(tree, tok)] == span_ids:
                covering = tok
                break
        return tuple(span), covering
    raise AlignmentFailure(
        f"answer {answer!r} is not a token subsequence of {tree.sent_id or 'the sentence'}"
    )


def _is_content(token: str) -> bool:
    return any(ch.isalnum() for ch in token)


def _hint_for(node: Token) -> int | None:
    # The root is unambiguous; only non-root slots carry a position hint.
    return node.id if node.head != 0 else None


def _checked(expr: TemplateExpr, tree: DepTree, want: str) -> TemplateExpr | None:
    """Keep expr only if it actually regenerates the training text."""
    try:
        got = eval_expr(expr, tree)
    except LookupError:
        return None
    return expr if got.casefold() == want else None


def _node_expr_for(tree: DepTree, folded: str) -> TemplateExpr | None:
    for tok in tree.tokens:
        if tok.form.casefold() == folded:
            expr = _checked(
                NodeExpr(token_path(tree, tok), "form", _hint_for(tok)), tree, folded
            )
            if expr is not None:
                return expr
    for tok in tree.tokens:
        if tok.lemma.casefold() == folded:
            expr = _checked(
                NodeExpr(token_path(tree, tok), "lemma", _hint_for(tok)), tree, folded
            )
            if expr is not None:
                return expr
    return None


def _match_question_at(
    tree: DepTree,
    yields: list[tuple[Token, list[str]]],
    folded: list[str],
    start: int,
) -> tuple[TemplateExpr, int] | None:
    longest = max((len(y) for _, y in yields), default=0)
    for length in range(min(longest, len(folded) - start), 1, -1):
        want = folded[start : start + length]
        for node, node_yield in yields:
            if node_yield != want:
                continue
            expr = _checked(
                SubtreeExpr(token_path(tree, node), _hint_for(node)),
                tree,
                " ".join(want),
            )
            if expr is not None:
                return expr, length
    expr = _node_expr_for(tree, folded[start])
    if expr is not None:
        return expr, 1
    return None


def _induce_answer(tree: DepTree, answer: str) -> tuple[TemplateExpr, ...]:
    span, covering = locate_answer(tree, answer)
    span_text = " ".join(t.form.casefold() for t in span)
    if covering is not None:
        expr = _checked(
            SubtreeExpr(token_path(tree, covering), _hint_for(covering)),
            tree,
            span_text,
        )
        if expr is not None:
            return (expr,)
    exprs: list[TemplateExpr] = []
    for tok in span:
        expr = _checked(
            NodeExpr(token_path(tree, tok), "form", _hint_for(tok)),
            tree,
            tok.form.casefold(),
        )
        if expr is None:
            raise AlignmentFailure(
                f"answer token {tok.form!r} is not reachable by its relation path"
            )
        exprs.append(expr)
    return tuple(exprs)


def induce_pair(
    triple: TrainingTriple, idf: IdfModel, theta_content: float = 1.0
) -> Template:
    """Induce a template from one training triple.

    Raises AlignmentFailure when the answer cannot be aligned and
    InductionFailure when a content word (idf above theta_content) would be
    frozen into the template as a literal.
    """
    tree = triple.tree
    q_tokens = tokenize(triple.question)
    if not q_tokens:
        raise InductionFailure("empty question")
    folded = [t.casefold() for t in q_tokens]
    yields = [
        (tok, [y.form.casefold() for y in subtree_yield(tree, tok)])
        for tok in tree.tokens
    ]
    question: list[TemplateExpr] = []
    i = 0
    while i < len(q_tokens):
        match = _match_question_at(tree, yields, folded, i)
        if match is not None:
            expr, consumed = match
            question.append(expr)
            i += consumed
            continue
        token = q_tokens[i]
        if _is_content(token) and idf.lookup(token) > theta_content:
            raise InductionFailure(
                f"unmatched content word {token!r} (idf {idf.lookup(token):.3f})"
            )
        question.append(Literal(token))
        i += 1
    answer = _induce_answer(tree, triple.answer)
    return Template(
        question=tuple(question),
        answer=answer,
        guard=make_guard(question, answer, root_upos=tree.root.upos),
        support=1,
        sources=(tree.sent_id,) if tree.sent_id else (),
    )


@dataclass
class InductionReport:
    """Outcome counts for a batch induction run."""

    total: int = 0
    induced: int = 0
    alignment_failures: int = 0
    induction_failures: int = 0


def induce_all(
    triples: Sequence[TrainingTriple], idf: IdfModel, theta_content: float = 1.0
) -> tuple[TemplateSet, InductionReport]:
    """Induce over a corpus of triples, merging structurally identical templates."""
    report = InductionReport(total=len(triples))
    induced: list[Template] = []
    for triple in triples:
        try:
            induced.append(induce_pair(triple, idf, theta_content))
            report.induced += 1
        except AlignmentFailure:
            report.alignment_failures += 1
        except InductionFailure:
            report.induction_failures += 1
    return TemplateSet.merged(induced), report


@dataclass(frozen=True)
class TemplateStats:
    """Distribution of template support counts."""

    count: int
    support_mean: float
    support_std: float
    support_median: float
    support_min: int
    support_max: int


def template_stats(ts: TemplateSet) -> TemplateStats:
    """Support-count statistics; std is the population standard deviation."""
    supports = [t.support for t in ts]
    if not supports:
        return TemplateStats(0, 0.0, 0.0, 0.0, 0, 0)
    return TemplateStats(
        count=len(supports),
        support_mean=statistics.mean(supports),
        support_std=statistics.pstdev(supports),
        support_median=statistics.median(supports),
        support_min=min(supports),
        support_max=max(supports),
    )
