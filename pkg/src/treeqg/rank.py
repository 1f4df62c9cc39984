"""Ranking models, candidate scoring, and the two filtering stages.

A candidate question is scored by two additive-smoothed models:

  score = w_morph * (1/L) * sum_i log P(sig_i | previous n-1 sigs)
        + w_qword * log P(first question token | deprel of the answer node)

where sig_i is the morphological signature (UPOS plus canonical feature
string) of the i-th question token and L is the question length. Tokens
substituted from the tree carry that tree's signatures; literal tokens use
the tags recorded for their surface form when the morph model was built.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

from treeqg.conllu import DepTree, Token, resolve_path, subtree_yield
from treeqg.generate import GenCandidate
from treeqg.induce import IdfModel, TrainingTriple, locate_answer, tokenize, AlignmentFailure
from treeqg.template import Literal, NodeExpr, Template

BEGIN = "<s>"
END = "</s>"
UNKNOWN_SIG = "<unk>"

DEFAULT_FILTERS = ("min_tokens", "whole_sentence", "answer_in_question", "dedup")


def morph_signature(token: Token) -> str:
    """UPOS plus the canonically ordered feature string, e.g. NOUN|Number=Plur."""
    feats = "|".join(
        f"{name}={value}"
        for name, value in sorted(token.feats, key=lambda kv: kv[0].casefold())
    )
    return f"{token.upos}|{feats or '_'}"


@dataclass
class MorphNgramModel:
    """Additive-smoothed n-gram model over morphological signatures.

    Context counts are tallied as prefixes of the counted n-grams, so a
    conditional distribution sums to exactly 1 over vocab plus one
    out-of-vocabulary symbol. tags maps a casefolded surface form to the
    most frequent signature it carried in the training treebank.
    """

    n: int
    ngrams: dict[tuple[str, ...], int]
    alpha: float = 1.0
    tags: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.contexts: dict[tuple[str, ...], int] = defaultdict(int)
        vocab: set[str] = set()
        for gram, count in self.ngrams.items():
            self.contexts[gram[:-1]] += count
            vocab.add(gram[-1])
        self.vocab: frozenset[str] = frozenset(vocab)

    def prob(self, event: str, context: tuple[str, ...]) -> float:
        full = self.ngrams.get((*context, event), 0)
        seen = self.contexts.get(context, 0)
        v = len(self.vocab) + 1
        return (full + self.alpha) / (seen + self.alpha * v)

    def sequence_logprob(self, signatures: Sequence[str]) -> float:
        context = (BEGIN,) * (self.n - 1)
        total = 0.0
        for sig in signatures:
            total += math.log(self.prob(sig, context))
            context = (*context[1:], sig)
        return total

    def signature_for(self, form: str) -> str:
        return self.tags.get(form.casefold(), UNKNOWN_SIG)


def build_morph_model(
    treebank: Sequence[DepTree], n: int = 3, alpha: float = 1.0
) -> MorphNgramModel:
    """Count signature n-grams over a treebank, padding each sentence with
    n-1 begin markers and one end marker."""
    if n < 2:
        raise ValueError(f"n-gram order must be at least 2, got {n}")
    if not treebank:
        raise ValueError("cannot build a morph model from an empty treebank")
    ngrams: Counter[tuple[str, ...]] = Counter()
    tag_counts: dict[str, Counter[str]] = defaultdict(Counter)
    for tree in treebank:
        signatures = [morph_signature(t) for t in tree.tokens]
        for token, sig in zip(tree.tokens, signatures):
            tag_counts[token.form.casefold()][sig] += 1
        padded = [BEGIN] * (n - 1) + signatures + [END]
        for i in range(n - 1, len(padded)):
            ngrams[tuple(padded[i - n + 1 : i + 1])] += 1
    tags = {
        form: sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        for form, counts in tag_counts.items()
    }
    return MorphNgramModel(n=n, ngrams=dict(ngrams), alpha=alpha, tags=tags)


@dataclass
class QuestionWordModel:
    """P(first question token | deprel of the answer node), additive smoothing.

    An unseen condition backs off to the uniform distribution over the
    event vocabulary plus one out-of-vocabulary slot.
    """

    counts: dict[str, dict[str, int]]
    alpha: float = 1.0

    def __post_init__(self) -> None:
        self.vocab: frozenset[str] = frozenset(
            word for events in self.counts.values() for word in events
        )

    def prob(self, word: str, condition: str | None) -> float:
        w = len(self.vocab) + 1
        events = self.counts.get(condition) if condition is not None else None
        if not events:
            return 1.0 / w
        total = sum(events.values())
        return (events.get(word.casefold(), 0) + self.alpha) / (total + self.alpha * w)


def build_qword_model(
    triples: Sequence[TrainingTriple], alpha: float = 1.0
) -> QuestionWordModel:
    """Tally first question tokens against the deprel of the answer's
    covering node (leftmost answer token when no single node covers it)."""
    counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for triple in triples:
        first = tokenize(triple.question)
        if not first:
            continue
        try:
            span, covering = locate_answer(triple.tree, triple.answer)
        except AlignmentFailure:
            continue
        node = covering if covering is not None else span[0]
        counts[node.deprel][first[0].casefold()] += 1
    return QuestionWordModel(
        counts={c: dict(events) for c, events in counts.items()}, alpha=alpha
    )


@dataclass
class RankModels:
    """Everything scoring needs, bundled."""

    idf: IdfModel
    morph: MorphNgramModel
    qword: QuestionWordModel
    weights: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        if self.weights == (0.0, 0.0):
            raise ValueError("at least one score weight must be non-zero")


def question_signatures(t: Template, tree: DepTree, morph: MorphNgramModel) -> list[str]:
    """Morphological signatures of the question this template yields on tree."""
    signatures: list[str] = []
    for expr in t.question:
        if isinstance(expr, Literal):
            signatures.append(morph.signature_for(expr.text))
            continue
        node = resolve_path(tree, expr.path, expr.hint)
        if isinstance(expr, NodeExpr):
            signatures.append(morph_signature(node))
        else:
            signatures.extend(morph_signature(x) for x in subtree_yield(tree, node))
    return signatures


def answer_condition(t: Template, tree: DepTree) -> str | None:
    """Deprel of the node behind the first substituted answer slot."""
    for expr in t.answer:
        if isinstance(expr, Literal):
            continue
        try:
            return resolve_path(tree, expr.path, expr.hint).deprel
        except LookupError:
            return None
    return None


def score_candidate(
    c: GenCandidate, tree: DepTree, t: Template, models: RankModels
) -> float:
    """Score one candidate and record score plus components on it."""
    q_tokens = c.question.split()
    if not q_tokens:
        raise ValueError("cannot score a candidate with an empty question")
    signatures = question_signatures(t, tree, models.morph)
    morph_part = models.morph.sequence_logprob(signatures) / len(q_tokens)
    qword_part = math.log(models.qword.prob(q_tokens[0], answer_condition(t, tree)))
    w_morph, w_qword = models.weights
    c.score = w_morph * morph_part + w_qword * qword_part
    c.score_parts = {"morph": morph_part, "qword": qword_part}
    return c.score


def _contains_tokens(question: str, answer: str) -> bool:
    q = question.split()
    a = answer.split()
    if not a or len(a) > len(q):
        return False
    return any(q[i : i + len(a)] == a for i in range(len(q) - len(a) + 1))


def basic_filter(
    candidates: Sequence[GenCandidate],
    rules: Sequence[str] = DEFAULT_FILTERS,
    min_tokens: int = 3,
) -> list[GenCandidate]:
    """Drop degenerate candidates; survivors keep their relative order.

    Rules (each individually toggleable): min_tokens discards questions
    shorter than min_tokens tokens; whole_sentence discards empty answers
    and answers equal to the entire source sentence; answer_in_question
    discards questions that contain their own answer verbatim; dedup keeps
    only the highest-scored copy of each exact (question, answer) pair.
    """
    out: list[GenCandidate] = []
    for c in candidates:
        if "min_tokens" in rules and len(c.question.split()) < min_tokens:
            continue
        if "whole_sentence" in rules and (not c.answer or c.answer == c.source_text):
            continue
        if "answer_in_question" in rules and _contains_tokens(c.question, c.answer):
            continue
        out.append(c)
    if "dedup" in rules:
        best: dict[tuple[str, str], tuple[float, int]] = {}
        for i, c in enumerate(out):
            key = (c.question, c.answer)
            score = c.score if c.score is not None else float("-inf")
            if key not in best or score > best[key][0]:
                best[key] = (score, i)
        keep = {i for _, i in best.values()}
        out = [c for i, c in enumerate(out) if i in keep]
    return out


def mean_filter(candidates: Sequence[GenCandidate]) -> list[GenCandidate]:
    """Keep candidates scoring at or above the per-sentence mean.

    Never empties a non-empty input: the maximum is always >= the mean.
    Comparison uses a tiny tolerance so equal scores survive float rounding.
    """
    if not candidates:
        return []
    scores = []
    for c in candidates:
        if c.score is None:
            raise ValueError("mean_filter requires scored candidates")
        scores.append(c.score)
    mean = sum(scores) / len(scores)
    return [
        c
        for c in candidates
        if c.score >= mean or math.isclose(c.score, mean, rel_tol=1e-12, abs_tol=1e-12)
    ]


class StageCounts(NamedTuple):
    """Per-sentence candidate counts through the pipeline stages."""

    applicable: int
    after_basic: int
    after_mean: int


@dataclass(frozen=True)
class GenerationStats:
    """Corpus-level generation report over per-sentence stage counts."""

    sentences: int
    total_generated: int
    ss_applicable: int
    ss_after_basic: int
    ss_after_mean: int
    pct_after_mean: float
    per_ss_mean: float
    per_ss_std: float
    per_ss_median: float
    per_ss_min: int
    per_ss_max: int


def generation_stats(per_sentence: Mapping[str, StageCounts]) -> GenerationStats:
    """Summarize stage counts; std is the population standard deviation."""
    if not per_sentence:
        return GenerationStats(0, 0, 0, 0, 0, 0.0, 0.0, 0.0, 0.0, 0, 0)
    generated = [s.applicable for s in per_sentence.values()]
    n = len(per_sentence)
    after_mean = sum(1 for s in per_sentence.values() if s.after_mean > 0)
    return GenerationStats(
        sentences=n,
        total_generated=sum(generated),
        ss_applicable=sum(1 for s in per_sentence.values() if s.applicable > 0),
        ss_after_basic=sum(1 for s in per_sentence.values() if s.after_basic > 0),
        ss_after_mean=after_mean,
        pct_after_mean=100.0 * after_mean / n,
        per_ss_mean=statistics.mean(generated),
        per_ss_std=statistics.pstdev(generated),
        per_ss_median=statistics.median(generated),
        per_ss_min=min(generated),
        per_ss_max=max(generated),
    )


# --- model file formats -----------------------------------------------------
#
# All model files are versioned, line-oriented, and sorted, so rebuilding
# from identical input reproduces identical bytes.

_MORPH_HEADER = "#treeqg-morph\tv1"
_QWORD_HEADER = "#treeqg-qword\tv1"
_IDF_HEADER = "#treeqg-idf\tv1"


def save_morph_model(model: MorphNgramModel, path: str | Path) -> None:
    lines = [_MORPH_HEADER, f"#n\t{model.n}", f"#alpha\t{model.alpha!r}"]
    for gram in sorted(model.ngrams):
        lines.append(f"ngram\t{' '.join(gram)}\t{model.ngrams[gram]}")
    for form in sorted(model.tags):
        lines.append(f"tag\t{form}\t{model.tags[form]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_morph_model(path: str | Path) -> MorphNgramModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _MORPH_HEADER:
        raise ValueError(f"{path}: not a morph model file")
    n = 3
    alpha = 1.0
    ngrams: dict[tuple[str, ...], int] = {}
    tags: dict[str, str] = {}
    for line in lines[1:]:
        fields = line.split("\t")
        if fields[0] == "#n":
            n = int(fields[1])
        elif fields[0] == "#alpha":
            alpha = float(fields[1])
        elif fields[0] == "ngram":
            ngrams[tuple(fields[1].split(" "))] = int(fields[2])
        elif fields[0] == "tag":
            tags[fields[1]] = fields[2]
    return MorphNgramModel(n=n, ngrams=ngrams, alpha=alpha, tags=tags)


def save_qword_model(model: QuestionWordModel, path: str | Path) -> None:
    lines = [_QWORD_HEADER, f"#alpha\t{model.alpha!r}"]
    for condition in sorted(model.counts):
        events = model.counts[condition]
        for word in sorted(events):
            lines.append(f"count\t{condition}\t{word}\t{events[word]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_qword_model(path: str | Path) -> QuestionWordModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _QWORD_HEADER:
        raise ValueError(f"{path}: not a question-word model file")
    alpha = 1.0
    counts: dict[str, dict[str, int]] = defaultdict(dict)
    for line in lines[1:]:
        fields = line.split("\t")
        if fields[0] == "#alpha":
            alpha = float(fields[1])
        elif fields[0] == "count":
            counts[fields[1]][fields[2]] = int(fields[3])
    return QuestionWordModel(counts=dict(counts), alpha=alpha)


def save_idf_model(model: IdfModel, path: str | Path) -> None:
    lines = [_IDF_HEADER, f"#docs\t{model.doc_count}"]
    for lemma in sorted(model.df):
        lines.append(f"df\t{lemma}\t{model.df[lemma]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_idf_model(path: str | Path) -> IdfModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _IDF_HEADER:
        raise ValueError(f"{path}: not an idf model file")
    doc_count = 0
    df: dict[str, int] = {}
    for line in lines[1:]:
        fields = line.split("\t")
        if fields[0] == "#docs":
            doc_count = int(fields[1])
        elif fields[0] == "df":
            df[fields[1]] = int(fields[2])
    idf = {lemma: math.log(doc_count / count) for lemma, count in df.items()}
    return IdfModel(idf=idf, doc_count=doc_count, df=df)
