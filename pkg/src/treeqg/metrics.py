"""Agreement statistics and surface-overlap metrics.

Agreement side: Randolph's free-marginal multirater kappa and
Goodman-Kruskal gamma over ordinal rating matrices. Overlap side:
corpus BLEU-N, LCS-based ROUGE-L, and plain CIDEr, all over a simple
casefolding tokenization that strips terminal punctuation.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence, Union


def metric_tokenize(text: str) -> list[str]:
    """Casefold, strip terminal punctuation, split on whitespace."""
    return text.casefold().strip().rstrip("?!.,:;").split()


def _ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


# --- inter-annotator agreement ----------------------------------------------


@dataclass(frozen=True)
class RatingMatrix:
    """Items x raters score matrix on a 1..k scale."""

    items: tuple[str, ...]
    raters: tuple[str, ...]
    scores: tuple[tuple[int, ...], ...]
    k: int = 4
    criterion: str = ""
    direction: str = ""

    def __post_init__(self) -> None:
        if len(self.scores) != len(self.items):
            raise ValueError("one score row per item required")
        for row in self.scores:
            if len(row) != len(self.raters):
                raise ValueError("one score per rater required in every row")
            for score in row:
                if not 1 <= score <= self.k:
                    raise ValueError(f"score {score} outside 1..{self.k}")

    def column(self, rater: str) -> tuple[int, ...]:
        j = self.raters.index(rater)
        return tuple(row[j] for row in self.scores)


@dataclass(frozen=True)
class GammaNA:
    """Gamma is undefined: no untied pairs; score is the constant rating."""

    score: int

    def __str__(self) -> str:
        return f"NA/{self.score}"


@dataclass(frozen=True)
class AgreementResult:
    kappa: float
    gamma: Union[float, GammaNA]


def randolph_kappa(m: RatingMatrix) -> float:
    """Free-marginal multirater kappa.

    kappa = (Po - 1/k) / (1 - 1/k), where the observed agreement Po is
    the fraction of agreeing ordered rater pairs averaged over items:
    Po = (1 / (N * R * (R - 1))) * sum_i sum_c n_ic * (n_ic - 1).
    """
    n_items = len(m.items)
    n_raters = len(m.raters)
    if n_items == 0:
        raise ValueError("cannot compute kappa over zero items")
    if n_raters < 2:
        raise ValueError("kappa requires at least two raters")
    agreeing = 0
    for row in m.scores:
        for count in Counter(row).values():
            agreeing += count * (count - 1)
    p_observed = agreeing / (n_items * n_raters * (n_raters - 1))
    p_expected = 1.0 / m.k
    return (p_observed - p_expected) / (1.0 - p_expected)


def gk_gamma(a: Sequence[int], b: Sequence[int]) -> Union[float, GammaNA]:
    """Goodman-Kruskal gamma between two raters' ordinal scores.

    gamma = (C - D) / (C + D) over item pairs, where C and D count
    concordant and discordant pairs; pairs tied in either sequence are
    excluded. When no untied pair exists, one rater is necessarily
    constant and NA/<constant score> is returned.

    Counting runs over the joint score contingency table, so it stays
    cheap for any number of items.
    """
    if len(a) != len(b):
        raise ValueError("both raters must score the same items")
    if len(a) < 2:
        raise ValueError("gamma requires at least two items")
    cells = list(Counter(zip(a, b)).items())
    concordant = 0
    discordant = 0
    for i, ((a1, b1), n1) in enumerate(cells):
        for (a2, b2), n2 in cells[i + 1 :]:
            sign = (a1 - a2) * (b1 - b2)
            if sign > 0:
                concordant += n1 * n2
            elif sign < 0:
                discordant += n1 * n2
    if concordant + discordant == 0:
        for seq in (a, b):
            if len(set(seq)) == 1:
                return GammaNA(seq[0])
        raise ValueError("no untied pairs and no constant rater")
    return (concordant - discordant) / (concordant + discordant)


def agreement(m: RatingMatrix) -> AgreementResult:
    """Kappa over all raters plus gamma (mean of pairwise gammas when more
    than two raters are present; NA pairs are left out of the mean)."""
    kappa = randolph_kappa(m)
    columns = [m.column(r) for r in m.raters]
    gammas: list[Union[float, GammaNA]] = []
    for i in range(len(columns)):
        for j in range(i + 1, len(columns)):
            gammas.append(gk_gamma(columns[i], columns[j]))
    defined = [g for g in gammas if not isinstance(g, GammaNA)]
    if defined:
        return AgreementResult(kappa=kappa, gamma=sum(defined) / len(defined))
    return AgreementResult(kappa=kappa, gamma=gammas[0])


# --- surface-overlap metrics --------------------------------------------------


def bleu_n(
    hypotheses: Sequence[str], references: Sequence[str], max_n: int = 4
) -> list[float]:
    """Corpus BLEU-1 .. BLEU-max_n with one reference per hypothesis.

    Modified (clipped) n-gram precision, geometric mean over orders, and
    the brevity penalty exp(1 - r/c) when the hypothesis corpus is shorter
    than the reference corpus. Any zero precision zeroes that order's score.
    """
    if not hypotheses:
        raise ValueError("empty corpus")
    if len(hypotheses) != len(references):
        raise ValueError("hypothesis and reference counts differ")
    if not 1 <= max_n <= 4:
        raise ValueError(f"max_n must be within 1..4, got {max_n}")
    hyp_tokens = [metric_tokenize(h) for h in hypotheses]
    ref_tokens = [metric_tokenize(r) for r in references]
    c = sum(len(t) for t in hyp_tokens)
    r = sum(len(t) for t in ref_tokens)
    if c == 0:
        return [0.0] * max_n
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    precisions: list[float] = []
    for n in range(1, max_n + 1):
        matched = 0
        total = 0
        for hyp, ref in zip(hyp_tokens, ref_tokens):
            hyp_counts = Counter(_ngrams(hyp, n))
            ref_counts = Counter(_ngrams(ref, n))
            matched += sum(min(count, ref_counts[g]) for g, count in hyp_counts.items())
            total += sum(hyp_counts.values())
        precisions.append(matched / total if total else 0.0)
    scores: list[float] = []
    for k in range(1, max_n + 1):
        window = precisions[:k]
        if min(window) == 0.0:
            scores.append(0.0)
        else:
            scores.append(brevity * math.exp(sum(math.log(p) for p in window) / k))
    return scores


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


def rouge_l(hypothesis: str, references: Sequence[str], beta: float = 1.2) -> float:
    """LCS-based F-score, maximized over the references.

    F = (1 + beta^2) * P * R / (R + beta^2 * P) with P = LCS/len(hyp)
    and R = LCS/len(ref).
    """
    if not references:
        raise ValueError("at least one reference required")
    hyp = metric_tokenize(hypothesis)
    best = 0.0
    for reference in references:
        ref = metric_tokenize(reference)
        lcs = _lcs_length(hyp, ref)
        if lcs == 0:
            continue
        precision = lcs / len(hyp)
        recall = lcs / len(ref)
        f = (1 + beta**2) * precision * recall / (recall + beta**2 * precision)
        best = max(best, f)
    return best


def rouge_l_corpus(
    hypotheses: Sequence[str], references: Sequence[str], beta: float = 1.2
) -> float:
    """Mean single-reference ROUGE-L over a corpus."""
    if not hypotheses or len(hypotheses) != len(references):
        raise ValueError("need equally many hypotheses and references")
    return sum(rouge_l(h, [r], beta) for h, r in zip(hypotheses, references)) / len(
        hypotheses
    )


def cider(
    hypotheses: Sequence[str], references: Sequence[str], max_n: int = 4
) -> float:
    """Plain corpus CIDEr: tf-idf n-gram cosine, averaged over n, times 10.

    Document frequencies come from the reference corpus, so at least two
    items are required for the idf weights to mean anything.
    """
    if len(hypotheses) != len(references):
        raise ValueError("hypothesis and reference counts differ")
    if len(references) < 2:
        raise ValueError("CIDEr needs a corpus of at least two items")
    hyp_tokens = [metric_tokenize(h) for h in hypotheses]
    ref_tokens = [metric_tokenize(r) for r in references]
    n_docs = len(references)
    doc_freq: list[Counter] = []
    for n in range(1, max_n + 1):
        df: Counter = Counter()
        for ref in ref_tokens:
            df.update(set(_ngrams(ref, n)))
        doc_freq.append(df)
    total = 0.0
    for hyp, ref in zip(hyp_tokens, ref_tokens):
        similarity = 0.0
        for n in range(1, max_n + 1):
            df = doc_freq[n - 1]

            def weighted(tokens: list[str]) -> dict[tuple[str, ...], float]:
                counts = Counter(_ngrams(tokens, n))
                return {
                    g: c * math.log(n_docs / max(1, df[g])) for g, c in counts.items()
                }

            hyp_vec = weighted(hyp)
            ref_vec = weighted(ref)
            hyp_norm = math.sqrt(sum(v * v for v in hyp_vec.values()))
            ref_norm = math.sqrt(sum(v * v for v in ref_vec.values()))
            if hyp_norm == 0.0 or ref_norm == 0.0:
                continue
            dot = sum(v * ref_vec.get(g, 0.0) for g, v in hyp_vec.items())
            similarity += dot / (hyp_norm * ref_norm)
        total += 10.0 * similarity / max_n
    return total / len(hypotheses)


def first_two_words_dist(questions: Sequence[str]) -> list[tuple[str, int]]:
    """Distribution of question-opening bigrams.

    Counted over the casefolded first two tokens (a single-token question
    counts under its lone token). Sorted by descending count, then
    alphabetically, so the output is deterministic.
    """
    counts: Counter[str] = Counter()
    for question in questions:
        tokens = metric_tokenize(question)
        if not tokens:
            continue
        counts[" ".join(tokens[:2])] += 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
