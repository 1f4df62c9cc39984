"""Shared fixtures: small hand-built trees and random tree generators."""

from __future__ import annotations

import random

import pytest

from treeqg.conllu import DepTree, Token, parse_conllu

GRADUATION = """\
# sent_id = grad-1
# text = John graduated in 2010
1\tJohn\tJohn\tPROPN\tNNP\tNumber=Sing\t2\tnsubj\t_\t_
2\tgraduated\tgraduate\tVERB\tVBD\tMood=Ind|Tense=Past|VerbForm=Fin\t0\troot\t_\t_
3\tin\tin\tADP\tIN\t_\t4\tcase\t_\t_
4\t2010\t2010\tNUM\tCD\tNumType=Card\t2\tobl\t_\t_
"""

STOCKS = """\
# sent_id = stocks-1
# text = Stocks crashed during previous summer months
1\tStocks\tstock\tNOUN\tNNS\tNumber=Plur\t2\tnsubj\t_\t_
2\tcrashed\tcrash\tVERB\tVBD\tMood=Ind|Tense=Past|VerbForm=Fin\t0\troot\t_\t_
3\tduring\tduring\tADP\tIN\t_\t6\tcase\t_\t_
4\tprevious\tprevious\tADJ\tJJ\tDegree=Pos\t6\tamod\t_\t_
5\tsummer\tsummer\tNOUN\tNN\tNumber=Sing\t6\tcompound\t_\t_
6\tmonths\tmonth\tNOUN\tNNS\tNumber=Plur\t2\tobl\t_\t_
"""


@pytest.fixture
def graduation_tree() -> DepTree:
    return parse_conllu(GRADUATION)[0]


@pytest.fixture
def stocks_tree() -> DepTree:
    return parse_conllu(STOCKS)[0]


def make_token(
    token_id: int,
    form: str,
    head: int,
    deprel: str,
    *,
    lemma: str | None = None,
    upos: str = "NOUN",
    feats: tuple[tuple[str, str], ...] = (),
) -> Token:
    return Token(
        id=token_id,
        form=form,
        lemma=lemma if lemma is not None else form,
        upos=upos,
        xpos="_",
        feats=feats,
        head=head,
        deprel=deprel,
        deps="_",
        misc="_",
    )


def make_tree(rows: list[tuple], sent_id: str = "t") -> DepTree:
    """Build a tree from (form, head, deprel[, lemma[, upos]]) rows."""
    tokens = []
    for i, row in enumerate(rows, start=1):
        form, head, deprel = row[0], row[1], row[2]
        lemma = row[3] if len(row) > 3 else None
        upos = row[4] if len(row) > 4 else "NOUN"
        tokens.append(make_token(i, form, head, deprel, lemma=lemma, upos=upos))
    return DepTree(tokens=tuple(tokens), sent_id=sent_id)


DEPRELS = ("nsubj", "obj", "obl", "nmod", "amod", "advmod", "case", "det", "compound")
UPOS_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "PROPN", "NUM")
FEATURE_POOL = (
    (("Number", "Sing"),),
    (("Number", "Plur"),),
    (("Tense", "Past"), ("VerbForm", "Fin")),
    (),
)


def random_tree(rng: random.Random, size: int | None = None, sent_id: str = "rnd") -> DepTree:
    """A random labelled dependency tree with unique surface forms.

    Heads are drawn from already-attached nodes, so the result is always a
    single-rooted acyclic tree; attachment order is shuffled, so arcs go in
    both surface directions and subtrees may be discontinuous.
    """
    n = size if size is not None else rng.randint(2, 9)
    order = list(range(1, n + 1))
    rng.shuffle(order)
    heads = {order[0]: 0}
    for pos, token_id in enumerate(order[1:], start=1):
        heads[token_id] = order[rng.randrange(pos)]
    tokens = []
    for i in range(1, n + 1):
        form = f"w{i}{rng.choice('abcdef')}"
        lemma = form if rng.random() < 0.5 else f"l{i}{rng.choice('abcdef')}"
        tokens.append(
            Token(
                id=i,
                form=form,
                lemma=lemma,
                upos=rng.choice(UPOS_TAGS),
                xpos="_",
                feats=rng.choice(FEATURE_POOL),
                head=heads[i],
                deprel="root" if heads[i] == 0 else rng.choice(DEPRELS),
                deps="_",
                misc="_",
            )
        )
    return DepTree(tokens=tuple(tokens), sent_id=sent_id)
