"""CoNLL-U parsing, serialization, and dependency-tree navigation.

Trees are immutable. Multiword-token ranges (ids like "3-4") and empty
nodes (ids like "5.1") take no part in the tree but are preserved verbatim
so that parse -> serialize round-trips keep every byte of a valid file.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

# A relation path: deprel labels walked from the root. Empty = the root itself.
RelPath = tuple[str, ...]

_ID_RANGE = re.compile(r"^\d+-\d+$")
_ID_EMPTY = re.compile(r"^\d+\.\d+$")
_ID_PLAIN = re.compile(r"^\d+$")


class ConlluParseError(ValueError):
    """Malformed CoNLL-U input; the message names the offending line."""


class NoMatch(LookupError):
    """A relation path cannot be resolved in the given tree."""


@dataclass(frozen=True)
class Token:
    """One syntactic word: the ten CoNLL-U columns, FEATS as ordered pairs."""

    id: int
    form: str
    lemma: str
    upos: str
    xpos: str
    feats: tuple[tuple[str, str], ...]
    head: int
    deprel: str
    deps: str = "_"
    misc: str = "_"

    @property
    def feats_str(self) -> str:
        return "|".join(f"{k}={v}" for k, v in self.feats) or "_"


@dataclass(frozen=True)
class DepTree:
    """A single dependency tree in surface order, plus round-trip metadata.

    comments holds the raw "#" lines of the sentence block; extras holds
    (token_index, raw_line) pairs for multiword-token and empty-node lines,
    anchored to the syntactic token they precede.
    """

    tokens: tuple[Token, ...]
    sent_id: str = ""
    text: str = ""
    comments: tuple[str, ...] = ()
    extras: tuple[tuple[int, str], ...] = ()

    @cached_property
    def _by_id(self) -> dict[int, Token]:
        return {t.id: t for t in self.tokens}

    @cached_property
    def _children(self) -> dict[int, tuple[Token, ...]]:
        kids: dict[int, list[Token]] = defaultdict(list)
        for t in self.tokens:
            kids[t.head].append(t)
        return {head: tuple(ts) for head, ts in kids.items()}

    @property
    def root(self) -> Token:
        return self._children[0][0]

    def token(self, token_id: int) -> Token:
        return self._by_id[token_id]

    def children(self, node: Token) -> tuple[Token, ...]:
        """Dependents of node in surface order."""
        return self._children.get(node.id, ())


def _parse_feats(raw: str, lineno: int) -> tuple[tuple[str, str], ...]:
    if raw == "_":
        return ()
    pairs = []
    for item in raw.split("|"):
        name, sep, value = item.partition("=")
        if not sep or not name or not value:
            raise ConlluParseError(f"line {lineno}: malformed FEATS item {item!r}")
        pairs.append((name, value))
    return tuple(pairs)


def _parse_block(lines: list[tuple[int, str]]) -> DepTree:
    comments: list[str] = []
    entries: list[tuple[int, Token]] = []
    extras: list[tuple[int, str]] = []
    sent_id = ""
    text = ""
    for lineno, line in lines:
        if line.startswith("#"):
            comments.append(line)
            key, sep, value = line[1:].partition("=")
            if sep:
                key = key.strip()
                if key == "sent_id":
                    sent_id = value.strip()
                elif key == "text":
                    text = value.strip()
            continue
        fields = line.split("\t")
        if len(fields) != 10:
            raise ConlluParseError(
                f"line {lineno}: expected 10 tab-separated fields, got {len(fields)}"
            )
        raw_id = fields[0]
        if _ID_RANGE.match(raw_id) or _ID_EMPTY.match(raw_id):
            extras.append((len(entries), line))
            continue
        if not _ID_PLAIN.match(raw_id):
            raise ConlluParseError(f"line {lineno}: bad token id {raw_id!r}")
        token_id = int(raw_id)
        if token_id != len(entries) + 1:
            raise ConlluParseError(f"line {lineno}: token id {token_id} out of sequence")
        try:
            head = int(fields[6])
        except ValueError:
            raise ConlluParseError(
                f"line {lineno}: non-integer head {fields[6]!r}"
            ) from None
        if head < 0:
            raise ConlluParseError(f"line {lineno}: negative head {head}")
        if head == token_id:
            raise ConlluParseError(f"line {lineno}: token is its own head")
        deprel = fields[7]
        if (head == 0) != (deprel == "root"):
            raise ConlluParseError(
                f"line {lineno}: deprel must be 'root' exactly when head is 0"
            )
        entries.append(
            (
                lineno,
                Token(
                    id=token_id,
                    form=fields[1],
                    lemma=fields[2],
                    upos=fields[3],
                    xpos=fields[4],
                    feats=_parse_feats(fields[5], lineno),
                    head=head,
                    deprel=deprel,
                    deps=fields[8],
                    misc=fields[9],
                ),
            )
        )
    if not entries:
        raise ConlluParseError(f"line {lines[0][0]}: sentence block has no tokens")
    roots = [(ln, t) for ln, t in entries if t.head == 0]
    if not roots:
        raise ConlluParseError(f"line {entries[0][0]}: no root token")
    if len(roots) > 1:
        raise ConlluParseError(f"line {roots[1][0]}: multiple roots")
    by_id = {t.id: t for _, t in entries}
    for lineno, tok in entries:
        if tok.head != 0 and tok.head not in by_id:
            raise ConlluParseError(f"line {lineno}: head {tok.head} does not exist")
    for lineno, tok in entries:
        seen: set[int] = set()
        cur = tok
        while cur.head != 0:
            if cur.id in seen:
                raise ConlluParseError(f"line {lineno}: cyclic arcs")
            seen.add(cur.id)
            cur = by_id[cur.head]
    return DepTree(
        tokens=tuple(t for _, t in entries),
        sent_id=sent_id,
        text=text,
        comments=tuple(comments),
        extras=tuple(extras),
    )


def parse_conllu(text: str) -> list[DepTree]:
    """Parse CoNLL-U text into a list of trees.

    Blank lines separate sentences. Raises ConlluParseError (with the line
    number) on short rows, bad ids or heads, missing or duplicate roots,
    and cyclic arcs.
    """
    trees: list[DepTree] = []
    block: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.strip() == "":
            if block:
                trees.append(_parse_block(block))
                block = []
        else:
            block.append((lineno, raw))
    if block:
        trees.append(_parse_block(block))
    return trees


def load_conllu(path: str | Path) -> list[DepTree]:
    return parse_conllu(Path(path).read_text(encoding="utf-8"))


def _token_line(tok: Token) -> str:
    return "\t".join(
        (
            str(tok.id),
            tok.form,
            tok.lemma,
            tok.upos,
            tok.xpos,
            tok.feats_str,
            str(tok.head),
            tok.deprel,
            tok.deps,
            tok.misc,
        )
    )


def serialize_tree(tree: DepTree) -> str:
    lines: list[str] = []
    if tree.comments:
        lines.extend(tree.comments)
    else:
        if tree.sent_id:
            lines.append(f"# sent_id = {tree.sent_id}")
        if tree.text:
            lines.append(f"# text = {tree.text}")
    extras: dict[int, list[str]] = defaultdict(list)
    for pos, raw in tree.extras:
        extras[pos].append(raw)
    for i, tok in enumerate(tree.tokens):
        lines.extend(extras.get(i, ()))
        lines.append(_token_line(tok))
    lines.extend(extras.get(len(tree.tokens), ()))
    return "\n".join(lines)


def serialize_conllu(trees: Iterable[DepTree]) -> str:
    """Render trees back to CoNLL-U; parse(serialize(parse(x))) is stable."""
    return "\n\n".join(serialize_tree(t) for t in trees) + "\n"


def resolve_path(tree: DepTree, path: RelPath, hint: int | None = None) -> Token:
    """Walk a relation path from the root and return the reached token.

    At each step the children of the current node are filtered by the step
    label. When several children match, the one whose id equals hint is
    taken if present, else the leftmost. Raises NoMatch when a step has no
    matching child.
    """
    node = tree.root
    for step in path:
        matches = [c for c in tree.children(node) if c.deprel == step]
        if not matches:
            raise NoMatch(f"no child {step!r} under token {node.id} ({node.form})")
        chosen = None
        if hint is not None:
            for c in matches:
                if c.id == hint:
                    chosen = c
                    break
        node = chosen if chosen is not None else matches[0]
    return node


def subtree_yield(tree: DepTree, node: Token) -> tuple[Token, ...]:
    """All tokens dominated by node (node included), in surface order."""
    collected: list[Token] = []
    stack = [node]
    while stack:
        cur = stack.pop()
        collected.append(cur)
        stack.extend(tree.children(cur))
    collected.sort(key=lambda t: t.id)
    return tuple(collected)


def is_contiguous(span: Sequence[Token]) -> bool:
    """True when the span's token ids are consecutive (no gap)."""
    return all(b.id == a.id + 1 for a, b in zip(span, span[1:]))


def token_path(tree: DepTree, node: Token) -> RelPath:
    """Relation path from the root down to node (empty for the root)."""
    steps: list[str] = []
    cur = node
    while cur.head != 0:
        steps.append(cur.deprel)
        cur = tree.token(cur.head)
    return tuple(reversed(steps))
