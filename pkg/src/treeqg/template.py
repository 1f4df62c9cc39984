"""The question/answer template language.

A template line is a question and an answer separated by a tab, each a
sequence of space-separated tokens. A token is one of:

  ``word``            literal text, emitted verbatim
  ``[r.path#N]``      the form of the node reached by walking path
  ``[r.path.lemma#N]`` the lemma of that node
  ``<r.path#N>``      the full subtree yield of that node

``r`` is the root; ``#N`` is an optional 1-based surface-position hint that
only breaks ties during path resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

from treeqg.conllu import DepTree, RelPath, resolve_path, subtree_yield


class TemplateSyntaxError(ValueError):
    """Bad template text; carries the column offset of the problem."""

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


@dataclass(frozen=True)
class Literal:
    """A token emitted verbatim."""

    text: str


@dataclass(frozen=True)
class NodeExpr:
    """A slot filled by one token's form or lemma."""

    path: RelPath
    attr: str = "form"
    hint: int | None = None


@dataclass(frozen=True)
class SubtreeExpr:
    """A slot filled by a node's whole subtree yield."""

    path: RelPath
    hint: int | None = None


TemplateExpr = Union[Literal, NodeExpr, SubtreeExpr]


@dataclass(frozen=True)
class Guard:
    """Applicability condition: paths that must resolve, optional root UPOS."""

    paths: frozenset[RelPath] = frozenset()
    root_upos: str | None = None


@dataclass(frozen=True)
class Template:
    """One induced or hand-written QA template.

    support and sources are bookkeeping and do not take part in identity:
    two templates are the same template whenever their question and answer
    expression sequences (and guard) coincide.
    """

    question: tuple[TemplateExpr, ...]
    answer: tuple[TemplateExpr, ...]
    guard: Guard = Guard()
    support: int = field(default=1, compare=False)
    sources: tuple[str, ...] = field(default=(), compare=False)


def make_guard(
    question: Sequence[TemplateExpr],
    answer: Sequence[TemplateExpr],
    root_upos: str | None = None,
) -> Guard:
    """Guard over the union of all paths used by the template expressions."""
    paths = frozenset(
        e.path for e in (*question, *answer) if not isinstance(e, Literal)
    )
    return Guard(paths=paths, root_upos=root_upos)


def path_to_str(path: RelPath) -> str:
    return ".".join(("r", *path))


def path_from_str(text: str, column: int) -> RelPath:
    parts = text.split(".")
    if parts[0] != "r":
        raise TemplateSyntaxError(f"path must start with 'r', got {text!r}", column)
    for part in parts[1:]:
        if not part:
            raise TemplateSyntaxError("empty path step", column)
    return tuple(parts[1:])


def _parse_bracketed(token: str, column: int) -> TemplateExpr:
    subtree = token.startswith("<")
    closer = ">" if subtree else "]"
    if not token.endswith(closer) or len(token) < 3:
        raise TemplateSyntaxError(f"unbalanced brackets in {token!r}", column)
    inner = token[1:-1]
    if any(ch in inner for ch in "[]<>"):
        raise TemplateSyntaxError(f"nested brackets in {token!r}", column)
    hint: int | None = None
    body, sep, hint_text = inner.partition("#")
    if sep:
        if not hint_text.isdigit() or int(hint_text) < 1:
            raise TemplateSyntaxError(f"non-numeric hint {hint_text!r}", column)
        hint = int(hint_text)
    if subtree:
        return SubtreeExpr(path=path_from_str(body, column), hint=hint)
    attr = "form"
    parts = body.split(".")
    if len(parts) > 1 and parts[-1] == "lemma":
        attr = "lemma"
        body = ".".join(parts[:-1])
    return NodeExpr(path=path_from_str(body, column), attr=attr, hint=hint)


def parse_exprs(text: str, base_column: int = 0) -> tuple[TemplateExpr, ...]:
    """Parse one side (question or answer) into an expression sequence."""
    exprs: list[TemplateExpr] = []
    column = 0
    for token in text.split(" "):
        if token:
            if token[0] in "[<":
                exprs.append(_parse_bracketed(token, base_column + column))
            elif any(ch in token for ch in "[]<>"):
                raise TemplateSyntaxError(
                    f"unbalanced brackets in {token!r}", base_column + column
                )
            else:
                exprs.append(Literal(token))
        column += len(token) + 1
    return tuple(exprs)


def parse_template_line(line: str) -> Template:
    """Parse one template line: question TAB answer [TAB support [TAB sources]]."""
    columns = line.rstrip("\n").split("\t")
    if len(columns) < 2 or len(columns) > 4:
        raise TemplateSyntaxError(
            f"expected 2-4 tab-separated columns, got {len(columns)}", 0
        )
    question = parse_exprs(columns[0], 0)
    answer = parse_exprs(columns[1], len(columns[0]) + 1)
    if not question or not answer:
        raise TemplateSyntaxError("question and answer must both be non-empty", 0)
    support = 1
    if len(columns) >= 3 and columns[2]:
        if not columns[2].isdigit() or int(columns[2]) < 1:
            raise TemplateSyntaxError(f"bad support count {columns[2]!r}", 0)
        support = int(columns[2])
    sources: tuple[str, ...] = ()
    if len(columns) == 4 and columns[3]:
        sources = tuple(s for s in columns[3].split(",") if s)
    return Template(
        question=question,
        answer=answer,
        guard=make_guard(question, answer),
        support=support,
        sources=sources,
    )


def render_expr(expr: TemplateExpr) -> str:
    if isinstance(expr, Literal):
        return expr.text
    body = path_to_str(expr.path)
    if isinstance(expr, NodeExpr):
        if expr.attr == "lemma":
            body += ".lemma"
        suffix = f"#{expr.hint}" if expr.hint is not None else ""
        return f"[{body}{suffix}]"
    suffix = f"#{expr.hint}" if expr.hint is not None else ""
    return f"<{body}{suffix}>"


def render_template(t: Template) -> str:
    """Canonical text form; parse_template_line(render_template(t)) == t."""
    question = " ".join(render_expr(e) for e in t.question)
    answer = " ".join(render_expr(e) for e in t.answer)
    return f"{question}\t{answer}"


def eval_expr(expr: TemplateExpr, tree: DepTree) -> str:
    """Evaluate one expression against a tree; raises NoMatch when absent."""
    if isinstance(expr, Literal):
        return expr.text
    node = resolve_path(tree, expr.path, expr.hint)
    if isinstance(expr, NodeExpr):
        return node.lemma if expr.attr == "lemma" else node.form
    return " ".join(t.form for t in subtree_yield(tree, node))


@dataclass
class TemplateSet:
    """An ordered collection of templates, unique by (question, answer)."""

    templates: list[Template] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.templates)

    def __iter__(self) -> Iterator[Template]:
        return iter(self.templates)

    @classmethod
    def merged(cls, templates: Iterable[Template]) -> "TemplateSet":
        """Deduplicate structurally identical templates.

        Supports are summed and source lists concatenated; a root-UPOS
        disagreement between merged guards widens the guard to any UPOS.
        """
        out: dict[tuple, Template] = {}
        order: list[tuple] = []
        for t in templates:
            key = (t.question, t.answer)
            prev = out.get(key)
            if prev is None:
                out[key] = t
                order.append(key)
                continue
            upos = prev.guard.root_upos
            if upos != t.guard.root_upos:
                upos = None
            out[key] = replace(
                prev,
                guard=Guard(prev.guard.paths | t.guard.paths, upos),
                support=prev.support + t.support,
                sources=prev.sources + t.sources,
            )
        return cls([out[k] for k in order])


def save_templates(ts: TemplateSet, path: str | Path) -> None:
    """Write one template per line: question, answer, support, source ids."""
    lines = []
    for t in ts:
        lines.append(f"{render_template(t)}\t{t.support}\t{','.join(t.sources)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_templates(path: str | Path) -> TemplateSet:
    """Read a template file; '#' comment lines and blank lines are skipped."""
    templates: list[Template] = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            templates.append(parse_template_line(line))
        except TemplateSyntaxError as err:
            raise TemplateSyntaxError(f"line {lineno}: {err}", err.column) from None
    return TemplateSet(templates)
