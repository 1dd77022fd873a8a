"""String descriptions of meta-paths over the TPG schema.

Expressions denote sets of node-type sequences (strings over ``U``, ``P``, ``R``).

Grammar (loosest binding first)::

    select := join ('|' join)*
    join   := concat ('.' concat)*        shared-endpoint join
    concat := repeat repeat*              juxtaposition, one schema edge between operands
    repeat := atom '*'*
    atom   := 'U' | 'P' | 'R' | '(' select ')' | '[' select ']'

Runs of juxtaposed atoms such as ``UPU`` are literal type sequences. ``a.b``
glues the last type of ``a`` onto the first type of ``b`` (so ``UP.PR`` is
``UPR``), while ``ab`` steps along a schema edge from ``a`` to ``b``
(so ``U[PUP]*R`` contains ``UPR``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

TYPES = "UPR"
SCHEMA_EDGES = frozenset({("U", "P"), ("P", "U"), ("P", "R"), ("R", "P")})

CANNED = {
    "unc": "(UPU|UPRPU)*PR",
    "pnc": "U[PUP]*R",
    "rnc": "UP(RPUPR)*",
    "grank": "U[PUP|PRP]*R",
}


class MetaPathError(ValueError):
    pass


class MetaPathSyntaxError(MetaPathError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.pos = pos


class MetaPathTypeError(MetaPathError):
    pass


def adjacent(a: str, b: str) -> bool:
    return (a, b) in SCHEMA_EDGES


def is_schema_path(seq: str) -> bool:
    return len(seq) > 0 and all(t in TYPES for t in seq) and all(
        adjacent(a, b) for a, b in zip(seq, seq[1:])
    )


class Expr:
    """Base class of description expressions. Subclasses are frozen dataclasses."""

    first: str
    last: str

    def __str__(self) -> str:
        return render(self)

    def matches(self, seq: str) -> bool:
        return matches(self, seq)


@dataclass(frozen=True)
class Seq(Expr):
    types: str

    def __post_init__(self):
        if not is_schema_path(self.types):
            raise MetaPathTypeError(f"{self.types!r} is not a path of the TPG schema")

    @property
    def first(self) -> str:
        return self.types[0]

    @property
    def last(self) -> str:
        return self.types[-1]


@dataclass(frozen=True)
class Select(Expr):
    options: tuple[Expr, ...]

    def __post_init__(self):
        a = self.options[0]
        for b in self.options[1:]:
            if (a.first, a.last) != (b.first, b.last):
                raise MetaPathTypeError(
                    f"select needs matching endpoints: {render(a)} is {a.first}..{a.last}, "
                    f"{render(b)} is {b.first}..{b.last}"
                )

    @property
    def first(self) -> str:
        return self.options[0].first

    @property
    def last(self) -> str:
        return self.options[0].last


@dataclass(frozen=True)
class Join(Expr):
    """Shared-endpoint join: the last type of each part is the first type of the next."""

    parts: tuple[Expr, ...]

    def __post_init__(self):
        for a, b in zip(self.parts, self.parts[1:]):
            if a.last != b.first:
                raise MetaPathTypeError(
                    f"join needs last type of {render(a)} ({a.last}) to equal "
                    f"first type of {render(b)} ({b.first})"
                )

    @property
    def first(self) -> str:
        return self.parts[0].first

    @property
    def last(self) -> str:
        return self.parts[-1].last


@dataclass(frozen=True)
class Concat(Expr):
    """Juxtaposition: consecutive parts are linked by one schema edge."""

    parts: tuple[Expr, ...]

    def __post_init__(self):
        for a, b in zip(self.parts, self.parts[1:]):
            if not adjacent(a.last, b.first):
                raise MetaPathTypeError(
                    f"{a.last} and {b.first} are not adjacent in the TPG schema "
                    f"({render(a)} followed by {render(b)})"
                )

    @property
    def first(self) -> str:
        return self.parts[0].first

    @property
    def last(self) -> str:
        return self.parts[-1].last


@dataclass(frozen=True)
class Repeat(Expr):
    body: Expr

    def __post_init__(self):
        if self.body.first != self.body.last:
            raise MetaPathTypeError(
                f"repeat needs equal endpoints, {render(self.body)} runs "
                f"{self.body.first}..{self.body.last}"
            )

    @property
    def first(self) -> str:
        return self.body.first

    @property
    def last(self) -> str:
        return self.body.first


# -- smart constructors -------------------------------------------------------


def seq(types: str) -> Seq:
    return Seq(types)


def _flatten(cls, parts):
    out = []
    for p in parts:
        if isinstance(p, cls):
            out.extend(p.parts)
        else:
            out.append(p)
    return out


def concat(*parts: Expr) -> Expr:
    flat = _flatten(Concat, parts)
    merged: list[Expr] = []
    for p in flat:
        if merged and isinstance(p, Seq) and isinstance(merged[-1], Seq):
            if not adjacent(merged[-1].last, p.first):
                raise MetaPathTypeError(
                    f"{merged[-1].last} and {p.first} are not adjacent in the TPG schema"
                )
            merged[-1] = Seq(merged[-1].types + p.types)
        else:
            merged.append(p)
    return merged[0] if len(merged) == 1 else Concat(tuple(merged))


def join(*parts: Expr) -> Expr:
    """Shared-endpoint join. Literal sequences are glued directly (``UP.PR`` -> ``UPR``)."""
    flat = _flatten(Join, parts)
    out: list[Expr] = []
    for p in flat:
        if out:
            a = out[-1]
            if a.last != p.first:
                raise MetaPathTypeError(
                    f"join needs last type of {render(a)} ({a.last}) to equal "
                    f"first type of {render(p)} ({p.first})"
                )
            if isinstance(p, Seq) and len(p.types) == 1:
                continue
            if isinstance(a, Seq) and len(a.types) == 1:
                out[-1] = p
                continue
            if isinstance(a, Seq) and isinstance(p, Seq):
                out[-1] = Seq(a.types + p.types[1:])
                continue
        out.append(p)
    return out[0] if len(out) == 1 else Join(tuple(out))


def select(*options: Expr) -> Expr:
    flat: list[Expr] = []
    for o in options:
        flat.extend(o.options if isinstance(o, Select) else [o])
    unique = list(dict.fromkeys(flat))
    return unique[0] if len(unique) == 1 else Select(tuple(unique))


def repeat(body: Expr) -> Expr:
    return Repeat(body)


# -- rendering ----------------------------------------------------------------


def render(e: Expr) -> str:
    if isinstance(e, Seq):
        return e.types
    if isinstance(e, Select):
        return "|".join(render(o) for o in e.options)
    if isinstance(e, Repeat):
        inner = render(e.body)
        if isinstance(e.body, Seq) and len(e.body.types) == 1:
            return inner + "*"
        return f"({inner})*"
    if isinstance(e, Join):
        return ".".join(_wrap(p, (Select,)) for p in e.parts)
    if isinstance(e, Concat):
        return "".join(_wrap(p, (Select, Join)) for p in e.parts)
    raise TypeError(e)


def _wrap(e: Expr, loose) -> str:
    s = render(e)
    return f"({s})" if isinstance(e, loose) else s


# -- parsing ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = [(c, i) for i, c in enumerate(text) if not c.isspace()]
        self.k = 0

    def peek(self) -> str | None:
        return self.toks[self.k][0] if self.k < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.k][1] if self.k < len(self.toks) else len(self.text)

    def fail(self, msg: str):
        raise MetaPathSyntaxError(msg, self.text, self.pos())

    def parse(self) -> Expr:
        if not self.toks:
            self.fail("empty description")
        e = self.select()
        if self.peek() is not None:
            self.fail(f"unexpected {self.peek()!r}")
        return e

    def select(self) -> Expr:
        opts = [self.join()]
        while self.peek() == "|":
            self.k += 1
            opts.append(self.join())
        return select(*opts)

    def join(self) -> Expr:
        parts = [self.concat()]
        while self.peek() == ".":
            self.k += 1
            parts.append(self.concat())
        return join(*parts)

    def concat(self) -> Expr:
        parts = [self.repeat()]
        while self.peek() is not None and (self.peek() in TYPES or self.peek() in "(["):
            parts.append(self.repeat())
        return concat(*parts)

    def repeat(self) -> Expr:
        e = self.atom()
        while self.peek() == "*":
            self.k += 1
            e = repeat(e)
        return e

    def atom(self) -> Expr:
        c = self.peek()
        if c is None:
            self.fail("unexpected end of description")
        if c in TYPES:
            self.k += 1
            return Seq(c)
        if c in "([":
            close = ")" if c == "(" else "]"
            self.k += 1
            e = self.select()
            if self.peek() != close:
                self.fail(f"expected {close!r}")
            self.k += 1
            return e
        self.fail(f"unexpected {c!r}")


def parse_description(text: str) -> Expr:
    """Parse a string description; canned names (``unc``, ``pnc``, ``rnc``, ``grank``) resolve."""
    text = CANNED.get(text.strip().lower(), text)
    return _Parser(text).parse()


def canned(name: str) -> Expr:
    return parse_description(CANNED[name.lower()])


# -- matching -----------------------------------------------------------------


def matches(e: Expr, s: str) -> bool:
    """Membership of the type sequence ``s`` in the set denoted by ``e``.

    Simulates the expression as a nondeterministic automaton: each subexpression
    maps a start offset to the set of offsets where one of its sequences can end.
    """
    if not s:
        return False

    @lru_cache(maxsize=None)
    def ends(node: Expr, i: int) -> frozenset[int]:
        # node matches s[i:j] for j in the result
        if i >= len(s):
            return frozenset()
        if isinstance(node, Seq):
            j = i + len(node.types)
            return frozenset({j}) if s[i:j] == node.types else frozenset()
        if isinstance(node, Select):
            return frozenset().union(*(ends(o, i) for o in node.options))
        if isinstance(node, Concat):
            cur = {i}
            for part in node.parts:
                cur = set().union(*(ends(part, j) for j in cur)) if cur else set()
            return frozenset(cur)
        if isinstance(node, Join):
            cur = {i + 1}
            for part in node.parts:
                cur = set().union(*(ends(part, j - 1) for j in cur)) if cur else set()
            return frozenset(cur)
        if isinstance(node, Repeat):
            if s[i] != node.first:
                return frozenset()
            seen = {i + 1}
            frontier = [i + 1]
            while frontier:
                j = frontier.pop()
                for k in ends(node.body, j - 1):
                    if k not in seen:
                        seen.add(k)
                        frontier.append(k)
            return frozenset(seen)
        raise TypeError(node)

    return len(s) in ends(e, 0)


def expand(e: Expr, max_len: int) -> frozenset[str]:
    """Naive denotation: every sequence of ``e`` with length at most ``max_len``."""
    if isinstance(e, Seq):
        return frozenset({e.types}) if len(e.types) <= max_len else frozenset()
    if isinstance(e, Select):
        return frozenset().union(*(expand(o, max_len) for o in e.options))
    if isinstance(e, Concat):
        cur = {""}
        for part in e.parts:
            cur = {x + y for x in cur for y in expand(part, max_len) if len(x) + len(y) <= max_len}
        return frozenset(cur)
    if isinstance(e, Join):
        cur = expand(e.parts[0], max_len)
        for part in e.parts[1:]:
            cur = {x + y[1:] for x in cur for y in expand(part, max_len) if len(x) + len(y) - 1 <= max_len}
        return frozenset(cur)
    if isinstance(e, Repeat):
        body = expand(e.body, max_len)
        result = {e.first} if max_len >= 1 else set()
        frontier = set(result)
        while frontier:
            new = {x + y[1:] for x in frontier for y in body if len(x) + len(y) - 1 <= max_len}
            frontier = new - result
            result |= new
        return frozenset(result)
    raise TypeError(e)


def all_sequences(max_len: int, schema_only: bool = True):
    """Every type sequence up to ``max_len``; schema paths only unless told otherwise."""
    for n in range(1, max_len + 1):
        if schema_only:
            yield from _schema_paths(n)
        else:
            for t in itertools.product(TYPES, repeat=n):
                yield "".join(t)


@lru_cache(maxsize=None)
def _schema_paths(n: int) -> tuple[str, ...]:
    if n == 1:
        return tuple(TYPES)
    return tuple(p + t for p in _schema_paths(n - 1) for t in TYPES if adjacent(p[-1], t))


# -- simplification -----------------------------------------------------------


def simplify(e: Expr) -> Expr:
    """Remove shared-endpoint joins against literal sequences.

    ``[a*].[t1 t2 .. tn]`` becomes ``a* t2 .. tn`` and ``[t1 .. tn].[a*]``
    becomes ``t1 .. t(n-1) a*``; the same rewrite applies to any operand next to
    a literal, and joins of literals collapse. The denoted set is unchanged.
    """
    if isinstance(e, Seq):
        return e
    if isinstance(e, Select):
        return select(*(simplify(o) for o in e.options))
    if isinstance(e, Repeat):
        return repeat(simplify(e.body))
    if isinstance(e, Concat):
        return concat(*(simplify(p) for p in e.parts))
    if isinstance(e, Join):
        parts = [simplify(p) for p in e.parts]
        out = [parts[0]]
        for b in parts[1:]:
            a = out[-1]
            if isinstance(b, Seq) and len(b.types) > 1:
                out[-1] = concat(a, Seq(b.types[1:]))
            elif isinstance(b, Seq):
                pass
            elif isinstance(a, Seq) and len(a.types) > 1:
                out[-1] = concat(Seq(a.types[:-1]), b)
            elif isinstance(a, Seq):
                out[-1] = b
            elif isinstance(b, Concat) and isinstance(b.parts[0], Seq):
                # [a].[t1 .. tk X] == a t2 .. tk X
                head, rest = b.parts[0], b.parts[1:]
                if len(head.types) > 1:
                    out[-1] = concat(a, Seq(head.types[1:]), *rest)
                else:
                    out[-1] = concat(a, *rest)
            elif isinstance(a, Concat) and isinstance(a.parts[-1], Seq):
                tail, rest = a.parts[-1], a.parts[:-1]
                if len(tail.types) > 1:
                    out[-1] = concat(*rest, Seq(tail.types[:-1]), b)
                else:
                    out[-1] = concat(*rest, b)
            else:
                out.append(b)
        return out[0] if len(out) == 1 else Join(tuple(out))
    raise TypeError(e)


# -- concrete walks -----------------------------------------------------------


class WalkLimitError(MetaPathError):
    pass


DEFAULT_WALK_CAP = 2_000_000


def walk_types(walk) -> str:
    return "".join(kind for kind, _ in walk)


def enumerate_paths(g, start: tuple[str, int], max_len: int, cap: int = DEFAULT_WALK_CAP) -> set[tuple]:
    """All walks of at most ``max_len`` edges from ``start`` in the undirected TPG.

    Nodes are ``(type, index)`` pairs. The walk count grows exponentially in
    ``max_len``, so this is meant for small test graphs; more than ``cap`` walks
    raises :class:`WalkLimitError`.
    """
    walks: set[tuple] = set()
    for walk in iter_walks(g.neighbors, start, max_len, cap):
        walks.add(walk)
    return walks


def iter_walks(neighbors, start, max_len: int, cap: int = DEFAULT_WALK_CAP):
    """Depth-first generator of walks; ``neighbors(kind, index)`` yields adjacent nodes."""
    count = 0
    stack = [(start,)]
    while stack:
        walk = stack.pop()
        count += 1
        if count > cap:
            raise WalkLimitError(f"more than {cap} walks from {start} within {max_len} steps")
        yield walk
        if len(walk) - 1 < max_len:
            for nxt in neighbors(*walk[-1]):
                stack.append(walk + (nxt,))
