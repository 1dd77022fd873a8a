"""Transition matrices of the TPG and its projections onto users and representatives."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from regrank.metapath import (
    DEFAULT_WALK_CAP,
    MetaPathError,
    WalkLimitError,
    canned,
    is_schema_path,
    iter_walks,
    matches,
    walk_types,
)
from regrank.preferences import TripartitePreferenceGraph

THETA = {
    "UNC": ("UPU", "UPR", "RPU"),
    "PNC": ("UPU", "UPR"),
    "RNC": ("UPR", "RPU"),
}
VARIANTS = ("UNC", "PNC", "RNC", "GRANK")


class BasicTransitions(NamedTuple):
    up: sp.csr_matrix
    pu: sp.csr_matrix
    pr: sp.csr_matrix
    rp: sp.csr_matrix

    def step(self, a: str, b: str) -> sp.csr_matrix:
        return getattr(self, (a + b).lower())

    def size(self, kind: str) -> int:
        return {"U": self.up.shape[0], "P": self.up.shape[1], "R": self.pr.shape[1]}[kind]


def _scale_rows(m: sp.spmatrix, w: np.ndarray) -> sp.csr_matrix:
    inv = np.zeros_like(w, dtype=float)
    np.divide(1.0, w, out=inv, where=w > 0)
    out = sp.diags(inv) @ m
    return sp.csr_matrix(out)


def _clean(m: sp.spmatrix) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    m.eliminate_zeros()
    m.sort_indices()
    return m


def basic_transitions(g: TripartitePreferenceGraph) -> BasicTransitions:
    """One-step transition blocks, each entry ``1 / N(source)`` with ``N`` the full TPG degree."""
    a, s = g.agree, g.support
    return BasicTransitions(
        up=_clean(_scale_rows(a, g.user_degree)),
        pu=_clean(_scale_rows(g.agree_t, g.pref_degree)),
        pr=_clean(_scale_rows(s, g.pref_degree)),
        rp=_clean(_scale_rows(g.support_t, g.rep_degree)),
    )


def metapath_transition(path: str, basics: BasicTransitions) -> sp.csr_matrix:
    """Product of the basic blocks along a schema path; a single type gives the identity."""
    if not is_schema_path(path):
        raise MetaPathError(f"{path!r} is not a path of the TPG schema")
    result = sp.identity(basics.size(path[0]), format="csr")
    for a, b in zip(path, path[1:]):
        result = _clean(result @ basics.step(a, b))
    return result


@dataclass(frozen=True, eq=False)
class ProjectedGraph:
    """Weighted directed graph handed to personalized PageRank.

    The roster is a concatenation of node blocks (``kinds``, e.g. ``("U", "R")``);
    ``matrix`` is row-stochastic on non-dangling rows. Representative ``2k + side``
    belongs to item ``items[k]``.
    """

    variant: str
    kinds: tuple[str, ...]
    users: tuple
    items: tuple
    matrix: sp.csr_matrix
    pref_winner: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    pref_loser: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def size(self, kind: str) -> int:
        return {"U": len(self.users), "P": len(self.pref_winner), "R": 2 * len(self.items)}[kind]

    @cached_property
    def offsets(self) -> dict[str, int]:
        out, pos = {}, 0
        for k in self.kinds:
            out[k] = pos
            pos += self.size(k)
        return out

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    def node(self, kind: str, k: int) -> int:
        return self.offsets[kind] + k

    def locate(self, node: int) -> tuple[str, int]:
        for kind in reversed(self.kinds):
            if node >= self.offsets[kind]:
                return kind, node - self.offsets[kind]
        raise IndexError(node)

    @cached_property
    def user_index(self) -> dict:
        return {u: k for k, u in enumerate(self.users)}

    @cached_property
    def item_index(self) -> dict:
        return {i: k for k, i in enumerate(self.items)}

    def user_node(self, user) -> int:
        try:
            return self.node("U", self.user_index[user])
        except KeyError:
            raise KeyError(f"user {user!r} is not in the graph") from None

    @cached_property
    def out_weight(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    @cached_property
    def dangling(self) -> np.ndarray:
        """Boolean mask of rows without out-edges."""
        return self.out_weight == 0

    @cached_property
    def matrix_t(self) -> sp.csr_matrix:
        return self.matrix.T.tocsr()

    @property
    def n_edges(self) -> int:
        return self.matrix.nnz

    def block(self, src: str, dst: str) -> sp.csr_matrix:
        r0, c0 = self.offsets[src], self.offsets[dst]
        return self.matrix[r0 : r0 + self.size(src), c0 : c0 + self.size(dst)]

    def neighbors(self, kind: str, k: int) -> list[tuple[str, int]]:
        row = self.node(kind, k)
        lo, hi = self.matrix.indptr[row], self.matrix.indptr[row + 1]
        return [self.locate(int(c)) for c in self.matrix.indices[lo:hi]]

    def equals(self, other: "ProjectedGraph") -> bool:
        """Exact equality, including bit-identical weights."""
        a, b = self.matrix, other.matrix
        return (
            self.variant == other.variant
            and self.kinds == other.kinds
            and self.users == other.users
            and self.items == other.items
            and np.array_equal(self.pref_winner, other.pref_winner)
            and np.array_equal(self.pref_loser, other.pref_loser)
            and a.shape == b.shape
            and np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.indices, b.indices)
            and a.data.tobytes() == b.data.tobytes()
        )


def project(g: TripartitePreferenceGraph, paths, variant: str = "CUSTOM", basics=None) -> ProjectedGraph:
    """Project the TPG over a set of meta-paths.

    Each path becomes an edge type from its first to its last node type with
    weights from the meta-path transition matrix. Rows are normalised jointly
    over all paths leaving the same node type, so a user row keeps the relative
    mass of its user and representative blocks.
    """
    paths = tuple(dict.fromkeys(p.strip().upper() for p in paths))
    for p in paths:
        if len(p) < 2 or not is_schema_path(p):
            raise MetaPathError(f"projection path {p!r} is not a schema path of length >= 1")
    basics = basics if basics is not None else basic_transitions(g)
    kinds = tuple(k for k in "UPR" if any(p[0] == k or p[-1] == k for p in paths))
    sizes = {k: basics.size(k) for k in kinds}

    blocks: dict[tuple[str, str], sp.csr_matrix] = {}
    for p in paths:
        t = metapath_transition(p, basics)
        key = (p[0], p[-1])
        blocks[key] = t if key not in blocks else _clean(blocks[key] + t)

    rows = []
    for src in kinds:
        total = np.zeros(sizes[src])
        for (a, _), m in blocks.items():
            if a == src:
                total += np.asarray(m.sum(axis=1)).ravel()
        row = []
        for dst in kinds:
            m = blocks.get((src, dst))
            row.append(_scale_rows(m, total) if m is not None else sp.csr_matrix((sizes[src], sizes[dst])))
        rows.append(row)
    matrix = _clean(sp.bmat(rows, format="csr"))
    return _projected(g, variant, kinds, matrix)


def _projected(g, variant, kinds, matrix) -> ProjectedGraph:
    with_prefs = "P" in kinds
    return ProjectedGraph(
        variant=variant,
        kinds=kinds,
        users=g.users,
        items=g.items,
        matrix=matrix,
        pref_winner=g.pref_winner if with_prefs else np.zeros(0, dtype=np.int64),
        pref_loser=g.pref_loser if with_prefs else np.zeros(0, dtype=np.int64),
    )


def project_unc(g: TripartitePreferenceGraph, basics=None) -> ProjectedGraph:
    return project(g, THETA["UNC"], "UNC", basics)


def project_pnc(g: TripartitePreferenceGraph, basics=None) -> ProjectedGraph:
    return project(g, THETA["PNC"], "PNC", basics)


def project_rnc(g: TripartitePreferenceGraph, basics=None) -> ProjectedGraph:
    return project(g, THETA["RNC"], "RNC", basics)


def tpg_transition(g: TripartitePreferenceGraph, basics=None) -> ProjectedGraph:
    """Uniform random walk on the undirected TPG (the GRank graph)."""
    b = basics if basics is not None else basic_transitions(g)
    matrix = _clean(sp.bmat([[None, b.up, None], [b.pu, None, b.pr], [None, b.rp, None]], format="csr"))
    return _projected(g, "GRANK", ("U", "P", "R"), matrix)


def build_variant(g: TripartitePreferenceGraph, variant: str, basics=None) -> ProjectedGraph:
    variant = variant.upper()
    if variant == "GRANK":
        return tpg_transition(g, basics)
    if variant in THETA:
        return project(g, THETA[variant], variant, basics)
    raise ValueError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")


# -- projection oracle --------------------------------------------------------


@dataclass
class VerificationReport:
    variant: str
    max_len: int
    projected_paths: int = 0
    tpg_walks: int = 0
    matched: int = 0
    excluded: Counter = field(default_factory=Counter)
    excluded_examples: dict[str, list] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        lines = [
            f"variant={self.variant} max_len={self.max_len} projected_paths={self.projected_paths} "
            f"tpg_walks={self.tpg_walks} matched={self.matched} excluded={sum(self.excluded.values())} "
            f"violations={len(self.violations)}"
        ]
        for types, n in sorted(self.excluded.items(), key=lambda kv: (len(kv[0]), kv[0])):
            lines.append(f"  excluded {types}: {n} walk(s)")
            if types in self.excluded_examples:
                lines.append(f"    e.g. {' - '.join(self.excluded_examples[types])}")
        lines.extend(f"  VIOLATION {v}" for v in self.violations)
        return "\n".join(lines)


def node_label(g: TripartitePreferenceGraph, kind: str, k: int) -> str:
    if kind == "U":
        return str(g.users[k])
    if kind == "P":
        # written loser<winner
        return f"{g.items[g.pref_loser[k]]}<{g.items[g.pref_winner[k]]}"
    return str(g.rep_node(k))


def verify_projection(
    g: TripartitePreferenceGraph | None,
    variant: str,
    max_len: int,
    cap: int = DEFAULT_WALK_CAP,
    examples: int = 20,
) -> VerificationReport:
    """Brute-force check that a projection realises exactly its reliable meta-paths.

    (a) every user-to-representative path of the projected graph, with each
    projected edge expanded to its TPG meta-path, matches the variant's
    description; (b) every TPG walk of at most ``max_len`` steps from a user to a
    representative that matches the description has a positive-weight
    counterpart in the projected graph, and every walk that does not match has
    none. ``g=None`` (no preferences) passes vacuously.
    """
    variant = variant.upper()
    report = VerificationReport(variant, max_len)
    if g is None or g.n_prefs == 0:
        return report
    desc = canned(variant.lower())
    pg = build_variant(g, variant)
    step = 1 if variant == "GRANK" else 2
    coo = pg.matrix.tocoo()
    edges = set(zip(coo.row.tolist(), coo.col.tolist()))

    for u in range(g.n_users):
        for walk in iter_walks(pg.neighbors, ("U", u), max_len // step, cap):
            if walk[-1][0] != "R":
                continue
            report.projected_paths += 1
            types = walk_types(walk) if step == 1 else "P".join(walk_types(walk))
            if not matches(desc, types):
                report.violations.append(f"projected path {types} from user {g.users[u]} is not in {desc}")

    # TPG walks alternate P with U/R, so a walk is fixed by its U/R nodes plus
    # the preference chosen at each hop. Type sequence and counterpart depend
    # only on the U/R nodes; the preference choices just multiply the count.
    shared = _shared_prefs(g)

    def hop_ok(a, b, prefs) -> bool:
        na, nb = pg.node(*a), pg.node(*b)
        if step == 2:
            return (na, nb) in edges
        return any((na, pg.node("P", p)) in edges and (pg.node("P", p), nb) in edges for p in prefs)

    count = 0
    for u in range(g.n_users):
        stack = [((("U", u),), 1)]
        while stack:
            nodes, mult = stack.pop()
            count += 1
            if count > cap:
                raise WalkLimitError(f"more than {cap} walk classes from user {g.users[u]} within {max_len} steps")
            if nodes[-1][0] == "R":
                types = "P".join(walk_types(nodes))
                ok = matches(desc, types)
                counterpart = all(hop_ok(a, b, shared[a][b]) for a, b in zip(nodes, nodes[1:]))
                report.tpg_walks += mult
                if ok:
                    report.matched += mult
                    if not counterpart:
                        report.violations.append(f"reliable walk {_walk_label(g, nodes, shared)} has no projected counterpart")
                else:
                    report.excluded[types] += mult
                    if types not in report.excluded_examples and len(report.excluded_examples) < examples:
                        report.excluded_examples[types] = _walk_label(g, nodes, shared).split(" - ")
                    if counterpart:
                        report.violations.append(f"unreliable walk {_walk_label(g, nodes, shared)} survives projection")
            if 2 * (len(nodes) - 1) + 2 <= max_len:
                for nxt, prefs in shared[nodes[-1]].items():
                    stack.append((nodes + (nxt,), mult * len(prefs)))
    return report


def _shared_prefs(g: TripartitePreferenceGraph) -> dict:
    """For every user or representative, the preferences it shares with each other one."""
    members = {}
    for u in range(g.n_users):
        members[("U", u)] = g.agree[u].indices.tolist()
    for r in range(g.n_reps):
        members[("R", r)] = g.support_t[r].indices.tolist()
    by_pref = {}
    for node, prefs in members.items():
        for p in prefs:
            by_pref.setdefault(p, []).append(node)
    out = {node: {} for node in members}
    for p in range(g.n_prefs):
        for a in by_pref.get(p, ()):
            for b in by_pref[p]:
                out[a].setdefault(b, []).append(p)
    return out


def _walk_label(g, nodes, shared) -> str:
    labels = [node_label(g, *nodes[0])]
    for a, b in zip(nodes, nodes[1:]):
        labels += [node_label(g, "P", shared[a][b][0]), node_label(g, *b)]
    return " - ".join(labels)
