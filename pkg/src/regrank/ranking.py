"""Personalized PageRank over projected graphs and item ranking from representative scores."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from regrank.preferences import DESIRABLE, UNDESIRABLE
from regrank.projection import ProjectedGraph


@dataclass(frozen=True)
class PPRConfig:
    alpha: float = 0.85
    iterations: int = 20
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"damping must lie in (0, 1), got {self.alpha}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")


@dataclass
class ScoreVector:
    graph: ProjectedGraph
    user: object
    values: np.ndarray
    deltas: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.deltas)

    def rep_score(self, item, side: int) -> float:
        k = self.graph.item_index.get(item)
        if k is None or "R" not in self.graph.kinds:
            return 0.0
        return float(self.values[self.graph.node("R", 2 * k + side)])


def personalized_pagerank(g: ProjectedGraph, user, cfg: PPRConfig = PPRConfig()) -> ScoreVector:
    """Power iteration ``p <- alpha * p M + (1 - alpha) d`` from ``p = d``.

    ``d`` is one-hot on ``user``. Mass sitting on dangling rows is sent back to
    ``d`` each step, so the vector stays a probability distribution.
    """
    start = g.user_node(user)
    d = np.zeros(g.n_nodes)
    d[start] = 1.0
    mt, dangling, a = g.matrix_t, g.dangling, cfg.alpha
    p = d.copy()
    deltas = []
    for _ in range(cfg.iterations):
        nxt = a * (mt @ p)
        nxt[start] += a * p[dangling].sum() + (1 - a)
        delta = float(np.abs(nxt - p).sum())
        deltas.append(delta)
        p = nxt
        if delta < cfg.epsilon:
            break
    return ScoreVector(g, user, p, deltas)


def ppr_batch(g: ProjectedGraph, user_nodes, cfg: PPRConfig = PPRConfig()) -> np.ndarray:
    """PageRank for several target nodes at once; column ``k`` belongs to ``user_nodes[k]``."""
    user_nodes = np.asarray(user_nodes, dtype=np.int64)
    k = len(user_nodes)
    cols = np.arange(k)
    mt, dangling, a = g.matrix_t, g.dangling, cfg.alpha
    p = np.zeros((g.n_nodes, k))
    p[user_nodes, cols] = 1.0
    for _ in range(cfg.iterations):
        nxt = a * (mt @ p)
        nxt[user_nodes, cols] += a * p[dangling].sum(axis=0) + (1 - a)
        delta = np.abs(nxt - p).sum(axis=0)
        p = nxt
        if cfg.epsilon > 0 and np.all(delta < cfg.epsilon):
            break
    return p


def item_ranks(g: ProjectedGraph, values: np.ndarray) -> np.ndarray:
    """``score(i_d) - score(i_u)`` for every graph item; works on vectors and on batch columns."""
    if "R" not in g.kinds:
        return np.zeros((len(g.items),) + values.shape[1:])
    base = g.offsets["R"]
    n = len(g.items)
    d = values[base + DESIRABLE : base + 2 * n : 2]
    u = values[base + UNDESIRABLE : base + 2 * n : 2]
    return d - u


@dataclass(frozen=True)
class RecommendationList:
    items: tuple
    ranks: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(zip(self.items, self.ranks))

    def top(self, n: int) -> "RecommendationList":
        return RecommendationList(self.items[:n], self.ranks[:n])


def order_items(items, ranks) -> RecommendationList:
    """Sort by rank descending, ties by ascending item identifier."""
    pairs = sorted(zip(items, ranks), key=lambda p: (-p[1], p[0]))
    return RecommendationList(tuple(i for i, _ in pairs), tuple(float(r) for _, r in pairs))


def rank_items(scores: ScoreVector, candidates: Iterable) -> RecommendationList:
    """Rank candidates by desirable minus undesirable representative score.

    Items without representatives in the graph get rank 0.
    """
    g = scores.graph
    ranks = item_ranks(g, scores.values)
    cands = list(dict.fromkeys(candidates))
    vals = []
    for i in cands:
        k = g.item_index.get(i)
        vals.append(float(ranks[k]) if k is not None else 0.0)
    return order_items(cands, vals)


def recommend(
    g: ProjectedGraph,
    user,
    n: int,
    training_items: Iterable = (),
    candidates: Iterable | None = None,
    cfg: PPRConfig = PPRConfig(),
) -> RecommendationList:
    """Top-``n`` items for ``user``; candidates default to every graph item not in training."""
    if n < 1:
        raise ValueError("n must be >= 1")
    trained = set(training_items)
    pool = g.items if candidates is None else candidates
    pool = [i for i in pool if i not in trained]
    scores = personalized_pagerank(g, user, cfg)
    return rank_items(scores, pool).top(n)
