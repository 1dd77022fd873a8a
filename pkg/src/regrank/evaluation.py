"""UPL train/test protocol, NDCG@N, and per-variant experiment runs."""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from regrank.preferences import build_tpg, preference_frame, ratings_frame
from regrank.projection import VARIANTS, basic_transitions, build_variant
from regrank.ranking import PPRConfig, item_ranks, personalized_pagerank, ppr_batch, rank_items

_log = logging.getLogger(__name__)

MIN_TEST = 10


class EvaluationError(RuntimeError):
    pass


class TooFewTestItems(ValueError):
    pass


@dataclass
class UPLSplit:
    upl: int
    seed: int
    users: tuple
    train: pd.DataFrame
    test: pd.DataFrame


def eligible_users(ratings: pd.DataFrame, upl: int, min_test: int = MIN_TEST) -> tuple:
    counts = ratings.groupby("user")["item"].count()
    return tuple(sorted(counts.index[counts >= upl + min_test].tolist()))


def upl_split(ratings, upl: int, seed: int, min_test: int = MIN_TEST) -> UPLSplit:
    """Per eligible user, a uniform random ``upl``-subset of ratings for training, the rest for test.

    Users with fewer than ``upl + min_test`` ratings are dropped entirely.
    """
    if upl < 1:
        raise ValueError("UPL must be >= 1")
    frame = ratings_frame(ratings)
    users = eligible_users(frame, upl, min_test)
    if not users:
        raise EvaluationError(f"no user has at least UPL + {min_test} = {upl + min_test} ratings")
    frame = frame[frame["user"].isin(users)].sort_values(["user", "item"], kind="stable")
    rng = np.random.default_rng(seed)
    counts = frame.groupby("user", sort=True)["item"].count().to_numpy()
    in_train = np.zeros(len(frame), dtype=bool)
    pos = 0
    for n in counts:
        in_train[pos + rng.choice(n, size=upl, replace=False)] = True
        pos += n
    train = frame[in_train].reset_index(drop=True)
    test = frame[~in_train].reset_index(drop=True)
    return UPLSplit(upl, seed, users, train, test)


def dcg(rels: Sequence[float], gain: str = "standard") -> float:
    """Discounted cumulative gain with ``log2(position + 1)`` discount.

    ``gain="standard"`` uses ``2**rel - 1``; ``"literal"`` uses ``2**(rel - 1)``.
    """
    rels = np.asarray(rels, dtype=float)
    if gain == "standard":
        gains = np.exp2(rels) - 1
    elif gain == "literal":
        gains = np.exp2(rels - 1)
    else:
        raise ValueError(f"unknown gain {gain!r}")
    disc = np.log2(np.arange(2, len(rels) + 2))
    return math.fsum(gains / disc)


def ndcg_at_n(recommended: Sequence, test_ratings: Mapping, n: int = 10, gain: str = "standard") -> float:
    """DCG of the top-``n`` recommendations over DCG of the best ``n`` test ratings.

    Recommended items without a test rating count as relevance 0.
    """
    if len(test_ratings) < n:
        raise TooFewTestItems(f"{len(test_ratings)} test items, need {n}")
    top = list(recommended)[:n]
    rels = [test_ratings.get(i, 0.0) for i in top]
    ideal = sorted(test_ratings.values(), reverse=True)[:n]
    return dcg(rels, gain) / dcg(ideal, gain)


@dataclass
class MetricReport:
    variant: str
    upl: int
    ndcg: list[float] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    users: list[int] = field(default_factory=list)
    skipped: list[int] = field(default_factory=list)
    seconds_per_user: list[float] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.ndcg))

    @property
    def std(self) -> float:
        return float(np.std(self.ndcg))

    @property
    def mean_seconds_per_user(self) -> float:
        return float(np.mean(self.seconds_per_user)) if self.seconds_per_user else float("nan")


def sample_seeds(seed: int, samples: int) -> list[int]:
    """Per-sample seeds derived from one master seed."""
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(samples)]


def evaluate_split(
    split: UPLSplit,
    variants: Sequence[str],
    cfg: PPRConfig = PPRConfig(),
    top_n: int = 10,
    candidate_mode: str = "test",
    gain: str = "standard",
    catalog: Sequence | None = None,
    chunk: int = 256,
    max_batch_cells: int = 4_000_000,
) -> dict[str, tuple[float, int, int, float]]:
    """Mean NDCG, evaluated users, skipped users and seconds per user for each variant."""
    if candidate_mode not in ("test", "catalog"):
        raise ValueError(f"unknown candidate mode {candidate_mode!r}")
    tpg = build_tpg(preference_frame(split.train))
    basics = basic_transitions(tpg)

    test_by_user = {
        u: dict(zip(grp["item"].tolist(), grp["rating"].astype(float).tolist()))
        for u, grp in split.test.groupby("user", sort=True)
    }
    train_by_user = {u: set(grp["item"].tolist()) for u, grp in split.train.groupby("user", sort=True)}
    if candidate_mode == "catalog" and catalog is None:
        catalog = sorted(set(split.train["item"]) | set(split.test["item"]))

    out = {}
    for variant in variants:
        pg = build_variant(tpg, variant, basics)
        width = max(1, min(chunk, max_batch_cells // pg.n_nodes))
        t0 = time.perf_counter()
        scores: list[float] = []
        skipped = 0
        users = list(split.users)
        for lo in range(0, len(users), width):
            batch = users[lo : lo + width]
            present = [u for u in batch if u in pg.user_index]
            cols = {u: k for k, u in enumerate(present)}
            ranks = None
            if present:
                p = ppr_batch(pg, [pg.user_node(u) for u in present], cfg)
                ranks = item_ranks(pg, p)
            for u in batch:
                test = test_by_user.get(u, {})
                if len(test) < top_n:
                    skipped += 1
                    continue
                if candidate_mode == "test":
                    cands = list(test)
                else:
                    cands = [i for i in catalog if i not in train_by_user.get(u, ())]
                vals = []
                for i in cands:
                    k = pg.item_index.get(i)
                    vals.append(float(ranks[k, cols[u]]) if (k is not None and u in cols) else 0.0)
                order = sorted(zip(cands, vals), key=lambda p: (-p[1], p[0]))
                scores.append(ndcg_at_n([i for i, _ in order], test, top_n, gain))
        elapsed = time.perf_counter() - t0
        n = len(scores)
        mean = math.fsum(scores) / n if n else float("nan")
        out[variant] = (mean, n, skipped, elapsed / max(len(users), 1))
        _log.info("%s UPL=%d seed=%d: NDCG@%d=%.4f over %d users", variant, split.upl, split.seed, top_n, mean, n)
    return out


def run_experiment(
    ratings,
    variants: Sequence[str] = VARIANTS,
    upls: Sequence[int] = (10,),
    samples: int = 5,
    seed: int = 0,
    cfg: PPRConfig = PPRConfig(),
    top_n: int = 10,
    candidate_mode: str = "test",
    gain: str = "standard",
) -> list[MetricReport]:
    """Mean and spread of NDCG@N across random UPL samplings, for each UPL and variant."""
    frame = ratings_frame(ratings)
    variants = [v.upper() for v in variants]
    catalog = sorted(frame["item"].unique().tolist()) if candidate_mode == "catalog" else None
    reports = []
    for upl in upls:
        by_variant = {v: MetricReport(v, upl) for v in variants}
        for k, s in enumerate(sample_seeds(seed, samples)):
            try:
                split = upl_split(frame, upl, s)
                res = evaluate_split(split, variants, cfg, top_n, candidate_mode, gain, catalog)
            except Exception as e:
                raise EvaluationError(f"UPL={upl}, sample {k} (seed {s}): {e}") from e
            for v, (mean, n, skipped, spu) in res.items():
                r = by_variant[v]
                r.ndcg.append(mean)
                r.seeds.append(s)
                r.users.append(n)
                r.skipped.append(skipped)
                r.seconds_per_user.append(spu)
        reports.extend(by_variant.values())
    return reports


@dataclass
class RuntimeReport:
    upl: int
    seconds_per_user: dict[str, float]
    edges: dict[str, int]

    @property
    def ordering(self) -> list[str]:
        return sorted(self.seconds_per_user, key=self.seconds_per_user.get)


def runtime_ordering(
    ratings,
    upl: int,
    seed: int = 0,
    n_users: int = 50,
    repeats: int = 3,
    variants: Sequence[str] = ("RNC", "PNC", "UNC", "GRANK"),
    cfg: PPRConfig = PPRConfig(),
) -> RuntimeReport:
    """Mean single-user recommendation time (PageRank + ranking) per variant on one UPL split.

    Graph construction is excluded. Each variant is timed on the same users,
    taking the best of ``repeats`` passes to damp scheduler noise.
    """
    split = upl_split(ratings, upl, seed)
    tpg = build_tpg(preference_frame(split.train))
    basics = basic_transitions(tpg)
    rng = np.random.default_rng(seed)
    pool = [u for u in split.users if u in tpg.user_index]
    users = [pool[k] for k in sorted(rng.choice(len(pool), size=min(n_users, len(pool)), replace=False))]
    test_by_user = {u: grp["item"].tolist() for u, grp in split.test.groupby("user", sort=True)}

    times, edges = {}, {}
    for v in variants:
        pg = build_variant(tpg, v, basics)
        _ = pg.matrix_t, pg.dangling
        edges[v] = pg.n_edges
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            for u in users:
                rank_items(personalized_pagerank(pg, u, cfg), test_by_user[u])
            best = min(best, time.perf_counter() - t0)
        times[v] = best / len(users)
    return RuntimeReport(upl, times, edges)
