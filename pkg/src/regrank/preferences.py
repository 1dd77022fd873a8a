"""Pairwise preferences and the tripartite preference graph (users, preferences, representatives)."""

from __future__ import annotations

from collections.abc import Hashable, Iterable
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
import pandas as pd
import scipy.sparse as sp

DESIRABLE = 0
UNDESIRABLE = 1


class Rating(NamedTuple):
    user: Hashable
    item: Hashable
    value: float


class PreferenceObservation(NamedTuple):
    """``user`` preferred item ``preferred`` over item ``other``."""

    user: Hashable
    preferred: Hashable
    other: Hashable


class PreferenceNode(NamedTuple):
    winner: Hashable
    loser: Hashable


class RepresentativeNode(NamedTuple):
    item: Hashable
    side: int  # DESIRABLE or UNDESIRABLE

    def __str__(self) -> str:
        return f"{self.item}_{'d' if self.side == DESIRABLE else 'u'}"


class PreferenceError(ValueError):
    pass


def ratings_frame(ratings) -> pd.DataFrame:
    """Coerce ratings (DataFrame or iterable of triples) to a ``user, item, rating`` frame."""
    if isinstance(ratings, pd.DataFrame):
        frame = ratings.loc[:, ["user", "item", "rating"]]
    else:
        frame = pd.DataFrame(list(ratings), columns=["user", "item", "rating"])
    if frame.duplicated(["user", "item"]).any():
        dup = frame.loc[frame.duplicated(["user", "item"], keep=False)].iloc[0]
        raise PreferenceError(f"duplicate rating for user {dup.user!r}, item {dup.item!r}")
    return frame


def preference_frame(ratings) -> pd.DataFrame:
    """Vectorised preference derivation.

    Returns a frame with columns ``user, preferred, other``: one row for each
    pair of items a user rated with strictly different values. Ties yield nothing.
    """
    frame = ratings_frame(ratings)
    if frame.empty:
        return pd.DataFrame({"user": [], "preferred": [], "other": []})
    frame = frame.sort_values(["user", "item"], kind="stable")
    users = frame["user"].to_numpy()
    items = frame["item"].to_numpy()
    values = frame["rating"].to_numpy(dtype=float)
    # group boundaries of the sorted user column
    starts = np.flatnonzero(np.r_[True, users[1:] != users[:-1]])
    ends = np.r_[starts[1:], len(users)]

    out_u, out_w, out_l = [], [], []
    for lo, hi in zip(starts, ends):
        v = values[lo:hi]
        win, lose = np.nonzero(v[:, None] > v[None, :])
        if len(win):
            out_u.append(np.full(len(win), lo))
            out_w.append(win + lo)
            out_l.append(lose + lo)
    if not out_u:
        return pd.DataFrame({"user": [], "preferred": [], "other": []})
    u = np.concatenate(out_u)
    w = np.concatenate(out_w)
    l = np.concatenate(out_l)
    return pd.DataFrame({"user": users[u], "preferred": items[w], "other": items[l]})


def derive_preferences(ratings) -> set[PreferenceObservation]:
    """Strict-inequality rule: ``<u, i, j>`` for every pair with value(i) > value(j)."""
    prefs = preference_frame(ratings)
    return {PreferenceObservation(*row) for row in prefs.itertuples(index=False)}


def agg(user, pref: PreferenceNode, observations) -> int:
    return int(PreferenceObservation(user, pref.winner, pref.loser) in observations)


def sup(pref: PreferenceNode, rep: RepresentativeNode) -> int:
    if rep.side == DESIRABLE:
        return int(rep.item == pref.winner)
    return int(rep.item == pref.loser)


@dataclass(frozen=True, eq=False)
class TripartitePreferenceGraph:
    """Users, observed preference nodes and item representatives.

    Nodes are dense integers per layer. Users and items are indexed in sorted
    label order, preference nodes in sorted ``(winner, loser)`` index order, and
    representative ``2 * item + side``. ``agree`` is the 0/1 user x preference
    incidence (E_UP), ``support`` the preference x representative incidence (E_PR).
    """

    users: tuple
    items: tuple
    pref_winner: np.ndarray
    pref_loser: np.ndarray
    agree: sp.csr_matrix
    support: sp.csr_matrix

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_prefs(self) -> int:
        return len(self.pref_winner)

    @property
    def n_reps(self) -> int:
        return 2 * len(self.items)

    @cached_property
    def user_index(self) -> dict:
        return {u: k for k, u in enumerate(self.users)}

    @cached_property
    def item_index(self) -> dict:
        return {i: k for k, i in enumerate(self.items)}

    @cached_property
    def pref_index(self) -> dict:
        return {(int(w), int(l)): k for k, (w, l) in enumerate(zip(self.pref_winner, self.pref_loser))}

    def pref_node(self, k: int) -> PreferenceNode:
        return PreferenceNode(self.items[self.pref_winner[k]], self.items[self.pref_loser[k]])

    def rep_node(self, k: int) -> RepresentativeNode:
        return RepresentativeNode(self.items[k // 2], k % 2)

    def rep_id(self, item, side: int) -> int:
        return 2 * self.item_index[item] + side

    @cached_property
    def user_degree(self) -> np.ndarray:
        return np.asarray(self.agree.sum(axis=1)).ravel()

    @cached_property
    def pref_degree(self) -> np.ndarray:
        return np.asarray(self.agree.sum(axis=0)).ravel() + 2

    @cached_property
    def rep_degree(self) -> np.ndarray:
        return np.asarray(self.support.sum(axis=0)).ravel()

    def degree(self, kind: str, k: int) -> int:
        return int({"U": self.user_degree, "P": self.pref_degree, "R": self.rep_degree}[kind][k])

    @property
    def edges_up(self) -> set[tuple]:
        coo = self.agree.tocoo()
        return {(self.users[u], self.pref_node(p)) for u, p in zip(coo.row, coo.col)}

    @property
    def edges_pr(self) -> set[tuple]:
        coo = self.support.tocoo()
        return {(self.pref_node(p), self.rep_node(r)) for p, r in zip(coo.row, coo.col)}

    @property
    def prefs(self) -> set[PreferenceNode]:
        return {self.pref_node(k) for k in range(self.n_prefs)}

    @property
    def reps(self) -> set[RepresentativeNode]:
        """Representatives supported by at least one preference.

        The matrices reserve both sides of every item, so unsupported sides
        exist there as isolated columns.
        """
        return {self.rep_node(int(k)) for k in np.flatnonzero(self.rep_degree)}

    def neighbors(self, kind: str, k: int) -> list[tuple[str, int]]:
        """Adjacent nodes of ``(kind, k)`` in the undirected graph."""
        if kind == "U":
            row = self.agree[k]
            return [("P", int(p)) for p in row.indices]
        if kind == "P":
            users = self.agree_t[k].indices
            return [("U", int(u)) for u in users] + [("R", int(r)) for r in self.support[k].indices]
        return [("P", int(p)) for p in self.support_t[k].indices]

    @cached_property
    def agree_t(self) -> sp.csr_matrix:
        return self.agree.T.tocsr()

    @cached_property
    def support_t(self) -> sp.csr_matrix:
        return self.support.T.tocsr()


def _observation_arrays(observations) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(observations, pd.DataFrame):
        frame = observations.loc[:, ["user", "preferred", "other"]]
    else:
        frame = pd.DataFrame(list(observations), columns=["user", "preferred", "other"])
    return frame["user"].to_numpy(), frame["preferred"].to_numpy(), frame["other"].to_numpy()


def build_tpg(observations) -> TripartitePreferenceGraph:
    """Build the tripartite preference graph from preference observations.

    Accepts an iterable of ``(user, preferred, other)`` triples or a frame as
    returned by :func:`preference_frame`. Only observed preference pairs become
    nodes. Ids follow sorted label order so the graph does not depend on the
    input order.
    """
    users, winners, losers = _observation_arrays(observations)
    if len(users) == 0:
        raise PreferenceError("no preferences")
    if np.any(winners == losers):
        raise PreferenceError("preference of an item over itself")

    user_labels, u_idx = np.unique(users, return_inverse=True)
    item_labels, it_idx = np.unique(np.concatenate([winners, losers]), return_inverse=True)
    n = len(users)
    w_idx, l_idx = it_idx[:n], it_idx[n:]
    n_items = len(item_labels)

    pair_key = w_idx.astype(np.int64) * n_items + l_idx
    pair_keys, p_idx = np.unique(pair_key, return_inverse=True)
    pref_winner = (pair_keys // n_items).astype(np.int64)
    pref_loser = (pair_keys % n_items).astype(np.int64)
    n_prefs = len(pair_keys)

    agree = sp.csr_matrix(
        (np.ones(n), (u_idx, p_idx)), shape=(len(user_labels), n_prefs)
    )
    # duplicated observations collapse to a single edge
    agree.data[:] = 1.0
    agree.sort_indices()

    rows = np.repeat(np.arange(n_prefs), 2)
    cols = np.empty(2 * n_prefs, dtype=np.int64)
    cols[0::2] = 2 * pref_winner + DESIRABLE
    cols[1::2] = 2 * pref_loser + UNDESIRABLE
    support = sp.csr_matrix((np.ones(2 * n_prefs), (rows, cols)), shape=(n_prefs, 2 * n_items))
    support.sort_indices()

    return TripartitePreferenceGraph(
        users=tuple(user_labels.tolist()),
        items=tuple(item_labels.tolist()),
        pref_winner=pref_winner,
        pref_loser=pref_loser,
        agree=agree,
        support=support,
    )
