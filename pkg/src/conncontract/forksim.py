"""Monte Carlo fork races on Erdos-Renyi topologies.

Two devices propose competing blocks at the same height. Both blocks spread
by synchronous flooding: in every round each node that already holds a block
forwards it to all neighbours that hold nothing yet. A node reached by both
blocks in the same round adopts one of them with a fair coin, and nobody ever
switches. The block with strictly more adopters wins.

:func:`estimate_pc` repeats that race with the first proposer drawn from a
normalised-degree bucket, which yields the (c_norm, P_c) points the
logarithmic confirmation curve is fitted to.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .validation import ValidationError, check_int_at_least, check_probability

BLOCK_I = "block_i"
BLOCK_J = "block_j"
TIE = "tie"


class SkippedBucketWarning(UserWarning):
    """A degree bucket had no eligible origin within the attempt budget."""


@dataclass(frozen=True, eq=False)
class Topology:
    node_count: int
    adjacency: np.ndarray
    degrees: np.ndarray

    @classmethod
    def from_adjacency(cls, adjacency) -> "Topology":
        adj = np.array(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValidationError("adjacency", "must be a square matrix")
        if adj.diagonal().any():
            raise ValidationError("adjacency", "self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise ValidationError("adjacency", "must be symmetric")
        adj.setflags(write=False)
        deg = adj.sum(axis=1)
        deg.setflags(write=False)
        return cls(adj.shape[0], adj, deg)

    @classmethod
    def from_edges(cls, node_count: int, edges) -> "Topology":
        adj = np.zeros((node_count, node_count), dtype=bool)
        for u, v in edges:
            adj[u, v] = adj[v, u] = True
        return cls.from_adjacency(adj)

    @property
    def edges(self) -> set[tuple[int, int]]:
        u, v = np.nonzero(np.triu(self.adjacency, 1))
        return set(zip(u.tolist(), v.tolist()))


@dataclass(frozen=True)
class RaceOutcome:
    winner: str
    adopters_i: int
    adopters_j: int
    rounds: int

    @property
    def score_i(self) -> float:
        """1 for a win of block i, 0.5 for a tie, 0 for a loss."""
        return {BLOCK_I: 1.0, TIE: 0.5, BLOCK_J: 0.0}[self.winner]


@dataclass(frozen=True)
class PcSample:
    z: int
    p_l: float
    c_norm: float
    trials: int
    wins: float
    p_c_hat: float


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _er_adjacency(z: int, p_l: float, rng: np.random.Generator) -> np.ndarray:
    upper = np.triu(rng.random((z, z)) < p_l, 1)
    return upper | upper.T


def generate_topology(z: int, p_l: float, seed) -> Topology:
    """Sample G(z, p_l): every unordered pair is linked independently."""
    check_int_at_least("z", z, 2)
    check_probability("p_l", p_l)
    return Topology.from_adjacency(_er_adjacency(z, p_l, _as_rng(seed)))


def _race(adj: np.ndarray, origin_i: int, origin_j: int, rng) -> RaceOutcome:
    z = adj.shape[0]
    # 1 = holds block i, 2 = holds block j
    state = np.zeros(z, dtype=np.int8)
    state[origin_i] = 1
    state[origin_j] = 2
    # Coin flips favour the lower-numbered origin on u < 0.5, so relabelling
    # the two origins under the same seed mirrors the outcome exactly.
    low_label = 1 if origin_i < origin_j else 2
    high_label = 3 - low_label
    rounds = 0
    while True:
        idle = state == 0
        reach_i = adj[state == 1].any(axis=0) & idle
        reach_j = adj[state == 2].any(axis=0) & idle
        if not (reach_i.any() or reach_j.any()):
            break
        rounds += 1
        contested = np.flatnonzero(reach_i & reach_j)
        state[reach_i & ~reach_j] = 1
        state[reach_j & ~reach_i] = 2
        if len(contested):
            coins = rng.random(len(contested)) < 0.5
            state[contested] = np.where(coins, low_label, high_label)
    n_i = int(np.count_nonzero(state == 1))
    n_j = int(np.count_nonzero(state == 2))
    winner = BLOCK_I if n_i > n_j else BLOCK_J if n_j > n_i else TIE
    return RaceOutcome(winner, n_i, n_j, rounds)


def run_fork_race(top: Topology, origin_i: int, origin_j: int, seed) -> RaceOutcome:
    """Race the blocks proposed at ``origin_i`` and ``origin_j`` to completion."""
    n = top.node_count
    if origin_i == origin_j:
        raise ValidationError("origin_j", "the two proposers must be distinct nodes")
    for name, node in (("origin_i", origin_i), ("origin_j", origin_j)):
        if not 0 <= node < n:
            raise ValidationError(name, f"node {node} is not in a {n}-node topology")
    return _race(top.adjacency, int(origin_i), int(origin_j), _as_rng(seed))


def degree_bucket_edges(z: int, p_l: float, n_buckets: int = 20) -> np.ndarray:
    """Equal-width bucket edges in raw-degree units.

    The edges cover the central 99% of the Binomial(z - 1, p_l) degree law;
    buckets are never narrower than one degree.
    """
    lo = float(stats.binom.ppf(0.005, z - 1, p_l))
    hi = float(stats.binom.ppf(0.995, z - 1, p_l))
    n = max(1, min(n_buckets, int(hi - lo) + 1))
    return np.linspace(lo, hi + 1.0, n + 1)


def _probe_bucket(z, p_l, lo, hi, trials, seed, bucket, max_attempts):
    wins = 0.0
    done = 0
    c_total = 0.0
    attempt = 0
    while done < trials and attempt < max_attempts:
        # per-attempt stream keyed by (seed, bucket, attempt)
        rng = np.random.default_rng([seed, bucket, attempt])
        attempt += 1
        adj = _er_adjacency(z, p_l, rng)
        deg = adj.sum(axis=1)
        eligible = np.flatnonzero((deg >= lo) & (deg < hi))
        if len(eligible) == 0:
            continue
        origin_i = int(rng.choice(eligible))
        origin_j = int(rng.integers(z - 1))
        if origin_j >= origin_i:
            origin_j += 1
        wins += _race(adj, origin_i, origin_j, rng).score_i
        c_total += deg[origin_i] / (z - 1)
        done += 1
    return done, wins, c_total


def estimate_pc(
    z: int,
    p_l: float,
    trials_per_bucket: int,
    seed: int,
    *,
    n_buckets: int = 20,
    max_attempts_factor: int = 50,
    n_jobs: int | None = None,
) -> list[PcSample]:
    """Estimate the fork-win probability per normalised-degree bucket.

    Each trial draws a fresh topology, picks the first proposer among the
    nodes whose degree falls in the bucket and the rival uniformly from the
    remaining nodes. Ties score half a win. A sample's ``c_norm`` is the mean
    normalised degree of the proposers actually probed.

    Buckets in which no eligible proposer turns up within
    ``max_attempts_factor * trials_per_bucket`` topologies are dropped with a
    :class:`SkippedBucketWarning`.
    """
    check_int_at_least("z", z, 2)
    check_probability("p_l", p_l, open_low=True)
    check_int_at_least("trials_per_bucket", trials_per_bucket, 1)
    check_int_at_least("seed", seed, 0)
    edges = degree_bucket_edges(z, p_l, n_buckets)
    max_attempts = max_attempts_factor * trials_per_bucket
    jobs = [
        (z, p_l, edges[k], edges[k + 1], trials_per_bucket, seed, k, max_attempts)
        for k in range(len(edges) - 1)
    ]
    if n_jobs is not None and n_jobs != 1:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(delayed(_probe_bucket)(*job) for job in jobs)
    else:
        results = [_probe_bucket(*job) for job in jobs]

    samples = []
    for k, (done, wins, c_total) in enumerate(results):
        if done == 0:
            warnings.warn(
                f"bucket {k} (degree {edges[k]:g}..{edges[k + 1]:g}) had no eligible "
                f"origin in {max_attempts} topologies; skipped",
                SkippedBucketWarning,
                stacklevel=2,
            )
            continue
        if done < trials_per_bucket:
            warnings.warn(
                f"bucket {k} reached only {done}/{trials_per_bucket} trials",
                SkippedBucketWarning,
                stacklevel=2,
            )
        samples.append(PcSample(z, float(p_l), c_total / done, done, wins, wins / done))
    samples.sort(key=lambda s: s.c_norm)
    return samples
