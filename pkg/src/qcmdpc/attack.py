"""Reaction-based key recovery against a decryption oracle.

The attacker measures the frame error rate of ciphertexts whose error
patterns are pairs of ones at a chosen Lee distance d, placed in the first
circulant block.  Distances present in the secret block's distance profile
show a different failure rate, which classifies each d in or out of the
profile; the profile is then inverted to a candidate block by backtracking
search and checked against the public key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import crypto, ring
from .crypto import DecodeFailure, PrivateKey, PublicKey
from .decoders import DecoderConfig
from .ring import BitPolynomial
from .tanner import TannerGraph


class InfeasibleErrorPattern(ValueError):
    """The requested (t, d, Q) pair structure does not fit."""


class VerificationUnavailable(RuntimeError):
    """The public parity block is not invertible; candidates cannot be checked."""


def lee_distance(i: int, j: int, length: int) -> int:
    """min(|i - j|, length - |i - j|) on the length-`length` torus."""
    if not (0 <= i < length and 0 <= j < length):
        raise ValueError(f"positions ({i}, {j}) out of range for length {length}")
    diff = abs(i - j)
    return min(diff, length - diff)


@dataclass(frozen=True)
class DistanceProfile:
    q: int
    counts: tuple[int, ...]  # counts[d] = multiplicity of distance d, d in 0..Q//2

    def multiplicity(self, d: int) -> int:
        return self.counts[d] if 1 <= d <= self.q // 2 else 0

    @property
    def multiplicities(self) -> dict[int, int]:
        return {d: c for d, c in enumerate(self.counts) if d >= 1 and c > 0}

    def support(self) -> frozenset[int]:
        """The set of distances present: {d : mu(d) >= 1}."""
        return frozenset(self.multiplicities)

    def total_pairs(self) -> int:
        return sum(self.counts[1:])


def distance_profile(a: BitPolynomial) -> DistanceProfile:
    """Multiplicity of every pairwise Lee distance between ones of `a`."""
    q = a.q
    pos = np.asarray(a.support())
    counts = np.zeros(q // 2 + 1, dtype=np.int64)
    if len(pos) >= 2:
        iu = np.triu_indices(len(pos), 1)
        diff = np.abs(pos[:, None] - pos[None, :])[iu]
        np.add.at(counts, np.minimum(diff, q - diff), 1)
    return DistanceProfile(q, tuple(int(c) for c in counts))


def max_disjoint_pairs(q: int, d: int) -> int:
    """Maximum number of disjoint position pairs at Lee distance d on Z_q.

    The pairs-at-distance-d graph is a union of gcd(q, d) cycles (each an
    edge doubled when d = q/2), so the matching number has a closed form.
    """
    if d == 0:
        return 0
    if 2 * d == q:
        return q // 2
    g = math.gcd(q, d)
    return g * ((q // g) // 2)


def sample_gjs_error(q: int, n: int, t: int, d: int, rng) -> np.ndarray:
    """Weight-t error: floor(t/2) disjoint pairs at Lee distance d, all in the
    first q positions; an odd leftover one is placed uniformly at random."""
    if not 1 <= d <= q // 2:
        raise InfeasibleErrorPattern(f"distance {d} out of range 1..{q // 2}")
    if t < 0 or t > q:
        raise InfeasibleErrorPattern(f"error weight {t} does not fit in the first {q} positions")
    pairs = t // 2
    if pairs > max_disjoint_pairs(q, d):
        raise InfeasibleErrorPattern(
            f"cannot place {pairs} disjoint pairs at distance {d} on a length-{q} torus"
        )
    rng = crypto._rng_from_seed(rng)
    used: set[int] = set()
    attempts = 0
    limit = 1000 * max(t, 1)
    while len(used) < 2 * pairs:
        if attempts > limit:
            raise InfeasibleErrorPattern(
                f"rejection sampling stalled placing pairs at distance {d} (t={t}, q={q})"
            )
        attempts += 1
        s = int(rng.integers(0, q))
        p2 = (s + d) % q
        if s != p2 and s not in used and p2 not in used:
            used.add(s)
            used.add(p2)
    if t % 2:
        free = [x for x in range(q) if x not in used]
        used.add(int(free[int(rng.integers(0, len(free)))]))
    e = np.zeros(n, dtype=np.uint8)
    e[sorted(used)] = 1
    return e


@dataclass
class DistanceStats:
    d: int
    trials: int
    failures: int

    @property
    def fer(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def stderr(self) -> float:
        if self.trials == 0:
            return 0.0
        p = self.fer
        return math.sqrt(p * (1.0 - p) / self.trials)


@dataclass
class AttackCampaign:
    t: int
    m_trials: int
    failure_stop: int
    per_d: dict[int, DistanceStats] = field(default_factory=dict)


class DecryptionOracle:
    """The attacker's interface: submit a ciphertext, observe success/failure.

    Wraps decryption with a fixed private key and decoder configuration;
    per-query decoder randomness is derived from a counter so repeated
    campaigns are reproducible.
    """

    def __init__(
        self,
        priv: PrivateKey,
        decoder: DecoderConfig,
        error_weight: int | None = None,
    ):
        self._priv = priv
        self._decoder = decoder
        self._error_weight = error_weight
        self._graph = TannerGraph.from_private_key(priv)
        self.queries = 0

    def query(self, ciphertext: np.ndarray, query_seed: int | None = None) -> bool:
        """True when decryption succeeds."""
        self.queries += 1
        dec = self._decoder if query_seed is None else self._decoder.with_seed(query_seed)
        result = crypto.decrypt(
            self._priv, ciphertext, dec, error_weight=self._error_weight, graph=self._graph
        )
        return not isinstance(result, DecodeFailure)


def run_campaign(
    pub: PublicKey,
    oracle: DecryptionOracle,
    t: int,
    m_trials: int,
    d_values,
    seed: int,
    failure_stop: int = 200,
) -> AttackCampaign:
    """Measure the FER per distance, stopping a distance early once
    failure_stop failures are collected.

    Trial RNG is keyed by (seed, d, trial index): results do not depend on
    how distances are sharded across workers.
    """
    campaign = AttackCampaign(t=t, m_trials=m_trials, failure_stop=failure_stop)
    for d in d_values:
        campaign.per_d[d] = campaign_distance(pub, oracle, t, m_trials, d, seed, failure_stop)
    return campaign


def campaign_distance(
    pub: PublicKey,
    oracle: DecryptionOracle,
    t: int,
    m_trials: int,
    d: int,
    seed: int,
    failure_stop: int,
) -> DistanceStats:
    failures = 0
    trials = 0
    for trial in range(m_trials):
        rng = np.random.default_rng(np.random.SeedSequence((seed, d, trial)))
        u = rng.integers(0, 2, size=pub.params.k).astype(np.uint8)
        e = sample_gjs_error(pub.params.q, pub.params.n, t, d, rng)
        c = crypto.encrypt(pub, u, e)
        ok = oracle.query(c, query_seed=int(rng.integers(0, 2**63)))
        trials += 1
        failures += not ok
        if failures >= failure_stop:
            break
    return DistanceStats(d=d, trials=trials, failures=failures)


@dataclass
class ProfileEstimate:
    signal: bool
    in_profile: frozenset[int]
    cut: float | None
    gap: float
    gap_threshold: float

    @property
    def verdict(self) -> str:
        return "signal" if self.signal else "no signal"


def classify_profile(campaign: AttackCampaign, gap_sigmas: float = 3.0) -> ProfileEstimate:
    """Split distances at the largest FER gap; lower cluster = in profile.

    The split only counts as signal when the largest gap exceeds
    gap_sigmas pooled standard errors of the two adjacent estimates.
    """
    stats = sorted(campaign.per_d.values(), key=lambda s: (s.fer, s.d))
    if len(stats) < 2:
        return ProfileEstimate(False, frozenset(), None, 0.0, 0.0)
    total_fail = sum(s.failures for s in stats)
    total_trials = sum(s.trials for s in stats)
    pooled = total_fail / total_trials if total_trials else 0.0
    gaps = [b.fer - a.fer for a, b in zip(stats, stats[1:])]
    i_max = int(np.argmax(gaps))
    gap = gaps[i_max]
    lo, hi = stats[i_max], stats[i_max + 1]
    pooled_var = pooled * (1.0 - pooled)
    se = math.sqrt(pooled_var / max(lo.trials, 1) + pooled_var / max(hi.trials, 1))
    threshold = gap_sigmas * se
    if gap <= threshold or se == 0.0:
        return ProfileEstimate(False, frozenset(), None, gap, threshold)
    cut = 0.5 * (lo.fer + hi.fer)
    members = frozenset(s.d for s in stats[: i_max + 1])
    return ProfileEstimate(True, members, cut, gap, threshold)


def two_proportion_z(f1: int, n1: int, f2: int, n2: int) -> float:
    """z statistic for H0: equal failure probability in the two groups."""
    if n1 == 0 or n2 == 0:
        return 0.0
    p1, p2 = f1 / n1, f2 / n2
    pooled = (f1 + f2) / (n1 + n2)
    var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)
    if var == 0.0:
        return 0.0
    return (p2 - p1) / math.sqrt(var)


def reconstruct_from_profile(
    profile: DistanceProfile,
    w: int,
    q: int,
    node_budget: int | None = None,
) -> BitPolynomial | None:
    """Backtracking search for a weight-w vector whose profile matches.

    Anchored at position 0; positions are placed in increasing order and a
    partial placement is pruned as soon as some pairwise distance exceeds
    its remaining multiplicity.  Returns None when the search space is
    exhausted (or the optional node budget runs out).
    """
    if profile.q != q:
        raise ValueError("profile modulus does not match q")
    if profile.total_pairs() != math.comb(w, 2):
        raise ValueError(
            f"profile has {profile.total_pairs()} pairs, expected C({w},2)={math.comb(w, 2)}"
        )
    if w == 1:
        return ring.from_support([0], q)
    remaining = list(profile.counts)
    placed = [0]
    nodes = 0

    def distances_ok(x: int) -> list[int]:
        ds = []
        for p in placed:
            diff = abs(x - p)
            d = min(diff, q - diff)
            if d == 0 or remaining[d] == 0:
                for dd in ds:
                    remaining[dd] += 1
                return []
            remaining[d] -= 1
            ds.append(d)
        return ds

    def undo(ds: list[int]) -> None:
        for d in ds:
            remaining[d] += 1

    # Canonical rotation: 0 opens the minimal consecutive gap, so the second
    # position is at most floor(q/w) and every later gap (wrap included) is
    # at least that first gap.  This collapses the branching near the root.
    def dfs(start: int, min_gap: int) -> list[int] | None:
        nonlocal nodes
        if len(placed) == w:
            return list(placed)
        hi = q - min_gap - (w - len(placed) - 1) * min_gap
        for x in range(start, hi + 1):
            ds = distances_ok(x)
            if not ds:
                continue
            nodes += 1
            if node_budget is not None and nodes > node_budget:
                undo(ds)
                return None
            placed.append(x)
            found = dfs(x + min_gap, min_gap)
            placed.pop()
            undo(ds)
            if found is not None:
                return found
            if node_budget is not None and nodes > node_budget:
                return None
        return None

    for first_gap in range(1, q // w + 1):
        ds = distances_ok(first_gap)
        if not ds:
            continue
        placed.append(first_gap)
        found = dfs(first_gap + first_gap, first_gap)
        placed.pop()
        undo(ds)
        if found is not None:
            return ring.from_support(found, q)
        if node_budget is not None and nodes > node_budget:
            return None
    return None


def recover_companion_block(pub: PublicKey, candidate_h0: BitPolynomial) -> BitPolynomial:
    """For a two-block key, h1 = g0^{-1} * h0 under the key-generation relation."""
    if pub.params.n0 != 2:
        raise ValueError("companion-block recovery requires a two-block code")
    g0_inv = pub.g[0].inverse()
    if g0_inv is None:
        raise VerificationUnavailable("public parity block is not invertible")
    return g0_inv * candidate_h0


def verify_candidate(
    pub: PublicKey,
    candidate_h0: BitPolynomial,
    expected_weight_h1: int,
) -> bool:
    """Accept a reconstructed block if it implies a companion block of the
    right weight, trying the candidate's reflection as well (the distance
    profile cannot distinguish the two)."""
    for cand in (candidate_h0, candidate_h0.reversed()):
        if recover_companion_block(pub, cand).weight() == expected_weight_h1:
            return True
    return False


def recover_private_key(
    pub: PublicKey,
    candidate_h0: BitPolynomial,
    block_weights: tuple[int, int],
) -> PrivateKey | None:
    """Assemble a working private key from an accepted candidate block."""
    if candidate_h0.weight() != block_weights[0]:
        return None
    for cand in (candidate_h0, candidate_h0.reversed()):
        h1 = recover_companion_block(pub, cand)
        if h1.weight() == block_weights[1]:
            params = crypto.CodeParams(pub.params.q, 2, block_weights)
            return PrivateKey(params, (cand, h1))
    return None
