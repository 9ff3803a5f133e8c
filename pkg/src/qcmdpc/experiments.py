"""Experiment orchestration: Monte Carlo FER sweeps, reaction-attack
campaigns, and DE threshold runs, with deterministic sharding, checkpoint
files, and CSV output.

Determinism contract: every trial's randomness is derived from
(master_seed, unit key, trial index), units are independent, and results
are merged in unit order, so output is byte-identical for any worker count
and across checkpoint/resume boundaries.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import attack, crypto, de
from .crypto import DecodeFailure, PrivateKey, PublicKey
from .decoders import DecoderConfig, decode_batch
from .tanner import TannerGraph

_BATCH = 64


# per-worker state (keys and graph are pickled once per worker, not per unit)
_worker_state: dict = {}


def _init_worker(priv_bytes: bytes, pub_bytes: bytes, decoder: DecoderConfig):
    priv = crypto.private_key_from_bytes(priv_bytes)
    _worker_state["priv"] = priv
    _worker_state["pub"] = crypto.public_key_from_bytes(pub_bytes)
    _worker_state["decoder"] = decoder
    _worker_state["graph"] = TannerGraph.from_private_key(priv)


def _run_units(units, unit_fn, init_args, workers: int):
    """Evaluate unit_fn over units, possibly in a process pool; order preserved."""
    if workers <= 1 or len(units) <= 1:
        _init_worker(*init_args)
        return [unit_fn(u) for u in units]
    ctx = get_context("fork")
    with ctx.Pool(workers, initializer=_init_worker, initargs=init_args) as pool:
        return pool.map(unit_fn, units, chunksize=1)


# FER sweep ----------------------------------------------------------------


@dataclass
class FerRow:
    t: int
    trials: int
    failures: int
    iterations_total: int

    @property
    def fer(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def avg_iterations(self) -> float:
        return self.iterations_total / self.trials if self.trials else 0.0


def _fer_unit(args) -> FerRow:
    t, trial_budget, failure_stop, master_seed = args
    priv: PrivateKey = _worker_state["priv"]
    pub: PublicKey = _worker_state["pub"]
    graph: TannerGraph = _worker_state["graph"]
    decoder: DecoderConfig = _worker_state["decoder"]
    params = pub.params
    failures = trials = iters_total = 0
    trial = 0
    while trial < trial_budget and failures < failure_stop:
        batch_n = min(_BATCH, trial_budget - trial)
        words = np.empty((batch_n, params.n), dtype=np.int8)
        seeds = []
        cts = []
        for i in range(batch_n):
            rng = np.random.default_rng(
                np.random.SeedSequence((master_seed, 0xFE2, t, trial + i))
            )
            u = rng.integers(0, 2, size=params.k).astype(np.uint8)
            e = crypto.sample_error(params.n, t, rng)
            ct = crypto.encrypt(pub, u, e)
            cts.append(ct)
            words[i] = crypto.bits_to_bipolar(ct)
            seeds.append(int(rng.integers(0, 2**63)))
        outs = decode_batch(graph, words, decoder, seeds)
        for i, out in enumerate(outs):
            ok = out.success
            if ok and int(np.count_nonzero(out.word ^ cts[i])) != t:
                ok = False  # decoded to a wrong codeword; weight check rejects
            trials += 1
            iters_total += out.iterations
            failures += not ok
            if failures >= failure_stop:
                break
        trial += batch_n
    return FerRow(t, trials, failures, iters_total)


def run_fer_sweep(
    priv: PrivateKey,
    pub: PublicKey,
    decoder: DecoderConfig,
    t_values,
    trial_budget: int,
    failure_stop: int,
    master_seed: int,
    workers: int = 1,
    checkpoint: "Checkpoint | None" = None,
) -> list[FerRow]:
    done = {} if checkpoint is None else checkpoint.load("fer")
    todo = [t for t in t_values if str(t) not in done]
    init = (crypto.private_key_to_bytes(priv), crypto.public_key_to_bytes(pub), decoder)
    units = [(t, trial_budget, failure_stop, master_seed) for t in todo]
    for t, row in zip(todo, _run_units(units, _fer_unit, init, workers)):
        done[str(t)] = [row.t, row.trials, row.failures, row.iterations_total]
        if checkpoint is not None:
            checkpoint.store("fer", done)
    return [FerRow(*done[str(t)]) for t in sorted(t_values)]


# GJS campaign ---------------------------------------------------------------


@dataclass
class GjsRow:
    d: int
    trials: int
    failures: int
    mu_true: int | None = None

    @property
    def fer(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def stderr(self) -> float:
        if self.trials == 0:
            return 0.0
        p = self.fer
        return (p * (1.0 - p) / self.trials) ** 0.5


def _gjs_unit(args) -> GjsRow:
    d, t, m_trials, failure_stop, master_seed = args
    pub: PublicKey = _worker_state["pub"]
    graph: TannerGraph = _worker_state["graph"]
    decoder: DecoderConfig = _worker_state["decoder"]
    params = pub.params
    failures = trials = 0
    trial = 0
    while trial < m_trials and failures < failure_stop:
        batch_n = min(_BATCH, m_trials - trial)
        words = np.empty((batch_n, params.n), dtype=np.int8)
        seeds = []
        cts = []
        for i in range(batch_n):
            rng = np.random.default_rng(
                np.random.SeedSequence((master_seed, d, trial + i))
            )
            u = rng.integers(0, 2, size=params.k).astype(np.uint8)
            e = attack.sample_gjs_error(params.q, params.n, t, d, rng)
            ct = crypto.encrypt(pub, u, e)
            cts.append(ct)
            words[i] = crypto.bits_to_bipolar(ct)
            seeds.append(int(rng.integers(0, 2**63)))
        outs = decode_batch(graph, words, decoder, seeds)
        for i, out in enumerate(outs):
            ok = out.success
            if ok and int(np.count_nonzero(out.word ^ cts[i])) != t:
                ok = False
            trials += 1
            failures += not ok
            if failures >= failure_stop:
                break
        trial += batch_n
    return GjsRow(d, trials, failures)


def run_gjs_campaign(
    priv: PrivateKey,
    pub: PublicKey,
    decoder: DecoderConfig,
    t: int,
    m_trials: int,
    d_values,
    master_seed: int,
    failure_stop: int = 200,
    workers: int = 1,
    checkpoint: "Checkpoint | None" = None,
    evaluation: bool = True,
) -> list[GjsRow]:
    """Per-distance FER table; equivalent to attack.run_campaign but batched
    and shardable.  In evaluation mode each row carries the secret block's
    true multiplicity for reporting."""
    done = {} if checkpoint is None else checkpoint.load("gjs")
    todo = [d for d in d_values if str(d) not in done]
    init = (crypto.private_key_to_bytes(priv), crypto.public_key_to_bytes(pub), decoder)
    units = [(d, t, m_trials, failure_stop, master_seed) for d in todo]
    for d, row in zip(todo, _run_units(units, _gjs_unit, init, workers)):
        done[str(d)] = [row.d, row.trials, row.failures]
        if checkpoint is not None:
            checkpoint.store("gjs", done)
    profile = attack.distance_profile(priv.h[0]) if evaluation else None
    rows = []
    for d in sorted(d_values):
        stored = done[str(d)]
        rows.append(
            GjsRow(
                stored[0],
                stored[1],
                stored[2],
                mu_true=profile.multiplicity(d) if profile is not None else None,
            )
        )
    return rows


def campaign_from_rows(rows: list[GjsRow], t: int, m_trials: int, failure_stop: int):
    camp = attack.AttackCampaign(t=t, m_trials=m_trials, failure_stop=failure_stop)
    for r in rows:
        camp.per_d[r.d] = attack.DistanceStats(d=r.d, trials=r.trials, failures=r.failures)
    return camp


# checkpointing --------------------------------------------------------------


class Checkpoint:
    """JSON file of completed units, keyed by experiment kind; rewrites are
    atomic so an interrupted run resumes to byte-identical output."""

    def __init__(self, path: str, config_hash: str):
        self.path = path
        self.config_hash = config_hash
        self._data = {"config_hash": config_hash, "units": {}}
        if os.path.exists(path):
            with open(path) as f:
                data = json.load(f)
            if data.get("config_hash") != config_hash:
                raise ValueError(
                    f"checkpoint {path} belongs to a different configuration"
                )
            self._data = data

    def load(self, kind: str) -> dict:
        return dict(self._data["units"].get(kind, {}))

    def store(self, kind: str, done: dict) -> None:
        self._data["units"][kind] = done
        tmp = self.path + ".tmp"
        with open(tmp, "w") as f:
            json.dump(self._data, f)
        os.replace(tmp, self.path)

    def remove(self) -> None:
        if os.path.exists(self.path):
            os.remove(self.path)


# CSV output -----------------------------------------------------------------


def write_csv(path: str, header_meta: dict, columns: list[str], rows: list[list]) -> None:
    lines = []
    for k, v in header_meta.items():
        lines.append(f"# {k}={v}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join("" if v is None else repr(v) if isinstance(v, float) else str(v) for v in row))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def fer_csv_rows(rows: list[FerRow]) -> tuple[list[str], list[list]]:
    cols = ["t", "trials", "failures", "fer", "avg_iterations"]
    return cols, [[r.t, r.trials, r.failures, float(r.fer), float(r.avg_iterations)] for r in rows]


def gjs_csv_rows(rows: list[GjsRow]) -> tuple[list[str], list[list]]:
    cols = ["d", "mu_true", "trials", "failures", "fer", "stderr"]
    return cols, [
        [r.d, r.mu_true, r.trials, r.failures, float(r.fer), float(r.stderr)] for r in rows
    ]


def de_csv_rows(rows: list[de.SweepRow]) -> tuple[list[str], list[list]]:
    cols = [
        "variant",
        "d_v",
        "d_c",
        "omega",
        "p_star",
        "p_dec",
        "delta_star",
        "errors_star",
        "iterations",
    ]
    return cols, [
        [
            r.variant,
            r.d_v,
            r.d_c,
            float(r.omega),
            float(r.p_star),
            float(r.p_dec),
            float(r.delta_star),
            r.errors_star,
            r.iterations,
        ]
        for r in rows
    ]


def run_de_sweep(
    d_v: int,
    d_c: int,
    n: int,
    points: list[de.SweepPoint],
    eps: float,
    ell_max: int,
    workers: int = 1,
    checkpoint: "Checkpoint | None" = None,
) -> list[de.SweepRow]:
    done = {} if checkpoint is None else checkpoint.load("de")

    def key(pt: de.SweepPoint) -> str:
        return f"{pt.variant}|{pt.omega!r}|{pt.p_star!r}|{pt.p_dec!r}"

    todo = [pt for pt in points if key(pt) not in done]
    rows = de.parameter_sweep(d_v, d_c, n, todo, eps=eps, ell_max=ell_max, workers=workers)
    for pt, row in zip(todo, rows):
        done[key(pt)] = [row.delta_star, row.errors_star, row.iterations]
        if checkpoint is not None:
            checkpoint.store("de", done)
    out = []
    for pt in points:
        delta_star, errors_star, iterations = done[key(pt)]
        out.append(
            de.SweepRow(
                pt.variant,
                d_v,
                d_c,
                pt.omega,
                pt.p_star,
                pt.p_dec,
                delta_star,
                errors_star,
                iterations,
            )
        )
    return out
