"""Command-line front end.

Subcommands: keygen, encrypt, decrypt, fer, de, de-sweep, gjs.
Exit codes: 0 success, 2 decode failure, 3 configuration error, 4 I/O
error, 5 error-weight rejection on decrypt.
"""

from __future__ import annotations

import argparse
import sys
from itertools import product

import numpy as np

from . import __version__, attack, crypto, de
from . import experiments as exp
from .config import ConfigError, ExperimentConfig, load_config
from .crypto import DecodeFailure
from .tanner import TannerGraph

EXIT_OK = 0
EXIT_DECODE_FAILURE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_WEIGHT_REJECTED = 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exit code clashes with ours
        raise CliError(message, EXIT_CONFIG)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment config file (INI)")
    p.add_argument("--seed", type=int, help="override the config master_seed")
    p.add_argument("--workers", type=int, help="override the config worker count")
    p.add_argument("--out", help="override the config output path")
    p.add_argument("--resume", action="store_true", help="resume from <out>.ckpt")


def build_parser() -> _Parser:
    p = _Parser(prog="qcmdpc", description=__doc__)
    p.add_argument("--version", action="version", version=f"qcmdpc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("keygen", help="generate a key pair")
    _common_flags(sp)
    sp.add_argument("--priv", required=True, help="private key output path")
    sp.add_argument("--pub", required=True, help="public key output path")

    sp = sub.add_parser("encrypt", help="encrypt a plaintext bit vector")
    _common_flags(sp)
    sp.add_argument("--pub", required=True)
    sp.add_argument("--in", dest="infile", required=True, help="plaintext bits file")
    sp.add_argument("--ct", required=True, help="ciphertext output path")
    sp.add_argument("--error-weight", type=int, help="error weight t (default from config)")

    sp = sub.add_parser("decrypt", help="decrypt a ciphertext")
    _common_flags(sp)
    sp.add_argument("--priv", required=True)
    sp.add_argument("--in", dest="infile", required=True, help="ciphertext file")
    sp.add_argument("--pt", required=True, help="plaintext output path")
    sp.add_argument("--expected-weight", type=int, help="reject unless the implied error has this weight")

    for name, help_ in (
        ("fer", "Monte Carlo FER sweep over error weights"),
        ("de", "density evolution threshold"),
        ("de-sweep", "density evolution threshold sweep over a parameter grid"),
        ("gjs", "reaction-attack campaign against a fresh key"),
    ):
        sp = sub.add_parser(name, help=help_)
        _common_flags(sp)
    return p


def _require_config(args) -> ExperimentConfig:
    if not args.config:
        raise CliError("--config is required for this command", EXIT_CONFIG)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out is not None:
        cfg.out = args.out
    return cfg


def _read_file(path: str) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as exc:
        raise CliError(f"cannot read {path!r}: {exc}", EXIT_IO) from exc


def _write_file(path: str, data: bytes) -> None:
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as exc:
        raise CliError(f"cannot write {path!r}: {exc}", EXIT_IO) from exc


def _header_meta(cfg: ExperimentConfig) -> dict:
    return {"tool": f"qcmdpc {__version__}", "config_hash": cfg.config_hash(), "kind": cfg.kind}


def _checkpoint(cfg: ExperimentConfig, args) -> exp.Checkpoint | None:
    if cfg.out is None:
        return None
    path = cfg.out + ".ckpt"
    if not args.resume:
        import os

        if os.path.exists(path):
            os.remove(path)
    try:
        return exp.Checkpoint(path, cfg.config_hash())
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc


def _campaign_key(cfg: ExperimentConfig):
    """Experiment keys are derived from the master seed, so a config fully
    determines the key pair."""
    seed = np.random.SeedSequence((cfg.master_seed, 0x6B6579))
    return crypto.keygen(cfg.code, seed)


def cmd_keygen(args) -> int:
    cfg = _require_config(args)
    if cfg.code is None:
        raise CliError("keygen requires a [code] section", EXIT_CONFIG)
    try:
        priv, pub = crypto.keygen(cfg.code, np.random.SeedSequence((cfg.master_seed, 0x6B6579)))
    except (crypto.ParameterError, crypto.KeygenError) as exc:
        raise CliError(f"key generation failed: {exc}", EXIT_CONFIG) from exc
    _write_file(args.priv, crypto.private_key_to_bytes(priv))
    _write_file(args.pub, crypto.public_key_to_bytes(pub))
    print(f"wrote {args.priv} and {args.pub} (Q={cfg.code.q}, N0={cfg.code.n0})")
    return EXIT_OK


def cmd_encrypt(args) -> int:
    cfg = _require_config(args)
    try:
        pub = crypto.public_key_from_bytes(_read_file(args.pub))
    except crypto.KeyFormatError as exc:
        raise CliError(f"bad public key: {exc}", EXIT_IO) from exc
    try:
        u = crypto.bits_from_file_bytes(_read_file(args.infile))
    except ValueError as exc:
        raise CliError(f"bad plaintext file: {exc}", EXIT_IO) from exc
    t = args.error_weight if args.error_weight is not None else cfg.t
    if t is None:
        raise CliError("encrypt requires --error-weight or t in the config", EXIT_CONFIG)
    rng = np.random.default_rng(np.random.SeedSequence((cfg.master_seed, 0xE44)))
    try:
        e = crypto.sample_error(pub.params.n, t, rng)
        ct = crypto.encrypt(pub, u, e)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    _write_file(args.ct, crypto.bits_to_file_bytes(ct))
    print(f"wrote ciphertext to {args.ct} (t={t})")
    return EXIT_OK


def cmd_decrypt(args) -> int:
    cfg = _require_config(args)
    if cfg.decoder is None:
        raise CliError("decrypt requires a [decoder] section", EXIT_CONFIG)
    try:
        priv = crypto.private_key_from_bytes(_read_file(args.priv))
    except crypto.KeyFormatError as exc:
        raise CliError(f"bad private key: {exc}", EXIT_IO) from exc
    try:
        ct = crypto.bits_from_file_bytes(_read_file(args.infile))
    except ValueError as exc:
        raise CliError(f"bad ciphertext file: {exc}", EXIT_IO) from exc
    expected = args.expected_weight if args.expected_weight is not None else cfg.t
    try:
        result = crypto.decrypt(priv, ct, cfg.decoder, error_weight=expected)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    if isinstance(result, DecodeFailure):
        if result.reason == "weight":
            print(f"decryption rejected: implied error weight != {expected}", file=sys.stderr)
            return EXIT_WEIGHT_REJECTED
        print(f"decryption failed after {result.iterations} iterations", file=sys.stderr)
        return EXIT_DECODE_FAILURE
    _write_file(args.pt, crypto.bits_to_file_bytes(result))
    print(f"wrote plaintext to {args.pt}")
    return EXIT_OK


def cmd_fer(args) -> int:
    cfg = _require_config(args)
    priv, pub = _campaign_key(cfg)
    ckpt = _checkpoint(cfg, args)
    rows = exp.run_fer_sweep(
        priv,
        pub,
        cfg.decoder,
        cfg.t_values,
        cfg.trials,
        cfg.failure_stop,
        cfg.master_seed,
        workers=cfg.workers,
        checkpoint=ckpt,
    )
    cols, data = exp.fer_csv_rows(rows)
    if cfg.out:
        exp.write_csv(cfg.out, _header_meta(cfg), cols, data)
        print(f"wrote {cfg.out}")
    else:
        for r in rows:
            print(f"t={r.t} trials={r.trials} failures={r.failures} fer={r.fer:.4g} avg_iters={r.avg_iterations:.2f}")
    return EXIT_OK


def _de_points(cfg: ExperimentConfig) -> list[de.SweepPoint]:
    ds = cfg.de_section
    return [
        de.SweepPoint(ds.variant, omega, p_star, p_dec)
        for omega, p_star, p_dec in product(ds.omega_values, ds.p_star_values, ds.p_dec_values)
    ]


def cmd_de(args, sweep: bool) -> int:
    cfg = _require_config(args)
    ds = cfg.de_section
    points = _de_points(cfg)
    if not sweep and len(points) != 1:
        raise CliError("de-threshold expects exactly one grid point; use de-sweep", EXIT_CONFIG)
    ckpt = _checkpoint(cfg, args)
    try:
        rows = exp.run_de_sweep(
            ds.d_v, ds.d_c, ds.n, points, ds.eps, ds.ell_max, workers=cfg.workers, checkpoint=ckpt
        )
    except (de.BracketError, de.MonotonicityError) as exc:
        print(f"threshold search failed: {exc}", file=sys.stderr)
        return EXIT_DECODE_FAILURE
    cols, data = exp.de_csv_rows(rows)
    if cfg.out:
        exp.write_csv(cfg.out, _header_meta(cfg), cols, data)
        print(f"wrote {cfg.out}")
    for r in rows:
        print(
            f"{r.variant} omega={r.omega:g} p*={r.p_star:g} p_dec={r.p_dec:g}: "
            f"delta*={r.delta_star:.7f} errors*={r.errors_star} (iters {r.iterations})"
        )
    return EXIT_OK


def cmd_gjs(args) -> int:
    cfg = _require_config(args)
    priv, pub = _campaign_key(cfg)
    d_max = cfg.d_max if cfg.d_max is not None else cfg.code.q // 2
    d_values = list(range(cfg.d_min, d_max + 1))
    ckpt = _checkpoint(cfg, args)
    rows = exp.run_gjs_campaign(
        priv,
        pub,
        cfg.decoder,
        cfg.t,
        cfg.m_trials,
        d_values,
        cfg.master_seed,
        failure_stop=cfg.failure_stop,
        workers=cfg.workers,
        checkpoint=ckpt,
        evaluation=cfg.evaluation,
    )
    campaign = exp.campaign_from_rows(rows, cfg.t, cfg.m_trials, cfg.failure_stop)
    estimate = attack.classify_profile(campaign, gap_sigmas=cfg.gap_sigmas)
    if not estimate.signal:
        verdict = "no signal"
    elif cfg.evaluation:
        true_support = attack.distance_profile(priv.h[0]).support()
        hit = len(estimate.in_profile & true_support)
        recall = hit / len(true_support) if true_support else 0.0
        verdict = "profile recovered" if recall >= 0.9 else f"signal (recall {recall:.0%})"
    else:
        verdict = "signal"
    cols, data = exp.gjs_csv_rows(rows)
    if cfg.out:
        exp.write_csv(cfg.out, _header_meta(cfg), cols, data)
        print(f"wrote {cfg.out}")
    print(f"verdict: {verdict}")
    if estimate.signal:
        print(f"largest gap {estimate.gap:.4f} vs threshold {estimate.gap_threshold:.4f}; "
              f"{len(estimate.in_profile)} distances classified in-profile")
    else:
        print(f"largest gap {estimate.gap:.4f} below threshold {estimate.gap_threshold:.4f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "keygen":
            return cmd_keygen(args)
        if args.command == "encrypt":
            return cmd_encrypt(args)
        if args.command == "decrypt":
            return cmd_decrypt(args)
        if args.command == "fer":
            return cmd_fer(args)
        if args.command == "de":
            return cmd_de(args, sweep=False)
        if args.command == "de-sweep":
            return cmd_de(args, sweep=True)
        if args.command == "gjs":
            return cmd_gjs(args)
        raise CliError(f"unknown command {args.command!r}", EXIT_CONFIG)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
