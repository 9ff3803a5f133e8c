"""Experiment configuration files: INI sections, schema-validated.

Sections: [code] (QC-MDPC parameters), [decoder] (one decoder variant and
its parameters), [experiment] (kind, budgets, seed, output), [de] (density
evolution ensemble and search grid).  Every experiment requires an explicit
master_seed; there is no ambient randomness.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

from .crypto import CodeParams
from .decoders import BF_RULES, VARIANTS, DecoderConfig

EXPERIMENT_KINDS = (
    "fer-sweep",
    "de-threshold",
    "de-sweep",
    "gjs-campaign",
    "keygen",
    "encrypt",
    "decrypt",
)


class ConfigError(ValueError):
    """Invalid or missing configuration."""


def _get(section, key, cast, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {key!r} in [{section.name}]")
        return default
    raw = section[key].strip()
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r} in [{section.name}]: {raw!r}") from exc


def _int_list(raw: str) -> list[int]:
    return [int(x) for x in raw.replace(",", " ").split()]


def _float_list(raw: str) -> list[float]:
    return [float(x) for x in raw.replace(",", " ").split()]


def _bool(raw: str) -> bool:
    val = raw.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


@dataclass
class DeSection:
    d_v: int
    d_c: int
    n: int
    variant: str = "AlgE"
    omega_values: list[float] = field(default_factory=lambda: [1.0])
    p_star_values: list[float] = field(default_factory=lambda: [0.0])
    p_dec_values: list[float] = field(default_factory=lambda: [0.0])
    eps: float = 1e-6
    ell_max: int = 2000


@dataclass
class ExperimentConfig:
    kind: str
    master_seed: int
    code: CodeParams | None = None
    decoder: DecoderConfig | None = None
    de_section: DeSection | None = None
    t: int | None = None
    t_values: list[int] = field(default_factory=list)
    trials: int = 1000
    failure_stop: int = 200
    m_trials: int = 1000
    d_min: int = 1
    d_max: int | None = None
    evaluation: bool = True
    gap_sigmas: float = 3.0
    workers: int = 1
    out: str | None = None
    raw_text: str = ""

    def config_hash(self) -> str:
        return hashlib.sha256(self.raw_text.encode()).hexdigest()[:16]


def _parse_code(cp: configparser.ConfigParser) -> CodeParams | None:
    if "code" not in cp:
        return None
    sec = cp["code"]
    q = _get(sec, "q", int, required=True)
    n0 = _get(sec, "n0", int, default=2)
    weights = _get(sec, "block_weights", _int_list, required=True)
    try:
        return CodeParams(q=q, n0=n0, block_weights=tuple(weights))
    except ValueError as exc:
        raise ConfigError(f"invalid [code] section: {exc}") from exc


def _parse_decoder(cp: configparser.ConfigParser) -> DecoderConfig | None:
    if "decoder" not in cp:
        return None
    sec = cp["decoder"]
    variant = _get(sec, "variant", str, required=True)
    if variant not in VARIANTS:
        raise ConfigError(f"unknown decoder variant {variant!r}; expected one of {VARIANTS}")
    bf_rule = _get(sec, "bf_rule", str, default="fixed")
    if bf_rule not in BF_RULES:
        raise ConfigError(f"unknown bf_rule {bf_rule!r}; expected one of {BF_RULES}")
    try:
        return DecoderConfig(
            variant=variant,
            imax=_get(sec, "imax", int, default=50),
            b=_get(sec, "b", int),
            bf_rule=bf_rule,
            bf_delta=_get(sec, "bf_delta", int, default=0),
            omega=_get(sec, "omega", float, default=1.0),
            p_star=_get(sec, "p_star", float, default=0.0),
            p_dec=_get(sec, "p_dec", float, default=0.0),
            t_assumed=_get(sec, "t_assumed", int),
            seed=_get(sec, "seed", int, default=0),
            llr_convention=_get(sec, "llr_convention", str, default="paper"),
            bp_clip=_get(sec, "bp_clip", float, default=19.0),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid [decoder] section: {exc}") from exc


def _parse_de(cp: configparser.ConfigParser) -> DeSection | None:
    if "de" not in cp:
        return None
    sec = cp["de"]
    variant = _get(sec, "variant", str, default="AlgE")
    if variant not in ("AlgE", "REMP1", "REMP2"):
        raise ConfigError(f"unknown DE variant {variant!r}")
    omega_values = _get(sec, "omega_values", _float_list)
    if omega_values is None:
        omega_values = [_get(sec, "omega", float, required=True)]
    p_star_values = _get(sec, "p_star_values", _float_list)
    if p_star_values is None:
        p_star_values = [_get(sec, "p_star", float, default=0.0)]
    p_dec_values = _get(sec, "p_dec_values", _float_list)
    if p_dec_values is None:
        p_dec_values = [_get(sec, "p_dec", float, default=0.0)]
    return DeSection(
        d_v=_get(sec, "d_v", int, required=True),
        d_c=_get(sec, "d_c", int, required=True),
        n=_get(sec, "n", int, required=True),
        variant=variant,
        omega_values=omega_values,
        p_star_values=p_star_values,
        p_dec_values=p_dec_values,
        eps=_get(sec, "eps", float, default=1e-6),
        ell_max=_get(sec, "ell_max", int, default=2000),
    )


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if "experiment" not in cp:
        raise ConfigError("missing [experiment] section")
    sec = cp["experiment"]
    kind = _get(sec, "kind", str, required=True)
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {EXPERIMENT_KINDS}")
    cfg = ExperimentConfig(
        kind=kind,
        master_seed=_get(sec, "master_seed", int, required=True),
        code=_parse_code(cp),
        decoder=_parse_decoder(cp),
        de_section=_parse_de(cp),
        t=_get(sec, "t", int),
        t_values=_get(sec, "t_values", _int_list, default=[]),
        trials=_get(sec, "trials", int, default=1000),
        failure_stop=_get(sec, "failure_stop", int, default=200),
        m_trials=_get(sec, "m_trials", int, default=1000),
        d_min=_get(sec, "d_min", int, default=1),
        d_max=_get(sec, "d_max", int),
        evaluation=_get(sec, "evaluation", _bool, default=True),
        gap_sigmas=_get(sec, "gap_sigmas", float, default=3.0),
        workers=_get(sec, "workers", int, default=1),
        out=_get(sec, "out", str),
        raw_text=text,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    needs_code = cfg.kind in ("fer-sweep", "gjs-campaign", "keygen", "encrypt", "decrypt")
    if needs_code and cfg.code is None:
        raise ConfigError(f"experiment kind {cfg.kind!r} requires a [code] section")
    if cfg.kind in ("fer-sweep", "gjs-campaign", "decrypt") and cfg.decoder is None:
        raise ConfigError(f"experiment kind {cfg.kind!r} requires a [decoder] section")
    if cfg.kind in ("de-threshold", "de-sweep") and cfg.de_section is None:
        raise ConfigError(f"experiment kind {cfg.kind!r} requires a [de] section")
    if cfg.kind == "fer-sweep" and not cfg.t_values:
        raise ConfigError("fer-sweep requires t_values")
    if cfg.kind == "gjs-campaign" and cfg.t is None:
        raise ConfigError("gjs-campaign requires t")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.trials < 1 or cfg.m_trials < 1:
        raise ConfigError("trial budgets must be >= 1")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)
