import os

import numpy as np
import pytest

from qcmdpc import crypto
from qcmdpc.cli import main
from qcmdpc.config import ConfigError, parse_config

CODE_SECTION = """
[code]
q = 101
n0 = 2
block_weights = 9 9
"""

DECODER_SECTION = """
[decoder]
variant = GallagerB
imax = 20
b = 5
"""


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture()
def keys(tmp_path):
    cfg = write(
        tmp_path / "key.ini",
        CODE_SECTION + "\n[experiment]\nkind = keygen\nmaster_seed = 5\n",
    )
    priv = str(tmp_path / "k.priv")
    pub = str(tmp_path / "k.pub")
    assert main(["keygen", "--config", cfg, "--priv", priv, "--pub", pub]) == 0
    return cfg, priv, pub


class TestConfigParsing:
    def test_minimal(self):
        cfg = parse_config(CODE_SECTION + "\n[experiment]\nkind = keygen\nmaster_seed = 1\n")
        assert cfg.kind == "keygen" and cfg.code.q == 101

    def test_missing_seed(self):
        with pytest.raises(ConfigError, match="master_seed"):
            parse_config(CODE_SECTION + "\n[experiment]\nkind = keygen\n")

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="kind"):
            parse_config(CODE_SECTION + "\n[experiment]\nkind = nope\nmaster_seed = 1\n")

    def test_bad_decoder_variant(self):
        text = CODE_SECTION + "\n[decoder]\nvariant = XX\n\n[experiment]\nkind = keygen\nmaster_seed = 1\n"
        with pytest.raises(ConfigError, match="variant"):
            parse_config(text)

    def test_fer_requires_t_values(self):
        text = CODE_SECTION + DECODER_SECTION + "\n[experiment]\nkind = fer-sweep\nmaster_seed = 1\n"
        with pytest.raises(ConfigError, match="t_values"):
            parse_config(text)

    def test_config_hash_stable(self):
        text = CODE_SECTION + "\n[experiment]\nkind = keygen\nmaster_seed = 1\n"
        assert parse_config(text).config_hash() == parse_config(text).config_hash()


class TestKeyLifecycle:
    def test_roundtrip(self, keys, tmp_path):
        cfg, priv, pub = keys
        pub_key = crypto.public_key_from_bytes(open(pub, "rb").read())
        u = np.random.default_rng(1).integers(0, 2, size=pub_key.params.k).astype(np.uint8)
        pt_in = str(tmp_path / "msg.bits")
        open(pt_in, "wb").write(crypto.bits_to_file_bytes(u))

        dec_cfg = write(
            tmp_path / "dec.ini",
            CODE_SECTION + DECODER_SECTION + "\n[experiment]\nkind = decrypt\nmaster_seed = 6\nt = 2\n",
        )
        ct = str(tmp_path / "ct.bits")
        assert main(["encrypt", "--config", dec_cfg, "--pub", pub, "--in", pt_in, "--ct", ct]) == 0
        pt_out = str(tmp_path / "pt.bits")
        assert (
            main(["decrypt", "--config", dec_cfg, "--priv", priv, "--in", ct, "--pt", pt_out]) == 0
        )
        back = crypto.bits_from_file_bytes(open(pt_out, "rb").read())
        assert np.array_equal(back, u)

    def test_decrypt_garbage_is_decode_failure(self, keys, tmp_path):
        cfg, priv, pub = keys
        pub_key = crypto.public_key_from_bytes(open(pub, "rb").read())
        rng = np.random.default_rng(3)
        garbage = rng.integers(0, 2, size=pub_key.params.n).astype(np.uint8)
        ct = str(tmp_path / "garbage.bits")
        open(ct, "wb").write(crypto.bits_to_file_bytes(garbage))
        dec_cfg = write(
            tmp_path / "dec.ini",
            CODE_SECTION + DECODER_SECTION + "\n[experiment]\nkind = decrypt\nmaster_seed = 6\n",
        )
        code = main(["decrypt", "--config", dec_cfg, "--priv", priv, "--in", ct, "--pt", str(tmp_path / "x.bits")])
        assert code == 2

    def test_decrypt_weight_rejection(self, keys, tmp_path):
        cfg, priv, pub = keys
        pub_key = crypto.public_key_from_bytes(open(pub, "rb").read())
        u = np.random.default_rng(1).integers(0, 2, size=pub_key.params.k).astype(np.uint8)
        cw = crypto.encode(pub_key, u)
        ct = str(tmp_path / "cw.bits")
        open(ct, "wb").write(crypto.bits_to_file_bytes(cw))
        dec_cfg = write(
            tmp_path / "dec.ini",
            CODE_SECTION + DECODER_SECTION + "\n[experiment]\nkind = decrypt\nmaster_seed = 6\n",
        )
        code = main([
            "decrypt", "--config", dec_cfg, "--priv", priv, "--in", ct,
            "--pt", str(tmp_path / "x.bits"), "--expected-weight", "1",
        ])
        assert code == 5

    def test_truncated_key_file(self, keys, tmp_path):
        cfg, priv, pub = keys
        data = open(priv, "rb").read()
        bad = str(tmp_path / "bad.priv")
        open(bad, "wb").write(data[: len(data) // 2])
        dec_cfg = write(
            tmp_path / "dec.ini",
            CODE_SECTION + DECODER_SECTION + "\n[experiment]\nkind = decrypt\nmaster_seed = 6\n",
        )
        ct = str(tmp_path / "ct.bits")
        open(ct, "wb").write(crypto.bits_to_file_bytes(np.zeros(202, dtype=np.uint8)))
        code = main(["decrypt", "--config", dec_cfg, "--priv", bad, "--in", ct, "--pt", str(tmp_path / "x")])
        assert code == 4

    def test_config_error_exit(self, tmp_path):
        bad_cfg = write(tmp_path / "bad.ini", "[experiment]\nkind = nope\nmaster_seed = 1\n")
        assert main(["keygen", "--config", bad_cfg, "--priv", "a", "--pub", "b"]) == 3

    def test_missing_config_flag(self):
        assert main(["fer"]) == 3


FER_CONFIG = (
    CODE_SECTION
    + DECODER_SECTION
    + """
[experiment]
kind = fer-sweep
master_seed = 12
t_values = 1 6
trials = 30
failure_stop = 30
workers = 1
"""
)


class TestFerSweep:
    def test_csv_deterministic_across_workers(self, tmp_path):
        cfg1 = write(tmp_path / "f1.ini", FER_CONFIG)
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        assert main(["fer", "--config", cfg1, "--out", out1]) == 0
        assert main(["fer", "--config", cfg1, "--out", out2, "--workers", "2"]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_header_and_columns(self, tmp_path):
        cfg = write(tmp_path / "f.ini", FER_CONFIG)
        out = str(tmp_path / "c.csv")
        assert main(["fer", "--config", cfg, "--out", out]) == 0
        lines = open(out).read().splitlines()
        assert lines[0].startswith("# tool=qcmdpc")
        assert lines[1].startswith("# config_hash=")
        assert "t,trials,failures,fer,avg_iterations" in lines

    def test_resume_identical(self, tmp_path):
        from qcmdpc import experiments as exp
        from qcmdpc.config import parse_config as pc
        from qcmdpc.decoders import DecoderConfig

        cfg = pc(FER_CONFIG)
        priv, pub = crypto.keygen(cfg.code, np.random.SeedSequence((cfg.master_seed, 0x6B6579)))
        ck_path = str(tmp_path / "x.ckpt")
        # interrupted run: only the first unit completes
        ck = exp.Checkpoint(ck_path, "h1")
        exp.run_fer_sweep(priv, pub, cfg.decoder, [1], 30, 30, 12, checkpoint=ck)
        # resumed run over the full unit list
        ck2 = exp.Checkpoint(ck_path, "h1")
        rows_resumed = exp.run_fer_sweep(priv, pub, cfg.decoder, [1, 6], 30, 30, 12, checkpoint=ck2)
        rows_fresh = exp.run_fer_sweep(priv, pub, cfg.decoder, [1, 6], 30, 30, 12)
        assert [(r.t, r.trials, r.failures, r.iterations_total) for r in rows_resumed] == [
            (r.t, r.trials, r.failures, r.iterations_total) for r in rows_fresh
        ]

    def test_checkpoint_config_mismatch(self, tmp_path):
        from qcmdpc import experiments as exp

        ck_path = str(tmp_path / "y.ckpt")
        exp.Checkpoint(ck_path, "aaaa").store("fer", {"1": [1, 2, 3, 4]})
        with pytest.raises(ValueError, match="different config"):
            exp.Checkpoint(ck_path, "bbbb")


GJS_CONFIG = (
    CODE_SECTION
    + DECODER_SECTION
    + """
[experiment]
kind = gjs-campaign
master_seed = 21
t = 8
m_trials = 15
failure_stop = 15
d_min = 1
d_max = 6
evaluation = true
workers = 1
"""
)


class TestGjsCommand:
    def test_runs_and_writes_csv(self, tmp_path, capsys):
        cfg = write(tmp_path / "g.ini", GJS_CONFIG)
        out = str(tmp_path / "g.csv")
        assert main(["gjs", "--config", cfg, "--out", out]) == 0
        printed = capsys.readouterr().out
        assert "verdict:" in printed
        lines = open(out).read().splitlines()
        assert "d,mu_true,trials,failures,fer,stderr" in lines
        assert len([l for l in lines if not l.startswith("#")]) == 1 + 6

    def test_byte_identical_rerun(self, tmp_path):
        cfg = write(tmp_path / "g.ini", GJS_CONFIG)
        out1, out2 = str(tmp_path / "g1.csv"), str(tmp_path / "g2.csv")
        assert main(["gjs", "--config", cfg, "--out", out1]) == 0
        assert main(["gjs", "--config", cfg, "--out", out2, "--workers", "2"]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()


DE_CONFIG = """
[de]
d_v = 5
d_c = 10
n = 1000
variant = AlgE
omega = 2

[experiment]
kind = de-threshold
master_seed = 1
"""


class TestDeCommand:
    def test_threshold(self, tmp_path, capsys):
        cfg = write(tmp_path / "d.ini", DE_CONFIG)
        out = str(tmp_path / "d.csv")
        assert main(["de", "--config", cfg, "--out", out]) == 0
        printed = capsys.readouterr().out
        assert "errors*=" in printed
        header = open(out).read().splitlines()
        assert (
            "variant,d_v,d_c,omega,p_star,p_dec,delta_star,errors_star,iterations" in header
        )

    def test_sweep_multiple_points(self, tmp_path):
        text = DE_CONFIG.replace("omega = 2", "omega_values = 2 3").replace(
            "kind = de-threshold", "kind = de-sweep"
        )
        cfg = write(tmp_path / "ds.ini", text)
        out = str(tmp_path / "ds.csv")
        assert main(["de-sweep", "--config", cfg, "--out", out]) == 0
        rows = [l for l in open(out).read().splitlines() if l and not l.startswith("#")]
        assert len(rows) == 1 + 2

    def test_de_rejects_grid(self, tmp_path):
        text = DE_CONFIG.replace("omega = 2", "omega_values = 2 3")
        cfg = write(tmp_path / "dg.ini", text)
        assert main(["de", "--config", cfg]) == 3
