import numpy as np
import pytest

from qcmdpc import crypto
from qcmdpc.crypto import CodeParams
from qcmdpc.decoders import (
    DecodeOutcome,
    DecoderConfig,
    decode,
    decode_alg_e,
    decode_batch,
    decode_bf,
    decode_bf_fast,
    decode_bp,
    decode_gallager_b,
    decode_mbp,
    decode_mf,
    decode_remp1,
    decode_remp2,
    channel_llr,
)
from qcmdpc.tanner import TannerGraph

from oracles import (
    EdgeGraph,
    dense_parity_check,
    ref_decode_bf,
    ref_decode_bp,
    ref_decode_gallager_b,
    ref_decode_ternary,
)

TOY = CodeParams(q=7, n0=2, block_weights=(3, 3))
SMALL = CodeParams(q=101, n0=2, block_weights=(9, 9))


@pytest.fixture(scope="module")
def toy():
    priv, pub = crypto.keygen(TOY, seed=1)
    graph = TannerGraph.from_private_key(priv)
    ref = EdgeGraph(dense_parity_check(priv))
    u = np.random.default_rng(1).integers(0, 2, size=TOY.k).astype(np.uint8)
    cw = crypto.encode(pub, u)
    return priv, pub, graph, ref, cw


@pytest.fixture(scope="module")
def small():
    priv, pub = crypto.keygen(SMALL, seed=3)
    graph = TannerGraph.from_private_key(priv)
    return priv, pub, graph


def single_error_words(cw, n):
    for j in range(n):
        e = np.zeros(n, dtype=np.uint8)
        e[j] = 1
        yield j, crypto.bits_to_bipolar(cw ^ e)


def random_noisy_word(pub, rng, t):
    u = rng.integers(0, 2, size=pub.params.k).astype(np.uint8)
    e = crypto.sample_error(pub.params.n, t, rng)
    return crypto.bits_to_bipolar(crypto.encrypt(pub, u, e))


def outcomes_equal(a: DecodeOutcome, b: DecodeOutcome) -> bool:
    return (
        a.success == b.success
        and a.iterations == b.iterations
        and np.array_equal(a.word, b.word)
        and a.residual_erasures == b.residual_erasures
    )


class TestBF:
    def test_error_free_zero_iterations(self, toy):
        *_, graph, ref, cw = toy[1:], toy[2], toy[3], toy[4]
        graph, cw = toy[2], toy[4]
        out = decode_bf(graph, crypto.bits_to_bipolar(cw), imax=10, b=3)
        assert out.success and out.iterations == 0

    def test_single_error_corrected_one_iteration(self, toy):
        _, _, graph, _, cw = toy
        # b = d_v: only the true error sees all its checks unsatisfied
        for j, word in single_error_words(cw, TOY.n):
            out = decode_bf(graph, word, imax=10, b=3)
            assert out.success and out.iterations == 1
            assert np.array_equal(out.word, cw)

    def test_matches_reference_all_rules(self, toy):
        _, pub, graph, ref, _ = toy
        rng = np.random.default_rng(10)
        rules = [("fixed", 2, 0), ("fixed", 3, 0), ("max_upc", None, 0), ("max_upc_minus", None, 1)]
        for trial in range(40):
            word = random_noisy_word(pub, rng, int(rng.integers(0, 5)))
            rule, b, delta = rules[trial % 4]
            got = decode_bf(graph, word, imax=8, b=b, rule=rule, delta=delta)
            ref_word, ref_ok, ref_it = ref_decode_bf(ref, word, 8, b, rule, delta)
            assert got.success == ref_ok and got.iterations == ref_it
            assert np.array_equal(got.word, (np.asarray(ref_word) < 0).astype(np.uint8))

    def test_super_threshold_fails(self, small):
        priv, pub, graph = small
        word = random_noisy_word(pub, np.random.default_rng(2), SMALL.n // 2)
        out = decode_bf(graph, word, imax=30, b=5)
        assert not out.success

    def test_fast_kernel_matches(self, small):
        _, pub, graph = small
        rng = np.random.default_rng(11)
        for trial in range(60):
            word = random_noisy_word(pub, rng, int(rng.integers(1, 15)))
            rule, b, delta = [("fixed", 5, 0), ("max_upc", None, 0), ("max_upc_minus", None, 1)][trial % 3]
            a = decode_bf(graph, word, 20, b, rule, delta)
            b_ = decode_bf_fast(graph, word, 20, b, rule, delta)
            assert outcomes_equal(a, b_)


class TestGallagerB:
    def test_single_error_corrected(self, toy):
        _, _, graph, _, cw = toy
        for j, word in single_error_words(cw, TOY.n):
            out = decode_gallager_b(graph, word, b=2, imax=10)
            assert out.success and np.array_equal(out.word, cw)

    def test_matches_reference(self, toy):
        _, pub, graph, ref, _ = toy
        rng = np.random.default_rng(20)
        for _ in range(40):
            word = random_noisy_word(pub, rng, int(rng.integers(0, 4)))
            got = decode_gallager_b(graph, word, b=2, imax=8)
            ref_word, ref_ok, ref_it = ref_decode_gallager_b(ref, word, 2, 8)
            assert got.success == ref_ok and got.iterations == ref_it
            assert np.array_equal(got.word, ref_word)

    def test_threshold_bounds_validated(self, toy):
        graph, cw = toy[2], toy[4]
        word = crypto.bits_to_bipolar(cw ^ 1)
        with pytest.raises(ValueError, match="threshold"):
            decode_gallager_b(graph, word, b=0, imax=5)
        with pytest.raises(ValueError, match="threshold"):
            decode_gallager_b(graph, word, b=3, imax=5)

    def test_different_b_pinned(self, small):
        # identical input, two thresholds; outcomes recorded as a regression pin
        _, pub, graph = small
        word = random_noisy_word(pub, np.random.default_rng(77), 8)
        out1 = decode_gallager_b(graph, word, b=1, imax=20)
        out8 = decode_gallager_b(graph, word, b=8, imax=20)
        assert (out1.success, out8.success) == (False, False)
        assert (out1.iterations, out8.iterations) == (20, 20)


class TestMF:
    def test_p_star_zero_is_gallager_b(self, small):
        _, pub, graph = small
        rng = np.random.default_rng(30)
        for variant in (1, 2):
            for trial in range(25):
                word = random_noisy_word(pub, rng, int(rng.integers(0, 10)))
                seed = int(rng.integers(0, 2**62))
                a = decode_mf(graph, word, variant, b=5, p_star=0.0, p_dec=0.0, imax=15, seed=seed)
                b_ = decode_gallager_b(graph, word, b=5, imax=15)
                assert outcomes_equal(a, b_)

    def test_mf1_full_masking_never_flips(self, small):
        # every firing flip is replaced by the channel bit: decoding stalls
        _, pub, graph = small
        word = random_noisy_word(pub, np.random.default_rng(31), 6)
        out = decode_mf(graph, word, 1, b=5, p_star=1.0, p_dec=0.0, imax=20, seed=4)
        assert not out.success and out.iterations == 20

    def test_mf2_full_masking_repeats_previous(self, small):
        _, pub, graph = small
        word = random_noisy_word(pub, np.random.default_rng(31), 6)
        out = decode_mf(graph, word, 2, b=5, p_star=1.0, p_dec=0.0, imax=20, seed=4)
        assert not out.success

    def test_variants_differ_under_masking(self, small):
        _, pub, graph = small
        rng = np.random.default_rng(32)
        diff = 0
        for _ in range(10):
            word = random_noisy_word(pub, rng, 10)
            seed = int(rng.integers(0, 2**62))
            a = decode_mf(graph, word, 1, b=5, p_star=0.5, p_dec=0.0, imax=10, seed=seed)
            b_ = decode_mf(graph, word, 2, b=5, p_star=0.5, p_dec=0.0, imax=10, seed=seed)
            diff += not outcomes_equal(a, b_)
        assert diff > 0

    def test_deterministic(self, small):
        _, pub, graph = small
        word = random_noisy_word(pub, np.random.default_rng(33), 8)
        a = decode_mf(graph, word, 2, b=5, p_star=0.3, p_dec=0.01, imax=15, seed=9)
        b_ = decode_mf(graph, word, 2, b=5, p_star=0.3, p_dec=0.01, imax=15, seed=9)
        assert outcomes_equal(a, b_)


class TestAlgE:
    def test_single_error_corrected(self, toy):
        _, _, graph, _, cw = toy
        for j, word in single_error_words(cw, TOY.n):
            out = decode_alg_e(graph, word, omega=1, imax=10)
            assert out.success and np.array_equal(out.word, cw)

    def test_matches_reference(self, toy):
        _, pub, graph, ref, _ = toy
        rng = np.random.default_rng(40)
        for omega in (1, 2):
            for _ in range(20):
                word = random_noisy_word(pub, rng, int(rng.integers(0, 4)))
                got = decode_alg_e(graph, word, omega=omega, imax=8)
                ref_word, ref_ok, ref_it = ref_decode_ternary(ref, word, omega, 8)
                assert got.success == ref_ok and got.iterations == ref_it
                assert np.array_equal(got.word, ref_word)

    def test_first_iteration_sends_channel_bit(self, toy):
        # empty extrinsic sum: sign(omega * c) = c for omega > 0; with one
        # iteration the decision replays the plain majority behavior
        graph, cw = toy[2], toy[4]
        out = decode_alg_e(graph, crypto.bits_to_bipolar(cw), omega=2, imax=1)
        assert out.success and out.iterations == 0

    def test_equivalent_to_gallager_b(self, small):
        # odd d_v with matching-parity omega: ternary decoder never erases and
        # the hard decisions coincide with threshold ceil((omega + d_v - 1)/2)
        _, pub, graph = small
        d_v = 9
        rng = np.random.default_rng(41)
        for omega in (1, 3, 5):
            b = -(-(omega + d_v - 1) // 2)
            for _ in range(35):
                word = random_noisy_word(pub, rng, int(rng.integers(0, 12)))
                a = decode_alg_e(graph, word, omega=omega, imax=15)
                g = decode_gallager_b(graph, word, b=b, imax=15)
                assert a.success == g.success
                assert a.iterations == g.iterations
                assert np.array_equal(a.word, g.word)


class TestREMP:
    def test_p_star_zero_is_alg_e(self, small):
        _, pub, graph = small
        rng = np.random.default_rng(50)
        for dec in (decode_remp1, decode_remp2):
            for _ in range(25):
                word = random_noisy_word(pub, rng, int(rng.integers(0, 10)))
                seed = int(rng.integers(0, 2**62))
                a = dec(graph, word, omega=3, p_star=0.0, p_dec=0.0, imax=15, seed=seed)
                b_ = decode_alg_e(graph, word, omega=3, imax=15)
                assert outcomes_equal(a, b_)

    def test_remp1_full_masking_stalls(self, small):
        _, pub, graph = small
        word = random_noisy_word(pub, np.random.default_rng(51), 5)
        out = decode_remp1(graph, word, omega=3, p_star=1.0, p_dec=0.0, imax=12, seed=7)
        # all messages erased: decision is the channel word, which has errors
        assert not out.success and out.iterations == 12
        assert np.array_equal(out.word, crypto.bipolar_to_bits(word))

    def test_remp2_error_free_is_mask_free(self, small):
        _, pub, graph = small
        u = np.random.default_rng(52).integers(0, 2, size=SMALL.k).astype(np.uint8)
        cw = crypto.encode(pub, u)
        out = decode_remp2(
            graph, crypto.bits_to_bipolar(cw), omega=3, p_star=1.0, p_dec=0.0, imax=12, seed=7
        )
        assert out.success and out.iterations == 0

    def test_matches_reference_with_masking(self, toy):
        _, pub, graph, ref, _ = toy
        edge_index = {}
        for s in range(graph.cn_degree):
            for b in range(graph.q):
                v = int(graph.row_block[s]) * graph.q + b
                m = (b + int(graph.row_shift[s])) % graph.q
                edge_index[(v, m)] = (s, b)
        shape = (graph.cn_degree, graph.q)
        rng = np.random.default_rng(53)
        for variant, dec in (("REMP1", decode_remp1), ("REMP2", decode_remp2)):
            for _ in range(20):
                word = random_noisy_word(pub, rng, int(rng.integers(0, 4)))
                seed = int(rng.integers(0, 2**62))
                got = dec(graph, word, omega=1, p_star=0.4, p_dec=0.05, imax=8, seed=seed)
                ref_word, ref_ok, ref_it = ref_decode_ternary(
                    ref, word, 1, 8, variant=variant, p_star=0.4, p_dec=0.05,
                    seed=seed, edge_index=edge_index, uniform_shape=shape,
                )
                assert got.success == ref_ok and got.iterations == ref_it, variant
                assert np.array_equal(got.word, ref_word)


class TestBP:
    def test_single_error_corrected_bsc(self, toy):
        _, _, graph, _, cw = toy
        for j, word in single_error_words(cw, TOY.n):
            out = decode_bp(graph, word, t_assumed=1, imax=5, llr_convention="bsc")
            assert out.success and out.iterations <= 5
            assert np.array_equal(out.word, cw)

    def test_matches_reference_both_conventions(self, toy):
        _, pub, graph, ref, _ = toy
        rng = np.random.default_rng(60)
        for convention in ("bsc", "paper"):
            for _ in range(15):
                word = random_noisy_word(pub, rng, int(rng.integers(0, 3)))
                got = decode_bp(graph, word, t_assumed=1, imax=6, llr_convention=convention)
                ref_word, ref_ok, ref_it = ref_decode_bp(
                    ref, word, 1, 6, llr_convention=convention
                )
                assert got.success == ref_ok and got.iterations == ref_it
                assert np.array_equal(got.word, ref_word)

    def test_channel_llr_signs(self):
        # with zero check messages the decision is sign(m_ch): the bsc LLR
        # keeps the channel bit, the as-printed one points the other way
        assert channel_llr(100, 10, "bsc") > 0
        assert channel_llr(100, 10, "paper") < 0

    def test_t_assumed_validated(self, toy):
        graph, cw = toy[2], toy[4]
        word = crypto.bits_to_bipolar(cw)
        with pytest.raises(ValueError):
            decode_bp(graph, word, t_assumed=0, imax=5)
        with pytest.raises(ValueError):
            decode_bp(graph, word, t_assumed=TOY.n, imax=5)


class TestMBP:
    def test_p_star_zero_is_bp(self, small):
        _, pub, graph = small
        rng = np.random.default_rng(70)
        for _ in range(25):
            word = random_noisy_word(pub, rng, int(rng.integers(0, 10)))
            seed = int(rng.integers(0, 2**62))
            a = decode_mbp(graph, word, t_assumed=8, p_star=0.0, p_dec=0.0, imax=15, seed=seed)
            b_ = decode_bp(graph, word, t_assumed=8, imax=15)
            assert outcomes_equal(a, b_)

    def test_full_masking_pinned(self, small):
        # p* = 1: every sign-contradicting message is replaced by the channel
        # value; regression pin of the seeded outcome
        _, pub, graph = small
        word = random_noisy_word(pub, np.random.default_rng(71), 6)
        out = decode_mbp(graph, word, t_assumed=6, p_star=1.0, p_dec=0.0, imax=15, seed=7)
        assert (out.success, out.iterations) == (False, 15)

    def test_deterministic(self, small):
        _, pub, graph = small
        word = random_noisy_word(pub, np.random.default_rng(72), 8)
        a = decode_mbp(graph, word, t_assumed=8, p_star=0.5, p_dec=0.0, imax=10, seed=5)
        b_ = decode_mbp(graph, word, t_assumed=8, p_star=0.5, p_dec=0.0, imax=10, seed=5)
        assert outcomes_equal(a, b_)


class TestConfigValidation:
    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            DecoderConfig("SPA")

    def test_probability_ordering(self):
        with pytest.raises(ValueError):
            DecoderConfig("MF1", p_star=0.1, p_dec=0.2)

    def test_bp_requires_t(self):
        with pytest.raises(ValueError):
            DecoderConfig("BP")

    def test_negative_imax(self):
        with pytest.raises(ValueError):
            DecoderConfig("BF", imax=-1)

    def test_bad_llr_convention(self):
        with pytest.raises(ValueError):
            DecoderConfig("BP", t_assumed=5, llr_convention="weird")

    def test_variant_strings(self):
        from qcmdpc.decoders import VARIANTS

        assert VARIANTS == ("BF", "GallagerB", "MF1", "MF2", "AlgE", "REMP1", "REMP2", "BP", "MBP")


class TestImaxZero:
    def test_failure_when_input_not_codeword(self, small):
        _, pub, graph = small
        word = random_noisy_word(pub, np.random.default_rng(80), 4)
        for cfg in (
            DecoderConfig("BF", imax=0, b=5),
            DecoderConfig("GallagerB", imax=0, b=5),
            DecoderConfig("AlgE", imax=0, omega=3),
            DecoderConfig("BP", imax=0, t_assumed=4),
        ):
            out = decode(graph, word, cfg)
            assert not out.success and out.iterations == 0

    def test_success_on_codeword(self, small):
        _, pub, graph = small
        u = np.random.default_rng(81).integers(0, 2, size=SMALL.k).astype(np.uint8)
        cw = crypto.encode(pub, u)
        out = decode(graph, crypto.bits_to_bipolar(cw), DecoderConfig("BF", imax=0, b=5))
        assert out.success and out.iterations == 0


class TestTermination:
    def test_halts_and_flag_matches_syndrome(self, small):
        priv, pub, graph = small
        rng = np.random.default_rng(90)
        configs = [
            DecoderConfig("BF", imax=7, b=5),
            DecoderConfig("GallagerB", imax=7, b=5),
            DecoderConfig("MF1", imax=7, b=5, p_star=0.3, seed=2),
            DecoderConfig("MF2", imax=7, b=5, p_star=0.3, seed=2),
            DecoderConfig("AlgE", imax=7, omega=3),
            DecoderConfig("REMP1", imax=7, omega=3, p_star=0.2, seed=2),
            DecoderConfig("REMP2", imax=7, omega=3, p_star=0.2, seed=2),
            DecoderConfig("BP", imax=7, t_assumed=6),
            DecoderConfig("MBP", imax=7, t_assumed=6, p_star=0.3, seed=2),
        ]
        for cfg in configs:
            for t in (0, 2, 30):
                word = random_noisy_word(pub, rng, t)
                out = decode(graph, word, cfg)
                assert out.iterations <= 7
                assert out.success == graph.syndrome_is_zero(out.word), cfg.variant


class TestBatchEquivalence:
    def test_all_variants(self, small):
        _, pub, graph = small
        rng = np.random.default_rng(95)
        configs = [
            DecoderConfig("BF", imax=10, bf_rule="max_upc_minus", bf_delta=1),
            DecoderConfig("GallagerB", imax=10, b=5),
            DecoderConfig("MF1", imax=10, b=5, p_star=0.3),
            DecoderConfig("MF2", imax=10, b=5, p_star=0.3),
            DecoderConfig("AlgE", imax=10, omega=3),
            DecoderConfig("REMP1", imax=10, omega=3, p_star=0.1),
            DecoderConfig("REMP2", imax=10, omega=3, p_star=0.3),
            DecoderConfig("BP", imax=10, t_assumed=6),
            DecoderConfig("MBP", imax=10, t_assumed=6, p_star=0.3),
        ]
        batch = np.stack(
            [random_noisy_word(pub, rng, int(rng.integers(0, 12))) for _ in range(16)]
        )
        seeds = [int(rng.integers(0, 2**62)) for _ in range(16)]
        for cfg in configs:
            outs = decode_batch(graph, batch, cfg, seeds)
            for i in range(16):
                expect = decode(graph, batch[i], cfg.with_seed(seeds[i]))
                assert outcomes_equal(outs[i], expect), cfg.variant
