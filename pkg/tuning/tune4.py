"""MF-2 high-p* crossing + REMP-2 fine tuning."""
import time
import numpy as np
from qcmdpc import crypto, attack
from qcmdpc.tanner import TannerGraph
from qcmdpc import decoders as D

params = crypto.CodeParams(q=601, n0=2, block_weights=(15, 15))
priv, pub = crypto.keygen(params, seed=11)
graph = TannerGraph.from_private_key(priv)
q, n = params.q, params.n
prof = attack.distance_profile(priv.h[0])
mu = prof.multiplicities
mu1 = sorted(d for d, m in mu.items() if m == 1)
mu2 = sorted(d for d, m in mu.items() if m >= 2)
out_ds = [d for d in range(1, q//2 + 1) if d not in mu]

def fer_group(cfg, t, ds, trials, seedbase):
    fails = tot = 0
    for d in ds:
        words = np.empty((trials, n), dtype=np.int8); seeds = []
        for trial in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence((seedbase, t, d, trial)))
            u = rng.integers(0, 2, size=params.k).astype(np.uint8)
            c = crypto.encrypt(pub, u, attack.sample_gjs_error(q, n, t, d, rng))
            words[trial] = crypto.bits_to_bipolar(c)
            seeds.append(int(rng.integers(0, 2**63)))
        for out in D.decode_batch(graph, words, cfg, seeds):
            fails += not out.success; tot += 1
    return fails / tot

print('=== MF-2 t=14 high p* ===', flush=True)
for p_star in (0.6, 0.7, 0.8, 0.9):
    cfg = D.DecoderConfig('MF2', imax=30, b=8, p_star=p_star)
    t0 = time.time()
    f2 = fer_group(cfg, 14, mu2[:6], 120, 41)
    f1 = fer_group(cfg, 14, mu1[:10], 120, 41)
    f0 = fer_group(cfg, 14, out_ds[:10], 120, 41)
    print(f'  p*={p_star}: mu2 {f2:.3f} mu1 {f1:.3f} out {f0:.3f} spread {max(f2,f1,f0)-min(f2,f1,f0):.3f} ({time.time()-t0:.0f}s)', flush=True)

print('=== REMP-2 omega=5 t=30 fine grid ===', flush=True)
for p_star in (0.42, 0.44, 0.46):
    cfg = D.DecoderConfig('REMP2', imax=30, omega=5, p_star=p_star)
    t0 = time.time()
    f2 = fer_group(cfg, 30, mu2, 250, 42)
    f1 = fer_group(cfg, 30, mu1[:14], 250, 42)
    f0 = fer_group(cfg, 30, out_ds[:14], 250, 42)
    print(f'  p*={p_star}: mu2 {f2:.3f} mu1 {f1:.3f} out {f0:.3f} (dev2 {f2-f0:+.3f}, dev1 {f1-f0:+.3f}) ({time.time()-t0:.0f}s)', flush=True)
