"""Find REMP-2 / MF-2 operating points (t, p*) at the reduced attack instance:
FER in a measurable band and per-multiplicity FERs flattened."""
import time
import numpy as np
from collections import Counter
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

print('=== BF imax sensitivity (t=30, delta=1) ===', flush=True)
for imax in (20, 30, 50):
    cfg = D.DecoderConfig('BF', imax=imax, bf_rule='max_upc_minus', bf_delta=1)
    t0=time.time()
    f2 = fer_group(cfg, 30, mu2[:6], 150, 21)
    f1 = fer_group(cfg, 30, mu1[:10], 150, 21)
    f0 = fer_group(cfg, 30, out_ds[:10], 150, 21)
    print(f'  imax={imax}: mu2 {f2:.3f} mu1 {f1:.3f} out {f0:.3f} sep {f0-f1:+.3f} ({time.time()-t0:.0f}s)', flush=True)

print('=== REMP-2 t scan (omega, p*) ===', flush=True)
for omega in (3, 5):
    for p_star in (0.0, 0.2, 0.4):
        line = []
        for t in (30, 40, 50, 60):
            cfg = D.DecoderConfig('REMP2', imax=30, omega=omega, p_star=p_star)
            f = fer_group(cfg, t, out_ds[:5], 60, 22)
            line.append(f'{t}:{f:.2f}')
        print(f'  omega={omega} p*={p_star}: ' + ' '.join(line), flush=True)

print('=== MF-2 t scan (b=8, p*) ===', flush=True)
for p_star in (0.0, 0.1, 0.2, 0.3):
    line = []
    for t in (24, 30, 36, 42):
        cfg = D.DecoderConfig('MF2', imax=30, b=8, p_star=p_star)
        f = fer_group(cfg, t, out_ds[:5], 60, 23)
        line.append(f'{t}:{f:.2f}')
    print(f'  p*={p_star}: ' + ' '.join(line), flush=True)
