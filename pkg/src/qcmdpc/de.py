"""Density evolution for the ternary-message decoder family over the BSC.

Tracks the distribution (p_+1, p_-1, p_0) of variable-to-check messages and
(q_+1, q_-1, q_0) of check-to-variable messages for a regular (d_v, d_c)
ensemble, under the plain ternary decoder and its two random-erasure
variants.  Convergence is judged on the error probability of the unmasked
final decision rule (all d_v incoming messages, weighted channel term),
counting tied decisions as errors.

With a constant masking probability the recursion does not drive the
decision error to zero: below threshold it settles at a fixed point with a
small erasure-induced error floor (measured between 1e-14 and 4e-7 across
the tabulated ensembles), while above threshold it stalls near the channel
error rate (>= 5e-3).  The default eps of 1e-6 separates the two regimes;
a much smaller eps would misclassify floored fixed points as failures.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from multiprocessing import Pool

import numpy as np

VARIANTS = ("AlgE", "REMP1", "REMP2")


class BracketError(RuntimeError):
    """Threshold bisection could not establish a convergent/divergent bracket."""


class MonotonicityError(RuntimeError):
    """Convergence was not monotone in the crossover probability near the bracket."""


def erasure_schedule(p_star: float, p_dec: float, ell: int) -> float:
    """Per-iteration masking probability: starts at p_star, decremented by p_dec.

    p_e(0) = p_star; p_e(l) = p_e(l-1) - p_dec while p_e(l-1) > p_dec, else 0.
    """
    if ell < 0:
        raise ValueError("iteration index must be >= 0")
    p = p_star
    for _ in range(ell):
        p = p - p_dec if p > p_dec else 0.0
    return p


@dataclass(frozen=True)
class DeParams:
    d_v: int
    d_c: int
    omega: float
    delta: float
    variant: str = "AlgE"
    p_star: float = 0.0
    p_dec: float = 0.0
    eps: float = 1e-6
    ell_max: int = 2000

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.d_v < 2 or self.d_c < 2:
            raise ValueError("node degrees must be >= 2")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("crossover probability must be in [0, 1]")
        if not 0.0 <= self.p_dec <= self.p_star <= 1.0:
            raise ValueError("need 0 <= p_dec <= p_star <= 1")
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if float(self.omega) != int(self.omega):
            warnings.warn(
                "non-integer omega changes which message sums tie; thresholds are "
                "tabulated for integer omega",
                stacklevel=3,
            )


@dataclass(frozen=True)
class DeState:
    ell: int
    p_plus: float
    p_minus: float
    p_zero: float
    q_plus: float
    q_minus: float
    q_zero: float
    error_rate: float


@dataclass
class DeResult:
    converged: bool
    final_error: float
    iterations: int
    trajectory: list[DeState] = field(default_factory=list)


def cn_update(p: tuple[float, float, float], d_c: int) -> tuple[float, float, float]:
    """Check-node distribution update (extrinsic product of d_c - 1 messages)."""
    p_plus, p_minus, p_zero = p
    m = d_c - 1
    a = p_plus + p_minus  # = 1 - p_zero for a normalized triple
    b = p_plus - p_minus
    am = a**m
    q_plus = 0.5 * (am + b**m)
    # 0.5*(a^m - b^m) via the factored form; avoids cancellation as p_minus -> 0
    i = np.arange(m)
    q_minus = p_minus * float(np.sum(a**i * b ** (m - 1 - i))) if m > 0 else 0.0
    # 1 - (1 - p_zero)^(dc-1), written through the same power so the triple
    # stays consistent when p_zero is exactly 0 (drift here compounds rapidly)
    q_zero = 1.0 - am
    return (min(max(q_plus, 0.0), 1.0), min(max(q_minus, 0.0), 1.0), min(max(q_zero, 0.0), 1.0))


class _VnTables:
    """Precomputed multinomial tables and inequality-region masks for one (d_v, omega)."""

    def __init__(self, d_v: int, omega: float):
        self.d_v = d_v
        self.omega = omega

        def build(n):
            idx_i, idx_j = np.indices((n + 1, n + 1))
            valid = idx_i + idx_j <= n
            coef = np.zeros((n + 1, n + 1))
            for i in range(n + 1):
                for j in range(n + 1 - i):
                    coef[i, j] = float(math.comb(n, i) * math.comb(n - i, j))
            k = np.where(valid, n - idx_i - idx_j, 0)
            return coef, idx_i - idx_j, k, valid

        m = d_v - 1
        self.coef_m, diff_m, self.k_m, valid = build(m)
        self.masks_m = {
            "gt0": valid & (diff_m > 0),
            "lt0": valid & (diff_m < 0),
            "gt_w": valid & (diff_m > omega),
            "lt_w": valid & (diff_m < omega),
            "gt_nw": valid & (diff_m > -omega),
            "lt_nw": valid & (diff_m < -omega),
        }
        self.coef_d, diff_d, self.k_d, valid_d = build(d_v)
        self.masks_d = {
            "le_nw": valid_d & (diff_d <= -omega),
            "le_w": valid_d & (diff_d <= omega),
            "le_0": valid_d & (diff_d <= 0),
        }

    def _terms(self, q, coef, k_idx, size):
        q_plus, q_minus, q_zero = q
        e = np.arange(size + 1)
        pp = q_plus**e
        pm = q_minus**e
        pz = q_zero**e
        return coef * pp[:, None] * pm[None, :] * pz[k_idx]

    def region_sums(self, q) -> dict[str, float]:
        t = self._terms(q, self.coef_m, self.k_m, self.d_v - 1)
        return {name: float(np.sum(t, where=mask)) for name, mask in self.masks_m.items()}

    def decision_sums(self, q) -> dict[str, float]:
        t = self._terms(q, self.coef_d, self.k_d, self.d_v)
        return {name: float(np.sum(t, where=mask)) for name, mask in self.masks_d.items()}


_TABLE_CACHE: dict[tuple[int, float], _VnTables] = {}


def _tables(d_v: int, omega: float) -> _VnTables:
    key = (d_v, float(omega))
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = _VnTables(d_v, omega)
    return _TABLE_CACHE[key]


def vn_update(
    variant: str,
    d_v: int,
    omega: float,
    channel: tuple[float, float, float],
    q: tuple[float, float, float],
    p_e: float,
) -> tuple[float, float, float]:
    """Variable-node distribution update with the variant's masking rule.

    ``channel`` is the iteration-0 message distribution (channel triple);
    the plain decoder is the p_e = 0 case of either masked variant.
    """
    c_plus, c_minus, c_zero = channel
    s = _tables(d_v, omega).region_sums(q)
    plus_zero = c_zero * s["gt0"]
    plus_agree = c_plus * s["gt_nw"]
    plus_contra = c_minus * s["gt_w"]
    minus_zero = c_zero * s["lt0"]
    minus_contra = c_plus * s["lt_nw"]
    minus_agree = c_minus * s["lt_w"]
    if variant == "REMP1":
        keep = 1.0 - p_e
        p_plus = keep * (plus_zero + plus_agree + plus_contra)
        p_minus = keep * (minus_zero + minus_contra + minus_agree)
    elif variant == "REMP2":
        # only messages contradicting the channel value are erased
        keep = 1.0 - p_e
        p_plus = plus_zero + plus_agree + keep * plus_contra
        p_minus = minus_zero + keep * minus_contra + minus_agree
    elif variant == "AlgE":
        p_plus = plus_zero + plus_agree + plus_contra
        p_minus = minus_zero + minus_contra + minus_agree
    else:
        raise ValueError(f"unknown variant {variant!r}")
    p_plus = max(p_plus, 0.0)
    p_minus = max(p_minus, 0.0)
    total = p_plus + p_minus
    if total > 1.0:  # rounding overshoot; rescale instead of clamping components
        p_plus /= total
        p_minus /= total
        total = 1.0
    return (p_plus, p_minus, 1.0 - total)


def decision_error(
    d_v: int,
    omega: float,
    channel: tuple[float, float, float],
    q: tuple[float, float, float],
) -> float:
    """Error probability of the final decision given the current CN messages.

    Unmasked rule over all d_v incoming messages; a zero decision sum counts
    as an error (conservative).
    """
    c_plus, c_minus, c_zero = channel
    s = _tables(d_v, omega).decision_sums(q)
    return c_plus * s["le_nw"] + c_minus * s["le_w"] + c_zero * s["le_0"]


def de_run(params: DeParams, record_trajectory: bool = True) -> DeResult:
    """Iterate the recursion until the decision error drops below eps or ell_max."""
    channel = (1.0 - params.delta, params.delta, 0.0)
    p = channel
    p_e = params.p_star
    trajectory: list[DeState] = []
    perr = 1.0
    ell = 0
    for ell in range(1, params.ell_max + 1):
        q = cn_update(p, params.d_c)
        perr = decision_error(params.d_v, params.omega, channel, q)
        p = vn_update(params.variant, params.d_v, params.omega, channel, q, p_e)
        if record_trajectory:
            trajectory.append(DeState(ell, *p, *q, perr))
        if perr < params.eps:
            return DeResult(True, perr, ell, trajectory)
        p_e = p_e - params.p_dec if p_e > params.p_dec else 0.0
    return DeResult(False, perr, ell, trajectory)


@dataclass
class ThresholdResult:
    delta_star: float
    errors_star: int
    iterations: int  # iterations of the confirming run at delta_star
    evaluations: list[tuple[float, bool, int]] = field(default_factory=list)


def threshold_search(
    params: DeParams,
    n: int,
    lo: float = 0.0,
    hi: float = 0.5,
    tol: float = 1e-6,
    probe_widths: tuple[float, ...] = (1.0,),
) -> ThresholdResult:
    """Bisect the crossover probability for the largest convergent value.

    Returns delta_star (last convergent point, bracket width <= tol) and
    errors_star = floor(n * delta_star).  Nearby points outside the final
    bracket are re-checked for monotone acceptance; a violation raises
    MonotonicityError rather than silently reporting a threshold.
    """
    evals: list[tuple[float, bool, int]] = []

    def accept(delta: float) -> tuple[bool, int]:
        res = de_run(replace(params, delta=delta), record_trajectory=False)
        evals.append((delta, res.converged, res.iterations))
        return res.converged, res.iterations

    hi_ok, _ = accept(hi)
    if hi_ok:
        raise BracketError(f"DE converges everywhere up to delta={hi}; no threshold in bracket")
    lo_ok, lo_iters = accept(lo)
    if not lo_ok:
        raise BracketError(f"DE does not converge even at delta={lo}; no threshold in bracket")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok, iters = accept(mid)
        if ok:
            lo, lo_iters = mid, iters
        else:
            hi = mid

    for w in probe_widths:
        below = lo - w * tol
        if below > 0.0:
            ok, _ = accept(below)
            if not ok:
                raise MonotonicityError(
                    f"delta={below} fails but delta={lo} converges; evaluations: {evals}"
                )
        above = hi + w * tol
        if above <= 0.5:
            ok, _ = accept(above)
            if ok:
                raise MonotonicityError(
                    f"delta={above} converges but delta={hi} fails; evaluations: {evals}"
                )

    return ThresholdResult(lo, math.floor(n * lo), lo_iters, evals)


@dataclass(frozen=True)
class SweepPoint:
    variant: str
    omega: float
    p_star: float = 0.0
    p_dec: float = 0.0


@dataclass
class SweepRow:
    variant: str
    d_v: int
    d_c: int
    omega: float
    p_star: float
    p_dec: float
    delta_star: float
    errors_star: int
    iterations: int


def _sweep_eval(args) -> SweepRow:
    d_v, d_c, n, point, eps, ell_max, tol = args
    params = DeParams(
        d_v=d_v,
        d_c=d_c,
        omega=point.omega,
        delta=0.0,
        variant=point.variant,
        p_star=point.p_star,
        p_dec=point.p_dec,
        eps=eps,
        ell_max=ell_max,
    )
    res = threshold_search(params, n, tol=tol)
    return SweepRow(
        point.variant,
        d_v,
        d_c,
        point.omega,
        point.p_star,
        point.p_dec,
        res.delta_star,
        res.errors_star,
        res.iterations,
    )


def parameter_sweep(
    d_v: int,
    d_c: int,
    n: int,
    points: list[SweepPoint],
    eps: float = 1e-6,
    ell_max: int = 2000,
    tol: float = 1e-6,
    workers: int = 1,
) -> list[SweepRow]:
    """Threshold per grid point; points are independent and may run in parallel."""
    jobs = [(d_v, d_c, n, pt, eps, ell_max, tol) for pt in points]
    if workers > 1 and len(jobs) > 1:
        with Pool(workers) as pool:
            return pool.map(_sweep_eval, jobs)
    return [_sweep_eval(job) for job in jobs]
