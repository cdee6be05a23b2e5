"""Coupled Euler scheme for the baseline and perturbed equations on a shared
driving stable path, plus the Monte Carlo functionals built on the ensembles.

Both legs are advanced with the same increments (left-point coefficient
evaluation), so identical coefficients and initial values give bitwise
identical paths. Paths are simulated in fixed 4096-column blocks, each block
owning a counter-based substream keyed by (seed, stream label, block index):
results are independent of execution order and worker count.

Per-path state that the functionals need (running maxima, the distance at a
retained time subgrid, final values) is accumulated online; full paths are
kept only on request, since big ensembles would not fit in memory.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .coefficients import CoefficientPair
from .errors import DomainError, NumericError
from .quadrature import ols_loglog
from .rng import RngStream
from .stable import StableLaw, sample_increments


@dataclass(frozen=True)
class SimConfig:
    T: float
    n_steps: int
    n_paths: int
    seed: int
    x_clip: float = 1e12
    block_size: int = 4096
    retain_grid_max: int = 129
    keep_paths: bool = False
    stream_label: str = "coupled"

    def __post_init__(self):
        if self.T <= 0:
            raise DomainError("T must be > 0")
        if self.n_steps < 1 or self.n_paths < 1:
            raise DomainError("n_steps and n_paths must be >= 1")
        if self.x_clip <= 0:
            raise DomainError("x_clip must be > 0")


@dataclass
class CoupledPathEnsemble:
    alpha: float
    config: SimConfig
    retained_idx: np.ndarray
    retained_times: np.ndarray
    abs_diff: np.ndarray            # (n_retained, n_paths) |X - X_tilde|
    y_max: np.ndarray               # per-path sup over the full grid of |X - X_tilde|
    x_abs_max: np.ndarray           # per-path sup |X|
    xt_abs_max: np.ndarray          # per-path sup |X_tilde|
    x_final: np.ndarray
    xt_final: np.ndarray
    flagged: np.ndarray             # nonfinite / clipped paths, excluded from stats
    increments_digest_x: str
    increments_digest_xt: str
    paths_x: np.ndarray | None = None
    paths_xt: np.ndarray | None = None

    @property
    def n_flagged(self) -> int:
        return int(np.sum(self.flagged))

    @property
    def ok(self) -> np.ndarray:
        return ~self.flagged


def _retained_indices(n_steps: int, max_points: int) -> np.ndarray:
    idx = np.round(np.linspace(0, n_steps, min(max_points, n_steps + 1))).astype(int)
    return np.unique(idx)


def simulate_coupled(config: SimConfig, pair: CoefficientPair,
                     law: StableLaw) -> CoupledPathEnsemble:
    """Explicit Euler for both legs on the shared increments.

    X[k+1] = X[k] + b(X[k]) dt + sigma(X[k]) dZ_k and the (t, x) analogue
    for the perturbed leg; deterministic for fixed (seed, config, pair).
    """
    n, npth = config.n_steps, config.n_paths
    dt = config.T / n
    times = dt * np.arange(n + 1)
    ridx = _retained_indices(n, config.retain_grid_max)
    rpos = {k: i for i, k in enumerate(ridx)}

    root = RngStream(config.seed)
    dig_x = hashlib.blake2b(digest_size=16)
    dig_xt = hashlib.blake2b(digest_size=16)

    blocks = []
    for b0 in range(0, npth, config.block_size):
        nb = min(config.block_size, npth - b0)
        stream = root.substream(config.stream_label, b0 // config.block_size)
        dz = sample_increments(law, dt, (n, nb), stream)
        raw = np.ascontiguousarray(dz).tobytes()
        dig_x.update(raw)
        dig_xt.update(raw)

        x = np.full(nb, pair.x0)
        xt = np.full(nb, pair.x0_tilde)
        flagged = np.zeros(nb, dtype=bool)
        absdiff = np.empty((ridx.size, nb))
        y_max = np.abs(x - xt)
        x_max = np.abs(x)
        xt_max = np.abs(xt)
        if 0 in rpos:
            absdiff[rpos[0]] = np.abs(x - xt)
        keep = config.keep_paths
        if keep:
            px = np.empty((n + 1, nb))
            pxt = np.empty((n + 1, nb))
            px[0], pxt[0] = x, xt

        for k in range(n):
            t_k = times[k]
            xs = np.where(flagged, 0.0, x)
            xts = np.where(flagged, 0.0, xt)
            x_new = xs + pair.b(xs) * dt + pair.sigma(xs) * dz[k]
            xt_new = (xts + pair.b_tilde(t_k, xts) * dt
                      + pair.sigma_tilde(t_k, xts) * dz[k])
            bad = (~np.isfinite(x_new) | ~np.isfinite(xt_new)
                   | (np.abs(x_new) > config.x_clip)
                   | (np.abs(xt_new) > config.x_clip))
            flagged |= bad
            x = np.where(flagged, np.nan, x_new)
            xt = np.where(flagged, np.nan, xt_new)
            with np.errstate(invalid="ignore"):
                y_max = np.fmax(y_max, np.abs(x - xt))
                x_max = np.fmax(x_max, np.abs(x))
                xt_max = np.fmax(xt_max, np.abs(xt))
            if k + 1 in rpos:
                absdiff[rpos[k + 1]] = np.abs(x - xt)
            if keep:
                px[k + 1], pxt[k + 1] = x, xt

        blocks.append({
            "absdiff": absdiff, "y_max": y_max, "x_max": x_max,
            "xt_max": xt_max, "x": x, "xt": xt, "flagged": flagged,
            "px": px if keep else None, "pxt": pxt if keep else None,
        })

    ens = CoupledPathEnsemble(
        alpha=law.alpha,
        config=config,
        retained_idx=ridx,
        retained_times=times[ridx],
        abs_diff=np.concatenate([blk["absdiff"] for blk in blocks], axis=1),
        y_max=np.concatenate([blk["y_max"] for blk in blocks]),
        x_abs_max=np.concatenate([blk["x_max"] for blk in blocks]),
        xt_abs_max=np.concatenate([blk["xt_max"] for blk in blocks]),
        x_final=np.concatenate([blk["x"] for blk in blocks]),
        xt_final=np.concatenate([blk["xt"] for blk in blocks]),
        flagged=np.concatenate([blk["flagged"] for blk in blocks]),
        increments_digest_x=dig_x.hexdigest(),
        increments_digest_xt=dig_xt.hexdigest(),
        paths_x=(np.concatenate([blk["px"] for blk in blocks], axis=1)
                 if config.keep_paths else None),
        paths_xt=(np.concatenate([blk["pxt"] for blk in blocks], axis=1)
                  if config.keep_paths else None),
    )
    if ens.n_flagged > 0.01 * npth:
        raise NumericError(
            f"{ens.n_flagged}/{npth} paths exceeded the guard "
            f"x_clip={config.x_clip:g} or went non-finite")
    return ens


def simulate_baseline_average(config: SimConfig, law: StableLaw, b, sigma,
                              x0: float, integrand) -> tuple:
    """Single-leg Euler simulation accumulating the time-averaged integrand:
    mean over paths of sum_k integrand(t_k, X_k) dt, with its standard error.

    This is the Monte Carlo estimator behind the empirical coefficient
    distances (left-endpoint rule in time, matching the Euler grid).
    """
    n, npth = config.n_steps, config.n_paths
    dt = config.T / n
    root = RngStream(config.seed)
    acc = []
    for b0 in range(0, npth, config.block_size):
        nb = min(config.block_size, npth - b0)
        stream = root.substream(config.stream_label, b0 // config.block_size)
        dz = sample_increments(law, dt, (n, nb), stream)
        x = np.full(nb, float(x0))
        tot = np.zeros(nb)
        flagged = np.zeros(nb, dtype=bool)
        for k in range(n):
            xs = np.where(flagged, 0.0, x)
            tot += np.where(flagged, 0.0, integrand(k * dt, xs)) * dt
            x_new = xs + b(xs) * dt + sigma(xs) * dz[k]
            bad = ~np.isfinite(x_new) | (np.abs(x_new) > config.x_clip)
            flagged |= bad
            x = np.where(flagged, np.nan, x_new)
        acc.append(np.where(flagged, np.nan, tot))
    tot = np.concatenate(acc)
    ok = np.isfinite(tot)
    if np.sum(~ok) > 0.01 * npth:
        raise NumericError(f"{np.sum(~ok)}/{npth} paths flagged")
    vals = tot[ok]
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------

@dataclass
class MomentCurve:
    q: float
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    sup: float
    sup_stderr: float
    sup_time: float


def distance_moment_curve(ens: CoupledPathEnsemble, q: float) -> MomentCurve:
    """Per-retained-time Monte Carlo mean of |X_t - X_tilde_t|^q.

    Moments of order q >= alpha do not exist for stable-driven differences;
    the precondition is 0 < q < alpha.
    """
    if not (0.0 < q < ens.alpha):
        raise DomainError(f"moment order q must lie in (0, alpha), got {q}")
    vals = ens.abs_diff[:, ens.ok] ** q
    n = vals.shape[1]
    mean = vals.mean(axis=1)
    stderr = vals.std(axis=1, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    i_sup = int(np.argmax(mean))
    return MomentCurve(q=q, times=ens.retained_times, mean=mean, stderr=stderr,
                       sup=float(mean[i_sup]), sup_stderr=float(stderr[i_sup]),
                       sup_time=float(ens.retained_times[i_sup]))


@dataclass
class TailEstimate:
    h: float
    prob: float
    wilson_low: float
    wilson_high: float
    n: int


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def tail_probability(ens: CoupledPathEnsemble, h: float) -> TailEstimate:
    """Fraction of paths with sup_k |X - X_tilde|^(alpha-1) > h over the full
    simulation grid (a grid sup, which underestimates the continuous sup)."""
    if h <= 0:
        raise DomainError("tail threshold h must be > 0")
    y = ens.y_max[ens.ok]
    n = y.size
    hits = int(np.sum(y ** (ens.alpha - 1.0) > h))
    lo, hi = wilson_interval(hits, n)
    return TailEstimate(h=h, prob=hits / n, wilson_low=lo, wilson_high=hi, n=n)


@dataclass
class UniformLpReport:
    p: float
    labels: list
    means: np.ndarray
    stderrs: np.ndarray
    common_fit: float
    max_abs_dev_in_se: float
    passes: bool
    slope: float
    slope_se: float
    slope_ci_contains_zero: bool


def uniform_lp_check(sup_abs_values, p: float, alpha: float,
                     labels=None) -> UniformLpReport:
    """Empirical E[sup_k |X|^p] across a coefficient sequence.

    Passes when every member mean sits within 3 standard errors of the
    common (inverse-variance weighted) constant fit. sup_abs_values is a
    list of per-path sup|X| arrays or of ensembles (whose baseline leg is
    used), one per member n.
    """
    if not (1.0 < p < alpha):
        raise DomainError(f"p must lie in (1, alpha), got {p}")
    means, ses = [], []
    for arr in sup_abs_values:
        if isinstance(arr, CoupledPathEnsemble):
            arr = arr.x_abs_max[arr.ok]
        v = np.asarray(arr, dtype=float)
        v = v[np.isfinite(v)] ** p
        means.append(v.mean())
        ses.append(v.std(ddof=1) / math.sqrt(v.size))
    means = np.array(means)
    ses = np.array(ses)
    w = 1.0 / np.maximum(ses, 1e-300) ** 2
    fit = float(np.sum(w * means) / np.sum(w))
    dev = np.abs(means - fit) / np.maximum(ses, 1e-300)
    idx = np.arange(1.0, means.size + 1.0)
    # linear trend in the member index; CI containing zero = no drift
    mx = idx.mean()
    sxx = np.sum((idx - mx) ** 2)
    slope = float(np.sum((idx - mx) * (means - means.mean())) / sxx)
    resid = means - (means.mean() + slope * (idx - mx))
    dof = max(means.size - 2, 1)
    slope_se = float(np.sqrt(np.sum(resid ** 2) / dof / sxx))
    return UniformLpReport(
        p=p, labels=list(labels) if labels is not None else list(range(len(means))),
        means=means, stderrs=ses, common_fit=fit,
        max_abs_dev_in_se=float(dev.max()),
        passes=bool(np.all(dev <= 3.0)),
        slope=slope, slope_se=slope_se,
        slope_ci_contains_zero=bool(abs(slope) <= 1.959963984540054 * slope_se))


def self_similarity_slope(law: StableLaw, horizons, config: SimConfig) -> tuple:
    """Median |X_T - x0| for b=0, sigma=1 across horizons, regressed log-log
    against T; the scaling exponent of the driving law is 1/alpha."""
    medians = []
    for i, T in enumerate(horizons):
        cfg = replace(config, T=float(T), stream_label=f"selfsim-{i}")
        root = RngStream(cfg.seed)
        vals = []
        for b0 in range(0, cfg.n_paths, cfg.block_size):
            nb = min(cfg.block_size, cfg.n_paths - b0)
            stream = root.substream(cfg.stream_label, b0 // cfg.block_size)
            dz = sample_increments(law, cfg.T / cfg.n_steps, (cfg.n_steps, nb), stream)
            vals.append(np.abs(dz.sum(axis=0)))
        medians.append(float(np.median(np.concatenate(vals))))
    slope, _, se = ols_loglog(np.asarray(horizons, dtype=float), np.asarray(medians))
    return slope, se, medians
