"""Weighted measures, frozen transition density, and the coefficient-distance
functionals.

The distance functionals weight the pointwise coefficient gaps by where the
baseline process actually lives. The true transition density is not
available; the default model is the frozen-coefficient density

    p0_t(x0, y) = g((y - x0) / (t sigma(y)^alpha... )^(1/alpha)) / (t^(1/alpha) sigma(y)^(1/alpha)),

which brackets the true density within constant factors [m, M]. The
empirical mode instead averages the gap along simulated baseline paths,
which estimates the distance under the true (discretized) law; the two are
expected to agree up to the bracketing constants, not exactly.

Space integrals run over an explicit window around x0 with a power-law tail
correction; time integrals use a grid graded like (j/J)^gamma toward 0,
where the frozen density concentrates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .coefficients import CoefficientPair
from .errors import DomainError
from .quadrature import panel_nodes
from .simulate import SimConfig, simulate_baseline_average
from .stable import StableLaw, density_grid, stable_tail_mass


@dataclass(frozen=True)
class TimeGrid:
    """Graded time nodes s_j = T (j/J)^gamma, j = 0..J."""

    n_nodes: int = 24
    gamma: float = 1.5

    def __post_init__(self):
        if self.n_nodes < 2:
            raise DomainError("time grid needs at least 2 nodes")
        if self.gamma <= 0:
            raise DomainError("time grading exponent must be > 0")

    def nodes(self, T: float) -> np.ndarray:
        j = np.arange(self.n_nodes + 1, dtype=float)
        return T * (j / self.n_nodes) ** self.gamma


def default_time_grid(alpha: float, n_nodes: int = 24) -> TimeGrid:
    return TimeGrid(n_nodes=n_nodes, gamma=alpha)


@dataclass
class DensityModel:
    """Density stand-in for the law of the baseline solution.

    frozen_plain: p0;  frozen_upper: M * p0 (upper comparability envelope);
    empirical: Monte Carlo average along simulated baseline paths.
    """

    mode: str
    law: StableLaw
    sigma_ref: object
    x0: float
    M: float = 1.0
    sim_config: SimConfig | None = None

    def __post_init__(self):
        if self.mode not in ("frozen_plain", "frozen_upper", "empirical"):
            raise DomainError(f"unknown density model mode {self.mode!r}")
        if self.mode == "frozen_upper" and self.M < 1.0:
            raise DomainError("comparability constant M must be >= 1")
        if self.mode == "empirical" and self.sim_config is None:
            raise DomainError("empirical mode needs a SimConfig")


def weighted_measure_density(law: StableLaw, x0: float, sigma_x0: float,
                             t: float, y):
    """Density of the weighted measure: the stable density rescaled by
    t^(1/alpha) sigma(x0)^(1/alpha) and centered at x0 (sigma frozen at the
    start point)."""
    if t <= 0:
        raise DomainError("t must be > 0")
    if sigma_x0 <= 0:
        raise DomainError("sigma(x0) must be > 0")
    scale = t ** (1.0 / law.alpha) * sigma_x0 ** (1.0 / law.alpha)
    out = density_grid(law, (np.asarray(y, dtype=float) - x0) / scale) / scale
    return float(out[0]) if np.ndim(y) == 0 else out


def frozen_density(model: DensityModel, t: float, y):
    """Frozen-coefficient transition density; sigma is evaluated at the
    target point y, unlike the weighted measure which freezes at x0."""
    if model.mode == "empirical":
        raise DomainError("the empirical model has no closed-form density")
    if t <= 0:
        raise DomainError("t must be > 0")
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    sig = np.asarray(model.sigma_ref(y_arr), dtype=float)
    scale = t ** (1.0 / model.law.alpha) * sig ** (1.0 / model.law.alpha)
    vals = density_grid(model.law, (y_arr - model.x0) / scale) / scale
    if model.mode == "frozen_upper":
        vals = model.M * vals
    return float(vals[0]) if np.ndim(y) == 0 else vals


def frozen_density_mass(model: DensityModel, t: float,
                        sigma_bounds: tuple) -> float:
    """Numerical mass of the frozen density at time t (window + tail bound).
    Exactly 1 for constant sigma; approximately 1 when sigma varies."""
    k_lo, k_hi = sigma_bounds
    scale_hi = t ** (1.0 / model.law.alpha) * k_hi ** (1.0 / model.law.alpha)
    R = 200.0 * scale_hi
    edges = model.x0 + np.concatenate([
        -np.geomspace(R, 1e-3 * scale_hi, 120), [0.0],
        np.geomspace(1e-3 * scale_hi, R, 120)])
    nodes, wts = panel_nodes(np.sort(edges), order=12)
    body = float(np.sum(frozen_density(model, t, nodes) * wts))
    z = R / scale_hi * (k_lo / k_hi) ** (1.0 / model.law.alpha)
    tail = 2.0 * stable_tail_mass(model.law, z)
    mult = model.M if model.mode == "frozen_upper" else 1.0
    return body + mult * tail


# ---------------------------------------------------------------------------
# weighted norm
# ---------------------------------------------------------------------------

def weighted_norm(f, p: float, law: StableLaw, x0: float, sigma_x0: float,
                  t: float, rel_tol: float = 1e-6) -> float:
    """L^p norm of f against the weighted measure, by quadrature in the
    rescaled variable plus a power-law tail estimate.

    Functions growing at order >= alpha/p are not integrable against the
    (|z| v 1)^(-1-alpha) envelope and raise DomainError.
    """
    if p <= 0:
        raise DomainError("p must be > 0")
    if t <= 0 or sigma_x0 <= 0:
        raise DomainError("t and sigma(x0) must be > 0")
    a = law.alpha
    scale = t ** (1.0 / a) * sigma_x0 ** (1.0 / a)

    def fp(z):
        return np.abs(np.asarray(f(x0 + scale * z), dtype=float)) ** p

    # growth probe: |f|^p ~ A z^q at large z decides integrability
    zp = np.array([64.0, 128.0, 256.0, 512.0])
    probe = 0.5 * (fp(zp) + fp(-zp))
    if probe[-1] > 1e-300 and probe[-2] > 1e-300:
        q_growth = math.log(probe[-1] / probe[-2]) / math.log(zp[-1] / zp[-2])
    else:
        q_growth = -math.inf
    if q_growth >= a * 0.999:
        raise DomainError(
            f"|f|^p grows at order {q_growth:.3f} >= alpha = {a}; the weighted "
            "norm diverges against the power-law tail")

    R = 64.0
    total = None
    for _ in range(4):
        edges = np.concatenate([-np.geomspace(R, 1e-4, 160), [0.0],
                                np.geomspace(1e-4, R, 160)])
        nodes, wts = panel_nodes(np.sort(edges), order=12)
        body = float(np.sum(fp(nodes) * density_grid(law, nodes) * wts))
        amp = 0.5 * (fp(np.array([R]))[0] + fp(np.array([-R]))[0])
        q_loc = max(q_growth, 0.0)
        tail = 2.0 * amp * law.c_alpha * R ** (q_loc - a) / (a - q_loc)
        total = body + tail
        if tail <= rel_tol * max(total, 1e-300):
            break
        R *= 4.0
    return total ** (1.0 / p)


# ---------------------------------------------------------------------------
# coefficient distances
# ---------------------------------------------------------------------------

def _space_integral(model: DensityModel, t: float, gap_fn, rel_tol: float) -> float:
    """int gap(y) p0_t(x0, y) dy over an expanding window + tail estimate."""
    a = model.law.alpha
    x0 = model.x0
    sig0 = float(np.asarray(model.sigma_ref(np.array([x0])))[0])
    scale = t ** (1.0 / a) * sig0 ** (1.0 / a)
    Z = max(10.0, rel_tol ** (-1.0 / a))
    for _ in range(3):
        R = Z * scale
        edges = np.concatenate([-np.geomspace(R, 1e-4 * scale, 140), [0.0],
                                np.geomspace(1e-4 * scale, R, 140)]) + x0
        nodes, wts = panel_nodes(np.sort(edges), order=12)
        body = float(np.sum(gap_fn(nodes) * frozen_density(model, t, nodes) * wts))
        gap_far = max(float(gap_fn(np.array([x0 + R]))[0]),
                      float(gap_fn(np.array([x0 - R]))[0]))
        mult = model.M if model.mode == "frozen_upper" else 1.0
        tail = 2.0 * mult * gap_far * stable_tail_mass(model.law, Z * 0.8)
        if tail <= rel_tol * max(body, 1e-300) or gap_far == 0.0:
            return body + tail
        Z *= 4.0
    return body + tail


def _distance_weighted(pair: CoefficientPair, model: DensityModel, T: float,
                       grid: TimeGrid, gap, power: float,
                       rel_tol: float = 1e-4) -> float:
    if T <= 0:
        raise DomainError("T must be > 0")
    if model.mode == "empirical":
        mean, _ = simulate_baseline_average(
            model.sim_config, model.law, pair.b, pair.sigma, pair.x0,
            lambda t, x: gap(t, x) ** power)
        return mean
    nodes = grid.nodes(T)
    vals = np.empty_like(nodes)
    # s -> 0 limit: the frozen density concentrates mass (M in upper mode) at x0
    mult0 = model.M if model.mode == "frozen_upper" else 1.0
    vals[0] = mult0 * float(gap(0.0, np.array([pair.x0]))[0]) ** power
    for j, s in enumerate(nodes[1:], start=1):
        vals[j] = _space_integral(model, s, lambda y, s_=s: gap(s_, y) ** power,
                                  rel_tol)
    return float(np.trapezoid(vals, nodes))


def distance_B(pair: CoefficientPair, model: DensityModel, T: float,
               grid: TimeGrid | None = None) -> float:
    """Time-space integral of the drift gap |b(y) - b_tilde(s, y)| against
    the model density (equivalently, in empirical mode, the Monte Carlo
    average of the gap along baseline paths)."""
    grid = grid or default_time_grid(model.law.alpha)
    return _distance_weighted(pair, model, T, grid, pair.drift_gap, 1.0)


def distance_S(pair: CoefficientPair, model: DensityModel, T: float,
               grid: TimeGrid | None = None) -> float:
    """Jump-coefficient distance: the alpha-integral of
    |sigma(y) - sigma_tilde(s, y)| against the model density, to the power
    1/alpha."""
    grid = grid or default_time_grid(model.law.alpha)
    raw = _distance_weighted(pair, model, T, grid, pair.jump_gap,
                             model.law.alpha)
    return raw ** (1.0 / model.law.alpha)


def _sup_distance(pair: CoefficientPair, T: float, gap, power: float,
                  variant: str, window: tuple, n_points: int,
                  n_time: int) -> float:
    if variant not in ("time_integral", "time_sup"):
        raise DomainError(f"unknown sup-distance variant {variant!r}")
    lo, hi = window
    ys = np.linspace(lo, hi, n_points)
    ts = np.linspace(0.0, T, n_time)
    sup_t = np.array([float(np.max(gap(t, ys))) for t in ts])
    if variant == "time_sup":
        return float(np.max(sup_t))
    if power == 1.0:
        return float(np.trapezoid(sup_t, ts))
    return float(np.trapezoid(sup_t ** power, ts)) ** (1.0 / power)


def distance_B_sup(pair: CoefficientPair, T: float, *,
                   variant: str = "time_integral", window: tuple | None = None,
                   n_points: int = 10001, n_time: int = 65) -> float:
    """Sup-norm drift distance: either int_0^T ||b - b_tilde(s,.)||_inf ds or
    sup_t ||..||_inf, the sup taken over a declared compact window."""
    window = window or (pair.x0 - 10.0, pair.x0 + 10.0)
    return _sup_distance(pair, T, pair.drift_gap, 1.0, variant, window,
                         n_points, n_time)


def distance_S_sup(pair: CoefficientPair, alpha: float, T: float, *,
                   variant: str = "time_integral", window: tuple | None = None,
                   n_points: int = 10001, n_time: int = 65) -> float:
    """Sup-norm jump distance: (int_0^T ||.||_inf^alpha ds)^(1/alpha) or
    sup_t ||.||_inf."""
    window = window or (pair.x0 - 10.0, pair.x0 + 10.0)
    return _sup_distance(pair, T, pair.jump_gap, alpha, variant, window,
                         n_points, n_time)


# ---------------------------------------------------------------------------
# empirical vs frozen comparability band
# ---------------------------------------------------------------------------

@dataclass
class BandFit:
    ratios_fit: list
    ratios_held_out: list
    m: float
    M: float
    passes: bool


def comparability_band(pairs_fit, pairs_check, law: StableLaw, T: float,
                       sim_config: SimConfig, slack: float = 0.25,
                       grid: TimeGrid | None = None) -> BandFit:
    """Fit the density-bracketing band from calibration members and verify
    held-out members fall inside it.

    For each perturbation member the ratio empirical-B / frozen-B estimates
    where the true density sits inside [m, M] p0. The band is fitted once
    per coefficient pair (spread of the calibration ratios, slack-widened
    for Monte Carlo noise) and must satisfy 0 < m <= M < 10.
    """
    def ratio(pair, index):
        frozen = DensityModel(mode="frozen_plain", law=law,
                              sigma_ref=pair.sigma, x0=pair.x0)
        b_frozen = distance_B(pair, frozen, T, grid)
        cfg = replace(sim_config,
                      stream_label=f"{sim_config.stream_label}-{index}")
        emp = DensityModel(mode="empirical", law=law, sigma_ref=pair.sigma,
                           x0=pair.x0, sim_config=cfg)
        b_emp = distance_B(pair, emp, T, grid)
        if b_frozen <= 0:
            raise DomainError("frozen-mode distance vanished; cannot form ratio")
        return b_emp / b_frozen

    fit = [ratio(p, i) for i, p in enumerate(pairs_fit)]
    held = [ratio(p, i + len(pairs_fit)) for i, p in enumerate(pairs_check)]
    m = min(fit) / (1.0 + slack)
    M = max(fit) * (1.0 + slack)
    ok = (0.0 < m <= M < 10.0) and all(m <= r <= M for r in held)
    return BandFit(ratios_fit=fit, ratios_held_out=held, m=m, M=M,
                   passes=bool(ok))
