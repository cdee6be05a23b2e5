"""Mollified distance function machinery.

The mollifier psi is a smooth probability density supported on
[eps/delta, eps], capped pointwise by 2/(x log delta). Construction: the
base profile 1/(x log delta) integrates to exactly 1 over the support, and
is multiplied by a C-infinity window (exp(-1/t) transitions) that equals 1
away from the endpoints; rescaling by the lost window mass keeps the
integral at 1 while the cap has factor-2 headroom.

The smoothed distance u = |.|^(alpha-1) * psi and its derivatives are
evaluated by graded-panel Gauss-Legendre quadrature near the support and by
a binomial moment expansion in the far field (|x| > 3 eps), where

    E|x - Y|^p = |x|^p * sum_k C(p, k) (-sgn x)^k E[Y^k] |x|^{-k},  Y ~ psi.

Since psi is one-sided, u is not even: u'(0) = -(alpha-1) E[Y^(alpha-2)] < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import binom

from .errors import ConstructionError, DomainError
from .quadrature import QuadratureSpec, graded_edges, panel_nodes
from .report import CheckRow, Report
from .stable import StableLaw, generator_apply

_N_FAR_TERMS = 22


def _bump_exp(t):
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        return np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)


def smoothstep(t):
    """C-infinity monotone 0->1 transition on [0, 1]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    fu = _bump_exp(t)
    fv = _bump_exp(1.0 - t)
    return fu / (fu + fv)


def smoothstep_prime(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.where(inside, t, 0.5)
    fu = _bump_exp(tc)
    fv = _bump_exp(1.0 - tc)
    fup = fu / tc ** 2
    fvp = fv / (1.0 - tc) ** 2
    val = (fup * fv + fu * fvp) / (fu + fv) ** 2
    return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class Mollifier:
    """Concrete psi_{delta,eps}: windowed 1/(x log delta) profile."""

    alpha: float
    eps: float
    delta: float
    rho: float
    psi_normalizer: float
    conv_quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)

    @property
    def support(self):
        return self.eps / self.delta, self.eps

    @property
    def ramp_widths(self):
        a, b = self.support
        return a * self.rho, b * self.rho

    def _window(self, x):
        a, b = self.support
        rl, rh = self.ramp_widths
        return smoothstep((x - a) / rl) * smoothstep((b - x) / rh)

    def _window_prime(self, x):
        a, b = self.support
        rl, rh = self.ramp_widths
        sl = smoothstep((x - a) / rl)
        sh = smoothstep((b - x) / rh)
        return (smoothstep_prime((x - a) / rl) / rl * sh
                - sl * smoothstep_prime((b - x) / rh) / rh)

    def psi(self, x):
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        a, b = self.support
        inside = (x_arr > a) & (x_arr < b)
        xm = np.where(inside, x_arr, 0.5 * (a + b))
        logd = math.log(self.delta)
        vals = np.where(inside,
                        self.psi_normalizer * self._window(xm) / (xm * logd), 0.0)
        return float(vals[0]) if np.ndim(x) == 0 else vals

    def psi_prime(self, x):
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        a, b = self.support
        inside = (x_arr > a) & (x_arr < b)
        xm = np.where(inside, x_arr, 0.5 * (a + b))
        logd = math.log(self.delta)
        vals = np.where(
            inside,
            self.psi_normalizer / logd
            * (self._window_prime(xm) / xm - self._window(xm) / xm ** 2),
            0.0)
        return float(vals[0]) if np.ndim(x) == 0 else vals

    def base_edges(self) -> np.ndarray:
        """Panel edges resolving the two window ramps and the flat middle."""
        a, b = self.support
        rl, rh = self.ramp_widths
        return np.unique(np.concatenate([
            np.linspace(a, a + rl, 13),
            np.linspace(a + rl, b - rh, 25),
            np.linspace(b - rh, b, 13)]))

    def moments(self, n_terms: int = _N_FAR_TERMS) -> np.ndarray:
        nodes, wts = panel_nodes(self.base_edges(), order=24)
        pv = self.psi(nodes)
        return np.array([np.sum(pv * nodes ** k * wts) for k in range(n_terms)])


def build_mollifier(alpha: float, eps: float, delta: float, *,
                    rho: float | None = None,
                    quadrature: QuadratureSpec | None = None) -> Mollifier:
    """Construct psi with unit integral and the 2/(x log delta) cap.

    The window half-width fraction rho is searched over [1e-4, 0.2]; the
    cap holds iff the renormalizer stays <= 2, since the window never
    exceeds 1.
    """
    if eps <= 0:
        raise DomainError("eps must be > 0")
    if eps < 1e-6:
        raise DomainError("eps below 1e-6 rejected: cap/normalization would "
                          "hit floating-point underflow in the log delta scaling")
    if delta <= 1:
        raise DomainError("delta must be > 1")
    if not (1.0 < alpha < 2.0):
        raise DomainError("alpha must lie strictly in (1, 2)")
    quadrature = quadrature or QuadratureSpec()
    candidates = [rho] if rho is not None else [0.05, 0.02, 0.1, 0.01, 0.005,
                                                0.15, 0.2, 1e-3, 1e-4]
    worst = None
    for r in candidates:
        if not (1e-4 <= r <= 0.2):
            raise DomainError("rho must lie in [1e-4, 0.2]")
        trial = Mollifier(alpha=alpha, eps=eps, delta=delta, rho=r,
                          psi_normalizer=1.0, conv_quadrature=quadrature)
        nodes, wts = panel_nodes(trial.base_edges(), order=24)
        mass = float(np.sum(trial.psi(nodes) * wts))
        normalizer = 1.0 / mass
        if normalizer <= 2.0 * (1.0 - 1e-12):
            return Mollifier(alpha=alpha, eps=eps, delta=delta, rho=r,
                             psi_normalizer=normalizer, conv_quadrature=quadrature)
        worst = normalizer
    raise ConstructionError(
        f"no window fraction in [1e-4, 0.2] keeps psi <= 2/(x log delta); "
        f"best normalizer {worst:.6f} > 2 (cap violated)")


class SmoothedDistance:
    """u = |.|^(alpha-1) * psi with batched evaluators for u, u', u''.

    Direct graded quadrature inside |x| <= 3 eps, moment series outside, and
    a cubic-spline cache (built lazily on the graded master grid) behind the
    scalar u_eval / u_prime / u_second API. The exact batch evaluators stay
    available for oracle-grade checks.
    """

    def __init__(self, mollifier: Mollifier):
        self.mollifier = mollifier
        self.alpha = mollifier.alpha
        self.far_switch = 3.0 * mollifier.eps
        self._moments = mollifier.moments()
        self._cache = None

    # -- far field ---------------------------------------------------------

    def _series_mean_pow(self, x, p):
        """E|x - Y|^p for |x| > far_switch, via the binomial moment series."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        ks = np.arange(_N_FAR_TERMS, dtype=float)
        coef = binom(p, ks) * self._moments
        signs = np.where(x[..., None] > 0, (-1.0) ** ks, 1.0)
        return ax ** p * np.sum(coef * signs * ax[..., None] ** (-ks), axis=-1)

    # -- near field (direct quadrature) -------------------------------------

    def _near_edges(self, x: float) -> np.ndarray:
        a, b = self.mollifier.support
        edges = [self.mollifier.base_edges()]
        if a < x < b:
            edges.append(graded_edges(a, x, toward=x, n_levels=40, ratio=0.4))
            edges.append(graded_edges(x, b, toward=x, n_levels=40, ratio=0.4))
        else:
            near_edge = a if abs(x - a) <= abs(x - b) else b
            if min(abs(x - a), abs(x - b)) < (b - a):
                edges.append(graded_edges(a, b, toward=near_edge,
                                          n_levels=30, ratio=0.5))
        return np.unique(np.concatenate(edges))

    def _near_values(self, xs: np.ndarray):
        """(u, u', u'') at each x by quadrature over the mollifier support."""
        am1 = self.alpha - 1.0
        u = np.empty_like(xs)
        up = np.empty_like(xs)
        upp = np.empty_like(xs)
        for i, x in enumerate(xs):
            nodes, wts = panel_nodes(self._near_edges(x), order=18)
            w = x - nodes
            absw = np.abs(w)
            sgnw = np.sign(w)
            pv = self.mollifier.psi(nodes)
            ppv = self.mollifier.psi_prime(nodes)
            k_up = sgnw * absw ** (self.alpha - 2.0)
            u[i] = np.sum(pv * absw ** am1 * wts)
            up[i] = am1 * np.sum(pv * k_up * wts)
            upp[i] = am1 * np.sum(ppv * k_up * wts)
        return u, up, upp

    # -- cache ---------------------------------------------------------------

    def _master_grid(self) -> np.ndarray:
        a, b = self.mollifier.support
        rl, rh = self.mollifier.ramp_widths
        fs = self.far_switch
        fine = min(rl, rh) / 24.0
        pieces = [
            np.linspace(-fs, fs, 2401),
            np.arange(a - 12.0 * rl, b + 12.0 * rh, fine),
            np.linspace(-2.0 * a, 2.0 * a, 601),
            np.linspace(a - 60.0 * rl, b + 60.0 * rh, 2401),
        ]
        g = np.unique(np.concatenate(pieces))
        g = g[(g >= -fs) & (g <= fs)]
        # merge near-duplicates: colliding floats from different pieces would
        # give the spline nearly-zero-width intervals and wild derivatives
        keep = np.concatenate([[True],
                               np.diff(g) > 1e-10 * (1.0 + np.abs(g[:-1]))])
        return g[keep]

    def _ensure_cache(self):
        if self._cache is None:
            grid = self._master_grid()
            u, up, upp = self._near_values(grid)
            self._cache = {
                "grid": grid,
                "u": CubicSpline(grid, u),
                "up": CubicSpline(grid, up),
                "upp": CubicSpline(grid, upp),
            }
        return self._cache

    # -- public evaluators ----------------------------------------------------

    def _eval_batch(self, x, which: str, exact: bool = False):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        far = np.abs(x) > self.far_switch
        a = self.alpha
        if which == "u":
            out[far] = self._series_mean_pow(x[far], a - 1.0)
        elif which == "up":
            out[far] = (a - 1.0) * np.sign(x[far]) * self._series_mean_pow(x[far], a - 2.0)
        else:
            out[far] = (a - 1.0) * (a - 2.0) * self._series_mean_pow(x[far], a - 3.0)
        near = ~far
        if np.any(near):
            if exact:
                vals = self._near_values(x[near])
                out[near] = vals[{"u": 0, "up": 1, "upp": 2}[which]]
            else:
                cache = self._ensure_cache()
                out[near] = cache[{"u": "u", "up": "up", "upp": "upp"}[which]](x[near])
        return out

    def u_eval(self, x):
        out = self._eval_batch(x, "u")
        return float(out[0]) if np.ndim(x) == 0 else out

    def u_prime(self, x):
        out = self._eval_batch(x, "up")
        return float(out[0]) if np.ndim(x) == 0 else out

    def u_second(self, x):
        out = self._eval_batch(x, "upp")
        return float(out[0]) if np.ndim(x) == 0 else out

    def u_exact(self, x):
        out = self._eval_batch(x, "u", exact=True)
        return float(out[0]) if np.ndim(x) == 0 else out

    def u_prime_exact(self, x):
        out = self._eval_batch(x, "up", exact=True)
        return float(out[0]) if np.ndim(x) == 0 else out

    def u_second_exact(self, x):
        out = self._eval_batch(x, "upp", exact=True)
        return float(out[0]) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# certifications
# ---------------------------------------------------------------------------

def psi_eval(m: Mollifier, x):
    return m.psi(x)


def certify_mollifier_shape(m: Mollifier, n_grid: int = 2001) -> Report:
    """Unit integral and the pointwise cap psi <= 2/(x log delta)."""
    nodes, wts = panel_nodes(m.base_edges(), order=24)
    mass = float(np.sum(m.psi(nodes) * wts))
    a, b = m.support
    grid = np.linspace(a, b, n_grid)[1:-1]
    capped = m.psi(grid) * grid * math.log(m.delta)
    rows = [
        CheckRow("psi_unit_mass", "integral of psi over [eps/delta, eps] = 1",
                 mass, 1.0, 1e-8 - abs(mass - 1.0), abs(mass - 1.0) <= 1e-8),
        CheckRow("psi_cap", "psi(x) * x * log(delta) <= 2 on the support",
                 float(capped.max()), 2.0, 2.0 - float(capped.max()),
                 bool(capped.max() <= 2.0)),
        CheckRow("psi_nonneg", "psi >= 0 on the support",
                 float(m.psi(grid).min()), 0.0, float(m.psi(grid).min()),
                 bool(m.psi(grid).min() >= 0.0)),
    ]
    return Report(name="mollifier_shape",
                  params={"alpha": m.alpha, "eps": m.eps, "delta": m.delta,
                          "rho": m.rho, "psi_normalizer": m.psi_normalizer},
                  checks=rows, grid={"n_points": n_grid})


def certify_sandwich(s: SmoothedDistance, grid, rel_slack: float = 1e-3) -> Report:
    """Two-sided bounds |x|^(a-1) <= eps^(a-1) + u(x) and
    u(x) <= |x|^(a-1) + eps^(a-1) on the grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("certification grid must be non-empty")
    a = s.alpha
    eps_pow = s.mollifier.eps ** (a - 1.0)
    u = s.u_exact(grid)
    base = np.abs(grid) ** (a - 1.0)
    scale = eps_pow + np.maximum(base, u)
    lower_margin = (eps_pow + u - base) / scale
    upper_margin = (base + eps_pow - u) / scale
    rows = [
        CheckRow("u_lower_sandwich",
                 "|x|^(a-1) <= eps^(a-1) + u(x)",
                 float(lower_margin.min()), -rel_slack,
                 float(lower_margin.min()) + rel_slack,
                 bool(lower_margin.min() >= -rel_slack)),
        CheckRow("u_upper_sandwich",
                 "u(x) <= |x|^(a-1) + eps^(a-1)",
                 float(upper_margin.min()), -rel_slack,
                 float(upper_margin.min()) + rel_slack,
                 bool(upper_margin.min() >= -rel_slack)),
    ]
    return Report(name="sandwich",
                  params={"alpha": a, "eps": s.mollifier.eps,
                          "delta": s.mollifier.delta, "rho": s.mollifier.rho,
                          "psi_normalizer": s.mollifier.psi_normalizer},
                  checks=rows,
                  grid={"n_points": int(grid.size),
                        "lo": float(grid.min()), "hi": float(grid.max())})


def derivative_bound_rhs(s: SmoothedDistance, x):
    """Branchwise cap on |u'|: 2^(2-a)(a-1)|x|^(a-2) outside [-2eps, 2eps],
    2^(3-a) delta (1-1/delta)^(a-1) / (eps^(2-a) log delta) inside."""
    x = np.asarray(x, dtype=float)
    a = s.alpha
    eps, delta = s.mollifier.eps, s.mollifier.delta
    inside_cap = (2.0 ** (3.0 - a) * delta * (1.0 - 1.0 / delta) ** (a - 1.0)
                  / (eps ** (2.0 - a) * math.log(delta)))
    with np.errstate(divide="ignore"):
        outside_cap = 2.0 ** (2.0 - a) * (a - 1.0) * np.abs(x) ** (a - 2.0)
    return np.where(np.abs(x) <= 2.0 * eps, inside_cap, outside_cap)


def certify_derivative_bound(s: SmoothedDistance, grid,
                             rel_slack: float = 1e-3) -> Report:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("certification grid must be non-empty")
    up = np.abs(s.u_prime_exact(grid))
    rhs = derivative_bound_rhs(s, grid)
    margin = (rhs * (1.0 + rel_slack) - up) / rhs
    worst = float(margin.min())
    i_worst = int(np.argmin(margin))
    rows = [CheckRow(
        "u_prime_cap",
        "|u'(x)| <= 2^(2-a)(a-1)|x|^(a-2) outside [-2eps,2eps]; "
        "<= 2^(3-a) delta (1-1/delta)^(a-1) / (eps^(2-a) log delta) inside",
        float(up[i_worst]), float(rhs[i_worst] * (1.0 + rel_slack)),
        worst, bool(worst >= 0.0),
        context={"x_worst": float(grid[i_worst])})]
    return Report(name="derivative_bound",
                  params={"alpha": s.alpha, "eps": s.mollifier.eps,
                          "delta": s.mollifier.delta, "rho": s.mollifier.rho,
                          "psi_normalizer": s.mollifier.psi_normalizer},
                  checks=rows,
                  grid={"n_points": int(grid.size),
                        "lo": float(grid.min()), "hi": float(grid.max())})


def komatsu_identity_residual(s: SmoothedDistance, law: StableLaw,
                              theta: float) -> float:
    """|L_alpha u(theta) - big_C_alpha psi(theta)|, both sides numeric.

    Uses the second-derivative generator route (cancellation-free), with
    breakpoints at the support endpoints.
    """
    if theta == 0.0:
        raise DomainError("the generator identity for u holds for theta != 0")
    if abs(law.alpha - s.alpha) > 1e-14:
        raise DomainError("law.alpha must match the mollifier alpha")
    a_s, b_s = s.mollifier.support
    rl, rh = s.mollifier.ramp_widths
    # window ramps are sharp features of u''; the quadrature mesh must split there
    brk = (a_s, a_s + rl, b_s - rh, b_s, -a_s, -b_s)
    lhs = generator_apply(law, s.u_eval, theta, f2=s.u_second,
                          breakpoints=brk, method="second_derivative")
    rhs = law.big_C_alpha * s.mollifier.psi(theta)
    return abs(lhs - rhs)


def certify_komatsu(s: SmoothedDistance, law: StableLaw, thetas,
                    rel_tol: float = 1e-2, abs_tol: float = 1e-4) -> Report:
    """Identity L_alpha u = C psi over a theta grid: relative tolerance where
    psi > 0, absolute tolerance where psi = 0."""
    rows = []
    for theta in np.asarray(thetas, dtype=float):
        resid = komatsu_identity_residual(s, law, float(theta))
        rhs = law.big_C_alpha * s.mollifier.psi(float(theta))
        if rhs > 0:
            rows.append(CheckRow(
                "generator_identity_on_support",
                "relative |L u(theta) - C psi(theta)| / (C psi(theta)) <= rel_tol",
                resid / rhs, rel_tol, rel_tol - resid / rhs,
                bool(resid / rhs <= rel_tol),
                context={"theta": float(theta)}))
        else:
            rows.append(CheckRow(
                "generator_identity_off_support",
                "|L u(theta)| <= abs_tol where psi(theta) = 0",
                resid, abs_tol, abs_tol - resid, bool(resid <= abs_tol),
                context={"theta": float(theta)}))
    return Report(name="generator_identity",
                  params={"alpha": s.alpha, "eps": s.mollifier.eps,
                          "delta": s.mollifier.delta, "rho": s.mollifier.rho,
                          "psi_normalizer": s.mollifier.psi_normalizer,
                          "C": law.big_C_alpha},
                  checks=rows, grid={"n_points": len(rows)})
