"""Configuration-driven command line.

    stablesde run --config cfg.json [--set key=value ...] [--out DIR]
                  [--threads N] [--dump-paths]
    stablesde print-bound --alpha A --eta-tilde E --B B --S S --x0-gap G [--h H]

The config is strict JSON: unknown keys are rejected, and physical
parameters (alpha, eps, delta, T, seed, ...) have no defaults. Outputs are
results.csv (floats at 17 significant digits), report.json (validated
machine-readable pass/fail rows), and plotdata/*.tsv series.

Exit codes: 0 all checks pass, 1 a check failed, 2 config parse error,
3 domain error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import mollifier as moll
from .coefficients import make_family, make_pair
from .errors import AssumptionViolation, ConstructionError, DomainError, NumericError
from .measures import (DensityModel, TimeGrid, default_time_grid, distance_B,
                       distance_B_sup, distance_S, distance_S_sup)
from .rates import RateBoundSpec, convergence_experiment, run_sweep, theoretical_bound
from .report import CheckRow, Report, fmt17, validate_report, write_plotdata, write_results_csv
from .simulate import SimConfig, distance_moment_curve, simulate_coupled, tail_probability
from .stable import (density_total_mass, envelope_comparability_check,
                     make_stable_law, stable_density)

_SCHEMA = {
    "command": None,
    "law": {"alpha"},
    "mollifier": {"eps", "delta", "rho"},
    "coefficients": {"name", "params"},
    "sim": {"T", "n_steps", "n_paths", "seed", "x_clip", "keep_paths"},
    "distances": {"model", "M", "time_nodes", "sup_window", "sup_points",
                  "variant", "T"},
    "sweep": {"family", "params", "eta_tilde", "calibration_index", "h_values"},
    "converge": {"family", "params", "p_exponent"},
    "certify": {"grid_lo", "grid_hi", "grid_points", "komatsu_points",
                "alphas", "tail_x"},
    "output": {"dir", "formats"},
}
_COMMANDS = ("certify-mollifier", "certify-density", "distances", "simulate",
             "sweep", "converge")


class ConfigError(ValueError):
    pass


def load_config(path: str, overrides) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be an object")
    for key, value in overrides or ():
        _apply_override(cfg, key, value)
    _validate_schema(cfg)
    return cfg


def _apply_override(cfg: dict, dotted: str, raw: str) -> None:
    parts = dotted.split(".")
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {dotted!r} crosses a non-object")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node[parts[-1]] = value


def _validate_schema(cfg: dict) -> None:
    unknown = set(cfg) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "command" not in cfg:
        raise ConfigError("config must declare a command")
    if cfg["command"] not in _COMMANDS:
        raise ConfigError(f"unknown command {cfg['command']!r}; "
                          f"expected one of {_COMMANDS}")
    for key, allowed in _SCHEMA.items():
        if allowed is None or key not in cfg:
            continue
        if not isinstance(cfg[key], dict):
            raise ConfigError(f"config section {key!r} must be an object")
        extra = set(cfg[key]) - allowed
        if extra:
            raise ConfigError(f"unknown keys in {key!r}: {sorted(extra)}")
    if "law" not in cfg or "alpha" not in cfg["law"]:
        raise ConfigError("law.alpha must be explicit (no defaults for "
                          "physical parameters)")


def _require(cfg, section, keys):
    if section not in cfg:
        raise ConfigError(f"command {cfg['command']!r} needs the {section!r} section")
    for k in keys:
        if k not in cfg[section]:
            raise ConfigError(f"{section}.{k} must be explicit")
    return cfg[section]


def _sim_config(cfg, keep_paths_flag=False) -> SimConfig:
    sim = _require(cfg, "sim", ("T", "n_steps", "n_paths", "seed"))
    return SimConfig(T=float(sim["T"]), n_steps=int(sim["n_steps"]),
                     n_paths=int(sim["n_paths"]), seed=int(sim["seed"]),
                     x_clip=float(sim.get("x_clip", 1e12)),
                     keep_paths=bool(sim.get("keep_paths", False)) or keep_paths_flag)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_certify_mollifier(cfg, out: Path) -> Report:
    alpha = float(cfg["law"]["alpha"])
    msec = _require(cfg, "mollifier", ("eps", "delta"))
    law = make_stable_law(alpha)
    m = moll.build_mollifier(alpha, float(msec["eps"]), float(msec["delta"]),
                             rho=msec.get("rho"))
    s = moll.SmoothedDistance(m)
    cert = cfg.get("certify", {})
    lo = float(cert.get("grid_lo", -5.0))
    hi = float(cert.get("grid_hi", 5.0))
    n = int(cert.get("grid_points", 2001))
    grid = np.linspace(lo, hi, n)
    grid = grid[grid != 0.0]
    reports = [moll.certify_mollifier_shape(m),
               moll.certify_sandwich(s, grid),
               moll.certify_derivative_bound(s, grid)]
    a_s, b_s = m.support
    nk = int(cert.get("komatsu_points", 40))
    thetas = np.concatenate([np.linspace(a_s * 1.01, b_s * 0.99, nk),
                             [2 * m.eps, -2 * m.eps, 1.0, -1.0, -a_s]])
    reports.append(moll.certify_komatsu(s, law, thetas))
    checks = [c for r in reports for c in r.checks]
    rep = Report(name="certify-mollifier",
                 params={"alpha": alpha, "eps": m.eps, "delta": m.delta,
                         "rho": m.rho},
                 checks=checks, grid={"n_points": int(grid.size),
                                      "lo": lo, "hi": hi})
    xs = np.linspace(-3 * m.eps, 3 * m.eps, 601)
    write_plotdata(out / "plotdata" / "u_prime.tsv", "x", "u_prime",
                   xs, s.u_prime(xs))
    write_results_csv(out / "results.csv",
                      ["check_id", "value", "bound", "margin", "pass"],
                      [[c.check_id, c.value, c.bound, c.margin, str(c.passed)]
                       for c in checks])
    return rep


def _cmd_certify_density(cfg, out: Path) -> Report:
    cert = cfg.get("certify", {})
    alphas = cert.get("alphas", [cfg["law"]["alpha"]])
    tail_x = float(cert.get("tail_x", 50.0))
    checks = []
    rows = []
    for alpha in alphas:
        law = make_stable_law(float(alpha))
        mass = density_total_mass(law, 100.0)
        g0 = stable_density(law, 0.0)
        g0_ref = math.gamma(1.0 + 1.0 / law.alpha) / math.pi
        ratio = stable_density(law, tail_x) / (law.c_alpha * tail_x ** (-1 - law.alpha))
        c_lo, c_hi = envelope_comparability_check(
            law, np.linspace(-50.0, 50.0, 1001))
        checks.extend([
            CheckRow(f"density_mass_a{alpha}",
                     "integral of the density plus analytic tail = 1 +- 1e-5",
                     mass, 1.0, 1e-5 - abs(mass - 1.0), abs(mass - 1.0) <= 1e-5),
            CheckRow(f"density_center_a{alpha}",
                     "g(0) = Gamma(1 + 1/alpha)/pi +- 1e-6",
                     g0, g0_ref, 1e-6 - abs(g0 - g0_ref),
                     abs(g0 - g0_ref) <= 1e-6),
            CheckRow(f"density_tail_ratio_a{alpha}",
                     "g(x) / (c_alpha |x|^(-1-alpha)) in [0.98, 1.02] at |x| = 50",
                     ratio, 1.02, min(1.02 - ratio, ratio - 0.98),
                     0.98 <= ratio <= 1.02),
            CheckRow(f"envelope_band_a{alpha}",
                     "0 < min g/G <= max g/G < inf on the grid",
                     c_lo, c_hi, c_lo, 0.0 < c_lo <= c_hi < float("inf")),
        ])
        rows.append([float(alpha), mass, g0, ratio, c_lo, c_hi])
    rep = Report(name="certify-density", params={"alphas": list(alphas)},
                 checks=checks)
    write_results_csv(out / "results.csv",
                      ["alpha", "mass", "g0", "tail_ratio", "env_lo", "env_hi"],
                      rows)
    return rep


def _cmd_distances(cfg, out: Path) -> Report:
    alpha = float(cfg["law"]["alpha"])
    law = make_stable_law(alpha)
    csec = _require(cfg, "coefficients", ("name",))
    pair = make_pair(csec["name"], alpha, csec.get("params", {}))
    dsec = _require(cfg, "distances", ("T", "model"))
    T = float(dsec["T"])
    grid = TimeGrid(n_nodes=int(dsec.get("time_nodes", 24)), gamma=alpha)
    mode = dsec["model"]
    sim_config = _sim_config(cfg) if mode == "empirical" else None
    model = DensityModel(mode=mode, law=law, sigma_ref=pair.sigma, x0=pair.x0,
                         M=float(dsec.get("M", 1.0)), sim_config=sim_config)
    B = distance_B(pair, model, T, grid)
    S = distance_S(pair, model, T, grid)
    window = dsec.get("sup_window")
    window = tuple(window) if window else None
    n_pts = int(dsec.get("sup_points", 10001))
    variant = dsec.get("variant", "time_integral")
    B_inf = distance_B_sup(pair, T, variant=variant, window=window, n_points=n_pts)
    S_inf = distance_S_sup(pair, alpha, T, variant=variant, window=window,
                           n_points=n_pts)
    win = window or (pair.x0 - 10.0, pair.x0 + 10.0)
    rep = Report(name="distances",
                 params={"alpha": alpha, "pair": pair.label, "T": T,
                         "model": mode, "sup_window": list(win),
                         "sup_points": n_pts, "variant": variant},
                 checks=[CheckRow("distances_finite",
                                  "all four coefficient distances are finite",
                                  max(B, S, B_inf, S_inf), float("inf"),
                                  1.0, all(np.isfinite([B, S, B_inf, S_inf])))])
    write_results_csv(out / "results.csv",
                      ["B", "S", "B_sup", "S_sup"], [[B, S, B_inf, S_inf]])
    return rep


def _cmd_simulate(cfg, out: Path, dump_paths: bool) -> Report:
    alpha = float(cfg["law"]["alpha"])
    law = make_stable_law(alpha)
    csec = _require(cfg, "coefficients", ("name",))
    pair = make_pair(csec["name"], alpha, csec.get("params", {}))
    sim = _sim_config(cfg, keep_paths_flag=dump_paths)
    ens = simulate_coupled(sim, pair, law)
    curve = distance_moment_curve(ens, alpha - 1.0)
    rows = [[t, mu, se] for t, mu, se in
            zip(curve.times, curve.mean, curve.stderr)]
    write_results_csv(out / "results.csv", ["t", "mean_q_moment", "stderr"], rows)
    tail_rows = []
    for h in (0.05, 0.1, 0.2, 0.4, 0.8):
        te = tail_probability(ens, h)
        tail_rows.append([te.h, te.prob, te.wilson_low, te.wilson_high])
    write_results_csv(out / "tails.csv",
                      ["h", "prob", "wilson_low", "wilson_high"], tail_rows)
    write_plotdata(out / "plotdata" / "moment_curve.tsv", "t",
                   "mean_q_moment", curve.times, curve.mean)
    if dump_paths and ens.paths_x is not None:
        np.savetxt(out / "paths_x.csv", ens.paths_x, delimiter=",")
        np.savetxt(out / "paths_xt.csv", ens.paths_xt, delimiter=",")
    rep = Report(name="simulate",
                 params={"alpha": alpha, "pair": pair.label,
                         "n_paths": sim.n_paths, "n_steps": sim.n_steps,
                         "seed": sim.seed, "T": sim.T,
                         "sup_moment": curve.sup,
                         "digest": ens.increments_digest_x},
                 checks=[
                     CheckRow("coupling_digest",
                              "both legs consumed identical increments",
                              1.0, 1.0, 0.0,
                              ens.increments_digest_x == ens.increments_digest_xt),
                     CheckRow("flagged_paths",
                              "flagged paths <= 1% of the ensemble",
                              float(ens.n_flagged), 0.01 * sim.n_paths,
                              0.01 * sim.n_paths - ens.n_flagged,
                              ens.n_flagged <= 0.01 * sim.n_paths),
                 ])
    return rep


def _cmd_sweep(cfg, out: Path) -> Report:
    alpha = float(cfg["law"]["alpha"])
    law = make_stable_law(alpha)
    ssec = _require(cfg, "sweep", ("family", "eta_tilde"))
    family = make_family(ssec["family"], alpha, ssec.get("params", {}))
    sim = _sim_config(cfg)
    spec = RateBoundSpec(alpha=alpha, eta_tilde=float(ssec["eta_tilde"]))
    res = run_sweep(family, sim, spec, law,
                    h_values=tuple(ssec.get("h_values", ())),
                    calibration_index=int(ssec.get("calibration_index", 0)))
    rows = [[str(r.label), r.scale, r.x0_gap, r.B, r.S, r.D, r.D_se,
             r.bound_raw, r.bound_value, str(r.satisfied),
             str(r.assumption_flag)] for r in res.rows]
    write_results_csv(out / "results.csv",
                      ["label", "scale", "x0_gap", "B", "S", "D", "D_se",
                       "bound_raw", "bound_value", "satisfied",
                       "assumption_flag"], rows)
    good = [r for r in res.rows if r.D > 0]
    write_plotdata(out / "plotdata" / "D_vs_scale.tsv", "scale", "D",
                   [r.scale for r in good], [r.D for r in good])
    if all(r.S > 0 for r in res.rows):
        write_plotdata(out / "plotdata" / "S_vs_scale.tsv", "scale", "S",
                       [r.scale for r in res.rows], [r.S for r in res.rows])
    checks = [CheckRow("bound_out_of_sample",
                       "D_n <= C_fit * bound_n on non-calibration rows",
                       float(sum(not r.satisfied for i, r in enumerate(res.rows)
                                 if i != res.calibration_index
                                 and not r.assumption_flag)),
                       0.0, 0.0, res.bound_satisfied_out_of_sample)]
    for r in res.rows:
        for te in r.tails:
            checks.append(CheckRow(
                f"tail_{r.label}_h{te.h:g}",
                "tail probability with Wilson interval (informational)",
                te.prob, 1.0, 1.0 - te.prob, True,
                context={"h": te.h, "lo": te.wilson_low, "hi": te.wilson_high}))
    rep = Report(name="sweep",
                 params={"alpha": alpha, "family": family.name,
                         "eta_tilde": spec.eta_tilde, "C_fit": res.spec.C_fit,
                         "branch": res.spec.branch,
                         "slope_D_vs_scale": res.slope_D_vs_scale,
                         "slope_S_vs_inverse_scale": res.slope_S_vs_inverse_scale,
                         "seed": sim.seed},
                 checks=checks)
    return rep


def _cmd_converge(cfg, out: Path) -> Report:
    alpha = float(cfg["law"]["alpha"])
    law = make_stable_law(alpha)
    csec = _require(cfg, "converge", ("family",))
    params = csec.get("params", {})
    family = make_family(csec["family"], alpha, params)
    sim = _sim_config(cfg)
    p = csec.get("p_exponent")
    rep0 = convergence_experiment(family, sim, law,
                                  p=float(p) if p is not None else None,
                                  params=params)
    rows = [[f"{a}-{b}", d, se] for (a, b), d, se in
            zip(zip(range(1, len(rep0.pairwise_D) + 1),
                    range(2, len(rep0.pairwise_D) + 2)),
                rep0.pairwise_D, rep0.pairwise_se)]
    write_results_csv(out / "results.csv", ["pair", "D", "D_se"], rows)
    write_plotdata(out / "plotdata" / "pairwise_D.tsv", "pair_index", "D",
                   np.arange(1, len(rep0.pairwise_D) + 1), rep0.pairwise_D)
    checks = [
        CheckRow("cauchy_monotone",
                 "successive coupled distances decrease within 2 SE",
                 float(rep0.pairwise_D[-1]), float(rep0.pairwise_D[0]),
                 float(rep0.pairwise_D[0] - rep0.pairwise_D[-1]),
                 rep0.monotone_within_2se),
        CheckRow("uniform_lp",
                 "E[sup_t |X|^p] constant across members within 3 SE",
                 rep0.lp_report.max_abs_dev_in_se, 3.0,
                 3.0 - rep0.lp_report.max_abs_dev_in_se,
                 rep0.lp_report.passes),
    ]
    rep = Report(name="converge",
                 params={"alpha": alpha, "family": family.name,
                         "p": rep0.lp_report.p, "seed": sim.seed,
                         "limit_residual": rep0.limit_residual},
                 checks=checks)
    return rep


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def run(config_path: str, overrides=(), out_dir: str | None = None,
        dump_paths: bool = False) -> int:
    try:
        cfg = load_config(config_path, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(out_dir or cfg.get("output", {}).get("dir", "out"))
    (out / "plotdata").mkdir(parents=True, exist_ok=True)
    command = cfg["command"]
    try:
        if command == "certify-mollifier":
            rep = _cmd_certify_mollifier(cfg, out)
        elif command == "certify-density":
            rep = _cmd_certify_density(cfg, out)
        elif command == "distances":
            rep = _cmd_distances(cfg, out)
        elif command == "simulate":
            rep = _cmd_simulate(cfg, out, dump_paths)
        elif command == "sweep":
            rep = _cmd_sweep(cfg, out)
        else:
            rep = _cmd_converge(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, AssumptionViolation, ConstructionError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc} (estimate={exc.estimate}, "
              f"error_bound={exc.error_bound})", file=sys.stderr)
        return 4
    rep.to_json(out / "report.json")
    validate_report(json.loads((out / "report.json").read_text()))
    n_fail = sum(not c.passed for c in rep.checks)
    print(f"{command}: {len(rep.checks)} checks, {n_fail} failed -> "
          f"{'PASS' if n_fail == 0 else 'FAIL'}")
    return 0 if n_fail == 0 else 1


def print_bound(alpha: float, eta_tilde: float, B: float, S: float,
                x0_gap: float, h: float | None = None) -> int:
    try:
        spec = RateBoundSpec(alpha=alpha, eta_tilde=eta_tilde)
        value = theoretical_bound(spec, x0_gap, B, S)
    except AssumptionViolation as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    print(f"branch          : {spec.branch}"
          + ("  (eta_tilde = 1/alpha)" if spec.branch == "log" else ""))
    if spec.branch == "holder":
        print(f"exponent e_B    : {fmt17(spec.exponent_B)}")
        print(f"exponent e_S    : {fmt17(spec.exponent_S)}")
    print(f"gap term        : {fmt17(abs(x0_gap) ** (alpha - 1.0) if x0_gap else 0.0)}")
    print(f"bound (C_fit=1) : {fmt17(value)}")
    if h is not None:
        print(f"tail bound at h : {fmt17(tail := value / h)}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="stablesde", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p_run = sub.add_parser("run", help="run a config-driven experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--threads", type=int, default=1,
                       help="worker count (affects speed only, never results)")
    p_run.add_argument("--dump-paths", action="store_true")
    p_pb = sub.add_parser("print-bound", help="evaluate the rate bound")
    p_pb.add_argument("--alpha", type=float, required=True)
    p_pb.add_argument("--eta-tilde", type=float, required=True)
    p_pb.add_argument("--B", type=float, required=True)
    p_pb.add_argument("--S", type=float, required=True)
    p_pb.add_argument("--x0-gap", type=float, required=True)
    p_pb.add_argument("--h", type=float, default=None)
    args = parser.parse_args(argv)
    if args.subcommand == "print-bound":
        return print_bound(args.alpha, args.eta_tilde, args.B, args.S,
                           args.x0_gap, args.h)
    overrides = []
    for item in args.overrides:
        if "=" not in item:
            print(f"config error: --set expects KEY=VALUE, got {item!r}",
                  file=sys.stderr)
            return 2
        key, _, value = item.partition("=")
        overrides.append((key, value))
    return run(args.config, overrides, args.out, args.dump_paths)


if __name__ == "__main__":
    sys.exit(main())
