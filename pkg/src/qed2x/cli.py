"""Command-line interface: scenario runs, the validation suite, trapping-map
parameter sweeps, and Green's-function/ECM spectrum export.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 I/O failure. All CSV output is UTF-8 with LF line endings and a header row.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import multiprocessing
import os
import sys

import numpy as np

from . import ecm, greens, hierarchy, oracle, observables, runner
from .model import (ConfigError, EmitterSpec, SimulationConfig, build_grid,
                    config_from_dict, load_config, validate_config)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

_CONFIG_ERRORS = (ConfigError, greens.GreensError, ecm.EcmError,
                  hierarchy.StateError, json.JSONDecodeError)
_NUMERICAL_ERRORS = (runner.NumericalError, hierarchy.StepSizeError,
                     observables.ObservableError, FloatingPointError)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_table(path: str, columns: dict, fmt: str) -> None:
    """Write a column dict; csv gets RFC-4180 rows, json a columns/rows object."""
    names = list(columns)
    rows = zip(*(columns[c] for c in names))
    if fmt == "json":
        payload = {"columns": names,
                   "rows": [[float(v) for v in row] for row in rows]}
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(payload, f, indent=1)
            f.write("\n")
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow([_fmt(float(v)) for v in row])


def _ext(fmt: str) -> str:
    return "json" if fmt == "json" else "csv"


def _apply_overrides(cfg: SimulationConfig, args) -> SimulationConfig:
    if args.grid_window or args.grid_q:
        lo, hi = cfg.grid.omega_min, cfg.grid.omega_max
        if args.grid_window:
            parts = args.grid_window.split(",")
            if len(parts) != 2:
                raise ConfigError("--grid-window expects 'omega_min,omega_max'")
            lo, hi = float(parts[0]), float(parts[1])
        q = args.grid_q if args.grid_q else cfg.grid.q
        cfg.grid = build_grid(lo, hi, int(q), cfg.grid.rule)
    if args.dt:
        cfg.dt = float(args.dt)
    if args.t_end:
        cfg.t_end = float(args.t_end)
    return cfg


def cmd_run(args) -> int:
    if not os.path.exists(args.config):
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_IO
    cfg = load_config(args.config)
    diags = validate_config(cfg)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = _apply_overrides(cfg, args)

    os.makedirs(args.out, exist_ok=True)
    result = runner.run_simulation(cfg)
    ext = _ext(args.format)
    for name, cols in result.series.items():
        if name == "field_map":
            # long format: one row per (t, x)
            t, x, inten = cols["t"], cols["x"], cols["intensity"]
            long = {"t": np.repeat(t, x.size),
                    "x": np.tile(x, t.size),
                    "intensity": inten.ravel()}
            _write_table(os.path.join(args.out, f"field_map.{ext}"), long, args.format)
        else:
            _write_table(os.path.join(args.out, f"{name}.{ext}"), cols, args.format)
    if result.jsd is not None:
        j = result.jsd
        q = j["omega"].size
        grid_cols = {"omega1": np.repeat(j["omega"], q),
                     "omega2": np.tile(j["omega"], q),
                     "J": j["jsd"].ravel()}
        _write_table(os.path.join(args.out, f"jsd.{ext}"), grid_cols, args.format)
        summary = {k: j[k] for k in ("p_gg", "purity", "k_eff", "entropy_nats",
                                     "entropy_bits", "residual_p_b",
                                     "emission_incomplete", "gamma0")}
        summary["schmidt_weights"] = j["schmidt_weights"][:32].tolist()
        with open(os.path.join(args.out, "jsd_summary.json"), "w",
                  encoding="utf-8", newline="\n") as f:
            json.dump(summary, f, indent=1)
            f.write("\n")
    with open(os.path.join(args.out, "manifest.json"), "w",
              encoding="utf-8", newline="\n") as f:
        json.dump(result.manifest, f, indent=1)
        f.write("\n")
    print(f"wrote {sorted(os.listdir(args.out))} to {args.out}")
    return EXIT_OK


# --- validate -------------------------------------------------------------------

def _mk_config(positions, d_eff=0.224, q=64, slabs=(), kind="mirrored-waveguide",
               t_end=None, dt=None, state=None, outputs=("populations",),
               rule="gauss-legendre") -> SimulationConfig:
    doc = {
        "schema_version": 1,
        "emitters": [{"position": p, "omega": 10.0, "d_eff": d_eff}
                     for p in positions],
        "environment": {"kind": kind, "slabs": [
            {"x1": s[0], "x2": s[1], "eps_real": s[2], "eps_imag": s[3]}
            for s in slabs]},
        "grid": {"omega_min": 5.0, "omega_max": 15.0, "q": q, "rule": rule},
        "outputs": {"observables": list(outputs)},
    }
    if state is not None:
        doc["initial_state"] = state
    if t_end is not None or dt is not None:
        doc["time"] = {}
        if t_end is not None:
            doc["time"]["t_end"] = t_end
        if dt is not None:
            doc["time"]["dt"] = dt
    return config_from_dict(doc)


def _check_wronskian() -> tuple[bool, str]:
    env = greens.EnvironmentSpec(kind="mirrored-waveguide",
                                 slabs=(greens.SlabSpec(1.5, 2.5, 12 + 0.05j),),
                                 lambda_a=2 * math.pi / 10.0)
    ws = []
    for x in (0.0, 0.4, 1.1, 1.9, 2.6):
        pl, dpl, pr, dpr = greens.homogeneous_solutions(env, 9.3, x * env.lambda_a)
        ws.append(pl * dpr - dpl * pr)
    dev = max(abs(w - ws[0]) for w in ws) / abs(ws[0])
    return dev <= 1e-10, f"relative deviation {dev:.2e}"


def helmholtz_residual(env, omega: float, x: float, xp: float,
                       h: float = 1e-3) -> float:
    """|G'' + k^2 G| / (|k|^2 |G|) via a fourth-order stencil.

    The stencil must stay within one uniform medium (keep x at least 2h away
    from interfaces, the mirror and x')."""
    g = [greens.greens_1d(env, omega, x + s * h, xp) for s in (-2, -1, 0, 1, 2)]
    d2 = (-g[0] + 16 * g[1] - 30 * g[2] + 16 * g[3] - g[4]) / (12 * h * h)
    k = env.wavenumber(omega, x)
    return abs(d2 + k * k * g[2]) / (abs(k) ** 2 * max(abs(g[2]), 1e-300))


def _check_helmholtz() -> tuple[bool, str]:
    env = greens.EnvironmentSpec(kind="mirrored-waveguide",
                                 slabs=(greens.SlabSpec(1.5, 2.5, 12 + 0.05j),),
                                 lambda_a=2 * math.pi / 10.0)
    omega, xp = 9.7, 0.8 * env.lambda_a
    worst = max(helmholtz_residual(env, omega, x * env.lambda_a, xp)
                for x in (0.3, 1.2, 2.0, 3.1))
    return worst <= 1e-6, f"scaled residual {worst:.2e}"


def _check_mirror_closed_form() -> tuple[bool, str]:
    env = greens.EnvironmentSpec(kind="mirrored-waveguide", lambda_a=1.0)
    worst = 0.0
    for omega in (6.0, 10.0, 14.5):
        for x, xp in ((0.3, 0.9), (1.2, 0.5), (0.7, 0.7)):
            got = greens.greens_1d(env, omega, x, xp).imag
            ref = math.sin(omega * min(x, xp)) * math.sin(omega * max(x, xp)) / omega
            worst = max(worst, abs(got - ref))
    zero = abs(greens.greens_1d(env, 10.0, 0.0, 1.3))
    ok = worst <= 1e-10 and zero <= 1e-12
    return ok, f"max dev {worst:.2e}, Dirichlet |G(0,x')| = {zero:.2e}"


def _check_spectral_sum() -> tuple[bool, str]:
    cfg = _mk_config([0.6, 1.3], slabs=((1.5, 2.5, 12.0, 0.05),), q=48)
    _, table, overlap, basis, coup = runner.build_pipeline(cfg)
    resid = ecm.spectral_sum_residual(coup, overlap, cfg.emitters)
    return resid <= 1e-10, f"residual {resid:.2e}"


def _check_oracle() -> tuple[bool, str]:
    cfg = _mk_config([0.74, 0.76], q=8, rule="trapezoid", t_end=5.0, dt=0.002)
    _, table, overlap, basis, coup = runner.build_pipeline(cfg)
    n, m = 2, 2 * 8
    st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, n, m)
    fin, rec = hierarchy.evolve(coup, st, cfg.t_end, cfg.dt, n_samples=10)
    ex = oracle.exact_evolve(coup, st, [cfg.t_end])[0]
    phase = np.exp(-2j * rec["omega_ref"] * cfg.t_end)
    err = max(np.abs(fin.c * phase - ex.c).max(),
              np.abs(fin.b * phase - ex.b).max(),
              np.abs(fin.d * phase - ex.d).max())
    return err <= 1e-6, f"max amplitude error {err:.2e}"


def _check_single_excitation() -> tuple[bool, str]:
    cfg = _mk_config([0.0], d_eff=0.1, kind="free-space-1d", q=192)
    _, table, overlap, basis, coup = runner.build_pipeline(cfg)
    res = hierarchy.single_excitation_evolve(coup, np.array([1.0]), 30.0, 0.01,
                                             n_samples=60)
    gamma0 = observables.free_space_rate(0.1, 10.0)
    p = np.abs(res["c"][:, 0]) ** 2
    ref = np.exp(-gamma0 * res["t"])
    rel = np.max(np.abs(p - ref) / ref)
    return rel <= 0.02, f"max relative deviation {rel:.2%}"


def _check_conservation() -> tuple[bool, str]:
    cfg = _mk_config([0.5, 1.0], q=64, t_end=5.0, dt=0.01)
    _, table, overlap, basis, coup = runner.build_pipeline(cfg)
    st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 128)
    fin, rec = hierarchy.evolve(coup, st, cfg.t_end, cfg.dt, n_samples=100)
    rep = hierarchy.consistency_report(rec)
    ok = rep["max_norm_drift"] <= 1e-8 and rep["max_d_asymmetry"] <= 1e-12
    return ok, (f"norm drift {rep['max_norm_drift']:.2e}, "
                f"asymmetry {rep['max_d_asymmetry']:.2e}")


def _check_dicke_leakage() -> tuple[bool, str]:
    cfg = _mk_config([0.0, 0.01, 0.02], d_eff=0.1, kind="free-space-1d",
                     q=128, t_end=20.0, dt=0.01,
                     state={"kind": "dicke-wbar"}, outputs=("dicke",))
    result = runner.run_simulation(cfg)
    leak = float(np.max(result.series["dicke"]["P_dark_B"]))
    return leak < 1e-3, f"max dark leakage {leak:.2e}"


_QUICK_CHECKS = [
    ("wronskian-constancy", _check_wronskian),
    ("helmholtz-residual", _check_helmholtz),
    ("mirror-closed-form", _check_mirror_closed_form),
    ("spectral-sum", _check_spectral_sum),
    ("oracle-equivalence", _check_oracle),
    ("single-excitation-benchmark", _check_single_excitation),
    ("norm-and-symmetry", _check_conservation),
]
_FULL_CHECKS = _QUICK_CHECKS + [("dicke-free-leakage", _check_dicke_leakage)]


def cmd_validate(args) -> int:
    checks = _FULL_CHECKS if args.level == "full" else _QUICK_CHECKS
    failed = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:                     # a crash is a failure too
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        print(f"{'PASS' if ok else 'FAIL'}  {name:32s} {detail}")
        if not ok:
            failed.append(name)
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        return EXIT_NUMERICAL
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


# --- sweep ----------------------------------------------------------------------

def _sweep_point(job) -> tuple[int, float, float, float, str]:
    index, d, length, base = job
    try:
        doc = {
            "schema_version": 1,
            "emitters": [{"position": 1.0 + i * d, "omega": base["omega"],
                          "d_eff": base["d_eff"]} for i in range(3)],
            "environment": {"kind": "mirrored-waveguide", "slabs": [
                {"x1": 3.5, "x2": 3.5 + length,
                 "eps_real": base["eps_real"], "eps_imag": base["eps_imag"]}]},
            "grid": base["grid"],
            "initial_state": {"kind": "dicke-wbar"},
            "time": dict(base["time"]),
            "outputs": {"observables": ["dicke"], "samples": 400},
        }
        cfg = config_from_dict(doc)
        result = runner.run_simulation(cfg)
        metric = float(result.series["dicke"]["P_dark_B"][-1])
        return index, d, length, metric, ""
    except Exception as exc:
        return index, d, length, float("nan"), f"{type(exc).__name__}: {exc}"


def _load_sweep_spec(path: str) -> tuple[list, dict]:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("schema_version") != 1:
        raise ConfigError("sweep spec schema_version must be 1")
    sw = doc.get("sweep")
    if not sw:
        raise ConfigError("sweep spec needs a 'sweep' section")
    axes = []
    for name in ("d", "L"):
        ax = sw.get(name)
        if not ax or int(ax["steps"]) < 2:
            raise ConfigError(f"sweep axis {name!r} needs min/max and steps >= 2")
        if float(ax["min"]) <= 0:
            raise ConfigError(f"sweep axis {name!r} must stay positive")
        axes.append(np.linspace(float(ax["min"]), float(ax["max"]), int(ax["steps"])))
    if sw.get("metric", "dark-trapping") != "dark-trapping":
        raise ConfigError(f"unknown sweep metric {sw.get('metric')!r}")
    base = doc.get("base", {})
    base.setdefault("omega", 10.0)
    base.setdefault("d_eff", 0.224)
    base.setdefault("eps_real", 12.0)
    base.setdefault("eps_imag", 0.05)
    base.setdefault("grid", {"omega_min": 5.0, "omega_max": 15.0, "q": 128,
                             "rule": "gauss-legendre"})
    tm = dict(base.get("time", {}))
    gamma0 = observables.free_space_rate(base["d_eff"], base["omega"])
    tm.setdefault("t_end", 20.0 / gamma0)
    tm.setdefault("dt", 0.04)
    base["time"] = tm
    jobs = [(i * len(axes[1]) + j, float(dv), float(lv), base)
            for i, dv in enumerate(axes[0]) for j, lv in enumerate(axes[1])]
    return jobs, base


def cmd_sweep(args) -> int:
    if not os.path.exists(args.config):
        print(f"error: sweep spec not found: {args.config}", file=sys.stderr)
        return EXIT_IO
    jobs, base = _load_sweep_spec(args.config)
    workers = max(1, int(args.parallelism))
    cap = os.environ.get("QED2X_THREADS")
    if cap:
        workers = min(workers, max(1, int(cap)))
    # the same pool-based path runs at every parallelism, so the collected
    # results are bitwise independent of the schedule
    with multiprocessing.Pool(processes=workers) as pool:
        results = list(pool.imap_unordered(_sweep_point, jobs))
    results.sort(key=lambda r: r[0])

    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["d", "L", "P_dark_B"])
        for _, d, length, metric, _err in results:
            w.writerow([_fmt(d), _fmt(length), _fmt(metric)])
    failures = [(d, length, err) for _, d, length, m, err in results
                if not math.isfinite(m)]
    for d, length, err in failures:
        print(f"sweep point d={d} L={length} failed: {err}", file=sys.stderr)
    print(f"wrote {len(results)} rows to {args.out}")
    return EXIT_NUMERICAL if failures else EXIT_OK


def cmd_spectrum(args) -> int:
    if not os.path.exists(args.config):
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_IO
    cfg = load_config(args.config)
    diags = validate_config(cfg)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = _apply_overrides(cfg, args)
    _, table, overlap, basis, coup = runner.build_pipeline(cfg)
    os.makedirs(args.out, exist_ok=True)
    greens.save_tabulated(table, os.path.join(args.out, "greens_table.csv"))
    q, n = basis.gamma.shape
    cols = {"omega": np.repeat(basis.frequencies, n),
            "channel": np.tile(np.arange(n), q).astype(float),
            "gamma": basis.gamma.ravel()}
    _write_table(os.path.join(args.out, "ecm_spectra.csv"), cols, "csv")
    print(f"wrote greens_table.csv and ecm_spectra.csv to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qed2x", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", required=True)
        sp.add_argument("--dt", type=float, default=None)
        sp.add_argument("--t-end", type=float, default=None)
        sp.add_argument("--grid-q", type=int, default=None)
        sp.add_argument("--grid-window", default=None,
                        help="omega_min,omega_max")
        sp.add_argument("--seed", type=int, default=None,
                        help="reserved; dynamics are deterministic")

    run_p = sub.add_parser("run", help="execute a scenario and write observables")
    common(run_p)
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")

    val_p = sub.add_parser("validate", help="run the built-in consistency suite")
    val_p.add_argument("--level", choices=("quick", "full"), default="quick")

    sw_p = sub.add_parser("sweep", help="run a (d, L) trapping-metric sweep")
    sw_p.add_argument("--config", required=True)
    sw_p.add_argument("--out", required=True)
    sw_p.add_argument("--parallelism", type=int, default=1)
    sw_p.add_argument("--seed", type=int, default=None)

    spec_p = sub.add_parser("spectrum", help="export Green's table and ECM spectra")
    common(spec_p)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "validate": cmd_validate,
                "sweep": cmd_sweep, "spectrum": cmd_spectrum}
    try:
        return handlers[args.command](args)
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
