"""End-to-end pipeline: config -> frequency grid -> Green's table -> collective
modes -> propagation -> observable series, plus the reproducibility manifest."""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
import scipy

from . import __version__, ecm, greens, hierarchy, observables
from .model import SimulationConfig

# hard bounds separating step-size noise from a genuinely broken run
MAX_NORM_DRIFT = 1e-4
MAX_D_ASYMMETRY = 1e-9

_MAX_FIELD_SAMPLES = 240


class NumericalError(RuntimeError):
    """Propagation finished but violated a conservation bound."""


@dataclass
class RunResult:
    config: SimulationConfig
    records: dict
    series: dict                    # observable name -> dict of columns
    final_state: hierarchy.HierarchyState
    consistency: dict
    manifest: dict
    gamma0: float
    jsd: dict | None = None
    greens_table: greens.GreensTable = None
    basis: ecm.EcmBasis = None
    coupling: ecm.CouplingTensor = None


def build_pipeline(cfg: SimulationConfig):
    """Everything up to (but not including) the time evolution."""
    lam = cfg.lambda_a
    env = greens.environment_from_dict(cfg.environment, lam)
    positions = cfg.positions_physical
    if env.kind == "tabulated":
        table = greens.load_tabulated(env.table_path, cfg.grid, positions=positions)
    else:
        table = greens.im_greens_matrix(env, positions, cfg.grid)
    overlap = ecm.build_overlap(table, cfg.emitters, lam)
    basis = ecm.diagonalize_overlap(overlap, cfg.grid.nodes)
    coup = ecm.couplings(basis, cfg.emitters, cfg.grid)
    return env, table, overlap, basis, coup


def _field_vectors(cfg: SimulationConfig, env, overlap, basis) -> np.ndarray:
    """Reconstruction vectors f[alpha, point] over the configured field grid."""
    lam = cfg.lambda_a
    points = cfg.field_grid * lam
    emit = cfg.positions_physical
    both = np.concatenate([points, emit])
    raw = greens.im_greens_grid(env, both, cfg.grid)        # (Q, npts+N, npts+N)
    im_pts = raw[:, :points.size, points.size:]             # Im G(r, R_j)
    profiles = ecm.mode_profiles(im_pts, overlap, basis, points)
    return profiles.reconstruction_vectors(cfg.grid.weights)


def run_simulation(cfg: SimulationConfig) -> RunResult:
    env, table, overlap, basis, coup = build_pipeline(cfg)
    n, m = cfg.n_emitters, cfg.n_emitters * cfg.grid.q
    state0 = hierarchy.init_state(cfg.initial_state, n, m)
    gamma0 = observables.free_space_rate(cfg.emitters[0].d_eff, cfg.emitters[0].omega)

    want = set(cfg.outputs)
    pair = (cfg.reduced_pair[0] - 1, cfg.reduced_pair[1] - 1)
    collected: dict[str, list] = {name: [] for name in want}
    field_vectors = None
    field_stride = 1
    if "field_map" in want:
        if cfg.field_grid is None:
            raise NumericalError("field_map output requires a field_grid section")
        field_vectors = _field_vectors(cfg, env, overlap, basis)
        n_steps = max(1, int(np.ceil(cfg.t_end / cfg.dt)))
        n_obs = min(cfg.samples, n_steps) + 1
        field_stride = max(1, int(np.ceil(n_obs / _MAX_FIELD_SAMPLES)))
    obs_count = [0]

    def observer(t, state):
        if "populations" in want:
            collected["populations"].append(observables.emitter_populations(state))
        if "density_matrix" in want:
            red = observables.reduced_two_qubit(state, pair)
            collected["density_matrix"].append(
                (red["p_ee"], red["p_eg"], red["p_ge"], red["p_gg"], red["z"],
                 observables.concurrence(red), *observables.bell_fidelities(red)))
        if "dicke" in want:
            dk = observables.dicke_decomposition(state)
            collected["dicke"].append(
                (dk["p_c_sym"], dk["p_c_d1"], dk["p_c_d2"], dk["p_b_bright"],
                 dk["p_b_d1"], dk["p_b_d2"], dk["p_b_dark"]))
        if field_vectors is not None and obs_count[0] % field_stride == 0:
            collected["field_map"].append(
                (t, observables.field_intensity(state, field_vectors)))
        obs_count[0] += 1

    final, records = hierarchy.evolve(
        coup, state0, cfg.t_end, cfg.dt, omega_ref=cfg.omega_ref,
        n_samples=cfg.samples, observers=(observer,))
    consistency = hierarchy.consistency_report(records)
    if consistency["max_norm_drift"] > MAX_NORM_DRIFT:
        raise NumericalError(
            f"norm drift {consistency['max_norm_drift']:.3e} exceeds {MAX_NORM_DRIFT}")
    if consistency["max_d_asymmetry"] > MAX_D_ASYMMETRY:
        raise NumericalError(
            f"two-photon asymmetry {consistency['max_d_asymmetry']:.3e} "
            f"exceeds {MAX_D_ASYMMETRY}")

    t = records["t"]
    series: dict[str, dict] = {}
    if "populations" in want:
        per = np.array(collected["populations"])
        cols = {"t": t, "P_C": records["p_c"], "P_B": records["p_b"],
                "P_D": records["p_d"], "P_tot": records["p_tot"]}
        for a in range(n):
            cols[f"P_emitter{a + 1}"] = per[:, a]
        series["populations"] = cols
    if "density_matrix" in want:
        rows = collected["density_matrix"]
        z = np.array([r[4] for r in rows])
        series["density_matrix"] = {
            "t": t,
            "P_ee": np.array([r[0] for r in rows]),
            "P_eg": np.array([r[1] for r in rows]),
            "P_ge": np.array([r[2] for r in rows]),
            "P_gg": np.array([r[3] for r in rows]),
            "Re_Z12": z.real, "Im_Z12": z.imag,
            "concurrence": np.array([r[5] for r in rows]),
            "F_plus": np.array([r[6] for r in rows]),
            "F_minus": np.array([r[7] for r in rows]),
        }
    if "dicke" in want:
        rows = np.array(collected["dicke"])
        names = ("P_Wbar_C", "P_D1_C", "P_D2_C", "P_W_B", "P_D1_B", "P_D2_B",
                 "P_dark_B")
        series["dicke"] = {"t": t, **{nm: rows[:, i] for i, nm in enumerate(names)}}
    if "field_map" in want:
        ft = np.array([r[0] for r in collected["field_map"]])
        inten = np.array([r[1] for r in collected["field_map"]])
        series["field_map"] = {"t": ft, "x": cfg.field_grid.copy(),
                               "intensity": inten}

    jsd = None
    if "jsd" in want:
        jsd = observables.photon_spectral_measures(final, cfg.grid)
        jsd["gamma0"] = gamma0

    manifest = {
        "package": "qed2x",
        "versions": {"qed2x": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "numba": numba.__version__},
        "emitters": [{"position": e.position, "omega": e.omega, "d_eff": e.d_eff}
                     for e in cfg.emitters],
        "environment": cfg.environment,
        "grid": {"rule": cfg.grid.rule, "omega_min": cfg.grid.omega_min,
                 "omega_max": cfg.grid.omega_max, "q": cfg.grid.q},
        "initial_state": cfg.initial_state,
        "time": {"t_end": cfg.t_end, "dt_requested": cfg.dt,
                 "dt_actual": records["dt"]},
        "normalization": {"omega_ref": records["omega_ref"], "gamma0": gamma0},
        "outputs": sorted(want),
        "samples": cfg.samples,
        "reduced_pair": list(cfg.reduced_pair),
        "field_grid": (None if cfg.field_grid is None else
                       {"x_min": float(cfg.field_grid[0]),
                        "x_max": float(cfg.field_grid[-1]),
                        "points": int(cfg.field_grid.size)}),
        "consistency": consistency,
        "greens_min_eigenvalue": (None if table.min_eigenvalues is None
                                  else float(np.min(table.min_eigenvalues))),
    }
    return RunResult(config=cfg, records=records, series=series, final_state=final,
                     consistency=consistency, manifest=manifest, gamma0=gamma0,
                     jsd=jsd, greens_table=table, basis=basis, coupling=coup)
