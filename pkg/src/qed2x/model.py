"""Simulation configuration, unit conventions and the discretized frequency continuum.

Units: hbar = 1, group velocity v_g = 1. Emitter and slab positions are given
in units of lambda_a = 2*pi/omega_a (the transition wavelength of the first
emitter); frequencies are plain angular frequencies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1

QUADRATURE_RULES = ("gauss-legendre", "trapezoid")


class ConfigError(ValueError):
    """Raised for malformed or out-of-contract configuration input."""


@dataclass(frozen=True)
class EmitterSpec:
    position: float            # in units of lambda_a
    omega: float               # transition angular frequency
    d_eff: float               # dimensionless effective dipole magnitude
    initially_excited: bool = False

    def __post_init__(self):
        if self.position < 0:
            raise ConfigError(f"emitter position must be >= 0, got {self.position}")
        if self.omega <= 0:
            raise ConfigError(f"transition frequency must be > 0, got {self.omega}")
        if self.d_eff <= 0:
            raise ConfigError(f"effective dipole must be > 0, got {self.d_eff}")


@dataclass(frozen=True)
class FrequencyGrid:
    nodes: np.ndarray          # ascending, strictly inside (omega_min, omega_max) for GL
    weights: np.ndarray        # positive quadrature weights
    rule: str
    omega_min: float
    omega_max: float

    @property
    def q(self) -> int:
        return self.nodes.size

    def integrate(self, values: np.ndarray) -> float | complex:
        """Quadrature of samples taken at the grid nodes."""
        return np.sum(self.weights * values, axis=-1)


def build_grid(omega_min: float, omega_max: float, q: int, rule: str = "gauss-legendre") -> FrequencyGrid:
    """Build the discretized frequency continuum on [omega_min, omega_max].

    gauss-legendre uses the degree-q Legendre nodes affinely mapped to the
    interval; trapezoid uses uniform nodes with halved end weights.
    """
    if omega_min <= 0 or omega_min >= omega_max:
        raise ConfigError(
            f"invalid-bounds: need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]")
    if q < 2:
        raise ConfigError(f"invalid-count: need q >= 2, got {q}")
    if rule not in QUADRATURE_RULES:
        raise ConfigError(f"unknown quadrature rule {rule!r}")

    if rule == "gauss-legendre":
        x, w = np.polynomial.legendre.leggauss(q)
        half = 0.5 * (omega_max - omega_min)
        nodes = omega_min + half * (x + 1.0)
        weights = half * w
    else:
        nodes = np.linspace(omega_min, omega_max, q)
        h = (omega_max - omega_min) / (q - 1)
        weights = np.full(q, h)
        weights[0] *= 0.5
        weights[-1] *= 0.5
    return FrequencyGrid(nodes=nodes, weights=weights, rule=rule,
                         omega_min=omega_min, omega_max=omega_max)


# --- configuration -----------------------------------------------------------

_TOP_KEYS = {"schema_version", "emitters", "environment", "grid", "initial_state",
             "time", "outputs", "field_grid", "normalization"}
_EMITTER_KEYS = {"position", "omega", "d_eff", "initially_excited"}
_ENV_KEYS = {"kind", "slabs", "table_path"}
_SLAB_KEYS = {"x1", "x2", "eps_real", "eps_imag"}
_GRID_KEYS = {"omega_min", "omega_max", "q", "rule"}
_STATE_KEYS = {"kind", "pair", "pattern", "amplitudes", "emitter"}
_TIME_KEYS = {"t_end", "dt"}
_OUTPUT_KEYS = {"observables", "samples", "pair"}
_FIELD_KEYS = {"x_min", "x_max", "points"}
_NORM_KEYS = {"omega_ref"}

KNOWN_OBSERVABLES = ("populations", "density_matrix", "dicke", "field_map", "jsd")


@dataclass
class SimulationConfig:
    emitters: list[EmitterSpec]
    environment: dict                       # resolved by the greens module
    grid: FrequencyGrid
    initial_state: dict
    t_end: float
    dt: float
    outputs: list[str] = field(default_factory=lambda: ["populations"])
    samples: int = 2000
    reduced_pair: tuple[int, int] = (1, 2)
    field_grid: np.ndarray | None = None    # observation points, lambda_a units
    omega_ref: float | None = None          # rotating-frame reference; None = mean omega_a

    @property
    def n_emitters(self) -> int:
        return len(self.emitters)

    @property
    def lambda_a(self) -> float:
        return 2.0 * math.pi / self.emitters[0].omega

    @property
    def positions_physical(self) -> np.ndarray:
        lam = self.lambda_a
        return np.array([e.position * lam for e in self.emitters])


def _require_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def config_from_dict(doc: dict) -> SimulationConfig:
    """Parse a config document. Unknown keys are an error."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _require_keys(doc, _TOP_KEYS, "config")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    if "emitters" not in doc or not doc["emitters"]:
        raise ConfigError("at least one emitter is required")

    emitters = []
    for i, e in enumerate(doc["emitters"]):
        _require_keys(e, _EMITTER_KEYS, f"emitters[{i}]")
        emitters.append(EmitterSpec(
            position=float(e["position"]),
            omega=float(e.get("omega", 10.0)),
            d_eff=float(e.get("d_eff", 0.224)),
            initially_excited=bool(e.get("initially_excited", False)),
        ))

    env = dict(doc.get("environment", {"kind": "free-space-1d"}))
    _require_keys(env, _ENV_KEYS, "environment")
    for j, s in enumerate(env.get("slabs", []) or []):
        _require_keys(s, _SLAB_KEYS, f"environment.slabs[{j}]")

    omega_a = emitters[0].omega
    g = dict(doc.get("grid", {}))
    _require_keys(g, _GRID_KEYS, "grid")
    omega_min = float(g.get("omega_min", 0.5 * omega_a))
    omega_max = float(g.get("omega_max", 1.5 * omega_a))
    grid = build_grid(omega_min, omega_max, int(g.get("q", 256)),
                      g.get("rule", "gauss-legendre"))

    state = dict(doc.get("initial_state", {"kind": "pair-excited", "pair": [1, 2]}))
    _require_keys(state, _STATE_KEYS, "initial_state")

    t = dict(doc.get("time", {}))
    _require_keys(t, _TIME_KEYS, "time")
    gamma0 = emitters[0].d_eff ** 2 * omega_a   # free-space golden-rule rate scale
    t_end = float(t.get("t_end", 20.0 / gamma0))
    dt = float(t.get("dt", 0.1 / grid.omega_max))

    out = dict(doc.get("outputs", {}))
    _require_keys(out, _OUTPUT_KEYS, "outputs")
    observables = list(out.get("observables", ["populations"]))
    for name in observables:
        if name not in KNOWN_OBSERVABLES:
            raise ConfigError(f"unknown observable {name!r}")
    samples = int(out.get("samples", 2000))
    pair = tuple(out.get("pair", (1, 2)))

    fg = doc.get("field_grid")
    field_grid = None
    if fg is not None:
        _require_keys(fg, _FIELD_KEYS, "field_grid")
        field_grid = np.linspace(float(fg["x_min"]), float(fg["x_max"]), int(fg["points"]))

    norm = dict(doc.get("normalization", {}))
    _require_keys(norm, _NORM_KEYS, "normalization")
    omega_ref = norm.get("omega_ref")
    if omega_ref is not None:
        omega_ref = float(omega_ref)

    return SimulationConfig(emitters=emitters, environment=env, grid=grid,
                            initial_state=state, t_end=t_end, dt=dt,
                            outputs=observables, samples=samples,
                            reduced_pair=pair, field_grid=field_grid,
                            omega_ref=omega_ref)


def load_config(path) -> SimulationConfig:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return config_from_dict(doc)


def validate_config(cfg: SimulationConfig) -> list[str]:
    """Collect human-readable invariant violations; empty list means valid."""
    diags = []
    positions = [e.position for e in cfg.emitters]
    if len(set(positions)) != len(positions):
        diags.append("duplicate emitter position")
    for e in cfg.emitters:
        if e.position < 0:
            diags.append(f"negative emitter position {e.position}")
    if cfg.dt <= 0:
        diags.append("nonpositive time step")
    elif cfg.t_end < cfg.dt:
        diags.append("t_end shorter than one time step")
    if np.any(cfg.grid.weights <= 0):
        diags.append("nonpositive quadrature weight")
    span = cfg.grid.omega_max - cfg.grid.omega_min
    if abs(np.sum(cfg.grid.weights) - span) > 1e-12 * span:
        diags.append("quadrature weights do not sum to the interval length")
    kind = cfg.environment.get("kind")
    if kind not in ("free-space-1d", "mirrored-waveguide", "tabulated"):
        diags.append(f"unknown environment kind {kind!r}")
    state_kind = cfg.initial_state.get("kind")
    if state_kind == "dicke-wbar" and cfg.n_emitters != 3:
        diags.append("dicke-wbar initial state requires exactly three emitters")
    return diags
