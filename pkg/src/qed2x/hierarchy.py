"""Two-excitation amplitude hierarchy and its fixed-step RK4 propagation.

State sectors (weighted variables, combined index alpha = k*Q + q):
    c[a, b]      two emitters excited; symmetric, zero diagonal
    b[a, alpha]  one emitter + one photon, B~ = sqrt(w_q) B
    d[al, al']   two photons, D~ = sqrt(w_q w_q') D; symmetric

The equations of motion conserve P_C + P_B + P_D with
P_C = 0.5 ||c||_F^2, P_B = sum |b|^2, P_D = 0.5 ||d||_F^2.

Propagation is done in a rotating frame: every basis state carries exactly two
excitations, so shifting all single-particle frequencies by omega_ref only
multiplies the state by a global phase exp(2i omega_ref t). All observables
used downstream are bilinear (amplitude times conjugate amplitude) and thus
unchanged, while the fastest phase rate in the integrator drops by roughly an
order of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _stepper
from .ecm import CouplingTensor


class StateError(ValueError):
    pass


class StepSizeError(RuntimeError):
    pass


@dataclass
class HierarchyState:
    c: np.ndarray            # (N, N) complex
    b: np.ndarray            # (N, M) complex
    d: np.ndarray            # (M, M) complex
    t: float = 0.0

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    def sector_norms(self) -> tuple[float, float, float]:
        pc = 0.5 * float(np.sum(np.abs(self.c) ** 2))
        pb = float(np.sum(np.abs(self.b) ** 2))
        pd = 0.5 * float(np.sum(np.abs(self.d) ** 2))
        return pc, pb, pd

    def total_norm(self) -> float:
        return sum(self.sector_norms())

    def d_asymmetry(self) -> float:
        """||d - d^T||_F / max(||d||_F, tiny)."""
        fro2, asym2 = _stepper.sym_norms(self.d)
        return math.sqrt(asym2) / max(math.sqrt(fro2), 1e-300)

    def copy(self) -> "HierarchyState":
        return HierarchyState(self.c.copy(), self.b.copy(), self.d.copy(), self.t)


def empty_state(n: int, m: int) -> HierarchyState:
    return HierarchyState(c=np.zeros((n, n), dtype=complex),
                          b=np.zeros((n, m), dtype=complex),
                          d=np.zeros((m, m), dtype=complex))


def init_state(spec: dict, n: int, m: int) -> HierarchyState:
    """Build the initial state from its config description.

    Kinds: pair-excited (pair=[a, b], 1-based), named-product (pattern of
    g/e letters with exactly two e), dicke-wbar (three emitters), custom-c
    (amplitudes=[[a, b, re, im], ...], must be normalized).
    """
    state = empty_state(n, m)
    kind = spec.get("kind")
    if kind == "pair-excited":
        pair = spec.get("pair", [1, 2])
        if len(pair) != 2 or pair[0] == pair[1]:
            raise StateError(f"invalid-kind: pair must name two distinct emitters, got {pair}")
        a, b = (int(p) - 1 for p in pair)
        if not (0 <= a < n and 0 <= b < n):
            raise StateError(f"invalid-kind: pair {pair} out of range for {n} emitters")
        state.c[a, b] = state.c[b, a] = 1.0
    elif kind == "named-product":
        pattern = spec.get("pattern", "")
        if len(pattern) != n or set(pattern) - {"g", "e"}:
            raise StateError(f"invalid-kind: pattern {pattern!r} does not match {n} emitters")
        excited = [i for i, ch in enumerate(pattern) if ch == "e"]
        if len(excited) != 2:
            raise StateError("invalid-kind: pattern must excite exactly two emitters")
        a, b = excited
        state.c[a, b] = state.c[b, a] = 1.0
    elif kind == "dicke-wbar":
        if n != 3:
            raise StateError("invalid-kind: dicke-wbar requires exactly three emitters")
        v = 1.0 / math.sqrt(3.0)
        for a, b in ((0, 1), (0, 2), (1, 2)):
            state.c[a, b] = state.c[b, a] = v
    elif kind == "custom-c":
        amps = spec.get("amplitudes", [])
        if not amps:
            raise StateError("invalid-kind: custom-c needs a nonempty amplitudes list")
        for row in amps:
            a, b = int(row[0]) - 1, int(row[1]) - 1
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise StateError(f"invalid-kind: bad amplitude entry {row}")
            val = complex(float(row[2]), float(row[3]))
            state.c[a, b] = state.c[b, a] = val
        norm = state.total_norm()
        if abs(norm - 1.0) > 1e-9:
            raise StateError(f"invalid-kind: custom-c amplitudes have norm {norm:.6g}, expected 1")
    else:
        raise StateError(f"invalid-kind: unknown initial state kind {kind!r}")
    return state


# --- right-hand side ----------------------------------------------------------

def mode_frequencies(coup: CouplingTensor) -> np.ndarray:
    """omega_alpha for the combined index alpha = k*Q + q."""
    return np.tile(coup.omega_nodes, coup.n_emitters)


def rhs(state: HierarchyState, coup: CouplingTensor,
        omega_ref: float = 0.0) -> HierarchyState:
    """Reference right-hand side, plain numpy; returns d(state)/dt."""
    gtf = coup.flat_weighted()
    gtc = np.conj(gtf)
    wa = coup.omega_atoms - omega_ref
    wal = mode_frequencies(coup) - omega_ref

    r = state.b @ gtf.T
    dc = -1j * ((wa[:, None] + wa[None, :]) * state.c + r + r.T)
    np.fill_diagonal(dc, 0.0)

    db = -1j * ((wa[:, None] + wal[None, :]) * state.b
                + state.c @ gtc + gtf @ state.d)

    p = state.b.T @ gtc
    dd = -1j * ((wal[:, None] + wal[None, :]) * state.d + p + p.T)
    return HierarchyState(c=dc, b=db, d=dd, t=state.t)


def _check_step(dt: float, coup: CouplingTensor, omega_ref: float,
                allow_large_step: bool):
    wmax = max(np.max(np.abs(coup.omega_atoms - omega_ref)),
               np.max(np.abs(coup.omega_nodes - omega_ref)))
    if dt <= 0:
        raise StepSizeError(f"time step must be positive, got {dt}")
    if 2.0 * wmax * dt > 1.0 and not allow_large_step:
        raise StepSizeError(
            f"step-too-large: dt={dt:.4g} resolves phases only up to "
            f"{0.5 / wmax:.4g}; pass allow_large_step to override")


def rk4_step(state: HierarchyState, coup: CouplingTensor, dt: float,
             omega_ref: float = 0.0, allow_large_step: bool = False) -> HierarchyState:
    """One classical RK4 step of the reference right-hand side."""
    _check_step(dt, coup, omega_ref, allow_large_step)

    def add(s, k, a):
        return HierarchyState(s.c + a * k.c, s.b + a * k.b, s.d + a * k.d, s.t)

    k1 = rhs(state, coup, omega_ref)
    k2 = rhs(add(state, k1, dt / 2), coup, omega_ref)
    k3 = rhs(add(state, k2, dt / 2), coup, omega_ref)
    k4 = rhs(add(state, k3, dt), coup, omega_ref)
    out = HierarchyState(
        state.c + dt / 6 * (k1.c + 2 * k2.c + 2 * k3.c + k4.c),
        state.b + dt / 6 * (k1.b + 2 * k2.b + 2 * k3.b + k4.b),
        state.d + dt / 6 * (k1.d + 2 * k2.d + 2 * k3.d + k4.d),
        state.t + dt)
    return out


# --- fast propagation ---------------------------------------------------------

class _FastRhs:
    """Flat-vector right-hand side: BLAS for the rectangular products, a fused
    kernel for the dominant two-photon sector."""

    def __init__(self, coup: CouplingTensor, omega_ref: float):
        n, m = coup.n_emitters, coup.n_emitters * coup.q
        self.n, self.m = n, m
        self.gtf = np.ascontiguousarray(coup.flat_weighted())
        self.gtc = np.ascontiguousarray(np.conj(self.gtf))
        wa = coup.omega_atoms - omega_ref
        self.w_alpha = np.ascontiguousarray(mode_frequencies(coup) - omega_ref)
        self.w_ab = wa[:, None] + wa[None, :]
        self.w_ab_alpha = wa[:, None] + self.w_alpha[None, :]
        self._g1 = np.empty((n, m), dtype=complex)
        self._g2 = np.empty((n, m), dtype=complex)
        self._bt = np.empty((m, n), dtype=complex)
        self._p = np.empty((m, m), dtype=complex)

    @property
    def size(self) -> int:
        n, m = self.n, self.m
        return n * n + n * m + m * m

    def views(self, y: np.ndarray):
        n, m = self.n, self.m
        return (y[:n * n].reshape(n, n),
                y[n * n:n * n + n * m].reshape(n, m),
                y[n * n + n * m:].reshape(m, m))

    def __call__(self, y: np.ndarray, out: np.ndarray):
        c, b, d = self.views(y)
        kc, kb, kd = self.views(out)

        r = b @ self.gtf.T
        kc[:] = -1j * (self.w_ab * c + r + r.T)
        np.fill_diagonal(kc, 0.0)

        np.dot(self.gtf, d, out=self._g1)
        np.dot(c, self.gtc, out=self._g2)
        kb[:] = self.w_ab_alpha * b
        kb += self._g1
        kb += self._g2
        kb *= -1j

        self._bt[:] = b.T
        np.dot(self._bt, self.gtc, out=self._p)
        _stepper.d_sector_combine(d, self._p, self.w_alpha, kd)


def pack(state: HierarchyState) -> np.ndarray:
    return np.concatenate([state.c.ravel(), state.b.ravel(), state.d.ravel()])


def unpack(y: np.ndarray, n: int, m: int, t: float) -> HierarchyState:
    c = y[:n * n].reshape(n, n)
    b = y[n * n:n * n + n * m].reshape(n, m)
    d = y[n * n + n * m:].reshape(m, m)
    return HierarchyState(c=c, b=b, d=d, t=t)


def evolve(coup: CouplingTensor, state0: HierarchyState, t_end: float, dt: float,
           omega_ref: float | None = None, n_samples: int = 2000,
           observers: tuple = (), allow_large_step: bool = False) -> tuple[HierarchyState, dict]:
    """Propagate to t_end with fixed-step RK4.

    The step is adjusted down slightly so an integer number of steps lands on
    t_end exactly. Per-sample records track sector populations, total-norm
    drift and the two-photon asymmetry; observers are called as f(t, state)
    on the same cadence (state arrays are views, do not mutate).
    """
    if omega_ref is None:
        omega_ref = float(np.mean(coup.omega_atoms))
    if t_end <= 0:
        raise StepSizeError(f"t_end must be positive, got {t_end}")
    _check_step(dt, coup, omega_ref, allow_large_step)

    n_steps = max(1, int(math.ceil(t_end / dt - 1e-12)))
    h = t_end / n_steps
    stride = max(1, int(math.ceil(n_steps / max(1, n_samples))))

    f = _FastRhs(coup, omega_ref)
    y = pack(state0)
    if y.size != f.size:
        raise StateError("state does not match the coupling tensor dimensions")
    k1, k2, k3, k4, ytmp = (np.empty_like(y) for _ in range(5))

    times, p_c, p_b, p_d, asym = [], [], [], [], []

    def sample(t, yv):
        st = unpack(yv, f.n, f.m, t)
        pc, pb, pd = st.sector_norms()
        times.append(t)
        p_c.append(pc)
        p_b.append(pb)
        p_d.append(pd)
        asym.append(st.d_asymmetry())
        for obs in observers:
            obs(t, st)

    sample(state0.t, y)
    t = state0.t
    for step in range(1, n_steps + 1):
        f(y, k1)
        _stepper.axpy(ytmp, y, k1, 0.5 * h)
        f(ytmp, k2)
        _stepper.axpy(ytmp, y, k2, 0.5 * h)
        f(ytmp, k3)
        _stepper.axpy(ytmp, y, k3, h)
        f(ytmp, k4)
        _stepper.rk4_combine(y, k1, k2, k3, k4, h / 6.0)
        t = state0.t + step * h
        if step % stride == 0 or step == n_steps:
            sample(t, y)

    final = unpack(y, f.n, f.m, t)
    final.c = final.c.copy()
    final.b = final.b.copy()
    final.d = final.d.copy()
    records = {
        "t": np.array(times),
        "p_c": np.array(p_c),
        "p_b": np.array(p_b),
        "p_d": np.array(p_d),
        "d_asymmetry": np.array(asym),
        "dt": h,
        "omega_ref": omega_ref,
    }
    records["p_tot"] = records["p_c"] + records["p_b"] + records["p_d"]
    return final, records


def consistency_report(records: dict) -> dict:
    """Summary of the per-sample conservation metrics of one run."""
    drift = np.abs(records["p_tot"] - records["p_tot"][0])
    return {
        "max_norm_drift": float(np.max(drift)),
        "final_norm_drift": float(drift[-1]),
        "max_d_asymmetry": float(np.max(records["d_asymmetry"])),
        "n_samples": int(records["t"].size),
        "dt": float(records["dt"]),
    }


# --- single-excitation manifold ----------------------------------------------

def single_excitation_evolve(coup: CouplingTensor, c0: np.ndarray, t_end: float,
                             dt: float, omega_ref: float | None = None,
                             n_samples: int = 2000) -> dict:
    """RK4 for the one-excitation hierarchy (emitter amplitudes c_a and
    weighted photon amplitudes b~_alpha); used for cross-manifold checks."""
    if omega_ref is None:
        omega_ref = float(np.mean(coup.omega_atoms))
    gtf = coup.flat_weighted()
    gtc = np.conj(gtf)
    wa = coup.omega_atoms - omega_ref
    wal = mode_frequencies(coup) - omega_ref
    n, m = gtf.shape

    c = np.asarray(c0, dtype=complex).copy()
    if c.shape != (n,):
        raise StateError(f"c0 must have shape ({n},)")
    b = np.zeros(m, dtype=complex)

    def deriv(cv, bv):
        dc = -1j * (wa * cv + gtf @ bv)
        db = -1j * (wal * bv + gtc.T @ cv)
        return dc, db

    n_steps = max(1, int(math.ceil(t_end / dt - 1e-12)))
    h = t_end / n_steps
    stride = max(1, int(math.ceil(n_steps / max(1, n_samples))))

    times, c_traj, norm = [0.0], [c.copy()], [float(np.sum(np.abs(c) ** 2))]
    for step in range(1, n_steps + 1):
        k1c, k1b = deriv(c, b)
        k2c, k2b = deriv(c + 0.5 * h * k1c, b + 0.5 * h * k1b)
        k3c, k3b = deriv(c + 0.5 * h * k2c, b + 0.5 * h * k2b)
        k4c, k4b = deriv(c + h * k3c, b + h * k3b)
        c = c + h / 6 * (k1c + 2 * k2c + 2 * k3c + k4c)
        b = b + h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b)
        if step % stride == 0 or step == n_steps:
            times.append(step * h)
            c_traj.append(c.copy())
            norm.append(float(np.sum(np.abs(c) ** 2) + np.sum(np.abs(b) ** 2)))
    return {"t": np.array(times), "c": np.array(c_traj), "norm": np.array(norm),
            "b_final": b}
