"""Observables of the two-excitation state: sector and emitter populations,
reduced two-qubit quantities, Dicke-basis decomposition, field intensity and
two-photon spectral measures.

Every quantity here is bilinear in the amplitudes, so it is unchanged by the
global phase introduced by the rotating-frame propagation.
"""

from __future__ import annotations

import math

import numpy as np

from .hierarchy import HierarchyState
from .model import FrequencyGrid


class ObservableError(ValueError):
    pass


def free_space_rate(d_eff: float, omega: float) -> float:
    """Golden-rule emission rate 2*pi*sum_k |g_k(omega)|^2 in free space.

    With Im G = 1/(2 omega) on the diagonal this closes to d_eff^2 * omega;
    used as the time and frequency scale for normalized outputs.
    """
    return d_eff ** 2 * omega


def sector_probabilities(state: HierarchyState) -> dict:
    pc, pb, pd = state.sector_norms()
    return {"p_c": pc, "p_b": pb, "p_d": pd, "p_tot": pc + pb + pd}


def emitter_populations(state: HierarchyState) -> np.ndarray:
    """P_a = <sigma_a^+ sigma_a^-> for each emitter."""
    return (np.sum(np.abs(state.c) ** 2, axis=1)
            + np.sum(np.abs(state.b) ** 2, axis=1))


def reduced_two_qubit(state: HierarchyState, pair: tuple[int, int] = (0, 1)) -> dict:
    """Populations and the exchange coherence of two emitters, photons and the
    other emitters traced out. Indices are zero-based."""
    i, j = pair
    n = state.n
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ObservableError(f"invalid emitter pair {pair}")
    others = [m for m in range(n) if m not in (i, j)]

    p_ee = float(np.abs(state.c[i, j]) ** 2)
    p_eg = float(sum(np.abs(state.c[i, m]) ** 2 for m in others)
                 + np.sum(np.abs(state.b[i]) ** 2))
    p_ge = float(sum(np.abs(state.c[j, m]) ** 2 for m in others)
                 + np.sum(np.abs(state.b[j]) ** 2))
    p_gg = 1.0  # by completeness within the closed two-excitation manifold
    pc, pb, pd = state.sector_norms()
    p_gg = (pc + pb + pd) - p_ee - p_eg - p_ge

    z = complex(sum(state.c[i, m] * np.conj(state.c[j, m]) for m in others)
                + np.sum(state.b[i] * np.conj(state.b[j])))
    return {"p_ee": p_ee, "p_eg": p_eg, "p_ge": p_ge, "p_gg": p_gg, "z": z}


def concurrence(reduced: dict) -> float:
    """Wootters concurrence of the X-shaped reduced two-qubit state."""
    val = 2.0 * (abs(reduced["z"])
                 - math.sqrt(max(reduced["p_ee"], 0.0) * max(reduced["p_gg"], 0.0)))
    return max(0.0, val)


def bell_fidelities(reduced: dict) -> tuple[float, float]:
    """Overlaps with the symmetric/antisymmetric single-excitation Bell states."""
    base = 0.5 * (reduced["p_eg"] + reduced["p_ge"])
    re_z = reduced["z"].real
    return base + re_z, base - re_z


# --- Dicke decomposition (three emitters) --------------------------------------

# components over the pair order (C_12, C_13, C_23)
_U_WBAR = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
_U_DARK = np.vstack([np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0),
                     np.array([1.0, 1.0, -2.0]) / math.sqrt(6.0)])

# single-excitation Dicke vectors over the emitter index
_W_BRIGHT = _U_WBAR
_W_DARK = _U_DARK


def dicke_decomposition(state: HierarchyState) -> dict:
    """Populations of the symmetric and dark collective components.

    The doubly-excited sector is projected on the two-excitation Dicke triplet
    (symmetric |W-bar> plus two dark combinations); the one-excitation part of
    the emitter sector on the single-excitation triplet, per photon mode.
    """
    if state.n != 3:
        raise ObservableError("Dicke decomposition requires exactly three emitters")
    cvec = np.array([state.c[0, 1], state.c[0, 2], state.c[1, 2]])
    p_c_sym = float(np.abs(_U_WBAR @ cvec) ** 2)
    c_dark = np.abs(_U_DARK @ cvec) ** 2

    bright = _W_BRIGHT @ state.b                       # (M,)
    dark = np.sum(np.abs(_W_DARK @ state.b) ** 2, axis=1)
    p_b_bright = float(np.sum(np.abs(bright) ** 2))

    pc, pb, pd = state.sector_norms()
    return {"p_c_sym": p_c_sym, "p_c_d1": float(c_dark[0]), "p_c_d2": float(c_dark[1]),
            "p_b_bright": p_b_bright, "p_b_d1": float(dark[0]), "p_b_d2": float(dark[1]),
            "p_b_dark": float(dark[0] + dark[1]),
            "p_d": pd, "p_tot": pc + pb + pd}


# --- field intensity ------------------------------------------------------------

def field_intensity(state: HierarchyState, f: np.ndarray) -> np.ndarray:
    """Photon intensity I(r) from the reconstruction vectors f[alpha, point].

    One-photon part: |sum_alpha b[a, alpha] f[alpha, r]|^2 summed over the
    excited emitter a; two-photon part: column norms of d @ f (the second
    photon traced out).
    """
    if f.shape[0] != state.m:
        raise ObservableError("reconstruction vectors do not match the mode count")
    one = np.sum(np.abs(state.b @ f) ** 2, axis=0)
    two = np.sum(np.abs(state.d @ f) ** 2, axis=0)
    return one + two


def intensity_centroid(points: np.ndarray, intensity: np.ndarray) -> float:
    tot = np.sum(intensity)
    if tot <= 0:
        raise ObservableError("zero total intensity")
    return float(np.sum(points * intensity) / tot)


# --- two-photon spectral measures ------------------------------------------------

_MIN_P_GG = 1e-6
_RESIDUAL_P_B = 1e-3


def photon_spectral_measures(state: HierarchyState, grid: FrequencyGrid) -> dict:
    """Joint spectral density and Schmidt-mode statistics of the emitted pair.

    Conditions on the two-photon sector (both emitters in the ground state).
    J(omega, omega') sums the channel indices and removes the quadrature
    weights, so its double quadrature integrates to one. Schmidt weights are
    the eigenvalues of the conditioned one-photon reduced density matrix.
    """
    pc, pb, p_gg = state.sector_norms()
    if p_gg < _MIN_P_GG:
        raise ObservableError(
            f"two-photon sector too weakly populated (P_gg = {p_gg:.3e})")
    q = grid.q
    n_ch = state.m // q
    d4 = state.d.reshape(n_ch, q, n_ch, q)
    j = 0.5 * np.einsum("kqlp->qp", np.abs(d4) ** 2) \
        / (np.outer(grid.weights, grid.weights) * p_gg)

    rho1 = 0.5 * (state.d @ state.d.conj().T) / p_gg
    lam = np.linalg.eigvalsh(rho1)[::-1]
    lam = np.clip(lam, 0.0, None)
    lam = lam / np.sum(lam)
    purity = float(np.sum(lam ** 2))
    live = lam[lam > 1e-300]
    entropy = float(-np.sum(live * np.log(live)))

    omega_sum = 0.5 * (grid.nodes[:, None] + grid.nodes[None, :])
    omega_diff = 0.5 * (grid.nodes[:, None] - grid.nodes[None, :])
    return {
        "p_gg": p_gg,
        "residual_p_b": pb,
        "emission_incomplete": pb > _RESIDUAL_P_B,
        "omega": grid.nodes.copy(),
        "jsd": j,
        "omega_sum": omega_sum,
        "omega_diff": omega_diff,
        "schmidt_weights": lam,
        "purity": purity,
        "k_eff": 1.0 / purity,
        "entropy_nats": entropy,
        "entropy_bits": entropy / math.log(2.0),
    }
