"""Emitter-centered mode basis: overlap matrices, their spectral decomposition,
emitter-channel couplings and bright-mode spatial profiles.

The per-frequency overlap matrix has entries Im G(R_i, R_j, omega). Its
eigenvalues gamma_k weight N collective bright channels; the coupling of
emitter a to channel k is g_ak = d_a * (omega/sqrt(pi)) * sqrt(gamma_k) * V_ak
(all electromagnetic prefactors absorbed into the normalized-unit constant
omega/sqrt(pi) and the effective dipole).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .greens import GreensTable
from .model import EmitterSpec, FrequencyGrid

_EIG_CLAMP_REL = 1e-12
_DEGENERACY_REL = 1e-10


class EcmError(ValueError):
    pass


def normalization_constant(omega: np.ndarray | float):
    """omega/sqrt(pi): the mode normalization in hbar = mu0 = v_g = 1 units."""
    return np.asarray(omega) / math.sqrt(math.pi)


@dataclass
class EcmBasis:
    gamma: np.ndarray          # (Q, N) eigenvalues, descending per frequency
    vectors: np.ndarray        # (Q, N, N); vectors[q, :, k] is the k-th eigenvector
    frequencies: np.ndarray    # (Q,)
    clamped: np.ndarray        # (Q,) count of eigenvalues clamped to zero
    degenerate: list           # [(q, i, j)] recorded near-degenerate pairs

    @property
    def n_channels(self) -> int:
        return self.gamma.shape[1]


def build_overlap(table: GreensTable, emitters: list[EmitterSpec],
                  lambda_a: float) -> np.ndarray:
    """Per-frequency overlap matrices (Q, N, N) for the given emitters."""
    idx = [table.index_of(e.position * lambda_a) for e in emitters]
    return table.im_g[:, np.ix_(idx, idx)[0], np.ix_(idx, idx)[1]]


def diagonalize_overlap(overlap: np.ndarray, frequencies: np.ndarray) -> EcmBasis:
    """Eigendecompose each real-symmetric overlap matrix.

    Eigenvalues are sorted descending; values in (-tol, 0) are clamped to zero
    and anything below -tol raises. The eigenvector sign is fixed by making the
    largest-magnitude component positive, for reproducible output.
    """
    q_count, n, _ = overlap.shape
    gamma = np.empty((q_count, n))
    vectors = np.empty((q_count, n, n))
    clamped = np.zeros(q_count, dtype=int)
    degenerate = []
    for q in range(q_count):
        m = overlap[q]
        if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(np.abs(m).max(), 1e-300)):
            raise EcmError(f"overlap matrix at node {q} is not symmetric")
        vals, vecs = np.linalg.eigh(m)
        scale = max(np.abs(vals).max(), 1e-300)
        tol = _EIG_CLAMP_REL * scale
        if vals[0] < -tol:
            raise EcmError(
                f"indefinite-overlap: eigenvalue {vals[0]:.3e} at node {q}")
        neg = vals < 0
        clamped[q] = int(np.count_nonzero(neg))
        vals = np.clip(vals, 0.0, None)
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        for k in range(n):
            lead = np.argmax(np.abs(vecs[:, k]))
            if vecs[lead, k] < 0:
                vecs[:, k] = -vecs[:, k]
        for i in range(n - 1):
            if abs(vals[i] - vals[i + 1]) < _DEGENERACY_REL * scale:
                degenerate.append((q, i, i + 1))
        gamma[q] = vals
        vectors[q] = vecs
    return EcmBasis(gamma=gamma, vectors=vectors, frequencies=frequencies.copy(),
                    clamped=clamped, degenerate=degenerate)


@dataclass
class CouplingTensor:
    g: np.ndarray              # (N, N, Q): emitter a, channel k, node q
    g_weighted: np.ndarray     # sqrt(w_q) * g
    omega_nodes: np.ndarray    # (Q,)
    weights: np.ndarray        # (Q,)
    omega_atoms: np.ndarray    # (N,)

    @property
    def n_emitters(self) -> int:
        return self.g.shape[0]

    @property
    def q(self) -> int:
        return self.g.shape[2]

    def flat_weighted(self) -> np.ndarray:
        """(N, N*Q) view with combined channel-frequency index alpha = k*Q + q."""
        n = self.n_emitters
        return self.g_weighted.reshape(n, n * self.q)

    def spectral_density(self, emitter: int = 0) -> np.ndarray:
        """sum_k |g_ak(omega_q)|^2 for one emitter, per node."""
        return np.sum(np.abs(self.g[emitter]) ** 2, axis=0)


def couplings(basis: EcmBasis, emitters: list[EmitterSpec],
              grid: FrequencyGrid) -> CouplingTensor:
    """Coupling tensor g[a, k, q] and its quadrature-weighted companion."""
    if basis.gamma.shape[0] != grid.q:
        raise EcmError("basis and grid are not aligned")
    d = np.array([e.d_eff for e in emitters])
    norm = normalization_constant(grid.nodes)                    # (Q,)
    amp = norm[None, :] * np.sqrt(basis.gamma.T)                 # (N_k, Q)
    # vectors[q, a, k] -> (a, k, q)
    v = np.transpose(basis.vectors, (1, 2, 0))
    g = d[:, None, None] * amp[None, :, :] * v
    g = g.astype(complex)
    g_weighted = g * np.sqrt(grid.weights)[None, None, :]
    return CouplingTensor(g=g, g_weighted=g_weighted,
                          omega_nodes=grid.nodes.copy(), weights=grid.weights.copy(),
                          omega_atoms=np.array([e.omega for e in emitters]))


def spectral_sum_residual(coup: CouplingTensor, overlap: np.ndarray,
                          emitters: list[EmitterSpec]) -> float:
    """Max relative deviation of sum_k g_ak g_bk* from N(omega)^2 d_a d_b Gamma_ab."""
    lhs = np.einsum("akq,bkq->abq", coup.g, np.conj(coup.g)).real
    d = np.array([e.d_eff for e in emitters])
    norm2 = normalization_constant(coup.omega_nodes) ** 2
    rhs = d[:, None, None] * d[None, :, None] * norm2[None, None, :] \
        * np.transpose(overlap, (1, 2, 0))
    scale = np.max(np.abs(rhs))
    return float(np.max(np.abs(lhs - rhs)) / max(scale, 1e-300))


@dataclass
class ModeProfileSet:
    """Bright-mode profiles Phi_k(r, omega_q) over requested observation points."""
    profiles: np.ndarray       # (Q, n_points, N_channels)
    points: np.ndarray         # physical coordinates
    frequencies: np.ndarray
    usable: np.ndarray         # (Q,) False where an emitter self-coupling vanished

    def reconstruction_vectors(self, weights: np.ndarray) -> np.ndarray:
        """F[alpha = k*Q + q, point] = sqrt(w_q) * Phi_k(r, omega_q)."""
        q, npts, n = self.profiles.shape
        f = np.transpose(self.profiles, (2, 0, 1)) * np.sqrt(weights)[None, :, None]
        return f.reshape(n * q, npts)


def mode_profiles(im_g_points: np.ndarray, overlap: np.ndarray, basis: EcmBasis,
                  points: np.ndarray, min_self_coupling: float = 1e-14) -> ModeProfileSet:
    """Build Phi_k(r, omega_q) from Im G(r, R_j, omega_q) columns.

    im_g_points has shape (Q, n_points, N). Nodes where some Gamma_jj vanishes
    are flagged unusable rather than dividing by ~0.
    """
    q_count, npts, n = im_g_points.shape
    diag = np.einsum("qjj->qj", overlap)                         # (Q, N)
    usable = np.all(diag > min_self_coupling, axis=1)
    safe = np.where(diag > min_self_coupling, diag, 1.0)
    psi = im_g_points / safe[:, None, :]                         # (Q, pts, N)
    amp = normalization_constant(basis.frequencies)[:, None] * np.sqrt(basis.gamma)
    phi = np.einsum("qpj,qjk->qpk", psi, basis.vectors) * amp[:, None, :]
    phi[~usable] = 0.0
    return ModeProfileSet(profiles=phi, points=np.asarray(points, dtype=float),
                          frequencies=basis.frequencies.copy(), usable=usable)


def channel_gram_offdiagonal(coup: CouplingTensor, node: int) -> float:
    """Max off-diagonal of the normalized channel Gram matrix at one node.

    The bright channels are orthonormal per frequency, so the Gram matrix of
    the coupling columns across emitters must be diagonal (dark channels with
    zero norm are skipped).
    """
    g = coup.g[:, :, node]                                       # (a, k)
    gram = g.conj().T @ g
    norms = np.sqrt(np.abs(np.diag(gram)))
    live = norms > 1e-14 * max(norms.max(), 1e-300)
    gram = gram[np.ix_(live, live)]
    norms = norms[live]
    if gram.size == 0:
        return 0.0
    normalized = gram / np.outer(norms, norms)
    off = normalized - np.diag(np.diag(normalized))
    return float(np.max(np.abs(off))) if off.size else 0.0
