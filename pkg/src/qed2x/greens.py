"""Scalar 1D Green's functions for lossy layered waveguides.

The mirrored waveguide has a perfect mirror (Dirichlet) at x = 0 and an
arbitrary sequence of disjoint piecewise-constant complex-permittivity slabs.
G is built from two homogeneous Helmholtz solutions via the spatially
invariant Wronskian, with transfer matrices chaining the state vector
(phi, phi') across interfaces. Positions handed to this module are physical
(same units as 1/omega with v_g = 1).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .model import FrequencyGrid

_K_SINGULAR = 1e-14
_WRONSKIAN_TOL = 1e-12
_PSD_CLAMP_REL = 1e-10


class GreensError(ValueError):
    pass


class DegenerateWronskianError(GreensError):
    """Accidental bound-state pole on the real frequency axis."""


@dataclass(frozen=True)
class SlabSpec:
    x1: float                  # lambda_a units
    x2: float
    eps: complex

    def __post_init__(self):
        if not (0 < self.x1 < self.x2):
            raise GreensError(f"slab needs 0 < x1 < x2, got [{self.x1}, {self.x2}]")
        if self.eps.imag < 0:
            raise GreensError(f"passive medium requires Im(eps) >= 0, got {self.eps}")


@dataclass(frozen=True)
class EnvironmentSpec:
    kind: str                                  # free-space-1d | mirrored-waveguide | tabulated
    slabs: tuple[SlabSpec, ...] = ()
    lambda_a: float = 1.0                      # physical length of one lambda_a unit
    table_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("free-space-1d", "mirrored-waveguide", "tabulated"):
            raise GreensError(f"unknown environment kind {self.kind!r}")
        slabs = sorted(self.slabs, key=lambda s: s.x1)
        for a, b in zip(slabs, slabs[1:]):
            if b.x1 < a.x2:
                raise GreensError("slabs must be disjoint")
        object.__setattr__(self, "slabs", tuple(slabs))

    def interfaces(self) -> np.ndarray:
        """Physical interface coordinates, ascending (mirror excluded)."""
        pts = []
        for s in self.slabs:
            pts.extend((s.x1 * self.lambda_a, s.x2 * self.lambda_a))
        return np.array(pts)

    def wavenumber(self, omega: float, x: float) -> complex:
        """Local wavenumber k(x, omega) with v_g = 1."""
        for s in self.slabs:
            if s.x1 * self.lambda_a <= x <= s.x2 * self.lambda_a:
                return omega * np.sqrt(complex(s.eps))
        return complex(omega)


def environment_from_dict(env: dict, lambda_a: float) -> EnvironmentSpec:
    slabs = tuple(
        SlabSpec(x1=float(s["x1"]), x2=float(s["x2"]),
                 eps=complex(float(s["eps_real"]), float(s.get("eps_imag", 0.0))))
        for s in env.get("slabs", []) or ()
    )
    return EnvironmentSpec(kind=env["kind"], slabs=slabs, lambda_a=lambda_a,
                           table_path=env.get("table_path"))


def transfer_matrix(k: complex, d: float) -> np.ndarray:
    """Propagate (phi, phi') a distance d through a medium of wavenumber k.

    Negative d propagates backwards (T(k, -d) is the exact inverse of T(k, d)).
    """
    if abs(k) < _K_SINGULAR:
        return np.array([[1.0, d], [0.0, 1.0]], dtype=complex)
    kd = k * d
    c, s = np.cos(kd), np.sin(kd)
    return np.array([[c, s / k], [-k * s, c]], dtype=complex)


def _propagate(env: EnvironmentSpec, omega: float, u: np.ndarray,
               x_from: float, x_to: float) -> np.ndarray:
    """Carry the state vector u = (phi, phi') from x_from to x_to."""
    if x_to == x_from:
        return u
    sign = 1.0 if x_to > x_from else -1.0
    lo, hi = min(x_from, x_to), max(x_from, x_to)
    cuts = [lo] + [b for b in env.interfaces() if lo < b < hi] + [hi]
    segments = list(zip(cuts[:-1], cuts[1:]))
    if sign < 0:
        segments = segments[::-1]
    for a, b in segments:
        mid = 0.5 * (a + b)
        k = env.wavenumber(omega, mid)
        u = transfer_matrix(k, sign * (b - a)) @ u
    return u


def homogeneous_solutions(env: EnvironmentSpec, omega: float, x: float):
    """Left (Dirichlet at the mirror) and right (outgoing) solutions at x.

    Returns (phi_L, dphi_L, phi_R, dphi_R).
    """
    if env.kind != "mirrored-waveguide":
        raise GreensError("homogeneous solutions are defined for mirrored-waveguide")
    if omega <= 0:
        raise GreensError(f"invalid-frequency: omega must be > 0, got {omega}")
    if x < 0:
        raise GreensError("x must be >= 0 in a mirrored environment")
    k0 = complex(omega)
    uL = _propagate(env, omega, np.array([0.0, 1.0], dtype=complex), 0.0, x)
    ifaces = env.interfaces()
    x_right = max(x, ifaces[-1] if ifaces.size else 0.0)
    uR0 = np.array([np.exp(1j * k0 * x_right), 1j * k0 * np.exp(1j * k0 * x_right)],
                   dtype=complex)
    uR = _propagate(env, omega, uR0, x_right, x)
    return uL[0], uL[1], uR[0], uR[1]


def _wronskian(env: EnvironmentSpec, omega: float) -> complex:
    # phi_L(0) = 0 and phi_L'(0) = 1, so W = -phi_R(0).
    _, _, phiR0, _ = homogeneous_solutions(env, omega, 0.0)
    return -phiR0


def greens_1d(env: EnvironmentSpec, omega: float, x: float, xp: float,
              _retry: bool = True) -> complex:
    """Scalar G(x, x', omega); see module docstring for the construction."""
    if omega <= 0:
        raise GreensError(f"invalid-frequency: omega must be > 0, got {omega}")
    if env.kind == "free-space-1d":
        k0 = omega
        return 1j * np.exp(1j * k0 * abs(x - xp)) / (2.0 * k0)
    if env.kind != "mirrored-waveguide":
        raise GreensError(f"greens_1d cannot evaluate kind {env.kind!r}")
    x_lo, x_hi = (x, xp) if x <= xp else (xp, x)
    phiL, dphiL, phiR, dphiR = homogeneous_solutions(env, omega, x_lo)
    W = phiL * dphiR - dphiL * phiR
    if abs(W) < _WRONSKIAN_TOL * max(abs(phiL) * abs(dphiR), 1.0):
        if _retry:
            return greens_1d(env, omega * (1.0 + 1e-9), x, xp, _retry=False)
        raise DegenerateWronskianError(f"degenerate Wronskian at omega={omega}")
    phiL_lo = phiL
    phiR_hi = homogeneous_solutions(env, omega, x_hi)[2]
    return -phiL_lo * phiR_hi / W


@dataclass
class GreensTable:
    positions: np.ndarray            # physical coordinates, ascending order not required
    frequencies: np.ndarray          # matches a FrequencyGrid's nodes
    im_g: np.ndarray                 # (Q, n, n) real symmetric per frequency
    min_eigenvalues: np.ndarray = field(default=None)  # pre-clamp diagnostics

    def index_of(self, position: float, tol: float = 1e-9) -> int:
        hits = np.nonzero(np.abs(self.positions - position) <= tol)[0]
        if hits.size == 0:
            raise GreensError(f"missing-position: {position} not in table")
        return int(hits[0])


def _clamp_psd(mats: np.ndarray,
               rel_tol: float = _PSD_CLAMP_REL) -> tuple[np.ndarray, np.ndarray]:
    """Clamp small negative eigenvalues of each symmetric matrix to zero."""
    out = np.empty_like(mats)
    min_eigs = np.empty(mats.shape[0])
    # scale across the whole stack: a single matrix may sit at an interference
    # node where its own entries vanish while absolute noise does not
    scale = max(float(np.max(np.abs(np.einsum("qii->qi", mats)))), 1e-300)
    tol = rel_tol * scale
    for q, m in enumerate(mats):
        vals, vecs = np.linalg.eigh(m)
        min_eigs[q] = vals[0]
        if vals[0] < -tol:
            raise GreensError(
                f"indefinite Im G matrix (min eigenvalue {vals[0]:.3e}); "
                "non-passive or corrupted data")
        # leave roundoff-scale negatives untouched so clamping is idempotent;
        # the eigendecomposition downstream clamps those itself
        if vals[0] < -1e-14 * scale:
            vals = np.clip(vals, 0.0, None)
            m = (vecs * vals) @ vecs.T
            m = 0.5 * (m + m.T)
        out[q] = m
    return out, min_eigs


def _solutions_sweep(env: EnvironmentSpec, omega: float, xs_sorted: np.ndarray):
    """phi_L and phi_R state vectors at every point of an ascending coordinate list."""
    n = xs_sorted.size
    phiL = np.empty(n, dtype=complex)
    phiR = np.empty(n, dtype=complex)
    uL = np.array([0.0, 1.0], dtype=complex)
    x_prev = 0.0
    for i, x in enumerate(xs_sorted):
        uL = _propagate(env, omega, uL, x_prev, x)
        phiL[i] = uL[0]
        x_prev = x
    ifaces = env.interfaces()
    x_anchor = max(xs_sorted[-1], ifaces[-1] if ifaces.size else 0.0)
    k0 = complex(omega)
    uR = np.array([np.exp(1j * k0 * x_anchor), 1j * k0 * np.exp(1j * k0 * x_anchor)],
                  dtype=complex)
    x_prev = x_anchor
    for i in range(n - 1, -1, -1):
        uR = _propagate(env, omega, uR, x_prev, xs_sorted[i])
        phiR[i] = uR[0]
        x_prev = xs_sorted[i]
    uR0 = _propagate(env, omega, uR, x_prev, 0.0)
    wronskian = -uR0[0]
    return phiL, phiR, wronskian


def im_greens_grid(env: EnvironmentSpec, positions, grid: FrequencyGrid) -> np.ndarray:
    """Im G(x_i, x_j, omega_q) as a (Q, n, n) array, exploiting the outer-product
    structure G(x, x') = -phi_L(x_<) phi_R(x_>)/W for a full-matrix sweep."""
    positions = np.asarray(positions, dtype=float)
    n = positions.size
    order = np.argsort(positions)
    xs = positions[order]
    mats = np.empty((grid.q, n, n))
    if env.kind == "free-space-1d":
        dx = np.abs(positions[:, None] - positions[None, :])
        for qi, omega in enumerate(grid.nodes):
            mats[qi] = np.cos(omega * dx) / (2.0 * omega)
        return mats
    if env.kind != "mirrored-waveguide":
        raise GreensError(f"cannot sample environment kind {env.kind!r}")
    if np.any(xs < 0):
        raise GreensError("positions must be >= 0 in a mirrored environment")
    inv = np.argsort(order)
    iu, ju = np.triu_indices(n)
    for qi, omega in enumerate(grid.nodes):
        phiL, phiR, w = _solutions_sweep(env, float(omega), xs)
        if abs(w) < _WRONSKIAN_TOL:
            phiL, phiR, w = _solutions_sweep(env, float(omega) * (1.0 + 1e-9), xs)
        g_upper = -(phiL[:, None] * phiR[None, :]) / w    # valid for sorted i <= j
        m = np.empty((n, n))
        m[iu, ju] = g_upper.imag[iu, ju]
        m[ju, iu] = m[iu, ju]
        mats[qi] = m[np.ix_(inv, inv)]
    return mats


def im_greens_matrix(env: EnvironmentSpec, positions, grid: FrequencyGrid) -> GreensTable:
    """Sample Im G over all position pairs and all grid nodes (symmetrized, PSD-clamped)."""
    positions = np.asarray(positions, dtype=float)
    if np.unique(positions).size != positions.size:
        raise GreensError("positions must be distinct")
    mats = im_greens_grid(env, positions, grid)
    mats = 0.5 * (mats + np.transpose(mats, (0, 2, 1)))
    mats, min_eigs = _clamp_psd(mats)
    return GreensTable(positions=positions, frequencies=grid.nodes.copy(),
                       im_g=mats, min_eigenvalues=min_eigs)


def save_tabulated(table: GreensTable, path) -> None:
    """Write the CSV exchange format: header omega,i,j,im_g sorted by (omega,i,j)."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["omega", "i", "j", "im_g"])
        for qi, omega in enumerate(table.frequencies):
            for i in range(table.positions.size):
                for j in range(table.positions.size):
                    w.writerow([format(omega, ".17g"), i, j,
                                format(table.im_g[qi, i, j], ".17g")])


def load_tabulated(path, grid: FrequencyGrid, positions=None) -> GreensTable:
    """Load a tabulated Im G CSV and resample onto grid nodes (monotone cubic in omega)."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["omega", "i", "j", "im_g"]:
            raise GreensError(f"parse-error at line 1: expected header omega,i,j,im_g, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise GreensError(f"parse-error at line {lineno}: expected 4 columns")
            try:
                rows.append((float(row[0]), int(row[1]), int(row[2]), float(row[3])))
            except ValueError as exc:
                raise GreensError(f"parse-error at line {lineno}: {exc}") from exc
    if not rows:
        raise GreensError("parse-error: empty table")
    omegas = np.array(sorted({r[0] for r in rows}))
    n = max(max(r[1], r[2]) for r in rows) + 1
    if omegas[0] > grid.nodes[0] or omegas[-1] < grid.nodes[-1]:
        raise GreensError(
            f"coverage-error: table spans [{omegas[0]}, {omegas[-1]}] but the grid "
            f"needs [{grid.nodes[0]}, {grid.nodes[-1]}]")
    data = np.full((omegas.size, n, n), np.nan)
    omega_index = {w: k for k, w in enumerate(omegas)}
    for w_, i, j, v in rows:
        data[omega_index[w_], i, j] = v
    if np.isnan(data).any():
        raise GreensError("parse-error: incomplete (omega, i, j) coverage")
    mats = np.empty((grid.q, n, n))
    for i in range(n):
        for j in range(n):
            mats[:, i, j] = PchipInterpolator(omegas, data[:, i, j])(grid.nodes)
    mats = 0.5 * (mats + np.transpose(mats, (0, 2, 1)))
    # interpolation noise legitimately produces slightly indefinite matrices
    mats, min_eigs = _clamp_psd(mats, rel_tol=1e-4)
    if positions is None:
        positions = np.arange(n, dtype=float)
    return GreensTable(positions=np.asarray(positions, dtype=float),
                       frequencies=grid.nodes.copy(), im_g=mats,
                       min_eigenvalues=min_eigs)
