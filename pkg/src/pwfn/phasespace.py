"""Wigner phase-space distribution and hydrodynamic form of the field.

Wigner matrix
-------------
For one helicity block psi the reduced distribution is the 3x3 Hermitian
matrix

    W_ij(r, k) = dV * sum_s exp(-i k.s) psi_i(r + s/2) psi_j*(r - s/2),

with the half-step samples obtained by exact spectral interpolation onto the
doubled lattice.  W splits into a real symmetric tensor and a real vector,
W_ij = w_ij + (c/2i) eps_ijk u_k.  Distributions built from genuine
transverse solutions satisfy two pointwise subsidiary conditions in (r, k)
and the trace/vector pair (w, u) closes under

    dw/dt = -c^2 div u,        du_i/dt = -2 c eps_ijk k_j u_k - grad_i w,

which wigner_reduced_step integrates per k fiber.

Hydrodynamic variables
----------------------
From one helicity vector F: energy density rho = F*.F, flow velocity
rho v = c Im(F* x F), normalized stress t_ij = c (F_i* F_j + F_j* F_i)/rho
(so that t_ii = 2c identically), and phase-gradient vector
rho u = c Im(F_j* grad F_j).  The identities t_ii = 2c, v_i t_ik = 0 and
t_ij t_ij = 4c^2 - 2 v^2 hold pointwise wherever rho > 0.  The quantization
integral counts vortex lines piercing a lattice surface: the integrand is
curl-like, so a rectangular patch evaluates to the boundary circulation of
u minus the stress/velocity correction flux, in units of 2 pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import DomainError, InconsistencyError, ShapeError, StabilityError
from .spectral import GridSpec, to_k, to_r

__all__ = [
    "WignerField", "WignerDecomp", "HydroState",
    "wigner_build", "wigner_decompose", "wigner_subsidiary_residual",
    "wigner_reduced_step", "reduced_pair_from_wigner",
    "hydro_from_field", "hydro_identity_residuals", "gradient_bilinears",
    "hydro_divergence_residuals", "hydro_evolution_residual",
    "quantization_integral",
]

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    _EPS3[_i, _j, _k] = 1.0
    _EPS3[_i, _k, _j] = -1.0


@dataclass
class WignerField:
    """W_ij(r, k): complex array of shape (3, 3, nx, ny, nz, nx, ny, nz)."""

    spec: GridSpec
    w: np.ndarray

    def __post_init__(self):
        expected = (3, 3) + self.spec.n + self.spec.n
        if self.w.shape != expected:
            raise ShapeError(f"wigner shape {self.w.shape} != {expected}")

    def hermiticity_defect(self):
        swapped = np.conj(np.swapaxes(self.w, 0, 1))
        scale = np.max(np.abs(self.w))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.w - swapped)) / scale)


@dataclass
class WignerDecomp:
    """Real decomposition W_ij = w_ij + (c/2i) eps_ijk u_k."""

    spec: GridSpec
    w_sym: np.ndarray   # (3, 3, r..., k...) real symmetric
    u: np.ndarray       # (3, r..., k...) real

    def reconstruct(self):
        anti = np.einsum("ijk,k...->ij...", _EPS3, self.u) / 2j
        return self.w_sym + anti


def _doubled_field(spec: GridSpec, block):
    """Exact band-limited interpolation of one block onto the 2x lattice."""
    n = spec.n
    big = GridSpec(n=tuple(2 * m for m in n), length=spec.length)
    bhat = to_k(spec, block)
    out = np.zeros((3,) + big.n, dtype=complex)
    kx = sfft.fftfreq(n[0], 1.0 / n[0]).astype(int)
    ky = sfft.fftfreq(n[1], 1.0 / n[1]).astype(int)
    kz = sfft.fftfreq(n[2], 1.0 / n[2]).astype(int)
    out[np.ix_(range(3), kx % (2 * n[0]), ky % (2 * n[1]), kz % (2 * n[2]))] = bhat
    return to_r(big, out), big


def wigner_build(spec: GridSpec, block) -> WignerField:
    """Reduced Wigner matrix of one helicity block (3, nx, ny, nz array)."""
    block = np.ascontiguousarray(block, dtype=complex)
    if block.shape != (3,) + spec.n:
        raise ShapeError("block shape does not match the grid")
    half, _ = _doubled_field(spec, block)
    n = spec.n
    a_idx = [np.arange(m) for m in n]
    b_idx = [np.arange(m) for m in n]
    # half-lattice indices of r + s/2 and r - s/2 (r index a, s index b,
    # both box-centered):  h+ = 2a + b - m/2,  h- = 2a - b + m/2  (mod 2m).
    plus_idx = []
    minus_idx = []
    for ax, m in enumerate(n):
        aa = a_idx[ax][:, None]
        bb = b_idx[ax][None, :]
        plus_idx.append((2 * aa + bb - m // 2) % (2 * m))
        minus_idx.append((2 * aa - bb + m // 2) % (2 * m))
    px = plus_idx[0][:, None, None, :, None, None]
    py = plus_idx[1][None, :, None, None, :, None]
    pz = plus_idx[2][None, None, :, None, None, :]
    mx = minus_idx[0][:, None, None, :, None, None]
    my = minus_idx[1][None, :, None, None, :, None]
    mz = minus_idx[2][None, None, :, None, None, :]
    w = np.empty((3, 3) + n + n, dtype=complex)
    for i in range(3):
        fp = half[i][px, py, pz]
        for j in range(3):
            fm = np.conj(half[j][mx, my, mz])
            g = fp * fm
            # transform over the s axes with the box-centered convention
            gh = sfft.fftn(g, axes=(-3, -2, -1))
            w[i, j] = gh * spec.checkerboard() * spec.cell_volume
    # The s = -L/2 lag slice has no +L/2 partner on the lattice; averaging
    # W with its matrix adjoint restores exact hermiticity (the symmetric
    # treatment of the half-period lag).
    w = 0.5 * (w + np.conj(np.swapaxes(w, 0, 1)))
    return WignerField(spec=spec, w=w)


def wigner_marginal_k(wf: WignerField):
    """sum_k W_ii(r, k) / V; equals |psi(r)|^2 for a genuine distribution."""
    tr = np.einsum("ii...->...", wf.w)
    return np.sum(tr, axis=(-3, -2, -1)).real / wf.spec.volume


def wigner_marginal_r(wf: WignerField):
    """sum_r W_ii(r, k) dV; equals |psi_hat(k)|^2."""
    tr = np.einsum("ii...->...", wf.w)
    return np.sum(tr, axis=(0, 1, 2)).real * wf.spec.cell_volume


def wigner_decompose(wf: WignerField, herm_rtol=1e-9) -> WignerDecomp:
    """Split into the real symmetric tensor and the real vector."""
    defect = wf.hermiticity_defect()
    if defect > herm_rtol:
        raise InconsistencyError(
            f"Wigner matrix hermiticity defect {defect:.3e} exceeds {herm_rtol:.1e}"
        )
    w_sym = 0.5 * (wf.w + np.conj(np.swapaxes(wf.w, 0, 1))).real
    u = np.einsum("ijk,ij...->k...", _EPS3, wf.w) * 1j
    return WignerDecomp(spec=wf.spec, w_sym=w_sym, u=u.real)


def _grad_r(spec: GridSpec, arr):
    """Spectral gradient over the three r axes of an (r..., k...) array."""
    r_axes = (-6, -5, -4)
    kvec = spec.k_grid_diff()
    ahat = sfft.fftn(arr, axes=r_axes)
    view = [1] * arr.ndim
    view[-6], view[-5], view[-4] = spec.n
    out = []
    for ax_i in range(3):
        out.append(sfft.ifftn(1j * kvec[ax_i].reshape(view) * ahat,
                              axes=r_axes).real)
    return out


def wigner_subsidiary_residual(decomp: WignerDecomp):
    """Residuals (r1, r2) of the two pointwise subsidiary conditions.

    r1: eps_ijk k_j u_k = grad_j w_ij   (gradient over r),
    r2: eps_ijk grad_j u_k = -4 k_j w_ij.
    Both normalized by the representable field scale k_max (|u| + |w|), so
    single modes whose terms vanish identically report zero rather than a
    0/0 artifact.  The sign of the second condition follows from the
    forward-phase exp(-i k.s) convention used here (checked against
    solution-built distributions in the tests).
    """
    spec = decomp.spec
    kvec = spec.k_grid()
    kb = [kvec[i][None, None, None, :, :, :] for i in range(3)]
    lhs1 = np.zeros((3,) + spec.n + spec.n)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                if _EPS3[i, j, k] != 0.0:
                    lhs1[i] += _EPS3[i, j, k] * kb[j][0] * decomp.u[k]
    rhs1 = np.stack([
        sum(_grad_r(spec, decomp.w_sym[i, j])[j] for j in range(3))
        for i in range(3)
    ])
    # normalize by the representable field scale, not by the residual terms
    # themselves (which vanish identically for single modes)
    kmax = float(np.max(spec.k_norm()))
    scale1 = kmax * (np.max(np.abs(decomp.u)) + np.max(np.abs(decomp.w_sym)))
    r1 = float(np.max(np.abs(lhs1 - rhs1)) / scale1) if scale1 > 0 else 0.0

    lhs2 = np.zeros((3,) + spec.n + spec.n)
    grads_u = [_grad_r(spec, decomp.u[k]) for k in range(3)]
    for i in range(3):
        for j in range(3):
            for k in range(3):
                if _EPS3[i, j, k] != 0.0:
                    lhs2[i] += _EPS3[i, j, k] * grads_u[k][j]
    rhs2 = np.stack([
        sum(-4.0 * kb[j][0] * decomp.w_sym[i, j] for j in range(3))
        for i in range(3)
    ])
    scale2 = 4.0 * kmax * (np.max(np.abs(decomp.w_sym))
                           + np.max(np.abs(decomp.u)))
    r2 = float(np.max(np.abs(lhs2 - rhs2)) / scale2) if scale2 > 0 else 0.0
    return r1, r2


def reduced_pair_from_wigner(decomp: WignerDecomp, k_index):
    """Extract (w, u) on one k fiber: trace of w_sym and the vector u."""
    w = np.einsum("ii...->...", decomp.w_sym)[..., k_index[0], k_index[1],
                                              k_index[2]]
    u = decomp.u[..., k_index[0], k_index[1], k_index[2]]
    return np.ascontiguousarray(w), np.ascontiguousarray(u)


def wigner_reduced_step(spec: GridSpec, k, w, u, dt, steps, cfl_safety=0.5):
    """RK4 integration of the closed (w, u) pair on one k fiber.

    dw/dt = -c^2 div u, du/dt = -2 c (k x u)... rotation about k minus grad w:
    du_i/dt = -2 c eps_ijk k_j u_k - grad_i w.  c = 1 internally.
    """
    if dt <= 0.0:
        raise DomainError("dt must be positive")
    limit = cfl_safety * min(spec.spacing)
    if dt > limit:
        raise StabilityError(f"dt = {dt:.3e} exceeds CFL bound {limit:.3e}")
    k = np.asarray(k, dtype=float)
    kvec = spec.k_grid_diff()

    def rhs(state):
        wf, uf = state
        what = to_k(spec, wf.astype(complex))
        uhat = to_k(spec, uf.astype(complex))
        div_u = to_r(spec, 1j * np.sum(kvec * uhat, axis=0)).real
        grad_w = np.stack([to_r(spec, 1j * kvec[i] * what).real for i in range(3)])
        kxu = np.cross(k, uf, axisb=0, axisc=0)
        return (-div_u, -2.0 * kxu - grad_w)

    wf = np.array(w, dtype=float)
    uf = np.array(u, dtype=float)
    for _ in range(steps):
        k1 = rhs((wf, uf))
        k2 = rhs((wf + 0.5 * dt * k1[0], uf + 0.5 * dt * k1[1]))
        k3 = rhs((wf + 0.5 * dt * k2[0], uf + 0.5 * dt * k2[1]))
        k4 = rhs((wf + dt * k3[0], uf + dt * k3[1]))
        wf = wf + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        uf = uf + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return wf, uf


@dataclass
class HydroState:
    """Pointwise hydrodynamic variables of one helicity vector field."""

    spec: GridSpec
    rho: np.ndarray
    v: np.ndarray
    t: np.ndarray
    u: np.ndarray


def hydro_from_field(spec: GridSpec, f) -> HydroState:
    """Hydrodynamic variables of a complex vector field on the grid."""
    f = np.ascontiguousarray(f, dtype=complex)
    if f.shape != (3,) + spec.n:
        raise ShapeError("field shape does not match the grid")
    rho = np.sum(np.abs(f) ** 2, axis=0)
    cross = np.cross(np.conj(f), f, axisa=0, axisb=0, axisc=0).imag
    safe = np.where(rho > 0.0, rho, 1.0)
    v = cross / safe
    t = np.einsum("i...,j...->ij...", np.conj(f), f)
    t = (t + np.swapaxes(t, 0, 1)).real / safe
    kvec = spec.k_grid_diff()
    u = np.zeros((3,) + spec.n)
    for i in range(3):
        total = np.zeros(spec.n)
        for j in range(3):
            djf = to_r(spec, 1j * kvec[i] * to_k(spec, f[j]))
            total += (np.conj(f[j]) * djf).imag
        u[i] = total / safe
    return HydroState(spec=spec, rho=rho, v=v, t=t, u=u)


def hydro_identity_residuals(state: HydroState, rho_floor=1e-8):
    """Pointwise violations of t_ii = 2c, v_i t_ik = 0, t.t = 4c^2 - 2v^2.

    Evaluated where rho > rho_floor * max(rho); returns the three maxima.
    """
    mask = state.rho > rho_floor * np.max(state.rho)
    tr = np.einsum("ii...->...", state.t)
    r1 = np.max(np.abs(tr - 2.0)[mask])
    vt = np.einsum("i...,ik...->k...", state.v, state.t)
    r2 = np.max(np.abs(vt)[:, mask])
    tt = np.einsum("ij...,ij...->...", state.t, state.t)
    v2 = np.sum(state.v**2, axis=0)
    r3 = np.max(np.abs(tt - (4.0 - 2.0 * v2))[mask])
    return float(r1), float(r2), float(r3)


def _grad_scalar(spec, arr):
    kvec = spec.k_grid_diff()
    ahat = to_k(spec, arr.astype(complex))
    return np.stack([to_r(spec, 1j * kvec[i] * ahat).real for i in range(3)])


def gradient_bilinears(state: HydroState, g_rho=None, g_v=None, g_t=None):
    """The complex gradient bilinears C_a = F* (x) grad_a F in hydro form.

    The one-point matrix B = rho (t + i eps.v)/2 equals F* (x) F and has
    rank one, which closes the gradient sector exactly:

        C_a = (B dB_a)/rho - conj(Theta_a) B / rho,
        Theta_a = (grad_a rho)/2 + i rho u_a.

    Returns an array of shape (3, 3, 3, nx, ny, nz) indexed [a, i, b] with
    C[a, i, b] = F_i* d_a F_b.  Everything downstream of the field's first
    derivatives (stress evolution, divergence conditions) follows from it.
    """
    spec = state.spec
    rho, v, t, u = state.rho, state.v, state.t, state.u
    if g_rho is None:
        g_rho = _grad_scalar(spec, rho)
    if g_v is None:
        g_v = np.stack([_grad_scalar(spec, v[i]) for i in range(3)])
    if g_t is None:
        g_t = np.stack([[_grad_scalar(spec, t[i, j]) for j in range(3)]
                        for i in range(3)])
    epsv = np.einsum("ijk,k...->ij...", _EPS3, v)
    big_b = 0.5 * rho * (t + 1j * epsv)
    out = np.empty((3, 3, 3) + spec.n, dtype=complex)
    for a in range(3):
        depsv = np.einsum("ijk,k...->ij...", _EPS3, g_v[:, a])
        db = 0.5 * (g_rho[a] * (t + 1j * epsv)
                    + rho * (g_t[:, :, a] + 1j * depsv))
        theta = 0.5 * g_rho[a] + 1j * rho * u[a]
        out[a] = (np.einsum("ik...,kj...->ij...", big_b, db)
                  - np.conj(theta) * big_b) / rho
    return out


def hydro_divergence_residuals(state: HydroState):
    """The two pointwise transversality conditions in hydro variables.

    A transverse field satisfies F_i* (div F) = 0, whose hydro form is
    sum_a C[a, i, a] = 0; the real and imaginary parts give the two real
    vector conditions.  Returns their maxima relative to the bilinear
    scale."""
    c = gradient_bilinears(state)
    vec = sum(c[a, :, a] for a in range(3))
    scale = float(np.max(np.abs(c))) * 3.0
    if scale == 0.0:
        return 0.0, 0.0
    return (float(np.max(np.abs(vec.real)) / scale),
            float(np.max(np.abs(vec.imag)) / scale))


def hydro_evolution_residual(state_m: HydroState, state_0: HydroState,
                             state_p: HydroState, dt: float):
    """Residuals of the hydrodynamic evolution and divergence equations.

    Time derivatives are centered differences of the outer states; right
    hand sides are evaluated on the middle state with spectral gradients.
    Returns a dict of relative residuals keyed by equation name: the four
    evolution budgets (continuity, velocity, stress, u) and the two
    transversality conditions (div1/div2, the real and imaginary parts of
    the hydro form of F* div F).  On exact solutions the evolution budgets
    vanish at second order under dt halving and the transversality
    conditions sit at the grid-representation floor.
    """
    spec = state_0.spec
    rho, v, t, u = state_0.rho, state_0.v, state_0.t, state_0.u
    g_rho = _grad_scalar(spec, rho)
    g_v = np.stack([_grad_scalar(spec, v[i]) for i in range(3)])      # [i, d, ...]
    g_t = np.stack([[_grad_scalar(spec, t[i, j]) for j in range(3)]
                    for i in range(3)])                               # [i, j, d, ...]
    g_u = np.stack([_grad_scalar(spec, u[i]) for i in range(3)])
    div_v = sum(g_v[i][i] for i in range(3))

    def vdot(arr_grad):
        return np.einsum("d...,d...->...", v, arr_grad)

    out = {}

    # continuity
    dt_rho = (state_p.rho - state_m.rho) / (2.0 * dt)
    res = dt_rho + vdot(g_rho) + rho * div_v
    out["continuity"] = float(np.max(np.abs(res)) / np.max(np.abs(dt_rho) + 1e-300))

    # velocity
    dt_v = (state_p.v - state_m.v) / (2.0 * dt)
    res_v = np.empty_like(v)
    for i in range(3):
        flux = np.zeros(spec.n)
        for j in range(3):
            term = rho * (v[i] * v[j] + t[i, j]) - (rho if i == j else 0.0)
            flux += _grad_scalar(spec, term)[j]
        res_v[i] = dt_v[i] + vdot(g_v[i]) - flux / rho
    out["velocity"] = float(np.max(np.abs(res_v))
                            / (np.max(np.abs(dt_v)) + 1e-300))

    # u equation
    dt_u = (state_p.u - state_m.u) / (2.0 * dt)
    res_u = np.empty_like(u)
    for i in range(3):
        flux = np.zeros(spec.n)
        for j in range(3):
            inner = np.zeros(spec.n)
            for k in range(3):
                for l in range(3):
                    if _EPS3[j, k, l] != 0.0:
                        tsum = sum(t[k, m] * g_t[m, l][i] for m in range(3))
                        inner += _EPS3[j, k, l] * (tsum + v[k] * g_v[l][i])
            flux += _grad_scalar(spec, rho * inner)[j]
        res_u[i] = dt_u[i] + vdot(g_u[i]) - flux / (4.0 * rho)
    out["u"] = float(np.max(np.abs(res_u)) / (np.max(np.abs(dt_u)) + 1e-300))

    # stress equation, via the closed gradient-bilinear form:
    # d/dt t_un = 2 Im(P + P^T) with P_ij = eps_jab C[a, i, b], so
    # d/dt t = (2 Im(P + P^T) - t d rho/dt)/rho, d rho/dt = -div(rho v).
    dt_t = (state_p.t - state_m.t) / (2.0 * dt)
    c = gradient_bilinears(state_0, g_rho=g_rho, g_v=g_v, g_t=g_t)
    p = np.einsum("jab,aib...->ij...", _EPS3, c)
    drho_t = -(vdot(g_rho) + rho * div_v)
    rhs_t = (2.0 * np.imag(p + np.swapaxes(p, 0, 1)) - t * drho_t) / rho
    res_t = dt_t - rhs_t
    out["stress"] = float(np.max(np.abs(res_t)) / (np.max(np.abs(dt_t)) + 1e-300))

    # transversality conditions (no time derivative): real and imaginary
    # parts of sum_a C[a, i, a] = F_i* div F = 0
    vec = sum(c[a, :, a] for a in range(3))
    cscale = float(np.max(np.abs(c))) * 3.0 + 1e-300
    out["div1"] = float(np.max(np.abs(vec.real)) / cscale)
    out["div2"] = float(np.max(np.abs(vec.imag)) / cscale)
    return out


def quantization_integral(state: HydroState, surface, rho_floor=1e-8):
    """Winding number detected through a lattice surface.

    surface = ("plane", axis, index) integrates over the full periodic
    cross-section perpendicular to ``axis`` (a closed 2-cycle of the torus;
    its total winding vanishes for any single-valued field, so it serves as
    the untwisted reference).  surface = ("patch", axis, index, (lo1, hi1),
    (lo2, hi2)) restricts to the plaquettes in the given index ranges of the
    two remaining axes (in axis order); since the integrand is curl-like,
    the patch value equals the boundary circulation and counts the vortex
    lines piercing it.  Returns (phase-wrapped circulation of u minus the
    stress/velocity correction flux) / (2 pi), near an integer for states
    built from a genuine field.  Raises DomainError when rho falls below
    rho_floor * max(rho) on the surface (phase undefined).
    """
    kind, axis, index = surface[:3]
    if kind not in ("plane", "patch"):
        raise DomainError(f"unsupported surface kind {kind!r}")
    spec = state.spec
    ax1, ax2 = [a for a in range(3) if a != axis]
    take = [slice(None)] * 3
    take[axis] = index
    take = tuple(take)
    u1 = state.u[ax1][take]
    u2 = state.u[ax2][take]
    d1 = spec.spacing[ax1]
    d2 = spec.spacing[ax2]
    if kind == "patch":
        (lo1, hi1), (lo2, hi2) = surface[3], surface[4]
        n1 = spec.n[ax1]
        n2 = spec.n[ax2]
        if hi1 <= lo1 or hi2 <= lo2 or hi1 - lo1 >= n1 or hi2 - lo2 >= n2:
            raise DomainError("patch index ranges must be increasing and "
                              "smaller than one period")
        idx1 = np.arange(lo1, hi1 + 1) % n1
        idx2 = np.arange(lo2, hi2 + 1) % n2
        psel = (idx1[:-1][:, None], idx2[:-1][None, :])
        rho_b = state.rho[take][np.ix_(idx1, idx2)]
        if np.min([rho_b[0, :].min(), rho_b[-1, :].min(),
                   rho_b[:, 0].min(), rho_b[:, -1].min()]) \
                < rho_floor * np.max(state.rho):
            raise DomainError("rho vanishes on the patch boundary; "
                              "phase undefined")
        # boundary line integral of u, trapezoid along each edge,
        # right-handed about the +axis normal
        def edge(uu, fixed, along_idx, along):
            vals = uu[fixed, along_idx] if along == 1 else uu[along_idx, fixed]
            step = d2 if along == 1 else d1
            return float(np.sum(0.5 * (vals[:-1] + vals[1:])) * step)

        total = (edge(u1, idx2[0], idx1, 0)        # bottom, +ax1
                 + edge(u2, idx1[-1], idx2, 1)     # right, +ax2
                 - edge(u1, idx2[-1], idx1, 0)     # top, -ax1
                 - edge(u2, idx1[0], idx2, 1))     # left, -ax2
    else:
        psel = (slice(None), slice(None))
        rho_s = state.rho[take]
        if np.min(rho_s) < rho_floor * np.max(state.rho):
            raise DomainError("rho vanishes on the surface; phase undefined")
        total = 0.0  # closed 2-cycle: the u circulation has no boundary

    # correction flux: (1/8c^3) eps_ijk (v_i dv_j x dv_k + v_i dt_jl x dt_kl
    #                                     - 2 t_il dt_jl x dv_k) . n
    g_v = np.stack([_grad_scalar(spec, state.v[i]) for i in range(3)])
    g_t = np.stack([[_grad_scalar(spec, state.t[i, j]) for j in range(3)]
                    for i in range(3)])
    corr = np.zeros((3,) + spec.n)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                if _EPS3[i, j, k] == 0.0:
                    continue
                cross_vv = np.cross(g_v[j], g_v[k], axisa=0, axisb=0, axisc=0)
                term = state.v[i] * cross_vv
                for l in range(3):
                    cross_tt = np.cross(g_t[j, l], g_t[k, l],
                                        axisa=0, axisb=0, axisc=0)
                    cross_tv = np.cross(g_t[j, l], g_v[k],
                                        axisa=0, axisb=0, axisc=0)
                    term = term + state.v[i] * cross_tt \
                        - 2.0 * state.t[i, l] * cross_tv
                corr += _EPS3[i, j, k] * term
    corr /= 8.0
    flux = float(np.sum(corr[axis][take][psel]) * d1 * d2)
    return (total - flux) / (2.0 * np.pi)
