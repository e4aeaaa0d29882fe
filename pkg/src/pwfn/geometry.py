"""Field propagation in static curved metrics and the spinor representation.

Curved space
------------
For a static metric g_munu (signature +,-,-,-) the field equations keep
their flat-space form, i dF/dt = rho_3 curl G, with all geometry carried by
the pointwise linear constitutive map between the six-component F and its
partner G:

    G_i = -(1/g^00) (g_ij / sqrt(-g) - i rho_3 g^0k eps_ikj) F_j,

inverted exactly at every point.  The map contains only rho_3, so the two
helicity blocks never mix, in contrast with material media.  Sign and index
conventions are anchored by the exact Minkowski reduction G = F.

Spinor form
-----------
One helicity vector F maps linearly onto a symmetric second-rank spinor,
(phi_00, phi_01, phi_11) = (-F_x + i F_y, F_z, F_x + i F_y).  Stacking the
four components (phi_00, phi_01, phi_10, phi_11) turns the free evolution
into a four-component Dirac-type equation i d(phi)/dt = alpha . (grad/i) phi
with (alpha . k)^2 = k^2, integrated here exactly per Fourier mode.  The
transversality condition div F = 0 is equivalent to the symmetry constraint
phi_01 = phi_10 being preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError, StabilityError
from .spectral import GridSpec, SixField, to_k, to_r

__all__ = [
    "MetricField", "minkowski_metric", "conformal_metric",
    "g_from_f", "f_from_g", "step_curved",
    "SymSpinor2", "spinor_from_rs", "rs_from_spinor",
    "four_spinor_from_rs", "rs_from_four_spinor", "dirac_form_step",
    "ALPHA_X", "ALPHA_Y", "ALPHA_Z",
]

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    _EPS3[_i, _j, _k] = 1.0
    _EPS3[_i, _k, _j] = -1.0


@dataclass
class MetricField:
    """Static metric samples g (4, 4[, nx, ny, nz]) with cached inverse."""

    spec: GridSpec
    g: np.ndarray

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        if self.g.shape == (4, 4):
            self.g = np.broadcast_to(self.g[:, :, None, None, None],
                                     (4, 4) + self.spec.n).copy()
        if self.g.shape != (4, 4) + self.spec.n:
            raise ShapeError("metric shape must be (4, 4) or (4, 4, nx, ny, nz)")
        gm = np.moveaxis(self.g.reshape(4, 4, -1), -1, 0)
        det = np.linalg.det(gm)
        if np.any(self.g[0, 0] <= 0.0):
            raise DomainError("metric must have g_00 > 0")
        if np.any(det >= 0.0):
            raise DomainError("metric determinant must be negative")
        inv = np.linalg.inv(gm)
        self.g_inv = np.moveaxis(inv, 0, -1).reshape((4, 4) + self.spec.n)
        self.det = det.reshape(self.spec.n)

    def light_speed_bound(self):
        """Largest local light speed, from the optical-medium equivalent."""
        eps_eq = np.sqrt(-self.det)[None, None] * (-self.g_inv[1:, 1:]) \
            / self.g[0, 0]
        em = np.moveaxis(eps_eq.reshape(3, 3, -1), -1, 0)
        eig = np.linalg.eigvalsh(0.5 * (em + np.swapaxes(em, 1, 2)))
        if np.any(eig <= 0.0):
            raise DomainError("metric's optical equivalent is not positive")
        return float(np.max(1.0 / eig.min(axis=1)))


def minkowski_metric(spec: GridSpec) -> MetricField:
    return MetricField(spec=spec, g=np.diag([1.0, -1.0, -1.0, -1.0]))


def conformal_metric(spec: GridSpec, refractive_index) -> MetricField:
    """Static metric diag(1, -n^2, -n^2, -n^2) with n = n(r) sampled."""
    n2 = np.asarray(refractive_index, dtype=float) ** 2
    if n2.shape != spec.n:
        n2 = np.full(spec.n, float(refractive_index) ** 2)
    g = np.zeros((4, 4) + spec.n)
    g[0, 0] = 1.0
    for i in range(1, 4):
        g[i, i] = -n2
    return MetricField(spec=spec, g=g)


def _constitutive_matrices(metric: MetricField):
    """Pointwise 3x3 blocks A0 (symmetric) and B (from g^{0k}) with
    G = -(1/g^00)(A0 - i rho_3 B) F per helicity block."""
    g = metric.g
    ginv = metric.g_inv
    sqrt_mg = np.sqrt(-metric.det)
    a0 = g[1:, 1:] / sqrt_mg[None, None]
    b = np.einsum("k...,ikj->ij...", ginv[0, 1:], _EPS3)
    g00_up = ginv[0, 0]
    if np.any(g00_up == 0.0):
        raise DomainError("metric has g^00 = 0 somewhere (degenerate)")
    return a0, b, g00_up


def g_from_f(field: SixField, metric: MetricField) -> SixField:
    """Constitutive partner G of the six-component field F."""
    if metric.spec.n != field.spec.n:
        raise ShapeError("metric and field grids differ")
    a0, b, g00 = _constitutive_matrices(metric)
    out = np.empty_like(field.data)
    for block, sign in ((0, +1.0), (1, -1.0)):
        mat = a0 - 1j * sign * b
        out[block] = -np.einsum("ij...,j...->i...", mat, field.data[block]) / g00
    return SixField(spec=field.spec, data=out)


def f_from_g(gfield: SixField, metric: MetricField) -> SixField:
    """Inverse constitutive map, by exact pointwise linear solve."""
    if metric.spec.n != gfield.spec.n:
        raise ShapeError("metric and field grids differ")
    a0, b, g00 = _constitutive_matrices(metric)
    out = np.empty_like(gfield.data)
    for block, sign in ((0, +1.0), (1, -1.0)):
        mat = -(a0 - 1j * sign * b) / g00[None, None]
        mm = np.moveaxis(mat.reshape(3, 3, -1), -1, 0)
        rhs = np.moveaxis(gfield.data[block].reshape(3, -1), -1, 0)[..., None]
        sol = np.linalg.solve(mm, rhs)[..., 0]
        out[block] = np.moveaxis(sol, 0, -1).reshape((3,) + gfield.spec.n)
    return SixField(spec=gfield.spec, data=out)


def _curl_blocks(spec: GridSpec, data):
    kvec = spec.k_grid_diff()
    out = np.empty_like(data)
    for block in range(2):
        bhat = to_k(spec, data[block])
        out[block] = to_r(spec, 1j * np.cross(kvec, bhat, axisa=0, axisb=0,
                                              axisc=0))
    return out


def curved_generator(field: SixField, metric: MetricField) -> SixField:
    """Apply the curved-space generator: H F = rho_3 curl G(F)."""
    gf = g_from_f(field, metric)
    curl = _curl_blocks(field.spec, gf.data)
    curl[1] *= -1.0
    return SixField(spec=field.spec, data=curl)


def step_curved(field: SixField, metric: MetricField, cfg, steps: int) -> SixField:
    """RK4 integration of i dF/dt = rho_3 curl G(F) in a static metric."""
    vmax = metric.light_speed_bound()
    limit = cfg.cfl_safety * min(field.spec.spacing) / vmax
    if cfg.dt > limit:
        raise StabilityError(
            f"dt = {cfg.dt:.3e} exceeds curved-space CFL bound {limit:.3e} "
            f"(max local speed {vmax:.3e})"
        )
    spec = field.spec
    data = field.data.copy()

    def rhs(arr):
        return -1j * curved_generator(SixField(spec=spec, data=arr), metric).data

    dt = cfg.dt
    for _ in range(steps):
        k1 = rhs(data)
        k2 = rhs(data + 0.5 * dt * k1)
        k3 = rhs(data + 0.5 * dt * k2)
        k4 = rhs(data + dt * k3)
        data = data + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return SixField(spec=spec, data=data)


@dataclass
class SymSpinor2:
    """Symmetric second-rank spinor; phi_10 = phi_01 by storage."""

    phi_00: np.ndarray
    phi_01: np.ndarray
    phi_11: np.ndarray


def spinor_from_rs(f) -> SymSpinor2:
    """Map one helicity vector onto the symmetric spinor components."""
    f = np.asarray(f)
    return SymSpinor2(phi_00=-f[0] + 1j * f[1], phi_01=f[2],
                      phi_11=f[0] + 1j * f[1])


def rs_from_spinor(phi: SymSpinor2):
    """Inverse of spinor_from_rs."""
    fx = 0.5 * (phi.phi_11 - phi.phi_00)
    fy = -0.5j * (phi.phi_11 + phi.phi_00)
    fz = np.asarray(phi.phi_01)
    return np.stack([np.asarray(fx), np.asarray(fy), fz])


ALPHA_X = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]],
                   dtype=complex)
ALPHA_Y = np.array([[0, 0, -1j, 0], [0, 0, 0, -1j], [1j, 0, 0, 0],
                    [0, 1j, 0, 0]], dtype=complex)
ALPHA_Z = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
_ALPHA = np.stack([ALPHA_X, ALPHA_Y, ALPHA_Z])


def four_spinor_from_rs(f):
    """Stack (phi_00, phi_01, phi_10, phi_11) of one helicity vector."""
    s = spinor_from_rs(f)
    return np.stack([s.phi_00, np.asarray(s.phi_01), np.asarray(s.phi_01),
                     s.phi_11])


def rs_from_four_spinor(phi):
    """Project a four-component spinor back to the helicity vector.

    The symmetric part of (phi_01, phi_10) is used; their difference is the
    transversality defect and is reported by the caller if needed.
    """
    phi = np.asarray(phi)
    sym = SymSpinor2(phi_00=phi[0], phi_01=0.5 * (phi[1] + phi[2]),
                     phi_11=phi[3])
    return rs_from_spinor(sym)


def dirac_form_step(spec: GridSpec, phi, t: float):
    """Exact spectral evolution of i d(phi)/dt = alpha . (grad/i) phi.

    Uses (alpha.k)^2 = |k|^2: exp(-i alpha.k t) = cos(|k|t) - i sin(|k|t)
    (alpha.k)/|k| per mode.  phi has shape (4, nx, ny, nz).
    """
    phi = np.ascontiguousarray(phi, dtype=complex)
    if phi.shape != (4,) + spec.n:
        raise ShapeError("spinor lattice shape does not match the grid")
    kvec = spec.k_grid()
    knorm = np.sqrt(np.sum(kvec**2, axis=0))
    phihat = to_k(spec, phi)
    akphi = np.einsum("aij,a...,j...->i...", _ALPHA, kvec, phihat)
    cos = np.cos(knorm * t)
    sinc = np.where(knorm > 0.0, np.sin(knorm * t) / np.where(knorm == 0, 1, knorm),
                    float(t))
    out_hat = cos * phihat - 1j * sinc * akphi
    return to_r(spec, out_hat)


def four_spinor_constraint_defect(phi) -> float:
    """Relative size of phi_01 - phi_10 (the transversality constraint)."""
    phi = np.asarray(phi)
    scale = np.max(np.abs(phi))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(phi[1] - phi[2])) / scale)
