"""Point-level algebra of complex electromagnetic field vectors.

Conventions
-----------
Natural units hbar = c = eps0 = mu0 = 1 throughout.  The basic object is the
complex Riemann-Silberstein combination of the real field pair (D, B),

    F_plus  = D / sqrt(2 eps) + i B / sqrt(2 mu),
    F_minus = conj(F_plus)               (for classical, real field data),

and the six-component stack calF = (F_plus, F_minus) on which the Pauli-type
block matrices rho_1, rho_2, rho_3 act.  Complex 3-vectors are ndarrays whose
*first* axis has length 3; six-component objects are ndarrays of shape
(2, 3, ...).  All functions broadcast over trailing (lattice) axes, so the
same code serves single points and whole grids.

The spin-1 matrices act on Cartesian components and satisfy the conversion
rule (a . s) b = i a x b for any 3-vectors a, b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistencyError

__all__ = [
    "SPIN_X", "SPIN_Y", "SPIN_Z", "SPIN",
    "RSPair", "SixVector", "FieldInvariants",
    "rho1", "rho2", "rho3", "spin_dot",
    "rs_from_fields", "fields_from_rs", "invariants", "duality_rotate",
    "conjugate", "lorentz_boost", "rotation_matrix", "rotate",
    "classical_energy", "classical_momentum", "classical_angular_momentum",
    "classical_moment_of_energy",
]

# Spin-1 matrices in the Cartesian representation; (s_i)_{jk} = -i eps_{ijk}.
SPIN_X = np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]], dtype=complex)
SPIN_Y = np.array([[0, 0, 1j], [0, 0, 0], [-1j, 0, 0]], dtype=complex)
SPIN_Z = np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]], dtype=complex)
SPIN = np.stack([SPIN_X, SPIN_Y, SPIN_Z])


@dataclass
class RSPair:
    """The pair (F_plus, F_minus) of complex 3-vectors at one point or grid."""

    f_plus: np.ndarray
    f_minus: np.ndarray

    def stack(self):
        """Return the six-component array of shape (2, 3, ...)."""
        return np.stack([np.asarray(self.f_plus), np.asarray(self.f_minus)])


@dataclass
class SixVector:
    """Six-component value (upper, lower); each a complex 3-vector array."""

    upper: np.ndarray
    lower: np.ndarray

    def stack(self):
        return np.stack([np.asarray(self.upper), np.asarray(self.lower)])


@dataclass
class FieldInvariants:
    """Scalar and pseudoscalar invariants with F.F = s_scalar + i p_pseudo."""

    s_scalar: float
    p_pseudo: float


def rho1(calf):
    """Swap upper and lower blocks of a (2, 3, ...) array."""
    return calf[::-1].copy()


def rho2(calf):
    """Apply rho_2: (F_plus, F_minus) -> (-i F_minus, +i F_plus)."""
    return np.stack([-1j * calf[1], 1j * calf[0]])


def rho3(calf):
    """Apply rho_3: (F_plus, F_minus) -> (F_plus, -F_minus)."""
    return np.stack([calf[0], -calf[1]])


def spin_dot(a, field):
    """Apply (a . s) to a 3-vector field; equals i a x field.

    ``a`` may be a constant 3-vector or a field of them; broadcasting follows
    numpy.cross over the trailing axes (component axis first).
    """
    a = np.asarray(a)
    return 1j * np.cross(a, field, axisa=0, axisb=0, axisc=0)


def _vec_norm(v):
    return np.sqrt(np.sum(np.abs(np.asarray(v)) ** 2))


def rs_from_fields(d, b, eps=1.0, mu=1.0):
    """Build the Riemann-Silberstein pair from real fields (D, B).

    Parameters
    ----------
    d, b : real arrays of shape (3, ...)
        Electric displacement and magnetic induction samples.
    eps, mu : positive scalars (or positive arrays broadcastable to d, b)
        Medium parameters used in the normalization.

    Returns
    -------
    RSPair with f_plus = d/sqrt(2 eps) + i b/sqrt(2 mu) and
    f_minus = conj(f_plus).
    """
    eps = np.asarray(eps, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if np.any(eps <= 0.0) or np.any(mu <= 0.0):
        raise DomainError("eps and mu must be strictly positive")
    f_plus = np.asarray(d) / np.sqrt(2.0 * eps) + 1j * np.asarray(b) / np.sqrt(2.0 * mu)
    return RSPair(f_plus=f_plus, f_minus=np.conj(f_plus))


def fields_from_rs(pair, eps=1.0, mu=1.0, rtol=1e-12):
    """Recover (D, B) from a conjugate-symmetric RSPair.

    Raises InconsistencyError if ||f_minus - conj(f_plus)|| exceeds
    rtol * ||pair||.
    """
    f_plus = np.asarray(pair.f_plus)
    f_minus = np.asarray(pair.f_minus)
    scale = _vec_norm(f_plus) + _vec_norm(f_minus)
    defect = _vec_norm(f_minus - np.conj(f_plus))
    if defect > rtol * max(scale, 1e-300):
        raise InconsistencyError(
            f"RSPair is not conjugate symmetric: defect {defect:.3e} "
            f"exceeds {rtol:.1e} * norm {scale:.3e}"
        )
    d = np.sqrt(2.0 * np.asarray(eps, dtype=float)) * f_plus.real
    b = np.sqrt(2.0 * np.asarray(mu, dtype=float)) * f_plus.imag
    return d, b


def invariants(f):
    """Scalar/pseudoscalar invariants of one complex field vector.

    Returns FieldInvariants with F.F = s_scalar + i p_pseudo, where the dot
    product is unconjugated.  Point inputs give float fields; grid inputs
    give pointwise invariant lattices (no sum is taken).
    """
    f = np.asarray(f)
    sq = np.sum(f * f, axis=0)
    if sq.ndim == 0:
        return FieldInvariants(s_scalar=float(sq.real), p_pseudo=float(sq.imag))
    return FieldInvariants(s_scalar=sq.real, p_pseudo=sq.imag)


def duality_rotate(f, alpha):
    """Multiply the field vector by exp(i alpha) (duality rotation)."""
    return np.exp(1j * float(alpha)) * np.asarray(f)


def conjugate(psi: SixVector) -> SixVector:
    """Particle-antiparticle conjugation rho_1 psi*; an involution."""
    return SixVector(upper=np.conj(psi.lower), lower=np.conj(psi.upper))


def lorentz_boost(f, v, sign=+1):
    """Boost one helicity component by velocity v (|v| < 1).

    F' = gamma (F -/+ i v x F) - gamma^2/(gamma+1) v (v . F), where the upper
    sign (sign=+1) applies to F_plus and the lower to F_minus.  Preserves the
    unconjugated square F.F.
    """
    v = np.asarray(v, dtype=float)
    v2 = float(np.dot(v, v))
    if v2 >= 1.0:
        raise DomainError(f"|v| = {np.sqrt(v2):.6f} must be < 1")
    if sign not in (+1, -1):
        raise DomainError("sign must be +1 or -1")
    gamma = 1.0 / np.sqrt(1.0 - v2)
    f = np.asarray(f)
    vxf = np.cross(v, f, axisb=0, axisc=0)
    vdotf = np.tensordot(v, f, axes=(0, 0))
    out = gamma * (f - sign * 1j * vxf)
    out -= (gamma**2 / (gamma + 1.0)) * v.reshape((3,) + (1,) * vdotf.ndim) * vdotf
    return out


def rotation_matrix(axis_angle):
    """Rodrigues rotation matrix for the axis-angle vector."""
    w = np.asarray(axis_angle, dtype=float)
    theta = float(np.linalg.norm(w))
    if theta == 0.0:
        return np.eye(3)
    n = w / theta
    k = np.array([
        [0.0, -n[2], n[1]],
        [n[2], 0.0, -n[0]],
        [-n[1], n[0], 0.0],
    ])
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def rotate(psi: SixVector, axis_angle) -> SixVector:
    """Rotate field values of both blocks by the same real orthogonal matrix.

    This is the value-space action diag(C, C*) with C real orthogonal, so
    both blocks transform identically.
    """
    r = rotation_matrix(axis_angle)
    up = np.tensordot(r, np.asarray(psi.upper), axes=(1, 0))
    lo = np.tensordot(r, np.asarray(psi.lower), axes=(1, 0))
    return SixVector(upper=up, lower=lo)


# Classical bilinears of a single helicity component F (densities summed with
# an explicit cell volume by the caller, or passed pre-weighted samples).
# The momentum-type bilinears use the antisymmetrized product
# (F* x F - F x F*)/2i = Im(F* x F), which reproduces D x B exactly.

def classical_energy(f, cell_volume=1.0):
    """Total field energy  integral F*.F  on the sample set."""
    f = np.asarray(f)
    return float(np.sum(np.abs(f) ** 2) * cell_volume)


def classical_momentum(f, cell_volume=1.0):
    """Total field momentum  integral Im(F* x F)  (equals integral D x B)."""
    f = np.asarray(f)
    cross = np.cross(np.conj(f), f, axisa=0, axisb=0, axisc=0)
    return np.sum(cross.imag.reshape(3, -1), axis=1) * cell_volume


def classical_angular_momentum(f, coords, cell_volume=1.0):
    """Total angular momentum  integral r x Im(F* x F).

    ``coords`` is an array of shape (3, ...) of position samples matching f.
    """
    f = np.asarray(f)
    g = np.cross(np.conj(f), f, axisa=0, axisb=0, axisc=0).imag
    m = np.cross(coords, g, axisa=0, axisb=0, axisc=0)
    return np.sum(m.reshape(3, -1), axis=1) * cell_volume


def classical_moment_of_energy(f, coords, cell_volume=1.0):
    """Energy-weighted position  integral r (F*.F)."""
    f = np.asarray(f)
    rho = np.sum(np.abs(f) ** 2, axis=0)
    return np.sum((coords * rho).reshape(3, -1), axis=1) * cell_volume
