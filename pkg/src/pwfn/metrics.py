"""Scalar products, norms and Poincare-generator observables.

The physical norm of a photon wave function divides each Fourier mode by its
frequency,

    <psi1|psi2> = sum_lambda sum_k (1/(V |k|)) conj(phi1) phi2,

which equals the coordinate-space double integral with the |r - r'|^(-2)
kernel.  Expectation values of the ten Poincare generators are available in
both representations: momentum representation uses the diagonal multipliers
omega and k plus the covariant derivative D_k = d/dk + i lambda alpha(k)
(centered differences in the fixed spherical gauge, analytic connection),
coordinate representation applies 1/H spectrally followed by the local
operators H = rho_3 (s . grad/i), P = grad/i, J = r x grad/i + s, K = H r.

Position multiplication uses box-centered coordinates in [-L/2, L/2); fields
should be localized away from the box seam for position-dependent
observables to be meaningful.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.special import gamma as gamma_fn, kv

from .errors import (DomainError, GaugeSingularityError, NormalizationError,
                     ResourceError, ShapeError)
from .evolve import free_generator
from .fieldcore import SPIN
from .spectral import (GridSpec, HelicitySpectrum, SixField,
                       berry_connection_grid, decompose, synthesize, to_k,
                       to_r)

__all__ = [
    "Observables", "GeneratorTag",
    "scalar_product_momentum", "photon_number", "norm_h",
    "scalar_product_coordinate",
    "observables_momentum", "observables_coordinate",
    "energy_density", "energy_probability",
    "landau_peierls", "kernel_identity_check", "newton_wigner_kernel",
    "generator_apply", "commutator_residual", "expected_commutator",
    "inverse_hamiltonian_apply",
]

# Brute-force double sums over point pairs are capped at this lattice size.
DIRECT_SUM_MAX_POINTS = 4096


@dataclass
class Observables:
    """Expectation values of the energy and the three vector generators."""

    energy: float
    momentum: np.ndarray
    angular_momentum: np.ndarray
    moment_of_energy: np.ndarray


class GeneratorTag(enum.Enum):
    H = "H"
    P_X = "P_x"
    P_Y = "P_y"
    P_Z = "P_z"
    J_X = "J_x"
    J_Y = "J_y"
    J_Z = "J_z"
    K_X = "K_x"
    K_Y = "K_y"
    K_Z = "K_z"

    @property
    def axis(self):
        name = self.value
        return {"x": 0, "y": 1, "z": 2}.get(name[-1])

    @property
    def family(self):
        return self.value[0]


def _check_specs(a, b):
    if a.spec.n != b.spec.n or a.spec.length != b.spec.length:
        raise ShapeError("grid mismatch between operands")


def scalar_product_momentum(a: HelicitySpectrum, b: HelicitySpectrum) -> complex:
    """Physical scalar product sum_lambda,k conj(a) b / (V |k|)."""
    _check_specs(a, b)
    knorm = a.spec.k_norm()
    weight = np.zeros_like(knorm)
    nz = knorm > 0
    weight[nz] = 1.0 / (a.spec.volume * knorm[nz])
    return complex(np.sum(weight * np.conj(a.amp) * b.amp))


def photon_number(spectrum: HelicitySpectrum) -> float:
    """Total photon number carried by the amplitudes (the squared norm)."""
    return scalar_product_momentum(spectrum, spectrum).real


def norm_h(psi: SixField) -> float:
    """Squared physical norm of a positive-frequency field."""
    return photon_number(decompose(psi))


def _min_image_sq_distances(spec: GridSpec):
    """Squared minimum-image distances d(r) on the lattice of differences."""
    out = np.zeros(spec.n)
    for ax, (m, L) in enumerate(zip(spec.n, spec.length)):
        d = (L / m) * np.arange(m)
        d = np.minimum(d, L - d)
        shape = [1, 1, 1]
        shape[ax] = m
        out = out + (d**2).reshape(shape)
    return out


def _cell_kernel_integral(spacing):
    """integral over one grid cell of 1/|u|^2 d^3u.

    Written as the solid-angle integral of the center-to-boundary distance
    R(omega): int_cell |u|^-2 = int dOmega R(omega); evaluated with a product
    Gauss rule.  Used to give the singular self-cell of the direct
    double-sum kernel its exact average weight.
    """
    hx, hy, hz = (s / 2.0 for s in spacing)
    nc, nph = 80, 160
    ct, wt = np.polynomial.legendre.leggauss(nc)
    ph = (np.arange(nph) + 0.5) * (2.0 * np.pi / nph)
    wp = 2.0 * np.pi / nph
    st = np.sqrt(1.0 - ct**2)
    ox = st[:, None] * np.cos(ph)[None, :]
    oy = st[:, None] * np.sin(ph)[None, :]
    oz = ct[:, None] * np.ones_like(ph)[None, :]
    with np.errstate(divide="ignore"):
        r = np.minimum(np.minimum(hx / np.abs(ox), hy / np.abs(oy)),
                       hz / np.abs(oz))
    return float(np.sum(r * wt[:, None] * wp))


def scalar_product_coordinate(a: SixField, b: SixField, method="spectral") -> complex:
    """Coordinate-representation scalar product of positive-frequency fields.

    method="spectral" evaluates the mode sum (identical to
    scalar_product_momentum of the decompositions).  method="direct"
    performs the lattice double sum with the 1/(2 pi^2 |r - r'|^2) kernel
    (minimum image, analytically weighted self-cell) as an independent
    cross-check; it is capped at DIRECT_SUM_MAX_POINTS lattice points.
    """
    _check_specs(a, b)
    if method == "spectral":
        return scalar_product_momentum(decompose(a), decompose(b))
    if method != "direct":
        raise DomainError(f"unknown method {method!r}")
    spec = a.spec
    if spec.npoints > DIRECT_SUM_MAX_POINTS:
        raise ResourceError(
            f"direct double sum needs {spec.npoints} points > cap "
            f"{DIRECT_SUM_MAX_POINTS}"
        )
    d2 = _min_image_sq_distances(spec)
    kernel = np.zeros(spec.n)
    nz = d2 > 0
    kernel[nz] = 1.0 / d2[nz]
    kernel[0, 0, 0] = _cell_kernel_integral(spec.spacing) / spec.cell_volume
    av = a.data.reshape(6, -1)
    bv = b.data.reshape(6, -1)
    n = spec.n
    idx = np.indices(n).reshape(3, -1)
    total = 0.0 + 0.0j
    kflat = kernel
    for p in range(idx.shape[1]):
        di = tuple((idx[ax] - idx[ax, p]) % n[ax] for ax in range(3))
        krow = kflat[di]
        total += np.sum(np.conj(av[:, p])[:, None] * bv * krow[None, :])
    total *= spec.cell_volume**2 / (2.0 * np.pi**2)
    return complex(total)


def inverse_hamiltonian_apply(psi: SixField, projection_rtol=1e-8) -> SixField:
    """Apply 1/H spectrally (division by omega per mode).

    Defined on positive-frequency fields only; raises DomainError when the
    input carries non-positive-frequency content above projection_rtol.
    """
    proj = synthesize(decompose(psi), t=0.0)
    defect = np.sqrt(np.sum(np.abs(proj.data - psi.data) ** 2))
    scale = np.sqrt(np.sum(np.abs(psi.data) ** 2))
    if scale > 0 and defect > projection_rtol * scale:
        raise DomainError(
            f"1/H needs a positive-frequency field; projection defect "
            f"{defect / scale:.3e}"
        )
    spec = psi.spec
    knorm = spec.k_norm()
    inv = np.zeros_like(knorm)
    nz = knorm > 0
    inv[nz] = 1.0 / knorm[nz]
    out = np.empty_like(psi.data)
    for block in range(2):
        out[block] = to_r(spec, inv * to_k(spec, psi.data[block]))
    return SixField(spec=spec, data=out)


def _gradient_k(spec: GridSpec, amp):
    """Centered differences of a dual-lattice function along the k axes."""
    shifted = sfft.fftshift(amp)
    out = np.empty((3,) + amp.shape, dtype=complex)
    for ax, (m, L) in enumerate(zip(spec.n, spec.length)):
        dk = 2.0 * np.pi / L
        der = (np.roll(shifted, -1, axis=ax) - np.roll(shifted, 1, axis=ax)) / (2 * dk)
        out[ax] = sfft.ifftshift(der)
    return out


def _support_mask(amp, rel=1e-12):
    power = np.abs(amp) ** 2
    peak = power.max()
    if peak == 0.0:
        return np.zeros(amp.shape, dtype=bool)
    return power > rel * peak


def observables_momentum(spectrum: HelicitySpectrum, pole_cone=1e-6) -> Observables:
    """Expectation values evaluated on helicity amplitudes.

    Energy and momentum are diagonal mode sums.  Angular momentum and moment
    of energy use the gauge-covariant derivative with centered differences
    plus the analytic connection of the spherical gauge; the helicity term
    lambda k/|k| is added to the angular momentum.  Amplitudes are expected
    band limited with support away from the k-box edge.  Support inside the
    pole cone (excluding exact axis points, where the frame is constant by
    convention) raises GaugeSingularityError.
    """
    spec = spectrum.spec
    kvec = spec.k_grid()
    knorm = spec.k_norm()
    nz = knorm > 0
    weight = np.zeros_like(knorm)
    weight[nz] = 1.0 / (spec.volume * knorm[nz])
    nhat = np.zeros_like(kvec)
    nhat[:, nz] = kvec[:, nz] / knorm[nz]

    sth = np.hypot(nhat[0], nhat[1])
    in_cone = (sth > 0.0) & (sth < pole_cone) & nz
    for lam_index in range(2):
        if np.any(_support_mask(spectrum.amp[lam_index]) & in_cone):
            raise GaugeSingularityError(
                "spectrum has support inside the gauge pole cone"
            )

    alpha = np.nan_to_num(berry_connection_grid(spec, pole_cone))
    energy = 0.0
    momentum = np.zeros(3)
    ang = np.zeros(3)
    moe = np.zeros(3)
    for lam_index, lam in enumerate(HelicitySpectrum.LAMBDAS):
        phi = spectrum.amp[lam_index]
        p2 = np.abs(phi) ** 2
        energy += float(np.sum(p2[nz] / spec.volume))
        momentum = momentum + np.array(
            [float(np.sum(weight * kvec[i] * p2)) for i in range(3)]
        )
        # (1/i) D phi = (1/i) d phi + lambda alpha phi
        dphi = _gradient_k(spec, phi)
        covd = -1j * dphi + lam * alpha * phi
        kxd = np.cross(kvec, covd, axisa=0, axisb=0, axisc=0)
        ang = ang + np.array([
            float(np.sum(weight * np.real(np.conj(phi) * kxd[i]))) for i in range(3)
        ])
        ang = ang + lam * np.array([float(np.sum(weight * nhat[i] * p2))
                                    for i in range(3)])
        # i omega D = i omega d/dk - lambda omega alpha
        moe = moe + np.array([
            float(np.sum(weight * knorm
                         * (np.real(1j * np.conj(phi) * dphi[i])
                            - lam * alpha[i] * p2)))
            for i in range(3)
        ])
    return Observables(energy=energy, momentum=momentum,
                       angular_momentum=ang, moment_of_energy=moe)


def observables_coordinate(psi: SixField, normalized_rtol=1e-8) -> Observables:
    """Expectation values via 1/H followed by the local generators.

    Requires a positive-frequency field normalized to unit photon number;
    raises NormalizationError (with the measured norm attached) otherwise.
    """
    n2 = norm_h(psi)
    if abs(n2 - 1.0) > normalized_rtol:
        raise NormalizationError(
            f"field is not normalized: <psi|psi> = {n2:.12e}", measured_norm=n2
        )
    spec = psi.spec
    dv = spec.cell_volume
    invh = inverse_hamiltonian_apply(psi)
    energy = float(np.sum(np.abs(psi.data) ** 2)) * dv
    momentum = np.empty(3)
    ang = np.empty(3)
    for i in range(3):
        tag_p = (GeneratorTag.P_X, GeneratorTag.P_Y, GeneratorTag.P_Z)[i]
        tag_j = (GeneratorTag.J_X, GeneratorTag.J_Y, GeneratorTag.J_Z)[i]
        pp = generator_apply(tag_p, psi)
        jj = generator_apply(tag_j, psi)
        momentum[i] = float(np.sum(np.real(np.conj(invh.data) * pp.data))) * dv
        ang[i] = float(np.sum(np.real(np.conj(invh.data) * jj.data))) * dv
    # <K> reduces exactly to the energy-weighted position integral.
    coords = spec.coords()
    dens = np.sum(np.abs(psi.data) ** 2, axis=(0, 1))
    moe = np.array([float(np.sum(coords[i] * dens)) * dv for i in range(3)])
    return Observables(energy=energy, momentum=momentum,
                       angular_momentum=ang, moment_of_energy=moe)


def energy_density(psi: SixField):
    """Normalized energy density and flux, (rho_E, j_E) with integral rho_E = 1."""
    spec = psi.spec
    e_total = float(np.sum(np.abs(psi.data) ** 2)) * spec.cell_volume
    if e_total <= 0.0:
        raise DomainError("energy density undefined for a zero field")
    rho = np.sum(np.abs(psi.data) ** 2, axis=(0, 1)) / e_total
    cross_up = np.cross(np.conj(psi.upper), psi.upper, axisa=0, axisb=0, axisc=0).imag
    cross_lo = np.cross(np.conj(psi.lower), psi.lower, axisa=0, axisb=0, axisc=0).imag
    j = (cross_up - cross_lo) / e_total
    return rho, j


def energy_probability(psi: SixField, region) -> float:
    """Fraction of the energy inside an axis-aligned coordinate box.

    region = ((xmin, xmax), (ymin, ymax), (zmin, zmax)) in box-centered
    coordinates; an empty region returns 0 with a warning.
    """
    rho, _ = energy_density(psi)
    coords = psi.spec.coords()
    mask = np.ones(psi.spec.n, dtype=bool)
    for ax in range(3):
        lo, hi = region[ax]
        mask &= (coords[ax] >= lo) & (coords[ax] < hi)
    if not np.any(mask):
        warnings.warn("energy_probability: region contains no lattice points")
        return 0.0
    return float(np.sum(rho[mask]) * psi.spec.cell_volume)


def landau_peierls(psi: SixField, dc_rtol=1e-12) -> SixField:
    """Nonlocal (-Laplacian)^(-1/4) transform: divide modes by sqrt |k|.

    The transformed field has a plain L2 norm equal to the physical norm of
    the input.  Raises DomainError if the field carries k = 0 energy above
    dc_rtol of the total.
    """
    spec = psi.spec
    knorm = spec.k_norm()
    mult = np.zeros_like(knorm)
    nz = knorm > 0
    mult[nz] = knorm[nz] ** (-0.5)
    out = np.empty_like(psi.data)
    dc = 0.0
    total = 0.0
    for block in range(2):
        bhat = to_k(spec, psi.data[block])
        dc += float(np.sum(np.abs(bhat[:, 0, 0, 0]) ** 2))
        total += float(np.sum(np.abs(bhat) ** 2))
        out[block] = to_r(spec, mult * bhat)
    if total > 0.0 and dc > dc_rtol * total:
        raise DomainError(
            f"field carries k = 0 energy fraction {dc / total:.3e}; the "
            "nonlocal transform is undefined on the DC mode"
        )
    return SixField(spec=spec, data=out)


@dataclass
class KernelQuadrature:
    """Resolution knobs for kernel_identity_check."""

    n_radial: int = 160
    n_angular: int = 160
    r_max_factor: float = 40.0


def kernel_identity_check(r1, r2, quadrature: KernelQuadrature | None = None):
    """Evaluate both sides of the |r|^(-5/2) convolution identity.

    lhs = (1/16 pi) integral d^3r |r - r1|^(-5/2) |r - r2|^(-5/2), computed
    by splitting space at the perpendicular bisector plane, integrating each
    half in focus-centered spherical coordinates with an r = s^2 substitution
    that removes the singularity, and adding the analytic large-radius tail.
    rhs = |r1 - r2|^(-2).  Returns (lhs, rhs).
    """
    if quadrature is None:
        quadrature = KernelQuadrature()
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    d = float(np.linalg.norm(r2 - r1))
    if d == 0.0:
        raise DomainError("kernel identity undefined for coincident points")
    rhs = 1.0 / d**2
    rmax = quadrature.r_max_factor * d
    # Gauss nodes: radial s in (0, sqrt(Rlim)], angular u = cos(gamma).
    su, wu = np.polynomial.legendre.leggauss(quadrature.n_angular)
    ss, ws = np.polynomial.legendre.leggauss(quadrature.n_radial)
    total = 0.0
    for u, wgt_u in zip(su, wu):
        # gamma measured from the axis pointing at the other focus.
        rlim = min(rmax, 0.5 * d / u) if u > 0 else rmax
        smax = np.sqrt(rlim)
        s = 0.5 * smax * (ss + 1.0)
        wr = 0.5 * smax * ws
        r = s**2
        other = np.sqrt(r**2 + d**2 - 2.0 * r * d * u)
        integrand = r ** (-2.5) * other ** (-2.5)
        # dV = 2 pi r^2 dr du ; dr = 2 s ds
        total += wgt_u * np.sum(wr * integrand * r**2 * 2.0 * s)
    total *= 2.0 * np.pi
    lhs = 2.0 * total / (16.0 * np.pi)  # both half-spaces by symmetry
    lhs += 1.0 / (8.0 * rmax**2)  # analytic |r| > rmax tail of r^-5
    return lhs, rhs


# Normalization of the massive smoothing kernel: fixed by the massless limit
# pi/(2 pi r)^(5/2), i.e. the kernel of (-Laplacian)^(-1/4).
_NW_PREFACTOR = 2.0 / ((4.0 * np.pi) ** 1.5 * gamma_fn(0.25))


def newton_wigner_kernel(r, m):
    """Radial profile K(r) of the massive position-smoothing kernel.

    K(r) = C (2m/r)^(5/4) K_{5/4}(m r) with C chosen so that K(r) tends to
    pi/(2 pi r)^(5/2) as m -> 0 (the massless nonlocal kernel).  Monotone
    decreasing in r, decaying as exp(-m r) for large m r.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0) or m <= 0.0:
        raise DomainError("newton_wigner_kernel needs r > 0 and m > 0")
    out = _NW_PREFACTOR * (2.0 * m / r) ** 1.25 * kv(1.25, m * r)
    if out.ndim == 0:
        return float(out)
    return out


def _spectral_gradient_field(psi: SixField):
    """(1/i) grad psi for all six components; returns (3, 2, 3, nx, ny, nz)."""
    spec = psi.spec
    kvec = spec.k_grid_diff()
    out = np.empty((3, 2, 3) + spec.n, dtype=complex)
    for block in range(2):
        for comp in range(3):
            chat = to_k(spec, psi.data[block, comp])
            for ax in range(3):
                out[ax, block, comp] = to_r(spec, kvec[ax] * chat)
    return out


def generator_apply(tag: GeneratorTag, psi: SixField) -> SixField:
    """Apply one of the ten Poincare generators in coordinate representation."""
    spec = psi.spec
    if tag is GeneratorTag.H:
        return free_generator(psi)
    ax = tag.axis
    if tag.family == "P":
        kvec = spec.k_grid_diff()
        out = np.empty_like(psi.data)
        for block in range(2):
            for comp in range(3):
                out[block, comp] = to_r(spec, kvec[ax] * to_k(spec, psi.data[block, comp]))
        return SixField(spec=spec, data=out)
    if tag.family == "K":
        coords = spec.coords()
        scaled = SixField(spec=spec, data=psi.data * coords[ax])
        return free_generator(scaled)
    if tag.family == "J":
        coords = spec.coords()
        grad = _spectral_gradient_field(psi)
        i, j = [(1, 2), (2, 0), (0, 1)][ax]
        orbital = coords[i] * grad[j] - coords[j] * grad[i]
        spin = np.einsum("jk,bk...->bj...", SPIN[ax], psi.data)
        return SixField(spec=spec, data=orbital + spin)
    raise DomainError(f"unknown generator {tag!r}")


def expected_commutator(tag_a: GeneratorTag, tag_b: GeneratorTag,
                        psi: SixField) -> SixField:
    """The field ([A, B]) psi predicted by the Poincare algebra."""
    eps = {(0, 1): (2, 1.0), (1, 2): (0, 1.0), (2, 0): (1, 1.0),
           (1, 0): (2, -1.0), (2, 1): (0, -1.0), (0, 2): (1, -1.0)}

    def vec_tags(family):
        return {"P": (GeneratorTag.P_X, GeneratorTag.P_Y, GeneratorTag.P_Z),
                "J": (GeneratorTag.J_X, GeneratorTag.J_Y, GeneratorTag.J_Z),
                "K": (GeneratorTag.K_X, GeneratorTag.K_Y, GeneratorTag.K_Z)}[family]

    fa, fb = tag_a.family, tag_b.family
    zero = SixField.zeros(psi.spec)

    def scaled(tag, factor):
        out = generator_apply(tag, psi)
        out.data *= factor
        return out

    # [J_i, X_j] = i eps_ijk X_k for X in {P, J, K}
    if fa == "J" and fb in ("P", "J", "K"):
        key = (tag_a.axis, tag_b.axis)
        if key not in eps:
            return zero
        k, sign = eps[key]
        return scaled(vec_tags(fb)[k], 1j * sign)
    if fb == "J" and fa in ("P", "K"):
        out = expected_commutator(tag_b, tag_a, psi)
        out.data *= -1.0
        return out
    # [K_i, P_j] = i delta_ij H
    if fa == "K" and fb == "P":
        return scaled(GeneratorTag.H, 1j) if tag_a.axis == tag_b.axis else zero
    if fa == "P" and fb == "K":
        out = expected_commutator(tag_b, tag_a, psi)
        out.data *= -1.0
        return out
    # [K_i, H] = i P_i
    if fa == "K" and fb == "H":
        return scaled(vec_tags("P")[tag_a.axis], 1j)
    if fa == "H" and fb == "K":
        return scaled(vec_tags("P")[tag_b.axis], -1j)
    # [K_i, K_j] = -i eps_ijk J_k
    if fa == "K" and fb == "K":
        key = (tag_a.axis, tag_b.axis)
        if key not in eps:
            return zero
        k, sign = eps[key]
        return scaled(vec_tags("J")[k], -1j * sign)
    # remaining pairs commute
    return zero


def commutator_residual(tag_a: GeneratorTag, tag_b: GeneratorTag,
                        psi: SixField) -> float:
    """|| ([A,B] - expected) psi || / || psi || on a band-limited field."""
    ab = generator_apply(tag_a, generator_apply(tag_b, psi))
    ba = generator_apply(tag_b, generator_apply(tag_a, psi))
    expected = expected_commutator(tag_a, tag_b, psi)
    resid = ab.data - ba.data - expected.data
    denom = psi.norm()
    if denom == 0.0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(resid) ** 2) * psi.spec.cell_volume) / denom)
