"""Eigenmode solvers: boost eigenfunctions and guided fiber modes.

Boost eigenfunctions
--------------------
The z-component of the boost generator, -i rho_3 (s . grad) z, has continuum
spectrum; its eigenfunctions at transverse wave vector (kx, ky) have
psi_z(z) = K_{i kappa}(k_perp z) on z > 0, the Macdonald function of
imaginary index, here evaluated by the cosine-cosh quadrature

    K_{i kappa}(x) = integral_0^inf exp(-x cosh t) cos(kappa t) dt.

The remaining components follow from psi_z and its derivative; residuals of
the defining first-order system are the correctness certificate.

Fiber modes
-----------
An infinite cylinder of radius ``a`` with permittivity eps_in inside and
eps_out outside (mu = 1 everywhere) guides single-helicity modes
psi = exp(i k_z z) exp(i M phi) f(rho).  The axial profile solves a Bessel
equation with k_perp^2 = eps omega^2 - k_z^2: oscillatory J_M inside, decaying
K_M outside whenever omega lies in the bound window
(k_z/sqrt(eps_in), k_z/sqrt(eps_out)).  Matching at rho = a imposes two real
conditions on the single interior/exterior amplitude ratio: continuity of
the axial component in its local field normalization (f_z / sqrt(eps), the
E_z-type condition) and continuity of the tangential azimuthal component
f_phi (the H_z-type condition carried by the transverse quadrature).  The
2x2 determinant of this system, cleared of its k_perp^(-2) pole factors, is a
real analytic function of omega whose sign changes mark the discrete guided
modes.  How this two-condition spectrum relates to the classical
four-condition hybrid-mode dispersion is deliberately left open; a classical
cross-scan is available for comparison (classical_dispersion).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import jv, jvp, kv, kvp

from .errors import DomainError, TruncationError, WindowError
from .spectral import GridSpec, SixField

__all__ = [
    "macdonald_imag", "macdonald_imag_moment",
    "BoostEigenfunction", "boost_eigenfunction",
    "FiberSpec", "FiberMode", "bound_window",
    "fiber_matching_determinant", "fiber_modes", "fiber_mode_field",
    "fiber_mode_divergence_residual", "classical_dispersion",
]


def macdonald_imag_moment(kappa, x, moment=0, rtol=1e-12):
    """integral_0^inf exp(-x cosh t) cosh(t)^moment cos(kappa t) dt.

    moment = 0 gives K_{i kappa}(x); moments 1, 2 give derivatives of the
    integrand used for d/dx terms.  Truncated where x cosh T < exp(-37)
    leaves no contribution; adaptive quadrature to relative accuracy rtol.
    """
    x = float(x)
    kappa = float(kappa)
    if x <= 0.0:
        raise DomainError("macdonald quadrature needs x > 0")
    tmax = np.arccosh(max(45.0 / x, 2.0))

    def integrand(t):
        return np.exp(-x * np.cosh(t)) * np.cosh(t) ** moment * np.cos(kappa * t)

    # The integrand oscillates on scale 1/kappa; cap subinterval size there.
    # Oscillatory cancellation bounds the reachable absolute accuracy by the
    # integrand scale, so give quad a matching absolute floor.
    limit = int(max(60, 12 * abs(kappa) * tmax + 60))
    epsabs = 1e-15 * np.exp(-x) * max(1.0, 45.0 / x) ** moment
    val, _ = integrate.quad(integrand, 0.0, tmax, epsabs=epsabs, epsrel=rtol,
                            limit=limit)
    return val


def macdonald_imag(kappa, x, rtol=1e-12):
    """Macdonald function of imaginary index, K_{i kappa}(x), for x > 0.

    Even in kappa by construction.  Relative accuracy about 1e-10 for
    x >= 0.01.
    """
    return macdonald_imag_moment(kappa, x, moment=0, rtol=rtol)


@dataclass
class BoostEigenfunction:
    """Eigenfunction data of the z-boost generator on z > 0.

    The full field is exp(i(kx x + ky y)) (psi_x, psi_y, psi_z)(z) in the
    upper helicity block; psi_z(z) = K_{i kappa}(k_perp z).  z < 0 is covered
    by z -> -z with kappa -> -kappa.  The normalization is fixed by psi_z
    itself (continuum spectrum; delta-normalizable only).
    """

    kappa: float
    kx: float
    ky: float
    k_perp: float = field(init=False)

    def __post_init__(self):
        self.k_perp = float(np.hypot(self.kx, self.ky))
        if self.k_perp == 0.0:
            raise DomainError("boost eigenfunction needs k_perp > 0")

    def psi_z(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(z <= 0.0):
            raise DomainError("profiles are defined on z > 0")
        return np.array([macdonald_imag(self.kappa, self.k_perp * zz) for zz in z])

    def _dpsi_z(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return np.array([
            -self.k_perp * macdonald_imag_moment(self.kappa, self.k_perp * zz, 1)
            for zz in z
        ])

    def _d2psi_z(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return np.array([
            self.k_perp**2 * macdonald_imag_moment(self.kappa, self.k_perp * zz, 2)
            for zz in z
        ])

    # Transverse components solving the first-order system; the kappa term
    # carries the 1/z, the derivative term does not:
    #   psi_x = (i/k_perp^2) (ky kappa psi_z / z + kx psi_z'),
    #   psi_y = (i/k_perp^2) (-kx kappa psi_z / z + ky psi_z').

    def psi_x(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return (1j / self.k_perp**2) * (self.ky * self.kappa * self.psi_z(z) / z
                                        + self.kx * self._dpsi_z(z))

    def psi_y(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return (1j / self.k_perp**2) * (-self.kx * self.kappa * self.psi_z(z) / z
                                        + self.ky * self._dpsi_z(z))

    def ode_residual(self, z):
        """Relative residual of z^2 w'' + z w' + (kappa^2 - k_perp^2 z^2) w = 0."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        w = self.psi_z(z)
        dw = self._dpsi_z(z)
        d2w = self._d2psi_z(z)
        res = z**2 * d2w + z * dw + (self.kappa**2 - self.k_perp**2 * z**2) * w
        scale = (z**2 * np.abs(d2w) + z * np.abs(dw)
                 + (self.kappa**2 + self.k_perp**2 * z**2) * np.abs(w))
        return np.abs(res) / scale

    def eigen_residual(self, z):
        """Relative residual of the three component equations of the
        eigenproblem K_z psi = kappa psi at the sampled z values."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        kx, ky, kap = self.kx, self.ky, self.kappa
        w = self.psi_z(z)
        dw = self._dpsi_z(z)
        d2w = self._d2psi_z(z)
        px = self.psi_x(z)
        py = self.psi_y(z)
        kp2 = self.k_perp**2
        # z psi_x = (i/kp2)(ky kap w + kx z w'), so
        # d/dz (z psi_x) = (i/kp2)(ky kap w' + kx (w' + z w'')); same for y.
        d_zpx = (1j / kp2) * (ky * kap * dw + kx * (dw + z * d2w))
        d_zpy = (1j / kp2) * (-kx * kap * dw + ky * (dw + z * d2w))
        r1 = 1j * ky * z * w - d_zpy - kap * px
        r2 = d_zpx - 1j * kx * z * w - kap * py
        r3 = 1j * kx * z * py - 1j * ky * z * px - kap * w
        scale = np.abs(kap) * (np.abs(px) + np.abs(py) + np.abs(w)) + np.abs(z * w)
        return (np.abs(r1) + np.abs(r2) + np.abs(r3)) / scale


def boost_eigenfunction(kappa, kx, ky) -> BoostEigenfunction:
    """Eigenfunction of the z-boost generator at transverse momentum (kx, ky)."""
    return BoostEigenfunction(kappa=float(kappa), kx=float(kx), ky=float(ky))


@dataclass
class FiberSpec:
    """Step-index cylinder: radius, interior/exterior permittivity, mode numbers."""

    radius: float
    eps_in: float
    eps_out: float
    m_angular: int
    k_z: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise DomainError("fiber radius must be positive")
        if self.eps_out <= 0.0 or self.eps_in <= self.eps_out:
            raise DomainError("guiding needs eps_in > eps_out > 0")


def bound_window(spec: FiberSpec):
    """(omega_min, omega_max) where k_perp is real inside, imaginary outside."""
    kz = abs(spec.k_z)
    return kz / np.sqrt(spec.eps_in), kz / np.sqrt(spec.eps_out)


def _transverse_wavenumbers(spec: FiberSpec, omega: float):
    lo, hi = bound_window(spec)
    if not (lo < omega < hi):
        raise WindowError(
            f"omega = {omega:.6g} outside bound window ({lo:.6g}, {hi:.6g}): "
            "need eps_in omega^2 > k_z^2 > eps_out omega^2"
        )
    kin = np.sqrt(spec.eps_in * omega**2 - spec.k_z**2)
    q = np.sqrt(spec.k_z**2 - spec.eps_out * omega**2)
    return kin, q


def fiber_matching_determinant(spec: FiberSpec, omega: float) -> float:
    """Real matching determinant whose sign changes locate guided modes.

    Rows: continuity of f_z/sqrt(eps) and of f_phi at rho = a, with the
    amplitude vector (A_in, A_out); the k_perp^(-2) pole factors of f_phi are
    cleared by the positive factor k_in^2 q^2, so the determinant is
    continuous throughout the open window.
    """
    kin, q = _transverse_wavenumbers(spec, omega)
    m = spec.m_angular
    a = spec.radius
    u = kin * a
    w = q * a
    mkz = m * spec.k_z / a
    g_in = mkz * jv(m, u) + omega * np.sqrt(spec.eps_in) * kin * jvp(m, u)
    g_out = mkz * kv(m, w) + omega * np.sqrt(spec.eps_out) * q * kvp(m, w)
    return float(-(jv(m, u) / np.sqrt(spec.eps_in)) * kin**2 * g_out
                 - (kv(m, w) / np.sqrt(spec.eps_out)) * q**2 * g_in)


def _bisect(f, lo, hi, flo, fhi, rtol=1e-10, maxit=200):
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
        if hi - lo <= rtol * abs(mid):
            break
    return 0.5 * (lo + hi)


@dataclass
class FiberMode:
    """One guided mode: frequency, amplitude ratio, radial profile samples."""

    omega: float
    amp_ratio: complex          # A_out / A_in
    rho: np.ndarray             # radial sample points
    f_rho: np.ndarray
    f_phi: np.ndarray
    f_z: np.ndarray
    spec: FiberSpec

    def matched_component_jump(self):
        """Relative jump of (f_z/sqrt(eps), f_phi) across rho = a."""
        s = self.spec
        kin, q = _transverse_wavenumbers(s, self.omega)
        inner = _radial_components(s, self.omega, np.array([s.radius]),
                                   inside=True)
        outer = _radial_components(s, self.omega, np.array([s.radius]),
                                   inside=False)
        outer = tuple(self.amp_ratio * c for c in outer)
        w1_in = inner[2][0] / np.sqrt(s.eps_in)
        w1_out = outer[2][0] / np.sqrt(s.eps_out)
        w2_in, w2_out = inner[1][0], outer[1][0]
        scale = max(abs(w1_in), abs(w1_out), abs(w2_in), abs(w2_out))
        return max(abs(w1_in - w1_out), abs(w2_in - w2_out)) / scale

    def exterior_log_slope(self, rho_lo=None, rho_hi=None):
        """Fitted decay rate of the scaled tail sqrt(rho) |f_z|.

        The sqrt(rho) factor removes the known algebraic prefactor of the
        evanescent Bessel tail, so the fit converges to -|k_perp_out|.  The
        default window is chosen in units of the decay length so that the
        next asymptotic correction stays below one percent.
        """
        s = self.spec
        _, q = _transverse_wavenumbers(s, self.omega)
        rho_lo = max(1.5 * s.radius, 6.0 / q) if rho_lo is None else rho_lo
        rho_hi = rho_lo + 4.0 / q if rho_hi is None else rho_hi
        rr = np.linspace(rho_lo, rho_hi, 64)
        fz = np.abs(_radial_components(s, self.omega, rr, inside=False)[2])
        slope = np.polyfit(rr, np.log(np.sqrt(rr) * fz), 1)[0]
        return float(slope)


def _radial_components(spec: FiberSpec, omega, rho, inside):
    """(f_rho, f_phi, f_z) profiles in one region, unit amplitude.

    f_rho = (i/k_perp^2)((W M / rho) f_z + k_z f_z'),
    f_phi = -(1/k_perp^2)((M k_z / rho) f_z + W f_z'),
    with W = omega/v the local dispersion factor and k_perp^2 signed.
    """
    m = spec.m_angular
    kin, q = _transverse_wavenumbers(spec, omega)
    rho = np.asarray(rho, dtype=float)
    if inside:
        kp2 = kin**2
        wloc = omega * np.sqrt(spec.eps_in)
        f_z = jv(m, kin * rho)
        df_z = kin * jvp(m, kin * rho)
    else:
        kp2 = -q**2
        wloc = omega * np.sqrt(spec.eps_out)
        f_z = kv(m, q * rho)
        df_z = q * kvp(m, q * rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        over_rho = np.where(rho > 0.0, 1.0 / np.where(rho == 0.0, 1.0, rho), 0.0)
    f_rho = (1j / kp2) * (wloc * m * over_rho * f_z + spec.k_z * df_z)
    f_phi = -(1.0 / kp2) * (m * spec.k_z * over_rho * f_z + wloc * df_z)
    return f_rho, f_phi, f_z.astype(complex)


def fiber_modes(spec: FiberSpec, omega_window=None, max_modes=8,
                scan_points=2000, rtol=1e-12):
    """Guided modes found by bracketing sign changes of the determinant.

    Returns a list of FiberMode sorted by frequency; empty when the window
    is empty (k_z = 0) or holds no sign change.
    """
    if spec.k_z == 0.0:
        return []
    lo, hi = bound_window(spec)
    if omega_window is not None:
        lo = max(lo, omega_window[0])
        hi = min(hi, omega_window[1])
    if hi <= lo:
        return []
    margin = 1e-6 * (hi - lo)
    grid = np.linspace(lo + margin, hi - margin, scan_points)
    vals = np.array([fiber_matching_determinant(spec, om) for om in grid])
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(_bisect(lambda om: fiber_matching_determinant(spec, om),
                                 grid[i], grid[i + 1], vals[i], vals[i + 1],
                                 rtol=rtol))
        if len(roots) >= max_modes:
            break
    modes = []
    for om in roots:
        kin, q = _transverse_wavenumbers(spec, om)
        ratio = ((jv(spec.m_angular, kin * spec.radius) / np.sqrt(spec.eps_in))
                 / (kv(spec.m_angular, q * spec.radius) / np.sqrt(spec.eps_out)))
        a = spec.radius
        rho_in = np.linspace(a / 64.0, a, 64)
        rho_out = np.linspace(a, 4.0 * a, 96)
        fin = _radial_components(spec, om, rho_in, inside=True)
        fout = tuple(ratio * c for c in _radial_components(spec, om, rho_out,
                                                           inside=False))
        modes.append(FiberMode(
            omega=float(om), amp_ratio=complex(ratio),
            rho=np.concatenate([rho_in, rho_out]),
            f_rho=np.concatenate([fin[0], fout[0]]),
            f_phi=np.concatenate([fin[1], fout[1]]),
            f_z=np.concatenate([fin[2], fout[2]]),
            spec=spec,
        ))
    return modes


def _mode_plus_minus(spec: FiberSpec, omega, amp_ratio, rho, inside):
    """Smooth circular combinations f_rho +/- i f_phi via Bessel recurrences.

    f_rho + i f_phi = i (W - k_z)/k_perp J_{M+1} (interior)
                    = -i (W - k_z)/q K_{M+1}   (exterior, scaled by ratio)
    f_rho - i f_phi = i (W + k_z)/k_perp J_{M-1} (interior)
                    = +i (W + k_z)/q K_{M-1}   (exterior, scaled by ratio)
    """
    m = spec.m_angular
    kin, q = _transverse_wavenumbers(spec, omega)
    rho = np.asarray(rho, dtype=float)
    if inside:
        wloc = omega * np.sqrt(spec.eps_in)
        plus = 1j * (wloc - spec.k_z) / kin * jv(m + 1, kin * rho)
        minus = 1j * (wloc + spec.k_z) / kin * jv(m - 1, kin * rho)
        fz = jv(m, kin * rho).astype(complex)
        return plus, minus, fz
    wloc = omega * np.sqrt(spec.eps_out)
    plus = -1j * (wloc - spec.k_z) / q * kv(m + 1, q * rho) * amp_ratio
    minus = 1j * (wloc + spec.k_z) / q * kv(m - 1, q * rho) * amp_ratio
    fz = kv(m, q * rho) * amp_ratio
    return plus, minus, fz


def fiber_mode_field(mode: FiberMode, grid: GridSpec, decay_lengths=6.0) -> SixField:
    """Sample a guided mode onto a 3-D grid as an upper-block field.

    The fiber axis runs along z through the box center.  The transverse box
    must leave at least ``decay_lengths`` exterior decay lengths between the
    fiber surface and the nearest box face, and k_z must be commensurate
    with the z period.
    """
    spec = mode.spec
    kin, q = _transverse_wavenumbers(spec, mode.omega)
    half = 0.5 * min(grid.length[0], grid.length[1])
    if half - spec.radius < decay_lengths / q:
        raise TruncationError(
            f"transverse half-box {half:.3g} leaves fewer than "
            f"{decay_lengths} decay lengths (1/q = {1.0 / q:.3g}) outside "
            f"radius {spec.radius:.3g}"
        )
    kz_lattice = 2.0 * np.pi / grid.length[2]
    ratio_z = spec.k_z / kz_lattice
    if abs(ratio_z - round(ratio_z)) > 1e-9:
        raise TruncationError(
            f"k_z = {spec.k_z:.6g} is not commensurate with the z period "
            f"(needs an integer multiple of {kz_lattice:.6g})"
        )
    if abs(spec.k_z) >= np.pi * grid.n[2] / grid.length[2]:
        raise TruncationError(
            f"k_z = {spec.k_z:.6g} reaches the z Nyquist wave number; "
            "increase the axial point count"
        )
    x, y, z = grid.axes()
    xx = x[:, None]
    yy = y[None, :]
    rho = np.hypot(xx, yy)
    phi = np.arctan2(yy, xx)
    m = spec.m_angular
    plus = np.empty(rho.shape, dtype=complex)
    minus = np.empty(rho.shape, dtype=complex)
    fz = np.empty(rho.shape, dtype=complex)
    inside = rho <= spec.radius
    for region, sel in ((True, inside), (False, ~inside)):
        p, mns, f0 = _mode_plus_minus(spec, mode.omega, mode.amp_ratio,
                                      rho[sel], inside=region)
        plus[sel], minus[sel], fz[sel] = p, mns, f0
    psi_plus = plus * np.exp(1j * (m + 1) * phi)
    psi_minus = minus * np.exp(1j * (m - 1) * phi)
    psi_z2d = fz * np.exp(1j * m * phi)
    zphase = np.exp(1j * spec.k_z * z)[None, None, :]
    data = np.zeros((2, 3) + grid.n, dtype=complex)
    data[0, 0] = (0.5 * (psi_plus + psi_minus))[:, :, None] * zphase
    data[0, 1] = (-0.5j * (psi_plus - psi_minus))[:, :, None] * zphase
    data[0, 2] = psi_z2d[:, :, None] * zphase
    return SixField(spec=grid, data=data)


def fiber_mode_divergence_residual(mode: FiberMode, n_samples=200,
                                   interface_pad=0.05):
    """Relative residual of div psi = 0 evaluated semi-analytically.

    In cylindrical coordinates div psi = (1/rho) d(rho f_rho)/drho
    + i M f_phi / rho + i k_z f_z per azimuthal/axial factor; radial
    derivatives come from Bessel recurrences.  Evaluated at radii away from
    the interface by interface_pad * radius.
    """
    s = mode.spec
    a = s.radius
    m = s.m_angular
    kin, q = _transverse_wavenumbers(s, mode.omega)
    out = []
    for inside in (True, False):
        if inside:
            rr = np.linspace(0.05 * a, a * (1 - interface_pad), n_samples)
            kp, wloc, ratio = kin, mode.omega * np.sqrt(s.eps_in), 1.0
        else:
            rr = np.linspace(a * (1 + interface_pad), 4.0 * a, n_samples)
            kp, wloc, ratio = q, mode.omega * np.sqrt(s.eps_out), mode.amp_ratio
        f_rho, f_phi, f_z = (ratio * c for c in
                             _radial_components(s, mode.omega, rr, inside))
        h = 1e-6 * a
        f_rho_p = ratio * _radial_components(s, mode.omega, rr + h, inside)[0]
        f_rho_m = ratio * _radial_components(s, mode.omega, rr - h, inside)[0]
        df_rho = (f_rho_p - f_rho_m) / (2 * h)
        div = df_rho + f_rho / rr + 1j * m * f_phi / rr + 1j * s.k_z * f_z
        scale = np.abs(f_rho) / rr + np.abs(df_rho) + np.abs(s.k_z * f_z) + 1e-300
        out.append(np.max(np.abs(div) / scale))
    return float(max(out))


def classical_dispersion(spec: FiberSpec, omega: float) -> float:
    """Standard four-condition hybrid-mode determinant for cross-reference.

    (J'/(u J) + K'/(w K)) (eps_in w^2 J'/(u J) + eps_out w^2 K'/(w K))
    - (M k_z)^2 (1/u^2 + 1/w^2)^2 with K' evaluated at w and J' at u; its
    zeros are the classical HE/EH (and TE/TM at M = 0) frequencies.  Used
    only as a comparison scan, never asserted equal to the two-condition
    spectrum.
    """
    kin, q = _transverse_wavenumbers(spec, omega)
    m = spec.m_angular
    a = spec.radius
    u, w = kin * a, q * a
    ju = jvp(m, u) / (u * jv(m, u))
    kw = kvp(m, w) / (w * kv(m, w))
    lhs = (ju + kw) * (spec.eps_in * omega**2 * ju + spec.eps_out * omega**2 * kw)
    rhs = (m * spec.k_z) ** 2 * (1.0 / u**2 + 1.0 / w**2) ** 2
    return float(lhs - rhs)
