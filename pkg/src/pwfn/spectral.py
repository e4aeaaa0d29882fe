"""Periodic-grid Fourier machinery for six-component photon fields.

Grid conventions
----------------
A GridSpec describes a periodic box with even point counts n = (nx, ny, nz)
and edge lengths L = (Lx, Ly, Lz).  Real-space samples sit at box-centered
coordinates x_i = (i - n/2) * dx in [-L/2, L/2); wave numbers are
k_m = 2 pi m / L with integer m in [-n/2, n/2).

Transforms use the integral-like normalization

    u_hat(k) = dV * sum_r u(r) exp(-i k.r),
    u(r)     = (1/V) * sum_k u_hat(k) exp(+i k.r),

so that sum_k (1/V) approximates integral d^3k/(2 pi)^3.  With box-centered
coordinates the extra phase exp(-i k . r0) is the exact checkerboard
(-1)^(mx+my+mz), applied without roundoff.

Polarization gauge
------------------
The transverse triad (l1, l2, n) uses the spherical gauge l1 = theta_hat,
l2 = phi_hat.  At the exact north pole (k ~ +z) l1 = x, l2 = y; at the exact
south pole l1 = x, l2 = -y.  The circular vector e = (l1 + i l2)/sqrt(2)
satisfies i k x e = |k| e and e*.e = 1.

The connection returned by :func:`berry_connection` is the one entering the
covariant derivative D_k = d/dk + i lambda alpha(k) for helicity amplitudes:
alpha = (l1 . d l2 - l2 . d l1)/2 = -cot(theta)/|k| phi_hat in this gauge.
It shifts by grad chi under the gauge change e -> exp(i chi) e, and its curl
is the unit monopole field +n/k^2 (the sign and normalization are fixed by
requiring the angular-momentum algebra to close; see the rotation-generator
tests).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import DomainError, GaugeSingularityError, ShapeError

__all__ = [
    "GridSpec", "SixField", "HelicitySpectrum", "PolarizationTriad",
    "polarization_triad", "triad_arrays", "berry_connection",
    "berry_connection_grid", "decompose", "synthesize",
    "positive_frequency_project", "longitudinal_residual", "translate",
    "to_k", "to_r", "get_workers", "set_workers",
]

# Worker count for scipy.fft; settable from the CLI (--threads / PWFN_THREADS).
_FFT_WORKERS = 1


def set_workers(n: int) -> None:
    global _FFT_WORKERS
    _FFT_WORKERS = max(1, int(n))


def get_workers() -> int:
    return _FFT_WORKERS


@dataclass(frozen=True)
class GridSpec:
    """Periodic box: points per axis (even) and physical edge lengths."""

    n: tuple
    length: tuple

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        length = tuple(float(v) for v in self.length)
        if len(n) != 3 or len(length) != 3:
            raise DomainError("GridSpec needs three point counts and three lengths")
        if any(v <= 0 or v % 2 for v in n):
            raise DomainError(f"point counts must be positive and even, got {n}")
        if any(v <= 0.0 for v in length):
            raise DomainError(f"box lengths must be positive, got {length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", length)

    @property
    def spacing(self):
        return tuple(L / m for L, m in zip(self.length, self.n))

    @property
    def volume(self):
        return self.length[0] * self.length[1] * self.length[2]

    @property
    def cell_volume(self):
        d = self.spacing
        return d[0] * d[1] * d[2]

    @property
    def npoints(self):
        return self.n[0] * self.n[1] * self.n[2]

    def axes(self):
        """Box-centered coordinate samples per axis."""
        return tuple(
            (np.arange(m) - m // 2) * (L / m) for m, L in zip(self.n, self.length)
        )

    def coords(self):
        """Array (3, nx, ny, nz) of box-centered coordinates."""
        ax = self.axes()
        return np.stack(np.meshgrid(*ax, indexing="ij"))

    def k_axes(self):
        """Dual-lattice wave numbers per axis in FFT order."""
        return tuple(
            2.0 * np.pi * sfft.fftfreq(m, d=L / m) for m, L in zip(self.n, self.length)
        )

    def k_grid(self):
        """Array (3, nx, ny, nz) of wave vectors in FFT order."""
        kx, ky, kz = self.k_axes()
        return np.stack(np.meshgrid(kx, ky, kz, indexing="ij"))

    def k_grid_diff(self):
        """Wave vectors for odd-order derivative multipliers.

        The unpaired Nyquist component is zeroed per axis: it has no
        conjugation-consistent odd derivative, and keeping it breaks the
        reality/conjugation symmetry of differentiated aliased products.
        """
        axes = []
        for m, L in zip(self.n, self.length):
            k = 2.0 * np.pi * sfft.fftfreq(m, d=L / m)
            k[m // 2] = 0.0
            axes.append(k)
        return np.stack(np.meshgrid(*axes, indexing="ij"))

    def k_norm(self):
        return np.sqrt(np.sum(self.k_grid() ** 2, axis=0))

    def checkerboard(self):
        """(-1)^(mx+my+mz) on the dual lattice: exp(-i k . r0) exactly."""
        signs = [1 - 2 * (np.abs(sfft.fftfreq(m, d=1.0 / m)).astype(int) % 2)
                 for m in self.n]
        return (signs[0][:, None, None] * signs[1][None, :, None]
                * signs[2][None, None, :]).astype(float)


def _check_same_spec(a: GridSpec, b: GridSpec):
    if a.n != b.n or a.length != b.length:
        raise ShapeError(f"grid mismatch: {a} vs {b}")


def to_k(spec: GridSpec, u):
    """Forward transform dV * sum_r u exp(-i k.r) over the last three axes."""
    out = sfft.fftn(u, axes=(-3, -2, -1), workers=_FFT_WORKERS)
    out *= spec.cell_volume * spec.checkerboard()
    return out


def to_r(spec: GridSpec, uhat):
    """Inverse of :func:`to_k`."""
    out = sfft.ifftn(uhat * spec.checkerboard(), axes=(-3, -2, -1),
                     workers=_FFT_WORKERS)
    out *= 1.0 / spec.cell_volume
    return out


@dataclass
class SixField:
    """Six-component wave function sampled on a periodic grid.

    data has shape (2, 3, nx, ny, nz): block (upper/lower), Cartesian
    component, lattice.
    """

    spec: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=complex)
        expected = (2, 3) + self.spec.n
        if self.data.shape != expected:
            raise ShapeError(f"data shape {self.data.shape} != {expected}")

    @classmethod
    def zeros(cls, spec: GridSpec):
        return cls(spec=spec, data=np.zeros((2, 3) + spec.n, dtype=complex))

    @property
    def upper(self):
        return self.data[0]

    @property
    def lower(self):
        return self.data[1]

    def copy(self):
        return SixField(spec=self.spec, data=self.data.copy())

    def norm2(self):
        """Plain lattice L2 norm squared, integral |psi|^2 d^3r."""
        return float(np.sum(np.abs(self.data) ** 2) * self.spec.cell_volume)

    def norm(self):
        return np.sqrt(self.norm2())

    def is_finite(self):
        return bool(np.all(np.isfinite(self.data)))


@dataclass
class HelicitySpectrum:
    """Helicity amplitudes on the dual lattice.

    amp has shape (2, nx, ny, nz); index 0 holds lambda = +1, index 1 holds
    lambda = -1.  The k = 0 entry is identically zero.
    """

    spec: GridSpec
    amp: np.ndarray

    LAMBDAS = (+1, -1)

    def __post_init__(self):
        self.amp = np.ascontiguousarray(self.amp, dtype=complex)
        expected = (2,) + self.spec.n
        if self.amp.shape != expected:
            raise ShapeError(f"amp shape {self.amp.shape} != {expected}")

    @classmethod
    def zeros(cls, spec: GridSpec):
        return cls(spec=spec, amp=np.zeros((2,) + spec.n, dtype=complex))

    def copy(self):
        return HelicitySpectrum(spec=self.spec, amp=self.amp.copy())


@dataclass
class PolarizationTriad:
    """Right-handed transverse frame at one wave vector."""

    l1: np.ndarray
    l2: np.ndarray
    n_hat: np.ndarray
    e: np.ndarray = field(init=False)

    def __post_init__(self):
        self.e = (self.l1 + 1j * self.l2) / np.sqrt(2.0)


def _triads_from_khat(nx, ny, nz):
    """Spherical-gauge l1, l2 for unit-vector components; vectorized."""
    rho = np.hypot(nx, ny)
    # atan2(0, 0) = 0 encodes the phi = 0 pole convention for the north pole.
    phi = np.arctan2(ny, nx)
    cth = np.clip(nz, -1.0, 1.0)
    sth = rho
    cph, sph = np.cos(phi), np.sin(phi)
    l1 = np.stack([cth * cph, cth * sph, -sth])
    l2 = np.stack([-sph, cph, np.zeros_like(sph)])
    # Exact south pole: l1 = +x, l2 = -y (a pure gauge choice; the spherical
    # limit along phi = 0 would give l1 = -x, l2 = +y).
    south = (sth == 0.0) & (nz < 0.0)
    if np.any(south):
        l1[0][south], l1[1][south], l1[2][south] = 1.0, 0.0, 0.0
        l2[0][south], l2[1][south], l2[2][south] = 0.0, -1.0, 0.0
    return l1, l2


def polarization_triad(k):
    """Transverse triad (l1, l2, n) and circular vector e at one k != 0."""
    k = np.asarray(k, dtype=float)
    kn = float(np.linalg.norm(k))
    if kn == 0.0:
        raise DomainError("polarization triad is undefined at k = 0")
    n = k / kn
    l1, l2 = _triads_from_khat(n[0:1], n[1:2], n[2:3])
    return PolarizationTriad(l1=l1.reshape(3), l2=l2.reshape(3), n_hat=n)


def triad_arrays(spec: GridSpec):
    """Gridded e(k), e*(k) and n(k) on the dual lattice.

    Returns (e, n_hat, knorm); e has shape (3, nx, ny, nz) and is zero at
    the k = 0 point, where no transverse frame exists.
    """
    kvec = spec.k_grid()
    knorm = np.sqrt(np.sum(kvec**2, axis=0))
    safe = np.where(knorm == 0.0, 1.0, knorm)
    nhat = kvec / safe
    nhat[:, knorm == 0.0] = 0.0
    l1, l2 = _triads_from_khat(nhat[0], nhat[1], nhat[2])
    dc = knorm == 0.0
    for comp in range(3):
        l1[comp][dc] = 0.0
        l2[comp][dc] = 0.0
    e = (l1 + 1j * l2) / np.sqrt(2.0)
    return e, nhat, knorm


def berry_connection(k, pole_cone=1e-6):
    """Connection of the spherical gauge at one k, entering D = d/dk + i lambda alpha.

    alpha(k) = -cot(theta)/|k| * phi_hat away from the z axis.  Exactly on the
    axis the frame is constant by convention and alpha = 0.  Inside the
    excluded cone around the axis (0 < sin(theta) < pole_cone) the gauge is
    singular and GaugeSingularityError is raised.
    """
    k = np.asarray(k, dtype=float)
    kn = float(np.linalg.norm(k))
    if kn == 0.0:
        raise DomainError("berry connection undefined at k = 0")
    n = k / kn
    sth = float(np.hypot(n[0], n[1]))
    if sth == 0.0:
        return np.zeros(3)
    if sth < pole_cone:
        raise GaugeSingularityError(
            f"k direction lies in the gauge pole cone (sin theta = {sth:.2e})"
        )
    phi = np.arctan2(n[1], n[0])
    phihat = np.array([-np.sin(phi), np.cos(phi), 0.0])
    return -(n[2] / sth) / kn * phihat


def berry_connection_grid(spec: GridSpec, pole_cone=1e-6):
    """Gridded connection; exact-axis points get 0, cone points get NaN."""
    kvec = spec.k_grid()
    knorm = np.sqrt(np.sum(kvec**2, axis=0))
    safe = np.where(knorm == 0.0, 1.0, knorm)
    n = kvec / safe
    sth = np.hypot(n[0], n[1])
    phi = np.arctan2(n[1], n[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = np.where(sth > 0.0, -(n[2] / np.where(sth == 0, 1, sth)) / safe, 0.0)
    alpha = np.stack([-np.sin(phi) * mag, np.cos(phi) * mag, np.zeros_like(mag)])
    bad = (sth > 0.0) & (sth < pole_cone) & (knorm > 0.0)
    alpha[:, bad] = np.nan
    alpha[:, knorm == 0.0] = 0.0
    return alpha


def _dc_energy_warning(spec, upper_hat, lower_hat):
    dc = (np.sum(np.abs(upper_hat[:, 0, 0, 0]) ** 2)
          + np.sum(np.abs(lower_hat[:, 0, 0, 0]) ** 2))
    total = np.sum(np.abs(upper_hat) ** 2) + np.sum(np.abs(lower_hat) ** 2)
    if total > 0.0 and dc > 1e-12 * total:
        warnings.warn(
            f"field carries k = 0 energy fraction {dc / total:.3e}; "
            "the DC mode has no helicity content and is dropped",
            stacklevel=3,
        )


def decompose(psi: SixField) -> HelicitySpectrum:
    """Project a six-component field onto helicity amplitudes.

    amp(k, +1) = e*(k) . upper_hat(k) and amp(k, -1) = e(k) . lower_hat(k);
    the k = 0 mode is forced to zero (with a warning if it carries energy).
    Longitudinal content is not stored; measure it with
    :func:`longitudinal_residual`.
    """
    if not psi.is_finite():
        raise DomainError("field contains non-finite values")
    e, _, _ = triad_arrays(psi.spec)
    upper_hat = to_k(psi.spec, psi.upper)
    lower_hat = to_k(psi.spec, psi.lower)
    _dc_energy_warning(psi.spec, upper_hat, lower_hat)
    amp = np.stack([
        np.sum(np.conj(e) * upper_hat, axis=0),
        np.sum(e * lower_hat, axis=0),
    ])
    amp[:, 0, 0, 0] = 0.0
    return HelicitySpectrum(spec=psi.spec, amp=amp)


def synthesize(spectrum: HelicitySpectrum, t=0.0) -> SixField:
    """Rebuild the positive-frequency field from helicity amplitudes at time t.

    Each mode evolves with the phase exp(-i omega t), omega = |k|.
    """
    if not np.all(np.isfinite(spectrum.amp)):
        raise DomainError("spectrum contains non-finite amplitudes")
    if spectrum.amp[0, 0, 0, 0] != 0.0 or spectrum.amp[1, 0, 0, 0] != 0.0:
        raise DomainError("spectrum carries a k = 0 amplitude")
    spec = spectrum.spec
    e, _, knorm = triad_arrays(spec)
    phase = np.exp(-1j * knorm * float(t))
    upper_hat = e * (spectrum.amp[0] * phase)
    lower_hat = np.conj(e) * (spectrum.amp[1] * phase)
    data = np.stack([to_r(spec, upper_hat), to_r(spec, lower_hat)])
    return SixField(spec=spec, data=data)


def positive_frequency_project(psi: SixField) -> SixField:
    """Keep only the positive-frequency (physical wave function) content.

    Per Fourier mode the upper block retains its e(k) component and the lower
    block its e*(k) component; longitudinal and negative-frequency parts are
    removed.  Idempotent.
    """
    return synthesize(decompose(psi), t=0.0)


def longitudinal_residual(psi: SixField) -> float:
    """Relative norm of the k-parallel content, ||n.psi_hat|| / ||psi_hat||."""
    _, nhat, _ = triad_arrays(psi.spec)
    upper_hat = to_k(psi.spec, psi.upper)
    lower_hat = to_k(psi.spec, psi.lower)
    lon = (np.sum(np.abs(np.sum(nhat * upper_hat, axis=0)) ** 2)
           + np.sum(np.abs(np.sum(nhat * lower_hat, axis=0)) ** 2))
    tot = np.sum(np.abs(upper_hat) ** 2) + np.sum(np.abs(lower_hat) ** 2)
    if tot == 0.0:
        return 0.0
    return float(np.sqrt(lon / tot))


def translate(spectrum: HelicitySpectrum, r0=(0.0, 0.0, 0.0), t0=0.0) -> HelicitySpectrum:
    """Space-time translation: amp'(k) = exp(-i omega t0 + i k.r0) amp(k)."""
    spec = spectrum.spec
    kvec = spec.k_grid()
    knorm = np.sqrt(np.sum(kvec**2, axis=0))
    r0 = np.asarray(r0, dtype=float)
    phase = np.exp(1j * np.tensordot(r0, kvec, axes=(0, 0)) - 1j * knorm * float(t0))
    return HelicitySpectrum(spec=spec, amp=spectrum.amp * phase)
