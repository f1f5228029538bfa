"""Spin Hamiltonian of one S=1 electron coupled to spin-1/2 13C nuclei.

H = g_e mu_B B.S/h + D S_axis^2 + sum_i (S.A_i.I_i - g_n mu_N B.I_i/h)

Everything is expressed in MHz with fields in Gauss. The Hilbert space is the
electron spin-1 tensored with N spin-1/2 nuclei (dimension 3 * 2^N, N <= 6).
Vectors and tensors live in one Cartesian frame (the cubic crystal frame);
the default symmetry axis is [111].
"""

from __future__ import annotations

from dataclasses import dataclass, field as _dc_field

import numpy as np

from . import _kernels
from .constants import (
    CONSTANTS,
    FIRST_SHELL_A_PAR_MHZ,
    FIRST_SHELL_A_PERP_MHZ,
    FIRST_SHELL_POLAR_DEG,
    PhysicalConstants,
    THIRD_SHELL_A_MHZ,
    ZFS_D_MHZ,
)
from .errors import DimensionLimitError, ValidationError

MAX_NUCLEI = 6

# spin-1 operators, basis |m_s = +1>, |0>, |-1>
SX1 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / np.sqrt(2)
SY1 = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / np.sqrt(2)
SZ1 = np.diag([1.0, 0.0, -1.0]).astype(complex)

# spin-1/2 operators, basis |m_I = +1/2>, |-1/2>
IXH = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
IYH = np.array([[0, -0.5j], [0.5j, 0]], dtype=complex)
IZH = np.diag([0.5, -0.5]).astype(complex)
ID2 = np.eye(2, dtype=complex)


def _unit(v, what):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValidationError(f"{what} must be a 3-vector")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError(
            f"{what} must be normalized to 1 (|v| = {norm:.3e}); "
            "use the .along() constructor to normalize")
    return v / norm


def orthonormal_frame(axis):
    """Right-handed (e1, e2, axis) with a deterministic transverse e1.

    e1 is the projection of x-hat (or y-hat when axis is nearly x) onto the
    plane normal to axis; azimuthal angles are measured from e1 toward e2.
    """
    axis = np.asarray(axis, dtype=float)
    ref = np.array([1.0, 0.0, 0.0])
    if abs(axis @ ref) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    e1 = ref - (ref @ axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return e1, e2, axis


@dataclass(frozen=True)
class ZfsParams:
    """Zero-field splitting: magnitude D (MHz) and symmetry axis (unit)."""

    d_mhz: float = ZFS_D_MHZ
    axis: tuple = (1 / np.sqrt(3), 1 / np.sqrt(3), 1 / np.sqrt(3))

    def __post_init__(self):
        object.__setattr__(self, "axis", tuple(_unit(self.axis, "ZFS axis")))

    @classmethod
    def along(cls, direction, d_mhz=ZFS_D_MHZ):
        d = np.asarray(direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValidationError("ZFS axis must be nonzero")
        return cls(d_mhz=d_mhz, axis=tuple(d / n))


@dataclass(frozen=True)
class ZeemanField:
    """Static field: magnitude in Gauss plus a unit direction."""

    gauss: float = 0.0
    direction: tuple = (1 / np.sqrt(3), 1 / np.sqrt(3), 1 / np.sqrt(3))

    def __post_init__(self):
        if self.gauss < 0:
            raise ValidationError("field magnitude must be >= 0 Gauss")
        object.__setattr__(
            self, "direction", tuple(_unit(self.direction, "field direction")))

    @classmethod
    def along(cls, direction, gauss):
        d = np.asarray(direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValidationError("field direction must be nonzero")
        return cls(gauss=gauss, direction=tuple(d / n))


@dataclass(frozen=True)
class HyperfineTensor:
    """Axially symmetric hyperfine tensor.

    a_par_mhz / a_perp_mhz are the principal values along/normal to the
    principal axis; the axis sits at polar_deg from the ZFS axis with
    azimuth_deg measured in the transverse plane (frame of
    ``orthonormal_frame``).
    """

    a_par_mhz: float
    a_perp_mhz: float
    polar_deg: float = 0.0
    azimuth_deg: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.polar_deg <= 180.0:
            raise ValidationError("polar angle must lie in [0, 180] degrees")

    def principal_axis(self, zfs_axis):
        e1, e2, ez = orthonormal_frame(np.asarray(zfs_axis, dtype=float))
        th = np.deg2rad(self.polar_deg)
        ph = np.deg2rad(self.azimuth_deg)
        return np.sin(th) * np.cos(ph) * e1 + np.sin(th) * np.sin(ph) * e2 \
            + np.cos(th) * ez

    def tensor(self, zfs_axis):
        """3x3 coupling matrix in the working frame (MHz)."""
        u = self.principal_axis(zfs_axis)
        return self.a_perp_mhz * np.eye(3) \
            + (self.a_par_mhz - self.a_perp_mhz) * np.outer(u, u)

    def secular_magnitude(self, zfs_axis):
        """|row of the tensor along the ZFS axis| (MHz): the effective
        splitting a nucleus produces on the m_s = +-1 ESR branches."""
        a = self.tensor(zfs_axis)
        return float(np.linalg.norm(a @ np.asarray(zfs_axis, dtype=float)))


def first_shell_tensor(azimuth_deg=0.0):
    """Hyperfine tensor of a nearest-neighbor 13C (three sites at azimuths
    0/120/240 degrees around the symmetry axis)."""
    return HyperfineTensor(FIRST_SHELL_A_PAR_MHZ, FIRST_SHELL_A_PERP_MHZ,
                           FIRST_SHELL_POLAR_DEG, azimuth_deg)


def third_shell_tensor():
    """Isotropic tensor of the strongly coupled 9-site class."""
    return HyperfineTensor(THIRD_SHELL_A_MHZ, THIRD_SHELL_A_MHZ, 0.0, 0.0)


@dataclass(frozen=True)
class SpinSystemSpec:
    """Electron + nuclei system definition."""

    zfs: ZfsParams = _dc_field(default_factory=ZfsParams)
    field: ZeemanField = _dc_field(default_factory=ZeemanField)
    hyperfine: tuple = ()
    constants: PhysicalConstants = _dc_field(default_factory=lambda: CONSTANTS)

    def __post_init__(self):
        hf = tuple(self.hyperfine)
        for t in hf:
            if not isinstance(t, HyperfineTensor):
                raise ValidationError("hyperfine entries must be HyperfineTensor")
        if len(hf) > MAX_NUCLEI:
            raise DimensionLimitError(
                f"{len(hf)} nuclei requested; at most {MAX_NUCLEI} supported "
                f"(dimension 3*2^N)")
        object.__setattr__(self, "hyperfine", hf)

    @property
    def n_nuclei(self) -> int:
        return len(self.hyperfine)

    @property
    def dim(self) -> int:
        return 3 * 2 ** self.n_nuclei


def _embed(op_e, ops_n, n):
    """Kron of one electron operator with per-nucleus operators (identity
    where ops_n has None)."""
    out = op_e
    for i in range(n):
        op = ops_n.get(i) if ops_n else None
        out = np.kron(out, ID2 if op is None else op)
    return out


def electron_ops(spec: SpinSystemSpec):
    """(Sx, Sy, Sz) embedded in the full register space."""
    n = spec.n_nuclei
    return tuple(_embed(s, None, n) for s in (SX1, SY1, SZ1))


def nuclear_ops(spec: SpinSystemSpec, i: int):
    """(Ix, Iy, Iz) of nucleus i embedded in the full register space."""
    if not 0 <= i < spec.n_nuclei:
        raise ValidationError(f"nucleus index {i} out of range")
    eye3 = np.eye(3, dtype=complex)
    return tuple(_embed(eye3, {i: op}, spec.n_nuclei)
                 for op in (IXH, IYH, IZH))


def build_hamiltonian(spec: SpinSystemSpec) -> np.ndarray:
    """Full Hamiltonian matrix in MHz (Hermitian, dimension 3*2^N)."""
    c = spec.constants
    n = spec.n_nuclei
    axis = np.asarray(spec.zfs.axis, dtype=float)
    bvec = spec.field.gauss * np.asarray(spec.field.direction, dtype=float)

    sx, sy, sz = electron_ops(spec)
    svec = (sx, sy, sz)

    s_axis = axis[0] * sx + axis[1] * sy + axis[2] * sz
    h = spec.zfs.d_mhz * (s_axis @ s_axis)
    h = h + c.electron_mhz_per_gauss * (bvec[0] * sx + bvec[1] * sy + bvec[2] * sz)

    for i, tens in enumerate(spec.hyperfine):
        a = tens.tensor(axis)
        ix, iy, iz = nuclear_ops(spec, i)
        ivec = (ix, iy, iz)
        for p in range(3):
            for q in range(3):
                if a[p, q] != 0.0:
                    h = h + a[p, q] * (svec[p] @ ivec[q])
        h = h - c.nuclear_mhz_per_gauss * (
            bvec[0] * ix + bvec[1] * iy + bvec[2] * iz)
    return h


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (MHz, ascending) and eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def diagonalize(h: np.ndarray) -> EigenSystem:
    """Exact diagonalization with a hermiticity guard and residual check."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError("Hamiltonian must be a square matrix")
    scale = max(float(np.linalg.norm(h)), 1.0)
    if np.linalg.norm(h - h.conj().T) > 1e-10 * scale:
        raise ValidationError("Hamiltonian is not Hermitian")
    vals, vecs = np.linalg.eigh(h)
    resid = np.linalg.norm(h @ vecs - vecs * vals)
    if resid > 1e-8 * scale:
        raise RuntimeError(f"eigensolver residual {resid:.3e} too large")
    return EigenSystem(values=vals, vectors=vecs)


@dataclass(frozen=True)
class TransitionLine:
    """One ESR line: frequency (MHz), normalized intensity, level indices."""

    freq_mhz: float
    intensity: float
    i: int
    j: int


def _transverse_axis(spec: SpinSystemSpec):
    ref = np.asarray(spec.field.direction if spec.field.gauss > 0
                     else spec.zfs.axis, dtype=float)
    e1, _, _ = orthonormal_frame(ref)
    return e1


def esr_transitions(spec: SpinSystemSpec, window=None, floor=1e-4,
                    eig: EigenSystem | None = None):
    """Allowed ESR lines with intensities |<j|S_x'|i>|^2.

    S_x' is the electron spin operator along a deterministic direction
    transverse to the static field (or to the ZFS axis at zero field).
    Intensities are normalized to unit sum over the requested frequency
    window, then lines weaker than ``floor`` are dropped.
    """
    if eig is None:
        eig = diagonalize(build_hamiltonian(spec))
    if window is not None:
        lo, hi = float(window[0]), float(window[1])
        if not hi > lo:
            raise ValidationError("window must satisfy f_max > f_min")
    sx, sy, sz = electron_ops(spec)
    e1 = _transverse_axis(spec)
    sxp = e1[0] * sx + e1[1] * sy + e1[2] * sz
    m = eig.vectors.conj().T @ sxp @ eig.vectors
    w2 = np.abs(m) ** 2

    lines = []
    dim = len(eig.values)
    for i in range(dim):
        for j in range(i + 1, dim):
            f = float(eig.values[j] - eig.values[i])
            if window is not None and not (lo <= f <= hi):
                continue
            lines.append((f, float(w2[j, i]), i, j))
    total = sum(w for _, w, _, _ in lines)
    if total <= 0.0:
        return []
    out = [TransitionLine(f, w / total, i, j)
           for f, w, i, j in lines if w / total >= floor]
    out.sort(key=lambda t: t.freq_mhz)
    return out


@dataclass(frozen=True)
class Spectrum:
    """Sampled line profile on a uniform frequency grid."""

    freq_mhz: np.ndarray
    intensity: np.ndarray
    fwhm_mhz: float

    def __post_init__(self):
        f = np.asarray(self.freq_mhz, dtype=float)
        if len(f) < 2:
            raise ValidationError("spectrum grid needs at least 2 points")
        df = np.diff(f)
        if not (np.all(df > 0) and np.allclose(df, df[0], rtol=1e-9)):
            raise ValidationError("spectrum grid must be uniform increasing")


def synth_spectrum(lines, grid, fwhm_mhz) -> Spectrum:
    """Convolve a line list with unit-area Gaussians of the given FWHM.

    grid is (f_start, f_stop, step) in MHz. The integrated profile equals the
    summed line intensities (up to grid truncation).
    """
    if fwhm_mhz <= 0:
        raise ValidationError("fwhm must be positive")
    start, stop, step = (float(x) for x in grid)
    if not (stop > start and step > 0):
        raise ValidationError("grid must satisfy stop > start, step > 0")
    npts = int(np.floor((stop - start) / step + 0.5)) + 1
    f = start + step * np.arange(npts)
    sigma = fwhm_mhz / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    centers = np.array([l.freq_mhz for l in lines], dtype=float)
    amps = np.array([l.intensity for l in lines], dtype=float)
    if len(centers) == 0:
        y = np.zeros_like(f)
    else:
        y = _kernels.gaussian_mixture(centers, amps, sigma, f)
    return Spectrum(freq_mhz=f, intensity=y, fwhm_mhz=float(fwhm_mhz))
