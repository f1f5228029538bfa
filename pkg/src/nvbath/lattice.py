"""Diamond lattice around a vacancy-nitrogen defect pair and 13C bath draws.

The vacancy sits at the origin of the cubic crystal frame; the substitutional
nitrogen occupies the [111] nearest-neighbor site, so the defect symmetry
axis is +[111]. All carbon positions are exact integer multiples of a/4,
which this module exploits for exact distance classes and deduplication.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .constants import CONSTANTS, LATTICE_A_ANGSTROM, PhysicalConstants
from .errors import ResourceLimitError, ValidationError

NV_AXIS = (1 / math.sqrt(3),) * 3

SITE_DENSITY_A3 = 8.0 / LATTICE_A_ANGSTROM ** 3  # carbon atoms per cubic Angstrom
MAX_SITES = 10_000_000

# conventional-cell basis in quarter-lattice units; B carries the nitrogen
_BASIS_A = ((0, 0, 0), (0, 2, 2), (2, 0, 2), (2, 2, 0))
_BASIS_B = ((1, 1, 1), (1, 3, 3), (3, 1, 3), (3, 3, 1))
_NITROGEN_Q = (1, 1, 1)

# C3v operations about [111] as coordinate permutations: two rotations and
# three mirrors, plus identity
_C3V_PERMS = ((0, 1, 2), (2, 0, 1), (1, 2, 0), (1, 0, 2), (0, 2, 1), (2, 1, 0))


@dataclass(frozen=True)
class LatticeSite:
    """One carbon site: position (Angstrom), quarter-lattice integer
    coordinates, distance-ordered shell index (0 = unclassified), and the
    sublattice tag (0 = vacancy sublattice, 1 = nitrogen sublattice)."""

    position: tuple
    quarter: tuple
    shell: int = 0
    sublattice: int = 0

    @property
    def distance(self) -> float:
        return LATTICE_A_ANGSTROM / 4.0 * math.sqrt(sum(q * q for q in self.quarter))


def first_shell_positions():
    """Positions (Angstrom) of the three nearest-neighbor carbons."""
    a4 = LATTICE_A_ANGSTROM / 4.0
    return [np.array(q, dtype=float) * a4
            for q in ((1, -1, -1), (-1, 1, -1), (-1, -1, 1))]


def generate_lattice(radius_angstrom: float) -> list:
    """All carbon sites within radius of the vacancy, vacancy and nitrogen
    excluded, ordered by (distance, quarter coordinates)."""
    if radius_angstrom <= 0:
        raise ValidationError("radius must be positive")
    est = 4.0 / 3.0 * math.pi * radius_angstrom ** 3 * SITE_DENSITY_A3
    if est > MAX_SITES:
        raise ResourceLimitError(
            f"radius {radius_angstrom:g} A implies ~{est:.2e} sites "
            f"(cap {MAX_SITES:.0e})")

    a4 = LATTICE_A_ANGSTROM / 4.0
    qmax = radius_angstrom / a4
    ncells = int(math.ceil(qmax / 4.0)) + 1
    rng = np.arange(-ncells, ncells + 1)
    i, j, k = np.meshgrid(rng, rng, rng, indexing="ij")
    cells = np.stack([i.ravel(), j.ravel(), k.ravel()], axis=1) * 4

    out = []
    q2max = qmax * qmax
    for sub, basis in ((0, _BASIS_A), (1, _BASIS_B)):
        pts = (cells[:, None, :] + np.array(basis)[None, :, :]).reshape(-1, 3)
        d2 = np.einsum("ij,ij->i", pts, pts)
        keep = (d2 <= q2max) & (d2 > 0)
        for q, qq in zip(pts[keep], d2[keep]):
            qt = (int(q[0]), int(q[1]), int(q[2]))
            if sub == 1 and qt == _NITROGEN_Q:
                continue
            out.append((int(qq), qt, sub))
    out.sort(key=lambda t: (t[0], t[1]))
    return [LatticeSite(position=tuple(a4 * c for c in qt), quarter=qt,
                        sublattice=sub)
            for _, qt, sub in out]


def positions_of(sites) -> np.ndarray:
    return np.array([s.position for s in sites], dtype=float)


def _orbit_key(quarter):
    return min(tuple(quarter[p] for p in perm) for perm in _C3V_PERMS)


def symmetry_classes(sites) -> dict:
    """Group sites into C3v orbits about the defect axis; returns
    {orbit key: [sites]}. Orbit sizes divide 6."""
    orbits = {}
    for s in sites:
        orbits.setdefault(_orbit_key(s.quarter), []).append(s)
    return orbits


# Canonical third distance class (d^2 = 11 quarter units): 12 sites in C3v
# orbits of 6+3+3. The strongly coupled 9-site class (orbits with axial
# coordinate sums +3 and -1) is shell 3; the polar 3-orbit (sum -5) splits
# into the following shell.
_SPLIT_D2 = 11
_SPLIT_POLAR_SUM = -5


def classify_shells(sites, radius_angstrom=None) -> list:
    """Assign 1-based shell indices by distance class from the vacancy.

    The third distance class is subdivided into the 9-site near-equatorial
    class and the 3-site polar orbit; all later classes shift by one. Warns when the outermost
    shell is not closed under C3v (truncated input) or sits at the
    generation radius boundary.
    """
    if not sites:
        return []
    d2s = sorted({sum(q * q for q in s.quarter) for s in sites})
    index_of = {}
    idx = 1
    for d2 in d2s:
        if d2 == _SPLIT_D2:
            index_of[(d2, "equatorial")] = idx
            index_of[(d2, "polar")] = idx + 1
            idx += 2
        else:
            index_of[d2] = idx
            idx += 1

    def shell_for(s):
        d2 = sum(q * q for q in s.quarter)
        if d2 == _SPLIT_D2:
            kind = "polar" if sum(s.quarter) == _SPLIT_POLAR_SUM else "equatorial"
            return index_of[(d2, kind)]
        return index_of[d2]

    out = [replace(s, shell=shell_for(s)) for s in sites]

    outer_d2 = d2s[-1]
    outer = [s for s in out if sum(q * q for q in s.quarter) == outer_d2]
    have = {s.quarter for s in outer}
    closed = all(tuple(s.quarter[p] for p in perm) in have
                 for s in outer for perm in _C3V_PERMS)
    if not closed:
        warnings.warn("outermost shell is not C3v-closed; the site list "
                      "appears truncated mid-shell", stacklevel=2)
    if radius_angstrom is not None:
        outer_d = LATTICE_A_ANGSTROM / 4.0 * math.sqrt(outer_d2)
        if radius_angstrom - outer_d < 1e-6:
            warnings.warn("outermost shell lies at the radius boundary; "
                          "treat it as possibly incomplete", stacklevel=2)
    return out


def shell_summary(sites) -> dict:
    """{shell index: (site count, distance in Angstrom)} for classified sites."""
    table = {}
    for s in sites:
        if s.shell == 0:
            continue
        cnt, _ = table.get(s.shell, (0, s.distance))
        table[s.shell] = (cnt + 1, s.distance)
    return table


def shell_occupancy_probability(multiplicity: int, n: float, k: int = None):
    """Binomial occupation statistics of a shell with the given multiplicity
    at 13C fraction n: P(k occupied) when k is given, else the probability
    of at least one occupied site."""
    if not 0.0 <= n <= 1.0:
        raise ValidationError("concentration must lie in [0, 1]")
    if multiplicity < 0:
        raise ValidationError("multiplicity must be >= 0")
    if k is None:
        return 1.0 - (1.0 - n) ** multiplicity
    if not 0 <= k <= multiplicity:
        return 0.0
    return math.comb(multiplicity, k) * n ** k * (1.0 - n) ** (multiplicity - k)


@dataclass(frozen=True)
class BathSample:
    """One random 13C occupation of a site list.

    Couplings are the angular-independent electron-nuclear point-dipole
    magnitudes K/r^3 in kHz, recomputable bit-identically from positions.
    """

    seed: int
    concentration: float
    site_indices: np.ndarray
    positions: np.ndarray
    couplings_khz: np.ndarray
    n_sites_total: int

    @property
    def count(self) -> int:
        return len(self.site_indices)


def electron_coupling_khz(positions, constants: PhysicalConstants = CONSTANTS):
    """Point-dipole electron-nuclear coupling magnitude (kHz) at positions
    (Angstrom) relative to the electron at the origin."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    r = np.sqrt(np.einsum("ij,ij->i", pos, pos))
    if np.any(r <= 0):
        raise ValidationError("coupling requested at the origin")
    return constants.en_dipolar_khz_a3 / r ** 3


def sample_bath(sites, n: float, seed: int,
                constants: PhysicalConstants = CONSTANTS) -> BathSample:
    """Occupy each site independently with probability n.

    Draws come from a counter-based Philox stream keyed by the seed, so site
    i always sees the same uniform variate for a given seed regardless of
    how many sites are sampled: reproducible bit-identically across
    platforms and trivially parallelizable.
    """
    if not 0.0 <= n <= 1.0:
        raise ValidationError("concentration must lie in [0, 1]")
    gen = np.random.Generator(np.random.Philox(key=int(seed)))
    u = gen.random(len(sites))
    idx = np.flatnonzero(u < n)
    pos = positions_of([sites[i] for i in idx]) if len(idx) else \
        np.zeros((0, 3))
    coup = electron_coupling_khz(pos, constants) if len(idx) else np.zeros(0)
    return BathSample(seed=int(seed), concentration=float(n),
                      site_indices=idx, positions=pos, couplings_khz=coup,
                      n_sites_total=len(sites))
