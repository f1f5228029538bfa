"""Diamond lattice generation, shell classification and bath sampling.

The generation oracle re-enumerates the lattice with a deliberately naive
double loop over conventional cells, so any indexing mistake in the
vectorized generator shows up as a set mismatch.
"""

import math
import warnings

import numpy as np
import pytest

from nvbath.constants import CONSTANTS, LATTICE_A_ANGSTROM
from nvbath.errors import ResourceLimitError, ValidationError
from nvbath.lattice import (
    NV_AXIS,
    SITE_DENSITY_A3,
    classify_shells,
    electron_coupling_khz,
    first_shell_positions,
    generate_lattice,
    positions_of,
    sample_bath,
    shell_occupancy_probability,
    shell_summary,
    symmetry_classes,
)


def brute_force_quarters(radius_angstrom):
    """Independent enumeration: loop every basis atom of every cell."""
    a4 = LATTICE_A_ANGSTROM / 4.0
    basis = [((0, 0, 0), 0), ((0, 2, 2), 0), ((2, 0, 2), 0), ((2, 2, 0), 0),
             ((1, 1, 1), 1), ((1, 3, 3), 1), ((3, 1, 3), 1), ((3, 3, 1), 1)]
    span = int(math.ceil(radius_angstrom / LATTICE_A_ANGSTROM)) + 1
    found = set()
    for i in range(-span, span + 1):
        for j in range(-span, span + 1):
            for k in range(-span, span + 1):
                for (bx, by, bz), sub in basis:
                    q = (4 * i + bx, 4 * j + by, 4 * k + bz)
                    d = a4 * math.sqrt(q[0] ** 2 + q[1] ** 2 + q[2] ** 2)
                    if d == 0.0 or d > radius_angstrom:
                        continue
                    if q == (1, 1, 1):
                        continue  # nitrogen site
                    found.add((q, sub))
    return found


def test_matches_brute_force_enumeration():
    for radius in (2.0, 6.0, 15.0):
        sites = generate_lattice(radius)
        got = {(s.quarter, s.sublattice) for s in sites}
        assert got == brute_force_quarters(radius)
        assert len(got) == len(sites)  # no duplicates


def test_radius_2_gives_exactly_first_shell():
    sites = generate_lattice(2.0)
    assert len(sites) == 3
    expected = {tuple(p) for p in
                (np.array(v) for v in ((1, -1, -1), (-1, 1, -1), (-1, -1, 1)))}
    assert {s.quarter for s in sites} == expected
    d = LATTICE_A_ANGSTROM * math.sqrt(3.0) / 4.0
    for s in sites:
        assert abs(s.distance - d) <= 1e-12


def test_first_shell_positions_agree_with_lattice():
    sites = generate_lattice(2.0)
    from_lattice = sorted(map(tuple, positions_of(sites).round(12)))
    helper = sorted(map(tuple, np.array(first_shell_positions()).round(12)))
    assert from_lattice == helper


def test_shell_counts_and_split():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sites = classify_shells(generate_lattice(6.0))
    table = shell_summary(sites)
    assert table[1][0] == 3
    # the d^2 = 11 distance class holds 12 sites split 9 (near-equatorial,
    # orbit sizes 3 + 6) and 3 (polar orbit)
    assert table[3][0] == 9
    assert table[4][0] == 3
    assert abs(table[3][1] - table[4][1]) <= 1e-12
    shell3 = [s for s in sites if s.shell == 3]
    orbit_sizes = sorted(len(v) for v in symmetry_classes(shell3).values())
    assert orbit_sizes == [3, 6]
    sums = {sum(s.quarter) for s in shell3}
    assert sums == {3, -1}
    assert {sum(s.quarter) for s in sites if s.shell == 4} == {-5}


def test_ordering_deterministic_and_sorted_by_distance():
    a = generate_lattice(12.0)
    b = generate_lattice(12.0)
    assert [s.quarter for s in a] == [s.quarter for s in b]
    d = [s.distance for s in a]
    assert all(x <= y + 1e-12 for x, y in zip(d, d[1:]))


def test_truncated_shell_warns():
    sites = generate_lattice(6.0)
    with pytest.warns(UserWarning, match="C3v-closed"):
        classify_shells(sites[:-1])


def test_site_count_tracks_density():
    radius = 20.0
    sites = generate_lattice(radius)
    expect = 4.0 / 3.0 * math.pi * radius ** 3 * SITE_DENSITY_A3
    assert len(sites) >= 3000
    assert abs(len(sites) - expect) / expect < 0.05


def test_radius_cap():
    with pytest.raises(ResourceLimitError):
        generate_lattice(10_000.0)
    with pytest.raises(ValidationError):
        generate_lattice(-1.0)


def test_coupling_decreases_on_axis():
    axis = np.array(NV_AXIS)
    pos = np.array([axis * r for r in (2.0, 4.0, 8.0, 16.0)])
    c = electron_coupling_khz(pos)
    assert np.all(np.diff(c) < 0)
    # 1/r^3: doubling the distance divides the coupling by 8
    np.testing.assert_allclose(c[:-1] / c[1:], 8.0, rtol=1e-12)


def test_coupling_magnitude_oracle():
    # mu0/(4 pi) * g_e mu_B g_n mu_N / h / r^3, converted to kHz at Angstrom
    r_m = 3.5e-10
    k = (CONSTANTS.mu0 / (4.0 * math.pi) * CONSTANTS.g_e * CONSTANTS.mu_b
         * CONSTANTS.g_n * CONSTANTS.mu_n / CONSTANTS.h / r_m ** 3) / 1e3
    got = electron_coupling_khz(np.array([[3.5, 0.0, 0.0]]))[0]
    assert abs(got - k) / k <= 1e-12


def test_sample_bath_deterministic_and_prefix_stable():
    sites = classify_shells(generate_lattice(10.0))
    a = sample_bath(sites, 0.05, seed=11)
    b = sample_bath(sites, 0.05, seed=11)
    np.testing.assert_array_equal(a.site_indices, b.site_indices)
    np.testing.assert_array_equal(a.couplings_khz, b.couplings_khz)
    # counter-based draws: site i's variate depends only on (seed, i), so a
    # shorter site list selects a prefix-consistent subset
    c = sample_bath(sites[:40], 0.05, seed=11)
    assert set(c.site_indices) == {i for i in a.site_indices if i < 40}
    assert sample_bath(sites, 0.05, seed=12).site_indices.shape \
        != a.site_indices.shape or \
        not np.array_equal(sample_bath(sites, 0.05, seed=12).site_indices,
                           a.site_indices)


def test_sample_bath_mean_occupancy():
    sites = classify_shells(generate_lattice(8.0))
    n = 0.084
    total = len(sites)
    counts = [sample_bath(sites, n, seed=s).count for s in range(1000)]
    mean = float(np.mean(counts))
    sigma = math.sqrt(total * n * (1 - n) / len(counts))
    assert abs(mean - total * n) <= 3.0 * sigma


def test_per_shell_occupancy_statistics():
    sites = classify_shells(generate_lattice(6.0))
    table = shell_summary(sites)
    n = 0.084
    seeds = range(1000)
    per_shell = {sh: 0 for sh in table}
    shell_of = {i: s.shell for i, s in enumerate(sites)}
    for seed in seeds:
        for i in sample_bath(sites, n, seed=seed).site_indices:
            per_shell[shell_of[int(i)]] += 1
    for sh, (m, _) in table.items():
        mean = per_shell[sh] / len(seeds)
        sigma = math.sqrt(m * n * (1 - n) / len(seeds))
        assert abs(mean - m * n) <= 3.0 * sigma, f"shell {sh}"


def test_occupancy_probability_oracle():
    # P(0 of 9 at n=0.084) = (1-n)^9 = 0.4540; complement 0.546
    p0 = shell_occupancy_probability(9, 0.084, 0)
    assert abs(p0 - (1.0 - 0.084) ** 9) <= 1e-15
    assert abs(p0 - 0.454) <= 5e-4
    p_any = shell_occupancy_probability(9, 0.084)
    assert abs(p_any - (1.0 - p0)) <= 1e-15
    total = sum(shell_occupancy_probability(9, 0.084, k) for k in range(10))
    assert abs(total - 1.0) <= 1e-12
    assert shell_occupancy_probability(9, 0.084, 12) == 0.0
    with pytest.raises(ValidationError):
        shell_occupancy_probability(9, 1.5)


def test_bath_couplings_match_positions():
    sites = classify_shells(generate_lattice(10.0))
    s = sample_bath(sites, 0.1, seed=3)
    np.testing.assert_allclose(s.couplings_khz,
                               electron_coupling_khz(s.positions),
                               rtol=1e-15)
    assert s.n_sites_total == len(sites)
