"""Acceptance gate: eleven go/no-go checks with pinned tolerances.

Each check prints exactly one `criterion NN PASS/FAIL: ...` line (visible
with `pytest -s` or on failure) and asserts; run the file alone for a quick
release readout.
"""

import math
import time
from pathlib import Path

import numpy as np

from nvbath.decoherence import (
    DecayCurve,
    PairCouplings,
    bell_t2star_from_sq,
    echo_model,
    fid_model,
    fit_decay,
    fit_envelope_rate,
    fit_t2_scaling,
    pair_couplings,
    simulate_bath_fid,
)
from nvbath.errors import FitError
from nvbath.lattice import classify_shells, generate_lattice
from nvbath.linewidth import (
    DIPOLAR_COEFF_CM6,
    contact_linewidth,
    dipolar_linewidth_closed_form,
    dipolar_second_moment_sum,
    t2star_to_linewidth,
)
from nvbath.pulses import (
    BELL_VARIANTS,
    Register,
    bell_prepare_and_fidelity,
    endor_transfer,
    rabi_frequency_mhz,
)
from nvbath.spinsys import (
    HyperfineTensor,
    SpinSystemSpec,
    ZeemanField,
    build_hamiltonian,
    diagonalize,
    electron_ops,
    esr_transitions,
    first_shell_tensor,
    third_shell_tensor,
)

FIELD_83 = ZeemanField(83.0)


def report(num: int, ok: bool, detail: str):
    print(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_first_shell_splitting():
    t0 = time.perf_counter()
    spec = SpinSystemSpec(field=FIELD_83, hyperfine=(first_shell_tensor(),))
    lines = esr_transitions(spec, window=(2400.0, 2900.0), floor=0.05)
    freqs = sorted(l.freq_mhz for l in lines)
    split = freqs[-1] - freqs[0]
    dt = time.perf_counter() - t0
    ok = len(freqs) == 2 and abs(split - 130.0) <= 10.0 and dt < 1.0
    report(1, ok, f"lowest-branch splitting {split:.4f} MHz "
                  f"(target 130 +- 10), {dt:.2f} s")


def _central_multiplet_spreads(n_first: int):
    """Second-order spreads of the first-order-degenerate nuclear
    multiplets in the ms = +-1 manifolds (the splittings that make RF
    transitions of equivalent nuclei distinguishable)."""
    az = (0.0, 120.0, 240.0)[:n_first]
    spec = SpinSystemSpec(field=FIELD_83,
                          hyperfine=tuple(first_shell_tensor(a) for a in az))
    eig = diagonalize(build_hamiltonian(spec))
    sx, sy, sz = electron_ops(spec)
    ax = np.asarray(spec.zfs.axis)
    s_ax = ax[0] * sx + ax[1] * sy + ax[2] * sz
    spreads = []
    for ms in (-1, 1):
        e = []
        for k in range(len(eig.values)):
            v = eig.vectors[:, k]
            if abs(float(np.real(v.conj() @ s_ax @ v)) - ms) < 0.2:
                e.append(eig.values[k])
        e = np.sort(np.asarray(e))
        assert len(e) == 2 ** n_first
        cut = np.where(np.diff(e) > 25.0)[0]
        for group in np.split(e, cut + 1):
            if len(group) > 1:
                spreads.append(float(group.max() - group.min()))
    return spreads


def test_criterion_02_second_order_central_splitting():
    t0 = time.perf_counter()
    spreads = _central_multiplet_spreads(2) + _central_multiplet_spreads(3)
    dt = time.perf_counter() - t0
    ok = (len(spreads) >= 2
          and all(0.1 < s < 20.0 for s in spreads)
          and dt < 1.0)
    listed = ", ".join(f"{s:.2f}" for s in spreads)
    report(2, ok, f"central-multiplet splittings {listed} MHz all in "
                  f"(0.1, 20), {dt:.2f} s")


def test_criterion_03_t2star_linewidth_conversion():
    w_hz = t2star_to_linewidth(30e-6)
    ok = 17.0e3 <= w_hz <= 18.5e3
    report(3, ok, f"T2* = 30 us -> W = {w_hz / 1e3:.3f} kHz in [17.0, 18.5]")


def test_criterion_04_contact_curve_and_slopes():
    target = 2.0 * math.sqrt(2.0 * math.log(2.0)) * 21.0
    w1 = contact_linewidth(1.0)
    rel = abs(w1 - target) / target
    n = np.geomspace(1e-4, 1.0, 41)
    wc = np.array([contact_linewidth(x) for x in n])
    wd = np.array([dipolar_linewidth_closed_form(x) for x in n])
    slope_err = 0.0
    for w in (wc, wd):
        slopes = np.diff(np.log(w)) / np.diff(np.log(n))
        slope_err = max(slope_err, float(np.abs(slopes - 0.5).max()))
    ok = rel <= 1e-9 and slope_err <= 1e-6
    report(4, ok, f"W_contact(1) = {w1:.6f} MHz (rel err {rel:.1e} vs "
                  f"2 sqrt(2 ln 2) * 21), max log-log slope error "
                  f"{slope_err:.1e}")


def test_criterion_05_lattice_sum_calibration():
    t0 = time.perf_counter()
    near = classify_shells(generate_lattice(17.0))
    included = sum(1 for s in near if s.shell > 2)
    c_near = dipolar_second_moment_sum(near)
    c_far = dipolar_second_moment_sum(classify_shells(generate_lattice(34.0)))
    dt = time.perf_counter() - t0
    ratio = c_near / DIPOLAR_COEFF_CM6
    change = abs(c_far - c_near) / c_far
    ok = (included >= 3000 and 0.5 <= ratio <= 2.0 and change < 0.01
          and dt < 10.0)
    report(5, ok, f"{included} sites, sum {c_near:.4e} cm^-6 = {ratio:.3f} x "
                  f"reference, {change * 100:.3f}% change on radius "
                  f"doubling, {dt:.2f} s")


def test_criterion_06_bell_combination_rules():
    res = bell_t2star_from_sq(41.1, 15.8)
    ok = (25.5 <= res.t_psi_us <= 26.1
          and 11.3 <= res.t_phi_us <= 11.5
          # measured intervals widened to 2 sigma: 22.0+-3.0, 13.3+-1.1
          and 16.0 <= res.t_psi_us <= 28.0
          and 11.1 <= res.t_phi_us <= 15.5)
    report(6, ok, f"T_psi = {res.t_psi_us:.4f} us in [25.5, 26.1], "
                  f"T_phi = {res.t_phi_us:.4f} us in [11.3, 11.5], both "
                  f"inside the widened measured intervals")


def test_criterion_07_t2_concentration_scaling():
    n = np.array([0.011, 0.0035])
    t2 = np.array([0.65, 1.8])
    model = fit_t2_scaling(n, t2)
    rel = np.abs(model.predict(n) - t2) / t2
    ok = bool(np.all(rel <= 0.35))
    report(7, ok, f"T2 = c/n with c = {model.c:.5f} ms; prediction errors "
                  f"{rel[0] * 100:.1f}% and {rel[1] * 100:.1f}% (<= 35%)")


def test_criterion_08_decay_fit_round_trips():
    t0 = time.perf_counter()
    t_fid = np.linspace(0.0, 40.0, 80)
    fid_truth = {"t2star_us": 13.3, "domega_rad_us": 0.9,
                 "amplitude": 0.5, "offset": 0.5}
    y_fid = fid_model(t_fid, *fid_truth.values())
    t_echo = np.linspace(0.0, 1.6, 60)
    echo_truth = {"t2_us": 0.65, "amplitude": 0.5, "offset": 0.5}
    y_echo = echo_model(t_echo, *echo_truth.values())

    fit_f = fit_decay(DecayCurve(t_us=t_fid, signal=y_fid), model="fid")
    fit_e = fit_decay(DecayCurve(t_us=t_echo, signal=y_echo), model="echo")
    noiseless = max(
        max(abs(fit_f.params[k] - v) / abs(v) for k, v in fid_truth.items()),
        max(abs(fit_e.params[k] - v) / abs(v) for k, v in echo_truth.items()))

    hits_fid = hits_echo = 0
    for seed in range(100):
        rng = np.random.Generator(np.random.Philox(key=seed))
        try:
            f = fit_decay(DecayCurve(
                t_us=t_fid,
                signal=y_fid + 0.01 * rng.standard_normal(len(t_fid))),
                model="fid")
            hits_fid += abs(f.params["t2star_us"] - 13.3) <= 1.1
        except FitError:
            pass
        try:
            e = fit_decay(DecayCurve(
                t_us=t_echo,
                signal=y_echo + 0.01 * rng.standard_normal(len(t_echo))),
                model="echo")
            hits_echo += abs(e.params["t2_us"] - 0.65) / 0.65 <= 0.083
        except FitError:
            pass
    dt = time.perf_counter() - t0
    ok = (noiseless <= 1e-6 and hits_fid >= 90 and hits_echo >= 90
          and dt < 30.0)
    report(8, ok, f"noiseless max rel err {noiseless:.1e}; 1% noise "
                  f"coverage {hits_fid}/100 (fid, +-1.1 us) and "
                  f"{hits_echo}/100 (echo, +-8.3%), {dt:.1f} s")


def test_criterion_09_bath_fid_simulator():
    t0 = time.perf_counter()
    sites = classify_shells(generate_lattice(10.0))
    pos = np.array([s.position for s in sites])
    shells = np.array([s.shell for s in sites])
    i1 = int(np.where(shells == 1)[0][0])
    i3 = int(np.where(shells == 3)[0][0])
    bath = np.delete(pos, [i1, i3], axis=0)
    cpl = pair_couplings(bath, pos[i1], pos[i3], near_radius_angstrom=10.0)

    t = np.linspace(0.0, 4000.0, 161)
    # perfectly correlated couplings: the psi coherence is decoherence-free
    corr = PairCouplings(c1_khz=cpl.c1_khz, c2_khz=cpl.c1_khz,
                         near_radius_angstrom=10.0)
    psi = simulate_bath_fid(corr, "psi", t, n_samples=1000, seed=11,
                            occupancy=0.03)
    psi_decay = float(np.max(np.abs(1.0 - psi.signal)))

    rates = {}
    for kind in ("sq1", "sq2", "phi"):
        env = simulate_bath_fid(cpl, kind, t, n_samples=1000, seed=11,
                                occupancy=0.03)
        rates[kind] = fit_envelope_rate(env)
    additivity = abs(rates["phi"] - (rates["sq1"] + rates["sq2"])) \
        / rates["phi"]
    dt = time.perf_counter() - t0
    ok = psi_decay < 1e-9 and additivity <= 0.15 and dt < 60.0
    report(9, ok, f"correlated psi decay {psi_decay:.1e} (< 1e-9); "
                  f"1/T_phi vs 1/T_sq1 + 1/T_sq2 off by "
                  f"{additivity * 100:.1f}% (<= 15%), {dt:.1f} s")


def test_criterion_10_pulse_engine():
    t0 = time.perf_counter()
    reg = Register(SpinSystemSpec(field=FIELD_83,
                                  hyperfine=(first_shell_tensor(),
                                             third_shell_tensor())))
    min_fid = min(bell_prepare_and_fidelity(reg, v)[1]
                  for v in BELL_VARIANTS)
    max_endor_err = max(abs(endor_transfer(reg, q, ms) - 1.0)
                        for q in (0, 1) for ms in (-1, 1))
    a, b = reg.level(-1, (0, 0)), reg.level(-1, (1, 0))
    om = rabi_frequency_mhz(reg, "rf", a, b, power=1.0)
    base = first_shell_tensor()
    weak = HyperfineTensor(0.1 * base.a_par_mhz, 0.1 * base.a_perp_mhz,
                           base.polar_deg, base.azimuth_deg)
    wreg = Register(SpinSystemSpec(field=FIELD_83,
                                   hyperfine=(weak, third_shell_tensor())))
    om_w = rabi_frequency_mhz(wreg, "rf", wreg.level(-1, (0, 0)),
                              wreg.level(-1, (1, 0)), power=100.0)
    power_err = abs(om_w / om - 1.0)
    dt = time.perf_counter() - t0
    ok = (min_fid >= 1.0 - 1e-10 and max_endor_err <= 1e-10
          and power_err <= 0.01 and dt < 5.0)
    report(10, ok, f"min Bell fidelity {min_fid:.12f}, max transfer error "
                   f"{max_endor_err:.1e}, 10x-coupling/100x-power Rabi "
                   f"mismatch {power_err:.1e} (<= 1%), {dt:.2f} s")


def test_criterion_11_scope_exclusions_documented():
    readme = (Path(__file__).resolve().parents[1] / "README.md").read_text()
    needles = ("82", "amplitude", "1/n")
    missing = [s for s in needles if s not in readme]
    ok = not missing
    report(11, ok, "out-of-scope items (sub-unity transfer fidelity, "
                   "absolute signal amplitudes, first-principles T2) are "
                   "documented" + ("" if ok else f"; missing {missing}"))
