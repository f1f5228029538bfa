"""Eigenstate registers, selective pulses and the canned experiments."""

import math

import numpy as np
import pytest

import nvbath.pulses as pulses_mod
from nvbath.errors import AmbiguousTransitionError, ValidationError
from nvbath.pulses import (
    BELL_VARIANTS,
    Pulse,
    Register,
    RegisterState,
    Wait,
    bell_dephasing_fidelity,
    bell_prepare_and_fidelity,
    bell_sequence,
    bell_target_vector,
    endor_transfer,
    format_sequence,
    free_unitary,
    hahn_echo_sequence,
    parse_sequence,
    pulse_unitary,
    rabi_frequency_mhz,
    rabi_simulate,
    run_sequence,
)
from nvbath.spinsys import (
    HyperfineTensor,
    SpinSystemSpec,
    ZeemanField,
    first_shell_tensor,
    third_shell_tensor,
)

FIELD_83 = ZeemanField(83.0)


def make_register():
    return Register(SpinSystemSpec(field=FIELD_83,
                                   hyperfine=(first_shell_tensor(),
                                              third_shell_tensor())))


def make_bare():
    return Register(SpinSystemSpec(field=FIELD_83))


def test_register_labels_cover_all_levels():
    reg = make_register()
    assert reg.dim == 12
    assert len(set(reg.labels)) == 12
    ms_values = {m for m, _ in reg.labels}
    assert ms_values == {1, 0, -1}
    # every level of the two-nucleus register stays uniquely assigned
    assert min(reg.label_contrast) > 1.5
    one = Register(SpinSystemSpec(field=FIELD_83,
                                  hyperfine=(first_shell_tensor(),)))
    assert min(one.label_overlap) > 0.99


def test_level_lookup_round_trip():
    reg = make_register()
    for k, (ms, bits) in enumerate(reg.labels):
        assert reg.level(ms, bits) == k
    with pytest.raises(ValidationError):
        reg.level(2, (0, 0))


def test_equivalent_nuclei_are_ambiguous():
    eq = Register(SpinSystemSpec(field=FIELD_83,
                                 hyperfine=(first_shell_tensor(),
                                            first_shell_tensor())))
    # symmetric/antisymmetric hybrids sit near 50/50 between two labels
    assert min(eq.label_contrast) < 1.1
    lv = [k for k, (m, b) in enumerate(eq.labels)
          if m == -1 and b in ((0, 1), (1, 0))]
    with pytest.raises(AmbiguousTransitionError):
        pulse_unitary(eq, Pulse("rf", eq.level(-1, (0, 0)), lv[0], math.pi))


def test_ideal_pulse_matrix_oracle():
    reg = make_bare()
    i, j = reg.level(0, ()), reg.level(-1, ())
    th, ph = 1.1, 0.7
    u = pulse_unitary(reg, Pulse("mw", i, j, th, ph))
    c, s = math.cos(th / 2), math.sin(th / 2)
    expect = np.eye(3, dtype=complex)
    expect[i, i] = c
    expect[j, j] = c
    expect[i, j] = -1j * s * np.exp(-1j * ph)
    expect[j, i] = -1j * s * np.exp(1j * ph)
    np.testing.assert_allclose(u, expect, atol=1e-15)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(3), atol=1e-12)


def test_pulse_composition_and_identity():
    reg = make_register()
    i, j = reg.level(0, (0, 0)), reg.level(-1, (0, 0))
    half = pulse_unitary(reg, Pulse("mw", i, j, math.pi / 2, 0.3))
    full = pulse_unitary(reg, Pulse("mw", i, j, math.pi, 0.3))
    np.testing.assert_allclose(half @ half, full, atol=1e-12)
    # a 2 pi rotation leaves any density matrix unchanged
    two_pi = pulse_unitary(reg, Pulse("mw", i, j, 2.0 * math.pi, 0.0))
    state = reg.mixed_nuclei_state(0)
    evolved = state.evolved(two_pi)
    np.testing.assert_allclose(evolved.rho, state.rho, atol=1e-12)


def test_pi_pulse_moves_population():
    reg = make_register()
    state = reg.pure_state(-1, (0, 0))
    rf = Pulse("rf", reg.level(-1, (0, 0)), reg.level(-1, (0, 1)), math.pi)
    out = state.evolved(pulse_unitary(reg, rf))
    assert abs(out.population(-1, (0, 1)) - 1.0) <= 1e-12
    assert out.population(-1, (0, 0)) <= 1e-12


def test_trace_and_purity_conserved():
    reg = make_register()
    state = reg.mixed_nuclei_state(0)
    seq = [Pulse("mw", reg.level(0, (0, 0)), reg.level(1, (0, 0)), 0.77, 0.1),
           Wait(1.3),
           Pulse("rf", reg.level(1, (0, 0)), reg.level(1, (1, 0)), 2.0)]
    out = run_sequence(state, seq)
    assert abs(float(np.real(np.trace(out.rho))) - 1.0) <= 1e-10
    assert abs(out.purity() - state.purity()) <= 1e-10


def test_channel_selection_rules():
    reg = make_register()
    with pytest.raises(ValidationError, match="MW"):
        pulse_unitary(reg, Pulse("mw", reg.level(0, (0, 0)),
                                 reg.level(-1, (0, 1)), math.pi))
    with pytest.raises(ValidationError, match="RF"):
        pulse_unitary(reg, Pulse("rf", reg.level(0, (0, 0)),
                                 reg.level(-1, (0, 0)), math.pi))
    with pytest.raises(ValidationError, match="RF"):
        pulse_unitary(reg, Pulse("rf", reg.level(0, (0, 0)),
                                 reg.level(0, (1, 1)), math.pi))


def test_control_annotation_checked():
    reg = make_register()
    i, j = reg.level(-1, (1, 0)), reg.level(-1, (1, 1))
    pulse_unitary(reg, Pulse("rf", i, j, math.pi, control=(0, 1)))  # ok
    with pytest.raises(ValidationError, match="control"):
        pulse_unitary(reg, Pulse("rf", i, j, math.pi, control=(0, 0)))
    with pytest.raises(ValidationError):
        Pulse("rf", i, j, math.pi, control=(0, 2))


def test_frequency_collision_detected(monkeypatch):
    reg = make_register()
    # the nearest same-channel neighbor sits one third-shell flip away
    # (~13.5 MHz); a 20 MHz tolerance must flag it
    monkeypatch.setattr(pulses_mod, "DEGENERACY_TOL_MHZ", 20.0)
    with pytest.raises(AmbiguousTransitionError, match="collides"):
        pulse_unitary(reg, Pulse("mw", reg.level(0, (0, 0)),
                                 reg.level(-1, (0, 0)), math.pi))


def test_finite_duration_pi_pulse_resonant():
    reg = make_register()
    i, j = reg.level(0, (0, 0)), reg.level(-1, (0, 0))
    state = reg.pure_state(0, (0, 0))
    out = state.evolved(pulse_unitary(
        reg, Pulse("mw", i, j, math.pi, duration_us=2.0)))
    assert abs(out.population(-1, (0, 0)) - 1.0) <= 1e-9
    # spectator populations untouched
    spect = reg.pure_state(1, (1, 1))
    after = spect.evolved(pulse_unitary(
        reg, Pulse("mw", i, j, math.pi, duration_us=2.0)))
    assert abs(after.population(1, (1, 1)) - 1.0) <= 1e-12


def test_free_evolution_phases():
    reg = make_register()
    t = 0.73
    u = free_unitary(reg, t)
    lam = reg.eig.values
    np.testing.assert_allclose(np.diag(u),
                               np.exp(-2j * math.pi * lam * t), atol=1e-12)
    with pytest.raises(ValidationError):
        free_unitary(reg, 1.0, nuclear_detunings_mhz=[0.1])


def test_state_validation():
    reg = make_bare()
    good = np.diag([0.5, 0.5, 0.0]).astype(complex)
    RegisterState(reg, good)
    bad_trace = np.diag([0.6, 0.5, 0.0]).astype(complex)
    with pytest.raises(ValidationError):
        RegisterState(reg, bad_trace)
    herm = good.copy()
    herm[0, 1] = 0.3
    with pytest.raises(ValidationError):
        RegisterState(reg, herm)
    neg = np.diag([1.2, -0.2, 0.0]).astype(complex)
    with pytest.raises(ValidationError):
        RegisterState(reg, neg)


def test_bell_preparation_all_variants():
    reg = make_register()
    for variant in BELL_VARIANTS:
        state, fid, p00 = bell_prepare_and_fidelity(reg, variant)
        assert fid >= 1.0 - 1e-10, variant
        assert p00 >= 1.0 - 1e-10, variant


def test_bell_needs_two_nuclei():
    one = Register(SpinSystemSpec(field=FIELD_83,
                                  hyperfine=(first_shell_tensor(),)))
    with pytest.raises(ValidationError):
        bell_sequence(one, "phi_plus")
    with pytest.raises(ValidationError):
        bell_sequence(make_register(), "chi_plus")


def test_label_swap_negates_psi_minus():
    reg = make_register()
    target = bell_target_vector(reg, "psi_minus")
    swapped = np.zeros_like(target)
    for k, (ms, bits) in enumerate(reg.labels):
        swapped[reg.level(ms, bits[::-1])] = target[k]
    np.testing.assert_allclose(swapped, -target, atol=1e-15)
    state, _, _ = bell_prepare_and_fidelity(reg, "psi_minus")
    assert abs(state.fidelity(target) - state.fidelity(swapped)) <= 1e-12


def test_dephasing_dichotomy():
    reg = make_register()
    t = np.linspace(0.0, 5.0, 41)
    d1, d2 = 0.21, 0.13
    f_phi = bell_dephasing_fidelity(reg, "phi_plus", t, d1, d2)
    f_psi = bell_dephasing_fidelity(reg, "psi_plus", t, d1, d2)
    np.testing.assert_allclose(f_phi, np.cos(math.pi * (d1 + d2) * t) ** 2,
                               atol=1e-9)
    np.testing.assert_allclose(f_psi, np.cos(math.pi * (d1 - d2) * t) ** 2,
                               atol=1e-9)
    # common-mode detuning leaves every psi variant stationary
    f_eq = bell_dephasing_fidelity(reg, "psi_minus", t, 0.4, 0.4)
    np.testing.assert_allclose(f_eq, 1.0, rtol=0, atol=1e-9)


def test_endor_transfer_is_unity():
    reg = make_register()
    for nucleus in (0, 1):
        for ms in (1, -1):
            assert abs(endor_transfer(reg, nucleus, ms) - 1.0) <= 1e-10


def test_hahn_echo_full_revival():
    reg = make_bare()
    i, j = reg.level(0, ()), reg.level(-1, ())
    for tau in (0.0, 0.21, 3.7):
        seq = hahn_echo_sequence(reg, i, j, tau)
        out = run_sequence(reg.pure_state(0, ()), seq)
        assert abs(out.population(0, ()) - 1.0) <= 1e-10


def test_rabi_curve_shape_and_power_scaling():
    reg = make_register()
    i, j = reg.level(0, (0, 0)), reg.level(-1, (0, 0))
    t = np.linspace(0.0, 2.0, 81)
    curve, omega = rabi_simulate(reg, "mw", i, j, t, power=1.0)
    assert curve.signal[0] == 0.0
    np.testing.assert_allclose(curve.signal,
                               np.sin(math.pi * omega * t) ** 2, atol=1e-12)
    assert abs(curve.signal.max() - 1.0) <= 1e-6  # unit contrast
    # Omega scales as sqrt(power)
    _, om4 = rabi_simulate(reg, "mw", i, j, t, power=4.0)
    assert abs(om4 - 2.0 * omega) <= 1e-12
    # RF: ten times weaker coupling needs exactly 100x the power
    a, b = reg.level(-1, (0, 0)), reg.level(-1, (1, 0))
    om_rf = rabi_frequency_mhz(reg, "rf", a, b, power=1.0)
    base = first_shell_tensor()
    weak = HyperfineTensor(0.1 * base.a_par_mhz, 0.1 * base.a_perp_mhz,
                           base.polar_deg, base.azimuth_deg)
    scaled = Register(SpinSystemSpec(
        field=FIELD_83, hyperfine=(weak, third_shell_tensor())))
    a2, b2 = scaled.level(-1, (0, 0)), scaled.level(-1, (1, 0))
    om_weak = rabi_frequency_mhz(scaled, "rf", a2, b2, power=100.0)
    assert abs(om_weak / om_rf - 1.0) <= 1e-9


def test_sequence_grammar_round_trip():
    reg = make_register()
    seq = (bell_sequence(reg, "psi_plus")
           + [Wait(0.5),
              Pulse("mw", reg.level(0, (0, 0)), reg.level(1, (0, 0)),
                    math.pi / 3, 0.25, duration_us=1.5)])
    text = format_sequence(seq)
    assert parse_sequence(text) == seq
    parsed = parse_sequence("# comment line\n\nWAIT 2.5\nMW 2 8 3.14 0\n")
    assert parsed == [Wait(2.5), Pulse("mw", 2, 8, 3.14, 0.0)]


def test_sequence_grammar_errors():
    cases = ["MW 0 1", "XX 0 1 1 0", "WAIT", "WAIT -2",
             "MW 0 0 1 0", "MW 0 1 1 0 foo=1", "MW 0 1 1 0 control=0:7"]
    for text in cases:
        with pytest.raises(ValidationError, match="line 1"):
            parse_sequence(text + "\n")


def test_run_sequence_rejects_foreign_items():
    reg = make_bare()
    with pytest.raises(ValidationError):
        run_sequence(reg.pure_state(0, ()), ["not a pulse"])
