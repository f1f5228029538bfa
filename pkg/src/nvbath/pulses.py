"""Density-matrix simulation of selective MW/RF pulse sequences.

States live in the eigenbasis of the full spin Hamiltonian. Each eigenstate
carries a label (m_s, nuclear bits) from its dominant product-state
character; bit 0 means m_I = +1/2. Ideal pulses are instantaneous two-level
rotations exp(-i theta/2 (cos phi X + sin phi Y)) on a target eigenstate
pair; finite-duration pulses evolve under the static Hamiltonian plus the
rotating-wave drive via a matrix exponential (counter-rotating terms
neglected). Free evolution accumulates exact eigenphases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (AmbiguousTransitionError, ValidationError)
from .spinsys import (SX1, SY1, SZ1, SpinSystemSpec, build_hamiltonian,
                      diagonalize)

DEGENERACY_TOL_MHZ = 1e-9

# below this product-state overlap, a level's label does not describe the
# eigenstate (near-degenerate mixing, e.g. equivalent nuclei) and selective
# label addressing is refused
# Addressing gate: a level's assigned label must dominate the runner-up
# candidate by MIN_LABEL_CONTRAST and carry at least MIN_LABEL_OVERLAP of
# the state.  Symmetry-mixed levels (equivalent nuclei) sit near 50/50
# between two labels (contrast ~ 1); cleanly assigned levels with merely
# conditioned nuclear axes keep contrast well above 2.
MIN_LABEL_OVERLAP = 0.5
MIN_LABEL_CONTRAST = 1.5

CHANNELS = ("mw", "rf")

# default Rabi calibration Omega = kappa * sqrt(power) (MW) or
# kappa * |A_eff| * sqrt(power) (RF, hyperfine-enhanced)
KAPPA_MW_MHZ = 1.0
KAPPA_RF_PER_MHZ = 1e-3


def _spinor_along(u):
    """+1/2 and -1/2 spin-1/2 eigenvectors along the unit vector u."""
    theta = math.acos(max(-1.0, min(1.0, float(u[2]))))
    phi = math.atan2(float(u[1]), float(u[0]))
    up = np.array([math.cos(theta / 2.0),
                   math.sin(theta / 2.0) * np.exp(1j * phi)], dtype=complex)
    dn = np.array([-math.sin(theta / 2.0) * np.exp(-1j * phi),
                   math.cos(theta / 2.0)], dtype=complex)
    return up, dn


def _orient(u, preferred):
    """Flip u so it points along the first preferred direction it is not
    perpendicular to (deterministic sign convention)."""
    for ref in preferred:
        d = float(u @ ref)
        if abs(d) > 1e-9:
            return u if d > 0 else -u
    return u


class Register:
    """Eigensystem of a SpinSystemSpec with adapted product-state labels.

    Labels are (m_s, bits) with m_s in {+1, 0, -1} and one bit per nucleus.
    The comparison basis quantizes the electron along the ZFS axis and each
    nucleus along its local effective field in that manifold (the hyperfine
    row for m_s = +-1, the external field for m_s = 0); bit 0 is m = +1/2
    along that axis. Each eigenstate takes the label of its dominant
    comparison state; the achieved overlap is kept per level so that
    addressing through a badly mixed level can be refused.
    """

    def __init__(self, spec: SpinSystemSpec):
        self.spec = spec
        self.eig = diagonalize(build_hamiltonian(spec))
        self.n_nuclei = spec.n_nuclei
        self.dim = spec.dim
        self.labels, self.label_overlap, self.label_contrast = \
            self._assign_labels()
        self.index = {lab: k for k, lab in enumerate(self.labels)}

    def _electron_states(self):
        axis = np.asarray(self.spec.zfs.axis, dtype=float)
        s_axis = axis[0] * SX1 + axis[1] * SY1 + axis[2] * SZ1
        vals_e, vecs_e = np.linalg.eigh(s_axis)
        return {int(round(vals_e[k])): vecs_e[:, k].astype(complex)
                for k in range(3)}

    def _nuclear_spinors(self, evec):
        """Exact manifold spinors of each nucleus from its own
        single-nucleus problem (second-order pseudo-fields included).

        Returns spinors[q][ms] = (bit0 vector, bit1 vector)."""
        axis = np.asarray(self.spec.zfs.axis, dtype=float)
        bdir = np.asarray(self.spec.field.direction, dtype=float)
        b_mhz = self.spec.field.gauss * \
            self.spec.constants.nuclear_mhz_per_gauss
        spinors = []
        for q in range(self.n_nuclei):
            one = SpinSystemSpec(zfs=self.spec.zfs, field=self.spec.field,
                                 hyperfine=(self.spec.hyperfine[q],),
                                 constants=self.spec.constants)
            vecs = diagonalize(build_hamiltonian(one)).vectors
            proj = {ms: np.kron(evec[ms].conj(), np.eye(2))
                    for ms in (1, 0, -1)}  # 2x6: strips the electron factor
            # manifold membership by electron character, two levels each
            claims = sorted(
                ((float(np.linalg.norm(proj[ms] @ vecs[:, k]) ** 2), ms, k)
                 for ms in (1, 0, -1) for k in range(6)), reverse=True)
            members = {1: [], 0: [], -1: []}
            taken = set()
            for _, ms, k in claims:
                if k not in taken and len(members[ms]) < 2:
                    members[ms].append(k)
                    taken.add(k)
            by_ms = {}
            a = self.spec.hyperfine[q].tensor(axis)
            for ms in (1, 0, -1):
                c = [proj[ms] @ vecs[:, k] for k in sorted(members[ms])]
                c[0] = c[0] / np.linalg.norm(c[0])
                c[1] = c[1] - (c[0].conj() @ c[1]) * c[0]
                c[1] = c[1] / np.linalg.norm(c[1])
                # bit 0 follows the first-order local-field axis
                p = ms * (axis @ a) - b_mhz * bdir
                norm = np.linalg.norm(p)
                u = p / norm if norm > 1e-12 else axis.copy()
                u = _orient(u, (bdir, axis, np.array([0.0, 0.0, 1.0])))
                up = _spinor_along(u)[0]
                if abs(up.conj() @ c[1]) ** 2 > abs(up.conj() @ c[0]) ** 2:
                    c = [c[1], c[0]]
                by_ms[ms] = (c[0], c[1])
            spinors.append(by_ms)
        return spinors

    def _comparison_states(self):
        n = self.n_nuclei
        evec = self._electron_states()
        spinors = self._nuclear_spinors(evec)
        states, labels = [], []
        for ms in (1, 0, -1):
            for nn in range(2 ** n):
                bits = tuple((nn >> (n - 1 - q)) & 1 for q in range(n))
                v = evec[ms]
                for q, b in enumerate(bits):
                    v = np.kron(v, spinors[q][ms][b])
                states.append(v)
                labels.append((ms, bits))
        return np.array(states).T, labels  # columns are comparison states

    def _assign_labels(self):
        basis, prod_labels = self._comparison_states()
        overlap = np.abs(basis.conj().T @ self.eig.vectors) ** 2
        order = np.dstack(np.unravel_index(
            np.argsort(overlap, axis=None)[::-1], overlap.shape))[0]
        labels = [None] * self.dim
        fidelity = np.zeros(self.dim)
        contrast = np.zeros(self.dim)
        used_p = [False] * self.dim
        for p, k in order:
            if labels[k] is None and not used_p[p]:
                labels[k] = prod_labels[p]
                fidelity[k] = overlap[p, k]
                runner_up = max(overlap[pp, k] for pp in range(self.dim)
                                if pp != p)
                contrast[k] = overlap[p, k] / max(runner_up, 1e-300)
                used_p[p] = True
        return labels, fidelity, contrast

    def level(self, ms: int, bits) -> int:
        """Eigenstate index of the labeled level."""
        key = (ms, tuple(int(b) for b in bits))
        if key not in self.index:
            raise ValidationError(f"no level labeled {key}")
        return self.index[key]

    def freq_mhz(self, i: int, j: int) -> float:
        return float(self.eig.values[j] - self.eig.values[i])

    def pure_state(self, ms: int, bits) -> "RegisterState":
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        k = self.level(ms, bits)
        rho[k, k] = 1.0
        return RegisterState(self, rho)

    def mixed_nuclei_state(self, ms: int = 0) -> "RegisterState":
        """Default initialization: chosen m_s manifold, maximally mixed
        nuclei."""
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        w = 1.0 / 2 ** self.n_nuclei
        for k, (m, _) in enumerate(self.labels):
            if m == ms:
                rho[k, k] = w
        return RegisterState(self, rho)


class RegisterState:
    """Density matrix over the register eigenbasis."""

    def __init__(self, register: Register, rho: np.ndarray):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (register.dim, register.dim):
            raise ValidationError("density matrix has the wrong dimension")
        if np.linalg.norm(rho - rho.conj().T) > 1e-9:
            raise ValidationError("density matrix must be Hermitian")
        tr = float(np.real(np.trace(rho)))
        if abs(tr - 1.0) > 1e-9:
            raise ValidationError(f"density matrix trace {tr} != 1")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-9:
            raise ValidationError("density matrix must be positive")
        self.register = register
        self.rho = rho

    def evolved(self, unitary) -> "RegisterState":
        out = RegisterState.__new__(RegisterState)
        out.register = self.register
        out.rho = unitary @ self.rho @ unitary.conj().T
        return out

    def population(self, ms: int, bits) -> float:
        k = self.register.level(ms, bits)
        return float(np.real(self.rho[k, k]))

    def populations(self) -> dict:
        return {lab: float(np.real(self.rho[k, k]))
                for k, lab in enumerate(self.register.labels)}

    def fidelity(self, target_vector) -> float:
        v = np.asarray(target_vector, dtype=complex)
        return float(np.real(v.conj() @ self.rho @ v))

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


@dataclass(frozen=True)
class Pulse:
    """Selective pulse on an eigenstate pair.

    control, when given, is (qubit index, state bit) and is validated
    against the target labels: selectivity is inherent in eigenstate
    addressing, so the annotation is a checked assertion of the intended
    conditioning (filled/open control convention).
    """

    channel: str
    i: int
    j: int
    angle_rad: float
    phase_rad: float = 0.0
    duration_us: float = None
    control: tuple = None

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValidationError(f"channel must be one of {CHANNELS}")
        if self.i == self.j:
            raise ValidationError("target pair must be two distinct levels")
        if self.duration_us is not None and self.duration_us <= 0:
            raise ValidationError("pulse duration must be positive")
        if self.control is not None:
            q, s = self.control
            if q < 0 or s not in (0, 1):
                raise ValidationError(
                    "control must be (qubit index, state 0 or 1)")


@dataclass(frozen=True)
class Wait:
    """Free evolution segment."""

    t_us: float

    def __post_init__(self):
        if self.t_us < 0:
            raise ValidationError("wait time must be nonnegative")


def _channel_allows(channel: str, lab_a, lab_b) -> bool:
    ms_a, bits_a = lab_a
    ms_b, bits_b = lab_b
    flips = sum(x != y for x, y in zip(bits_a, bits_b))
    if channel == "mw":
        return abs(ms_a - ms_b) == 1 and flips == 0
    return ms_a == ms_b and flips == 1


def _validate_target(register: Register, pulse: Pulse):
    dim = register.dim
    if not (0 <= pulse.i < dim and 0 <= pulse.j < dim):
        raise ValidationError(f"target pair ({pulse.i}, {pulse.j}) out of range")
    lab_i = register.labels[pulse.i]
    lab_j = register.labels[pulse.j]
    bits_i, bits_j = lab_i[1], lab_j[1]
    for k in (pulse.i, pulse.j):
        if (register.label_overlap[k] < MIN_LABEL_OVERLAP
                or register.label_contrast[k] < MIN_LABEL_CONTRAST):
            raise AmbiguousTransitionError(
                f"level {k} is shared between product labels (overlap "
                f"{register.label_overlap[k]:.2f}, contrast "
                f"{register.label_contrast[k]:.2f}); its label does not "
                "identify a single addressable level")
    if not _channel_allows(pulse.channel, lab_i, lab_j):
        if pulse.channel == "mw":
            raise ValidationError(
                f"MW pulse must drive an electron transition preserving the "
                f"nuclei; got {lab_i} -> {lab_j}")
        raise ValidationError(
            f"RF pulse must flip exactly one nucleus within an electron "
            f"manifold; got {lab_i} -> {lab_j}")
    f_target = abs(register.freq_mhz(pulse.i, pulse.j))
    if f_target < DEGENERACY_TOL_MHZ:
        raise AmbiguousTransitionError(
            f"levels {pulse.i} and {pulse.j} are degenerate; the transition "
            "cannot be addressed selectively")
    # a resonant drive hits every same-channel transition at this frequency
    for p in range(dim):
        for q in range(p + 1, dim):
            if {p, q} == {pulse.i, pulse.j}:
                continue
            if not _channel_allows(pulse.channel, register.labels[p],
                                   register.labels[q]):
                continue
            if abs(abs(register.freq_mhz(p, q)) - f_target) \
                    < DEGENERACY_TOL_MHZ:
                raise AmbiguousTransitionError(
                    f"transition {pulse.i}->{pulse.j} at "
                    f"{f_target:.6f} MHz collides with {p}->{q}; it cannot "
                    "be addressed selectively")
    if pulse.control is not None:
        q, s = pulse.control
        if not 0 <= q < register.n_nuclei:
            raise ValidationError(f"control references missing qubit {q}")
        if s not in (0, 1):
            raise ValidationError("control state must be 0 or 1")
        if bits_i[q] != s or bits_j[q] != s:
            raise ValidationError(
                f"control {q}:{s} contradicts the target labels "
                f"{bits_i} / {bits_j}")


def pulse_unitary(register: Register, pulse: Pulse) -> np.ndarray:
    """Unitary of one pulse in the register eigenbasis."""
    _validate_target(register, pulse)
    dim = register.dim
    i, j = pulse.i, pulse.j
    th, ph = pulse.angle_rad, pulse.phase_rad
    if pulse.duration_us is None:
        u = np.eye(dim, dtype=complex)
        c, s = math.cos(th / 2.0), math.sin(th / 2.0)
        u[i, i] = c
        u[j, j] = c
        u[i, j] = -1j * s * np.exp(-1j * ph)
        u[j, i] = -1j * s * np.exp(1j * ph)
        return u
    # finite duration: rotating-wave drive plus static phases
    tau = pulse.duration_us
    f_drive = register.freq_mhz(i, j)
    omega_cyc = th / (2.0 * math.pi * tau)  # Rabi frequency in MHz
    lam = register.eig.values.astype(complex)
    h = np.diag(lam)
    h[j, j] -= f_drive
    h[i, j] += 0.5 * omega_cyc * np.exp(-1j * ph)
    h[j, i] += 0.5 * omega_cyc * np.exp(1j * ph)
    vals, vecs = np.linalg.eigh(h)
    u_rwa = vecs @ np.diag(np.exp(-2j * math.pi * vals * tau)) @ vecs.conj().T
    frame = np.ones(dim, dtype=complex)
    frame[j] = np.exp(-2j * math.pi * f_drive * tau)
    return frame[:, None] * u_rwa


def free_unitary(register: Register, t_us: float,
                 nuclear_detunings_mhz=None) -> np.ndarray:
    """Free-evolution phases; optional per-nucleus detuning adds
    -2 pi * delta_q * m_q * t to each labeled level (m = +-1/2)."""
    phases = -2.0 * math.pi * register.eig.values * t_us
    if nuclear_detunings_mhz is not None:
        det = np.asarray(nuclear_detunings_mhz, dtype=float)
        if det.shape != (register.n_nuclei,):
            raise ValidationError("one detuning per nucleus required")
        for k, (_, bits) in enumerate(register.labels):
            m = np.array([0.5 if b == 0 else -0.5 for b in bits])
            phases[k] -= 2.0 * math.pi * float(det @ m) * t_us
    return np.diag(np.exp(1j * phases))


def apply_pulse(state: RegisterState, pulse: Pulse) -> RegisterState:
    return state.evolved(pulse_unitary(state.register, pulse))


def run_sequence(state: RegisterState, items,
                 nuclear_detunings_mhz=None) -> RegisterState:
    """Apply pulses and free-evolution segments in order."""
    for item in items:
        if isinstance(item, Pulse):
            state = state.evolved(pulse_unitary(state.register, item))
        elif isinstance(item, Wait):
            state = state.evolved(free_unitary(state.register, item.t_us,
                                               nuclear_detunings_mhz))
        else:
            raise ValidationError(f"sequence items must be Pulse or Wait, "
                                  f"got {type(item).__name__}")
    return state


# ----- sequence file grammar ---------------------------------------------
#   MW|RF  target_i  target_j  angle_rad  phase_rad
#          [control=qubit:state] [dur=t_us]
#   WAIT   t_us


def parse_sequence(text: str):
    items = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0].lower()
        try:
            if kind == "wait":
                if len(tok) != 2:
                    raise ValueError("WAIT takes exactly one duration")
                items.append(Wait(float(tok[1])))
                continue
            if kind not in CHANNELS:
                raise ValueError(f"unknown channel {tok[0]!r}")
            control, duration = None, None
            while tok and "=" in tok[-1]:
                key, _, val = tok[-1].partition("=")
                if key == "control":
                    q, s = val.split(":")
                    control = (int(q), int(s))
                elif key == "dur":
                    duration = float(val)
                else:
                    raise ValueError(f"unknown option {key!r}")
                tok = tok[:-1]
            if len(tok) != 5:
                raise ValueError("expected: channel i j angle_rad phase_rad")
            items.append(Pulse(channel=kind, i=int(tok[1]), j=int(tok[2]),
                               angle_rad=float(tok[3]),
                               phase_rad=float(tok[4]),
                               duration_us=duration, control=control))
        except (ValueError, ValidationError) as exc:
            raise ValidationError(f"sequence line {ln}: {exc}") from exc
    return items


def format_sequence(items) -> str:
    lines = []
    for item in items:
        if isinstance(item, Wait):
            lines.append(f"WAIT {item.t_us:.17g}")
        else:
            s = (f"{item.channel.upper()} {item.i} {item.j} "
                 f"{item.angle_rad:.17g} {item.phase_rad:.17g}")
            if item.control is not None:
                s += f" control={item.control[0]}:{item.control[1]}"
            if item.duration_us is not None:
                s += f" dur={item.duration_us:.17g}"
            lines.append(s)
    return "\n".join(lines) + "\n"


# ----- canned experiments -------------------------------------------------


def endor_sequence(register: Register, nucleus: int = 0, ms: int = -1):
    """pi(MW) - pi(RF) - pi(MW): map the electron down, flip one nucleus,
    map the electron back."""
    n = register.n_nuclei
    zeros = (0,) * n
    flipped = tuple(1 if q == nucleus else 0 for q in range(n))
    a0 = register.level(0, zeros)
    b0 = register.level(ms, zeros)
    b1 = register.level(ms, flipped)
    a1 = register.level(0, flipped)
    return [Pulse("mw", a0, b0, math.pi),
            Pulse("rf", b0, b1, math.pi),
            Pulse("mw", b1, a1, math.pi)]


def endor_transfer(register: Register, nucleus: int = 0, ms: int = -1) -> float:
    """Population arriving in the nuclear-flipped level after the ENDOR
    sequence from an ideal |0, 0...0> start (1.0 for ideal pulses)."""
    n = register.n_nuclei
    state = register.pure_state(0, (0,) * n)
    state = run_sequence(state, endor_sequence(register, nucleus, ms))
    flipped = tuple(1 if q == nucleus else 0 for q in range(n))
    return state.population(0, flipped)


def hahn_echo_sequence(register: Register, i: int, j: int, tau_us: float,
                       channel: str = "mw"):
    """pi/2 - tau - pi - tau - pi/2 on one transition."""
    half = math.pi / 2.0
    return [Pulse(channel, i, j, half), Wait(tau_us),
            Pulse(channel, i, j, math.pi), Wait(tau_us),
            Pulse(channel, i, j, half)]


BELL_VARIANTS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


def bell_sequence(register: Register, variant: str, ms: int = -1):
    """Two-pulse generation circuit of a Bell state of two nuclear qubits
    within one electron manifold, starting from |ms, 00>.

    A pi/2 splits |00>/|10>, then a conditional pi maps the second qubit;
    pulse phases select the variant sign.
    """
    if register.n_nuclei != 2:
        raise ValidationError("Bell circuits need exactly 2 nuclear qubits")
    if variant not in BELL_VARIANTS:
        raise ValidationError(f"variant must be one of {BELL_VARIANTS}")
    l00 = register.level(ms, (0, 0))
    l01 = register.level(ms, (0, 1))
    l10 = register.level(ms, (1, 0))
    l11 = register.level(ms, (1, 1))
    half = math.pi / 2.0
    phase1 = math.pi if variant in ("phi_plus", "psi_minus") else 0.0
    if variant.startswith("phi"):
        return [Pulse("rf", l00, l10, half, phase1),
                Pulse("rf", l10, l11, math.pi, 0.0, control=(0, 1))]
    return [Pulse("rf", l00, l10, half, phase1),
            Pulse("rf", l00, l01, math.pi, 0.0, control=(0, 0))]


def bell_detect_sequence(register: Register, variant: str, ms: int = -1):
    """Inverse of the generation circuit (maps the Bell state back to |00>)."""
    gen = bell_sequence(register, variant, ms)
    return [Pulse(p.channel, p.i, p.j, -p.angle_rad, p.phase_rad, None,
                  p.control) for p in reversed(gen)]


def bell_target_vector(register: Register, variant: str, ms: int = -1):
    v = np.zeros(register.dim, dtype=complex)
    if variant in ("phi_plus", "phi_minus"):
        a, b = register.level(ms, (0, 0)), register.level(ms, (1, 1))
        sign = 1.0 if variant == "phi_plus" else -1.0
    elif variant in ("psi_plus", "psi_minus"):
        a, b = register.level(ms, (0, 1)), register.level(ms, (1, 0))
        sign = 1.0 if variant == "psi_plus" else -1.0
    else:
        raise ValidationError(f"variant must be one of {BELL_VARIANTS}")
    v[a] = 1.0 / math.sqrt(2.0)
    v[b] = sign / math.sqrt(2.0)
    return v


def bell_prepare_and_fidelity(register: Register, variant: str,
                              ms: int = -1):
    """Run the generation circuit from |ms, 00>; returns (state, fidelity
    against the ideal Bell state, detection probability of the round trip).
    """
    state = register.pure_state(ms, (0, 0))
    state = run_sequence(state, bell_sequence(register, variant, ms))
    fid = state.fidelity(bell_target_vector(register, variant, ms))
    back = run_sequence(state, bell_detect_sequence(register, variant, ms))
    p00 = back.population(ms, (0, 0))
    return state, fid, p00


def bell_dephasing_fidelity(register: Register, variant: str, t_us,
                            detuning1_mhz: float, detuning2_mhz: float,
                            ms: int = -1) -> np.ndarray:
    """Fidelity of an ideally prepared Bell state after free evolution with
    per-nucleus detunings: phi variants beat at the sum frequency, psi
    variants at the difference (stationary under common-mode detuning)."""
    t = np.asarray(t_us, dtype=float)
    target = bell_target_vector(register, variant, ms)
    rho0 = np.outer(target, target.conj())
    # detuning phases only; the deterministic eigenphases are removed the
    # way a rotating-frame readout removes them
    l_a = register.level(ms, (0, 0) if variant.startswith("phi") else (0, 1))
    l_b = register.level(ms, (1, 1) if variant.startswith("phi") else (1, 0))
    out = np.empty_like(t)
    for idx, tt in enumerate(t):
        m_a = np.array([0.5 if b == 0 else -0.5
                        for b in register.labels[l_a][1]])
        m_b = np.array([0.5 if b == 0 else -0.5
                        for b in register.labels[l_b][1]])
        det = np.array([detuning1_mhz, detuning2_mhz])
        rel = 2.0 * math.pi * float(det @ (m_a - m_b)) * tt
        rho = rho0.copy()
        rho[l_a, l_b] *= np.exp(-1j * rel)
        rho[l_b, l_a] *= np.exp(1j * rel)
        out[idx] = float(np.real(target.conj() @ rho @ target))
    return out


# ----- Rabi oscillations --------------------------------------------------


def rabi_frequency_mhz(register: Register, channel: str, i: int, j: int,
                       power: float = 1.0, kappa: float = None) -> float:
    """Rabi frequency of a driven transition.

    RF transitions are hyperfine-enhanced: Omega = kappa * |A_eff| * sqrt(P)
    with |A_eff| the secular hyperfine magnitude of the flipped nucleus, so
    a 10x smaller coupling needs exactly 100x the power for the same Omega.
    MW transitions use Omega = kappa * sqrt(P).
    """
    if power <= 0:
        raise ValidationError("power must be positive")
    if channel not in CHANNELS:
        raise ValidationError(f"channel must be one of {CHANNELS}")
    if channel == "mw":
        k = KAPPA_MW_MHZ if kappa is None else kappa
        return k * math.sqrt(power)
    bits_i = register.labels[i][1]
    bits_j = register.labels[j][1]
    flipped = [q for q, (a, b) in enumerate(zip(bits_i, bits_j)) if a != b]
    if len(flipped) != 1:
        raise ValidationError("RF Rabi needs a single-nucleus transition")
    tens = register.spec.hyperfine[flipped[0]]
    a_eff = tens.secular_magnitude(np.asarray(register.spec.zfs.axis))
    k = KAPPA_RF_PER_MHZ if kappa is None else kappa
    return k * a_eff * math.sqrt(power)


def rabi_simulate(register: Register, channel: str, i: int, j: int, t_us,
                  power: float = 1.0, kappa: float = None):
    """Resonantly driven two-level population transfer: returns the
    population of level j versus drive duration, sin^2(pi Omega t)."""
    from .decoherence import DecayCurve  # local import to avoid a cycle
    _validate_target(register, Pulse(channel, i, j, math.pi))
    t = np.asarray(t_us, dtype=float)
    omega = rabi_frequency_mhz(register, channel, i, j, power, kappa)
    pop = np.sin(math.pi * omega * t) ** 2
    return DecayCurve(t_us=t, signal=pop), omega
