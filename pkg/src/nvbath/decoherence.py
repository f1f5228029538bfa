"""Coherence decay models, fits, reciprocal-rate rules, and bath ensembles.

Free-induction decay is modeled as offset + amp * exp(-(t/T2*)^2) cos(dw t),
spin echo as offset + amp * exp(-(t/T2)^3). Two-spin register coherences are
labeled sq1/sq2 (single nucleus), phi (double quantum, phases add) and psi
(zero quantum, phases subtract).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constants import CONSTANTS, PhysicalConstants
from .errors import FitError, FlatSignalError, ValidationError

# ----- decay curves and models ------------------------------------------


@dataclass(frozen=True)
class DecayCurve:
    """Time samples (us), signal, optional per-point 1-sigma noise."""

    t_us: np.ndarray
    signal: np.ndarray
    sigma: np.ndarray = None

    def __post_init__(self):
        t = np.asarray(self.t_us, dtype=float)
        y = np.asarray(self.signal, dtype=float)
        if t.ndim != 1 or t.shape != y.shape:
            raise ValidationError("t and signal must be equal-length 1-D arrays")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
            raise ValidationError("curve contains non-finite values")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValidationError("time samples must be strictly increasing")
        object.__setattr__(self, "t_us", t)
        object.__setattr__(self, "signal", y)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != t.shape or np.any(s <= 0):
                raise ValidationError("sigma must be positive, same length as t")
            object.__setattr__(self, "sigma", s)


def fid_model(t, t2star_us, domega_rad_us, amplitude, offset):
    """Gaussian-envelope FID with a coherent beat."""
    t = np.asarray(t, dtype=float)
    return offset + amplitude * np.exp(-(t / t2star_us) ** 2) \
        * np.cos(domega_rad_us * t)


def echo_model(t, t2_us, amplitude, offset):
    """Cubic-exponent echo envelope."""
    t = np.asarray(t, dtype=float)
    return offset + amplitude * np.exp(-(t / t2_us) ** 3)


def _fid_jac(t, p):
    t2, w, a, _ = p
    env = np.exp(-(t / t2) ** 2)
    c, s = np.cos(w * t), np.sin(w * t)
    return np.column_stack([
        a * env * c * 2.0 * t ** 2 / t2 ** 3,
        -a * env * s * t,
        env * c,
        np.ones_like(t),
    ])


def _echo_jac(t, p):
    t2, a, _ = p
    env = np.exp(-(t / t2) ** 3)
    return np.column_stack([
        a * env * 3.0 * t ** 3 / t2 ** 4,
        env,
        np.ones_like(t),
    ])


def _tail_offset(y):
    k = max(3, len(y) // 10)
    return float(np.mean(y[-k:]))


def _time_scale_guess(t, y, offset, amp):
    target = abs(amp) / math.e
    dev = np.abs(y - offset)
    below = np.flatnonzero(dev < target)
    below = below[below > 0]
    if len(below):
        return max(float(t[below[0]]), float(t[1] if len(t) > 1 else 1.0))
    return float(t[-1]) / 2.0


def _fid_guess(t, y):
    offset = _tail_offset(y)
    amp = float(y[0] - offset)
    if amp == 0.0:
        amp = float(np.max(y) - offset) or 1.0
    # dominant beat frequency from the spectrum of the detrended signal
    yd = y - np.mean(y)
    if len(t) > 3:
        spec = np.abs(np.fft.rfft(yd))
        dt = float(t[1] - t[0])
        freqs = np.fft.rfftfreq(len(t), dt)
        k = int(np.argmax(spec[1:]) + 1)
        w = 2.0 * math.pi * float(freqs[k]) if spec[k] > 3.0 * spec[0] else 0.0
    else:
        w = 0.0
    return np.array([_time_scale_guess(t, y, offset, amp), w, amp, offset])


def _echo_guess(t, y):
    offset = _tail_offset(y)
    amp = float(y[0] - offset)
    if amp == 0.0:
        amp = float(np.max(y) - offset) or 1.0
    return np.array([_time_scale_guess(t, y, offset, amp), amp, offset])


MODELS = {
    "fid": {
        "names": ("t2star_us", "domega_rad_us", "amplitude", "offset"),
        "fn": lambda t, p: fid_model(t, *p),
        "jac": _fid_jac,
        "guess": _fid_guess,
        "positive": (0,),
    },
    "echo": {
        "names": ("t2_us", "amplitude", "offset"),
        "fn": lambda t, p: echo_model(t, *p),
        "jac": _echo_jac,
        "guess": _echo_guess,
        "positive": (0,),
    },
}

GRADIENT_TOL = 1e-10
STEP_TOL = 1e-12    # relative parameter change on an accepted step
SSR_TOL = 1e-12     # relative SSR improvement on an accepted step
MAX_ITER = 200
MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class DecayFit:
    """Fit result: parameter dict, 1-sigma uncertainties from the linearized
    covariance, residual sum of squares, and iteration diagnostics."""

    model: str
    params: dict
    sigmas: dict
    covariance: np.ndarray
    ssr: float
    n_iter: int
    gradient_norm: float

    def __getitem__(self, name):
        return self.params[name]


def fit_decay(curve: DecayCurve, model: str = "fid",
              initial=None) -> DecayFit:
    """Damped least squares (Levenberg-style) fit of a decay model.

    Deterministic given the curve and starting point: step acceptance and
    damping follow a fixed schedule. Converged when the gradient infinity
    norm falls below GRADIENT_TOL, or an accepted step changes parameters
    by less than STEP_TOL relatively, or improves the SSR by less than
    SSR_TOL relatively (noisy data stalls the gradient above its tolerance
    while the iterate has long stopped moving). Hitting MAX_ITER raises
    FitError carrying the last iterate.
    """
    if model not in MODELS:
        raise ValidationError(f"model must be one of {tuple(MODELS)}")
    spec = MODELS[model]
    t, y = curve.t_us, curve.signal
    npar = len(spec["names"])
    if len(t) < MIN_FIT_POINTS:
        raise ValidationError(
            f"need at least {MIN_FIT_POINTS} points to fit {model}")
    contrast = float(np.max(y) - np.min(y))
    if contrast <= 1e-12 * max(1.0, abs(float(np.mean(y)))):
        raise FlatSignalError("signal has no contrast; nothing to fit")
    w = 1.0 / curve.sigma if curve.sigma is not None else np.ones_like(y)

    p = np.array(spec["guess"](t, y) if initial is None else initial,
                 dtype=float)
    if p.shape != (npar,):
        raise ValidationError(f"initial guess must have {npar} entries")

    def ssr_of(params):
        r = w * (spec["fn"](t, params) - y)
        return float(r @ r), r

    ssr, r = ssr_of(p)
    lam = 1e-3
    gnorm = math.inf
    converged = False
    for it in range(1, MAX_ITER + 1):
        jac = w[:, None] * spec["jac"](t, p)
        grad = jac.T @ r
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= GRADIENT_TOL:
            converged = True
            break
        jtj = jac.T @ jac
        stepped = False
        delta = np.zeros(npar)
        for _ in range(40):
            try:
                delta = np.linalg.solve(
                    jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-12)),
                    -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            cand = p + delta
            bad = any(cand[i] <= 0 for i in spec["positive"])
            if not bad:
                ssr_new, r_new = ssr_of(cand)
                if ssr_new <= ssr:
                    rel_step = float(np.max(np.abs(delta)
                                            / np.maximum(np.abs(p), 1.0)))
                    rel_drop = (ssr - ssr_new) / max(ssr, 1e-300)
                    p, ssr, r = cand, ssr_new, r_new
                    lam = max(lam / 3.0, 1e-14)
                    stepped = True
                    if rel_step <= STEP_TOL or rel_drop <= SSR_TOL:
                        converged = True
                    break
            lam *= 3.0
        if not stepped:
            # damping saturated: the trust region shrank until the proposed
            # step was negligible, which is a step-size convergence
            rel_step = float(np.max(np.abs(delta)
                                    / np.maximum(np.abs(p), 1.0)))
            converged = rel_step <= math.sqrt(STEP_TOL)
            jac = w[:, None] * spec["jac"](t, p)
            gnorm = float(np.max(np.abs(jac.T @ r)))
            break
        if converged:
            break
    else:
        it = MAX_ITER

    if not converged and gnorm > GRADIENT_TOL:
        raise FitError(
            f"no convergence after {it} iterations (|grad| = {gnorm:.3e})",
            last_params=dict(zip(spec["names"], p)), gradient_norm=gnorm)

    jac = w[:, None] * spec["jac"](t, p)
    jtj = jac.T @ jac
    dof = max(len(t) - npar, 1)
    try:
        cov = np.linalg.inv(jtj) * (ssr / dof)
    except np.linalg.LinAlgError:
        cov = np.full((npar, npar), np.nan)
    sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return DecayFit(model=model,
                    params=dict(zip(spec["names"], p)),
                    sigmas=dict(zip(spec["names"], sig)),
                    covariance=cov, ssr=ssr, n_iter=it, gradient_norm=gnorm)


# ----- reciprocal-rate rules for two-spin coherences ---------------------


@dataclass(frozen=True)
class BellT2Result:
    """Dephasing times (us) of the phi/psi coherences predicted from the two
    single-quantum times. t_psi_us is None when the psi rate vanishes."""

    t_phi_us: float
    t_psi_us: float
    psi_unbounded: bool
    combine: str


def bell_t2star_from_sq(t_sq1_us: float, t_sq2_us: float,
                        combine: str = "linear") -> BellT2Result:
    """Combine single-quantum dephasing times into phi/psi times.

    linear: 1/T(phi) = 1/T(sq1) + 1/T(sq2), 1/T(psi) = |1/T(sq1) - 1/T(sq2)|.
    quadrature: same rules on squared rates.
    Equal inputs make the psi coherence decay-free: t_psi_us is returned as
    None with psi_unbounded set, never as a number.
    """
    if t_sq1_us <= 0 or t_sq2_us <= 0:
        raise ValidationError("dephasing times must be positive")
    if combine not in ("linear", "quadrature"):
        raise ValidationError("combine must be 'linear' or 'quadrature'")
    r1, r2 = 1.0 / t_sq1_us, 1.0 / t_sq2_us
    if combine == "linear":
        r_phi, r_psi = r1 + r2, abs(r1 - r2)
    else:
        r_phi = math.hypot(r1, r2)
        r_psi = math.sqrt(abs(r1 * r1 - r2 * r2))
    if r_psi == 0.0:
        return BellT2Result(t_phi_us=1.0 / r_phi, t_psi_us=None,
                            psi_unbounded=True, combine=combine)
    return BellT2Result(t_phi_us=1.0 / r_phi, t_psi_us=1.0 / r_psi,
                        psi_unbounded=False, combine=combine)


def bell_t2star_intervals(sq1, sq2, combine: str = "linear"):
    """Interval propagation of asymmetric uncertainties through the rules.

    sq1/sq2 are (value, err_minus, err_plus) in us. Returns
    {"phi": (lo, hi), "psi": (lo, hi_or_None)}; a psi upper bound of None
    means the rate interval reaches zero (unbounded time).
    """
    out = {}
    corners = []
    for (v, em, ep) in (sq1, sq2):
        if v - em <= 0:
            raise ValidationError("uncertainty interval crosses zero")
        corners.append((v - em, v + ep))
    vals_phi, vals_psi, unbounded = [], [], False
    for a in corners[0]:
        for b in corners[1]:
            res = bell_t2star_from_sq(a, b, combine)
            vals_phi.append(res.t_phi_us)
            if res.psi_unbounded:
                unbounded = True
            else:
                vals_psi.append(res.t_psi_us)
    # rate |r1 - r2| reaches zero whenever the rate intervals overlap
    lo1, hi1 = 1.0 / corners[0][1], 1.0 / corners[0][0]
    lo2, hi2 = 1.0 / corners[1][1], 1.0 / corners[1][0]
    if max(lo1, lo2) <= min(hi1, hi2):
        unbounded = True
    out["phi"] = (min(vals_phi), max(vals_phi))
    out["psi"] = (min(vals_psi) if vals_psi else math.inf,
                  None if unbounded else max(vals_psi))
    return out


# ----- bath-driven FID ensembles -----------------------------------------

COHERENCE_WEIGHTS = {
    "sq1": (1.0, 0.0),
    "sq2": (0.0, 1.0),
    "phi": (1.0, 1.0),
    "psi": (1.0, -1.0),
}

MIN_BATH_SAMPLES = 100


@dataclass(frozen=True)
class PairCouplings:
    """Bath-to-register couplings: c1/c2 in kHz from every bath spin to the
    two register nuclei (zero beyond the near radius)."""

    c1_khz: np.ndarray
    c2_khz: np.ndarray
    near_radius_angstrom: float

    def __post_init__(self):
        c1 = np.asarray(self.c1_khz, dtype=float)
        c2 = np.asarray(self.c2_khz, dtype=float)
        if c1.shape != c2.shape or c1.ndim != 1:
            raise ValidationError("coupling arrays must match in length")
        object.__setattr__(self, "c1_khz", c1)
        object.__setattr__(self, "c2_khz", c2)

    def __len__(self):
        return len(self.c1_khz)


def pair_couplings(positions, p1, p2, near_radius_angstrom: float = 10.0,
                   constants: PhysicalConstants = CONSTANTS) -> PairCouplings:
    """Nuclear-nuclear point-dipole couplings (kHz) from bath positions to
    two register nuclei at p1/p2, zeroed beyond the near radius.

    The scalar magnitude K/r^3 is used (no angular factor): couplings to both
    nuclei share a sign, which is what makes the linear rate rule for the phi
    coherence hold in the dilute ensemble.
    """
    if near_radius_angstrom <= 0:
        raise ValidationError("near radius must be positive")
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    k = constants.nn_dipolar_khz_a3
    out = []
    for p in (np.asarray(p1, dtype=float), np.asarray(p2, dtype=float)):
        d = np.linalg.norm(pos - p[None, :], axis=1)
        if np.any(d < 1e-9):
            raise ValidationError("a bath site coincides with a register nucleus")
        out.append(np.where(d <= near_radius_angstrom, k / d ** 3, 0.0))
    return PairCouplings(c1_khz=out[0], c2_khz=out[1],
                         near_radius_angstrom=float(near_radius_angstrom))


def simulate_bath_fid(couplings: PairCouplings, kind: str, t_us,
                      n_samples: int = 1000, seed: int = 0,
                      occupancy: float = None) -> DecayCurve:
    """Ensemble-averaged coherence envelope under random bath spins.

    Each sample draws bath spin orientations m = +-1/2 (and, when occupancy
    is given, an independent Bernoulli site occupation); the envelope is the
    ensemble mean of cos((w1*dw1 + w2*dw2) t) with the (w1, w2) weights of
    the coherence kind. The envelope is exactly 1 at t = 0.
    """
    kind = kind.lower()
    if kind not in COHERENCE_WEIGHTS:
        raise ValidationError(f"kind must be one of {tuple(COHERENCE_WEIGHTS)}")
    if n_samples < MIN_BATH_SAMPLES:
        raise ValidationError(f"need at least {MIN_BATH_SAMPLES} samples")
    t = np.asarray(t_us, dtype=float)
    if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0) or t[0] < 0:
        raise ValidationError("time grid must be increasing and nonnegative")
    w1, w2 = COHERENCE_WEIGHTS[kind]
    # angular frequency per site in rad/us
    omega = 2.0e-3 * math.pi * (w1 * couplings.c1_khz + w2 * couplings.c2_khz)

    gen = np.random.Generator(np.random.Philox(key=int(seed)))
    nk = len(couplings)
    spins = np.where(gen.random((n_samples, nk)) < 0.5, 0.5, -0.5)
    if occupancy is not None:
        if not 0.0 <= occupancy <= 1.0:
            raise ValidationError("occupancy must lie in [0, 1]")
        spins = spins * (gen.random((n_samples, nk)) < occupancy)
    env = _kernels.phase_envelope(spins, omega, t)
    return DecayCurve(t_us=t, signal=env)


def fit_envelope_rate(curve: DecayCurve, floor: float = 0.05) -> float:
    """Exponential rate (1/us) of an ensemble envelope.

    One-parameter least squares of exp(-r t) in linear space (Gauss-Newton,
    log-space seed restricted to points above the floor); robust to the
    near-zero Monte-Carlo tail where log fits blow up.
    """
    t, y = curve.t_us, curve.signal
    m = (y > floor) & (t > 0)
    if m.sum() < 2:
        raise ValidationError("envelope has too few points above the floor")
    r = float(max((t[m] @ (-np.log(y[m]))) / (t[m] @ t[m]), 1e-12))
    for _ in range(80):
        f = np.exp(-r * t)
        jac = -t * f
        dr = float((jac @ (y - f)) / (jac @ jac))
        r += dr
        if abs(dr) <= 1e-12 * max(r, 1e-12):
            break
    if r <= 0:
        raise FitError("envelope rate fit collapsed to a non-positive rate",
                       last_params={"rate_per_us": r})
    return r


# ----- concentration scaling of echo T2 ----------------------------------

# Reference echo T2 points (n, T2 in ms). The low-concentration sample is
# labeled inconsistently at the source (0.35% in one place, 0.3% in another);
# 0.0035 is used here and the discrepancy is surfaced by format_scaling_report.
REFERENCE_T2_SCALING_POINTS = ((0.011, 0.65), (0.0035, 1.8))
CONCENTRATION_LABEL_NOTE = (
    "note: the n=0.0035 dataset is labeled 0.35% and 0.3% in different "
    "places at the source; 0.0035 is used here")


@dataclass(frozen=True)
class ScalingModel:
    """T2 = c / n fit: coefficient (T2 unit x concentration), 1-sigma, and
    the fitting space used."""

    c: float
    sigma_c: float
    space: str
    n_points: int

    def predict(self, n):
        return self.c / np.asarray(n, dtype=float)


def fit_t2_scaling(n_values, t2_values, space: str = "log") -> ScalingModel:
    """Fit the inverse-concentration law T2 = c/n.

    space="log" minimizes residuals of log T2 (scale-invariant, default);
    space="linear" minimizes absolute T2 residuals.
    """
    n = np.asarray(n_values, dtype=float)
    t2 = np.asarray(t2_values, dtype=float)
    if n.shape != t2.shape or n.ndim != 1 or len(n) < 2:
        raise ValidationError("need >= 2 (n, T2) pairs of equal length")
    if np.any(n <= 0) or np.any(t2 <= 0):
        raise ValidationError("concentrations and T2 must be positive")
    if space == "log":
        logc = np.log(t2) + np.log(n)
        c = float(np.exp(np.mean(logc)))
        resid = logc - np.mean(logc)
        dof = max(len(n) - 1, 1)
        sigma_logc = math.sqrt(float(resid @ resid) / dof / len(n))
        sigma_c = c * sigma_logc
    elif space == "linear":
        x = 1.0 / n
        c = float((t2 @ x) / (x @ x))
        resid = t2 - c * x
        dof = max(len(n) - 1, 1)
        sigma_c = math.sqrt(float(resid @ resid) / dof / float(x @ x))
    else:
        raise ValidationError("space must be 'log' or 'linear'")
    return ScalingModel(c=c, sigma_c=sigma_c, space=space, n_points=len(n))


def format_scaling_report(model: ScalingModel, n_values, t2_values) -> str:
    """Human-readable report of a T2 = c/n fit, with per-point residuals."""
    lines = [f"T2 = c/n fit ({model.space} space, {model.n_points} points)",
             f"  c = {model.c:.6g} +- {model.sigma_c:.2g}"]
    uses_label_point = False
    for n, t2 in zip(n_values, t2_values):
        pred = model.predict(n)
        lines.append(f"  n={n:g}: T2={t2:g}, predicted {pred:.4g} "
                     f"({(pred - t2) / t2 * 100:+.1f}%)")
        if abs(n - 0.0035) < 1e-12:
            uses_label_point = True
    if uses_label_point:
        lines.append("  " + CONCENTRATION_LABEL_NOTE)
    return "\n".join(lines)
