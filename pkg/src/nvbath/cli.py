"""Command line interface.

Subcommands: spectrum, linewidth, fit, bath, pulse. Options can come from a
JSON config file (--config); explicit flags override config values. Every
CSV written starts with three comment lines (tool version, a 12-hex digest
of the effective configuration, the seed) and contains no timestamps, so
reruns with equal inputs are byte-identical.

Exit codes: 0 success, 2 invalid usage or malformed input (messages name the
offending line where there is one), 3 numerical failure (non-convergent or
degenerate fits).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .decoherence import DecayCurve, fit_decay, MODELS
from .errors import FitError, ResourceLimitError, ValidationError
from .lattice import (classify_shells, generate_lattice, sample_bath,
                      shell_summary)
from .linewidth import (DIPOLAR_COEFF_CM6, dipolar_second_moment_sum,
                        linewidth_curve)
from .pulses import (BELL_VARIANTS, Register, bell_dephasing_fidelity,
                     bell_prepare_and_fidelity, endor_transfer,
                     parse_sequence, rabi_simulate, run_sequence)
from .spinsys import (HyperfineTensor, SpinSystemSpec, ZeemanField,
                      ZfsParams, build_hamiltonian, diagonalize,
                      esr_transitions, first_shell_tensor, synth_spectrum,
                      third_shell_tensor)
from . import svgplot

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


# ----- shared plumbing ----------------------------------------------------


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") \
            from None
    if not isinstance(cfg, dict):
        raise ValidationError(f"{path}: top level must be a JSON object")
    return cfg


def _effective(defaults: dict, config: dict, overrides: dict,
               command: str) -> dict:
    unknown = sorted(set(config) - set(defaults))
    if unknown:
        raise ValidationError(
            f"unknown config keys for {command}: {', '.join(unknown)}")
    out = dict(defaults)
    out.update(config)
    out.update({k: v for k, v in overrides.items() if v is not None})
    out["command"] = command
    return out


def _config_digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"),
                      default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _out_dir(args) -> str:
    d = args.out_dir or os.environ.get("NVBATH_OUT_DIR") or "."
    os.makedirs(d, exist_ok=True)
    return d


def _fmt_cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def _write_csv(path, columns, rows, digest, seed, extra_comments=()):
    lines = [f"# tool: nvbath {__version__}",
             f"# config: {digest}",
             f"# seed: {seed}"]
    lines.extend(f"# {c}" for c in extra_comments)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt_cell(c) for c in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _pmap(fn, items, threads: int):
    """Order-preserving map, threaded when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _parse_floats(text: str, what: str):
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"{what} must be comma-separated numbers, "
                              f"got {text!r}") from None
    if not vals:
        raise ValidationError(f"{what} is empty")
    return vals


def read_decay_csv(path) -> DecayCurve:
    """Parse t_us,signal[,sigma] rows; an optional single header row and
    '#' comments are skipped. Bad rows are reported with their line number.
    """
    t, y, s = [], [], []
    ncols = None
    saw_data = False
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    with fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) not in (2, 3):
                raise ValidationError(
                    f"{path}: line {ln}: expected 2 or 3 columns, "
                    f"got {len(parts)}")
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                if not saw_data:
                    continue  # header row
                raise ValidationError(
                    f"{path}: line {ln}: non-numeric value in {line!r}") \
                    from None
            if ncols is None:
                ncols = len(vals)
            elif len(vals) != ncols:
                raise ValidationError(
                    f"{path}: line {ln}: expected {ncols} columns, "
                    f"got {len(vals)}")
            saw_data = True
            t.append(vals[0])
            y.append(vals[1])
            if ncols == 3:
                s.append(vals[2])
    if not saw_data:
        raise ValidationError(f"{path}: no data rows")
    sigma = np.asarray(s) if s else None
    return DecayCurve(t_us=np.asarray(t), signal=np.asarray(y), sigma=sigma)


# ----- system construction ------------------------------------------------

_SYSTEM_DEFAULTS = {
    "field_gauss": 83.0,
    "field_direction": [1.0, 1.0, 1.0],
    "zfs_mhz": 2870.0,
    "zfs_axis": [1.0, 1.0, 1.0],
    "nuclei": [],
}


def _system_from_config(cfg) -> SpinSystemSpec:
    zfs = ZfsParams.along(cfg["zfs_axis"], float(cfg["zfs_mhz"]))
    fld = ZeemanField.along(cfg["field_direction"], float(cfg["field_gauss"]))
    nuclei = []
    for k, item in enumerate(cfg.get("nuclei") or []):
        if not isinstance(item, dict):
            raise ValidationError(f"nuclei[{k}] must be a JSON object")
        if "shell" in item:
            shell = item["shell"]
            if shell == 1:
                nuclei.append(
                    first_shell_tensor(float(item.get("azimuth_deg", 0.0))))
            elif shell == 3:
                nuclei.append(third_shell_tensor())
            else:
                raise ValidationError(
                    f"nuclei[{k}]: no built-in tensor for shell {shell}; "
                    "give a_par_mhz and a_perp_mhz instead")
        else:
            missing = [key for key in ("a_par_mhz", "a_perp_mhz")
                       if key not in item]
            if missing:
                raise ValidationError(
                    f"nuclei[{k}]: missing {', '.join(missing)}")
            nuclei.append(HyperfineTensor(
                a_par_mhz=float(item["a_par_mhz"]),
                a_perp_mhz=float(item["a_perp_mhz"]),
                polar_deg=float(item.get("polar_deg", 0.0)),
                azimuth_deg=float(item.get("azimuth_deg", 0.0))))
    return SpinSystemSpec(zfs=zfs, field=fld, hyperfine=tuple(nuclei))


def _nuclei_from_flags(args):
    nuclei = None
    if args.first_shell is not None or args.third_shell:
        nuclei = []
        if args.first_shell is not None:
            for az in _parse_floats(args.first_shell, "--first-shell"):
                nuclei.append({"shell": 1, "azimuth_deg": az})
        for _ in range(args.third_shell or 0):
            nuclei.append({"shell": 3})
    return nuclei


def _add_system_flags(sp):
    sp.add_argument("--field", type=float, default=None, metavar="GAUSS",
                    help="field magnitude in Gauss")
    sp.add_argument("--first-shell", default=None, metavar="AZ[,AZ...]",
                    help="add nearest-neighbor nuclei at these azimuths (deg)")
    sp.add_argument("--third-shell", type=int, default=None, metavar="K",
                    help="add K nuclei of the 14 MHz isotropic class")


# ----- spectrum -----------------------------------------------------------

_SPECTRUM_DEFAULTS = dict(_SYSTEM_DEFAULTS, window_mhz=None, grid_mhz=None,
                          fwhm_mhz=1.0, intensity_floor=1e-4)


def cmd_spectrum(args) -> int:
    overrides = {
        "field_gauss": args.field,
        "nuclei": _nuclei_from_flags(args),
        "window_mhz": (_parse_floats(args.window, "--window")
                       if args.window else None),
        "grid_mhz": (_parse_floats(args.grid, "--grid")
                     if args.grid else None),
        "fwhm_mhz": args.fwhm,
    }
    cfg = _effective(_SPECTRUM_DEFAULTS, _load_config(args.config),
                     overrides, "spectrum")
    digest = _config_digest(cfg)
    window = cfg["window_mhz"]
    if window is not None and len(window) != 2:
        raise ValidationError("window needs exactly two values: lo,hi")
    spec = _system_from_config(cfg)
    eig = diagonalize(build_hamiltonian(spec))
    lines = esr_transitions(spec, window=window,
                            floor=float(cfg["intensity_floor"]), eig=eig)
    if not lines:
        raise ValidationError("no transitions in the requested window")
    fwhm = float(cfg["fwhm_mhz"])
    grid = cfg["grid_mhz"]
    if grid is None:
        lo = min(l.freq_mhz for l in lines) - 5.0 * fwhm
        hi = max(l.freq_mhz for l in lines) + 5.0 * fwhm
        grid = (lo, hi, fwhm / 10.0)
    elif len(grid) != 3:
        raise ValidationError("grid needs exactly three values: "
                              "start,stop,step")
    spectrum = synth_spectrum(lines, grid, fwhm)

    out = _out_dir(args)
    lines_path = _write_csv(
        os.path.join(out, "spectrum_lines.csv"),
        ("freq_mhz", "intensity", "i", "j"),
        [(l.freq_mhz, l.intensity, l.i, l.j) for l in lines],
        digest, args.seed)
    spec_path = _write_csv(
        os.path.join(out, "spectrum.csv"),
        ("frequency_mhz", "intensity"),
        zip(spectrum.freq_mhz, spectrum.intensity),
        digest, args.seed)
    print(f"{len(lines)} lines; strongest "
          f"{max(lines, key=lambda l: l.intensity).freq_mhz:.4f} MHz")
    print(f"wrote {lines_path}")
    print(f"wrote {spec_path}")
    if args.plot:
        svg = svgplot.write_plot(
            os.path.join(out, "spectrum.svg"),
            [{"x": spectrum.freq_mhz, "y": spectrum.intensity}],
            xlabel="frequency (MHz)", ylabel="intensity",
            title="ESR spectrum")
        print(f"wrote {svg}")
    return EXIT_OK


# ----- linewidth ----------------------------------------------------------

_LINEWIDTH_DEFAULTS = {
    "concentrations": None,
    "n_min": 1e-4,
    "n_max": 1.0,
    "n_points": 25,
    "regime": "auto",
    "coeff_cm6": DIPOLAR_COEFF_CM6,
    "lattice_radius_angstrom": None,
}


def _read_overlay(path):
    """n,w_mhz measured points for the linewidth plot."""
    pts = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    with fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                if ln == 1:
                    continue  # header row
                raise ValidationError(
                    f"{path}: line {ln}: non-numeric value in {line!r}") \
                    from None
            if len(vals) != 2:
                raise ValidationError(
                    f"{path}: line {ln}: expected n,w_mhz")
            pts.append(vals)
    if not pts:
        raise ValidationError(f"{path}: no overlay points")
    return pts


def cmd_linewidth(args) -> int:
    overrides = {
        "concentrations": (_parse_floats(args.concentrations,
                                         "--concentrations")
                           if args.concentrations else None),
        "regime": args.regime,
        "lattice_radius_angstrom": args.from_lattice,
    }
    cfg = _effective(_LINEWIDTH_DEFAULTS, _load_config(args.config),
                     overrides, "linewidth")
    digest = _config_digest(cfg)
    if cfg["concentrations"] is not None:
        n_values = np.asarray(cfg["concentrations"], dtype=float)
    else:
        n_values = np.geomspace(float(cfg["n_min"]), float(cfg["n_max"]),
                                int(cfg["n_points"]))
    if np.any(n_values <= 0.0) or np.any(n_values > 1.0):
        raise ValidationError("concentrations must lie in (0, 1]")
    coeff = float(cfg["coeff_cm6"])
    if cfg["lattice_radius_angstrom"] is not None:
        sites = classify_shells(
            generate_lattice(float(cfg["lattice_radius_angstrom"])))
        coeff = dipolar_second_moment_sum(sites)
        print(f"lattice coefficient {coeff:.4e} cm^-6 "
              f"(reference {DIPOLAR_COEFF_CM6:.4e})")
    points = _pmap(
        lambda n: linewidth_curve([n], regime=cfg["regime"],
                                  coeff_cm6=coeff)[0],
        n_values, args.threads)
    out = _out_dir(args)
    path = _write_csv(
        os.path.join(out, "linewidth.csv"),
        ("n", "w_contact_mhz", "w_dipolar_mhz", "w_total_mhz", "t2star_us"),
        [(p.n, p.w_contact_mhz, p.w_dipolar_mhz, p.w_total_mhz, p.t2star_us)
         for p in points],
        digest, args.seed)
    print(f"wrote {path}")
    if args.plot:
        series = [{"x": n_values, "y": [p.w_contact_mhz for p in points],
                   "label": "contact"},
                  {"x": n_values, "y": [p.w_dipolar_mhz for p in points],
                   "label": "dipolar"}]
        if args.overlay:
            pts = _read_overlay(args.overlay)
            series.append({"x": [p[0] for p in pts],
                           "y": [p[1] for p in pts],
                           "label": "measured", "points": True})
        svg = svgplot.write_plot(
            os.path.join(out, "linewidth.svg"), series,
            xlabel="13C fraction", ylabel="FWHM (MHz)",
            title="inhomogeneous linewidth", logx=True, logy=True)
        print(f"wrote {svg}")
    return EXIT_OK


# ----- fit ----------------------------------------------------------------


def cmd_fit(args) -> int:
    cfg = _effective({"model": "fid"}, _load_config(args.config),
                     {"model": args.model}, "fit")
    digest = _config_digest(cfg)
    model = cfg["model"]
    if model not in MODELS:
        raise ValidationError(f"model must be one of {sorted(MODELS)}")
    curve = read_decay_csv(args.input)
    fit = fit_decay(curve, model=model)
    out = _out_dir(args)
    rows = [(name, fit.params[name], fit.sigmas[name])
            for name in MODELS[model]["names"]]
    path = _write_csv(os.path.join(out, f"fit_{model}.csv"),
                      ("param", "value", "sigma"), rows, digest, args.seed,
                      extra_comments=(f"model: {model}",
                                      f"residual_norm: "
                                      f"{math.sqrt(fit.ssr):.10g}"))
    print(f"model: {model}")
    for name, value, sigma in rows:
        print(f"{name} = {value:.6g} +- {sigma:.3g}")
    print(f"residual norm = {math.sqrt(fit.ssr):.6g} "
          f"after {fit.n_iter} iterations")
    print(f"wrote {path}")
    if args.plot:
        tt = np.linspace(float(curve.t_us[0]), float(curve.t_us[-1]), 400)
        yy = MODELS[model]["fn"](tt, [fit.params[n]
                                      for n in MODELS[model]["names"]])
        svg = svgplot.write_plot(
            os.path.join(out, f"fit_{model}.svg"),
            [{"x": curve.t_us, "y": curve.signal, "label": "data",
              "points": True},
             {"x": tt, "y": yy, "label": model}],
            xlabel="t (us)", ylabel="signal", title=f"{model} fit")
        print(f"wrote {svg}")
    return EXIT_OK


# ----- bath ---------------------------------------------------------------

_BATH_DEFAULTS = {
    "radius_angstrom": 16.0,
    "concentration": 0.011,
}


def cmd_bath(args) -> int:
    overrides = {
        "radius_angstrom": args.radius,
        "concentration": args.concentration,
    }
    cfg = _effective(_BATH_DEFAULTS, _load_config(args.config), overrides,
                     "bath")
    digest = _config_digest(cfg)
    sites = classify_shells(generate_lattice(float(cfg["radius_angstrom"])),
                            radius_angstrom=float(cfg["radius_angstrom"]))
    sample = sample_bath(sites, float(cfg["concentration"]), args.seed)
    out = _out_dir(args)
    rows = [(sites[i].position[0], sites[i].position[1],
             sites[i].position[2], sites[i].shell)
            for i in sample.site_indices]
    path = _write_csv(os.path.join(out, "bath_sites.csv"),
                      ("x_angstrom", "y_angstrom", "z_angstrom", "shell"),
                      rows, digest, args.seed)
    summary = shell_summary(sites)
    inner = ", ".join(f"shell {s}: {mult} @ {dist:.3f} A" for s, (mult, dist)
                      in sorted(summary.items())[:4])
    print(f"{len(sites)} sites within {cfg['radius_angstrom']} Angstrom "
          f"({inner}, ...)")
    print(f"occupied {sample.count} sites at n = {cfg['concentration']:g} "
          f"(seed {args.seed})")
    try:
        coeff = dipolar_second_moment_sum(sites)
        print(f"second-moment coefficient {coeff:.4e} cm^-6 = "
              f"{coeff / DIPOLAR_COEFF_CM6:.3f} x reference "
              f"{DIPOLAR_COEFF_CM6:.3e}")
    except ValidationError as exc:
        print(f"second-moment coefficient skipped: {exc}")
    print(f"wrote {path}")
    return EXIT_OK


# ----- pulse --------------------------------------------------------------


def _parse_init(register, text):
    if text is None:
        return register.mixed_nuclei_state(ms=0)
    try:
        ms_part, bits_part = text.split(":")
        ms = int(ms_part)
        bits = tuple(int(b) for b in bits_part) if bits_part else ()
    except ValueError:
        raise ValidationError(
            f"--init must look like 'ms:bits', e.g. '0:00', got {text!r}") \
            from None
    if len(bits) != register.n_nuclei:
        raise ValidationError(
            f"--init names {len(bits)} nuclei; register has "
            f"{register.n_nuclei}")
    return register.pure_state(ms, bits)


def cmd_pulse(args) -> int:
    overrides = {
        "field_gauss": args.field,
        "nuclei": _nuclei_from_flags(args),
    }
    cfg = _effective(_SYSTEM_DEFAULTS, _load_config(args.config), overrides,
                     "pulse")
    digest = _config_digest(cfg)
    register = Register(_system_from_config(cfg))
    out = _out_dir(args)

    modes = [m for m in ("sequence", "rabi", "bell", "endor")
             if getattr(args, m) is not None]
    if len(modes) != 1:
        raise ValidationError(
            "pick exactly one of --sequence, --rabi, --bell, --endor")
    mode = modes[0]

    if mode == "sequence":
        try:
            with open(args.sequence, encoding="utf-8") as fh:
                items = parse_sequence(fh.read())
        except OSError as exc:
            raise ValidationError(f"cannot read {args.sequence}: {exc}") \
                from None
        state = run_sequence(_parse_init(register, args.init), items)
        rows = [(ms, "".join(str(b) for b in bits) or "-", pop)
                for (ms, bits), pop in state.populations().items()]
        path = _write_csv(os.path.join(out, "populations.csv"),
                          ("ms", "bits", "population"), rows, digest,
                          args.seed)
        for ms, bits, pop in rows:
            if pop > 1e-9:
                print(f"ms={ms:+d} bits={bits} population={pop:.6f}")
        print(f"wrote {path}")
        return EXIT_OK

    if mode == "rabi":
        channel, si, sj = args.rabi
        try:
            i, j = int(si), int(sj)
        except ValueError:
            raise ValidationError("--rabi takes CHANNEL I J with integer "
                                  "level indices") from None
        t = np.linspace(0.0, args.t_max, args.points)
        chunks = np.array_split(t, max(args.threads, 1))
        results = _pmap(
            lambda tc: rabi_simulate(register, channel.lower(), i, j, tc,
                                     power=args.power),
            [c for c in chunks if len(c)], args.threads)
        pop = np.concatenate([curve.signal for curve, _ in results])
        omega = results[0][1]
        path = _write_csv(os.path.join(out, "rabi.csv"),
                          ("t_us", "population"), zip(t, pop), digest,
                          args.seed)
        print(f"Rabi frequency {omega:.6g} MHz at power {args.power:g}")
        print(f"wrote {path}")
        if args.plot:
            svg = svgplot.write_plot(
                os.path.join(out, "rabi.svg"),
                [{"x": t, "y": pop}], xlabel="t (us)",
                ylabel="transfer probability", title="Rabi oscillation")
            print(f"wrote {svg}")
        return EXIT_OK

    if mode == "bell":
        variant = args.bell
        if variant not in BELL_VARIANTS:
            raise ValidationError(
                f"--bell takes one of {', '.join(BELL_VARIANTS)}")
        _, fid, p00 = bell_prepare_and_fidelity(register, variant)
        print(f"{variant}: preparation fidelity {fid:.9f}, "
              f"round-trip detection {p00:.9f}")
        if args.detune:
            d = _parse_floats(args.detune, "--detune")
            if len(d) != 2:
                raise ValidationError("--detune takes two values: d1,d2 MHz")
            t = np.linspace(0.0, args.t_max, args.points)
            f = bell_dephasing_fidelity(register, variant, t, d[0], d[1])
            path = _write_csv(os.path.join(out, "bell_dephasing.csv"),
                              ("t_us", "fidelity"), zip(t, f), digest,
                              args.seed)
            print(f"wrote {path}")
        return EXIT_OK

    transfer = endor_transfer(register, nucleus=args.endor)
    print(f"nuclear polarization transfer {transfer:.9f}")
    return EXIT_OK


# ----- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nvbath",
        description="Electron-nuclear spin bath simulator: ESR spectra, "
                    "concentration-dependent linewidths, coherence decay "
                    "fits, pulse sequences.")
    p.add_argument("--version", action="version",
                   version=f"nvbath {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, metavar="FILE",
                        help="JSON config; flags override its values")
    common.add_argument("--out-dir", default=None, metavar="DIR",
                        help="output directory (default: NVBATH_OUT_DIR "
                             "or '.')")
    common.add_argument("--seed", type=int, default=0,
                        help="seed recorded in outputs and used for "
                             "sampling (default 0)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for grid sweeps (default 1)")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common],
                        help="exact-diagonalization ESR line list and "
                             "broadened spectrum")
    _add_system_flags(sp)
    sp.add_argument("--window", default=None, metavar="LO,HI",
                    help="report lines inside this frequency window (MHz)")
    sp.add_argument("--grid", default=None, metavar="START,STOP,STEP",
                    help="spectrum grid (MHz)")
    sp.add_argument("--fwhm", type=float, default=None,
                    help="Gaussian broadening FWHM in MHz (default 1.0)")
    sp.add_argument("--plot", action="store_true", help="also write SVG")
    sp.set_defaults(func=cmd_spectrum)

    lw = sub.add_parser("linewidth", parents=[common],
                        help="contact/dipolar linewidth versus 13C fraction")
    lw.add_argument("--concentrations", default=None, metavar="N1,N2,...",
                    help="explicit 13C fractions (default: log grid)")
    lw.add_argument("--regime", default=None,
                    choices=("auto", "max", "contact", "dipolar"),
                    help="rule for the reported total (default auto)")
    lw.add_argument("--from-lattice", type=float, default=None,
                    metavar="RADIUS",
                    help="compute the dipolar coefficient from a lattice "
                         "sum within RADIUS Angstrom")
    lw.add_argument("--overlay", default=None, metavar="FILE",
                    help="n,w_mhz points drawn onto the plot")
    lw.add_argument("--plot", action="store_true", help="also write SVG")
    lw.set_defaults(func=cmd_linewidth)

    ft = sub.add_parser("fit", parents=[common],
                        help="fit a decay model to a t_us,signal[,sigma] "
                             "CSV")
    ft.add_argument("--input", required=True, metavar="FILE")
    ft.add_argument("--model", default=None, choices=tuple(MODELS),
                    help="decay model (default fid)")
    ft.add_argument("--plot", action="store_true", help="also write SVG")
    ft.set_defaults(func=cmd_fit)

    ba = sub.add_parser("bath", parents=[common],
                        help="generate lattice sites and a random 13C "
                             "occupation")
    ba.add_argument("--radius", type=float, default=None, metavar="ANGSTROM")
    ba.add_argument("--concentration", type=float, default=None, metavar="N")
    ba.set_defaults(func=cmd_bath)

    pu = sub.add_parser("pulse", parents=[common],
                        help="pulse-sequence simulation on the labeled "
                             "eigenbasis")
    _add_system_flags(pu)
    pu.add_argument("--sequence", default=None, metavar="FILE",
                    help="run a sequence file (MW/RF/WAIT grammar)")
    pu.add_argument("--init", default=None, metavar="MS:BITS",
                    help="initial pure state for --sequence, e.g. '0:00' "
                         "(default: ms=0, mixed nuclei)")
    pu.add_argument("--rabi", default=None, nargs=3,
                    metavar=("CHANNEL", "I", "J"),
                    help="sweep a resonant drive on levels I,J")
    pu.add_argument("--bell", default=None, metavar="VARIANT",
                    help="prepare a Bell state "
                         f"({', '.join(BELL_VARIANTS)})")
    pu.add_argument("--detune", default=None, metavar="D1,D2",
                    help="with --bell: free-evolution detunings in MHz")
    pu.add_argument("--endor", default=None, type=int, nargs="?", const=0,
                    metavar="NUCLEUS",
                    help="polarization-transfer sequence on one nucleus")
    pu.add_argument("--power", type=float, default=1.0,
                    help="relative drive power for --rabi (default 1)")
    pu.add_argument("--t-max", type=float, default=10.0,
                    help="sweep end time in us (default 10)")
    pu.add_argument("--points", type=int, default=201,
                    help="sweep points (default 201)")
    pu.add_argument("--plot", action="store_true", help="also write SVG")
    pu.set_defaults(func=cmd_pulse)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FitError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
