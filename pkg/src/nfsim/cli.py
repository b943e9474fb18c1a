"""Command-line entry points.

Subcommands: ``constants``, ``match``, ``single``, ``scheme1``, ``scheme2``.
Every run writes spectrum CSVs plus a JSON manifest that records the fully
resolved configuration; ``--from-manifest`` replays a manifest and reproduces
the outputs byte for byte. Flag precedence is CLI > config file > defaults.

Exit codes: 0 success, 2 configuration error, 3 scattering series not
converged at the requested order (outputs are still written).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import math
import sys
from pathlib import Path

from .constants import IRON57, IsotopeConstants
from .errors import NfsimError, ConfigError
from .experiments import (
    Scheme1Config,
    Scheme2Config,
    default_storage_events,
    run_scheme1,
    run_scheme2,
    run_single_target,
)
from .io import (
    build_manifest,
    constants_from_overrides,
    load_config_file,
    load_manifest,
    output_dir,
    write_manifest,
    write_spectrum_csv,
)
from .kernel import TargetConfig
from .nuclear import HyperfineConfig, matching_field, matching_ratio, zeeman_splitting
from .polarization import E_SIGMA, TimeGrid

_GRID_DEFAULTS = {"tau_start": 0.0, "tau_end": 3.55, "tau_step": 1e-3}


def _parse_angle(text: str) -> float:
    """Accept plain floats or simple multiples of pi ('pi/2', '0.75pi')."""
    s = text.strip().lower().replace(" ", "")
    if "pi" not in s:
        return float(s)
    head, _, tail = s.partition("pi")
    factor = float(head) if head not in ("", "+", "-") else float(head + "1")
    div = float(tail[1:]) if tail.startswith("/") else 1.0
    if tail and not tail.startswith("/"):
        raise ConfigError(f"cannot parse angle {text!r}")
    return factor * math.pi / div


def _parse_pair(text: str, name: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"{name} expects two values as A:B, got {text!r}")
    return float(parts[0]), float(parts[1])


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file (sections: run, target1, target2, constants)")
    p.add_argument("--outdir", help="output directory (default: $NFSIM_OUTDIR or cwd)")
    p.add_argument("--prefix", help="output file prefix")
    p.add_argument("--normalize", choices=["none", "peak"], default=None,
                   help="rescale intensity columns to unit peak")
    p.add_argument("--tau-start", type=float, default=None)
    p.add_argument("--tau-end", type=float, default=None)
    p.add_argument("--tau-step", type=float, default=None)
    p.add_argument("--conv-tol", type=float, default=None,
                   help="series convergence tolerance (default 1e-10)")
    p.add_argument("--sweep", default=None, metavar="FLAG=V1,V2,...",
                   help="repeat the run for several values of one numeric flag")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nfsim",
        description="Resonant x-ray forward-scattering time spectra for "
                    "magnetized 57Fe targets, with polarization which-way "
                    "marking and erasure setups.")
    ap.add_argument("--from-manifest", metavar="FILE",
                    help="replay a run manifest (reproduces outputs bit for bit)")
    ap.add_argument("--outdir", help="output directory override for --from-manifest")
    sub = ap.add_subparsers(dest="command")

    pc = sub.add_parser("constants", help="print the nuclear dataset (and splittings at a field)")
    pc.add_argument("--b", type=float, default=None, help="field in tesla")
    pc.add_argument("--config", help="INI config file with a [constants] section")

    pm = sub.add_parser("match", help="field-matching calculator for the two-target setup")
    pm.add_argument("--b1", type=float, required=True, help="first-target field in tesla")
    pm.add_argument("--case", type=int, choices=[1, 2], default=2)
    pm.add_argument("--config", help="INI config file with a [constants] section")

    ps = sub.add_parser("single", help="spectrum behind one transverse-field target")
    ps.add_argument("--xi", type=float, default=None)
    ps.add_argument("--omega2", type=float, default=None,
                    help="half-splitting of the two main lines in Gamma0 units")
    ps.add_argument("--b", type=float, default=None, help="field in tesla")
    ps.add_argument("--eps", default=None, metavar="G:E",
                    help="explicit splittings eps_ground:eps_excited in Gamma0")
    ps.add_argument("--pmax", type=int, default=None)
    ps.add_argument("--flm", type=float, default=None)
    _add_common(ps)

    p1 = sub.add_parser("scheme1", help="two collinear targets with shutter and polarizer")
    p1.add_argument("--xi1", type=float, default=None)
    p1.add_argument("--xi2", type=float, default=None)
    p1.add_argument("--b1", type=float, default=None)
    p1.add_argument("--b2", type=float, default=None,
                    help="override the matched second field")
    p1.add_argument("--match-case", type=int, choices=[1, 2], default=None)
    p1.add_argument("--eps1", default=None, metavar="G:E")
    p1.add_argument("--eps2", default=None, metavar="G:E")
    p1.add_argument("--shutter", default=None, metavar="T0:T1", help="pass band in ns")
    p1.add_argument("--pmax", type=int, default=None)
    p1.add_argument("--flm", type=float, default=None)
    p1.add_argument("--b2-parallel-z", action="store_true",
                    help="no-marking control: second field along z with target-1 splittings")
    p1.add_argument("--scale-splitting", type=float, default=None,
                    help="scale both targets' splittings by this factor")
    _add_common(p1)

    p2 = sub.add_parser("scheme2", help="split-arm interferometer with delay or storage")
    p2.add_argument("--mode", choices=["external", "storage"], default=None)
    p2.add_argument("--omega2", type=float, default=None)
    p2.add_argument("--xi", type=float, default=None)
    p2.add_argument("--pmax", type=int, default=None)
    p2.add_argument("--flm", type=float, default=None)
    p2.add_argument("--phi", default=None,
                    help="marking phase; the external delay is phi/omega2 (accepts 'pi/2')")
    p2.add_argument("--delta-tau", type=float, default=None,
                    help="external delay in lifetime units (alternative to --phi)")
    p2.add_argument("--alpha", type=float, default=None)
    p2.add_argument("--beta", type=float, default=None)
    p2.add_argument("--auto-alpha", action="store_true",
                    help="pick the incident weights that equalize the arms")
    p2.add_argument("--tau0", default=None,
                    help="storage switch-off time, or 'auto' for the first beat minimum")
    p2.add_argument("--window", default=None,
                    help="storage window length, or 'quarter' for a pi/2 phase")
    p2.add_argument("--nwindows", type=int, choices=[1, 2], default=None,
                    help="one window marks; a second window erases again")
    _add_common(p2)
    return ap


def _overlay(args: argparse.Namespace, filecfg: dict, names: dict[str, object]) -> dict:
    """Resolve values with precedence CLI > [run] config section > defaults."""
    run = filecfg.get("run", {})
    out = {}
    for name, default in names.items():
        cli = getattr(args, name, None)
        if cli is not None and cli is not False:
            out[name] = cli
        elif name in run:
            raw = run[name]
            if isinstance(default, bool):
                out[name] = raw.strip().lower() in ("1", "true", "yes", "on")
            elif isinstance(default, int) and not isinstance(default, bool):
                out[name] = int(raw)
            elif isinstance(default, float):
                out[name] = float(raw)
            else:
                out[name] = raw
        else:
            out[name] = default
    return out


def _grid_from(spec: dict) -> TimeGrid:
    return TimeGrid(spec["tau_start"], spec["tau_end"], spec["tau_step"])


def _constants_from(filecfg: dict) -> IsotopeConstants:
    if "constants" in filecfg:
        return constants_from_overrides(filecfg["constants"])
    return IRON57


def _emit(outdir: Path, prefix: str, stem: str, grid, constants, intensities,
          field, normalize: str) -> tuple[Path, str]:
    path = outdir / f"{prefix}{stem}.csv"
    write_spectrum_csv(path, grid, constants, intensities, field,
                       normalize_peak=(normalize == "peak"))
    return path, path.name


# ---------------------------------------------------------------- commands


def _spec_single(args, filecfg) -> dict:
    spec = _overlay(args, filecfg, {
        "xi": 1.0, "omega2": None, "b": None, "eps": None,
        "pmax": 14, "flm": 0.8, "normalize": "none", "conv_tol": 1e-10,
        **_GRID_DEFAULTS,
    })
    return spec


def run_single_spec(spec: dict, constants: IsotopeConstants,
                    outdir: Path, prefix: str) -> tuple[int, list[str], dict]:
    if spec.get("eps"):
        eg, ee = _parse_pair(spec["eps"], "--eps") if isinstance(spec["eps"], str) else spec["eps"]
    elif spec.get("b") is not None:
        eg = zeeman_splitting(spec["b"], "ground", constants)
        ee = zeeman_splitting(spec["b"], "excited", constants)
    else:
        om = spec["omega2"] if spec.get("omega2") is not None else 28.0
        eg, ee = om, -om
    spec = {**spec, "eps": [eg, ee]}
    grid = _grid_from(spec)
    target = TargetConfig(spec["xi"], HyperfineConfig.from_splittings(eg, ee),
                          f_lm=spec["flm"], p_max=spec["pmax"], constants=constants)
    res = run_single_target(target, E_SIGMA, grid, conv_tol=spec["conv_tol"])
    path, name = _emit(outdir, prefix, "single", grid, constants,
                       {"I_total": res.traces["I_total"],
                        "I_sigma": res.traces["I_sigma"],
                        "I_pi": res.traces["I_pi"]},
                       res.fields["behind_target"], spec["normalize"])
    manifest = build_manifest("single", spec, grid, constants, res.diagnostics, [name])
    write_manifest(outdir / f"{prefix}single_manifest.json", manifest)
    code = 0 if res.diagnostics["converged_target"] else 3
    return code, [str(path)], res.diagnostics


def _spec_scheme1(args, filecfg) -> dict:
    spec = _overlay(args, filecfg, {
        "xi1": 7.0, "xi2": 7.0, "b1": None, "b2": None, "match_case": 2,
        "eps1": None, "eps2": None, "shutter": "7:74", "pmax": 19, "flm": 0.8,
        "b2_parallel_z": False, "scale_splitting": 1.0,
        "normalize": "none", "conv_tol": 1e-10, **_GRID_DEFAULTS,
    })
    tgt = filecfg.get("target1", {})
    if spec["eps1"] is None and "eps" in tgt:
        spec["eps1"] = tgt["eps"]
    tgt2 = filecfg.get("target2", {})
    if spec["eps2"] is None and "eps" in tgt2:
        spec["eps2"] = tgt2["eps"]
    return spec


def run_scheme1_spec(spec: dict, constants: IsotopeConstants,
                     outdir: Path, prefix: str) -> tuple[int, list[str], dict]:
    shutter = (_parse_pair(spec["shutter"], "--shutter")
               if isinstance(spec["shutter"], str) else tuple(spec["shutter"]))
    if spec.get("eps1"):
        eps1 = (_parse_pair(spec["eps1"], "--eps1")
                if isinstance(spec["eps1"], str) else tuple(spec["eps1"]))
        if spec.get("eps2"):
            eps2 = (_parse_pair(spec["eps2"], "--eps2")
                    if isinstance(spec["eps2"], str) else tuple(spec["eps2"]))
        else:
            raise ConfigError("give both --eps1 and --eps2, or use --b1")
        cfg = Scheme1Config.from_splittings(
            eps1, eps2, xi1=spec["xi1"], xi2=spec["xi2"], f_lm=spec["flm"],
            p_max=spec["pmax"], shutter_ns=shutter,
            matching_case=spec["match_case"], constants=constants)
    else:
        b1 = spec["b1"] if spec.get("b1") is not None else 39.0
        cfg = Scheme1Config.from_fields(
            b1, spec["match_case"], xi1=spec["xi1"], xi2=spec["xi2"],
            f_lm=spec["flm"], p_max=spec["pmax"], shutter_ns=shutter,
            constants=constants)
        if spec.get("b2") is not None:
            hf2 = HyperfineConfig.from_field(spec["b2"], cfg.target2.hyperfine.field_direction,
                                             constants)
            t2 = TargetConfig(spec["xi2"], hf2, f_lm=spec["flm"],
                              p_max=spec["pmax"], constants=constants)
            cfg = Scheme1Config(cfg.target1, t2, *shutter, spec["match_case"],
                                allow_field_mismatch=True)
    if spec.get("scale_splitting") and spec["scale_splitting"] != 1.0:
        cfg = cfg.scaled_splittings(spec["scale_splitting"])
    if spec.get("b2_parallel_z"):
        cfg = cfg.control_variant()
    spec = {**spec,
            "eps1": [cfg.target1.hyperfine.eps_ground, cfg.target1.hyperfine.eps_excited],
            "eps2": [cfg.target2.hyperfine.eps_ground, cfg.target2.hyperfine.eps_excited],
            "shutter": list(shutter)}

    grid = _grid_from(spec)
    res = run_scheme1(cfg, grid, conv_tol=spec["conv_tol"])
    path1, name1 = _emit(outdir, prefix, "scheme1_target1", grid, constants,
                         {"I_total": res.traces["target1"]},
                         res.fields["behind_target1"], spec["normalize"])
    pathg, nameg = _emit(outdir, prefix, "scheme1_gated", grid, constants,
                         {"I_total": res.traces["gated"]},
                         res.fields["gated"], spec["normalize"])
    path2, name2 = _emit(outdir, prefix, "scheme1_target2", grid, constants,
                         {"I_total": res.traces["target2"],
                          "I_sigma": res.traces["det_sigma"],
                          "I_pi": res.traces["det_pi"],
                          "I_det1": res.traces["det_sigma"],
                          "I_det2": res.traces["det_pi"]},
                         res.fields["behind_target2"], spec["normalize"])
    manifest = build_manifest("scheme1", spec, grid, constants, res.diagnostics,
                              [name1, nameg, name2])
    write_manifest(outdir / f"{prefix}scheme1_manifest.json", manifest)
    ok = res.diagnostics["converged_target1"] and res.diagnostics["converged_target2"]
    return (0 if ok else 3), [str(path1), str(pathg), str(path2)], res.diagnostics


def _spec_scheme2(args, filecfg) -> dict:
    return _overlay(args, filecfg, {
        "mode": "external", "omega2": 28.0, "xi": 1.0, "pmax": 14, "flm": 0.8,
        "phi": None, "delta_tau": None, "alpha": None, "beta": None,
        "auto_alpha": False, "tau0": None, "window": None, "nwindows": 1,
        "normalize": "none", "conv_tol": 1e-10, **_GRID_DEFAULTS,
    })


def run_scheme2_spec(spec: dict, constants: IsotopeConstants,
                     outdir: Path, prefix: str) -> tuple[int, list[str], dict]:
    om = spec["omega2"]
    delta_tau = 0.0
    events = None
    if spec["mode"] == "external":
        if spec.get("phi") is not None and spec.get("delta_tau") is not None:
            raise ConfigError("give --phi or --delta-tau, not both")
        if spec.get("phi") is not None:
            phi = _parse_angle(spec["phi"]) if isinstance(spec["phi"], str) else float(spec["phi"])
            delta_tau = phi / om
        elif spec.get("delta_tau") is not None:
            delta_tau = float(spec["delta_tau"])
    else:
        quarter = math.pi / (2.0 * om)
        tau0 = spec.get("tau0")
        tau0 = None if tau0 in (None, "auto") else float(tau0)
        window = spec.get("window")
        window = None if window in (None, "quarter") else float(window)
        events = default_storage_events(om, n_windows=spec.get("nwindows") or 1,
                                        tau0=tau0, window=window)
    cfg = Scheme2Config.build(
        omega2=om, xi=spec["xi"], f_lm=spec["flm"], p_max=spec["pmax"],
        mode=spec["mode"], delta_tau=delta_tau,
        alpha=spec.get("alpha"), beta=spec.get("beta"),
        auto_alpha=bool(spec.get("auto_alpha")),
        storage_events=events, constants=constants)
    spec = {**spec, "delta_tau": delta_tau, "alpha": cfg.alpha, "beta": cfg.beta,
            "storage_events": [list(e) for e in (events or [])], "phi": None}

    grid = _grid_from(spec)
    res = run_scheme2(cfg, grid, conv_tol=spec["conv_tol"])
    path1, name1 = _emit(outdir, prefix, "scheme2_det1", grid, constants,
                         {"I_total": res.traces["det1"],
                          "I_sigma": res.traces["eraser_sigma"],
                          "I_pi": res.traces["eraser_pi"],
                          "I_det1": res.traces["det1"],
                          "I_det2": res.traces["det2"]},
                         res.fields["out1"], spec["normalize"])
    path2, name2 = _emit(outdir, prefix, "scheme2_det2", grid, constants,
                         {"I_total": res.traces["det2"]},
                         res.fields["out2"], spec["normalize"])
    manifest = build_manifest("scheme2", spec, grid, constants, res.diagnostics,
                              [name1, name2])
    write_manifest(outdir / f"{prefix}scheme2_manifest.json", manifest)
    ok = res.diagnostics["converged_arm_sigma"] and res.diagnostics["converged_arm_pi"]
    return (0 if ok else 3), [str(path1), str(path2)], res.diagnostics


def _cmd_constants(args) -> int:
    filecfg = load_config_file(args.config) if args.config else {}
    constants = _constants_from(filecfg)
    print("isotope dataset:")
    for key, val in sorted(IRON57.__dict__.items()):
        print(f"  {key} = {getattr(constants, key)}")
    print(f"  gamma0_ev = {constants.gamma0_ev:.6e}")
    if args.b is not None:
        eg = zeeman_splitting(args.b, "ground", constants)
        ee = zeeman_splitting(args.b, "excited", constants)
        print(f"splittings at B = {args.b} T  (Gamma0 units):")
        print(f"  eps_ground  = {eg:+.4f}")
        print(f"  eps_excited = {ee:+.4f}")
        print(f"  main-line offsets -/+ {abs(eg - ee) / 2:.4f}")
    return 0


def _cmd_match(args) -> int:
    filecfg = load_config_file(args.config) if args.config else {}
    constants = _constants_from(filecfg)
    b2 = matching_field(args.b1, args.case, constants)
    print(f"case {args.case}: B1/B2 = {matching_ratio(args.case, constants):.6f}")
    print(f"B1 = {args.b1} T  ->  B2 = {b2:.4f} T")
    for tag, b in (("1", args.b1), ("2", b2)):
        eg = zeeman_splitting(b, "ground", constants)
        ee = zeeman_splitting(b, "excited", constants)
        print(f"target {tag}: eps_g = {eg:+.3f}, eps_e = {ee:+.3f} Gamma0")
    return 0


_RUNNERS = {
    "single": (_spec_single, run_single_spec),
    "scheme1": (_spec_scheme1, run_scheme1_spec),
    "scheme2": (_spec_scheme2, run_scheme2_spec),
}

_SWEEPABLE = {"xi", "xi1", "xi2", "pmax", "flm", "omega2", "b", "b1",
              "delta_tau", "scale_splitting"}


def _run_one(command: str, spec: dict, constants: IsotopeConstants,
             outdir: str, prefix: str) -> tuple[int, list[str], dict]:
    runner = _RUNNERS[command][1]
    out = output_dir(outdir)
    out.mkdir(parents=True, exist_ok=True)
    return runner(spec, constants, out, prefix)


def _sweep_values(text: str) -> tuple[str, list[float]]:
    name, _, values = text.partition("=")
    name = name.strip().replace("-", "_")
    if not values:
        raise ConfigError("--sweep expects FLAG=V1,V2,...")
    if name not in _SWEEPABLE:
        raise ConfigError(f"--sweep supports {sorted(_SWEEPABLE)}, got {name!r}")
    return name, [float(v) for v in values.split(",")]


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)

    try:
        if args.from_manifest:
            manifest = load_manifest(args.from_manifest)
            command = manifest["command"]
            if command not in _RUNNERS:
                raise ConfigError(f"manifest command {command!r} is not replayable")
            spec = dict(manifest["config"])
            spec.update({k: manifest["grid"][k] for k in ("tau_start", "tau_end")})
            spec["tau_step"] = manifest["grid"]["step"]
            constants = IsotopeConstants(
                transition_energy_kev=manifest["constants"]["transition_energy_kev"],
                mean_lifetime_ns=manifest["constants"]["mean_lifetime_ns"],
                spin_ground=manifest["constants"]["spin_ground"],
                spin_excited=manifest["constants"]["spin_excited"],
                mu_ground=manifest["constants"]["mu_ground_nm"],
                mu_excited=manifest["constants"]["mu_excited_nm"])
            code, outputs, _ = _run_one(command, spec, constants, args.outdir, "")
            for line in outputs:
                print(line)
            return code

        if args.command is None:
            ap.print_help()
            return 2
        if args.command == "constants":
            return _cmd_constants(args)
        if args.command == "match":
            return _cmd_match(args)

        specfn, _ = _RUNNERS[args.command]
        filecfg = load_config_file(args.config) if args.config else {}
        constants = _constants_from(filecfg)
        spec = specfn(args, filecfg)
        prefix = args.prefix or ""

        if args.sweep:
            name, values = _sweep_values(args.sweep)
            jobs = []
            for v in values:
                s = dict(spec)
                s[name] = int(v) if name == "pmax" else v
                jobs.append((args.command, s, constants, args.outdir,
                             f"{prefix}{name}{v:g}_"))
            worst = 0
            with concurrent.futures.ProcessPoolExecutor(
                    max_workers=min(len(jobs), 4)) as pool:
                for (code, outputs, _diag), v in zip(pool.map(_run_one_star, jobs), values):
                    print(f"{name}={v:g}:")
                    for line in outputs:
                        print(f"  {line}")
                    worst = max(worst, code)
            return worst

        code, outputs, diagnostics = _run_one(args.command, spec, constants,
                                              args.outdir, prefix)
        for line in outputs:
            print(line)
        if code == 3:
            print("warning: scattering series not converged at the requested "
                  "order; see the manifest diagnostics", file=sys.stderr)
        return code
    except NfsimError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _run_one_star(job):
    return _run_one(*job)


if __name__ == "__main__":
    sys.exit(main())
