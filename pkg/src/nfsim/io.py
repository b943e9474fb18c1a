"""Serialization: spectrum CSV files, JSON run manifests, INI config files.

The CSV schema is fixed: one row per grid sample, columns

    t_ns, tau, I_total, I_sigma, I_pi, I_det1, I_det2,
    Re_Esigma, Im_Esigma, Re_Epi, Im_Epi

with absent traces written as empty fields. Floats are written with
round-trip precision (shortest representation), so identical runs produce
byte-identical files and a manifest replay reproduces its outputs exactly.
"""

from __future__ import annotations

import configparser
import json
import os
from pathlib import Path

import numpy as np

from .constants import IRON57, IsotopeConstants
from .errors import ConfigError
from .polarization import FieldEnvelope, TimeGrid

CSV_COLUMNS = (
    "t_ns", "tau", "I_total", "I_sigma", "I_pi", "I_det1", "I_det2",
    "Re_Esigma", "Im_Esigma", "Re_Epi", "Im_Epi",
)

OUTDIR_ENV = "NFSIM_OUTDIR"


def _fmt(x: float) -> str:
    return repr(float(x))


def output_dir(explicit: str | None = None) -> Path:
    """Resolve the output directory: flag > NFSIM_OUTDIR > cwd."""
    if explicit:
        return Path(explicit)
    env = os.environ.get(OUTDIR_ENV)
    return Path(env) if env else Path(".")


def write_spectrum_csv(
    path: Path,
    grid: TimeGrid,
    constants: IsotopeConstants = IRON57,
    intensities: dict[str, np.ndarray] | None = None,
    field: FieldEnvelope | None = None,
    normalize_peak: bool = False,
) -> Path:
    """Write one spectrum file in the fixed column schema.

    ``intensities`` maps any of I_total/I_sigma/I_pi/I_det1/I_det2 to traces;
    ``field`` fills the four complex-envelope columns. ``normalize_peak``
    rescales all intensity columns by the peak of I_total (or of the first
    present intensity column).
    """
    intensities = dict(intensities or {})
    for name in intensities:
        if name not in CSV_COLUMNS[2:7]:
            raise ConfigError(f"unknown intensity column {name!r}")
    scale = 1.0
    if normalize_peak and intensities:
        ref = intensities.get("I_total")
        if ref is None:
            ref = next(iter(intensities.values()))
        peak = float(np.max(ref))
        if peak > 0:
            scale = 1.0 / peak

    taus = grid.taus
    t_ns = grid.t_ns(constants)
    cols: dict[str, np.ndarray | None] = {name: None for name in CSV_COLUMNS}
    cols["t_ns"] = t_ns
    cols["tau"] = taus
    for name, tr in intensities.items():
        if len(tr) != grid.samples:
            raise ConfigError(f"trace {name!r} does not match the grid")
        cols[name] = np.asarray(tr, dtype=float) * scale
    if field is not None:
        cols["Re_Esigma"] = field.sigma.real
        cols["Im_Esigma"] = field.sigma.imag
        cols["Re_Epi"] = field.pi.real
        cols["Im_Epi"] = field.pi.imag

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for i in range(grid.samples):
            row = (("" if cols[name] is None else _fmt(cols[name][i]))
                   for name in CSV_COLUMNS)
            fh.write(",".join(row) + "\n")
    return path


def constants_echo(constants: IsotopeConstants) -> dict:
    from .constants import HBAR_EV_S, MU_N_EV_PER_T

    return {
        "transition_energy_kev": constants.transition_energy_kev,
        "mean_lifetime_ns": constants.mean_lifetime_ns,
        "spin_ground": constants.spin_ground,
        "spin_excited": constants.spin_excited,
        "mu_ground_nm": constants.mu_ground,
        "mu_excited_nm": constants.mu_excited,
        "gamma0_ev": constants.gamma0_ev,
        "mu_n_ev_per_t": MU_N_EV_PER_T,
        "hbar_ev_s": HBAR_EV_S,
    }


def build_manifest(command: str, config: dict, grid: TimeGrid,
                   constants: IsotopeConstants, diagnostics: dict,
                   outputs: list[str]) -> dict:
    from . import __version__

    def _clean(obj):
        if isinstance(obj, dict):
            return {k: _clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [_clean(v) for v in obj]
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        return obj

    return {
        "tool": "nfsim",
        "version": __version__,
        "command": command,
        "config": _clean(config),
        "grid": {"tau_start": grid.tau_start, "tau_end": grid.tau_end,
                 "step": grid.step, "samples": grid.samples},
        "constants": constants_echo(constants),
        "diagnostics": _clean(diagnostics),
        "outputs": outputs,
    }


def write_manifest(path: Path, manifest: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_manifest(path: Path) -> dict:
    with open(path) as fh:
        manifest = json.load(fh)
    for key in ("command", "config", "grid"):
        if key not in manifest:
            raise ConfigError(f"manifest is missing the {key!r} entry")
    return manifest


def load_config_file(path: Path) -> dict[str, dict[str, str]]:
    """Flat INI config: [run]/[target1]/[target2]/[constants] sections of
    key = value pairs; keys mirror the CLI flag names with '-' -> '_'."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def constants_from_overrides(values: dict[str, str]) -> IsotopeConstants:
    """Build an isotope dataset from a [constants] config section."""
    fields = {
        "transition_energy_kev": float,
        "mean_lifetime_ns": float,
        "spin_ground": float,
        "spin_excited": float,
        "mu_ground": float,
        "mu_excited": float,
    }
    kwargs = {}
    for key, raw in values.items():
        if key not in fields:
            raise ConfigError(f"unknown constants override {key!r}")
        kwargs[key] = fields[key](raw)
    return IsotopeConstants(**{**IRON57.__dict__, **kwargs})
