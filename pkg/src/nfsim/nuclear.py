"""Hyperfine level structure: Zeeman splittings, the six-line transition table,
and the field-ratio calculators used to mark scattering paths at a second target.

Sign conventions, fixed here and used by the propagation kernel throughout:

* Level splittings are ``eps_level = mu_level * B / I_level`` in units of the
  natural width Gamma0; the sign follows the magnetic moment.
* A line ``l = (m_g -> m_e)`` carries the frequency offset
  ``omega_l = m_g * eps_g - m_e * eps_e`` (Gamma0 units) and its scattered
  envelope evolves as ``exp(-i omega_l tau)``.
* With the carrier convention ``exp(+i w0 t)``, the photon resonance of line
  ``l`` is detuned by ``-omega_l * Gamma0`` from the bare transition; the two
  Delta M = 0 lines therefore sit at ``w0 -/+ Omega2 Gamma0`` with
  ``Omega2 = (eps_g - eps_e) / 2 > 0`` for the default dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import IRON57, MU_N_EV_PER_T, IsotopeConstants
from .couplings import BEAM_AXIS, coupling_amplitude, unit_vector
from .errors import ConfigError

Z_AXIS = np.array([0.0, 0.0, 1.0])


def zeeman_splitting(b_tesla: float, level: str, constants: IsotopeConstants = IRON57) -> float:
    """Level splitting eps = mu * B / I in units of Gamma0.

    Args:
        b_tesla: Field magnitude in tesla (must be >= 0).
        level: ``"ground"`` or ``"excited"``.
        constants: Isotope dataset.

    Returns:
        Signed splitting in Gamma0 units (sign of the magnetic moment).
    """
    if b_tesla < 0:
        raise ConfigError("field magnitude must be non-negative")
    if level == "ground":
        mu, spin = constants.mu_ground, constants.spin_ground
    elif level == "excited":
        mu, spin = constants.mu_excited, constants.spin_excited
    else:
        raise ConfigError(f"level must be 'ground' or 'excited', got {level!r}")
    return mu * MU_N_EV_PER_T * b_tesla / (spin * constants.gamma0_ev)


@dataclass(frozen=True)
class HyperfineConfig:
    """Magnetic hyperfine environment of one target.

    Either construct from a field magnitude (``from_field``) or give the two
    splittings directly (``from_splittings``); the latter is the primary
    representation since published figures often quote splittings without a
    field value.
    """

    eps_ground: float
    eps_excited: float
    field_direction: np.ndarray = field(default_factory=lambda: Z_AXIS.copy())
    field_magnitude: float | None = None

    def __post_init__(self):
        direction = unit_vector(self.field_direction)
        object.__setattr__(self, "field_direction", direction)
        if self.field_magnitude is not None and self.field_magnitude < 0:
            raise ConfigError("field magnitude must be non-negative")

    @classmethod
    def from_field(cls, b_tesla: float, direction=Z_AXIS,
                   constants: IsotopeConstants = IRON57) -> "HyperfineConfig":
        return cls(
            eps_ground=zeeman_splitting(b_tesla, "ground", constants),
            eps_excited=zeeman_splitting(b_tesla, "excited", constants),
            field_direction=np.asarray(direction, dtype=float),
            field_magnitude=float(b_tesla),
        )

    @classmethod
    def from_splittings(cls, eps_ground: float, eps_excited: float,
                        direction=Z_AXIS) -> "HyperfineConfig":
        return cls(eps_ground=float(eps_ground), eps_excited=float(eps_excited),
                   field_direction=np.asarray(direction, dtype=float))

    @property
    def delta_m0_offset(self) -> float:
        """|omega| of the two Delta M = 0 lines: (eps_g - eps_e) / 2."""
        return abs(self.eps_ground - self.eps_excited) / 2.0

    def scaled(self, factor: float) -> "HyperfineConfig":
        """Same geometry with both splittings scaled by ``factor``."""
        return HyperfineConfig(
            eps_ground=self.eps_ground * factor,
            eps_excited=self.eps_excited * factor,
            field_direction=self.field_direction.copy(),
            field_magnitude=None if self.field_magnitude is None
            else self.field_magnitude * factor,
        )


@dataclass(frozen=True)
class TransitionLine:
    """One hyperfine transition of the sextet.

    Attributes:
        m_ground, m_excited: Spin projections of the connected sublevels.
        delta_m: m_excited - m_ground, in {-1, 0, +1}.
        omega: Frequency offset in Gamma0 units (see module conventions).
        weight: Clebsch-Gordan amplitude of the line.
        amplitude: Current amplitude as a (sigma, pi) 2-vector, including the
            geometry projection and one factor sqrt(f_lm).
    """

    m_ground: float
    m_excited: float
    delta_m: int
    omega: float
    weight: float
    amplitude: np.ndarray

    @property
    def coupling(self) -> np.ndarray:
        """2x2 coupling matrix A = j (j*)^T in the (sigma, pi) basis."""
        return np.outer(self.amplitude, np.conj(self.amplitude))

    @property
    def strength(self) -> float:
        """Total coupling weight |j|^2 of the line."""
        return float(np.vdot(self.amplitude, self.amplitude).real)


def line_offset(m_ground: float, m_excited: float, hf: HyperfineConfig) -> float:
    """omega_l = m_g eps_g - m_e eps_e in Gamma0 units."""
    return m_ground * hf.eps_ground - m_excited * hf.eps_excited


def transition_table(
    hf: HyperfineConfig,
    constants: IsotopeConstants = IRON57,
    f_lm: float = 1.0,
    beam_direction=BEAM_AXIS,
) -> list[TransitionLine]:
    """All six lines of the 1/2 -> 3/2 multiplet for one target.

    Lines forbidden by the geometry (e.g. Delta M = 0 with the field along the
    beam) carry zero amplitude but are still listed. Order is fixed
    (ascending m_g, then m_e) for deterministic summation downstream.
    """
    if (constants.spin_ground, constants.spin_excited) != (0.5, 1.5):
        raise ConfigError("only the 1/2 -> 3/2 multiplet is implemented; "
                          "override the full transition table for other spins")
    from .couplings import clebsch_gordan_half_to_three_half

    lines = []
    for two_mg in (-1, 1):
        m_g = two_mg / 2.0
        for delta_m in (-1, 0, 1):
            m_e = m_g + delta_m
            if abs(m_e) > constants.spin_excited:
                continue
            amp = coupling_amplitude(m_g, m_e, hf.field_direction, f_lm, beam_direction)
            lines.append(TransitionLine(
                m_ground=m_g,
                m_excited=m_e,
                delta_m=delta_m,
                omega=line_offset(m_g, m_e, hf),
                weight=clebsch_gordan_half_to_three_half(m_g, delta_m),
                amplitude=amp,
            ))
    lines.sort(key=lambda ln: (ln.m_ground, ln.m_excited))
    return lines


def sextet_index(line: TransitionLine, table: list[TransitionLine]) -> int:
    """Conventional sextet index (1..6) of a line, ordered by photon energy.

    Photon energy ascends with ``-omega`` under the module's detuning
    convention, so index 1 is the line with the largest ``omega``. Lines are
    identified by quantum numbers; this helper only supplies the conventional
    numbering for display.
    """
    ordered = sorted(table, key=lambda ln: -ln.omega)
    for i, ln in enumerate(ordered, start=1):
        if ln.m_ground == line.m_ground and ln.m_excited == line.m_excited:
            return i
    raise ConfigError("line is not part of the given table")


def matching_ratio(case: int, constants: IsotopeConstants = IRON57) -> float:
    """Ratio B1/B2 that aligns both narrow emission lines of a transverse
    first target with a symmetric Delta M = +/-1 pair of a beam-axis second
    target.

    Case 1 targets the inner pair, case 2 the outer pair of the sextet.
    """
    g = constants.mu_ground / constants.spin_ground
    e = constants.mu_excited / constants.spin_excited
    if case == 1:
        num, den = g + e, g - e
    elif case == 2:
        num, den = g - 3.0 * e, g - e
    else:
        raise ConfigError(f"matching case must be 1 or 2, got {case}")
    if abs(den) < 1e-300 or abs(num) < 1e-300:
        raise ConfigError("degenerate magnetic moments: matching ratio undefined")
    return num / den


def matching_field(b1_tesla: float, case: int,
                   constants: IsotopeConstants = IRON57,
                   inverse: bool = False) -> float:
    """Second-target field B2 matching a first-target field B1 (tesla).

    With ``inverse=True`` the same ratio is applied the other way, recovering
    B1 from B2.
    """
    if b1_tesla <= 0:
        raise ConfigError("field magnitude must be positive")
    ratio = matching_ratio(case, constants)
    b2 = b1_tesla * ratio if inverse else b1_tesla / ratio
    if b2 <= 0:
        raise ConfigError("matched field came out non-positive")
    return b2
