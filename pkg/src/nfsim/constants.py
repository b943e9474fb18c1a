"""Physical constants and nuclear data for the resonant scattering target.

All hyperfine energies inside the simulator are expressed in units of the
natural transition width ``Gamma0 = hbar / mean_lifetime`` and all times in
units of the mean lifetime (``tau = Gamma0 * t / hbar``, dimensionless).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

#: Nuclear magneton in eV/T (CODATA).
MU_N_EV_PER_T = 3.1524512605e-8

#: Reduced Planck constant in eV*s (CODATA).
HBAR_EV_S = 6.582119569e-16


@dataclass(frozen=True)
class IsotopeConstants:
    """Nuclear data of a Moessbauer transition.

    Attributes:
        transition_energy_kev: Resonance energy in keV.
        mean_lifetime_ns: Mean lifetime of the excited state in ns.
        spin_ground: Ground-state nuclear spin (half-integer).
        spin_excited: Excited-state nuclear spin (half-integer).
        mu_ground: Ground-state magnetic moment in nuclear magnetons.
        mu_excited: Excited-state magnetic moment in nuclear magnetons.
    """

    transition_energy_kev: float = 14.413
    mean_lifetime_ns: float = 141.0
    spin_ground: float = 0.5
    spin_excited: float = 1.5
    mu_ground: float = 0.09044
    mu_excited: float = -0.1549

    def __post_init__(self):
        if self.mean_lifetime_ns <= 0:
            raise ConfigError("mean lifetime must be positive")
        if self.spin_ground <= 0 or self.spin_excited <= 0:
            raise ConfigError("nuclear spins must be positive")
        if self.transition_energy_kev <= 0:
            raise ConfigError("transition energy must be positive")

    @property
    def gamma0_ev(self) -> float:
        """Natural width Gamma0 = hbar / mean_lifetime, in eV."""
        return HBAR_EV_S / (self.mean_lifetime_ns * 1e-9)

    def tau_to_ns(self, tau: float) -> float:
        """Convert dimensionless time to ns (tau = 1 is one mean lifetime)."""
        return tau * self.mean_lifetime_ns

    def ns_to_tau(self, t_ns: float) -> float:
        """Convert ns to dimensionless time."""
        return t_ns / self.mean_lifetime_ns


#: Default dataset: the 14.4 keV transition of 57Fe.
IRON57 = IsotopeConstants()
