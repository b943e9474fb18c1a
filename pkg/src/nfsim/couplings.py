"""Magnetic-dipole coupling geometry between photon polarizations and spin transitions.

The beam propagates along +y with linear electric polarizations sigma = x and
pi = z. An M1 transition couples to the photon's magnetic polarization
``h_a = k x e_a`` through the spherical unit vector ``m_q`` (q = Delta M)
about the quantization axis set by the local magnetic field.

Per-line amplitudes are Clebsch-Gordan weighted for the 1/2 -> 3/2 multiplet
and globally rescaled so that a Delta M = 0 line in transverse geometry
(field perpendicular to the beam) carries the scalar amplitude ``f_lm / 2``.
With that normalization the sigma and pi channels each see a total coupling
weight of ``f_lm`` summed over their allowed lines, as isotropy requires.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError

BEAM_AXIS = np.array([0.0, 1.0, 0.0])

# Magnetic polarization vectors h = k x e for the two electric basis states.
H_SIGMA = np.array([0.0, 0.0, -1.0])
H_PI = np.array([1.0, 0.0, 0.0])

# Rescaling that maps the raw CG^2 = 2/3 of a transverse Delta M = 0 line to 1/2.
_AMPLITUDE_NORM = math.sqrt(0.75)

# <1/2 m_g; 1 q | 3/2 m_e> for the six allowed (2*m_g, q) combinations.
_CG_TABLE = {
    (1, 1): 1.0,
    (-1, -1): 1.0,
    (1, 0): math.sqrt(2.0 / 3.0),
    (-1, 0): math.sqrt(2.0 / 3.0),
    (-1, 1): math.sqrt(1.0 / 3.0),
    (1, -1): math.sqrt(1.0 / 3.0),
}


def clebsch_gordan_half_to_three_half(m_ground: float, delta_m: int) -> float:
    """CG coefficient <1/2 m_g; 1 dM | 3/2 m_g+dM> of the sextet."""
    key = (round(2 * m_ground), delta_m)
    if key not in _CG_TABLE:
        raise ConfigError(f"no 1/2 -> 3/2 transition for m_g={m_ground}, delta_m={delta_m}")
    return _CG_TABLE[key]


def unit_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ConfigError("direction vector must be nonzero")
    return v / n


def spherical_unit_vector(axis: np.ndarray, q: int) -> np.ndarray:
    """Spherical unit vector m_q about a quantization axis.

    The transverse pair (u, v) completing the right-handed triad is chosen
    deterministically; per-line couplings are gauge invariant under the
    residual azimuthal freedom because they always enter as outer products.
    """
    n = unit_vector(axis)
    ref = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = unit_vector(np.cross(ref, n))
    v = np.cross(n, u)
    if q == 0:
        return n.astype(complex)
    if q == 1:
        return -(u + 1j * v) / math.sqrt(2.0)
    if q == -1:
        return (u - 1j * v) / math.sqrt(2.0)
    raise ConfigError(f"delta_m must be in {{-1, 0, +1}}, got {q}")


def coupling_amplitude(
    m_ground: float,
    m_excited: float,
    field_direction,
    f_lm: float = 1.0,
    beam_direction=BEAM_AXIS,
) -> np.ndarray:
    """Per-line current amplitude as a (sigma, pi) 2-vector.

    The line's 2x2 scattering coupling is the outer product
    ``A = j (j*)^T`` of this vector with its conjugate; one factor of the
    recoilless fraction f_lm is absorbed per scattering event.
    """
    beam = unit_vector(beam_direction)
    if not np.allclose(beam, BEAM_AXIS, atol=1e-12):
        raise ConfigError("beam must run along +y; other geometries put the "
                          "polarization basis out of the transverse plane")
    delta_m = round(m_excited - m_ground)
    if abs(delta_m) > 1:
        return np.zeros(2, dtype=complex)
    cg = clebsch_gordan_half_to_three_half(m_ground, delta_m)
    m_q = spherical_unit_vector(field_direction, delta_m)
    scale = _AMPLITUDE_NORM * cg * math.sqrt(f_lm)
    return scale * np.array([H_SIGMA @ m_q, H_PI @ m_q], dtype=complex)


def coupling_matrix(
    m_ground: float,
    m_excited: float,
    field_direction,
    f_lm: float = 1.0,
    beam_direction=BEAM_AXIS,
) -> np.ndarray:
    """2x2 coupling matrix of one line in the (sigma, pi) basis."""
    j = coupling_amplitude(m_ground, m_excited, field_direction, f_lm, beam_direction)
    return np.outer(j, np.conj(j))
