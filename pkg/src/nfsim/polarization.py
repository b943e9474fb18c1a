"""Two-component polarization fields on a uniform time grid, plus the passive
optical elements: projector, mirror, beam splitter, delay line, shutter gate.

Fields are slowly-varying complex envelopes in the linear (sigma, pi) basis.
The prompt excitation pulse is kept symbolically as a list of delta impulses
(time + polarization) instead of being sampled onto the grid; resonant targets
consume impulses analytically, and the detector intensity excludes them (the
prompt flash is time-gated away in any measurement of the delayed response).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .constants import IRON57, IsotopeConstants
from .errors import ConfigError, GridError

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PolVector:
    """Complex polarization amplitude in the (sigma, pi) basis."""

    sigma: complex = 0.0
    pi: complex = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.sigma, self.pi], dtype=complex)

    @property
    def norm2(self) -> float:
        return abs(self.sigma) ** 2 + abs(self.pi) ** 2

    def scaled(self, factor: complex) -> "PolVector":
        return PolVector(self.sigma * factor, self.pi * factor)

    def __add__(self, other: "PolVector") -> "PolVector":
        return PolVector(self.sigma + other.sigma, self.pi + other.pi)


E_SIGMA = PolVector(1.0, 0.0)
E_PI = PolVector(0.0, 1.0)
#: Circular basis, fixed convention e_+- = (e_sigma +- i e_pi) / sqrt(2).
E_PLUS = PolVector(1.0 / _SQRT2, 1j / _SQRT2)
E_MINUS = PolVector(1.0 / _SQRT2, -1j / _SQRT2)


def linear_pol(alpha: float, beta: float) -> PolVector:
    """Linear polarization alpha * e_sigma + beta * e_pi."""
    return PolVector(alpha, beta)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform dimensionless time grid (units of one mean lifetime)."""

    tau_start: float
    tau_end: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise GridError("grid step must be positive")
        if self.tau_end <= self.tau_start:
            raise GridError("tau_end must exceed tau_start")

    @property
    def samples(self) -> int:
        return int(math.floor((self.tau_end - self.tau_start) / self.step + 1e-9)) + 1

    @property
    def taus(self) -> np.ndarray:
        return self.tau_start + self.step * np.arange(self.samples)

    def t_ns(self, constants: IsotopeConstants = IRON57) -> np.ndarray:
        return self.taus * constants.mean_lifetime_ns

    def compatible(self, other: "TimeGrid") -> bool:
        return (
            abs(self.tau_start - other.tau_start) < 1e-12
            and abs(self.step - other.step) < 1e-15
            and self.samples == other.samples
        )


def default_grid() -> TimeGrid:
    """Default span 0..3.55 lifetimes (about 0..500 ns) at step 1e-3."""
    return TimeGrid(0.0, 3.55, 1e-3)


@dataclass(frozen=True)
class DeltaImpulse:
    """Symbolic delta(tau - tau0) component with a fixed polarization."""

    tau: float
    pol: PolVector


@dataclass(frozen=True)
class FieldEnvelope:
    """Gridded (sigma, pi) envelope plus optional symbolic prompt impulses."""

    grid: TimeGrid
    sigma: np.ndarray
    pi: np.ndarray
    impulses: tuple[DeltaImpulse, ...] = dc_field(default=())

    def __post_init__(self):
        if len(self.sigma) != self.grid.samples or len(self.pi) != self.grid.samples:
            raise GridError("envelope arrays must match the grid sample count")

    @classmethod
    def zero(cls, grid: TimeGrid) -> "FieldEnvelope":
        n = grid.samples
        return cls(grid, np.zeros(n, dtype=complex), np.zeros(n, dtype=complex))

    @classmethod
    def from_impulse(cls, grid: TimeGrid, pol: PolVector, tau: float = 0.0) -> "FieldEnvelope":
        n = grid.samples
        return cls(grid, np.zeros(n, dtype=complex), np.zeros(n, dtype=complex),
                   (DeltaImpulse(tau, pol),))

    @classmethod
    def from_values(cls, grid: TimeGrid, sigma, pi,
                    impulses: tuple[DeltaImpulse, ...] = ()) -> "FieldEnvelope":
        return cls(grid, np.asarray(sigma, dtype=complex),
                   np.asarray(pi, dtype=complex), impulses)

    @property
    def has_values(self) -> bool:
        return bool(np.any(self.sigma) or np.any(self.pi))

    def scaled(self, factor: complex) -> "FieldEnvelope":
        return FieldEnvelope(
            self.grid, factor * self.sigma, factor * self.pi,
            tuple(DeltaImpulse(im.tau, im.pol.scaled(factor)) for im in self.impulses),
        )


def _merge_impulses(impulses) -> tuple[DeltaImpulse, ...]:
    by_tau: dict[float, PolVector] = {}
    for im in impulses:
        by_tau[im.tau] = by_tau.get(im.tau, PolVector()) + im.pol
    return tuple(DeltaImpulse(tau, pol) for tau, pol in sorted(by_tau.items())
                 if pol.norm2 > 0.0)


def _require_same_grid(a: FieldEnvelope, b: FieldEnvelope):
    if not a.grid.compatible(b.grid):
        raise GridError("fields live on different time grids")


def intensity(fld: FieldEnvelope) -> np.ndarray:
    """|E_sigma|^2 + |E_pi|^2 per sample; symbolic impulses excluded."""
    return np.abs(fld.sigma) ** 2 + np.abs(fld.pi) ** 2


def project(fld: FieldEnvelope, axis: str) -> FieldEnvelope:
    """Ideal linear polarizer along sigma or pi (infinite extinction)."""
    zeros = np.zeros_like(fld.sigma)
    if axis == "sigma":
        imps = tuple(DeltaImpulse(im.tau, PolVector(im.pol.sigma, 0.0))
                     for im in fld.impulses if abs(im.pol.sigma) > 0.0)
        return FieldEnvelope(fld.grid, fld.sigma.copy(), zeros, imps)
    if axis == "pi":
        imps = tuple(DeltaImpulse(im.tau, PolVector(0.0, im.pol.pi))
                     for im in fld.impulses if abs(im.pol.pi) > 0.0)
        return FieldEnvelope(fld.grid, zeros, fld.pi.copy(), imps)
    raise ConfigError(f"axis must be 'sigma' or 'pi', got {axis!r}")


def mirror(fld: FieldEnvelope) -> FieldEnvelope:
    """Ideal mirror: multiplies the field by -1."""
    return fld.scaled(-1.0)


def beam_splitter(a: FieldEnvelope, b: FieldEnvelope) -> tuple[FieldEnvelope, FieldEnvelope]:
    """50/50 splitter: (out1, out2) = ((a + i b), (i a + b)) / sqrt(2).

    Unitary, so |out1|^2 + |out2|^2 equals |a|^2 + |b|^2 pointwise.
    """
    _require_same_grid(a, b)
    s = 1.0 / _SQRT2
    out1 = FieldEnvelope(
        a.grid, s * (a.sigma + 1j * b.sigma), s * (a.pi + 1j * b.pi),
        _merge_impulses(
            [DeltaImpulse(im.tau, im.pol.scaled(s)) for im in a.impulses]
            + [DeltaImpulse(im.tau, im.pol.scaled(1j * s)) for im in b.impulses]),
    )
    out2 = FieldEnvelope(
        a.grid, s * (1j * a.sigma + b.sigma), s * (1j * a.pi + b.pi),
        _merge_impulses(
            [DeltaImpulse(im.tau, im.pol.scaled(1j * s)) for im in a.impulses]
            + [DeltaImpulse(im.tau, im.pol.scaled(s)) for im in b.impulses]),
    )
    return out1, out2


def time_delay(fld: FieldEnvelope, delta_tau: float) -> FieldEnvelope:
    """Delay the field by delta_tau (>= 0), zero-filling the leading samples.

    Symbolic impulses shift exactly (no grid quantization). The gridded part
    requires delta_tau to be an integer multiple of the grid step; otherwise
    the delay is rejected with guidance to adjust the grid.
    """
    if delta_tau < 0:
        raise ConfigError("delay must be non-negative")
    imps = tuple(DeltaImpulse(im.tau + delta_tau, im.pol) for im in fld.impulses)
    if delta_tau == 0.0 or not fld.has_values:
        return FieldEnvelope(fld.grid, fld.sigma.copy(), fld.pi.copy(), imps)
    steps = delta_tau / fld.grid.step
    n = int(round(steps))
    if abs(steps - n) > 1e-9:
        raise GridError(
            f"delay {delta_tau} is not a multiple of the grid step "
            f"{fld.grid.step}; choose a step that divides the delay")
    sigma = np.zeros_like(fld.sigma)
    pi = np.zeros_like(fld.pi)
    if n < fld.grid.samples:
        sigma[n:] = fld.sigma[: fld.grid.samples - n]
        pi[n:] = fld.pi[: fld.grid.samples - n]
    return FieldEnvelope(fld.grid, sigma, pi, imps)


def time_gate(fld: FieldEnvelope, t0_ns: float, t1_ns: float,
              constants: IsotopeConstants = IRON57) -> FieldEnvelope:
    """Shutter pass-band [t0, t1] in ns: zero outside, impulses kept only if
    they fall inside the window (a positive opening time cuts off the prompt
    pulse at t = 0)."""
    if t0_ns < 0 or t1_ns <= t0_ns:
        raise ConfigError("gate needs 0 <= t0 < t1")
    t = fld.grid.t_ns(constants)
    mask = (t >= t0_ns) & (t <= t1_ns)
    imps = tuple(im for im in fld.impulses
                 if t0_ns <= constants.tau_to_ns(im.tau) <= t1_ns)
    return FieldEnvelope(fld.grid, np.where(mask, fld.sigma, 0.0),
                         np.where(mask, fld.pi, 0.0), imps)
