"""Fringe quantifiers for detector traces.

Both estimators work on decay-corrected traces ``I(tau) * exp(+tau)`` so the
lifetime envelope does not masquerade as fringe contrast. ``beat_omega``
always means the hyperfine offset of the interfering line pair (the field
phase frequency); intensity fringes then repeat every ``pi / beat_omega`` and
one full polarization cycle lasts ``2 pi / beat_omega``.
"""

from __future__ import annotations

import numpy as np

from .errors import AnalysisError


def _window_slice(taus: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    lo, hi = window
    if hi <= lo:
        raise AnalysisError("analysis window must have positive length")
    mask = (taus >= lo) & (taus <= hi)
    if np.count_nonzero(mask) < 8:
        raise AnalysisError("analysis window covers too few samples")
    return mask


def _corrected(taus: np.ndarray, trace: np.ndarray, envelope_correct: bool) -> np.ndarray:
    trace = np.asarray(trace, dtype=float)
    return trace * np.exp(taus) if envelope_correct else trace.copy()


def visibility(
    taus: np.ndarray,
    trace: np.ndarray,
    window: tuple[float, float],
    beat_omega: float | None = None,
    envelope_correct: bool = True,
) -> float:
    """Fringe contrast of an intensity trace inside a window, in [0, 1].

    With ``beat_omega`` given (the hyperfine offset of the interfering line
    pair), the contrast of that specific beat is returned: the Hann-tapered
    Fourier amplitude of the corrected trace at the fringe frequency
    ``2 * beat_omega``, normalized so a trace proportional to
    ``1 + V cos(2 beat_omega tau)`` reads V. This keeps slower structure --
    the thickness-induced (multiple-scattering) envelope and beats of other,
    off-resonant line pairs -- out of the figure, which is what "the beat
    survives / the beat is gone" refers to. The window must span at least two
    fringes.

    Without ``beat_omega`` the dominant oscillation is measured instead:
    (Imax - Imin) / (Imax + Imin) aggregated over local extrema, each maximum
    compared against the mean of its two flanking minima (cancelling any
    slow envelope the lifetime correction leaves behind).
    """
    taus = np.asarray(taus, dtype=float)
    if beat_omega is not None:
        if beat_omega <= 0:
            raise AnalysisError("beat_omega must be positive")
        if (window[1] - window[0]) < 2.0 * np.pi / beat_omega:
            raise AnalysisError("window shorter than two beat periods")
    mask = _window_slice(taus, window)
    c = _corrected(taus[mask], np.asarray(trace)[mask], envelope_correct)

    if beat_omega is not None:
        t = taus[mask]
        taper = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(len(c)) / (len(c) - 1))
        base = float(np.sum(c * taper))
        if base <= 0.0:
            return 0.0
        # Removing the taper-weighted mean keeps the window's own spectral
        # leakage of the flat background out of the fringe bin, so an exactly
        # envelope-flat trace reads as zero to machine precision.
        resid = c - base / float(np.sum(taper))
        amp = abs(np.sum(resid * taper * np.exp(-2j * beat_omega * t)))
        return min(2.0 * amp / base, 1.0)

    idx = np.arange(1, len(c) - 1)
    is_max = (c[idx] > c[idx - 1]) & (c[idx] > c[idx + 1])
    is_min = (c[idx] < c[idx - 1]) & (c[idx] < c[idx + 1])
    max_pos = idx[is_max]
    min_pos = idx[is_min]

    num = den = 0.0
    pairs = 0
    for m in max_pos:
        left = min_pos[min_pos < m]
        right = min_pos[min_pos > m]
        if len(left) == 0 or len(right) == 0:
            continue
        floor = 0.5 * (c[left[-1]] + c[right[0]])
        num += max(c[m] - floor, 0.0)
        den += c[m] + floor
        pairs += 1
    if pairs == 0:
        hi, lo = float(np.max(c)), float(np.min(c))
        num, den = hi - lo, hi + lo
    if den <= 0.0:
        return 0.0
    return min(max(num / den, 0.0), 1.0)


def fringe_shift(
    taus: np.ndarray,
    trace_a: np.ndarray,
    trace_b: np.ndarray,
    beat_omega: float,
    window: tuple[float, float] | None = None,
    envelope_correct: bool = True,
) -> float:
    """Relative fringe shift between two traces, in full beat cycles.

    The lag of the windowed cross-correlation maximum (parabolic sub-sample
    refinement) is expressed in units of the full polarization cycle
    ``2 pi / beat_omega`` and folded into [0, 0.25]: traces built on
    quadrature field phases -- complementary fringes and anti-fringes -- read
    as 0.25, identical traces as 0.
    """
    taus = np.asarray(taus, dtype=float)
    if beat_omega <= 0:
        raise AnalysisError("beat_omega must be positive")
    if window is None:
        window = (float(taus[0]), float(taus[-1]))
    mask = _window_slice(taus, window)
    h = taus[1] - taus[0]
    x = _corrected(taus[mask], np.asarray(trace_a)[mask], envelope_correct)
    y = _corrected(taus[mask], np.asarray(trace_b)[mask], envelope_correct)
    x = x - np.mean(x)
    y = y - np.mean(y)
    scale = max(np.max(np.abs(x)), np.max(np.abs(y)), 0.0)
    if scale <= 0.0 or np.std(x) < 1e-9 * scale or np.std(y) < 1e-9 * scale:
        raise AnalysisError("trace has no fringe variance inside the window")

    fringe_period = np.pi / beat_omega
    lags = int(round(fringe_period / h))
    if lags < 4:
        raise AnalysisError("grid too coarse to resolve one fringe period")
    overlap = len(x) - lags
    if overlap < lags:
        raise AnalysisError("window shorter than two beat periods")
    corr = np.array([np.dot(x[:overlap], y[k:k + overlap]) for k in range(lags + 1)])
    k0 = int(np.argmax(corr))
    k = float(k0)
    if 0 < k0 < lags:
        denom = corr[k0 - 1] - 2.0 * corr[k0] + corr[k0 + 1]
        if denom != 0.0:
            k = k0 + 0.5 * (corr[k0 - 1] - corr[k0 + 1]) / denom
    cycles = (k * h) / (2.0 * fringe_period)
    return max(min(cycles, 0.5 - cycles), 0.0)
