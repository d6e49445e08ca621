"""Peak detection for two-tone spectroscopy traces.

A trace is a swept pump frequency against a scalar response (linear or
dB). Detection works on topographic prominence: the response is converted
to linear units if needed, the global median is subtracted as a baseline,
and local maxima are kept if their prominence clears a threshold and they
sit at least min_separation apart in frequency. Kept peaks are refined by
a 3-point parabola through the samples around each maximum.

With the default "auto" threshold (5x the median absolute deviation of
the first-differenced response) detection is invariant under adding a
constant offset and under uniform positive rescaling of a linear trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

# Auto threshold: this many times the MAD of the first-differenced response.
AUTO_THRESHOLD_MADS = 5.0

# Default minimum peak separation: this many median frequency bins.
DEFAULT_SEPARATION_BINS = 2.0

_UNIT_TAGS = ("linear", "db")


@dataclass(frozen=True)
class TwoToneTrace:
    """One spectroscopy sweep.

    pump_freq_hz : strictly increasing pump frequencies [Hz], >= 16 points
    response     : scalar response per point, linear amplitude or dB
    unit         : "linear" or "db" (dB is 20*log10 of an amplitude)
    """

    pump_freq_hz: np.ndarray
    response: np.ndarray
    unit: str = "linear"

    def __post_init__(self):
        f = np.asarray(self.pump_freq_hz, dtype=float)
        y = np.asarray(self.response, dtype=float)
        if f.ndim != 1 or y.shape != f.shape:
            raise ValueError("pump_freq_hz and response must be equal-length 1-D")
        if f.size < 16:
            raise ValueError(f"trace needs at least 16 points, got {f.size}")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(y))):
            raise ValueError("trace values must be finite")
        if np.any(np.diff(f) <= 0):
            raise ValueError("pump_freq_hz must be strictly increasing")
        unit = str(self.unit).lower()
        if unit not in _UNIT_TAGS:
            raise ValueError(f"unit must be one of {_UNIT_TAGS}, got {self.unit!r}")
        object.__setattr__(self, "pump_freq_hz", f)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "unit", unit)

    def linear_response(self) -> np.ndarray:
        if self.unit == "db":
            return 10.0 ** (self.response / 20.0)
        return self.response.copy()


@dataclass(frozen=True)
class PeakList:
    """Detected peaks, ascending in frequency.

    freq_hz     : refined peak frequencies [Hz], strictly inside span
    prominences : topographic prominence of each peak (linear units,
                  after baseline subtraction)
    span        : (lo, hi) frequency range of the source trace [Hz]
    assigned_index_start : mode index of the first peak once a dispersion
                  fit has identified it; detection always leaves it None
    """

    freq_hz: np.ndarray
    prominences: np.ndarray
    span: tuple = field(default=(0.0, 0.0))
    assigned_index_start: int | None = None

    def __post_init__(self):
        f = np.asarray(self.freq_hz, dtype=float)
        p = np.asarray(self.prominences, dtype=float)
        if f.ndim != 1 or p.shape != f.shape:
            raise ValueError("freq_hz and prominences must be equal-length 1-D")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise ValueError("freq_hz must be strictly increasing")
        object.__setattr__(self, "freq_hz", f)
        object.__setattr__(self, "prominences", p)
        object.__setattr__(self, "span", (float(self.span[0]), float(self.span[1])))

    def __len__(self):
        return self.freq_hz.size


def detect_peaks(trace: TwoToneTrace, prominence="auto",
                 min_separation: float | None = None) -> PeakList:
    """Find response peaks by topographic prominence.

    Parameters
    ----------
    trace : TwoToneTrace
    prominence : "auto" or a positive float threshold in linear units.
        "auto" uses AUTO_THRESHOLD_MADS times the MAD of the
        first-differenced (baseline-subtracted) response.
    min_separation : minimum peak spacing [Hz]; defaults to
        DEFAULT_SEPARATION_BINS times the median frequency bin. When two
        candidates are closer, the more prominent one wins.

    Returns
    -------
    PeakList with parabolically refined frequencies.
    """
    f = trace.pump_freq_hz
    y = trace.linear_response()
    y = y - np.median(y)

    if prominence == "auto":
        d = np.diff(y)
        threshold = AUTO_THRESHOLD_MADS * np.median(np.abs(d - np.median(d)))
    else:
        threshold = float(prominence)
        if not (threshold > 0 and np.isfinite(threshold)):
            raise ValueError(f"prominence must be positive, got {prominence!r}")

    if min_separation is None:
        min_separation = DEFAULT_SEPARATION_BINS * float(np.median(np.diff(f)))
    elif not (min_separation >= 0 and np.isfinite(min_separation)):
        raise ValueError(f"min_separation must be >= 0, got {min_separation!r}")

    idx, props = find_peaks(y, prominence=threshold)
    if idx.size == 0:
        return PeakList(np.empty(0), np.empty(0), (f[0], f[-1]))
    proms = props["prominences"]

    # Greedy separation enforcement in actual Hz (the sample-count based
    # spacing of find_peaks is wrong on non-uniform frequency axes).
    order = np.lexsort((idx, -proms))
    kept: list[int] = []
    for j in order:
        if all(abs(f[idx[j]] - f[idx[k]]) >= min_separation for k in kept):
            kept.append(j)
    kept.sort(key=lambda j: idx[j])

    refined = np.array([
        _parabolic_vertex(f[i - 1], y[i - 1], f[i], y[i], f[i + 1], y[i + 1])
        for i in (idx[j] for j in kept)
    ])
    return PeakList(refined, proms[[j for j in kept]], (f[0], f[-1]))


def _parabolic_vertex(x0, y0, x1, y1, x2, y2) -> float:
    """Vertex abscissa of the parabola through three points.

    Exact for quadratic data; falls back to the middle point when the
    three samples are not strictly concave. The middle point is a local
    maximum, so the vertex always lies inside (x0, x2).
    """
    s0 = (y1 - y0) / (x1 - x0)
    s2 = (y2 - y1) / (x2 - x1)
    curvature = (s2 - s0) / (x2 - x0)
    if curvature >= 0.0:
        return x1
    return 0.5 * (x0 + x1) - s0 / (2.0 * curvature)
