"""Standing-wave mode spectrum of a finite open chain.

Two independent routes to the same spectrum live here:

* mode_frequencies -- the closed form. An open chain of big_n cells
  supports big_n - 1 internal standing-wave modes with Bloch phases
  theta_m = m*pi/big_n, m = 1 .. big_n-1. Inverting the per-cell
  dispersion relation gives

      omega_m = omega_p * sqrt(x_m / ((omega_p/omega_g)^2 + x_m)),
      x_m = 2*(1 - cos(theta_m))

* oracle_modes -- a direct generalized eigensolve of the lumped-element
  ladder, sharing no dispersion algebra with the closed form. The test
  suite uses it to cross-check mode_frequencies; it is exposed here so
  the CLI can print the deviation column.

Low-index modes follow the linear dispersion omega_m ~ m*pi*omega_g/big_n
(linear_dispersion_approx); high-index modes pile up against the band
edge 2*omega_g/sqrt(1 + 4*(omega_g/omega_p)^2) (high_index_asymptote),
which itself tends to omega_p when omega_g >> omega_p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .circuit import ChainParams, derive_scales
from .errors import AboveLinearBand

# Largest chain the dense eigensolve oracle accepts.
ORACLE_MAX_CELLS = 2000

# The discarded uniform-phase eigenvalue must be this small relative to
# the first real mode, or the solve is considered unsound.
_ZERO_MODE_TOL = 1e-10


@dataclass(frozen=True)
class ModeSpectrum:
    """All internal modes of one chain, ascending in frequency.

    frequencies  : ndarray [rad/s], length big_n - 1
    bloch_phases : ndarray [rad], theta_m = m*pi/big_n
    params       : the ChainParams the spectrum was computed from
    """

    frequencies: np.ndarray
    bloch_phases: np.ndarray
    params: ChainParams


def closed_form_frequency(big_n: int, omega_p: float, omega_g: float, m):
    """Mode frequency from the two scale frequencies alone.

    Accepts scalar or array m (fractional m is allowed; fits use it as a
    continuous model). Always strictly below omega_p.
    """
    theta = np.asarray(m, dtype=float) * (math.pi / big_n)
    x = 2.0 * (1.0 - np.cos(theta))
    q = (omega_p / omega_g) ** 2
    out = omega_p * np.sqrt(x / (q + x))
    return float(out) if np.isscalar(m) else out


def mode_frequencies(chain: ChainParams) -> ModeSpectrum:
    """Closed-form spectrum of the chain's big_n - 1 internal modes."""
    scales = derive_scales(chain)
    m = np.arange(1, chain.big_n)
    freqs = closed_form_frequency(chain.big_n, scales.omega_p, scales.omega_g, m)
    return ModeSpectrum(
        frequencies=freqs,
        bloch_phases=m * (math.pi / chain.big_n),
        params=chain,
    )


def linear_dispersion_approx(chain: ChainParams, m: int) -> float:
    """Low-index linear approximation omega_m ~ m*pi*omega_g/big_n.

    Valid for m*pi/big_n small and omega_m well below omega_p; m = 0 is
    the trivial extension. At m = 1 this equals pi*z_c/l_tot.
    """
    if not (0 <= m <= chain.big_n - 1):
        raise ValueError(
            f"mode index must satisfy 0 <= m <= {chain.big_n - 1}, got {m}"
        )
    return m * math.pi * derive_scales(chain).omega_g / chain.big_n


def high_index_asymptote(chain: ChainParams) -> float:
    """Frequency the high-index modes accumulate toward (band edge).

        2*omega_g / sqrt(1 + 4*(omega_g/omega_p)^2)

    Tends to omega_p when omega_g >> omega_p.
    """
    scales = derive_scales(chain)
    return 2.0 * scales.omega_g / math.sqrt(
        1.0 + 4.0 * (scales.omega_g / scales.omega_p) ** 2
    )


def oracle_modes(chain: ChainParams) -> np.ndarray:
    """Mode frequencies from the lumped-ladder eigenproblem [rad/s].

    Nodes are the big_n stack tops. Consecutive nodes are joined by a full
    stack branch (inductance n*l_j in parallel with capacitance c_j/n) and
    every node carries c_g to ground; the open half-branches at the two
    chain ends carry no current and drop out. Modes solve the generalized
    problem

        Lap v = (omega/omega_g)^2 * (I + (c_j/(n*c_g)) * Lap) v

    where Lap is the path-graph Laplacian (the dimensionless form of both
    the inverse-inductance matrix and the junction-capacitance pattern).
    The single zero mode (uniform phase) is verified to be numerically
    isolated and discarded.
    """
    big_n = chain.big_n
    if big_n > ORACLE_MAX_CELLS:
        raise ValueError(
            f"oracle eigensolve capped at {ORACLE_MAX_CELLS} cells, got {big_n}"
        )
    scales = derive_scales(chain)
    ratio = chain.junction.c_j / (chain.n * chain.c_g)

    deg = np.full(big_n, 2.0)
    deg[0] = deg[-1] = 1.0
    lap = np.diag(deg)
    off = np.full(big_n - 1, -1.0)
    lap += np.diag(off, 1) + np.diag(off, -1)
    cap = np.eye(big_n) + ratio * lap

    vals = scipy.linalg.eigh(lap, cap, eigvals_only=True)
    if abs(vals[0]) >= _ZERO_MODE_TOL * vals[1]:
        raise ArithmeticError(
            "uniform-phase zero mode is not numerically isolated "
            f"(|{vals[0]:.3e}| vs next {vals[1]:.3e})"
        )
    return scales.omega_g * np.sqrt(vals[1:])


def frequency_impedance(chain: ChainParams, omega: float) -> float:
    """Impedance magnitude l_tot*omega of the chain in its linear band [ohm].

    Below the first mode the whole chain behaves as one inductor l_tot.
    The maximum, reached at omega_1, is bounded by pi*z_c.
    """
    if not (math.isfinite(omega) and omega >= 0.0):
        raise ValueError(f"omega must be finite and >= 0, got {omega!r}")
    scales = derive_scales(chain)
    omega_1 = closed_form_frequency(chain.big_n, scales.omega_p, scales.omega_g, 1)
    if omega > omega_1:
        raise AboveLinearBand(
            f"omega = {omega:g} rad/s exceeds the first mode {omega_1:g} rad/s"
        )
    return scales.l_tot * omega


def invert_fundamental(omega_1: float, big_n: int, omega_p: float) -> float:
    """omega_g implied by a measured fundamental mode and a known omega_p.

    Exact inversion of the closed form at m = 1; requires omega_1 < omega_p.
    """
    if not (0.0 < omega_1 < omega_p):
        raise ValueError("need 0 < omega_1 < omega_p to invert")
    x1 = 2.0 * (1.0 - math.cos(math.pi / big_n))
    return omega_p * omega_1 / math.sqrt(x1 * (omega_p**2 - omega_1**2))
