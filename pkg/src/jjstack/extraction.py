"""Parameter extraction from measured data.

Three extraction paths feed the circuit model:

* DC: per-stack resistance slope from resistance-vs-stack-count data
  (least squares through the origin), converted to a junction inductance
  through the Ambegaokar-Baratoff relation with an explicit gap and an
  empirical correction factor.

* Dispersion: fit of the closed-form mode spectrum to a detected peak
  list, including a search over the unknown index offset of the first
  visible mode, returning (omega_p, omega_g) with covariance.

* Reflection: complex fit of a single-port resonance model to an S11
  trace, returning (omega_0, kappa_c, kappa_i, phi_0) and Q factors, with
  a caveat flag when an interfering background makes the kappa split
  unreliable.

All fits run a damped Gauss-Newton iteration (Levenberg-style adaptive
damping: x10 on a rejected step, /10 on an accepted one), relative-step
convergence 1e-10, at most 200 iterations, fully deterministic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import e as ELEMENTARY_CHARGE
from scipy.constants import hbar as HBAR

from .errors import (
    AmbiguousOffset,
    DegenerateData,
    MissingAnchor,
    NonConvergence,
    OffResonanceTrace,
)
from .peaks import PeakList
from .spectrum import closed_form_frequency

# Bulk aluminum superconducting gap, the default for tunnel-resistance
# conversions. Override per run for other films.
DEFAULT_GAP_JOULES = 180e-6 * ELEMENTARY_CHARGE

# Empirical multiplier applied to the Ambegaokar-Baratoff inductance,
# calibrated against junction batches whose effective thin-film gap
# deviates from the nominal input value.
DEFAULT_GAP_CORRECTION = 1.45

# Gauss-Newton contract shared by every fit in this module.
MAX_FIT_ITERATIONS = 200
REL_STEP_TOL = 1e-10

# fano caveat triggers: rotation angle beyond this, or data further from
# its best circle than this many residual noise floors.
_CAVEAT_PHI = 0.1
_CAVEAT_CIRCLE_FACTOR = 5.0


@dataclass(frozen=True)
class SuperconductorGap:
    """Superconducting gap used in resistance/inductance conversions.

    delta             : gap energy [J] (default: bulk aluminum, 180 ueV)
    correction_factor : dimensionless empirical multiplier on the inferred
                        inductance (equivalently, divisor on the effective
                        gap); default 1.45
    """

    delta: float = DEFAULT_GAP_JOULES
    correction_factor: float = DEFAULT_GAP_CORRECTION

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if not (self.correction_factor > 0 and math.isfinite(self.correction_factor)):
            raise ValueError(
                f"correction_factor must be positive, got {self.correction_factor!r}"
            )


def resistance_to_inductance(r: float, gap: SuperconductorGap | None = None) -> float:
    """Junction inductance [H] from its normal-state tunnel resistance [ohm].

    The Ambegaokar-Baratoff relation ties the resistance to the critical
    current, I_c = pi*delta/(2*e*r), and the Josephson inductance is
    hbar/(2*e*I_c), giving the composite

        l_j = correction_factor * hbar * r / (pi * delta)

    The correction factor rescales the effective gap (factor > 1 means the
    batch behaves as if the gap were lower than the nominal input, raising
    the inductance inferred from a given resistance). Strictly increasing
    in r; exact inverse of inductance_to_resistance.
    """
    gap = gap or SuperconductorGap()
    if not (r > 0 and math.isfinite(r)):
        raise ValueError(f"resistance must be positive, got {r!r}")
    return gap.correction_factor * HBAR * r / (math.pi * gap.delta)


def inductance_to_resistance(l_j: float, gap: SuperconductorGap | None = None) -> float:
    """Normal-state resistance [ohm] implied by a junction inductance [H]."""
    gap = gap or SuperconductorGap()
    if not (l_j > 0 and math.isfinite(l_j)):
        raise ValueError(f"inductance must be positive, got {l_j!r}")
    return math.pi * gap.delta * l_j / (HBAR * gap.correction_factor)


@dataclass(frozen=True)
class DcFit:
    """Through-origin fit of resistance vs stack count.

    slope                   : ohm per stack
    slope_stderr            : 1-sigma on the slope (NaN for a single point)
    junctions_per_stack     : n used for the per-junction conversion
    per_junction_resistance : slope / n [ohm]
    l_j                     : inferred junction inductance [H]
    """

    slope: float
    slope_stderr: float
    junctions_per_stack: int
    per_junction_resistance: float
    l_j: float


def dc_linear_fit(points, junctions_per_stack: int,
                  gap: SuperconductorGap | None = None) -> DcFit:
    """Fit R = slope * stack_count through the origin.

    points : iterable of (stack_count, resistance_ohm)

    The through-origin slope is sum(x*y)/sum(x^2). A single point is
    accepted (slope = R/k, no error estimate); two or more points that all
    share one stack count raise DegenerateData because they cannot confirm
    the proportionality.
    """
    junctions_per_stack = int(junctions_per_stack)
    if junctions_per_stack < 1:
        raise ValueError(
            f"junctions_per_stack must be >= 1, got {junctions_per_stack}"
        )
    pts = [(int(k), float(r)) for k, r in points]
    if not pts:
        raise ValueError("need at least one (stack_count, resistance) point")
    for k, r in pts:
        if k < 1:
            raise ValueError(f"stack counts must be >= 1, got {k}")
        if not (r > 0 and math.isfinite(r)):
            raise ValueError(f"resistances must be positive, got {r!r}")
    x = np.array([k for k, _ in pts], dtype=float)
    y = np.array([r for _, r in pts], dtype=float)
    if x.size >= 2 and np.all(x == x[0]):
        raise DegenerateData(
            "all points share one stack count; the per-stack slope is unconstrained"
        )

    sxx = float(x @ x)
    slope = float(x @ y) / sxx
    if x.size >= 2:
        resid = y - slope * x
        stderr = math.sqrt(float(resid @ resid) / (x.size - 1) / sxx)
    else:
        stderr = float("nan")

    per_junction = slope / junctions_per_stack
    return DcFit(
        slope=slope,
        slope_stderr=stderr,
        junctions_per_stack=int(junctions_per_stack),
        per_junction_resistance=per_junction,
        l_j=resistance_to_inductance(per_junction, gap),
    )


# ----------------------- damped Gauss-Newton core -----------------------


def _numeric_jacobian(fn, x, m):
    jac = np.empty((m, x.size))
    for i in range(x.size):
        h = 1e-7 * max(abs(x[i]), 1e-3)
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (fn(xp) - fn(xm)) / (2.0 * h)
    return jac


def _damped_gauss_newton(residual_fn, x0, typical, *, step_filter=None,
                         max_iter=MAX_FIT_ITERATIONS, rel_tol=REL_STEP_TOL):
    """Gauss-Newton with multiplicative Levenberg damping.

    Work happens in parameters scaled by `typical` so the relative-step
    stopping rule treats every parameter on an even footing, including
    ones converging to zero. A trial step is rejected (damping x10) when
    it violates step_filter, fails to evaluate finitely, or increases the
    sum of squares; accepted steps relax damping (/10).

    Returns (x, info); info carries converged, n_iter, ssr, residual_rms,
    covariance (residual-scaled, in original parameter units).
    """
    typ = np.asarray(typical, dtype=float)
    x = np.asarray(x0, dtype=float) / typ

    def fn(xs):
        return np.asarray(residual_fn(xs * typ), dtype=float)

    r = fn(x)
    m = r.size
    ssr = float(r @ r)
    lam = 1e-3
    converged = False
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        jac = _numeric_jacobian(fn, x, m)
        jtj = jac.T @ jac
        g = jac.T @ r
        diag = np.clip(np.diag(jtj).copy(), 1e-30, None)

        accepted = None
        while lam <= 1e14:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_try = x + step
            if step_filter is not None and not step_filter(x_try * typ):
                lam *= 10.0
                continue
            r_try = fn(x_try)
            ssr_try = float(r_try @ r_try)
            if not math.isfinite(ssr_try) or ssr_try > ssr:
                lam *= 10.0
                continue
            x, r, ssr = x_try, r_try, ssr_try
            lam = max(lam * 0.1, 1e-15)
            accepted = step
            break

        if accepted is None:
            # No damping level yields a downhill step: stationary point.
            converged = True
            break
        if np.max(np.abs(accepted)) <= rel_tol * max(1.0, float(np.max(np.abs(x)))):
            converged = True
            break

    jac = _numeric_jacobian(fn, x, m)
    jtj = jac.T @ jac
    dof = m - x.size
    scale = ssr / dof if dof > 0 else 0.0
    try:
        cov = scale * np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = scale * np.linalg.pinv(jtj)
    cov = cov * np.outer(typ, typ)

    info = {
        "converged": converged,
        "n_iter": n_iter,
        "ssr": ssr,
        "residual_rms": math.sqrt(ssr / m),
        "covariance": cov,
    }
    return x * typ, info


# --------------------------- dispersion fit ---------------------------


@dataclass(frozen=True)
class DispersionFit:
    """Result of fitting the closed-form spectrum to detected peaks.

    omega_p, omega_g        : fitted scales [rad/s]
    covariance              : 2x2 residual-scaled covariance on them
    residual_rms            : rms relative frequency residual
    index_offset            : o; the first detected peak is mode o+1
    predicted_missing_modes : model frequencies for m = 1..o [rad/s]
    big_n                   : chain length the indices refer to
    """

    omega_p: float
    omega_g: float
    covariance: np.ndarray
    residual_rms: float
    index_offset: int
    predicted_missing_modes: np.ndarray
    big_n: int

    def uncertainties(self):
        """1-sigma (omega_p, omega_g) from the covariance diagonal."""
        d = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        return float(d[0]), float(d[1])


def fit_dispersion(peaks: PeakList, big_n: int,
                   offset_search=range(0, 6)) -> DispersionFit:
    """Fit (omega_p, omega_g) and the mode-index offset to a peak list.

    Peak k (1-based, ascending) is assigned index m_k = offset + k; each
    candidate offset is fit by least squares on relative frequency
    residuals and the offset with the smallest residual wins.

    Initialization: omega_p starts just above the highest peak. For
    omega_g two deterministic starts are tried per offset and the lower
    residual kept: the median adjacent peak spacing (the low-index linear
    slope), and the exact dispersion inversion of the lowest peak at its
    assumed index. The second start matters when most visible modes sit
    on the band-edge plateau, where the median spacing badly
    underestimates omega_g and a single start can stall in the
    omega_p -> inf basin.

    Raises AmbiguousOffset when the two best offsets' residuals differ by
    less than 5% (both candidates reported on the exception), and
    NonConvergence when no candidate offset converges.
    """
    freq = np.asarray(peaks.freq_hz, dtype=float)
    if freq.size < 3:
        raise ValueError(f"need at least 3 peaks, got {freq.size}")
    w = 2.0 * math.pi * np.sort(freq)
    if np.any(np.diff(w) <= 0):
        raise DegenerateData("peak frequencies must be distinct")

    k = np.arange(1, w.size + 1, dtype=float)
    omega_g0 = big_n * float(np.median(np.diff(w))) / math.pi
    omega_p0 = 1.05 * float(w[-1])

    candidates = []
    for offset in offset_search:
        m = offset + k
        if m[-1] > big_n - 1:
            continue

        def residual(x, m=m):
            model = closed_form_frequency(big_n, x[0], x[1], m)
            return (model - w) / w

        # omega_p0 > w[0] always (it exceeds the highest peak), so the
        # inversion start is well defined for every candidate offset.
        x_first = 2.0 * (1.0 - math.cos(m[0] * math.pi / big_n))
        omega_g_inv = omega_p0 * w[0] / math.sqrt(
            x_first * (omega_p0**2 - w[0] ** 2)
        )

        best = None
        for x0 in ((omega_p0, omega_g_inv), (omega_p0, omega_g0)):
            xopt, info = _damped_gauss_newton(
                residual, x0, x0,
                step_filter=lambda xt: xt[0] > 0 and xt[1] > 0,
            )
            if info["converged"] and (
                best is None or info["residual_rms"] < best[2]["residual_rms"]
            ):
                best = (int(offset), xopt, info)
        if best is not None:
            candidates.append(best)

    if not candidates:
        raise NonConvergence(
            "no index offset produced a converged dispersion fit"
        )
    candidates.sort(key=lambda c: (c[2]["residual_rms"], c[0]))

    if len(candidates) >= 2:
        best_rms = candidates[0][2]["residual_rms"]
        next_rms = candidates[1][2]["residual_rms"]
        tied = next_rms <= 0.0 or (next_rms - best_rms) / next_rms < 0.05
        if tied:
            raise AmbiguousOffset(
                f"offsets {candidates[0][0]} and {candidates[1][0]} fit the "
                f"peaks equally well (rms {best_rms:.3e} vs {next_rms:.3e})",
                candidates=[(c[0], c[2]["residual_rms"]) for c in candidates[:2]],
            )

    offset, (omega_p, omega_g), info = candidates[0]
    missing = closed_form_frequency(
        big_n, omega_p, omega_g, np.arange(1, offset + 1, dtype=float)
    ) if offset > 0 else np.empty(0)
    return DispersionFit(
        omega_p=float(omega_p),
        omega_g=float(omega_g),
        covariance=info["covariance"],
        residual_rms=info["residual_rms"],
        index_offset=offset,
        predicted_missing_modes=np.atleast_1d(missing),
        big_n=int(big_n),
    )


@dataclass(frozen=True)
class ImpedanceEstimate:
    """Characteristic impedance and companions inferred from a fit.

    route "l_j": z_c = n*l_j*omega_g with l_j anchored from DC data.
    route "c_g": z_c = 1/(c_g*omega_g) with c_g anchored from EM modeling.
    """

    z_c: float
    l_tot: float
    l_j: float
    c_g: float
    c_j: float
    omega_1: float
    route: str


def impedance_from_fit(fit: DispersionFit, chain_n: int, *,
                       anchor_l_j: float | None = None,
                       anchor_c_g: float | None = None) -> ImpedanceEstimate:
    """Characteristic impedance from a dispersion fit plus one anchor.

    omega_g fixes only the product of the per-cell inductance and the
    ground capacitance; one of the two must be anchored externally.
    Returns the full parameter set implied by the anchor, including
    c_j = 1/(l_j*omega_p^2) and the exact first mode.
    """
    if (anchor_l_j is None) == (anchor_c_g is None):
        raise MissingAnchor("provide exactly one of anchor_l_j / anchor_c_g")
    if chain_n < 1:
        raise ValueError(f"chain_n must be >= 1, got {chain_n}")

    if anchor_l_j is not None:
        if not (anchor_l_j > 0 and math.isfinite(anchor_l_j)):
            raise ValueError(f"anchor_l_j must be positive, got {anchor_l_j!r}")
        l_j = float(anchor_l_j)
        z_c = chain_n * l_j * fit.omega_g
        c_g = 1.0 / (chain_n * l_j * fit.omega_g**2)
        route = "l_j"
    else:
        if not (anchor_c_g > 0 and math.isfinite(anchor_c_g)):
            raise ValueError(f"anchor_c_g must be positive, got {anchor_c_g!r}")
        c_g = float(anchor_c_g)
        z_c = 1.0 / (c_g * fit.omega_g)
        l_j = z_c / (chain_n * fit.omega_g)
        route = "c_g"

    return ImpedanceEstimate(
        z_c=z_c,
        l_tot=chain_n * fit.big_n * l_j,
        l_j=l_j,
        c_g=c_g,
        c_j=1.0 / (l_j * fit.omega_p**2),
        omega_1=closed_form_frequency(fit.big_n, fit.omega_p, fit.omega_g, 1),
        route=route,
    )


# ----------------------------- S11 fit -----------------------------


def s11_model(omega, omega_0: float, kappa_c: float, kappa_i: float,
              phi_0: float):
    """Complex reflection of a single port-coupled mode near resonance.

        S11 = 1 - 2*kappa_c*(1 + j*tan(phi_0))
                  / (kappa_c + kappa_i + 2j*(omega - omega_0))

    phi_0 rotates and scales the resonance circle about the off-resonant
    point 1+0j (feedline impedance mismatch). The locus over omega is
    always a circle through 1; at phi_0 = 0 its diameter is
    2*kappa_c/(kappa_c + kappa_i).
    """
    omega = np.asarray(omega, dtype=float)
    num = 2.0 * kappa_c * (1.0 + 1j * math.tan(phi_0))
    return 1.0 - num / (kappa_c + kappa_i + 2j * (omega - omega_0))


@dataclass(frozen=True)
class ResonanceFit:
    """Fitted single-mode reflection parameters.

    omega_0, kappa_c, kappa_i : resonance frequency and rates [rad/s]
    phi_0                     : mismatch rotation [rad]
    q_tot                     : omega_0/(kappa_c + kappa_i)
    q_c                       : omega_0/kappa_c
    q_i_lower_bound           : omega_0/kappa_i normally; degrades to
                                q_tot when fano_caveat is set (the split
                                is then unreliable, only the total rate
                                bounds the internal Q from below)
    fano_caveat               : kappa split unreliable (large |phi_0| or
                                visibly non-circular data)
    covariance                : 4x4 residual-scaled covariance
    residual_rms              : rms complex residual magnitude
    """

    omega_0: float
    kappa_c: float
    kappa_i: float
    phi_0: float
    q_tot: float
    q_c: float
    q_i_lower_bound: float
    fano_caveat: bool
    covariance: np.ndarray = field(repr=False)
    residual_rms: float = 0.0


def fit_s11(freq_hz, s11, *, init=None) -> ResonanceFit:
    """Fit the reflection model to a complex S11 trace.

    freq_hz : strictly increasing frequencies [Hz], >= 16 points
    s11     : complex reflection samples
    init    : optional (omega_0, kappa_c, kappa_i, phi_0) override; by
              default omega_0 starts at the |S11| minimum, the total rate
              at the full width at half depth of 1-|S11|^2, split evenly,
              and phi_0 at 0.

    Raises OffResonanceTrace when no dip exceeds 3x the point noise, and
    NonConvergence when the iteration budget runs out. Warns when the
    trace spans fewer than 3 fitted linewidths.
    """
    f = np.asarray(freq_hz, dtype=float)
    s = np.asarray(s11, dtype=complex)
    if f.ndim != 1 or s.shape != f.shape:
        raise ValueError("freq_hz and s11 must be equal-length 1-D")
    if f.size < 16:
        raise ValueError(f"need at least 16 points, got {f.size}")
    if np.any(np.diff(f) <= 0):
        raise ValueError("freq_hz must be strictly increasing")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(s))):
        raise ValueError("trace values must be finite")

    w = 2.0 * math.pi * f
    mag = np.abs(s)
    d = np.diff(mag)
    point_noise = 1.4826 * float(np.median(np.abs(d - np.median(d)))) / math.sqrt(2.0)
    depth = float(np.median(mag) - mag.min())
    if depth <= 3.0 * point_noise:
        raise OffResonanceTrace(
            f"deepest dip ({depth:.3e}) does not exceed 3x the point noise "
            f"({point_noise:.3e})"
        )

    if init is None:
        init = _s11_initial_guess(w, mag)
    x0 = np.asarray(init, dtype=float)
    typical = np.array([x0[0], x0[1] + x0[2], x0[1] + x0[2], 1.0])

    def residual(x):
        delta = s11_model(w, *x) - s
        return np.concatenate([delta.real, delta.imag])

    def admissible(x):
        return x[0] > 0 and x[1] > 0 and x[2] >= 0 and abs(x[3]) < 0.5 * math.pi

    xopt, info = _damped_gauss_newton(residual, x0, typical, step_filter=admissible)
    if not info["converged"]:
        raise NonConvergence(
            f"reflection fit did not converge in {MAX_FIT_ITERATIONS} iterations"
        )
    omega_0, kappa_c, kappa_i, phi_0 = (float(v) for v in xopt)
    kappa_i = max(kappa_i, 0.0)
    kappa = kappa_c + kappa_i

    if w[-1] - w[0] < 3.0 * kappa:
        warnings.warn(
            "trace spans fewer than 3 fitted linewidths; rates may be "
            "poorly constrained",
            stacklevel=2,
        )

    # Caveat: an interfering background shows up as a rotated circle
    # (phi_0) or as data that is not a circle at all.
    noise_floor = info["residual_rms"] * math.sqrt(2.0)
    circle_dev = _circle_deviation(s)
    caveat = abs(phi_0) > _CAVEAT_PHI or (
        circle_dev > _CAVEAT_CIRCLE_FACTOR * noise_floor + 1e-9
    )

    q_tot = omega_0 / kappa
    q_c = omega_0 / kappa_c
    if caveat:
        q_i_lower = q_tot
    else:
        q_i_lower = omega_0 / kappa_i if kappa_i > 0 else float("inf")

    return ResonanceFit(
        omega_0=omega_0,
        kappa_c=kappa_c,
        kappa_i=kappa_i,
        phi_0=phi_0,
        q_tot=q_tot,
        q_c=q_c,
        q_i_lower_bound=q_i_lower,
        fano_caveat=bool(caveat),
        covariance=info["covariance"],
        residual_rms=info["residual_rms"],
    )


def q_factors(fit: ResonanceFit) -> tuple[float, float, float]:
    """(q_tot, q_c, q_i_lower_bound); the last two are non-contractual
    when fit.fano_caveat is set."""
    return fit.q_tot, fit.q_c, fit.q_i_lower_bound


def _s11_initial_guess(w, mag):
    i0 = int(np.argmin(mag))
    omega_0 = float(w[i0])
    dip = 1.0 - mag**2
    half = dip[i0] / 2.0
    lo = i0
    while lo > 0 and dip[lo - 1] >= half:
        lo -= 1
    hi = i0
    while hi < dip.size - 1 and dip[hi + 1] >= half:
        hi += 1
    min_width = float(np.min(np.diff(w)))
    kappa = max(float(w[hi] - w[lo]), min_width)
    return omega_0, kappa / 2.0, kappa / 2.0, 0.0


def _circle_deviation(z) -> float:
    """Worst distance of the samples from their least-squares circle."""
    x, y = z.real, z.imag
    a = np.column_stack([2.0 * x, 2.0 * y, np.ones_like(x)])
    b = x * x + y * y
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    cx, cy, t = (float(v) for v in sol)
    radius = math.sqrt(max(t + cx * cx + cy * cy, 0.0))
    dist = np.hypot(x - cx, y - cy)
    return float(np.max(np.abs(dist - radius)))
