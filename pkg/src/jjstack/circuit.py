"""Lumped-element layer for chains of stacked Josephson junctions.

The chain is big_n identical cells in cascade. One cell is a symmetric T
section: half the series branch, a capacitive shunt to ground, the other
half of the series branch. The series branch of a cell is a stack of n
junctions, each junction an inductance l_j in parallel with its own
capacitance c_j; the shunt is the stack's ground capacitance c_g.

Units are SI throughout and frequencies are angular (rad/s). Impedances
are complex with the e^{+j*omega*t} sign convention, so an inductor has
impedance +j*omega*L and a capacitor 1/(j*omega*C).

Derived scales (see DerivedScales):

    omega_p = 1/sqrt(l_j*c_j)      plasma frequency of a single junction
    omega_g = 1/sqrt(n*c_g*l_j)    cutoff set by the ground capacitance
    z_c     = sqrt(n*l_j/c_g)      characteristic impedance as omega -> 0
    l_tot   = n*big_n*l_j          total series inductance of the chain
    c_stray = big_n*c_g            total capacitance to ground

The propagating band of the periodic chain is the frequency range where
the per-cell dispersion value cos(theta) stays within [-1, 1]; outside it
the response is evanescent and image-impedance evaluation raises
EvanescentBand. The transfer matrix itself remains defined on both sides
through the hyperbolic continuation (see chain_abcd).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral

from .errors import EvanescentBand, PlasmaSingularity

# Relative distance to the plasma pole below which evaluation refuses to
# divide; the 1/(1 - (omega/omega_p)^2) factor has no precision left there.
PLASMA_POLE_GUARD = 1e-12

# Width of the |cos theta| ~ 1 band where the closed-form chain entries
# switch from trig/hyperbolic expressions to a Chebyshev recurrence (the
# closed forms divide by sin(theta) -> 0 at the band edges).
_BAND_EDGE_PAD = 1e-9


@dataclass(frozen=True)
class JunctionParams:
    """Element values of a single junction.

    l_j : junction inductance [H]
    c_j : junction self-capacitance [F]
    """

    l_j: float
    c_j: float

    def __post_init__(self):
        _require_positive("l_j", self.l_j)
        _require_positive("c_j", self.c_j)


@dataclass(frozen=True)
class ChainParams:
    """A chain of big_n stacks, each n junctions deep over one ground cap.

    n     : junctions per stack (series), integer >= 1
    big_n : number of stacks in the chain, integer >= 2
    c_g   : ground capacitance per stack [F]
    """

    n: int
    big_n: int
    junction: JunctionParams
    c_g: float

    def __post_init__(self):
        _require_integer("n", self.n, minimum=1)
        _require_integer("big_n", self.big_n, minimum=2)
        if not isinstance(self.junction, JunctionParams):
            raise ValueError("junction must be a JunctionParams instance")
        _require_positive("c_g", self.c_g)


@dataclass(frozen=True)
class DerivedScales:
    """Characteristic scales of a chain; all fields in SI units."""

    omega_p: float
    omega_g: float
    z_c: float
    l_tot: float
    c_stray: float


@dataclass(frozen=True)
class TwoPortABCD:
    """2x2 transfer (chain) matrix of a two-port; cascades multiply."""

    a: complex
    b: complex
    c: complex
    d: complex

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "TwoPortABCD") -> "TwoPortABCD":
        return TwoPortABCD(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )


def derive_scales(chain: ChainParams) -> DerivedScales:
    """Compute the five characteristic scales of a chain.

    omega_p and omega_g are the two frequency scales; z_c the ohmic scale.
    They satisfy z_c = n*l_j*omega_g = 1/(c_g*omega_g).
    """
    l_j = chain.junction.l_j
    return DerivedScales(
        omega_p=1.0 / math.sqrt(l_j * chain.junction.c_j),
        omega_g=1.0 / math.sqrt(chain.n * chain.c_g * l_j),
        z_c=math.sqrt(chain.n * l_j / chain.c_g),
        l_tot=chain.n * chain.big_n * l_j,
        c_stray=chain.big_n * chain.c_g,
    )


def stack_impedance(chain: ChainParams, omega: float) -> complex:
    """Series impedance of one full stack at omega.

    n junctions in series, each l_j || c_j:

        Z_s = j*n*l_j*omega / (1 - (omega/omega_p)^2)

    Purely imaginary; inductive below omega_p, capacitive above.
    """
    _require_nonnegative_omega(omega)
    scales = derive_scales(chain)
    _guard_plasma_pole(omega, scales.omega_p)
    ratio = omega / scales.omega_p
    return 1j * chain.n * chain.junction.l_j * omega / (1.0 - ratio * ratio)


def ground_admittance(chain: ChainParams, omega: float) -> complex:
    """Shunt admittance of one cell's ground capacitance, Y_g = j*c_g*omega.

    Defined for any real omega; the value at -omega is the complex
    conjugate of the value at +omega.
    """
    if not math.isfinite(omega):
        raise ValueError("omega must be finite")
    return 1j * chain.c_g * omega


def dispersion_cos_theta(chain: ChainParams, omega: float) -> float:
    """Per-cell dispersion value cos(theta) at omega (a real number).

        cos(theta) = 1 - (omega/omega_g)^2 / (2*(1 - (omega/omega_p)^2))

    Equals the A entry of unit_cell_abcd. Values in [-1, 1] mark the
    propagating band; strictly decreasing in omega on [0, omega_p).
    """
    _require_nonnegative_omega(omega)
    scales = derive_scales(chain)
    _guard_plasma_pole(omega, scales.omega_p)
    u = (omega / scales.omega_p) ** 2
    w = (omega / scales.omega_g) ** 2
    return 1.0 - w / (2.0 * (1.0 - u))


def unit_cell_abcd(chain: ChainParams, omega: float) -> TwoPortABCD:
    """ABCD matrix of one symmetric T cell (Z_s/2, Y_g, Z_s/2).

        A = D = 1 + Z_s*Y_g/2
        B = Z_s*(1 + Z_s*Y_g/4)
        C = Y_g

    The determinant is exactly 1 (reciprocal, symmetric network) and A is
    real for a lossless cell.
    """
    z_s = stack_impedance(chain, omega)
    y_g = ground_admittance(chain, omega)
    a = 1.0 + z_s * y_g / 2.0
    return TwoPortABCD(a, z_s * (1.0 + z_s * y_g / 4.0), y_g, a)


def unit_cell_impedance(chain: ChainParams, omega: float) -> float:
    """Image impedance sqrt(B/C) of the cell, real inside the band [ohm].

        Z_u = z_c * sqrt(1 - (omega/omega_g)^2 / (4*(1 - u))) / sqrt(1 - u),
        u = (omega/omega_p)^2

    Tends to z_c as omega -> 0 with a quadratic correction.
    """
    _require_nonnegative_omega(omega)
    scales = derive_scales(chain)
    _guard_plasma_pole(omega, scales.omega_p)
    u = (omega / scales.omega_p) ** 2
    if u > 1.0:
        raise EvanescentBand(
            f"omega = {omega:g} rad/s is above the plasma frequency "
            f"{scales.omega_p:g} rad/s"
        )
    denom = 1.0 - u
    radicand = 1.0 - (omega / scales.omega_g) ** 2 / (4.0 * denom)
    if radicand < 0.0:
        raise EvanescentBand(
            f"omega = {omega:g} rad/s lies outside the propagating band"
        )
    return scales.z_c * math.sqrt(radicand) / math.sqrt(denom)


def chain_abcd(chain: ChainParams, omega: float) -> TwoPortABCD:
    """ABCD matrix of the full big_n-cell chain, in closed form.

    With a = cos(theta) the per-cell dispersion value and B, C the cell
    entries, the cascade of big_n identical unimodular cells is

        [[T_N(a),         B*U_{N-1}(a)],
         [C*U_{N-1}(a),   T_N(a)      ]]

    where T_N and U_{N-1} are Chebyshev polynomials: T_N(cos t) = cos(N*t)
    and U_{N-1}(cos t) = sin(N*t)/sin(t). Inside the band this is the
    familiar cos/sin form in the Bloch phase theta = arccos(a); for
    |a| > 1 the same entries continue hyperbolically with
    theta = j*arccosh|a| (evanescent regime). Entries grow like
    cosh(N*arccosh|a|) there and can overflow to inf deep in that regime.
    """
    cell = unit_cell_abcd(chain, omega)
    a = dispersion_cos_theta(chain, omega)
    t_n, u_nm1 = _cheb_first_second(a, chain.big_n)
    return TwoPortABCD(
        complex(t_n), cell.b * u_nm1, cell.c * u_nm1, complex(t_n)
    )


def _cheb_first_second(a: float, n: int) -> tuple[float, float]:
    """(T_n(a), U_{n-1}(a)) for real a, stable across the band edges."""
    if abs(abs(a) - 1.0) < _BAND_EDGE_PAD:
        # Both closed forms divide by sin(theta) or sinh(t) ~ 0 here; the
        # three-term recurrence is exact at a = +-1 and costs O(n).
        t0, t1 = 1.0, a          # T_0, T_1
        u0, u1 = 1.0, 2.0 * a    # U_0, U_1
        for _ in range(n - 1):
            t0, t1 = t1, 2.0 * a * t1 - t0
            u0, u1 = u1, 2.0 * a * u1 - u0
        return t1, u0
    if a > 1.0:
        t = math.acosh(a)
        return math.cosh(n * t), math.sinh(n * t) / math.sinh(t)
    if a < -1.0:
        t = math.acosh(-a)
        sign = -1.0 if n % 2 else 1.0
        return sign * math.cosh(n * t), -sign * math.sinh(n * t) / math.sinh(t)
    theta = math.acos(a)
    return math.cos(n * theta), math.sin(n * theta) / math.sin(theta)


def _guard_plasma_pole(omega: float, omega_p: float) -> None:
    if abs(omega / omega_p - 1.0) < PLASMA_POLE_GUARD:
        raise PlasmaSingularity(
            f"omega = {omega:g} rad/s sits on the plasma pole at "
            f"{omega_p:g} rad/s"
        )


def _require_nonnegative_omega(omega: float) -> None:
    if not (math.isfinite(omega) and omega >= 0.0):
        raise ValueError(f"omega must be finite and >= 0, got {omega!r}")


def _require_positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


def _require_integer(name: str, value, minimum: int) -> None:
    if not isinstance(value, Integral) or isinstance(value, bool):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
