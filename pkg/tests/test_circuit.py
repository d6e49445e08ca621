"""Lumped-element layer: parameter validation, cell/chain transfer matrices."""

import math

import numpy as np
import pytest

from jjstack import (
    ChainParams,
    EvanescentBand,
    JunctionParams,
    PlasmaSingularity,
    TwoPortABCD,
    chain_abcd,
    derive_scales,
    dispersion_cos_theta,
    ground_admittance,
    stack_impedance,
    unit_cell_abcd,
    unit_cell_impedance,
)
from conftest import random_chain

TWO_PI = 2.0 * math.pi

# Frozen hand evaluations for the 9x138 anchor chain
# (l_j = 4.75 nH, c_j = 28.579 fF, c_g = 0.16289 fF):
ZA_OMEGA_P = 85828136053.17847     # 1/sqrt(l_j*c_j)
ZA_OMEGA_G = 378952458385.098      # 1/sqrt(9*c_g*l_j)
ZA_Z_C = 16200.217595962944        # sqrt(9*l_j/c_g)
ZA_L_TOT = 5.8995e-06              # 9*138*l_j
ZA_C_STRAY = 2.247882e-14          # 138*c_g


class TestParamValidation:
    def test_junction_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            JunctionParams(l_j=0.0, c_j=1e-15)
        with pytest.raises(ValueError):
            JunctionParams(l_j=1e-9, c_j=-1e-15)
        with pytest.raises(ValueError):
            JunctionParams(l_j=math.nan, c_j=1e-15)

    def test_chain_rejects_bad_counts(self):
        j = JunctionParams(l_j=1e-9, c_j=1e-14)
        with pytest.raises(ValueError):
            ChainParams(n=0, big_n=10, junction=j, c_g=1e-16)
        with pytest.raises(ValueError):
            ChainParams(n=2, big_n=1, junction=j, c_g=1e-16)
        with pytest.raises(ValueError):
            ChainParams(n=2.5, big_n=10, junction=j, c_g=1e-16)
        with pytest.raises(ValueError):
            ChainParams(n=True, big_n=10, junction=j, c_g=1e-16)

    def test_chain_rejects_bad_ground_cap_and_junction(self):
        j = JunctionParams(l_j=1e-9, c_j=1e-14)
        with pytest.raises(ValueError):
            ChainParams(n=2, big_n=10, junction=j, c_g=0.0)
        with pytest.raises(ValueError):
            ChainParams(n=2, big_n=10, junction=(1e-9, 1e-14), c_g=1e-16)


def test_derived_scales_frozen_values(za_chain):
    sc = derive_scales(za_chain)
    assert sc.omega_p == pytest.approx(ZA_OMEGA_P, rel=1e-13)
    assert sc.omega_g == pytest.approx(ZA_OMEGA_G, rel=1e-13)
    assert sc.z_c == pytest.approx(ZA_Z_C, rel=1e-13)
    assert sc.l_tot == pytest.approx(ZA_L_TOT, rel=1e-13)
    assert sc.c_stray == pytest.approx(ZA_C_STRAY, rel=1e-13)


def test_derived_scales_internal_identities(za_chain):
    # z_c = n*l_j*omega_g = 1/(c_g*omega_g), three routes to one number
    sc = derive_scales(za_chain)
    assert sc.z_c == pytest.approx(za_chain.n * za_chain.junction.l_j * sc.omega_g, rel=1e-14)
    assert sc.z_c == pytest.approx(1.0 / (za_chain.c_g * sc.omega_g), rel=1e-14)


def test_stack_impedance_sign_and_value(za_chain):
    sc = derive_scales(za_chain)
    below = stack_impedance(za_chain, 0.5 * sc.omega_p)
    above = stack_impedance(za_chain, 2.0 * sc.omega_p)
    assert below.real == 0.0 and above.real == 0.0
    assert below.imag > 0.0       # inductive below the plasma pole
    assert above.imag < 0.0       # capacitive above it

    # low-frequency limit: n junctions in series look like n*l_j
    w = 1e-4 * sc.omega_p
    expected = za_chain.n * za_chain.junction.l_j * w
    assert stack_impedance(za_chain, w).imag == pytest.approx(expected, rel=1e-7)


def test_plasma_pole_guard(za_chain):
    wp = derive_scales(za_chain).omega_p
    for w in (wp, wp * (1.0 + 1e-13), wp * (1.0 - 1e-13)):
        with pytest.raises(PlasmaSingularity):
            stack_impedance(za_chain, w)
        with pytest.raises(PlasmaSingularity):
            dispersion_cos_theta(za_chain, w)
    # just outside the guard band evaluation is allowed
    stack_impedance(za_chain, wp * (1.0 + 1e-9))

    with pytest.raises(ValueError):
        stack_impedance(za_chain, -1.0)
    with pytest.raises(ValueError):
        stack_impedance(za_chain, math.inf)


def test_ground_admittance(za_chain):
    w = TWO_PI * 5e9
    assert ground_admittance(za_chain, w) == 1j * za_chain.c_g * w
    assert ground_admittance(za_chain, -w) == ground_admittance(za_chain, w).conjugate()
    with pytest.raises(ValueError):
        ground_admittance(za_chain, math.nan)


def test_dispersion_cos_theta_basics(za_chain):
    assert dispersion_cos_theta(za_chain, 0.0) == 1.0
    # equals the A entry of the cell, which is real
    w = TWO_PI * 3e9
    cell = unit_cell_abcd(za_chain, w)
    assert cell.a.imag == pytest.approx(0.0, abs=1e-15)
    assert dispersion_cos_theta(za_chain, w) == pytest.approx(cell.a.real, rel=1e-14)


def test_dispersion_strictly_decreasing_in_band():
    rng = np.random.default_rng(42)
    for _ in range(5):
        chain = random_chain(rng, n=int(rng.integers(1, 10)), big_n=12)
        sc = derive_scales(chain)
        edge = 2.0 * sc.omega_g / math.sqrt(1.0 + 4.0 * (sc.omega_g / sc.omega_p) ** 2)
        grid = np.linspace(0.0, 0.99 * edge, 200)
        vals = [dispersion_cos_theta(chain, w) for w in grid]
        assert np.all(np.diff(vals) < 0.0)


def test_unit_cell_matches_component_cascade(za_chain):
    # independent route: explicit half-series / shunt / half-series product
    sc = derive_scales(za_chain)
    for w in (TWO_PI * 1e9, TWO_PI * 9e9, 0.7 * sc.omega_p, 1.5 * sc.omega_p):
        z_s = stack_impedance(za_chain, w)
        y_g = ground_admittance(za_chain, w)
        half = TwoPortABCD(1.0, z_s / 2.0, 0.0, 1.0)
        shunt = TwoPortABCD(1.0, 0.0, y_g, 1.0)
        ref = half @ shunt @ half
        cell = unit_cell_abcd(za_chain, w)
        assert cell.a == pytest.approx(ref.a, rel=1e-12)
        assert cell.b == pytest.approx(ref.b, rel=1e-12)
        assert cell.c == pytest.approx(ref.c, rel=1e-12)
        assert cell.d == pytest.approx(ref.d, rel=1e-12)


def test_unit_cell_determinant_and_symmetry_property():
    rng = np.random.default_rng(7)
    for _ in range(20):
        chain = random_chain(rng, n=int(rng.integers(1, 10)), big_n=5)
        sc = derive_scales(chain)
        w = float(rng.uniform(0.0, 0.999)) * sc.omega_p
        cell = unit_cell_abcd(chain, w)
        assert abs(cell.determinant - 1.0) < 1e-12
        assert cell.a == cell.d
        assert abs(cell.a.imag) < 1e-12


def test_unit_cell_impedance_dc_limit_quadratic(za_chain):
    sc = derive_scales(za_chain)
    # deviation from z_c should shrink like omega^2: ratio of deviations
    # at 2w and w tends to 4
    w = 1e-3 * sc.omega_g
    d1 = abs(unit_cell_impedance(za_chain, w) - sc.z_c) / sc.z_c
    d2 = abs(unit_cell_impedance(za_chain, 2.0 * w) - sc.z_c) / sc.z_c
    assert d2 / d1 == pytest.approx(4.0, rel=1e-2)
    assert unit_cell_impedance(za_chain, 0.0) == pytest.approx(sc.z_c, rel=1e-14)


def test_unit_cell_impedance_evanescent_errors(za_chain):
    sc = derive_scales(za_chain)
    edge = 2.0 * sc.omega_g / math.sqrt(1.0 + 4.0 * (sc.omega_g / sc.omega_p) ** 2)
    # mid-gap point: above the band edge but still below the plasma pole
    with pytest.raises(EvanescentBand):
        unit_cell_impedance(za_chain, 0.5 * (edge + sc.omega_p))
    with pytest.raises(EvanescentBand):
        unit_cell_impedance(za_chain, 1.5 * sc.omega_p)
    # inside the band it is real and positive by construction (returns float)
    assert unit_cell_impedance(za_chain, 0.9 * edge) > 0.0


def test_chain_abcd_matches_repeated_product(za_chain):
    sc = derive_scales(za_chain)
    # in-band, evanescent gap (band edge..plasma), above-plasma regimes
    edge = 2.0 * sc.omega_g / math.sqrt(1.0 + 4.0 * (sc.omega_g / sc.omega_p) ** 2)
    freqs = [0.3 * edge, 0.95 * edge, 0.5 * (edge + sc.omega_p), 1.3 * sc.omega_p]
    for big_n in (2, 3, 10):
        chain = ChainParams(n=za_chain.n, big_n=big_n,
                            junction=za_chain.junction, c_g=za_chain.c_g)
        for w in freqs:
            cell = unit_cell_abcd(chain, w)
            prod = cell
            for _ in range(big_n - 1):
                prod = prod @ cell
            closed = chain_abcd(chain, w)
            for entry, ref in zip("abcd", "abcd"):
                got = getattr(closed, entry)
                want = getattr(prod, ref)
                assert got == pytest.approx(want, rel=1e-10, abs=1e-18)


def test_chain_abcd_recursion_property(za_chain):
    # chain(N) = chain(N-1) @ cell, N = 2..10
    w = TWO_PI * 2.5e9
    cell = unit_cell_abcd(za_chain, w)
    for big_n in range(3, 11):
        longer = ChainParams(n=za_chain.n, big_n=big_n,
                             junction=za_chain.junction, c_g=za_chain.c_g)
        shorter = ChainParams(n=za_chain.n, big_n=big_n - 1,
                              junction=za_chain.junction, c_g=za_chain.c_g)
        lhs = chain_abcd(longer, w)
        rhs = chain_abcd(shorter, w) @ cell
        assert lhs.a == pytest.approx(rhs.a, rel=1e-10)
        assert lhs.b == pytest.approx(rhs.b, rel=1e-10)
        assert lhs.c == pytest.approx(rhs.c, rel=1e-10)
        assert lhs.d == pytest.approx(rhs.d, rel=1e-10)


def test_chain_abcd_band_edge_stability(za_chain):
    # at the band edge cos(theta) = -1 exactly; the closed form would
    # divide by sin(theta) = 0, so the entries must come out finite and
    # match the N-fold product route
    sc = derive_scales(za_chain)
    edge = 2.0 * sc.omega_g / math.sqrt(1.0 + 4.0 * (sc.omega_g / sc.omega_p) ** 2)
    a = dispersion_cos_theta(za_chain, edge)
    assert abs(a + 1.0) < 1e-9

    chain = ChainParams(n=za_chain.n, big_n=6, junction=za_chain.junction,
                        c_g=za_chain.c_g)
    closed = chain_abcd(chain, edge)
    cell = unit_cell_abcd(chain, edge)
    prod = cell
    for _ in range(5):
        prod = prod @ cell
    assert closed.a == pytest.approx(prod.a, rel=1e-7)
    assert closed.b == pytest.approx(prod.b, rel=1e-7)
    # T_6(-1) = 1, U_5(-1) = -6
    assert closed.a.real == pytest.approx(1.0, abs=1e-6)
    assert closed.c == pytest.approx(-6.0 * cell.c, rel=1e-6)


def test_chain_determinant_stays_unimodular(za_chain):
    for w in (TWO_PI * 1e9, TWO_PI * 8e9):
        m = chain_abcd(za_chain, w)
        assert abs(m.determinant - 1.0) < 1e-9


def test_two_port_matmul_identity():
    ident = TwoPortABCD(1.0, 0.0, 0.0, 1.0)
    m = TwoPortABCD(1.2, 3.4j, 0.5j, 1.2)
    out = m @ ident
    assert (out.a, out.b, out.c, out.d) == (m.a, m.b, m.c, m.d)
    assert ident.determinant == 1.0
