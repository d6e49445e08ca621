import math

import numpy as np
import pytest

from jjstack import ChainParams, JunctionParams
from jjstack.extraction import s11_model

TWO_PI = 2.0 * math.pi


@pytest.fixture
def za_chain() -> ChainParams:
    """Chain with the 9-junction stack geometry used as the main anchor."""
    return ChainParams(
        n=9, big_n=138,
        junction=JunctionParams(l_j=4.75e-9, c_j=2.8579e-14),
        c_g=1.6289e-16,
    )


@pytest.fixture
def s11_trace():
    """Factory for clean single-resonance reflection traces."""

    def make(f0, kappa_c, kappa_i, phi_0, span_linewidths=8.0, n_points=401):
        kappa = kappa_c + kappa_i
        half = span_linewidths * kappa / TWO_PI / 2.0
        f = np.linspace(f0 - half, f0 + half, n_points)
        return f, s11_model(TWO_PI * f, TWO_PI * f0, kappa_c, kappa_i, phi_0)

    return make


def random_chain(rng: np.random.Generator, n: int, big_n: int) -> ChainParams:
    """Physically plausible random parameters spanning a few decades."""
    return ChainParams(
        n=n, big_n=big_n,
        junction=JunctionParams(
            l_j=10 ** rng.uniform(-10, -8),
            c_j=10 ** rng.uniform(-15, -13),
        ),
        c_g=10 ** rng.uniform(-17, -15),
    )


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, printed after the test summary."""
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        ok, label = results[num]
        terminalreporter.write_line(
            f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}  {label}"
        )
