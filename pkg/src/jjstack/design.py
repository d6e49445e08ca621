"""Design-space inversion: from impedance targets to chain parameters.

Given a target characteristic impedance z_c and total inductance l_tot,
solve_design enumerates integer (n, big_n) pairs and solves the remaining
continuous parameter from

    z_c^2 = n*l_j/c_g        and        l_tot = n*big_n*l_j

anchored by either a known junction inductance (oxide/area technology
fixes l_j) or a known ground capacitance (layout fixes c_g). Raising the
impedance at fixed footprint therefore has two levers: a larger l_j
(thicker oxide or smaller area) or a deeper stack (larger n at smaller
big_n), and each proposal carries a tag for which lever it leans on.

The usable band of a proposal ends at its first mode omega_1, where the
chain impedance peaks at pi*z_c (max_linear_impedance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from scipy.constants import e as ELEMENTARY_CHARGE
from scipy.constants import hbar as HBAR

from .circuit import ChainParams, JunctionParams, derive_scales
from .errors import Infeasible, MissingAnchor
from .spectrum import closed_form_frequency

# Enumeration caps when the caller gives no explicit bounds.
DEFAULT_MAX_STACK_DEPTH = 500
DEFAULT_MAX_CHAIN_LENGTH = 100_000

# Junction capacitance default comes from a nominal plasma frequency.
DEFAULT_PLASMA_FREQ = 2.0 * math.pi * 15e9

# Proposals are Infeasible when either achieved target misses by more.
FEASIBILITY_TOL = 0.10

# Relative deviations below the roundoff of the anchored solve count as
# exact hits in the ranking; otherwise the ulp pattern of the sqrt/divide
# round trip would decide the order among proposals that all meet z_c.
SORT_DEVIATION_FLOOR = 1e-12

# Tag rule: a stack-based proposal whose junctions are still unusually
# inductive on their own (l_j above this) leans on both levers.
MIXED_STRATEGY_LJ = 2e-9

_BOUND_KEYS = ("n", "big_n", "l_j", "c_g")


@dataclass(frozen=True)
class DesignTarget:
    """Impedance and inductance goals plus optional parameter bounds.

    constraints maps any of "n", "big_n", "l_j", "c_g" to (lo, hi)
    inclusive bounds; omitted keys fall back to the enumeration caps.
    """

    z_c_target: float
    l_tot_target: float
    constraints: Mapping[str, tuple] | None = None

    def __post_init__(self):
        if not (self.z_c_target > 0 and math.isfinite(self.z_c_target)):
            raise ValueError(f"z_c_target must be positive, got {self.z_c_target!r}")
        if not (self.l_tot_target > 0 and math.isfinite(self.l_tot_target)):
            raise ValueError(f"l_tot_target must be positive, got {self.l_tot_target!r}")
        for key, bound in (self.constraints or {}).items():
            if key not in _BOUND_KEYS:
                raise ValueError(f"unknown constraint {key!r}; use one of {_BOUND_KEYS}")
            lo, hi = bound
            if not (lo <= hi):
                raise ValueError(f"constraint {key} has empty interval {bound!r}")

    def bound(self, key, default_lo, default_hi):
        if self.constraints and key in self.constraints:
            lo, hi = self.constraints[key]
            return float(lo), float(hi)
        return default_lo, default_hi


@dataclass(frozen=True)
class DesignProposal:
    """One integer (n, big_n) solution; everything else is recomputed on
    access from the stored element values so it can never go stale.

    omega_1 is None for a single-stack chain, which has no internal mode.
    """

    n: int
    big_n: int
    l_j: float
    c_g: float
    c_j: float
    strategy_tag: str

    @property
    def chain(self) -> ChainParams | None:
        if self.big_n >= 2:
            return ChainParams(
                n=self.n,
                big_n=self.big_n,
                junction=JunctionParams(l_j=self.l_j, c_j=self.c_j),
                c_g=self.c_g,
            )
        return None

    @property
    def achieved_z_c(self) -> float:
        chain = self.chain
        if chain is not None:
            return derive_scales(chain).z_c
        return math.sqrt(self.n * self.l_j / self.c_g)

    @property
    def achieved_l_tot(self) -> float:
        chain = self.chain
        if chain is not None:
            return derive_scales(chain).l_tot
        return self.n * self.big_n * self.l_j

    @property
    def omega_1(self) -> float | None:
        chain = self.chain
        if chain is None:
            return None
        scales = derive_scales(chain)
        return closed_form_frequency(self.big_n, scales.omega_p, scales.omega_g, 1)

    @property
    def max_linear_impedance(self) -> float:
        return math.pi * self.achieved_z_c

    @property
    def e_j_over_e_c(self) -> float:
        """Per-junction Josephson-to-charging energy ratio (informational)."""
        e_j = (HBAR / (2.0 * ELEMENTARY_CHARGE)) ** 2 / self.l_j
        e_c = ELEMENTARY_CHARGE**2 / (2.0 * self.c_j)
        return e_j / e_c


def solve_design(target: DesignTarget, *, anchor_l_j: float | None = None,
                 anchor_c_g: float | None = None,
                 plasma_freq: float = DEFAULT_PLASMA_FREQ,
                 max_proposals: int = 10) -> list[DesignProposal]:
    """Enumerate chains meeting the target, best first.

    For each stack depth n within bounds, the anchored relation fixes the
    free element value exactly (so the achieved z_c matches the target up
    to roundoff) and the chain length candidates are the two integers
    bracketing l_tot_target/(n*l_j). Proposals are ordered by relative
    |achieved - target| deviation, impedance first, then inductance, then
    (n, big_n) as a deterministic tiebreak; deviations at float roundoff
    (below SORT_DEVIATION_FLOOR) rank as exact hits.

    c_j defaults from the configurable plasma frequency (omega_p/2pi =
    15 GHz unless overridden), which omega_1 needs.

    Raises MissingAnchor unless exactly one anchor is given, and
    Infeasible when even the best pair misses either target by more than
    10%.
    """
    if (anchor_l_j is None) == (anchor_c_g is None):
        raise MissingAnchor("provide exactly one of anchor_l_j / anchor_c_g")
    if not (plasma_freq > 0 and math.isfinite(plasma_freq)):
        raise ValueError(f"plasma_freq must be positive, got {plasma_freq!r}")

    n_lo, n_hi = target.bound("n", 1, DEFAULT_MAX_STACK_DEPTH)
    n_lo, n_hi = max(1, math.ceil(n_lo)), math.floor(n_hi)
    big_lo, big_hi = target.bound("big_n", 1, DEFAULT_MAX_CHAIN_LENGTH)
    big_lo, big_hi = max(1, math.ceil(big_lo)), math.floor(big_hi)
    lj_lo, lj_hi = target.bound("l_j", 0.0, math.inf)
    cg_lo, cg_hi = target.bound("c_g", 0.0, math.inf)

    zc2 = target.z_c_target**2
    seen: set[tuple[int, int]] = set()
    proposals: list[DesignProposal] = []
    for n in range(n_lo, n_hi + 1):
        if anchor_l_j is not None:
            l_j = float(anchor_l_j)
            c_g = n * l_j / zc2
        else:
            c_g = float(anchor_c_g)
            l_j = zc2 * c_g / n
        if not (lj_lo <= l_j <= lj_hi and cg_lo <= c_g <= cg_hi):
            continue

        ideal = target.l_tot_target / (n * l_j)
        for big_n in {math.floor(ideal), math.ceil(ideal)}:
            big_n = int(min(max(big_n, big_lo), big_hi))
            if big_n < 1 or (n, big_n) in seen:
                continue
            seen.add((n, big_n))
            proposals.append(DesignProposal(
                n=n,
                big_n=big_n,
                l_j=l_j,
                c_g=c_g,
                c_j=1.0 / (l_j * plasma_freq**2),
                strategy_tag=_strategy_tag(n, l_j),
            ))

    if not proposals:
        raise Infeasible("no integer (n, big_n) pair lies within the bounds")

    def deviations(p):
        zc_dev = abs(p.achieved_z_c - target.z_c_target) / target.z_c_target
        lt_dev = abs(p.achieved_l_tot - target.l_tot_target) / target.l_tot_target
        return (
            0.0 if zc_dev < SORT_DEVIATION_FLOOR else zc_dev,
            0.0 if lt_dev < SORT_DEVIATION_FLOOR else lt_dev,
        )

    proposals.sort(key=lambda p: deviations(p) + (p.n, p.big_n))
    best_zc_dev, best_lt_dev = deviations(proposals[0])
    if best_zc_dev > FEASIBILITY_TOL or best_lt_dev > FEASIBILITY_TOL:
        raise Infeasible(
            f"best candidate misses the targets by {best_zc_dev:.1%} (z_c) "
            f"and {best_lt_dev:.1%} (l_tot); tolerance is {FEASIBILITY_TOL:.0%}"
        )
    return proposals[:max_proposals]


def max_linear_impedance(chain: ChainParams) -> float:
    """Impedance ceiling of the linear band, pi*z_c [ohm].

    The chain looks like the plain inductor l_tot up to its first mode,
    where the impedance l_tot*omega_1 tops out at pi*z_c.
    """
    return math.pi * derive_scales(chain).z_c


def _strategy_tag(n: int, l_j: float) -> str:
    if n == 1:
        return "thicker-oxide"
    if l_j > MIXED_STRATEGY_LJ:
        return "mixed"
    return "deeper-stack"
