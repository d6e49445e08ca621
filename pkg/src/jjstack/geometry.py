"""Pyramidal junction-stack geometry from mask clogging.

During deposition the resist aperture narrows, so junctions higher in a
stack come out smaller: at height h above the base the square aperture
side shrinks from l to l - 2*h*tan(theta), where theta is the clogging
half-angle measured from vertical. Layer k of a stack with vertical pitch
d sits at height h = k*d.

The area lost between the base layer and height h has the closed form

    delta_a(h) = 4*l*h*tan(theta) - 4*h^2*tan(theta)^2

which is exactly l^2 - (l - 2*h*tan(theta))^2 expanded.

Areas convert to junction inductances through a calibration constant
(AREA_INDUCTANCE_CONSTANT, inductance x area): smaller area, larger
inductance, so a clogged stack has *more* total inductance than a flat
one at the base area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral

import numpy as np

from .errors import InvertedPyramid

# Area-inductance calibration: l_j = AREA_INDUCTANCE_CONSTANT / area.
# 4 nH * um^2 in SI units [H*m^2].
AREA_INDUCTANCE_CONSTANT = 4e-9 * 1e-12

# Clogging half-angle presets [rad]: the calibrated default and the
# alternative value read off cross-section imaging.
CLOG_ANGLE_DEFAULT = math.radians(12.8)
CLOG_ANGLE_IMAGING = math.radians(12.5)


@dataclass(frozen=True)
class PyramidStack:
    """Geometry of one clogged junction stack.

    base_side   : aperture side at the base layer [m]
    layer_pitch : vertical spacing between junction layers [m]
    layer_count : number of junction layers (>= 1); layer k = 0 is the
                  base, layer k sits at height k*layer_pitch
    clog_angle  : pyramid half-angle from vertical [rad], 0 <= angle < pi/2
    """

    base_side: float
    layer_pitch: float
    layer_count: int
    clog_angle: float = CLOG_ANGLE_DEFAULT

    def __post_init__(self):
        if not (self.base_side > 0 and math.isfinite(self.base_side)):
            raise ValueError(f"base_side must be positive, got {self.base_side!r}")
        if not (self.layer_pitch > 0 and math.isfinite(self.layer_pitch)):
            raise ValueError(f"layer_pitch must be positive, got {self.layer_pitch!r}")
        if not isinstance(self.layer_count, Integral) or self.layer_count < 1:
            raise ValueError(f"layer_count must be an integer >= 1, got {self.layer_count!r}")
        if not (0.0 <= self.clog_angle < 0.5 * math.pi):
            raise ValueError(f"clog_angle must be in [0, pi/2), got {self.clog_angle!r}")
        top = self.base_side - 2.0 * (self.layer_count - 1) * self.layer_pitch * math.tan(self.clog_angle)
        if top <= 0.0:
            raise InvertedPyramid(
                f"top layer side would be {top:g} m; the stack pinches off "
                f"before layer {self.layer_count - 1}"
            )


@dataclass(frozen=True)
class LayerAreas:
    """Per-layer areas [m^2] (strictly decreasing for a nonzero angle)
    and the matching inductances [H]."""

    areas: np.ndarray
    inductances: np.ndarray


def layer_area(stack: PyramidStack, k: int) -> float:
    """Area [m^2] of layer k: (base_side - 2*k*pitch*tan(theta))^2."""
    if not (0 <= k < stack.layer_count):
        raise ValueError(
            f"layer index must satisfy 0 <= k < {stack.layer_count}, got {k}"
        )
    side = stack.base_side - 2.0 * k * stack.layer_pitch * math.tan(stack.clog_angle)
    if side <= 0.0:
        raise InvertedPyramid(f"layer {k} side would be {side:g} m")
    return side * side


def area_reduction(base_side: float, height: float, clog_angle: float) -> float:
    """Area lost between the base and a layer at the given height [m^2].

        delta_a = 4*base_side*height*tan(theta) - 4*height^2*tan(theta)^2

    Identical to base_side^2 - (base_side - 2*height*tan(theta))^2 for any
    height below the pinch-off point.
    """
    t = math.tan(clog_angle)
    return 4.0 * base_side * height * t - 4.0 * height * height * t * t


def area_to_inductance(area: float, constant: float = AREA_INDUCTANCE_CONSTANT) -> float:
    """Junction inductance [H] from its area [m^2]: constant / area."""
    if not (area > 0 and math.isfinite(area)):
        raise ValueError(f"area must be positive, got {area!r}")
    if not (constant > 0 and math.isfinite(constant)):
        raise ValueError(f"constant must be positive, got {constant!r}")
    return constant / area


def inhomogeneity_report(stack: PyramidStack,
                         constant: float = AREA_INDUCTANCE_CONSTANT):
    """Per-layer areas/inductances, series total, and relative spread.

    Returns (LayerAreas, total_inductance [H], spread) where spread is
    (max l - min l)/mean l over the layers; 0 exactly for a flat stack.
    The series total always meets or exceeds layer_count times the
    base-layer inductance, with equality only at zero angle.
    """
    areas = np.array([layer_area(stack, k) for k in range(stack.layer_count)])
    inductances = np.array([area_to_inductance(a, constant) for a in areas])
    total = float(np.sum(inductances))
    spread = float((inductances.max() - inductances.min()) / inductances.mean())
    return LayerAreas(areas=areas, inductances=inductances), total, spread
