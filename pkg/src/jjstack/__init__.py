"""Toolkit for 1-D chains of stacked Josephson junctions.

Models a chain of N series stacks (n junctions each) over a common ground
as a discrete high-impedance transmission line: closed-form standing-mode
spectra with a brute-force eigensolver oracle, peak detection for two-tone
spectroscopy, dispersion / reflection / DC fits that extract circuit
parameters, clogged-evaporation stack geometry, and a design solver that
proposes fabrication parameters for impedance targets.
"""

from .circuit import (
    ChainParams,
    DerivedScales,
    JunctionParams,
    TwoPortABCD,
    chain_abcd,
    derive_scales,
    dispersion_cos_theta,
    ground_admittance,
    stack_impedance,
    unit_cell_abcd,
    unit_cell_impedance,
)
from .design import (
    DesignProposal,
    DesignTarget,
    max_linear_impedance,
    solve_design,
)
from .errors import (
    AboveLinearBand,
    AmbiguousOffset,
    DegenerateData,
    EvanescentBand,
    FileFormatError,
    Infeasible,
    InvertedPyramid,
    JJStackError,
    MissingAnchor,
    NonConvergence,
    OffResonanceTrace,
    PlasmaSingularity,
)
from .extraction import (
    DcFit,
    DispersionFit,
    ImpedanceEstimate,
    ResonanceFit,
    SuperconductorGap,
    dc_linear_fit,
    fit_dispersion,
    fit_s11,
    impedance_from_fit,
    inductance_to_resistance,
    q_factors,
    resistance_to_inductance,
    s11_model,
)
from .geometry import (
    AREA_INDUCTANCE_CONSTANT,
    CLOG_ANGLE_DEFAULT,
    CLOG_ANGLE_IMAGING,
    LayerAreas,
    PyramidStack,
    area_reduction,
    area_to_inductance,
    inhomogeneity_report,
    layer_area,
)
from .peaks import PeakList, TwoToneTrace, detect_peaks
from .spectrum import (
    ModeSpectrum,
    closed_form_frequency,
    frequency_impedance,
    high_index_asymptote,
    invert_fundamental,
    linear_dispersion_approx,
    mode_frequencies,
    oracle_modes,
)

__version__ = "0.1.0"

__all__ = [
    "AREA_INDUCTANCE_CONSTANT",
    "AboveLinearBand",
    "AmbiguousOffset",
    "CLOG_ANGLE_DEFAULT",
    "CLOG_ANGLE_IMAGING",
    "ChainParams",
    "DcFit",
    "DegenerateData",
    "DerivedScales",
    "DesignProposal",
    "DesignTarget",
    "DispersionFit",
    "EvanescentBand",
    "FileFormatError",
    "ImpedanceEstimate",
    "Infeasible",
    "InvertedPyramid",
    "JJStackError",
    "JunctionParams",
    "LayerAreas",
    "MissingAnchor",
    "ModeSpectrum",
    "NonConvergence",
    "OffResonanceTrace",
    "PeakList",
    "PlasmaSingularity",
    "PyramidStack",
    "ResonanceFit",
    "SuperconductorGap",
    "TwoPortABCD",
    "TwoToneTrace",
    "area_reduction",
    "area_to_inductance",
    "chain_abcd",
    "closed_form_frequency",
    "dc_linear_fit",
    "derive_scales",
    "detect_peaks",
    "dispersion_cos_theta",
    "fit_dispersion",
    "fit_s11",
    "frequency_impedance",
    "ground_admittance",
    "high_index_asymptote",
    "impedance_from_fit",
    "inductance_to_resistance",
    "inhomogeneity_report",
    "invert_fundamental",
    "layer_area",
    "linear_dispersion_approx",
    "max_linear_impedance",
    "mode_frequencies",
    "oracle_modes",
    "q_factors",
    "resistance_to_inductance",
    "s11_model",
    "solve_design",
    "stack_impedance",
    "unit_cell_abcd",
    "unit_cell_impedance",
]
