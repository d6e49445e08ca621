"""Exception types shared across the package.

Construction-time validation of value types raises plain ValueError;
the classes below mark domain conditions a caller may want to catch
individually. The CLI maps them onto exit codes (see cli.py).
"""


class JJStackError(Exception):
    """Base class for all domain errors raised by this package."""


class PlasmaSingularity(JJStackError):
    """Frequency coincides with the junction plasma resonance pole."""


class EvanescentBand(JJStackError):
    """Frequency lies outside the propagating band of the chain."""


class AboveLinearBand(JJStackError):
    """Frequency exceeds the first chain mode; the chain no longer looks
    like a plain inductor there."""


class DegenerateData(JJStackError):
    """Input data cannot constrain the requested fit."""


class NonConvergence(JJStackError):
    """Iterative fit exhausted its iteration budget without converging."""


class AmbiguousOffset(JJStackError):
    """Two mode-index offsets explain the peak data about equally well.

    candidates holds (offset, residual_rms) pairs for the tied offsets.
    """

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)

    @property
    def details(self):
        return {"candidates": [[int(o), float(r)] for o, r in self.candidates]}


class MissingAnchor(JJStackError):
    """Exactly one of the l_j / c_g anchors must be supplied."""


class OffResonanceTrace(JJStackError):
    """Reflection trace contains no resonance dip above the noise."""


class InvertedPyramid(JJStackError):
    """Clogging angle and height would shrink a junction layer to zero area."""


class Infeasible(JJStackError):
    """No integer (n, N) pair satisfies the design targets within bounds."""


class FileFormatError(JJStackError):
    """An input file does not match its documented schema."""
