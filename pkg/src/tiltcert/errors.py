"""Exception vocabulary for the tiltcert pipeline.

Every failure mode that a caller is expected to branch on gets its own
class.  Abstentions (Inconclusive, Unreduced, SuspectedNonTetrahedral)
are *verdicts*, not exceptions, and live with their operations; the
classes below are genuine error conditions.
"""


class TiltcertError(Exception):
    """Base class for all package errors."""


class DomainError(TiltcertError):
    """Interval operation left its mathematical domain (division by an
    interval containing zero, square root of a provably negative
    interval, ...)."""


class ParseError(TiltcertError):
    """Malformed triangulation text; carries line/field diagnostics."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class ValidationError(TiltcertError):
    """A structurally well-formed object violates an invariant
    (non-involutive gluing, non-torus vertex link, bad curve closure)."""


class MoveInadmissible(TiltcertError):
    """Requested Pachner move does not apply at the given face/edge."""


class InvalidSlope(TiltcertError):
    """Dehn-filling slope (p, q) is not a primitive pair."""


class NonConvergence(TiltcertError):
    """Floating-point Newton iteration exhausted its cap."""


class DegenerateShape(TiltcertError):
    """Shape solution has a tetrahedron with im(z) <= 1e-9: the
    triangulation is flat or negatively oriented at the solution."""


class ContractionFailure(TiltcertError):
    """Krawczyk verification could not validate the shape boxes —
    possibly a non-geometric triangulation or insufficient precision."""


class InconsistentPropagation(TiltcertError):
    """Cusp cross-section side enclosures became empty on a non-tree
    consistency check (soundness bug or hopeless precision)."""


class ProvablyDegenerate(TiltcertError):
    """Heron radicand interval strictly negative: the three side
    enclosures cannot bound a genuine triangle."""


class BracketingImpossible(TiltcertError):
    """Cusp area enclosures too wide to bracket strictly even at the
    largest allowed margin."""


class CertificateRequired(TiltcertError):
    """Operation needs a CertifiedCanonical certificate and was handed
    something weaker."""


class HypothesisViolated(TiltcertError):
    """Arithmetic hypothesis of the L-space cone construction fails
    (non-coprime orders)."""
