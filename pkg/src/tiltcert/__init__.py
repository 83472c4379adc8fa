"""tiltcert: certified canonical cell decompositions of cusped hyperbolic
3-manifolds via interval-verified tilts, plus the combinatorial and
homological tooling the certificates rest on."""

from .errors import (BracketingImpossible, CertificateRequired,
                     ContractionFailure, DegenerateShape, DomainError,
                     HypothesisViolated, InconsistentPropagation,
                     InvalidSlope, MoveInadmissible, NonConvergence,
                     ParseError, ProvablyDegenerate, TiltcertError,
                     ValidationError)
from .interval import ComplexBox, RealInterval, strictly_less
from .triangulation import (CombinatorialIsomorphism, EdgeClass,
                            FillRelation, IdealTriangulation,
                            PeripheralCurve, dehn_fill_relation,
                            enumerate_isomorphisms, pachner_2_3,
                            pachner_3_2, parse, serialize)

__version__ = "0.1.0"
