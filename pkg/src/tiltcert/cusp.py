"""Horospherical cusp cross-sections with certified side enclosures.

Each ideal vertex (t, v) of a tetrahedron meets a cusp's horospherical
cross-section in a Euclidean *horotriangle*. Its corners lie on the
three tetrahedron edges through v, and its side in face f joins the two
corners on the edges (v, x), (v, y) with {x, y} = {0,1,2,3} \\ {v, f}.
Developing the triangle with ``ccw_corners(v) = (a, b, c)`` as corners
at 0, 1 and w_a (the shape parameter of the edge (v, a)) shows the side
lengths are proportional to

    side in face ``side_face(v, a, b)``:  1
    side in face ``side_face(v, a, c)``:  |w_a|
    side in face ``side_face(v, b, c)``:  |w_a - 1|

so all ratios come from +, -, *, /, sqrt applied to shape boxes. A face
gluing identifies a side of one horotriangle with a side of another at
equal length, which propagates a single scale per cusp from a seed: the
seed horotriangle's side of 01-type (the side whose tetrahedron edge
pair lies in column 0, i.e. {0,1} or {2,3}) gets length 1. Tree sides of
the propagation assign lengths; non-tree sides intersect the two
enclosures (tightening) and an empty intersection raises
:class:`~tiltcert.errors.InconsistentPropagation`.

Circumradius and area come from the side lengths alone via Heron's
formula: with radicand = (a+b+c)(-a+b+c)(a-b+c)(a+b-c),

    area = sqrt(radicand) / 4,      R = a*b*c / sqrt(radicand).

A strictly negative radicand proves the sides violate the triangle
inequality (:class:`~tiltcert.errors.ProvablyDegenerate`); a radicand
enclosure that merely reaches 0 yields the sound fallbacks
area >= 0 and R ∈ [longest side / 2, ∞).
"""

import math
from dataclasses import dataclass
from types import MappingProxyType

from .errors import (BracketingImpossible, DomainError,
                     InconsistentPropagation, ProvablyDegenerate)
from .interval import RealInterval, strictly_less
from .triangulation import ccw_corners, edge_column, side_face

_DELTA0 = 0.02
_DELTA_MAX = 0.32


def circumradius(a, b, c):
    """Interval circumradius of a triangle from its three side lengths.

    Raises :class:`~tiltcert.errors.ProvablyDegenerate` when the Heron
    radicand is strictly negative; when it merely reaches zero the
    result falls back to the sound enclosure [longest side / 2, inf).
    """
    radicand = (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)
    if radicand.hi < 0.0:
        raise ProvablyDegenerate(
            "triangle inequality provably violated: Heron radicand %r"
            % (radicand,))
    if radicand.lo <= 0.0:
        longest = max(a.lo, b.lo, c.lo)
        return RealInterval(max(0.0, longest) / 2.0, math.inf)
    return a * b * c / radicand.sqrt()


def _heron_area(a, b, c):
    radicand = (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)
    if radicand.hi < 0.0:
        raise ProvablyDegenerate(
            "triangle inequality provably violated: Heron radicand %r"
            % (radicand,))
    if radicand.lo < 0.0:
        radicand = RealInterval(0.0, radicand.hi)
    return radicand.sqrt() / 4.0


@dataclass(frozen=True)
class HoroTriangle:
    """One horotriangle: side lengths keyed by the face each side lies
    in, the circumradius enclosure, and the area enclosure."""

    sides: MappingProxyType
    circumradius: RealInterval
    area: RealInterval


@dataclass(frozen=True)
class CuspCrossSection:
    """Cross-sections of every cusp of one triangulation.

    ``triangles`` maps each cusp slot (t, v) to its
    :class:`HoroTriangle`; ``areas[k]`` is the area enclosure of cusp k;
    ``cusp_of_slot`` maps slots to cusp indices.
    """

    triangles: MappingProxyType
    areas: tuple
    cusp_of_slot: MappingProxyType

    def cusp_triangles(self, cusp):
        return {slot: tri for slot, tri in self.triangles.items()
                if self.cusp_of_slot[slot] == cusp}


def _side_ratios(boxes, t, v):
    """Side-length ratios of the horotriangle at (t, v), keyed by face."""
    from .geometry import param_box
    a, b, c = ccw_corners(v)
    w_a = param_box(boxes[t], edge_column(v, a))
    one = RealInterval.point(1.0)
    mag = w_a.mag2().sqrt()
    shifted = (w_a - 1.0).mag2().sqrt()
    return {
        side_face(v, a, b): one,
        side_face(v, a, c): mag,
        side_face(v, b, c): shifted,
    }


def _seed_side(slot):
    """The face holding the seed slot's side of 01-type."""
    t, v = slot
    corners = [x for x in range(4) if x != v]
    for f in corners:
        x, y = [w for w in corners if w != f]
        if edge_column(x, y) == 0:
            return f
    raise AssertionError("unreachable: every horotriangle has a "
                         "column-0 side")


def build_cross_section(tri, shapes, seed_length=1.0):
    """Build the cross-section of every cusp from certified shapes.

    ``shapes`` is a :class:`~tiltcert.geometry.ShapeBoxes` (or a bare
    sequence of ComplexBox). Each cusp propagates from its own seed —
    the lowest (tet, vertex) slot of the cusp class — whose 01-type side
    is assigned length ``seed_length``.
    """
    boxes = getattr(shapes, "boxes", None)
    if boxes is None:
        boxes = tuple(shapes)
    ratios = {}
    side_lengths = {}
    slot_cusp = dict(tri.cusp_of_slot)
    for cusp_index, slots in enumerate(tri.cusp_classes):
        for slot in slots:
            ratios[slot] = _side_ratios(boxes, *slot)
        seed = slots[0]
        seed_face = _seed_side(seed)
        scale = RealInterval.point(float(seed_length)) / ratios[seed][seed_face]
        pending = [(seed, scale)]
        assigned = {}
        while pending:
            slot, scale = pending.pop()
            if slot in assigned:
                continue
            assigned[slot] = scale
            t, v = slot
            for f in sorted(x for x in range(4) if x != v):
                nb, s = tri.glue[t][f]
                other = (nb, s[v])
                key = frozenset(((t, v, f), (other[0], other[1], s[f])))
                length = scale * ratios[slot][f]
                stored = side_lengths.get(key)
                if stored is None:
                    side_lengths[key] = length
                else:
                    met = stored.intersect(length)
                    if met is None:
                        raise InconsistentPropagation(
                            "side enclosures %r and %r are disjoint"
                            % (stored, length))
                    side_lengths[key] = met
                if other not in assigned:
                    pending.append(
                        (other, scale * ratios[slot][f] / ratios[other][s[f]]))
    triangles = {}
    areas = [RealInterval.point(0.0) for _ in tri.cusp_classes]
    for slots in tri.cusp_classes:
        for slot in slots:
            t, v = slot
            sides = {}
            for f in (x for x in range(4) if x != v):
                nb, s = tri.glue[t][f]
                key = frozenset(((t, v, f), (nb, s[v], s[f])))
                sides[f] = side_lengths[key]
            tri_sides = sorted(sides)
            a, b, c = (sides[f] for f in tri_sides)
            horo = HoroTriangle(
                sides=MappingProxyType(sides),
                circumradius=circumradius(a, b, c),
                area=_heron_area(a, b, c),
            )
            triangles[slot] = horo
            k = slot_cusp[slot]
            areas[k] = areas[k] + horo.area
    return CuspCrossSection(
        triangles=MappingProxyType(triangles),
        areas=tuple(areas),
        cusp_of_slot=MappingProxyType(slot_cusp),
    )


def scale(cross, cusp, factor):
    """Rescale one cusp's cross-section by a strictly positive factor."""
    if not factor.lo > 0.0:
        raise DomainError(
            "scale factor must be strictly positive, got %r" % (factor,))
    triangles = {}
    for slot, horo in cross.triangles.items():
        if cross.cusp_of_slot[slot] != cusp:
            triangles[slot] = horo
            continue
        triangles[slot] = HoroTriangle(
            sides=MappingProxyType(
                {f: side * factor for f, side in horo.sides.items()}),
            circumradius=horo.circumradius * factor,
            area=horo.area * factor.square(),
        )
    areas = list(cross.areas)
    areas[cusp] = areas[cusp] * factor.square()
    return CuspCrossSection(
        triangles=MappingProxyType(triangles),
        areas=tuple(areas),
        cusp_of_slot=cross.cusp_of_slot,
    )


def bracketing_factors(area0, cross, cusp, delta=_DELTA0):
    """Strictly positive factors (f⁻, f⁺) scaling one cusp to areas
    strictly below and above ``area0``.

    The factors are (1−δ)·sqrt(area0/area) and (1+δ)·sqrt(area0/area),
    with δ doubling from its starting value up to 0.32 until both
    strict inequalities hold; if the enclosures stay too wide to
    separate, raises :class:`~tiltcert.errors.BracketingImpossible`.
    """
    area1 = cross.areas[cusp]
    if not (area0.lo > 0.0 and area1.lo > 0.0):
        raise DomainError(
            "bracketing requires strictly positive areas, got %r and %r"
            % (area0, area1))
    root = (area0 / area1).sqrt()
    while True:
        f_minus = root * (1.0 - delta)
        f_plus = root * (1.0 + delta)
        if (strictly_less(area1 * f_minus.square(), area0)
                and strictly_less(area0, area1 * f_plus.square())):
            return f_minus, f_plus
        if delta >= _DELTA_MAX:
            raise BracketingImpossible(
                "area enclosures %r and %r cannot be strictly bracketed "
                "with margin up to %g" % (area0, area1, _DELTA_MAX))
        delta = min(2.0 * delta, _DELTA_MAX)


def make_bracketing_pair(area0, cross, cusp, delta=_DELTA0):
    """Scalings (C⁻, C⁺) of one cusp with areas strictly bracketing
    ``area0``; see :func:`bracketing_factors` for the margin schedule."""
    f_minus, f_plus = bracketing_factors(area0, cross, cusp, delta=delta)
    return scale(cross, cusp, f_minus), scale(cross, cusp, f_plus)
