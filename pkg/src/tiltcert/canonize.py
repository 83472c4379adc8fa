"""Floating-point canonization: drive a triangulation toward the
canonical cellulation by Pachner moves guided by float tilts.

This is the heuristic half of the pipeline: it produces *candidates*
quickly in plain floating point, and module :mod:`tiltcert.canonical`
carries the proof burden afterwards. The procedure loop:

(1) solve the gluing equations, evaluate every face's tilt with all
    cusp cross-section areas equalized, and stop when no tilt exceeds
    +tau: all below -tau is a canonical candidate (CandidateFound),
    otherwise some tilt sits in the [-tau, tau] band and the canonical
    cell decomposition is suspected non-tetrahedral with the current
    triangulation a tetrahedral subdivision of it
    (SuspectedNonTetrahedral);
(2) if some face with tilt > tau admits a 2-3 move that creates only
    positively oriented tetrahedra, apply it (most positive tilt first,
    ties to the lowest face key) and go to (1);
(3) otherwise, if some valence-3 edge has an incident face with
    tilt >= -tau and its 3-2 move keeps all tetrahedra positively
    oriented, apply it and go to (1);
(4) otherwise take a random walk of admissible positivity-preserving
    moves (length 4, doubling per visit up to 64) and go to (1).

The global move cap of 10^4 converts potential non-termination into
IterationCapReached. tau = 1e-9 merely routes the search — the
certification stage does not depend on it.

Moves transport the geometric solution instead of re-solving from
scratch: the five ideal vertices of the bipyramid involved in a move
are placed on the boundary sphere (homogeneous coordinates over C, so
infinity needs no special casing), the new tetrahedra's shapes are
cross-ratios of those points, and a move whose new shapes are not
clearly positively oriented is discarded without touching the
triangulation. Surviving moves are applied and the transported shape
vector is polished by Newton; if that re-solve fails to converge to a
positively oriented complete structure, the move is rolled back.
Runs are deterministic for a given rng seed, and the returned
:class:`CanonizeTrace` records each applied move with a float tilt
snapshot, so traces are replayable.
"""

import math
import random
from dataclasses import dataclass

from .errors import ValidationError
from .geometry import (_attempt_2_3, _attempt_3_2, param_value,
                       solve_approx)
from .triangulation import ccw_corners, edge_column, side_face

_TAU = 1e-9
_MOVE_CAP = 10_000
_WALK_START = 4
_WALK_MAX = 64


@dataclass(frozen=True)
class CanonizeTrace:
    """Replayable record of a canonization run.

    ``moves`` is a tuple of dicts (JSON-ready): each has ``"move"``
    ("2-3" or "3-2"), its ``"face"`` or ``"edge"`` target, ``"random"``
    True on step-(4) walk moves, and the float tilt snapshot that
    preceded it. ``status`` is CandidateFound, IterationCapReached or
    SuspectedNonTetrahedral.
    """

    moves: tuple
    status: str
    iterations: int


# --------------------------------------------------------------------------
# float cross-sections and tilts


def _float_radii(tri, shapes):
    """Equalized-area float circumradii of every horotriangle."""
    ratios = {}
    for slots in tri.cusp_classes:
        for (t, v) in slots:
            a, b, c = ccw_corners(v)
            w = param_value(shapes[t], edge_column(v, a))
            ratios[(t, v)] = {
                side_face(v, a, b): 1.0,
                side_face(v, a, c): abs(w),
                side_face(v, b, c): abs(w - 1.0),
            }
    sides = {}
    scale_of = {}
    for slots in tri.cusp_classes:
        pending = [(slots[0], 1.0)]
        while pending:
            slot, fac = pending.pop()
            if slot in scale_of:
                continue
            scale_of[slot] = fac
            t, v = slot
            for f in (x for x in range(4) if x != v):
                nb, s = tri.glue[t][f]
                other = (nb, s[v])
                key = frozenset(((t, v, f), (nb, s[v], s[f])))
                sides.setdefault(key, fac * ratios[slot][f])
                if other not in scale_of:
                    pending.append(
                        (other, fac * ratios[slot][f] / ratios[other][s[f]]))
    areas = [0.0] * tri.num_cusps
    tri_sides = {}
    for slots in tri.cusp_classes:
        for slot in slots:
            t, v = slot
            lens = []
            for f in (x for x in range(4) if x != v):
                nb, s = tri.glue[t][f]
                lens.append(sides[frozenset(((t, v, f), (nb, s[v], s[f])))])
            tri_sides[slot] = lens
            a, b, c = lens
            radicand = ((a + b + c) * (-a + b + c)
                        * (a - b + c) * (a + b - c))
            if radicand > 0.0:
                areas[tri.cusp_of_slot[slot]] += math.sqrt(radicand) / 4.0
    radii = {}
    for slot, lens in tri_sides.items():
        cusp = tri.cusp_of_slot[slot]
        eq = (math.sqrt(areas[0] / areas[cusp])
              if cusp and areas[cusp] > 0.0 else 1.0)
        a, b, c = (x * eq for x in lens)
        radicand = (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)
        radii[slot] = (a * b * c / math.sqrt(radicand)
                       if radicand > 0.0 else math.inf)
    return radii


def float_tilts(tri, shapes):
    """Float tilt of every face class, keyed by the face's token pair."""
    radii = _float_radii(tri, shapes)
    tilts = {}
    seen = set()
    for t in range(tri.num_tets):
        for f in range(4):
            if (t, f) in seen:
                continue
            nb, s = tri.glue[t][f]
            other = (nb, s[f])
            seen.add((t, f))
            seen.add(other)
            face = ((t, f), other) if (t, f) <= other else (other, (t, f))
            total = 0.0
            for (tt, ff) in {(t, f), other}:
                acc = radii[(tt, ff)]
                z = shapes[tt]
                for k in range(4):
                    if k == ff:
                        continue
                    w = param_value(z, edge_column(ff, k))
                    acc -= radii[(tt, k)] * (w.real / abs(w))
                total += acc
            if (t, f) == other:
                total *= 2.0
            tilts[face] = total
    return tilts


# --------------------------------------------------------------------------
# the procedure


def _tilt_snapshot(tilts):
    return [[list(a), list(b), float(val)]
            for (a, b), val in sorted(tilts.items())]


def _edge_face_tilts(tri, cls, tilts):
    """Tilts of the faces incident to an edge class."""
    out = []
    by_token = {}
    for face, val in tilts.items():
        by_token[face[0]] = val
        by_token[face[1]] = val
    for (t, pair) in cls.slots:
        for f in range(4):
            if f not in pair:
                out.append(by_token[(t, f)])
    return out


def _random_step(tri, shapes, rng):
    """One random positivity-preserving move; None when stuck.

    Collapses (3-2) and expansions (2-3) are tried in randomized order,
    with a coin toss deciding which family goes first whenever both are
    available — an expansion-only walk would inflate the triangulation
    with near-flat tetrahedra and never find its way back.

    Returns ``(kind, target, (tri, shapes))`` with ``target`` already in
    trace form (a face token or an edge slot).
    """
    faces = [(t, f) for t in range(tri.num_tets) for f in range(4)]
    rng.shuffle(faces)
    edges = [cls for cls in tri.edge_classes if cls.valence == 3]
    rng.shuffle(edges)
    options = [("2-3", face) for face in faces]
    if edges and rng.random() < 0.5:
        options = [("3-2", cls) for cls in edges] + options
    else:
        options.extend(("3-2", cls) for cls in edges)
    for kind, target in options:
        if kind == "2-3":
            got = _attempt_2_3(tri, shapes, target)
            descr = list(target)
        else:
            got = _attempt_3_2(tri, shapes, target.index)
            t, (a, b) = target.slots[0]
            descr = [t, [a, b]]
        if got is not None:
            return kind, descr, got
    return None


def _simplify(tri, shapes, budget):
    """Collapse valence-3 edges (positivity permitting) until none is
    left or the move budget runs out. Returns (tri, shapes, records)."""
    records = []
    progress = True
    while progress and len(records) < budget:
        progress = False
        for cls in tri.edge_classes:
            if cls.valence != 3:
                continue
            got = _attempt_3_2(tri, shapes, cls.index)
            if got is None:
                continue
            t, (a, b) = cls.slots[0]
            records.append(([t, [a, b]],
                            _tilt_snapshot(float_tilts(tri, shapes))))
            tri, shapes = got
            progress = True
            break
    return tri, shapes, records


def canonize(tri, seed=0, max_moves=_MOVE_CAP):
    """Drive ``tri`` toward the canonical cellulation.

    Returns ``(candidate, trace)``. Deterministic for fixed
    ``(tri, seed, max_moves)``.
    """
    rng = random.Random(seed)
    shapes = solve_approx(tri)
    moves = []
    walk_len = _WALK_START
    iterations = 0
    while True:
        tilts = float_tilts(tri, shapes)
        worst = max(tilts.values())
        if worst < -_TAU:
            return tri, CanonizeTrace(tuple(moves), "CandidateFound",
                                      iterations)
        if worst <= _TAU:
            return tri, CanonizeTrace(tuple(moves), "SuspectedNonTetrahedral",
                                      iterations)
        if iterations >= max_moves:
            return tri, CanonizeTrace(tuple(moves), "IterationCapReached",
                                      iterations)
        snapshot = _tilt_snapshot(tilts)
        stepped = False
        for face in sorted((f for f, v in tilts.items() if v > _TAU),
                           key=lambda f: (-tilts[f], f)):
            got = _attempt_2_3(tri, shapes, face[0])
            if got is not None:
                moves.append({"move": "2-3", "face": list(face[0]),
                              "tilts": snapshot})
                tri, shapes = got
                iterations += 1
                stepped = True
                break
        if stepped:
            continue
        for cls in tri.edge_classes:
            if cls.valence != 3:
                continue
            if max(_edge_face_tilts(tri, cls, tilts)) < -_TAU:
                continue
            got = _attempt_3_2(tri, shapes, cls.index)
            if got is not None:
                t, (a, b) = cls.slots[0]
                moves.append({"move": "3-2", "edge": [t, [a, b]],
                              "tilts": snapshot})
                tri, shapes = got
                iterations += 1
                stepped = True
                break
        if stepped:
            continue
        # Step (4): no tilt-guided move applies; take a random walk,
        # then sweep the result back down by collapsing valence-3 edges
        # so the walk reshuffles the triangulation instead of inflating
        # it.
        budget = min(walk_len, max_moves - iterations)
        stuck = False
        for step in range(budget):
            got = _random_step(tri, shapes, rng)
            iterations += 1
            if got is None:
                stuck = step == 0
                break
            kind, descr, state = got
            entry = {"move": kind, "random": True,
                     "tilts": snapshot if step == 0
                     else _tilt_snapshot(float_tilts(tri, shapes))}
            entry["face" if kind == "2-3" else "edge"] = descr
            moves.append(entry)
            tri, shapes = state
        if stuck:
            # No admissible positivity-preserving move exists at all, so
            # the procedure can never progress; the iteration cap is the
            # honest outcome, reported without spinning until it.
            return tri, CanonizeTrace(tuple(moves), "IterationCapReached",
                                      iterations)
        tri, shapes, collapsed = _simplify(
            tri, shapes, max_moves - iterations)
        for descr, snap in collapsed:
            moves.append({"move": "3-2", "random": True, "edge": descr,
                          "tilts": snap})
            iterations += 1
        walk_len = min(walk_len * 2, _WALK_MAX)


def retriangulate_random(tri, seed=0, n=1):
    """Apply ``n`` random admissible moves keeping all float shapes
    positively oriented; inadmissible picks are skipped. ``n = 0``
    returns the input unchanged."""
    if n < 0:
        raise ValidationError("n must be nonnegative, got %r" % (n,))
    if n == 0:
        return tri
    rng = random.Random(seed)
    shapes = solve_approx(tri)
    for _ in range(n):
        got = _random_step(tri, shapes, rng)
        if got is None:
            break
        _, _, (tri, shapes) = got
    return tri
