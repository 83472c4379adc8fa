"""Gluing equations for ideal triangulations, in logarithmic form.

Shape parameters and columns
----------------------------
Each tetrahedron ``t`` carries one complex shape ``z_t`` in the upper half
plane, with the three dihedral-angle parameters

    z   = z_t            (column 3t + 0, edge pairs {0,1} and {2,3})
    z'  = 1/(1 - z_t)    (column 3t + 1, edge pairs {0,2} and {1,3})
    z'' = (z_t - 1)/z_t  (column 3t + 2, edge pairs {0,3} and {1,2})

These satisfy z * z' * z'' = -1, and for Im z > 0 all three have argument
in (0, pi), summing to exactly pi.

Rows
----
The system has one row per edge class followed by two rows (meridian,
longitude) per cusp, in the canonical orders of
:attr:`~tiltcert.triangulation.IdealTriangulation.edge_classes` and cusp
classes. A row is an integer coefficient vector ``A`` together with an
integer target ``t``; the equation is

    sum_k A_k * log w_k  =  i * pi * t,

where every log is taken with argument in (0, pi). Edge rows count the
tetrahedral corners around the edge class and demand total dihedral angle
2*pi, so their target is always 2.

Peripheral rows encode triviality of the similarity holonomy derivative
along the cusp's meridian and longitude. For a corner (t, v) of the cusp
torus, orient its link triangle by ``ccw_corners(v) = (a, b, c)`` and let
w1, w2 be the curve's net crossing weights on the sides joining corners
a,b and b,c. The exponents g_a = 0, g_b = -w1, g_c = -w1 - w2 are shifted
up by s = -min(g) to be nonnegative; since the three corner arguments of
a positively oriented triangle sum to exactly pi and the magnitudes to 0,
each unit of shift adds exactly i*pi to the row's value. At a positively
oriented solution every peripheral row therefore evaluates to an exact
integer multiple of i*pi — but unlike the edge rows that integer depends
on the solution branch, not only on the combinatorics (it records the
winding of the developed curve). :class:`GluingSystem` stores the total
shift as a baseline target, and the actual integers are *pinned* during
solving: with the residual within ~1e-12 of the nearest multiple, rounding
Im(row)/pi selects between exact alternatives that are pi apart, so the
pin is rigorous once a Krawczyk contraction certifies the pinned system.

A multiple of i*pi makes the holonomy derivative ±1; completeness demands
exactly +1. The sign is decided by developing the cusp torus: the
derivative of a deck similarity is a homomorphism into the abelian group
C*, so it factors through homology and equals the product, over the
non-tree sides of a developed spanning tree of the cusp triangulation, of
the side's deck derivative raised to the curve's net crossing count. The
float development distinguishes +1 from -1 with margin ~2, again a
rigorous selection between exact alternatives.

Solving and certifying
----------------------
:func:`solve_approx` runs a damped Newton iteration on the full
(rectangular) system from a deterministic ladder of seeds, with
peripheral multiples free, then pins them and verifies the holonomy
derivative is +1 on every cusp. :func:`certify_shapes` re-pins from its
input, runs a Krawczyk contraction on a square subsystem (the ``c``
meridian rows are kept and ``c`` redundant edge rows are dropped — the
edge rows carry that many redundancies once the peripheral conditions
hold — with dependent rows identified rank-revealingly, dropping the
highest-indexed ones) and finally verifies longitude rows and the
dropped edge rows over the certified boxes rather than solving them.
Success means every gluing equation, evaluated in interval arithmetic
over the returned boxes, encloses its required constant.
"""

import cmath
import math
import random
from dataclasses import dataclass

import numpy as np

from .enclosures import log_box, pi_interval
from .errors import (ContractionFailure, DegenerateShape, DomainError,
                     MoveInadmissible, NonConvergence, ValidationError)
from .interval import ComplexBox, RealInterval, strictly_less
from .triangulation import (ccw_corners, edge_column, edge_star,
                            enumerate_isomorphisms, pachner_2_3,
                            pachner_3_2, perm_inverse, perm_parity,
                            side_face)

_RESIDUAL_TOL = 1e-12
_DEGENERATE_IM = 1e-9
_NEWTON_STEPS = 80
_INFLATE_ULPS = 10
_INFLATE_DOUBLINGS = 8
_PIN_SLACK = 0.25
_HOLONOMY_SLACK = 1e-6


def param_value(z, column):
    """The column's angle parameter as a plain complex number."""
    if column == 0:
        return z
    if column == 1:
        return 1.0 / (1.0 - z)
    if column == 2:
        return (z - 1.0) / z
    raise ValueError("column must be 0, 1 or 2, got %r" % (column,))


def param_box(z, column):
    """The column's angle parameter as a :class:`ComplexBox`."""
    if column == 0:
        return z
    if column == 1:
        return ComplexBox.point(1.0) / (ComplexBox.point(1.0) - z)
    if column == 2:
        return (z - ComplexBox.point(1.0)) / z
    raise ValueError("column must be 0, 1 or 2, got %r" % (column,))


def _completeness_row(tri, curve, cusp_slots):
    """Integer column coefficients and baseline target for one curve."""
    coeffs = {}
    baseline = 0
    for (t, v) in cusp_slots:
        a, b, c = ccw_corners(v)
        w1 = curve.get(t, v, side_face(v, a, b))
        w2 = curve.get(t, v, side_face(v, b, c))
        g = {a: 0, b: -w1, c: -w1 - w2}
        shift = -min(g.values())
        baseline += shift
        for corner, expo in g.items():
            expo += shift
            if expo:
                col = 3 * t + edge_column(v, corner)
                coeffs[col] = coeffs.get(col, 0) + expo
    return coeffs, baseline


@dataclass(frozen=True)
class GluingSystem:
    """Integer matrix and targets of the full gluing system.

    ``matrix`` has one row per equation and ``3 * num_tets`` columns;
    ``targets[r]`` is the integer ``t`` in ``row = i*pi*t``. Rows
    ``0 .. num_edge_rows-1`` are the edge equations (target 2); after
    those, rows ``num_edge_rows + 2*c`` and ``num_edge_rows + 2*c + 1``
    are the meridian and longitude equations of cusp ``c``, whose stored
    targets are combinatorial baselines — the solution's actual integers
    are pinned by :meth:`pin_targets` (see the module docstring).
    """

    num_tets: int
    num_cusps: int
    num_edge_rows: int
    matrix: np.ndarray
    targets: tuple

    def __post_init__(self):
        self.matrix.flags.writeable = False

    @property
    def num_rows(self):
        return self.matrix.shape[0]

    def row_value(self, row, shapes):
        """Float evaluation of ``sum A_k log w_k`` on one row."""
        acc = 0.0j
        for t in range(self.num_tets):
            z = shapes[t]
            for col in range(3):
                a = self.matrix[row, 3 * t + col]
                if a:
                    acc += a * cmath.log(param_value(z, col))
        return acc

    def residuals(self, shapes, targets=None):
        """Float residual vector; peripheral rows measure the distance
        to the *nearest* multiple of i*pi when ``targets`` is None."""
        out = []
        for r in range(self.num_rows):
            val = self.row_value(r, shapes)
            if targets is not None:
                t = targets[r]
            elif r < self.num_edge_rows:
                t = 2
            else:
                t = round(val.imag / math.pi)
            out.append(val - 1j * math.pi * t)
        return np.array(out)

    def max_residual(self, shapes, targets=None):
        return float(max(abs(v) for v in self.residuals(shapes, targets)))

    def pin_targets(self, shapes):
        """The per-row integer targets at a near-solution.

        Edge rows keep target 2; each peripheral row's value must lie
        within 0.25 * pi of a multiple of i*pi, which is then selected.
        """
        pinned = []
        for r in range(self.num_rows):
            if r < self.num_edge_rows:
                pinned.append(2)
                continue
            val = self.row_value(r, shapes)
            t = round(val.imag / math.pi)
            if (abs(val.imag - math.pi * t) > _PIN_SLACK * math.pi
                    or abs(val.real) > _PIN_SLACK):
                raise ValidationError(
                    "row %d is not close to a multiple of i*pi: %r"
                    % (r, val))
            pinned.append(t)
        return tuple(pinned)

    def jacobian(self, shapes, rows=None):
        """Float Jacobian d(row)/d(z_t) on the given rows (default all).

        d log z / dz = 1/z, d log z' / dz = 1/(1-z),
        d log z'' / dz = 1/(z(z-1)).
        """
        if rows is None:
            rows = range(self.num_rows)
        rows = list(rows)
        jac = np.zeros((len(rows), self.num_tets), dtype=complex)
        for i, r in enumerate(rows):
            for t in range(self.num_tets):
                z = shapes[t]
                a = self.matrix[r, 3 * t + 0]
                b = self.matrix[r, 3 * t + 1]
                c = self.matrix[r, 3 * t + 2]
                acc = 0.0j
                if a:
                    acc += a / z
                if b:
                    acc += b / (1.0 - z)
                if c:
                    acc += c / (z * (z - 1.0))
                jac[i, t] = acc
        return jac

    def row_value_boxes(self, row, boxes):
        """Interval enclosure of ``sum A_k log w_k`` on one row."""
        acc = ComplexBox.point(0.0)
        for t in range(self.num_tets):
            z = boxes[t]
            for col in range(3):
                a = int(self.matrix[row, 3 * t + col])
                if a:
                    acc = acc + log_box(param_box(z, col)) * a
        return acc

    def row_verifies(self, row, boxes, target):
        """True when the interval value of the row encloses i*pi*target."""
        val = self.row_value_boxes(row, boxes)
        tgt = pi_interval() * target
        return (val.re.contains(0.0)
                and val.im.lo <= tgt.lo and tgt.hi <= val.im.hi)


def gluing_system(tri):
    """Build the :class:`GluingSystem` of a triangulation.

    Peripheral rows require the triangulation to carry peripheral
    curves.
    """
    if tri.curves is None:
        raise ValidationError(
            "gluing_system requires peripheral curves on every cusp")
    n = tri.num_tets
    rows = []
    targets = []
    for cls in tri.edge_classes:
        row = np.zeros(3 * n, dtype=np.int64)
        for (t, pair) in cls.slots:
            row[3 * t + edge_column(*pair)] += 1
        rows.append(row)
        targets.append(2)
    for cusp_index, slots in enumerate(tri.cusp_classes):
        for curve in tri.curves[cusp_index]:
            coeffs, baseline = _completeness_row(tri, curve, slots)
            row = np.zeros(3 * n, dtype=np.int64)
            for col, a in coeffs.items():
                row[col] += a
            rows.append(row)
            targets.append(baseline)
    return GluingSystem(
        num_tets=n,
        num_cusps=tri.num_cusps,
        num_edge_rows=len(tri.edge_classes),
        matrix=np.array(rows, dtype=np.int64),
        targets=tuple(targets),
    )


def _develop_cusp(tri, shapes, cusp_index):
    """Develop one cusp torus in the plane at float shapes.

    Returns (placements, decks): ``placements[(t, v)]`` maps each link
    triangle's corners to complex positions; ``decks[frozenset of two
    side tokens]`` is the derivative of the deck similarity across each
    non-tree side (crossing from the lexicographically smaller token).
    """
    slots = tri.cusp_classes[cusp_index]
    root = slots[0]
    placements = {}
    a, b, c = ccw_corners(root[1])
    z = shapes[root[0]]
    placements[root] = {
        a: 0.0 + 0.0j,
        b: 1.0 + 0.0j,
        c: complex(param_value(z, edge_column(root[1], a))),
    }
    decks = {}
    queue = [root]
    seen_sides = set()
    while queue:
        t, v = queue.pop()
        pos = placements[(t, v)]
        corners = [x for x in range(4) if x != v]
        for f in corners:
            x, y = [w for w in corners if w != f]
            nb, s = tri.glue[t][f]
            t2, v2, f2 = nb, s[v], s[f]
            x2, y2 = s[x], s[y]
            key = frozenset(((t, v, f), (t2, v2, f2)))
            if key in seen_sides:
                continue
            seen_sides.add(key)
            p, q = pos[x], pos[y]
            z2 = shapes[t2]
            u2 = 6 - v2 - x2 - y2
            # The neighbor triangle is ccw on the torus; whether
            # (x2, y2, u2) is a ccw reading decides on which side of the
            # segment p-q its third corner lies. Orientation coherence
            # of the gluings puts it opposite the current triangle.
            order = ccw_corners(v2)
            i2 = order.index(x2)
            if order[(i2 + 1) % 3] == y2:
                w_x2 = complex(param_value(z2, edge_column(v2, x2)))
                u_pos = p + (q - p) * w_x2
            else:
                w_y2 = complex(param_value(z2, edge_column(v2, y2)))
                u_pos = q + (p - q) * w_y2
            new_pos = {x2: p, y2: q, u2: u_pos}
            if (t2, v2) not in placements:
                placements[(t2, v2)] = new_pos
                queue.append((t2, v2))
            else:
                old = placements[(t2, v2)]
                d = (q - p) / (old[y2] - old[x2])
                decks[key] = ((t, v, f), d)
    return placements, decks


def _holonomy_derivatives(tri, shapes, cusp_index):
    """Float holonomy derivatives of the cusp's (meridian, longitude).

    The derivative of a deck similarity is a homomorphism to C*, so it
    factors through homology: it is the product over non-tree sides of
    the deck derivative raised to the curve's net crossing count.
    """
    _, decks = _develop_cusp(tri, shapes, cusp_index)
    out = []
    for curve in tri.curves[cusp_index]:
        h = 1.0 + 0.0j
        for key, (owner, d) in decks.items():
            w = curve.get(*owner)
            if w:
                h *= d ** w
        out.append(h)
    return out


def _complete_holonomy(tri, shapes):
    """True when every cusp's peripheral derivatives are +1 (vs -1)."""
    for cusp_index in range(tri.num_cusps):
        for h in _holonomy_derivatives(tri, shapes, cusp_index):
            if abs(h - 1.0) > _HOLONOMY_SLACK:
                return False
    return True


_REGULAR = complex(0.5, math.sqrt(3.0) / 2.0)


def _seed_ladder(n):
    seeds = [
        [1j] * n,
        [_REGULAR] * n,
        [complex(0.5, 1.2)] * n,
        [complex(0.2, 0.8)] * n,
    ]
    rng = random.Random(1831)
    for _ in range(8):
        seeds.append([complex(rng.uniform(-0.5, 1.5), rng.uniform(0.2, 1.5))
                      for _ in range(n)])
    # wider rungs for triangulations with far-flung or nearly flat
    # shapes (for example after random Pachner walks)
    for _ in range(48):
        seeds.append([complex(rng.uniform(-2.0, 3.0),
                              math.exp(rng.uniform(math.log(0.02),
                                                   math.log(3.0))))
                      for _ in range(n)])
    return seeds


def _newton_from(system, seed):
    """Damped least-squares Newton from one seed; returns shapes or None."""
    zs = list(seed)
    for _ in range(_NEWTON_STEPS):
        if any(not (abs(z) < 1e6) or abs(z) < 1e-9 or abs(z - 1.0) < 1e-9
               for z in zs):
            return None
        res = system.residuals(zs)
        if max(abs(v) for v in res) < 1e-14:
            return zs
        jac = system.jacobian(zs)
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        scale = max(abs(s) for s in step)
        if scale > 2.0:
            step = step * (2.0 / scale)
        zs = [z + s for z, s in zip(zs, step)]
    if system.max_residual(zs) < _RESIDUAL_TOL:
        return zs
    return None


# --------------------------------------------------------------------------
# shape transport through moves
#
# Ideal vertices live on the boundary sphere C u {inf}; homogeneous
# pairs (x, y) ~ x/y let infinity flow through the algebra. With
# d(p, q) = x_p y_q - x_q y_p standing in for p - q, a tetrahedron with
# vertex positions (q0, q1, q2, q3) has shape
# cr = (d(q2,q0) d(q3,q1)) / (d(q2,q1) d(q3,q0)), and a tetrahedron of
# shape z placed with vertex v at infinity has its link triangle
# (a, b, c) = ccw_corners(v) at 0, 1, param(z, edge_column(v, a)).


def _det(p, q):
    return p[0] * q[1] - q[0] * p[1]


def _normalize(p):
    m = max(abs(p[0]), abs(p[1]))
    if not (m > 0.0) or math.isinf(m) or math.isnan(m):
        return None
    return (p[0] / m, p[1] / m)


def _cross_ratio(q0, q1, q2, q3):
    num = _det(q2, q0) * _det(q3, q1)
    den = _det(q2, q1) * _det(q3, q0)
    if den == 0:
        return None
    return num / den


def _place(z, v):
    """Positions of a shape-z tetrahedron's vertices, v at infinity."""
    a, b, c = ccw_corners(v)
    return {v: (1 + 0j, 0j), a: (0j, 1 + 0j), b: (1 + 0j, 1 + 0j),
            c: (param_value(z, edge_column(v, a)), 1 + 0j)}


def _fourth_point(z, u, pos):
    """Position of vertex u of a shape-z tetrahedron whose other three
    vertices sit at ``pos[label]``."""
    a, b, c = ccw_corners(u)
    w = param_value(z, edge_column(u, a))
    ca = _det(pos[c], pos[a])
    wba = w * _det(pos[b], pos[a])
    return _normalize((wba * pos[c][0] - ca * pos[b][0],
                       wba * pos[c][1] - ca * pos[b][1]))


def _positive(zs):
    return zs is not None and all(
        z is not None and z.imag > _DEGENERATE_IM and not math.isinf(abs(z))
        for z in zs)


def _transport_2_3(tri, face, shapes):
    """Shape vector after a 2-3 move, in the new tet numbering, or None
    if the move would create a non-positively-oriented tetrahedron."""
    t0, f0 = face
    t1, sigma = tri.glue[t0][f0]
    w = ccw_corners(f0)
    pos = _place(shapes[t0], f0)
    apex1 = _fourth_point(shapes[t1], sigma[f0],
                          {sigma[x]: pos[x] for x in w})
    if apex1 is None:
        return None
    qa = pos[f0]
    rho = [pos[w[j]] for j in range(3)]
    new = [_cross_ratio(qa, apex1, rho[(k + 1) % 3], rho[(k + 2) % 3])
           for k in range(3)]
    if not _positive(new):
        return None
    return [shapes[t] for t in range(tri.num_tets) if t not in (t0, t1)] + new


def _transport_3_2(tri, tets_order, lams, shapes):
    """Shape vector after a 3-2 move on the given edge star, in the new
    tet numbering, or None if a new tetrahedron would not be positively
    oriented.

    Model tet N_k = (A, B, P_{k+2}, P_{k+3}) (P indices cyclic in
    {1,2,3}) sits over ``tets_order[k]`` via ``lams[k]``; the move
    replaces the star by a top tet (A, P1, P2, P3) and a bottom tet
    (B, P1, P3, P2).
    """
    lam0 = lams[0]
    pos0 = _place(shapes[tets_order[0]], lam0[0])
    qa, qb = pos0[lam0[0]], pos0[lam0[1]]
    p2, p3 = pos0[lam0[2]], pos0[lam0[3]]
    lam1 = lams[1]
    p1 = _fourth_point(shapes[tets_order[1]], lam1[3],
                       {lam1[0]: qa, lam1[1]: qb, lam1[2]: p3})
    if p1 is None:
        return None
    new = [_cross_ratio(qa, p1, p2, p3),
           _cross_ratio(qb, p1, p3, p2)]
    if not _positive(new):
        return None
    drop = set(tets_order)
    return [shapes[t] for t in range(tri.num_tets) if t not in drop] + new


def _polish(tri, guess):
    """Newton re-solve from a transported shape vector; None on failure
    to reach a positively oriented complete structure."""
    zs = _newton_from(gluing_system(tri), guess)
    if zs is None or min(z.imag for z in zs) <= _DEGENERATE_IM:
        return None
    if not _complete_holonomy(tri, zs):
        return None
    return zs


def _attempt_2_3(tri, shapes, face):
    """Apply a 2-3 move geometrically: (new tri, new shapes) or None."""
    t0, f0 = face
    t1, _ = tri.glue[t0][f0]
    if t1 == t0:
        return None
    guess = _transport_2_3(tri, face, shapes)
    if guess is None:
        return None
    cand = pachner_2_3(tri, face)
    zs = _polish(cand, guess)
    if zs is None:
        return None
    return cand, zs


def _attempt_3_2(tri, shapes, edge):
    """Apply a 3-2 move geometrically: (new tri, new shapes) or None."""
    try:
        tets_order, lams = edge_star(tri, edge)
    except MoveInadmissible:
        return None
    guess = _transport_3_2(tri, tets_order, lams, shapes)
    if guess is None:
        return None
    cand = pachner_3_2(tri, edge)
    zs = _polish(cand, guess)
    if zs is None:
        return None
    return cand, zs


def _shapes_via_isomorphism(src, dst, shapes):
    """Shape vector of ``dst`` induced by an orientation-preserving
    isomorphism src -> dst, or None if none exists."""
    for iso in enumerate_isomorphisms(src, dst):
        if any(perm_parity(rho) for rho in iso.vertex_maps):
            continue
        out = [None] * dst.num_tets
        for t in range(src.num_tets):
            inv = perm_inverse(iso.vertex_maps[t])
            out[iso.tet_map[t]] = param_value(
                shapes[t], edge_column(inv[0], inv[1]))
        return out
    return None


def _solve_by_continuation(tri):
    """Cold-solve fallback for triangulations outside the seed ladder's
    reach: collapse valence-3 edges combinatorially down to a base
    triangulation, solve the base, then transport the solution back up
    through the inverted moves (each a 2-3 split of the last collapse's
    two replacement tetrahedra), polishing at every step. Returns a
    shape vector for ``tri`` or None."""
    states = [tri]
    faces = []
    while True:
        cur = states[-1]
        nxt = None
        for cls in cur.edge_classes:
            if cls.valence != 3:
                continue
            try:
                nxt = pachner_3_2(cur, cls.index)
            except MoveInadmissible:
                continue
            break
        if nxt is None:
            break
        faces.append((nxt.num_tets - 2, 0))
        states.append(nxt)
    if len(states) == 1:
        return None
    try:
        shapes = _ladder_solve(states[-1], gluing_system(states[-1]))
    except (NonConvergence, DegenerateShape):
        return None
    for level in range(len(faces) - 1, -1, -1):
        cur = states[level + 1]
        guess = _transport_2_3(cur, faces[level], shapes)
        if guess is None:
            return None
        expanded = pachner_2_3(cur, faces[level])
        zs = _polish(expanded, guess)
        if zs is None:
            return None
        shapes = _shapes_via_isomorphism(expanded, states[level], zs)
        if shapes is None:
            return None
    if min(z.imag for z in shapes) <= _DEGENERATE_IM or \
            not _complete_holonomy(tri, shapes):
        return None
    return shapes


def _ladder_solve(tri, system):
    degenerate = None
    for seed in _seed_ladder(tri.num_tets):
        zs = _newton_from(system, seed)
        if zs is None:
            continue
        if min(z.imag for z in zs) <= _DEGENERATE_IM:
            degenerate = zs
            continue
        if not _complete_holonomy(tri, zs):
            continue
        return zs
    if degenerate is not None:
        raise DegenerateShape(
            "solution has a shape with imaginary part <= %g: %r"
            % (_DEGENERATE_IM, degenerate))
    raise NonConvergence(
        "no seed converged within %d Newton steps" % _NEWTON_STEPS)


def solve_approx(tri):
    """Floating-point solution of the full gluing system.

    Tries a fixed ladder of seeds, then — for triangulations whose
    solution the ladder misses — a deterministic continuation along
    Pachner moves (collapse to a smaller base, solve, transport back).
    The result is deterministic and repeat calls return the same
    shapes. A converged assignment is accepted only if every shape is
    positively oriented and every cusp's peripheral holonomy
    derivatives are +1. Raises
    :class:`~tiltcert.errors.DegenerateShape` when the iteration only
    converges to assignments with a shape's imaginary part at or below
    1e-9, and :class:`~tiltcert.errors.NonConvergence` when no seed
    converges at all.
    """
    system = gluing_system(tri)
    try:
        return _ladder_solve(tri, system)
    except (NonConvergence, DegenerateShape) as err:
        zs = _solve_by_continuation(tri)
        if zs is None:
            raise err
        return zs


@dataclass(frozen=True)
class ShapeBoxes:
    """Certified complex boxes around a geometric solution.

    ``certified`` records that a Krawczyk contraction succeeded and that
    every gluing equation was verified over ``boxes`` against
    ``targets`` (the pinned integer multiples of i*pi, in row order);
    every box then has strictly positive imaginary part.
    """

    boxes: tuple
    targets: tuple
    certified: bool


def _square_rows(system, shapes):
    """Deterministic square subsystem: keep the ``c`` meridian rows and
    drop ``c`` redundant edge rows.

    The edge rows carry ``c`` redundancies relative to the meridian
    rows. Which specific rows are dependent varies with the
    triangulation, so the selection is rank-revealing: edge rows are
    added in ascending index order and a row is dropped when it does not
    increase the numerical rank of the float Jacobian at ``shapes`` —
    so among dependent rows the highest-indexed ones are dropped. The
    choice only affects whether the contraction succeeds, never
    soundness: every row is verified over the final boxes regardless.
    """
    e = system.num_edge_rows
    meridians = [e + 2 * k for k in range(system.num_cusps)]
    kept = list(meridians)
    for r in range(e):
        if len(kept) == system.num_tets:
            break
        trial = kept + [r]
        sv = np.linalg.svd(system.jacobian(shapes, trial),
                           compute_uv=False)
        if sv[-1] > 1e-10 * max(1.0, sv[0]):
            kept.append(r)
    if len(kept) != system.num_tets:
        raise ContractionFailure(
            "could not select a full-rank square subsystem")
    return sorted(r for r in kept if r < e) + meridians


def _strictly_inside(inner, outer):
    return (outer.re.lo < inner.re.lo and inner.re.hi < outer.re.hi
            and outer.im.lo < inner.im.lo and inner.im.hi < outer.im.hi)


def certify_shapes(tri, approx):
    """Krawczyk certification of an approximate solution.

    Returns :class:`ShapeBoxes` with ``certified=True`` on success.
    Raises :class:`~tiltcert.errors.ContractionFailure` when the
    contraction cannot be established — in particular when ``approx`` is
    not positively oriented, so the logarithmic form is not even defined
    on a box around it, or when its peripheral holonomy derivative is
    -1 rather than +1.
    """
    system = gluing_system(tri)
    n = system.num_tets
    if len(approx) != n:
        raise ValidationError(
            "expected %d shapes, got %d" % (n, len(approx)))
    mids = [complex(z) for z in approx]
    if min(z.imag for z in mids) <= 0.0:
        raise ContractionFailure(
            "approximation is not positively oriented")
    try:
        targets = system.pin_targets(mids)
    except ValidationError as exc:
        raise ContractionFailure(str(exc))
    if not _complete_holonomy(tri, mids):
        raise ContractionFailure(
            "peripheral holonomy derivative is -1, not +1: the pinned "
            "system does not describe the complete structure")
    rows = _square_rows(system, mids)
    try:
        jac_mid = system.jacobian(mids, rows)
        y = np.linalg.inv(jac_mid)
    except np.linalg.LinAlgError as exc:
        raise ContractionFailure(
            "midpoint Jacobian is singular: %s" % (exc,))
    mid_boxes = [ComplexBox.point(z) for z in mids]
    pi_iv = pi_interval()

    radius0 = [math.ldexp(math.ulp(max(1.0, abs(z.real), abs(z.imag))),
                          _INFLATE_ULPS)
               for z in mids]
    last_error = "no contraction at any inflation radius"
    for attempt in range(_INFLATE_DOUBLINGS + 1):
        boxes = []
        for z, r0 in zip(mids, radius0):
            r = math.ldexp(r0, attempt)
            boxes.append(ComplexBox(
                RealInterval(z.real - r, z.real + r),
                RealInterval(z.imag - r, z.imag + r)))
        try:
            f_mid = []
            for r in rows:
                val = system.row_value_boxes(r, mid_boxes)
                tgt = pi_iv * targets[r]
                f_mid.append(ComplexBox(val.re, val.im - tgt))
            jac_box = [[_jac_entry_box(system, r, t, boxes[t])
                        for t in range(n)] for r in rows]
            kraw = []
            for i in range(n):
                acc_re = RealInterval.point(mids[i].real)
                acc_im = RealInterval.point(mids[i].imag)
                acc = ComplexBox(acc_re, acc_im)
                for k in range(n):
                    acc = acc - f_mid[k] * complex(y[i, k])
                for j in range(n):
                    coef = ComplexBox.point(1.0 if i == j else 0.0)
                    for k in range(n):
                        coef = coef - jac_box[k][j] * complex(y[i, k])
                    diff = ComplexBox(boxes[j].re - mids[j].real,
                                      boxes[j].im - mids[j].imag)
                    acc = acc + coef * diff
                kraw.append(acc)
        except DomainError as exc:
            raise ContractionFailure(
                "interval evaluation left the domain of the logarithmic "
                "form: %s" % (exc,))
        if all(_strictly_inside(k, x) for k, x in zip(kraw, boxes)):
            tight = []
            for k, x in zip(kraw, boxes):
                inter = k.intersect(x)
                if inter is None:
                    raise ContractionFailure(
                        "contraction produced an empty intersection")
                tight.append(inter)
            for z in tight:
                if not strictly_less(RealInterval.point(0.0), z.im):
                    raise ContractionFailure(
                        "certified box is not strictly positively oriented")
            for r in range(system.num_rows):
                if not system.row_verifies(r, tight, targets[r]):
                    raise ContractionFailure(
                        "row %d does not verify over the certified boxes"
                        % r)
            return ShapeBoxes(boxes=tuple(tight), targets=targets,
                              certified=True)
        last_error = ("Krawczyk image not strictly inside the box at "
                      "inflation attempt %d" % attempt)
    raise ContractionFailure(last_error)


def _jac_entry_box(system, row, t, z):
    """Interval Jacobian entry d(row)/d(z_t) over a box."""
    one = ComplexBox.point(1.0)
    a = int(system.matrix[row, 3 * t + 0])
    b = int(system.matrix[row, 3 * t + 1])
    c = int(system.matrix[row, 3 * t + 2])
    acc = ComplexBox.point(0.0)
    if a:
        acc = acc + one / z * a
    if b:
        acc = acc + one / (one - z) * b
    if c:
        acc = acc + one / (z * (z - one)) * c
    return acc
