"""Ideal triangulations of oriented cusped 3-manifolds.

A triangulation is a gluing table: for each tetrahedron, four entries
``(neighbor, perm)`` indexed by face, where faces are labeled by the
opposite vertex and ``perm`` is the vertex relabeling into the neighbor
(an odd permutation of {0,1,2,3}; odd gluings between standardly
oriented tetrahedra give a coherent global orientation).

Convention summary, used consistently across the package:

* The edge {a,b} of a tetrahedron carries shape column 0, 1, or 2
  (parameters z, z' = 1/(1-z), z'' = (z-1)/z) according to
  {0,1},{2,3} -> 0; {0,2},{1,3} -> 1; {0,3},{1,2} -> 2.
* At vertex v the three link-triangle corners come in the counterclockwise
  cyclic order (a,b,c) uniquely determined by (v,a,b,c) being an even
  permutation; the side between consecutive corners x,y lies in face
  6 - v - x - y.
* Peripheral curves are signed side-crossing counts: a crossing that
  exits link triangle (t,v) through the side in face f contributes +1 to
  (t,v,f) and -1 to the matching side of the neighboring triangle.
"""

import math
import re
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations
from types import MappingProxyType

from .errors import (InvalidSlope, MoveInadmissible, ParseError,
                     ValidationError)

# --------------------------------------------------------------------------
# permutations of {0,1,2,3}

ALL_PERMS = tuple(permutations(range(4)))
IDENTITY_PERM = (0, 1, 2, 3)


def perm_parity(p):
    """0 for even, 1 for odd."""
    s = 0
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s ^= 1
    return s


def perm_inverse(p):
    q = [0] * 4
    for i in range(4):
        q[p[i]] = i
    return tuple(q)


def perm_compose(p, q):
    """(p o q)(i) = p[q[i]]."""
    return tuple(p[q[i]] for i in range(4))


ODD_PERMS = tuple(p for p in ALL_PERMS if perm_parity(p) == 1)

# --------------------------------------------------------------------------
# labeling conventions

_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

_EDGE_COLUMN = {(0, 1): 0, (2, 3): 0,
                (0, 2): 1, (1, 3): 1,
                (0, 3): 2, (1, 2): 2}


def edge_column(a, b):
    """Shape-parameter column (0: z, 1: z', 2: z'') of edge {a,b}."""
    if a > b:
        a, b = b, a
    return _EDGE_COLUMN[(a, b)]


def ccw_corners(v):
    """Counterclockwise cyclic order (a,b,c) of the link-triangle corners
    at vertex v: the unique order (up to rotation) with (v,a,b,c) even."""
    a, b, c = (x for x in range(4) if x != v)
    if perm_parity((v, a, b, c)) == 0:
        return (a, b, c)
    return (a, c, b)


def side_face(v, x, y):
    """Face containing the link-triangle side between the corners of
    (.,v) on edges {v,x} and {v,y}."""
    return 6 - v - x - y


# --------------------------------------------------------------------------
# peripheral curves


class PeripheralCurve:
    """Closed curve on a cusp torus, stored as net signed side-crossing
    weights indexed by (tet, vertex, face) triples.

    Weights are net flows: w[(t,v,f)] counts crossings leaving link
    triangle (t,v) through its side in face f minus crossings entering
    through it, so the matching side of the neighboring triangle always
    carries the opposite value.
    """

    __slots__ = ("_w",)

    def __init__(self, weights):
        w = {}
        for key, c in dict(weights).items():
            t, v, f = key
            c = int(c)
            if v == f or not (0 <= v < 4 and 0 <= f < 4):
                raise ValidationError(
                    "bad curve weight index %r" % (key,))
            if c != 0:
                w[(int(t), v, f)] = c
        self._w = w

    @property
    def weights(self):
        return MappingProxyType(self._w)

    def get(self, t, v, f):
        return self._w.get((t, v, f), 0)

    def items(self):
        return self._w.items()

    def combine(self, other, a, b):
        """The curve a*self + b*other."""
        w = {}
        for k, c in self._w.items():
            w[k] = w.get(k, 0) + a * c
        for k, c in other._w.items():
            w[k] = w.get(k, 0) + b * c
        return PeripheralCurve(w)

    def __repr__(self):
        toks = ["%d:%d:%d=%d" % (t, v, f, c)
                for (t, v, f), c in sorted(self._w.items())]
        return "PeripheralCurve(%s)" % " ".join(toks)


# --------------------------------------------------------------------------
# combinatorial isomorphisms


@dataclass(frozen=True)
class CombinatorialIsomorphism:
    """Bijection of tetrahedra with a vertex relabeling per tetrahedron,
    commuting with all face gluings."""

    tet_map: tuple        # tet_map[t] = image tetrahedron
    vertex_maps: tuple    # vertex_maps[t] = permutation applied in tet t

    def is_identity(self):
        return (all(self.tet_map[t] == t for t in range(len(self.tet_map)))
                and all(p == IDENTITY_PERM for p in self.vertex_maps))

    def apply_slot(self, t, v):
        """Image of the (tet, vertex) slot."""
        return self.tet_map[t], self.vertex_maps[t][v]

    def compose(self, other):
        """self o other (apply other first)."""
        n = len(self.tet_map)
        tm = tuple(self.tet_map[other.tet_map[t]] for t in range(n))
        vm = tuple(perm_compose(self.vertex_maps[other.tet_map[t]],
                                other.vertex_maps[t]) for t in range(n))
        return CombinatorialIsomorphism(tm, vm)

    def inverse(self):
        n = len(self.tet_map)
        tm = [0] * n
        vm = [None] * n
        for t in range(n):
            tm[self.tet_map[t]] = t
            vm[self.tet_map[t]] = perm_inverse(self.vertex_maps[t])
        return CombinatorialIsomorphism(tuple(tm), tuple(vm))

    def commutes(self, src, dst):
        """Full check that the map intertwines every gluing of src/dst."""
        for t in range(src.num_tets):
            ti, rt = self.tet_map[t], self.vertex_maps[t]
            for f in range(4):
                tn, s = src.glue[t][f]
                ti2, s2 = dst.glue[ti][rt[f]]
                want = perm_compose(perm_compose(s2, rt), perm_inverse(s))
                if (ti2, want) != (self.tet_map[tn], self.vertex_maps[tn]):
                    return False
        return True


@dataclass(frozen=True)
class EdgeClass:
    """One edge of the triangulation: the set of (tet, edge) slots
    identified by the gluings; valence = number of slots = number of
    dihedral wedges around the edge."""

    index: int
    slots: tuple   # sorted ((tet, (a,b)), ...) with a < b

    @property
    def valence(self):
        return len(self.slots)


@dataclass(frozen=True)
class FillRelation:
    """Homology/relator datum of a Dehn filling curve p*mu + q*lam."""

    cusp: int
    slope: tuple
    curve: PeripheralCurve


# --------------------------------------------------------------------------
# the triangulation itself


class _DisjointSets:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[rx] = ry

    def classes(self):
        cls = {}
        for x in self.parent:
            cls.setdefault(self.find(x), []).append(x)
        return [sorted(c) for c in cls.values()]


class IdealTriangulation:
    """Immutable ideal triangulation; moves return new values.

    gluings: per tet, a sequence of four (neighbor, perm) pairs.
    curves: optional; per cusp a (meridian, longitude) pair of
        PeripheralCurve (or weight mappings), indexed by the canonical
        cusp order (cusps sorted by their smallest (tet, vertex) slot).
    """

    def __init__(self, gluings, curves=None, validate=True):
        glue = []
        for row in gluings:
            row = tuple((int(nb), tuple(p)) for nb, p in row)
            if len(row) != 4:
                raise ValidationError("each tetrahedron needs 4 gluings")
            glue.append(row)
        self._glue = tuple(glue)
        self._curves = None
        if curves is not None:
            packed = []
            for mu, lam in curves:
                if not isinstance(mu, PeripheralCurve):
                    mu = PeripheralCurve(mu)
                if not isinstance(lam, PeripheralCurve):
                    lam = PeripheralCurve(lam)
                packed.append((mu, lam))
            self._curves = tuple(packed)
        if validate:
            self._validate()

    # -- basic access ----------------------------------------------------

    @property
    def glue(self):
        return self._glue

    @property
    def curves(self):
        return self._curves

    @property
    def num_tets(self):
        return len(self._glue)

    @property
    def num_cusps(self):
        return len(self.cusp_classes)

    def neighbor(self, t, f):
        return self._glue[t][f]

    # -- derived partitions ------------------------------------------------

    @cached_property
    def edge_classes(self):
        slots = [(t, e) for t in range(self.num_tets) for e in _EDGES]
        ds = _DisjointSets(slots)
        for t in range(self.num_tets):
            for f in range(4):
                t2, s = self._glue[t][f]
                for (a, b) in _EDGES:
                    if f in (a, b):
                        continue
                    e2 = (s[a], s[b]) if s[a] < s[b] else (s[b], s[a])
                    ds.union((t, (a, b)), (t2, e2))
        classes = sorted(ds.classes())
        return [EdgeClass(i, tuple(c)) for i, c in enumerate(classes)]

    @cached_property
    def cusp_classes(self):
        """List of cusps; cusp c is a sorted tuple of (tet, vertex) slots.
        Cusps are ordered by their smallest slot."""
        slots = [(t, v) for t in range(self.num_tets) for v in range(4)]
        ds = _DisjointSets(slots)
        for t in range(self.num_tets):
            for f in range(4):
                t2, s = self._glue[t][f]
                for v in range(4):
                    if v != f:
                        ds.union((t, v), (t2, s[v]))
        return [tuple(c) for c in sorted(ds.classes())]

    @cached_property
    def cusp_of_slot(self):
        out = {}
        for ci, cl in enumerate(self.cusp_classes):
            for sl in cl:
                out[sl] = ci
        return out

    @cached_property
    def edge_end_classes(self):
        """Orbits of (tet, (a,b), endpoint) slots: the vertices of the
        induced cusp triangulations."""
        slots = [(t, e, w) for t in range(self.num_tets)
                 for e in _EDGES for w in e]
        ds = _DisjointSets(slots)
        for t in range(self.num_tets):
            for f in range(4):
                t2, s = self._glue[t][f]
                for (a, b) in _EDGES:
                    if f in (a, b):
                        continue
                    e2 = (s[a], s[b]) if s[a] < s[b] else (s[b], s[a])
                    for w in (a, b):
                        ds.union((t, (a, b), w), (t2, e2, s[w]))
        return [tuple(c) for c in sorted(ds.classes())]

    @cached_property
    def edge_end_index(self):
        out = {}
        for i, cl in enumerate(self.edge_end_classes):
            for sl in cl:
                out[sl] = i
        return out

    def link_euler_characteristics(self):
        """Euler characteristic of each cusp's link triangulation."""
        cusp_of = self.cusp_of_slot
        faces = [0] * self.num_cusps
        for (t, v), ci in cusp_of.items():
            faces[ci] += 1
        verts = [0] * self.num_cusps
        for cl in self.edge_end_classes:
            t, e, w = cl[0]
            verts[cusp_of[(t, w)]] += 1
        return [verts[c] - (3 * faces[c]) // 2 + faces[c]
                for c in range(self.num_cusps)]

    # -- validation --------------------------------------------------------

    def _validate(self):
        n = self.num_tets
        if n == 0:
            raise ValidationError("empty triangulation")
        for t in range(n):
            for f in range(4):
                t2, s = self._glue[t][f]
                if not 0 <= t2 < n:
                    raise ValidationError(
                        "tet %d face %d: neighbor %d out of range" % (t, f, t2))
                if sorted(s) != [0, 1, 2, 3]:
                    raise ValidationError(
                        "tet %d face %d: %r is not a permutation" % (t, f, s))
                if perm_parity(s) != 1:
                    raise ValidationError(
                        "tet %d face %d: gluing permutation %r is even "
                        "(breaks the odd/oriented convention)" % (t, f, s))
                if (t2, s[f]) == (t, f):
                    raise ValidationError(
                        "tet %d face %d is glued to itself" % (t, f))
                t3, s2 = self._glue[t2][s[f]]
                if t3 != t or s2 != perm_inverse(s):
                    raise ValidationError(
                        "gluing of tet %d face %d is not involutive" % (t, f))
        # connectivity
        seen = {0}
        stack = [0]
        while stack:
            t = stack.pop()
            for f in range(4):
                t2, _ = self._glue[t][f]
                if t2 not in seen:
                    seen.add(t2)
                    stack.append(t2)
        if len(seen) != n:
            raise ValidationError("triangulation is not connected")
        # every cusp link must be a torus
        for ci, chi in enumerate(self.link_euler_characteristics()):
            if chi != 0:
                raise ValidationError(
                    "link of cusp %d has Euler characteristic %d, "
                    "not a torus" % (ci, chi))
        if self._curves is not None:
            if len(self._curves) != self.num_cusps:
                raise ValidationError(
                    "peripheral curves given for %d cusps, expected %d"
                    % (len(self._curves), self.num_cusps))
            for ci, (mu, lam) in enumerate(self._curves):
                for name, cur in (("meridian", mu), ("longitude", lam)):
                    self._validate_curve(ci, name, cur)
                x = intersection_pairing(self, mu, lam, ci)
                if x not in (1, -1):
                    raise ValidationError(
                        "cusp %d: meridian/longitude intersection number "
                        "%d, expected +-1" % (ci, x))

    def _validate_curve(self, ci, name, cur):
        cusp_of = self.cusp_of_slot
        for (t, v, f), c in cur.items():
            if not 0 <= t < self.num_tets:
                raise ValidationError(
                    "%s %d: tet %d out of range" % (name, ci, t))
            if cusp_of[(t, v)] != ci:
                raise ValidationError(
                    "%s %d: weight at %d:%d:%d lies on cusp %d"
                    % (name, ci, t, v, f, cusp_of[(t, v)]))
            t2, s = self._glue[t][f]
            if cur.get(t2, s[v], s[f]) != -c:
                raise ValidationError(
                    "%s %d: weights at %d:%d:%d and its matched side "
                    "do not cancel" % (name, ci, t, v, f))
        for (t, v) in self.cusp_classes[ci]:
            tot = sum(cur.get(t, v, f) for f in range(4) if f != v)
            if tot != 0:
                raise ValidationError(
                    "%s %d: not closed at link triangle (%d,%d)"
                    % (name, ci, t, v))

    # -- misc -------------------------------------------------------------

    def with_curves(self, curves):
        return IdealTriangulation(self._glue, curves)

    def __repr__(self):
        return ("IdealTriangulation(%d tets, %d cusps)"
                % (self.num_tets, self.num_cusps))


# --------------------------------------------------------------------------
# intersection pairing (combinatorial, on one cusp torus)


def _g_counts(weights, t, v):
    """Corner passage counts of a curve inside link triangle (t,v),
    normalized so the minimum is 0 is NOT applied here; base corner a=0."""
    a, b, c = ccw_corners(v)
    w1 = weights.get(t, v, side_face(v, a, b))
    w2 = weights.get(t, v, side_face(v, b, c))
    return {a: 0, b: -w1, c: -w1 - w2}


def intersection_pairing(tri, curve_a, curve_b, cusp):
    """Algebraic intersection number of two curves on one cusp torus.

    curve_b is slid off the 1-skeleton of the link triangulation into a
    cellular 1-cycle on the sides; curve_a's crossing cocycle is then
    evaluated on it.
    """
    slots = tri.cusp_classes[cusp]
    end_index = tri.edge_end_index
    coeff = {}
    for (t, v) in slots:
        a, b, c = ccw_corners(v)
        g = _g_counts(curve_b, t, v)
        for (x, y) in ((a, b), (b, c), (c, a)):
            f = side_face(v, x, y)
            t2, s = tri.glue[t][f]
            other = (t2, s[v], s[f])
            me = (t, v, f)
            if other < me:
                continue
            g2 = _g_counts(curve_b, t2, s[v])
            c1 = g[x] - g2[s[x]]
            c2 = g[y] - g2[s[y]]
            if c1 != c2:
                raise ValidationError(
                    "curve weights inconsistent across side %r" % (me,))
            if c1:
                coeff[me] = c1
    # boundary of the slid cycle must vanish on link vertices
    boundary = {}
    for (t, v, f), cf in coeff.items():
        x, y = (u for u in range(4) if u not in (v, f))
        a, b, c = ccw_corners(v)
        if (x, y) not in ((a, b), (b, c), (c, a)):
            x, y = y, x
        vx = end_index[(t, _sorted_edge(v, x), v)]
        vy = end_index[(t, _sorted_edge(v, y), v)]
        boundary[vy] = boundary.get(vy, 0) + cf
        boundary[vx] = boundary.get(vx, 0) - cf
    if any(val != 0 for val in boundary.values()):
        raise ValidationError("slid curve is not a cycle; inconsistent "
                              "peripheral weights")
    return sum(curve_a.get(t, v, f) * cf
               for (t, v, f), cf in coeff.items())


def _sorted_edge(a, b):
    return (a, b) if a < b else (b, a)


# --------------------------------------------------------------------------
# parse / serialize


def _perm_to_str(p):
    return "".join(str(x) for x in p)


_TOKEN_RE = re.compile(r"^(\d+):(\d+):(\d+)=(-?\d+)$")


def parse(text):
    """Parse the native text format into an IdealTriangulation."""
    header = None
    tet_rows = {}
    curve_rows = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "tets":
            if header is not None:
                raise ParseError("duplicate header", line=lineno)
            if len(toks) != 4 or toks[2] != "cusps":
                raise ParseError(
                    "header must read 'tets N cusps M'", line=lineno)
            try:
                header = (int(toks[1]), int(toks[3]))
            except ValueError:
                raise ParseError("bad count in header", line=lineno)
        elif toks[0] == "tet":
            if len(toks) != 10 or not toks[1].endswith(":"):
                raise ParseError(
                    "tet line needs 'tet i:' plus 4 neighbor/perm pairs",
                    line=lineno)
            try:
                idx = int(toks[1][:-1])
            except ValueError:
                raise ParseError("bad tet index %r" % toks[1], line=lineno)
            if idx in tet_rows:
                raise ParseError("duplicate tet %d" % idx, line=lineno)
            row = []
            for f in range(4):
                nb_tok, p_tok = toks[2 + 2 * f], toks[3 + 2 * f]
                try:
                    nb = int(nb_tok)
                except ValueError:
                    raise ParseError(
                        "bad neighbor index %r" % nb_tok, line=lineno)
                if len(p_tok) != 4 or not p_tok.isdigit():
                    raise ParseError(
                        "bad permutation %r (need 4 digits)" % p_tok,
                        line=lineno)
                p = tuple(int(ch) for ch in p_tok)
                if sorted(p) != [0, 1, 2, 3]:
                    raise ParseError(
                        "%r is not a permutation of 0123" % p_tok,
                        line=lineno)
                row.append((nb, p))
            tet_rows[idx] = (row, lineno)
        elif toks[0] in ("meridian", "longitude"):
            if len(toks) < 2 or not toks[1].endswith(":"):
                raise ParseError(
                    "%s line needs a cusp index" % toks[0], line=lineno)
            try:
                cusp = int(toks[1][:-1])
            except ValueError:
                raise ParseError("bad cusp index %r" % toks[1], line=lineno)
            key = (toks[0], cusp)
            if key in curve_rows:
                raise ParseError(
                    "duplicate %s for cusp %d" % key, line=lineno)
            weights = {}
            for tok in toks[2:]:
                m = _TOKEN_RE.match(tok)
                if not m:
                    raise ParseError(
                        "bad weight token %r (want t:v:f=w)" % tok,
                        line=lineno)
                t, v, f, wv = (int(g) for g in m.groups())
                if v == f or v > 3 or f > 3:
                    raise ParseError(
                        "bad (vertex, face) pair in %r" % tok, line=lineno)
                if (t, v, f) in weights:
                    raise ParseError(
                        "duplicate weight for %d:%d:%d" % (t, v, f),
                        line=lineno)
                if wv != 0:
                    weights[(t, v, f)] = wv
            curve_rows[key] = (weights, lineno)
        else:
            raise ParseError("unrecognized record %r" % toks[0], line=lineno)

    if header is None:
        raise ParseError("missing 'tets N cusps M' header")
    n, m = header
    if n <= 0:
        raise ParseError("need at least one tetrahedron")
    if set(tet_rows) != set(range(n)):
        missing = sorted(set(range(n)) - set(tet_rows))
        if missing:
            raise ParseError("missing tet record(s): %s"
                             % ", ".join(map(str, missing)))
        extra = sorted(set(tet_rows) - set(range(n)))
        lineno = tet_rows[extra[0]][1]
        raise ParseError("tet index %d outside 0..%d" % (extra[0], n - 1),
                         line=lineno)
    for idx, (row, lineno) in tet_rows.items():
        for nb, _ in row:
            if not 0 <= nb < n:
                raise ParseError(
                    "neighbor index %d outside 0..%d" % (nb, n - 1),
                    line=lineno)

    curves = None
    if curve_rows:
        curves = []
        for c in range(m):
            for kind in ("meridian", "longitude"):
                if (kind, c) not in curve_rows:
                    raise ParseError("missing %s for cusp %d" % (kind, c))
            curves.append((curve_rows[("meridian", c)][0],
                           curve_rows[("longitude", c)][0]))
        extra = set(curve_rows) - {(k, c) for c in range(m)
                                   for k in ("meridian", "longitude")}
        if extra:
            kind, c = sorted(extra)[0]
            raise ParseError("cusp index %d outside 0..%d" % (c, m - 1),
                             line=curve_rows[(kind, c)][1])

    tri = IdealTriangulation([tet_rows[i][0] for i in range(n)], curves)
    if tri.num_cusps != m:
        raise ValidationError(
            "header declares %d cusps but the gluing has %d"
            % (m, tri.num_cusps))
    return tri


def serialize(tri):
    """Canonical text form: deterministic, round-trips through parse."""
    lines = ["tets %d cusps %d" % (tri.num_tets, tri.num_cusps)]
    for t in range(tri.num_tets):
        parts = ["%d %s" % (nb, _perm_to_str(p)) for nb, p in tri.glue[t]]
        lines.append("tet %d: %s" % (t, " ".join(parts)))
    if tri.curves is not None:
        for c, (mu, lam) in enumerate(tri.curves):
            for name, cur in (("meridian", mu), ("longitude", lam)):
                toks = ["%d:%d:%d=%d" % (t, v, f, w)
                        for (t, v, f), w in sorted(cur.items())]
                lines.append("%s %d: %s" % (name, c, " ".join(toks)))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Pachner moves

_PI_INTERNAL = (0, 1, 3, 2)   # gluing between consecutive new tets


def pachner_2_3(tri, face):
    """2-3 move across an interior face of two distinct tetrahedra.

    face: (tet, face index). Returns a new triangulation with one more
    tetrahedron; peripheral curves are transported.
    """
    t0, f0 = face
    if not (0 <= t0 < tri.num_tets and 0 <= f0 < 4):
        raise MoveInadmissible("no such face %r" % (face,))
    t1, sigma = tri.glue[t0][f0]
    if t1 == t0:
        raise MoveInadmissible(
            "face (%d,%d) is glued to its own tetrahedron" % (t0, f0))
    w = ccw_corners(f0)
    # label maps from model tets N_k = (A, B, P_{k+1}, P_{k+2}) into the
    # old tetrahedra: m0[k] into t0 (A side), m1[k] into t1 (B side);
    # both are even, so composed gluings stay odd.
    m0 = [(f0, w[k], w[(k + 1) % 3], w[(k + 2) % 3]) for k in range(3)]
    m1 = [tuple(sigma[x] for x in (w[k], f0, w[(k + 1) % 3], w[(k + 2) % 3]))
          for k in range(3)]

    keep = [t for t in range(tri.num_tets) if t not in (t0, t1)]
    newidx = {t: i for i, t in enumerate(keep)}
    base = len(keep)

    portal = {}
    for k in range(3):
        portal[(t0, w[k])] = (base + k, perm_inverse(m0[k]))
        portal[(t1, sigma[w[k]])] = (base + k, perm_inverse(m1[k]))

    rows = []
    for t in keep:
        row = []
        for f in range(4):
            tn, sn = tri.glue[t][f]
            if tn in (t0, t1):
                nj, minv = portal[(tn, sn[f])]
                row.append((nj, perm_compose(minv, sn)))
            else:
                row.append((newidx[tn], sn))
        rows.append(row)
    for k in range(3):
        row = [None] * 4
        for model_face, src_t, src_f, mmap in (
                (1, t0, w[k], m0[k]),
                (0, t1, sigma[w[k]], m1[k])):
            tn, sn = tri.glue[src_t][src_f]
            p = perm_compose(sn, mmap)
            if (tn, sn[src_f]) in portal:
                nj, minv = portal[(tn, sn[src_f])]
                row[model_face] = (nj, perm_compose(minv, p))
            else:
                row[model_face] = (newidx[tn], p)
        row[2] = (base + (k + 1) % 3, _PI_INTERNAL)
        row[3] = (base + (k + 2) % 3, _PI_INTERNAL)
        rows.append(row)

    curves = None
    if tri.curves is not None:
        sw = [sigma[w[k]] for k in range(3)]

        def map_slot(t, v):
            """Image of an old (tet, vertex) slot after the move."""
            if t not in (t0, t1):
                return (newidx[t], v)
            if t == t0:
                if v == f0:
                    return (base, 0)
                m = w.index(v)
            else:
                if v == sigma[f0]:
                    return (base, 1)
                m = sw.index(v)
            return (base + (m + 1) % 3, 3)

        def transport(cur):
            neww = {}

            def add(key, val):
                if val:
                    neww[key] = neww.get(key, 0) + val

            for (t, v, f), val in cur.items():
                if t not in (t0, t1):
                    add((newidx[t], v, f), val)
                elif t == t0:
                    if v == f0:                      # apex A triangle
                        add((base + w.index(f), 0, 1), val)
                    elif f != f0:                    # equatorial, outer side
                        m = w.index(v)
                        if f == w[(m + 1) % 3]:
                            add((base + (m + 1) % 3, 3, 1), val)
                        else:
                            add((base + (m + 2) % 3, 2, 1), val)
                else:
                    if v == sigma[f0]:               # apex B triangle
                        add((base + sw.index(f), 1, 0), val)
                    elif f != sigma[f0]:
                        m = sw.index(v)
                        if f == sw[(m + 1) % 3]:
                            add((base + (m + 1) % 3, 3, 0), val)
                        else:
                            add((base + (m + 2) % 3, 2, 0), val)
            # internal sides of the two apex fans (one net-flow freedom
            # per fan; the cycle around the central vertex is dropped)
            for vfan, f_outer in ((0, 1), (1, 0)):
                out = [neww.get((base + k, vfan, f_outer), 0)
                       for k in range(3)]
                x0 = -out[0]
                x1 = x0 - out[1]
                if x1 - out[2] != 0:
                    raise ValidationError(
                        "curve not closed around the replaced face")
                for k, xk in enumerate((x0, x1, 0)):
                    add((base + k, vfan, 2), xk)
                    add((base + (k + 1) % 3, vfan, 3), -xk)
            # re-diagonalized equatorial squares
            for m in range(3):
                k1, k2 = base + (m + 1) % 3, base + (m + 2) % 3
                d = -(neww.get((k1, 3, 0), 0) + neww.get((k1, 3, 1), 0))
                add((k1, 3, 2), d)
                add((k2, 2, 3), -d)
                if neww.get((k2, 2, 0), 0) + neww.get((k2, 2, 1), 0) - d != 0:
                    raise ValidationError(
                        "curve not closed around a replaced edge")
            return neww

        curves = _reorder_cusps(
            rows, [(transport(mu), transport(lam)) for mu, lam in tri.curves],
            tri, map_slot)

    return IdealTriangulation(rows, curves)


def _reorder_cusps(rows, transported, tri, map_slot):
    """Cusp indices are canonical (ordered by smallest slot), and a move
    renumbers tetrahedra, so the transported curves must be rearranged
    into the new triangulation's cusp order."""
    tmp = IdealTriangulation(rows, None, validate=False)
    out = [None] * len(transported)
    for ci, cl in enumerate(tri.cusp_classes):
        t, v = cl[0]
        out[tmp.cusp_of_slot[map_slot(t, v)]] = transported[ci]
    return out


def _resolve_edge_class(tri, edge):
    if isinstance(edge, EdgeClass):
        return edge
    if isinstance(edge, int):
        return tri.edge_classes[edge]
    t, e = edge
    e = _sorted_edge(*e)
    for cls in tri.edge_classes:
        if (t, e) in cls.slots:
            return cls
    raise MoveInadmissible("no such edge slot %r" % (edge,))


def edge_star(tri, edge):
    """Walk the star of a valence-3 edge, returning (tets, label maps).

    ``lams[k]`` is the even map from the model tet N_k = (A, B, P_{k+1},
    P_{k+2}) onto the k-th tetrahedron around the edge. Raises
    MoveInadmissible unless the star is a standard bipyramid of three
    distinct tetrahedra.
    """
    cls = _resolve_edge_class(tri, edge)
    if cls.valence != 3:
        raise MoveInadmissible(
            "edge class %d has valence %d, need 3" % (cls.index, cls.valence))
    if len({t for t, _ in cls.slots}) != 3:
        raise MoveInadmissible(
            "edge class %d does not meet three distinct tetrahedra"
            % cls.index)

    t_start, e_start = cls.slots[0]
    a0, b0 = e_start
    q = [x for x in range(4) if x not in e_start]
    lam0 = (a0, b0, q[0], q[1])
    if perm_parity(lam0) == 1:
        lam0 = (a0, b0, q[1], q[0])
    tets_order = [t_start]
    lams = [lam0]
    tcur, lcur = t_start, lam0
    for step in range(3):
        tn, tau = tri.glue[tcur][lcur[2]]
        lnext = perm_compose(tau, perm_compose(lcur, _PI_INTERNAL))
        if step < 2:
            tets_order.append(tn)
            lams.append(lnext)
            tcur, lcur = tn, lnext
        else:
            if tn != t_start or lnext != lam0:
                raise MoveInadmissible(
                    "edge star of class %d is not a standard bipyramid"
                    % cls.index)
    if len(set(tets_order)) != 3:
        raise MoveInadmissible(
            "edge class %d does not meet three distinct tetrahedra"
            % cls.index)
    return tets_order, lams


def pachner_3_2(tri, edge):
    """3-2 move on an edge of valence 3 with three distinct tetrahedra.

    edge: an EdgeClass, an edge-class index, or a (tet, (a,b)) slot.
    Returns a new triangulation with one fewer tetrahedron; peripheral
    curves are transported.
    """
    tets_order, lams = edge_star(tri, edge)

    keep = [t for t in range(tri.num_tets) if t not in set(tets_order)]
    newidx = {t: i for i, t in enumerate(keep)}
    ttop, tbot = len(keep), len(keep) + 1
    p_bot = (1, 3, 2)   # label of P_i in the bottom tet; top label is i+1
    mu_map = [(0, k + 1, ((k + 1) % 3) + 1, ((k + 2) % 3) + 1)
              for k in range(3)]
    nu_map = [(p_bot[k], 0, p_bot[(k + 1) % 3], p_bot[(k + 2) % 3])
              for k in range(3)]

    portal = {}
    for k in range(3):
        tk, lk = tets_order[k], lams[k]
        portal[(tk, lk[1])] = (ttop, perm_compose(mu_map[k],
                                                  perm_inverse(lk)))
        portal[(tk, lk[0])] = (tbot, perm_compose(nu_map[k],
                                                  perm_inverse(lk)))

    rows = []
    for t in keep:
        row = []
        for f in range(4):
            tn, sn = tri.glue[t][f]
            if tn in newidx:
                row.append((newidx[tn], sn))
            else:
                nj, pmap = portal[(tn, sn[f])]
                row.append((nj, perm_compose(pmap, sn)))
        rows.append(row)
    row_top = [None] * 4
    row_bot = [None] * 4
    row_top[0] = (tbot, _PI_INTERNAL)
    row_bot[0] = (ttop, _PI_INTERNAL)
    for k in range(3):
        tk, lk = tets_order[k], lams[k]
        for new_t, new_f, mmap, src_f in (
                (ttop, k + 1, mu_map[k], lk[1]),
                (tbot, p_bot[k], nu_map[k], lk[0])):
            tn, sn = tri.glue[tk][src_f]
            p = perm_compose(sn, perm_compose(lk, perm_inverse(mmap)))
            tgt = (tn, sn[src_f])
            if tn in newidx:
                entry = (newidx[tn], p)
            else:
                nj, pmap = portal[tgt]
                entry = (nj, perm_compose(pmap, p))
            if new_t == ttop:
                row_top[new_f] = entry
            else:
                row_bot[new_f] = entry
    rows.append(row_top)
    rows.append(row_bot)

    curves = None
    if tri.curves is not None:
        star = {tets_order[k]: k for k in range(3)}

        def map_slot(t, v):
            if t not in star:
                return (newidx[t], v)
            k = star[t]
            mv = perm_inverse(lams[k])[v]
            if mv == 0:
                return (ttop, 0)
            if mv == 1:
                return (tbot, 0)
            return (ttop, ((k + mv - 1) % 3) + 1)

        def transport(cur):
            neww = {}

            def add(key, val):
                if val:
                    neww[key] = neww.get(key, 0) + val

            for (t, v, f), val in cur.items():
                if t not in star:
                    add((newidx[t], v, f), val)
                    continue
                k = star[t]
                linv = perm_inverse(lams[k])
                mv, mf = linv[v], linv[f]
                if mf == 1:
                    add((ttop, mu_map[k][mv], mu_map[k][1]), val)
                elif mf == 0:
                    add((tbot, nu_map[k][mv], nu_map[k][0]), val)
                # mf in (2,3): internal to the star, dropped
            # new diagonal across the merged face
            for m in range(3):
                v_top, v_bot = m + 1, p_bot[m]
                tot = sum(neww.get((ttop, v_top, f), 0)
                          for f in range(1, 4) if f != v_top)
                add((ttop, v_top, 0), -tot)
                add((tbot, v_bot, 0), tot)
                bot_tot = sum(neww.get((tbot, v_bot, f), 0)
                              for f in range(4) if f != v_bot)
                if bot_tot != 0:
                    raise ValidationError(
                        "curve not closed around the collapsed edge")
            for new_t in (ttop, tbot):
                tot = sum(neww.get((new_t, 0, f), 0) for f in range(1, 4))
                if tot != 0:
                    raise ValidationError(
                        "curve not closed at an apex of the collapsed star")
            return neww

        curves = _reorder_cusps(
            rows, [(transport(mu), transport(lam)) for mu, lam in tri.curves],
            tri, map_slot)

    return IdealTriangulation(rows, curves)


# --------------------------------------------------------------------------
# isomorphism search


def enumerate_isomorphisms(src, dst):
    """All combinatorial isomorphisms src -> dst (both orientations).

    Each of the 24*|tets| seeds (image tet of tet 0, vertex permutation)
    is propagated across the face-pairing graph and pruned on first
    contradiction. The result is sorted, so it is deterministic.
    """
    n = src.num_tets
    if n != dst.num_tets:
        return []
    found = []
    for t_img in range(n):
        for rho in ALL_PERMS:
            phi = {0: (t_img, rho)}
            stack = [0]
            ok = True
            while stack and ok:
                t = stack.pop()
                ti, rt = phi[t]
                for f in range(4):
                    tn, s = src.glue[t][f]
                    ti2, s2 = dst.glue[ti][rt[f]]
                    want = perm_compose(perm_compose(s2, rt),
                                        perm_inverse(s))
                    if tn in phi:
                        if phi[tn] != (ti2, want):
                            ok = False
                            break
                    else:
                        phi[tn] = (ti2, want)
                        stack.append(tn)
            if not ok or len(phi) != n:
                continue
            tets_img = tuple(phi[t][0] for t in range(n))
            if len(set(tets_img)) != n:
                continue
            found.append(CombinatorialIsomorphism(
                tets_img, tuple(phi[t][1] for t in range(n))))
    found.sort(key=lambda iso: (iso.tet_map, iso.vertex_maps))
    return found


# --------------------------------------------------------------------------
# Dehn filling relator data


def dehn_fill_relation(tri, cusp, slope):
    """Relator datum for the (p,q) filling of one cusp: the curve
    p*mu + q*lam in the peripheral basis."""
    p, q = slope
    p, q = int(p), int(q)
    if math.gcd(p, q) != 1:
        raise InvalidSlope("slope (%d,%d) is not coprime" % (p, q))
    if tri.curves is None:
        raise ValidationError(
            "triangulation has no peripheral curves; cannot form a "
            "filling relation")
    if not 0 <= cusp < tri.num_cusps:
        raise InvalidSlope("no cusp %d" % cusp)
    mu, lam = tri.curves[cusp]
    return FillRelation(cusp, (p, q), mu.combine(lam, p, q))
