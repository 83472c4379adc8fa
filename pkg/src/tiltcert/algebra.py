"""Integer linear algebra and group-presentation arithmetic.

Exact Smith normal form with transformation matrices, first homology
of Dehn fillings (from an ideal triangulation, a peripheral homology
model, or a group presentation with peripheral words), the L-space
cone induction with per-step additivity checks, Bezout certificates
for the slope-order families, and bounded Tietze reduction of
presentations to cyclic form.

Everything here is exact: arbitrary-precision integers only, no
floating point.
"""

import math
import re
from dataclasses import dataclass

from .errors import (
    HypothesisViolated,
    InvalidSlope,
    ParseError,
    ValidationError,
)
from .triangulation import IdealTriangulation

_TIETZE_CAP = 1_000


# --------------------------------------------------------------------------
# exact integer matrices


@dataclass(frozen=True)
class IntegerMatrix:
    """Immutable matrix of arbitrary-precision integers."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        if not rows or not rows[0]:
            raise ValidationError("matrix dimensions must be positive")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ValidationError("matrix rows have unequal lengths")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, rows):
        if isinstance(rows, IntegerMatrix):
            return rows
        return cls(tuple(tuple(row) for row in rows))

    @classmethod
    def identity(cls, n):
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n))
                         for i in range(n)))

    @property
    def num_rows(self):
        return len(self.entries)

    @property
    def num_cols(self):
        return len(self.entries[0])

    def __getitem__(self, key):
        i, j = key
        return self.entries[i][j]

    def __mul__(self, other):
        other = IntegerMatrix.from_rows(other)
        if self.num_cols != other.num_rows:
            raise ValidationError(
                "cannot multiply %dx%d by %dx%d"
                % (self.num_rows, self.num_cols,
                   other.num_rows, other.num_cols))
        cols = list(zip(*other.entries))
        return IntegerMatrix(tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in cols)
            for row in self.entries))

    def diagonal(self):
        return tuple(self.entries[i][i]
                     for i in range(min(self.num_rows, self.num_cols)))

    def is_diagonal(self):
        return all(x == 0
                   for i, row in enumerate(self.entries)
                   for j, x in enumerate(row) if i != j)


def determinant(m):
    """Exact determinant by fraction-free (Bareiss) elimination."""
    m = IntegerMatrix.from_rows(m)
    if m.num_rows != m.num_cols:
        raise ValidationError("determinant requires a square matrix")
    n = m.num_rows
    a = [list(row) for row in m.entries]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# --------------------------------------------------------------------------
# Smith normal form


def _pivot_position(a, t):
    """A least-magnitude nonzero entry of the trailing submatrix
    a[t:][t:], or None if that submatrix is zero."""
    best = None
    for i in range(t, len(a)):
        for j in range(t, len(a[0])):
            x = a[i][j]
            if x != 0 and (best is None or abs(x) < abs(best[2])):
                best = (i, j, x)
    return None if best is None else (best[0], best[1])


def smith_normal_form(m):
    """Smith normal form with transformations: (D, U, V), U*M*V = D.

    D is diagonal with the same shape as M, every diagonal entry is
    nonnegative and divides the next, and U, V are unimodular.  All
    arithmetic is exact.
    """
    m = IntegerMatrix.from_rows(m)
    nr, nc = m.num_rows, m.num_cols
    a = [list(row) for row in m.entries]
    u = [list(row) for row in IntegerMatrix.identity(nr).entries]
    v = [list(row) for row in IntegerMatrix.identity(nc).entries]

    def row_sub(i, j, q):
        a[i] = [x - q * y for x, y in zip(a[i], a[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def col_sub(i, j, q):
        for row in a:
            row[i] -= q * row[j]
        for row in v:
            row[i] -= q * row[j]

    for t in range(min(nr, nc)):
        pos = _pivot_position(a, t)
        if pos is None:
            break
        while True:
            i, j = pos
            if i != t:
                a[t], a[i] = a[i], a[t]
                u[t], u[i] = u[i], u[t]
            if j != t:
                for row in a:
                    row[t], row[j] = row[j], row[t]
                for row in v:
                    row[t], row[j] = row[j], row[t]
            pivot = a[t][t]
            dirty = False
            for i in range(t + 1, nr):
                if a[i][t] != 0:
                    row_sub(i, t, a[i][t] // pivot)
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, nc):
                if a[t][j] != 0:
                    col_sub(j, t, a[t][j] // pivot)
                    dirty = dirty or a[t][j] != 0
            if dirty:
                pos = _pivot_position(a, t)
                continue
            # clear column and row; now force the divisibility chain by
            # folding any non-multiple into row t and reducing again
            offender = next(
                ((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                 if a[i][j] % pivot != 0), None)
            if offender is None:
                break
            row_sub(t, offender[0], -1)
            pos = (t, t)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return (IntegerMatrix.from_rows(a), IntegerMatrix.from_rows(u),
            IntegerMatrix.from_rows(v))


# --------------------------------------------------------------------------
# abelian group summaries


@dataclass(frozen=True)
class HomologySummary:
    """Finitely generated abelian group: free rank plus torsion
    invariants d_1 | d_2 | ... (each > 1)."""

    rank: int
    torsion: tuple

    @property
    def order(self):
        """Group order if finite, else None."""
        if self.rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    @property
    def is_cyclic(self):
        return self.rank + len(self.torsion) <= 1

    def __str__(self):
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append("Z^%d" % self.rank)
        parts.extend("Z/%d" % d for d in self.torsion)
        return " + ".join(parts) if parts else "0"


def summary_from_relations(rows, num_generators):
    """Quotient of Z^num_generators by the span of the given rows."""
    num_generators = int(num_generators)
    if num_generators < 0:
        raise ValidationError("negative generator count")
    rows = [list(row) for row in rows]
    if any(len(row) != num_generators for row in rows):
        raise ValidationError("relation rows must have one entry per "
                              "generator")
    if num_generators == 0:
        return HomologySummary(0, ())
    rows = [row for row in rows if any(row)]
    if not rows:
        return HomologySummary(num_generators, ())
    d, _, _ = smith_normal_form(rows)
    diag = d.diagonal()
    torsion = tuple(x for x in diag if x > 1)
    nonzero = sum(1 for x in diag if x != 0)
    return HomologySummary(num_generators - nonzero, torsion)


# --------------------------------------------------------------------------
# words and presentations
#
# A word is a tuple of (generator index, nonzero exponent) letters with
# adjacent letters on distinct generators (freely reduced).


def _free_reduce(letters):
    out = []
    for g, e in letters:
        g, e = int(g), int(e)
        if e == 0:
            continue
        if out and out[-1][0] == g:
            merged = out[-1][1] + e
            out.pop()
            if merged:
                out.append((g, merged))
        else:
            out.append((g, e))
    return tuple(out)


def word_inverse(word):
    return tuple((g, -e) for g, e in reversed(word))


def word_concat(*words):
    out = []
    for w in words:
        out.extend(w)
    return _free_reduce(out)


def word_power(word, n):
    n = int(n)
    if n < 0:
        return word_power(word_inverse(word), -n)
    return word_concat(*([word] * n))


def _cyclic_reduce(word):
    letters = list(word)
    while len(letters) >= 2 and letters[0][0] == letters[-1][0]:
        e = letters[0][1] + letters[-1][1]
        g = letters[0][0]
        letters = letters[1:-1]
        if e:
            letters.insert(0, (g, e))
    return tuple(letters)


def format_word(word, generators):
    """Word in the text syntax (`b3a-5`); the empty word is `1`."""
    if not word:
        return "1"
    return "".join(generators[g] + ("" if e == 1 else str(e))
                   for g, e in word)


_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
_EXP_RE = re.compile(r"-?\d+")


def parse_word(text, generators):
    """Parse `b3a-5` style text into a word over the given generators.

    A letter is a generator name followed by an optional integer
    exponent (default 1); longer names match first.
    """
    order = sorted(range(len(generators)),
                   key=lambda i: -len(generators[i]))
    text = "".join(text.split())
    out = []
    pos = 0
    while pos < len(text):
        for i in order:
            name = generators[i]
            if text.startswith(name, pos):
                pos += len(name)
                m = _EXP_RE.match(text, pos)
                e = 1
                if m:
                    e = int(m.group())
                    pos = m.end()
                out.append((i, e))
                break
        else:
            raise ParseError("unrecognized symbol %r at position %d of "
                             "word %r" % (text[pos], pos, text))
    return _free_reduce(out)


def _validate_word(word, num_generators, what):
    for g, e in word:
        if not 0 <= g < num_generators:
            raise ValidationError(
                "%s uses generator index %d out of range" % (what, g))
        if e == 0:
            raise ValidationError("%s has a zero exponent" % what)


@dataclass(frozen=True)
class Presentation:
    """Finite group presentation.

    ``peripherals`` optionally carries one (meridian, longitude) word
    pair per cusp, for Dehn-filling arithmetic on the abelianization.
    """

    generators: tuple
    relators: tuple
    peripherals: tuple = ()

    def __post_init__(self):
        gens = tuple(str(g) for g in self.generators)
        if len(set(gens)) != len(gens):
            raise ValidationError("generator names must be distinct")
        for g in gens:
            if not _NAME_RE.match(g):
                raise ValidationError("bad generator name %r" % g)
        rels = tuple(_free_reduce(r) for r in self.relators)
        for r in rels:
            _validate_word(r, len(gens), "relator")
        periph = []
        for pair in self.peripherals:
            mu, lam = pair
            mu, lam = _free_reduce(mu), _free_reduce(lam)
            _validate_word(mu, len(gens), "meridian word")
            _validate_word(lam, len(gens), "longitude word")
            periph.append((mu, lam))
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", rels)
        object.__setattr__(self, "peripherals", tuple(periph))

    @property
    def num_cusps(self):
        return len(self.peripherals)

    def with_peripherals(self, peripherals):
        return Presentation(self.generators, self.relators,
                            tuple(peripherals))

    def word(self, text):
        return parse_word(text, self.generators)

    def abelianized(self):
        """The HomologyModel carrying this presentation's exponent-sum
        rows and peripheral classes."""
        n = len(self.generators)
        return HomologyModel(
            num_generators=n,
            relations=tuple(_exponent_row(r, n) for r in self.relators),
            peripherals=tuple(
                (_exponent_row(mu, n), _exponent_row(lam, n))
                for mu, lam in self.peripherals))

    def __str__(self):
        head = "gens %s" % " ".join(self.generators)
        rels = ["rel %s" % format_word(r, self.generators)
                for r in self.relators]
        return " ; ".join([head] + rels)


def parse_presentation(text):
    """Parse `gens a b ; rel b3a5 ; rel b2a-3` into a Presentation."""
    gens = None
    rels = []
    for clause in text.split(";"):
        toks = clause.split()
        if not toks:
            continue
        if toks[0] == "gens":
            if gens is not None:
                raise ParseError("duplicate gens clause")
            if len(toks) == 1:
                raise ParseError("gens clause names no generators")
            gens = tuple(toks[1:])
            for g in gens:
                if not _NAME_RE.match(g):
                    raise ParseError("bad generator name %r" % g)
        elif toks[0] == "rel":
            if gens is None:
                raise ParseError("rel clause before gens clause")
            rels.append(parse_word("".join(toks[1:]), gens))
        else:
            raise ParseError("unknown clause %r" % toks[0])
    if gens is None:
        raise ParseError("missing gens clause")
    return Presentation(gens, tuple(rels))


def _exponent_row(word, n):
    row = [0] * n
    for g, e in word:
        row[g] += e
    return tuple(row)


def abelianization(presentation):
    """Abelianization of a presentation as a HomologySummary."""
    model = presentation.abelianized()
    return summary_from_relations(model.relations, model.num_generators)


# --------------------------------------------------------------------------
# slopes, homology models, Dehn-filled homology


UNFILLED = "unfilled"


@dataclass(frozen=True)
class Slope:
    """Primitive filling slope (p, q): coprime and not (0, 0)."""

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if math.gcd(p, q) != 1:
            raise InvalidSlope("slope (%d,%d) is not coprime" % (p, q))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class HomologyModel:
    """First-homology presentation of a cusped manifold: relator rows
    over ``num_generators`` generators, plus each cusp's peripheral
    (meridian, longitude) classes over the same generators.  A cusp
    with no peripheral data carries (None, None)."""

    num_generators: int
    relations: tuple
    peripherals: tuple

    def __post_init__(self):
        n = int(self.num_generators)
        if n < 0:
            raise ValidationError("negative generator count")
        rels = tuple(tuple(int(x) for x in row) for row in self.relations)
        if any(len(row) != n for row in rels):
            raise ValidationError("relation rows must have one entry per "
                                  "generator")
        periph = []
        for pair in self.peripherals:
            mu, lam = pair
            if mu is None or lam is None:
                periph.append((None, None))
                continue
            mu = tuple(int(x) for x in mu)
            lam = tuple(int(x) for x in lam)
            if len(mu) != n or len(lam) != n:
                raise ValidationError("peripheral classes must have one "
                                      "entry per generator")
            periph.append((mu, lam))
        object.__setattr__(self, "num_generators", n)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "peripherals", tuple(periph))

    @property
    def num_cusps(self):
        return len(self.peripherals)


def _face_class_index(tri):
    """Face classes of the triangulation: a list of sorted token pairs
    and a map token -> (class index, orientation sign), oriented from
    the lower (tet, face) token to the upper."""
    order = []
    tok_sign = {}
    for t in range(tri.num_tets):
        for f in range(4):
            if (t, f) in tok_sign:
                continue
            nb, s = tri.glue[t][f]
            other = (nb, s[f])
            tok_sign[(t, f)] = (len(order), 1)
            tok_sign[other] = (len(order), -1)
            order.append(((t, f), other) if (t, f) <= other
                         else (other, (t, f)))
    return order, tok_sign


def _dual_spanning_tree(tri, order):
    """Indices of face classes forming a spanning tree of the dual
    graph (vertices = tetrahedra, edges = face classes)."""
    tree = set()
    reached = {0}
    grew = True
    while grew:
        grew = False
        for idx, ((t, _), (nb, _)) in enumerate(order):
            if (t in reached) != (nb in reached):
                tree.add(idx)
                reached.update((t, nb))
                grew = True
    if len(reached) != tri.num_tets:
        raise ValidationError("dual graph is not connected")
    return tree


def _edge_circuit_row(tri, cls, tok_sign, n):
    """Signed face-crossing counts of the loop around one edge class."""
    row = [0] * n
    t0, (x0, y0) = cls.slots[0]
    rest = [u for u in range(4) if u not in (x0, y0)]
    f, z = rest
    t, x, y = t0, x0, y0
    for _ in range(cls.valence):
        nb, s = tri.glue[t][f]
        idx, sign = tok_sign[(t, f)]
        row[idx] += sign
        t, x, y, f, z = nb, s[x], s[y], s[z], s[f]
    if (t, frozenset((x, y))) != (t0, frozenset((x0, y0))):
        raise ValidationError("edge circuit did not close")
    return row


def _curve_row(curve, tok_sign, n):
    """Face-class coefficients of a peripheral curve: each crossing is
    counted once on each side of the face, so the oriented total is
    halved."""
    row = [0] * n
    for (t, v, f), c in curve.items():
        idx, sign = tok_sign[(t, f)]
        row[idx] += sign * c
    if any(x % 2 for x in row):
        raise ValidationError("curve weights give odd face-crossing "
                              "totals; sides do not cancel")
    return [x // 2 for x in row]


def homology_model(tri):
    """Dual-spine H1 model of an ideal triangulation.

    Generators are the face classes left after contracting a spanning
    tree of the dual graph; relators are the edge-circuit rows; each
    cusp's peripheral classes come from its curve weights when the
    triangulation carries them.
    """
    order, tok_sign = _face_class_index(tri)
    n = len(order)
    tree = _dual_spanning_tree(tri, order)
    cols = [i for i in range(n) if i not in tree]
    rows = [_edge_circuit_row(tri, cls, tok_sign, n)
            for cls in tri.edge_classes]
    periph = []
    for cusp in range(tri.num_cusps):
        if tri.curves is None:
            periph.append((None, None))
            continue
        mu, lam = tri.curves[cusp]
        periph.append((
            tuple(_curve_row(mu, tok_sign, n)[i] for i in cols),
            tuple(_curve_row(lam, tok_sign, n)[i] for i in cols)))
    return HomologyModel(
        num_generators=len(cols),
        relations=tuple(tuple(row[i] for i in cols) for row in rows),
        peripherals=tuple(periph))


def _as_model(target):
    if isinstance(target, IdealTriangulation):
        return homology_model(target)
    if isinstance(target, Presentation):
        return target.abelianized()
    if isinstance(target, HomologyModel):
        return target
    raise ValidationError(
        "filled_homology needs an IdealTriangulation, Presentation, or "
        "HomologyModel, got %r" % type(target).__name__)


def _as_slope(raw):
    if isinstance(raw, Slope):
        return raw
    p, q = raw
    return Slope(p, q)


def filled_homology(target, slopes):
    """First homology of the Dehn filling of ``target``.

    ``slopes`` gives one entry per cusp: a Slope / (p, q) pair for a
    filled cusp, or None / "unfilled" to leave it open.  Each filling
    appends the relation p*mu + q*lam to the target's homology model;
    the summary is the Smith form of the assembled matrix.
    """
    model = _as_model(target)
    slopes = tuple(slopes)
    if len(slopes) != model.num_cusps:
        raise ValidationError(
            "got %d slopes for %d cusps" % (len(slopes), model.num_cusps))
    rows = list(model.relations)
    for cusp, raw in enumerate(slopes):
        if raw is None or (isinstance(raw, str) and raw == UNFILLED):
            continue
        slope = _as_slope(raw)
        mu, lam = model.peripherals[cusp]
        if mu is None:
            raise ValidationError(
                "cusp %d has no peripheral data; cannot fill" % cusp)
        rows.append(tuple(slope.p * a + slope.q * b
                          for a, b in zip(mu, lam)))
    return summary_from_relations(rows, model.num_generators)


# --------------------------------------------------------------------------
# the L-space cone induction


@dataclass(frozen=True)
class ConeSlope:
    """One certified slope k*alpha + beta, its H1 order, and the
    induction step that certified it."""

    k: int
    order: int
    derivation: str


@dataclass(frozen=True)
class LSpaceCone:
    """Cone spanned by slopes alpha, beta with coprime certified lens
    orders; |H1| restricts to a linear functional on the cone."""

    order_alpha: int
    order_beta: int

    def order_of(self, a, b):
        """The linear functional |H1(N_{a*alpha+b*beta})| on the closed
        cone (a, b >= 0, not both zero)."""
        a, b = int(a), int(b)
        if a < 0 or b < 0 or (a == 0 and b == 0):
            raise ValidationError(
                "(%d, %d) is not in the cone" % (a, b))
        return a * self.order_alpha + b * self.order_beta

    def enumerate(self, n):
        """Slopes certified by running the induction through the basis
        (n*alpha + beta, alpha): k*alpha + beta for k = 1 .. n+1.

        Each step k applies the triangle-count condition to the basis
        ((k-1)*alpha + beta, alpha); its order is computed both by that
        additivity and by the linear functional, and the two must
        agree.
        """
        n = int(n)
        if n < 0:
            raise ValidationError("induction depth must be >= 0")
        out = []
        prev = self.order_beta
        for k in range(1, n + 2):
            by_sum = prev + self.order_alpha
            if by_sum != self.order_of(k, 1):
                raise ValidationError(
                    "additivity check failed at step %d" % k)
            out.append(ConeSlope(
                k=k, order=by_sum,
                derivation=("basis (%d*alpha+beta, alpha): "
                            "|H1| %d = %d + %d"
                            % (k - 1, by_sum, prev, self.order_alpha))))
            prev = by_sum
        return tuple(out)


def lspace_cone(order_alpha, order_beta):
    """The certified L-space cone for basis slopes of the given lens
    orders.  Raises HypothesisViolated unless the orders are coprime
    positive integers."""
    order_alpha, order_beta = int(order_alpha), int(order_beta)
    if order_alpha <= 0 or order_beta <= 0:
        raise HypothesisViolated(
            "lens orders must be positive, got (%d, %d)"
            % (order_alpha, order_beta))
    if math.gcd(order_alpha, order_beta) != 1:
        raise HypothesisViolated(
            "lens orders (%d, %d) are not coprime"
            % (order_alpha, order_beta))
    return LSpaceCone(order_alpha, order_beta)


# --------------------------------------------------------------------------
# slope-order families and their Bezout certificates


@dataclass(frozen=True)
class SlopeFamily:
    """Integer-linear order family (p1(k), p2(k)) with Bezout
    cofactors (u(k), v(k)) certifying u*p1 + v*p2 = 1 identically.
    Linear polynomials are (constant, k-coefficient) pairs."""

    name: str
    p1: tuple
    p2: tuple
    u: tuple
    v: tuple


FAMILY_PLUS = SlopeFamily(
    name="6k+1,15k+4", p1=(1, 6), p2=(4, 15), u=(-3, -5), v=(1, 2))
FAMILY_MINUS = SlopeFamily(
    name="6k-1,15k-4", p1=(-1, 6), p2=(-4, 15), u=(3, -5), v=(-1, 2))

FAMILIES = {FAMILY_PLUS.name: FAMILY_PLUS, FAMILY_MINUS.name: FAMILY_MINUS}


@dataclass(frozen=True)
class BezoutCertificate:
    """Certificate that u*p1 + v*p2 = 1: the expansion's polynomial
    coefficients (necessarily (1, 0, 0)) and the numeric check range."""

    family: SlopeFamily
    coefficients: tuple
    checked_range: tuple


def _linear_mul(a, b):
    return (a[0] * b[0], a[0] * b[1] + a[1] * b[0], a[1] * b[1])


def _linear_at(a, k):
    return a[0] + a[1] * k


def verify_family_coprimality(family, k_range=(-100, 100)):
    """Verify a family's Bezout identity symbolically (expanding
    u*p1 + v*p2 in k and comparing coefficients) and numerically over
    the given k range.  Accepts a SlopeFamily or a family name."""
    if isinstance(family, str):
        if family not in FAMILIES:
            raise ValidationError(
                "unknown family %r; known: %s"
                % (family, ", ".join(sorted(FAMILIES))))
        family = FAMILIES[family]
    lhs = _linear_mul(family.u, family.p1)
    rhs = _linear_mul(family.v, family.p2)
    coeffs = tuple(x + y for x, y in zip(lhs, rhs))
    if coeffs != (1, 0, 0):
        raise ValidationError(
            "Bezout identity fails symbolically: u*p1 + v*p2 expands "
            "to %r" % (coeffs,))
    lo, hi = k_range
    for k in range(lo, hi + 1):
        p1, p2 = _linear_at(family.p1, k), _linear_at(family.p2, k)
        u, v = _linear_at(family.u, k), _linear_at(family.v, k)
        if u * p1 + v * p2 != 1:
            raise ValidationError(
                "Bezout identity fails numerically at k=%d" % k)
        if math.gcd(abs(p1), abs(p2)) != 1:
            raise ValidationError(
                "orders are not coprime at k=%d" % k)
    return BezoutCertificate(family, coeffs, (lo, hi))


# --------------------------------------------------------------------------
# bounded Tietze reduction to cyclic form


@dataclass(frozen=True)
class Cyclic:
    """Successful reduction to a one-generator power presentation
    <g | g^order>; order 0 is the infinite cyclic group."""

    order: int
    presentation: Presentation
    moves: tuple


@dataclass(frozen=True)
class Unreduced:
    """Abstention: the bounded Tietze search did not reach a cyclic
    power presentation.  Never a claim that the group is not cyclic."""

    presentation: Presentation
    moves: tuple


def _occurrences(word, g):
    return sum(abs(e) for h, e in word if h == g)


def _best_occurrence(gens, rels):
    counts = [_occurrences(r, g)
              for r in rels for g in range(len(gens))]
    counts = [c for c in counts if c]
    return min(counts) if counts else math.inf


def _total_length(rels):
    return sum(sum(abs(e) for _, e in r) for r in rels)


def _find_elimination(gens, rels):
    """A (relator index, generator) pair where the generator occurs
    exactly once, preferring the shortest defining relator."""
    best = None
    for ri, r in enumerate(rels):
        for g in range(len(gens)):
            if _occurrences(r, g) == 1:
                key = (sum(abs(e) for _, e in r), ri, g)
                if best is None or key < best:
                    best = key
    return None if best is None else (best[1], best[2])


def _substitute(word, g, sub):
    out = []
    for h, e in word:
        if h == g:
            out.extend(word_power(sub, e))
        else:
            out.append((h, e))
    return _free_reduce(out)


def _drop_generator(word, g):
    return tuple((h - 1 if h > g else h, e) for h, e in word)


def cyclic_reduction(presentation, max_moves=_TIETZE_CAP):
    """Reduce a presentation towards the form <g | g^n> by Tietze
    moves, returning Cyclic(n) on success and Unreduced when the move
    budget or the move repertoire is exhausted.

    Moves: replace a relator by its (freely and cyclically reduced)
    product with another relator when that lowers the least generator
    occurrence count or the total length; eliminate a generator that
    occurs exactly once in some relator.  Each counts against
    ``max_moves``.
    """
    if max_moves < 0:
        raise ValidationError("move budget must be >= 0")
    gens = list(presentation.generators)
    rels = [w for w in (_cyclic_reduce(r) for r in presentation.relators)
            if w]
    moves = []
    budget = max_moves

    def snapshot():
        return Presentation(tuple(gens), tuple(rels))

    while True:
        rels = [r for r in rels if r]
        if not gens:
            return Cyclic(1, snapshot(), tuple(moves))
        if len(gens) == 1:
            exps = [abs(r[0][1]) for r in rels]
            n = 0
            for e in exps:
                n = math.gcd(n, e)
            if len(rels) > 1:
                if budget < 1:
                    return Unreduced(snapshot(), tuple(moves))
                budget -= 1
                moves.append("combine power relators: gcd -> %s^%d"
                             % (gens[0], n))
            final = Presentation(
                (gens[0],), (((0, n),),) if n else ())
            return Cyclic(n, final, tuple(moves))

        pick = _find_elimination(gens, rels)
        if pick is not None:
            if budget < 1:
                return Unreduced(snapshot(), tuple(moves))
            budget -= 1
            ri, g = pick
            r = rels[ri]
            at = next(i for i, (h, e) in enumerate(r)
                      if h == g and abs(e) == 1)
            rotated = r[at:] + r[:at]
            rest = rotated[1:]
            sub = word_inverse(rest) if rotated[0][1] == 1 else rest
            moves.append("eliminate %s = %s (relator %d)"
                         % (gens[g], format_word(sub, gens), ri))
            rels = [_cyclic_reduce(_substitute(w, g, sub))
                    for i, w in enumerate(rels) if i != ri]
            rels = [_drop_generator(w, g) for w in rels if w]
            del gens[g]
            continue

        current = (_best_occurrence(gens, rels), _total_length(rels))
        best = None
        for i in range(len(rels)):
            for j in range(len(rels)):
                if i == j:
                    continue
                for s in (1, -1):
                    other = rels[j] if s == 1 else word_inverse(rels[j])
                    for rot in range(len(rels[i])):
                        rotated = rels[i][rot:] + rels[i][:rot]
                        cand = _cyclic_reduce(
                            word_concat(other, rotated))
                        trial = [cand if k == i else rels[k]
                                 for k in range(len(rels))]
                        trial = [w for w in trial if w]
                        key = (_best_occurrence(gens, trial),
                               _total_length(trial))
                        if key < current and (
                                best is None or key < best[0]):
                            best = (key, i, j, s, cand)
        if best is None:
            return Unreduced(snapshot(), tuple(moves))
        if budget < 1:
            return Unreduced(snapshot(), tuple(moves))
        budget -= 1
        _, i, j, s, cand = best
        moves.append("relator %d <- relator %d%s * relator %d"
                     % (i, j, "^-1" if s < 0 else "", i))
        rels[i] = cand
