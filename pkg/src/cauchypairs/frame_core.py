"""Exact/float algebra of left-invariant Cauchy pairs in an orthonormal frame.

All tensors are stored as frame components with the fixed index order
(u, l, n) = (0, 1, 2).  Arithmetic is plain Python, so `fractions.Fraction`
entries propagate exactly; float entries fall back to binary64.  Predicates
take an absolute tolerance (default 1e-9) which is ignored for exact inputs.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import CauchyPairsError

U, L, N = 0, 1, 2
AXES = (U, L, N)

DEFAULT_TOL = 1e-9


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _finite(x) -> bool:
    if _is_exact(x):
        return True
    return math.isfinite(x)


def is_zero(x, tol: float = DEFAULT_TOL) -> bool:
    """Zero test: exact for int/Fraction entries, |x| <= tol otherwise."""
    if _is_exact(x):
        return x == 0
    return abs(x) <= tol


class ShapeOperator:
    """Symmetric 3x3 frame-component matrix of the shape operator.

    Entries may be int/Fraction (exact mode) or float.  NaN/inf entries and
    asymmetric input are rejected at construction.
    """

    __slots__ = ("entries",)

    def __init__(self, matrix):
        rows = [tuple(row) for row in matrix]
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise CauchyPairsError("shape operator must be 3x3")
        for r in rows:
            for x in r:
                if not _finite(x):
                    raise CauchyPairsError("shape operator entries must be finite")
        for a in AXES:
            for b in AXES:
                if rows[a][b] != rows[b][a]:
                    da = rows[a][b] - rows[b][a]
                    if _is_exact(da) or abs(da) > 1e-12 * max(1.0, self._scale(rows)):
                        raise CauchyPairsError("shape operator must be symmetric")
        # symmetrize away float round-off so invariants hold exactly
        object.__setattr__(
            self,
            "entries",
            tuple(
                tuple(
                    rows[a][b]
                    if rows[a][b] == rows[b][a]
                    else (rows[a][b] + rows[b][a]) / 2
                    for b in AXES
                )
                for a in AXES
            ),
        )

    @staticmethod
    def _scale(rows):
        return max(abs(float(x)) for r in rows for x in r)

    def __setattr__(self, name, value):
        raise AttributeError("ShapeOperator is immutable")

    @classmethod
    def from_components(cls, uu=0, ul=0, un=0, ll=0, ln=0, nn=0):
        return cls([[uu, ul, un], [ul, ll, ln], [un, ln, nn]])

    @classmethod
    def zero(cls):
        return cls.from_components()

    @classmethod
    def diagonal(cls, uu, ll, nn):
        return cls.from_components(uu=uu, ll=ll, nn=nn)

    def __getitem__(self, ab):
        a, b = ab
        return self.entries[a][b]

    def __eq__(self, other):
        return isinstance(other, ShapeOperator) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"ShapeOperator({[list(r) for r in self.entries]})"

    @property
    def uu(self):
        return self.entries[U][U]

    @property
    def ul(self):
        return self.entries[U][L]

    @property
    def un(self):
        return self.entries[U][N]

    @property
    def ll(self):
        return self.entries[L][L]

    @property
    def ln(self):
        return self.entries[L][N]

    @property
    def nn(self):
        return self.entries[N][N]

    @property
    def trace(self):
        return self.uu + self.ll + self.nn

    @property
    def block_trace(self):
        """T = theta_ll + theta_nn: trace of the restriction to ker(e_u)."""
        return self.ll + self.nn

    @property
    def block_det(self):
        """Delta = theta_ll theta_nn - theta_ln^2."""
        return self.ll * self.nn - self.ln * self.ln

    @property
    def norm_sq(self):
        return sum(self.entries[a][b] ** 2 for a in AXES for b in AXES)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(x) for r in self.entries for x in r)

    def as_float(self) -> "ShapeOperator":
        return ShapeOperator([[float(x) for x in r] for r in self.entries])

    def square(self):
        """Frame components of theta o theta (matrix square)."""
        t = self.entries
        return tuple(
            tuple(sum(t[a][m] * t[m][b] for m in AXES) for b in AXES) for a in AXES
        )

    def row(self, a):
        """Covector theta(e_a) in frame components."""
        return self.entries[a]


class StructureData:
    """Exterior-derivative coefficients of a left-invariant coframe.

    `d[k][i][j]` is antisymmetric in (i, j) and encodes
    d e^k = sum_{i<j} d[k][i][j] e^i wedge e^j in the frame (e_u, e_l, e_n).
    """

    __slots__ = ("d",)

    def __init__(self, coeffs):
        d = tuple(tuple(tuple(row) for row in plane) for plane in coeffs)
        for k in AXES:
            for i in AXES:
                for j in AXES:
                    if d[k][i][j] != -d[k][j][i]:
                        raise CauchyPairsError("structure data must be antisymmetric in (i, j)")
                    if not _finite(d[k][i][j]):
                        raise CauchyPairsError("structure data must be finite")
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("StructureData is immutable")

    def __getitem__(self, kij):
        k, i, j = kij
        return self.d[k][i][j]

    def __eq__(self, other):
        return isinstance(other, StructureData) and self.d == other.d

    def __repr__(self):
        return f"StructureData({[[list(r) for r in p] for p in self.d]})"

    @classmethod
    def zero(cls):
        z = ((0,) * 3,) * 3
        return cls((z, z, z))

    def bracket_coeffs(self):
        """Structure constants c^k_{ij} of the dual frame: [e_i, e_j] = c^k_{ij} e_k.

        These are minus the coframe coefficients: d e^k(e_i, e_j) = -e^k([e_i, e_j]).
        """
        return tuple(
            tuple(tuple(-self.d[k][i][j] for j in AXES) for i in AXES) for k in AXES
        )

    def d_squared(self):
        """Coefficients of d(d e^k) on e^u wedge e^l wedge e^n, for each k.

        Vanishing of all three is the Jacobi/integrability identity.
        """
        eps = _levi_civita()
        out = []
        for k in AXES:
            acc = 0
            # d(sum_{i<j} d[k][i][j] e^i ^ e^j) = sum_{i<j} d[k][i][j] (de^i ^ e^j - e^i ^ de^j)
            for i in AXES:
                for j in AXES:
                    if i >= j:
                        continue
                    c = self.d[k][i][j]
                    if c == 0:
                        continue
                    acc += c * (_wedge_21(self.d[i], j, eps) - _wedge_12(i, self.d[j], eps))
            out.append(acc)
        return tuple(out)

    def max_abs(self):
        return max(abs(float(self.d[k][i][j])) for k in AXES for i in AXES for j in AXES)


def _levi_civita():
    eps = {}
    for (i, j, k), s in (
        ((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
        ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1),
    ):
        eps[(i, j, k)] = s
    return eps


def _wedge_21(two_form, one_index, eps):
    """Coefficient of e^0^e^1^e^2 in (2-form) wedge e^{one_index}."""
    acc = 0
    for p in AXES:
        for q in AXES:
            s = eps.get((p, q, one_index))
            if s:
                acc += s * two_form[p][q]
    return acc / 2 if not _is_exact(acc) else Fraction(acc, 2) if isinstance(acc, int) else acc / 2


def _wedge_12(one_index, two_form, eps):
    """Coefficient of e^0^e^1^e^2 in e^{one_index} wedge (2-form)."""
    acc = 0
    for p in AXES:
        for q in AXES:
            s = eps.get((one_index, p, q))
            if s:
                acc += s * two_form[p][q]
    return acc / 2 if not _is_exact(acc) else Fraction(acc, 2) if isinstance(acc, int) else acc / 2


class Connection:
    """Frame components gamma[c][b][a] of nabla_{e_b} e_a = sum_c gamma[c][b][a] e_c."""

    __slots__ = ("gamma",)

    def __init__(self, gamma):
        g = tuple(tuple(tuple(row) for row in plane) for plane in gamma)
        object.__setattr__(self, "gamma", g)

    def __setattr__(self, name, value):
        raise AttributeError("Connection is immutable")

    def __getitem__(self, cba):
        c, b, a = cba
        return self.gamma[c][b][a]

    def __eq__(self, other):
        return isinstance(other, Connection) and self.gamma == other.gamma

    def max_abs_diff(self, other):
        return max(
            abs(float(self.gamma[c][b][a] - other.gamma[c][b][a]))
            for c in AXES for b in AXES for a in AXES
        )

    def metric_compat_residual(self):
        """Max |gamma[c][b][a] + gamma[a][b][c]| (orthonormal-frame antisymmetry)."""
        return max(
            abs(float(self.gamma[c][b][a] + self.gamma[a][b][c]))
            for c in AXES for b in AXES for a in AXES
        )


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def structure_from_theta(theta: ShapeOperator) -> StructureData:
    """Exterior system of a left-invariant Cauchy pair: d e_a = theta(e_a) ^ e_u."""
    d = [[[0] * 3 for _ in AXES] for _ in AXES]
    for a in AXES:
        for b in (L, N):
            d[a][b][U] = theta[a, b]
            d[a][U][b] = -theta[a, b]
    return StructureData(d)


def integrability_residual(theta: ShapeOperator):
    """The two bilinears whose vanishing is d o d = 0 for the induced structure."""
    return (
        theta.ll * theta.un - theta.ln * theta.ul,
        theta.ln * theta.un - theta.nn * theta.ul,
    )


def cohomology_residual(theta: ShapeOperator):
    """(theta_ul^2 + theta_un^2) Tr(theta); zero iff theta(e_u) is exact."""
    return (theta.ul ** 2 + theta.un ** 2) * theta.trace


def cauchy_residuals(theta: ShapeOperator):
    i1, i2 = integrability_residual(theta)
    return (i1, i2, cohomology_residual(theta))


def is_cauchy(theta: ShapeOperator, tol: float = DEFAULT_TOL) -> bool:
    return all(is_zero(r, tol) for r in cauchy_residuals(theta))


def is_unimodular(theta: ShapeOperator, tol: float = DEFAULT_TOL) -> bool:
    """Unimodularity of the underlying group: T = 0 and theta_ul = theta_un = 0."""
    return (
        is_zero(theta.block_trace, tol)
        and is_zero(theta.ul, tol)
        and is_zero(theta.un, tol)
    )


def connection_cauchy(theta: ShapeOperator) -> Connection:
    """Levi-Civita connection of a parallel Cauchy pair.

    nabla_{e_b} e_a = -delta_{au} theta(e_b) + theta(e_a, e_b) e_u.
    """
    gamma = [[[0] * 3 for _ in AXES] for _ in AXES]
    for b in AXES:
        for a in AXES:
            for c in AXES:
                val = theta[a, b] if c == U else 0
                if a == U:
                    val = val - theta[b, c]
                gamma[c][b][a] = val
    return Connection(gamma)


def connection_koszul(d: StructureData, tol: float = DEFAULT_TOL) -> Connection:
    """Unique metric-compatible torsion-free connection of an orthonormal coframe.

    Independent oracle from structure coefficients alone, via the Koszul formula
    <nabla_{e_b} e_a, e_c> = (c^c_{ba} - c^b_{ac} + c^a_{cb}) / 2.
    Fails if the Jacobi residual of `d` exceeds `tol`.
    """
    jac = d.d_squared()
    if not all(is_zero(j, tol) for j in jac):
        raise CauchyPairsError(f"structure data violates Jacobi identity: {jac}")
    c = d.bracket_coeffs()
    gamma = [[[0] * 3 for _ in AXES] for _ in AXES]
    for cc in AXES:
        for b in AXES:
            for a in AXES:
                num = c[cc][b][a] - c[b][a][cc] + c[a][cc][b]
                gamma[cc][b][a] = (
                    Fraction(num, 2) if isinstance(num, int) else num / 2
                )
    return Connection(gamma)


def nabla_theta(theta: ShapeOperator):
    """Covariant derivative (nabla_{e_a} theta)_{bc}, returned as nested [a][b][c].

    (nabla_a theta) = -theta(e_u) x theta(e_a) - theta(e_a) x theta(e_u)
                      + (theta o theta)(e_a) x e_u + e_u x (theta o theta)(e_a).
    """
    t = theta.entries
    t2 = theta.square()
    out = []
    for a in AXES:
        plane = []
        for b in AXES:
            row = []
            for c in AXES:
                val = -t[U][b] * t[a][c] - t[a][b] * t[U][c]
                if c == U:
                    val = val + t2[a][b]
                if b == U:
                    val = val + t2[a][c]
                row.append(val)
            plane.append(tuple(row))
        out.append(tuple(plane))
    return tuple(out)


def nabla_theta_oracle(theta: ShapeOperator):
    """Same tensor via the product rule with the Cauchy connection (components constant)."""
    gam = connection_cauchy(theta).gamma
    t = theta.entries
    out = []
    for a in AXES:
        plane = []
        for b in AXES:
            row = []
            for c in AXES:
                val = 0
                for m in AXES:
                    val = val - gam[m][a][b] * t[m][c] - gam[m][a][c] * t[b][m]
                row.append(val)
            plane.append(tuple(row))
        out.append(tuple(plane))
    return tuple(out)


def divergence_theta(theta: ShapeOperator):
    """div theta = -Tr(theta) theta(e_u) + |theta|^2 e_u, in frame components."""
    tr = theta.trace
    nsq = theta.norm_sq
    return tuple(
        -tr * theta[U, c] + (nsq if c == U else 0) for c in AXES
    )


def ricci_frame(theta: ShapeOperator):
    """Ricci of the pair metric, term by term, symmetrized.

    Returns (ric, asymmetry_norm): `ric` symmetric 3x3 nested tuple, and the
    max-abs of the pre-symmetrization antisymmetric part.
    Ric = theta o theta - Tr(theta) theta + (dTr - div theta) x e_u
          + nabla_{e_u} theta - (nabla theta)(e_u),
    with dTr(theta) = 0 in the left-invariant case and
    ((nabla theta)(e_u))_{bc} = (nabla_{e_b} theta)_{uc}.
    """
    t2 = theta.square()
    tr = theta.trace
    div = divergence_theta(theta)
    nt = nabla_theta(theta)
    raw = [
        [
            t2[b][c]
            - tr * theta[b, c]
            + (-div[b] if c == U else 0)
            + nt[U][b][c]
            - nt[b][U][c]
            for c in AXES
        ]
        for b in AXES
    ]
    asym = max(abs(float(raw[b][c] - raw[c][b])) for b in AXES for c in AXES)
    ric = tuple(
        tuple(
            raw[b][c]
            if raw[b][c] == raw[c][b]
            else (raw[b][c] + raw[c][b]) / 2
            for c in AXES
        )
        for b in AXES
    )
    return ric, asym


def scalar_curvature(theta: ShapeOperator):
    """R = |theta|^2 - Tr(theta)^2 - 2 (div theta(e_u) - dTr(e_u)); dTr = 0 here."""
    div = divergence_theta(theta)
    return theta.norm_sq - theta.trace ** 2 - 2 * div[U]


def hamiltonian_residual(theta: ShapeOperator):
    """R - |theta|^2 + Tr(theta)^2; zero iff the Hamiltonian constraint holds."""
    return scalar_curvature(theta) - theta.norm_sq + theta.trace ** 2


def momentum_residual(theta: ShapeOperator):
    """dTr(theta) - div theta in frame components; dTr = 0 in the invariant case."""
    div = divergence_theta(theta)
    return tuple(-x for x in div)


def constrained_ricci_flat_residual(theta: ShapeOperator):
    """theta_uu Tr(theta) - |theta|^2; zero iff the pair is constrained Ricci-flat."""
    return theta.uu * theta.trace - theta.norm_sq


def codazzi_tensors(theta: ShapeOperator):
    """The three obstruction tensors C_a, a = u, l, n.

    C_a = e_u x (theta o theta)(e_a) - theta(e_u) x theta(e_a)
          - delta_{ua} theta o theta + theta_{ua} theta.
    """
    t = theta.entries
    t2 = theta.square()
    out = []
    for a in AXES:
        plane = []
        for b in AXES:
            row = []
            for c in AXES:
                val = -t[U][b] * t[a][c] + t[U][a] * t[b][c]
                if b == U:
                    val = val + t2[a][c]
                if a == U:
                    val = val - t2[b][c]
                row.append(val)
            plane.append(tuple(row))
        out.append(tuple(plane))
    return tuple(out)


def codazzi_predicate(theta: ShapeOperator, tol: float = DEFAULT_TOL) -> bool:
    """True iff all C_a vanish (to tolerance)."""
    cs = codazzi_tensors(theta)
    return all(
        is_zero(cs[a][b][c], tol) for a in AXES for b in AXES for c in AXES
    )


def codazzi_predicate_conditions(theta: ShapeOperator, tol: float = DEFAULT_TOL) -> bool:
    """Independent Codazzi route through the two closed-form conditions:

    either theta_ul = theta_un = theta_ln = 0 with theta_ll^2 = theta_ll theta_uu
    and theta_nn^2 = theta_nn theta_uu, or theta(e_u) = T e_u with Delta = 0.
    """
    bullet1 = (
        is_zero(theta.ul, tol)
        and is_zero(theta.un, tol)
        and is_zero(theta.ln, tol)
        and is_zero(theta.ll ** 2 - theta.ll * theta.uu, tol)
        and is_zero(theta.nn ** 2 - theta.nn * theta.uu, tol)
    )
    bullet2 = (
        is_zero(theta.ul, tol)
        and is_zero(theta.un, tol)
        and is_zero(theta.uu - theta.block_trace, tol)
        and is_zero(theta.block_det, tol)
    )
    return bullet1 or bullet2


def codazzi_antisymmetry_residual(theta: ShapeOperator):
    """Max |C_a(e_b, e_d) + C_b(e_a, e_d)| over all index triples."""
    cs = codazzi_tensors(theta)
    return max(
        abs(float(cs[a][b][d] + cs[b][a][d]))
        for a in AXES for b in AXES for d in AXES
    )
