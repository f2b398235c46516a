"""Finite-difference exterior calculus on box grids and the universal-cover
construction of parallel Cauchy pairs.

Fields are sampled on uniform rectangular grids over a box in R^3 with the
coordinate order (x, y, z).  Covectors and 2-tensors carry their component
indices as trailing array axes.  All derivatives are second-order central
differences with second-order one-sided stencils at the boundary; residual
norms exclude a 2-node boundary collar unless asked otherwise.
"""

from __future__ import annotations

import json
import struct

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import sqrtm

from .errors import (
    DegenerateCoframe,
    GridTooSmall,
    MixedConditionViolated,
    WDerivativeVanishes,
    YZDependence,
)

_MAGIC = b"CPGRID1\n"


class FieldGrid:
    """A scalar/covector/tensor field sampled on a uniform box grid in R^3.

    `box` is ((x0, x1), (y0, y1), (z0, z1)); `values` has shape
    (nx, ny, nz, *component_shape) with at least 5 samples per axis.
    """

    def __init__(self, box, values):
        box = tuple((float(a), float(b)) for a, b in box)
        values = np.asarray(values, dtype=float)
        if len(box) != 3:
            raise ValueError("box must have three axis intervals")
        if values.ndim < 3:
            raise ValueError("values must carry three leading grid axes")
        if any(n < 5 for n in values.shape[:3]):
            raise GridTooSmall(f"need >= 5 samples per axis, got {values.shape[:3]}")
        if any(b <= a for a, b in box):
            raise ValueError("box intervals must be nondegenerate")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        self.box = box
        self.values = values

    @property
    def shape(self):
        return self.values.shape[:3]

    @property
    def component_shape(self):
        return self.values.shape[3:]

    @property
    def spacing(self):
        return tuple(
            (b - a) / (n - 1) for (a, b), n in zip(self.box, self.shape)
        )

    def axis(self, i):
        a, b = self.box[i]
        return np.linspace(a, b, self.shape[i])

    def meshgrid(self):
        return np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing="ij")

    @classmethod
    def from_function(cls, box, n, func):
        """Sample func(x, y, z) (broadcasting over arrays) on an n-per-axis grid."""
        if np.isscalar(n):
            n = (n, n, n)
        axes = [np.linspace(a, b, ni) for (a, b), ni in zip(box, n)]
        xx, yy, zz = np.meshgrid(*axes, indexing="ij")
        vals = np.asarray(func(xx, yy, zz), dtype=float)
        if vals.shape[:3] != xx.shape:
            vals = np.broadcast_to(vals, xx.shape).copy()
        return cls(box, vals)

    def like(self, values):
        return FieldGrid(self.box, values)

    # -- serialization ------------------------------------------------------

    def to_binary(self) -> bytes:
        """Flat layout: magic, axis sizes, box bounds, payload rank+dims, float64 data."""
        head = [_MAGIC]
        head.append(struct.pack("<3q", *self.shape))
        head.append(struct.pack("<6d", *(v for ab in self.box for v in ab)))
        comp = self.component_shape
        head.append(struct.pack("<q", len(comp)))
        if comp:
            head.append(struct.pack(f"<{len(comp)}q", *comp))
        data = np.ascontiguousarray(self.values, dtype="<f8").tobytes()
        return b"".join(head) + data

    @classmethod
    def from_binary(cls, blob: bytes) -> "FieldGrid":
        if blob[: len(_MAGIC)] != _MAGIC:
            raise ValueError("not a FieldGrid binary blob")
        off = len(_MAGIC)
        shape = struct.unpack_from("<3q", blob, off)
        off += 24
        bounds = struct.unpack_from("<6d", blob, off)
        off += 48
        (rank,) = struct.unpack_from("<q", blob, off)
        off += 8
        comp = struct.unpack_from(f"<{rank}q", blob, off) if rank else ()
        off += 8 * rank
        full = tuple(shape) + tuple(comp)
        values = np.frombuffer(blob, dtype="<f8", offset=off).reshape(full)
        box = tuple((bounds[2 * i], bounds[2 * i + 1]) for i in range(3))
        return cls(box, values.copy())

    def to_text(self) -> str:
        """Structured text (JSON) form, intended for small grids."""
        return json.dumps(
            {
                "box": [list(ab) for ab in self.box],
                "shape": list(self.shape),
                "component_shape": list(self.component_shape),
                "values": self.values.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_text(cls, text: str) -> "FieldGrid":
        doc = json.loads(text)
        return cls(doc["box"], np.array(doc["values"], dtype=float))


def _grad(grid: FieldGrid, values, axis):
    return np.gradient(values, grid.spacing[axis], axis=axis, edge_order=2)


def interior_max(grid: FieldGrid, values, include_boundary: bool = False) -> float:
    """Max |values| over the grid, excluding a 2-node collar by default."""
    v = np.abs(np.asarray(values))
    if not include_boundary:
        v = v[2:-2, 2:-2, 2:-2]
    return float(v.max())


def fd_exterior_derivative(grid: FieldGrid) -> FieldGrid:
    """Exterior derivative of a covector grid: (d omega)_ij = d_i omega_j - d_j omega_i."""
    if grid.component_shape != (3,):
        raise ValueError("fd_exterior_derivative expects a covector grid")
    om = grid.values
    partial = np.stack([_grad(grid, om, i) for i in range(3)], axis=3)
    d = partial - np.swapaxes(partial, 3, 4)
    return grid.like(d)


def fd_dd_residual(grid: FieldGrid, include_boundary: bool = False) -> float:
    """Max-norm of the d(d omega) defect of the discrete operator (O(h^2))."""
    d = fd_exterior_derivative(grid).values
    # coefficient of dx^dy^dz in d of the 2-form: cyclic sum of partials
    acc = np.zeros(grid.shape)
    for (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        acc += _grad(grid, d[..., j, k], i)
    return interior_max(grid, acc, include_boundary)


def _wedge(alpha, beta):
    """(alpha ^ beta)_ij for covector arrays with trailing component axis."""
    return alpha[..., :, None] * beta[..., None, :] - alpha[..., None, :] * beta[..., :, None]


def metric_from_coframe(coframe: FieldGrid) -> np.ndarray:
    """h_ij = sum_a (e_a)_i (e_a)_j for a coframe grid of shape (..., 3 frames, 3)."""
    e = coframe.values
    return np.einsum("...ai,...aj->...ij", e, e)


def christoffel3_fd(grid: FieldGrid, h: np.ndarray) -> np.ndarray:
    """Christoffel symbols Gamma^k_ij of a 3-metric grid by central differences."""
    # dh[..., i, j, l] = d_i h_jl
    dh = np.stack([_grad(grid, h, i) for i in range(3)], axis=3)
    hinv = np.linalg.inv(h)
    sym = (
        dh
        + np.swapaxes(dh, -3, -2)  # d_j h_il
        - np.moveaxis(dh, -3, -1)  # d_l h_ij
    )
    return 0.5 * np.einsum("...kl,...ijl->...kij", hinv, sym)


def covariant_derivative_covector(grid: FieldGrid, h: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """(nabla omega)_{ij} = d_i omega_j - Gamma^k_ij omega_k for a covector grid."""
    gamma = christoffel3_fd(grid, h)
    partial = np.stack([_grad(grid, omega, i) for i in range(3)], axis=3)
    return partial - np.einsum("...kij,...k->...ij", gamma, omega)


def constraint_residual_fd(
    coframe: FieldGrid,
    theta: FieldGrid,
    include_boundary: bool = False,
    degeneracy_tol: float = 1e-12,
) -> dict:
    """Residual report of the first-order Cauchy system on a box.

    `coframe` holds the rows (e_u, e_l, e_n) in coordinate components,
    shape (..., 3, 3); `theta` holds symmetric frame components, shape
    (..., 3, 3).  Reports max-norms of d e_a - Theta(e_a) ^ e_u for each a,
    of d(Theta(e_u)) (closedness proxy for the cohomological condition), and
    of the covariant forms nabla e_u + Theta - Theta(e_u) (x) e_u and
    nabla e_l - Theta(e_l) (x) e_u computed with finite-difference
    Christoffel symbols of the frame metric.
    """
    e = coframe.values
    th = theta.values
    if coframe.component_shape != (3, 3) or theta.component_shape != (3, 3):
        raise ValueError("coframe and theta grids must have 3x3 payloads")

    det = np.linalg.det(e)
    bad = np.argwhere(np.abs(det) <= degeneracy_tol)
    if bad.size:
        raise DegenerateCoframe(
            f"coframe singular at {len(bad)} nodes", nodes=[tuple(b) for b in bad[:10]]
        )

    # Theta(e_a) = sum_b theta_ab e_b, coordinate components
    theta_e = np.einsum("...ab,...bi->...ai", th, e)
    eu = e[..., 0, :]

    report = {}
    names = ("u", "l", "n")
    worst = 0.0
    for a in range(3):
        de = fd_exterior_derivative(coframe.like(e[..., a, :])).values
        res = de - _wedge(theta_e[..., a, :], eu)
        val = interior_max(coframe, res, include_boundary)
        report[f"exterior_{names[a]}"] = val
        worst = max(worst, val)
    report["exterior_max"] = worst

    d_theta_eu = fd_exterior_derivative(coframe.like(theta_e[..., 0, :])).values
    report["theta_eu_closed"] = interior_max(coframe, d_theta_eu, include_boundary)

    h = metric_from_coframe(coframe)
    theta_coord = np.einsum("...ab,...ai,...bj->...ij", th, e, e)
    nab_u = covariant_derivative_covector(coframe, h, eu)
    res_u = nab_u + theta_coord - theta_e[..., 0, :, None] * eu[..., None, :]
    report["covariant_u"] = interior_max(coframe, res_u, include_boundary)
    nab_l = covariant_derivative_covector(coframe, h, e[..., 1, :])
    res_l = nab_l - theta_e[..., 1, :, None] * eu[..., None, :]
    report["covariant_l"] = interior_max(coframe, res_l, include_boundary)
    report["max"] = max(
        report["exterior_max"],
        report["theta_eu_closed"],
        report["covariant_u"],
        report["covariant_l"],
    )
    return report


# ---------------------------------------------------------------------------
# universal cover construction
# ---------------------------------------------------------------------------


class UniversalCoverData:
    """Ingredients of the metric e^{2u} dx (x) dx + h_x on R^3.

    `u_grid` is a scalar FieldGrid for the conformal exponent; `hx` maps the
    x-axis samples to 2x2 SPD matrices acting on (dy, dz) (constant in y, z);
    `F` is the free scalar function of x entering the shape operator.  The
    transverse coframe rows are the symmetric SPD square root of h_x,
    corrected by an x-dependent rotation so that the mixed symmetry condition
    (d_x e_l)(e_n#) = (d_x e_n)(e_l#) holds.
    """

    def __init__(self, u_grid: FieldGrid, hx, F, mixed_tol: float = 1e-8):
        if u_grid.component_shape != ():
            raise ValueError("u_grid must be a scalar grid")
        self.u_grid = u_grid
        x = u_grid.axis(0)
        hx_samples = np.array([np.asarray(hx(xi), dtype=float) for xi in x])
        if hx_samples.shape[1:] != (2, 2):
            raise ValueError("hx must produce 2x2 matrices")
        if not np.allclose(hx_samples, np.swapaxes(hx_samples, 1, 2)):
            raise ValueError("hx must be symmetric")
        eig = np.linalg.eigvalsh(hx_samples)
        if np.any(eig <= 0):
            raise ValueError("hx must be positive definite at every x sample")
        self.hx_samples = hx_samples
        self.F_samples = np.array([float(F(xi)) for xi in x])
        self.transverse = self._factorize(mixed_tol)

    def _factorize(self, mixed_tol: float) -> np.ndarray:
        """Rows (e_l, e_n) of a square-root factorization satisfying the
        mixed condition; symmetric SPD root, then a rotation repair."""
        x = self.u_grid.axis(0)
        root = np.array([np.real(sqrtm(m)) for m in self.hx_samples])
        defect = self._mixed_defect(x, root)
        scale = max(1.0, float(np.abs(root).max()))
        # the defect is measured with second-order finite differences, so it
        # cannot be resolved below an O(h^2) floor on any smooth family
        h = self.u_grid.spacing[0]
        floor = 4.0 * h * h * max(1.0, float(np.abs(defect).max()))
        threshold = max(mixed_tol * scale, floor)
        if np.abs(defect).max() > threshold:
            # rotating the rows by phi(x) shifts the defect by +/- 2 phi'(x)
            # depending on orientation; keep the better of the two signs
            phi = 0.5 * cumulative_trapezoid(defect, x, initial=0.0)
            candidates = []
            for sign in (1.0, -1.0):
                c, s = np.cos(sign * phi), np.sin(sign * phi)
                rot = np.array([[c, -s], [s, c]]).transpose(2, 0, 1)
                cand = rot @ root
                candidates.append((np.abs(self._mixed_defect(x, cand)).max(), cand))
            _, root = min(candidates, key=lambda t: t[0])
            defect = self._mixed_defect(x, root)
            if np.abs(defect).max() > threshold:
                i = int(np.argmax(np.abs(defect)))
                raise MixedConditionViolated(
                    "mixed symmetry condition fails after rotation repair",
                    max_residual=float(np.abs(defect).max()),
                    location=float(x[i]),
                )
        self.mixed_residual = float(np.abs(defect).max())
        return root

    def _mixed_defect(self, x, root) -> np.ndarray:
        """(d_x e_l)(e_n#) - (d_x e_n)(e_l#) along the x axis."""
        droot = np.gradient(root, x, axis=0, edge_order=2)
        hinv = np.linalg.inv(self.hx_samples)
        a = np.einsum("xi,xij,xj->x", droot[:, 0, :], hinv, root[:, 1, :])
        b = np.einsum("xi,xij,xj->x", droot[:, 1, :], hinv, root[:, 0, :])
        return a - b

    def coframe_grid(self) -> FieldGrid:
        """Coordinate components of (e_u, e_l, e_n) on the full grid."""
        nx, ny, nz = self.u_grid.shape
        e = np.zeros((nx, ny, nz, 3, 3))
        e[..., 0, 0] = np.exp(self.u_grid.values)
        e[..., 1, 1:] = self.transverse[:, None, None, 0, :]
        e[..., 2, 1:] = self.transverse[:, None, None, 1, :]
        return self.u_grid.like(e)


def build_universal_theta(data: UniversalCoverData) -> FieldGrid:
    """Frame components of the parallel shape operator of a universal-cover metric.

    Theta = (F e^{-u} + d_x e^{-u}) e_u (x) e_u + e_u (x) du + du (x) e_u
            - (1/2) e^{-u} d_x h_x,
    written on the orthonormal frame (e_u#, e_l#, e_n#).
    """
    g = data.u_grid
    u = g.values
    x = g.axis(0)
    eu_exp = np.exp(-u)

    du = [_grad(g, u, i) for i in range(3)]

    # transverse frame vectors: columns of the inverse factorization matrix
    binv = np.linalg.inv(data.transverse)  # (nx, 2, 2); v_l = binv[:, :, 0]
    dhx = np.gradient(data.hx_samples, x, axis=0, edge_order=2)

    nx, ny, nz = g.shape
    th = np.zeros((nx, ny, nz, 3, 3))
    th[..., 0, 0] = eu_exp * (data.F_samples[:, None, None] + du[0])

    # Theta(e_u, e_i) = du(e_i#) for the transverse frame directions
    for i in range(2):  # frame index l, n
        v = binv[:, :, i]  # (nx, 2) components on (partial_y, partial_z)
        val = du[1] * v[:, None, None, 0] + du[2] * v[:, None, None, 1]
        th[..., 0, 1 + i] = val
        th[..., 1 + i, 0] = val

    block = -0.5 * np.einsum(
        "xim,xmn,xjn->xij", binv.transpose(0, 2, 1), dhx, binv.transpose(0, 2, 1)
    )
    th[..., 1:, 1:] = eu_exp[..., None, None] * block[:, None, None, :, :]
    return g.like(th)


def warped_F_for_ricci_flat(
    w,
    u_grid: FieldGrid,
    yz_tol: float = 1e-8,
    deriv_tol: float = 1e-12,
):
    """The x-function F making the warped universal-cover pair satisfy the
    Hamiltonian constraint, for h_x = e^{2 w(x)} (dy^2 + dz^2).

    F = -(w'' + (w')^2)/w'
        - e^{2(u - w)} (2 u_y^2 + 2 u_z^2 + u_yy + u_zz) / (2 w'),
    valid when w' never vanishes and the bracketed u-term depends on x only.
    Returns the sampled F(x) array.
    """
    x = u_grid.axis(0)
    w_s = np.array([float(w(xi)) for xi in x])
    dw = np.gradient(w_s, x, edge_order=2)
    ddw = np.gradient(dw, x, edge_order=2)
    if np.any(np.abs(dw) <= deriv_tol):
        raise WDerivativeVanishes("w'(x) vanishes at some sample")

    u = u_grid.values
    uy = _grad(u_grid, u, 1)
    uz = _grad(u_grid, u, 2)
    uyy = _grad(u_grid, uy, 1)
    uzz = _grad(u_grid, uz, 2)
    bracket = np.exp(2 * (u - w_s[:, None, None])) * (
        2 * uy**2 + 2 * uz**2 + uyy + uzz
    )
    spread = bracket.max(axis=(1, 2)) - bracket.min(axis=(1, 2))
    scale = max(1.0, float(np.abs(bracket).max()))
    if spread.max() > yz_tol * scale:
        raise YZDependence(
            f"u-dependent term varies over (y, z) by {spread.max():.3e}"
        )
    bx = bracket.mean(axis=(1, 2))
    return -(ddw + dw**2) / dw - bx / (2 * dw)
