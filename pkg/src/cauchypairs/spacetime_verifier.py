"""Finite-difference certification of four-dimensional Lorentzian metrics.

All curvature here is computed from coordinate formulas (Christoffel symbols
of the metric components), independently of the frame algebra used elsewhere;
it serves as the oracle for every curvature claim.  Grids are uniform over
[t0, t1] x box with coordinate order (t, x, y, z) — or any relabeling, since
nothing below assumes which coordinate is time except the signature check
and the globally-hyperbolic decompositions.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    GridTooSmall,
    LambdaVanishes,
    PairAlgebraViolated,
    SignatureViolation,
)


class Grid4:
    """A field sampled on a uniform 4D box grid; payload in trailing axes."""

    def __init__(self, box, values):
        box = tuple((float(a), float(b)) for a, b in box)
        values = np.asarray(values, dtype=float)
        if len(box) != 4:
            raise ValueError("box must have four axis intervals")
        if values.ndim < 4:
            raise ValueError("values must carry four leading grid axes")
        if any(n < 5 for n in values.shape[:4]):
            raise GridTooSmall(f"need >= 5 samples per axis, got {values.shape[:4]}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        self.box = box
        self.values = values

    @property
    def shape(self):
        return self.values.shape[:4]

    @property
    def spacing(self):
        return tuple((b - a) / (n - 1) for (a, b), n in zip(self.box, self.shape))

    def axis(self, i):
        a, b = self.box[i]
        return np.linspace(a, b, self.shape[i])

    def meshgrid(self):
        return np.meshgrid(*(self.axis(i) for i in range(4)), indexing="ij")

    @classmethod
    def from_function(cls, box, n, func):
        if np.isscalar(n):
            n = (n,) * 4
        axes = [np.linspace(a, b, ni) for (a, b), ni in zip(box, n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        vals = np.asarray(func(*mesh), dtype=float)
        if vals.shape[:4] != mesh[0].shape:
            vals = np.broadcast_to(vals, mesh[0].shape).copy()
        return cls(box, vals)

    def like(self, values):
        return Grid4(self.box, values)

    def grad(self, values, axis):
        return np.gradient(values, self.spacing[axis], axis=axis, edge_order=2)


def interior_max4(values, include_boundary: bool = False) -> float:
    v = np.abs(np.asarray(values))
    if not include_boundary:
        v = v[2:-2, 2:-2, 2:-2, 2:-2]
    return float(v.max())


class Metric4Grid(Grid4):
    """Per-node symmetric 4x4 metric with mostly-plus Lorentzian signature."""

    def __init__(self, box, values, check_signature: bool = True):
        super().__init__(box, values)
        if self.values.shape[4:] != (4, 4):
            raise ValueError("metric payload must be 4x4")
        if not np.allclose(self.values, np.swapaxes(self.values, -1, -2)):
            raise ValueError("metric must be symmetric at every node")
        if check_signature:
            eig = np.linalg.eigvalsh(self.values)
            neg = (eig < 0).sum(axis=-1)
            if np.any(neg != 1):
                bad = np.argwhere(neg != 1)
                raise SignatureViolation(
                    f"signature is not (-,+,+,+) at {len(bad)} nodes, "
                    f"first at index {tuple(bad[0])}"
                )

    @classmethod
    def from_metric_function(cls, box, n, gfunc, **kw):
        base = Grid4.from_function(box, n, gfunc)
        return cls(base.box, base.values, **kw)

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.values)


def christoffel_fd(g: Metric4Grid) -> np.ndarray:
    """Gamma^mu_{nu rho} = (1/2) g^{mu s}(d_nu g_{rho s} + d_rho g_{nu s} - d_s g_{nu rho})."""
    gv = g.values
    # dg[..., m, i, j] = d_m g_ij
    dg = np.stack([g.grad(gv, i) for i in range(4)], axis=4)
    ginv = g.inverse()
    sym = dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
    return 0.5 * np.einsum("...kl,...ijl->...kij", ginv, sym)


def ricci4_fd(g: Metric4Grid, symmetry_tol: float = None) -> np.ndarray:
    """Ricci tensor by central differences of the Christoffel symbols.

    Ric_{ij} = d_m Gamma^m_{ij} - d_i Gamma^m_{mj}
               + Gamma^m_{ms} Gamma^s_{ij} - Gamma^m_{is} Gamma^s_{mj}.
    """
    gam = christoffel_fd(g)
    d_gam = np.stack([g.grad(gam, i) for i in range(4)], axis=4)
    # d_gam[..., p, k, i, j] = d_p Gamma^k_ij
    term1 = np.einsum("...mmij->...ij", d_gam)
    trace_gam = np.einsum("...mmj->...j", gam)
    # term2[..., i, j] = d_i (Gamma^m_mj)
    term2 = np.stack([g.grad(trace_gam, i) for i in range(4)], axis=4)
    term3 = np.einsum("...mms,...sij->...ij", gam, gam)
    term4 = np.einsum("...mis,...smj->...ij", gam, gam)
    ric = term1 - term2 + term3 - term4
    asym = interior_max4(ric - np.swapaxes(ric, -1, -2))
    if symmetry_tol is not None and asym > symmetry_tol:
        raise ValueError(f"Ricci asymmetry {asym} exceeds {symmetry_tol}")
    return ric


def riemann4_fd(g: Metric4Grid) -> np.ndarray:
    """R^mu_{nu rho s} = d_rho Gamma^mu_{s nu} - d_s Gamma^mu_{rho nu}
    + Gamma^mu_{rho q} Gamma^q_{s nu} - Gamma^mu_{s q} Gamma^q_{rho nu}."""
    gam = christoffel_fd(g)
    d_gam = np.stack([g.grad(gam, i) for i in range(4)], axis=4)
    # d_gam[..., p, k, i, j] = d_p Gamma^k_ij
    term = np.einsum("...pksn->...knps", d_gam)  # d_p Gamma^k_{s n} -> R^k_{n p s}
    riem = term - np.swapaxes(term, -2, -1)
    riem += np.einsum("...kpq,...qsn->...knps", gam, gam)
    riem -= np.einsum("...ksq,...qpn->...knps", gam, gam)
    return riem


def covariant_derivative4(g: Metric4Grid, omega: np.ndarray, gamma=None) -> np.ndarray:
    """(nabla omega)_{mu nu} = d_mu omega_nu - Gamma^l_{mu nu} omega_l."""
    if gamma is None:
        gamma = christoffel_fd(g)
    partial = np.stack([g.grad(omega, i) for i in range(4)], axis=4)
    return partial - np.einsum("...kij,...k->...ij", gamma, omega)


class ParabolicPairData:
    """A null covector u and a unit spatial covector l orthogonal to it.

    Both are stored as coordinate components on the metric grid; the algebra
    g(u, u) = 0, g(l, l) = 1, g(u, l) = 0 is validated pointwise at
    construction.
    """

    def __init__(self, g: Metric4Grid, u, l, tol: float = 1e-9):
        u = np.asarray(u, dtype=float)
        l = np.asarray(l, dtype=float)
        if u.shape != g.shape + (4,) or l.shape != g.shape + (4,):
            raise ValueError("u and l must be 4-covector grids on the metric grid")
        ginv = g.inverse()
        uu = np.einsum("...ij,...i,...j->...", ginv, u, u)
        ll = np.einsum("...ij,...i,...j->...", ginv, l, l)
        ul = np.einsum("...ij,...i,...j->...", ginv, u, l)
        worst = max(
            float(np.abs(uu).max()),
            float(np.abs(ll - 1).max()),
            float(np.abs(ul).max()),
        )
        if worst > tol:
            raise PairAlgebraViolated(
                f"null/unit/orthogonality algebra residual {worst} exceeds {tol}"
            )
        self.g = g
        self.u = u
        self.l = l


def gh_decomposition(g: Metric4Grid, off_diag_tol: float = 1e-9):
    """Lapse, spatial metric and shape operator of a metric in the globally
    hyperbolic form -lambda^2 dt (x) dt + h_t; rejects metrics with dt-space
    cross terms."""
    gv = g.values
    cross = float(np.abs(gv[..., 0, 1:]).max())
    if cross > off_diag_tol:
        raise ValueError(f"metric has dt-space cross terms of size {cross}")
    g00 = gv[..., 0, 0]
    if np.any(g00 >= 0):
        raise SignatureViolation("g_00 must be negative in the GH decomposition")
    lam = np.sqrt(-g00)
    if np.any(lam == 0):
        raise LambdaVanishes("lapse vanishes on the grid")
    h = gv[..., 1:, 1:]
    theta = -g.grad(h, 0) / (2 * lam[..., None, None])
    return lam, h, theta


def parallel_pair_residual(
    g: Metric4Grid,
    pair: ParabolicPairData,
    include_boundary: bool = False,
    spatial_l_tol: float = 1e-9,
):
    """Residuals of the parallelism conditions nabla u = 0, nabla l = kappa (x) u.

    kappa is extracted in closed form from the globally hyperbolic
    decomposition: kappa(dt-slot) = -dlambda(l#)/u0, spatial part
    Theta(l#)/u0 with u0 = u_0/lambda.  Requires the metric in GH form with
    a purely spatial representative l.  Returns (max |nabla u|,
    max |nabla l - kappa (x) u|, kappa grid).
    """
    gamma = christoffel_fd(g)
    nab_u = covariant_derivative4(g, pair.u, gamma)
    nab_l = covariant_derivative4(g, pair.l, gamma)

    if float(np.abs(pair.l[..., 0]).max()) > spatial_l_tol:
        raise PairAlgebraViolated("l must be a purely spatial representative")

    lam, h, theta = gh_decomposition(g)
    hinv = np.linalg.inv(h)
    u0 = pair.u[..., 0] / lam
    if np.any(np.abs(u0) < 1e-14):
        raise PairAlgebraViolated("u0 vanishes; kappa extraction undefined")
    l_perp = pair.l[..., 1:]
    l_sharp = np.einsum("...ij,...j->...i", hinv, l_perp)
    dlam = np.stack([g.grad(lam, i) for i in range(1, 4)], axis=-1)
    kappa = np.zeros(g.shape + (4,))
    kappa[..., 0] = -np.einsum("...i,...i->...", dlam, l_sharp) / u0
    kappa[..., 1:] = np.einsum("...ij,...j->...i", theta, l_sharp) / u0[..., None]

    res_l = nab_l - kappa[..., :, None] * pair.u[..., None, :]
    return (
        interior_max4(nab_u, include_boundary),
        interior_max4(res_l, include_boundary),
        kappa,
    )


def general_flow_residual(
    grid: Grid4,
    lam: np.ndarray,
    h: np.ndarray,
    u0: np.ndarray,
    u_perp: np.ndarray,
    l_perp: np.ndarray,
    include_boundary: bool = False,
) -> dict:
    """Max-norms of the parallel spinor flow equations for sampled data.

    `lam`, `u0` are scalar grids; `h` is (..., 3, 3); `u_perp`, `l_perp` are
    spatial covector grids (..., 3).  The six flow equations, the two
    algebraic constraints and the two derived identities are each reported
    under a stable key.
    """
    if np.any(lam == 0):
        raise LambdaVanishes("lambda vanishes on the grid")
    hinv = np.linalg.inv(h)
    theta = -grid.grad(h, 0) / (2 * lam[..., None, None])

    def sharp(cov):
        return np.einsum("...ij,...j->...i", hinv, cov)

    def theta_of(cov):
        return np.einsum("...ij,...j->...i", theta, sharp(cov))

    dlam = np.stack([grid.grad(lam, i) for i in range(1, 4)], axis=-1)
    dlam_l = np.einsum("...i,...i->...", dlam, sharp(l_perp))
    dlam_u = np.einsum("...i,...i->...", dlam, sharp(u_perp))

    report = {}
    ev_u = grid.grad(u_perp, 0) + lam[..., None] * theta_of(u_perp) - u0[..., None] * dlam
    report["evolution_u"] = interior_max4(ev_u, include_boundary)
    ev_l = (
        u0[..., None] * grid.grad(l_perp, 0)
        + (lam * u0)[..., None] * theta_of(l_perp)
        + dlam_l[..., None] * u_perp
    )
    report["evolution_l"] = interior_max4(ev_l, include_boundary)

    gamma_h = _christoffel_spatial(grid, h)
    nab_u = _spatial_cov_deriv(grid, gamma_h, u_perp)
    report["spatial_u"] = interior_max4(
        nab_u + u0[..., None, None] * theta, include_boundary
    )
    nab_l = _spatial_cov_deriv(grid, gamma_h, l_perp)
    res_l = u0[..., None, None] * nab_l - theta_of(l_perp)[..., :, None] * u_perp[..., None, :]
    report["spatial_l"] = interior_max4(res_l, include_boundary)

    norm_u = np.einsum("...ij,...i,...j->...", hinv, u_perp, u_perp)
    norm_l = np.einsum("...ij,...i,...j->...", hinv, l_perp, l_perp)
    report["norm_u"] = interior_max4(u0**2 - norm_u, include_boundary)
    report["norm_l"] = interior_max4(norm_l - 1, include_boundary)

    report["derived_dtu0"] = interior_max4(grid.grad(u0, 0) - dlam_u, include_boundary)
    du0 = np.stack([grid.grad(u0, i) for i in range(1, 4)], axis=-1)
    report["derived_du0"] = interior_max4(du0 + theta_of(u_perp), include_boundary)

    report["max"] = max(report.values())
    return report


def _christoffel_spatial(grid: Grid4, h: np.ndarray) -> np.ndarray:
    """Per-slice Christoffel symbols of the spatial metric h (indices 1..3)."""
    dh = np.stack([grid.grad(h, i) for i in range(1, 4)], axis=4)
    hinv = np.linalg.inv(h)
    sym = dh + np.swapaxes(dh, -3, -2) - np.moveaxis(dh, -3, -1)
    return 0.5 * np.einsum("...kl,...ijl->...kij", hinv, sym)


def _spatial_cov_deriv(grid: Grid4, gamma: np.ndarray, omega: np.ndarray) -> np.ndarray:
    partial = np.stack([grid.grad(omega, i) for i in range(1, 4)], axis=4)
    return partial - np.einsum("...kij,...k->...ij", gamma, omega)
