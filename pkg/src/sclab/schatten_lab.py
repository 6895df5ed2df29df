"""Schatten norms of compressed projectors and oscillatory discretizations.

Three computations live here.

1. Cluster compressions W Pi W for a bounded weight W on the sphere: the
   nonzero spectrum equals that of the finite Gram matrix
   G_jk = int |W|^2 Y_j conj(Y_k) over the cluster basis, an exact
   finite-rank reduction (the only approximation is quadrature of the
   entries).  A second, independent route discretizes the projector kernel
   through the addition theorem sum_l (2l+1)/(4 pi) P_l(cos geodesic) and
   must agree.

2. Weighted Nystrom discretization of oscillatory integral operators with
   kernel exp(i lam psi(x, y)) a(x, y): the matrix
   sqrt(wx_i) K(x_i, y_j) sqrt(wy_j) has singular values approximating the
   operator's, validated by grid doubling.  The two model phases shipped,
   x . (y, y^2/2) and |x - y| with an annular amplitude, satisfy the rank
   and curvature hypotheses of the scaling theory by construction
   (paraboloids have curvature one; spheres around x by Gauss' lemma);
   user-supplied phases are not machine-checked.

3. A trace-ideal comparison bound for beta(sqrt(Delta)) W with beta
   supported on finitely many unit spectral intervals, computed through the
   same Gram mechanism, against C^{1/p} ||W||_p (sum_n sup |beta|^p (1+n))^{1/p}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cluster_density import exponents
from .sphere_basis import SphereGrid, cluster_rank, ylm_matrix


@dataclass(frozen=True)
class SchattenReport:
    """One (lambda, p) measurement against the predicted growth."""

    lam: float
    p: float
    alpha_prime: float
    singular_values: np.ndarray
    schatten_norm: float
    predicted: float
    ratio: float


def schatten_norm(singular_values, alpha: float) -> float:
    """(sum sigma^alpha)^(1/alpha); alpha = inf is the largest value."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    sv = np.asarray(singular_values, dtype=float)
    if np.any(sv < 0):
        raise ValueError("singular values must be nonnegative")
    if sv.size == 0:
        return 0.0
    if math.isinf(alpha):
        return float(sv.max())
    top = sv.max()
    if top == 0.0:
        return 0.0
    # factor out the top value so large alpha cannot overflow
    return float(top * np.sum((sv / top) ** alpha) ** (1.0 / alpha))


def dual_exponent(alpha: float) -> float:
    """Hoelder dual alpha' = alpha/(alpha - 1); inf and 1 swap."""
    if math.isinf(alpha):
        return 1.0
    if alpha <= 1.0:
        return math.inf
    return alpha / (alpha - 1.0)


def make_report(lam: float, p: float, singular_values: np.ndarray,
                fitted_const: float, weight_norm_sq: float = 1.0) -> SchattenReport:
    """Assemble the report row: measured S^{alpha'} norm vs C lam^{2s} ||W||^2."""
    s, alpha = exponents(p)
    ap = dual_exponent(alpha)
    sv = np.sort(np.asarray(singular_values, dtype=float))[::-1]
    norm = schatten_norm(sv, ap)
    predicted = fitted_const * lam ** (2.0 * s) * weight_norm_sq
    return SchattenReport(lam, p, ap, sv, norm, predicted,
                          norm / predicted if predicted else math.inf)


# ---------------------------------------------------------------------------
# Cluster compressions
# ---------------------------------------------------------------------------

def projector_gram(lam: float, w_samples, grid: SphereGrid,
                   w_degree_hint: int = 8) -> np.ndarray:
    """Descending eigenvalues of W Pi W via the cluster Gram matrix.

    ``w_samples(theta, phi)`` must be real and bounded.  The grid has to
    integrate products of two cluster harmonics against |W|^2 exactly
    enough: degree > 2 l_max + w_degree_hint in colatitude and
    n_phi > 2 l_max + w_degree_hint in azimuth, else the reduction is not
    trusted and a GridResolutionError is raised.
    """
    from .sphere_basis import GridResolutionError

    ells, _ = cluster_rank(lam)
    if not ells:
        return np.zeros(0)
    ell_max = max(ells)
    if grid.degree <= 2 * ell_max + w_degree_hint:
        raise GridResolutionError(
            f"grid degree {grid.degree} <= 2*{ell_max} + {w_degree_hint}"
        )
    if grid.n_phi <= 2 * ell_max + w_degree_hint:
        raise GridResolutionError(
            f"n_phi {grid.n_phi} <= 2*{ell_max} + {w_degree_hint}"
        )
    basis, _, weights = ylm_matrix(ells, grid)
    thetas = np.repeat(grid.theta_nodes, grid.n_phi)
    phis = np.tile(grid.phi_nodes, grid.n_theta)
    w_vals = np.asarray(w_samples(thetas, phis), dtype=float)
    gram = basis.conj().T @ (basis * (weights * w_vals**2)[:, None])
    eigs = np.linalg.eigvalsh(gram)[::-1]
    return np.clip(eigs, 0.0, None)


def projector_kernel_eigs(lam: float, w_samples, grid: SphereGrid) -> np.ndarray:
    """Same spectrum through the discretized addition-theorem kernel.

    Builds sqrt(w) W K W sqrt(w) with K(x, y) = sum_l (2l+1)/(4 pi)
    P_l(x . y) over the cluster degrees; the dense mesh route, used as a
    cross-check of the Gram reduction for moderate lam.
    """
    ells, _ = cluster_rank(lam)
    thetas = np.repeat(grid.theta_nodes, grid.n_phi)
    phis = np.tile(grid.phi_nodes, grid.n_theta)
    xyz = np.stack([np.sin(thetas) * np.cos(phis),
                    np.sin(thetas) * np.sin(phis),
                    np.cos(thetas)], axis=1)
    cosd = np.clip(xyz @ xyz.T, -1.0, 1.0)
    coeffs = np.zeros(max(ells) + 1)
    for ell in ells:
        coeffs[ell] = (2 * ell + 1) / (4.0 * math.pi)
    kernel = np.polynomial.legendre.legval(cosd, coeffs)
    w_vals = np.asarray(w_samples(thetas, phis), dtype=float)
    root = np.sqrt(grid.surface_weights()) * w_vals
    mat = root[:, None] * kernel * root[None, :]
    eigs = np.linalg.eigvalsh(mat)[::-1]
    return np.clip(eigs, 0.0, None)


# ---------------------------------------------------------------------------
# Oscillatory integral operators
# ---------------------------------------------------------------------------

def gauss_box(bounds, n_per_axis: int):
    """Tensor Gauss-Legendre rule on a product of intervals.

    bounds is a sequence of (lo, hi) pairs; returns (nodes, weights) with
    nodes of shape (prod n, dim).
    """
    from .sphere_basis import _gauss_rule

    axes, wts = [], []
    for lo, hi in bounds:
        u, w = _gauss_rule(n_per_axis)
        axes.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * u)
        wts.append(0.5 * (hi - lo) * w)
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*wts, indexing="ij")
    weight = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return nodes, weight


def bump(t):
    """C-infinity bump exp(1 - 1/(1 - t^2)) on |t| < 1, zero outside."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def box_bump(nodes: np.ndarray, bounds) -> np.ndarray:
    """Product of per-axis bumps filling the given box."""
    vals = np.ones(nodes.shape[0])
    for axis, (lo, hi) in enumerate(bounds):
        center, halfwidth = 0.5 * (hi + lo), 0.5 * (hi - lo)
        vals *= bump((nodes[:, axis] - center) / halfwidth)
    return vals


def oscillatory_operator(phase, amplitude, lam: float,
                         x_nodes, x_weights, y_nodes, y_weights) -> np.ndarray:
    """Weighted Nystrom matrix sqrt(wx) e^{i lam psi} a sqrt(wy).

    ``phase`` and ``amplitude`` take (x_nodes, y_nodes) and broadcast to a
    (len x, len y) array.  Singular values of the result approximate those
    of the integral operator; see :func:`validate_resolution`.
    """
    psi = phase(x_nodes, y_nodes)
    amp = amplitude(x_nodes, y_nodes)
    mat = np.exp(1j * lam * psi) * amp
    mat *= np.sqrt(x_weights)[:, None]
    mat *= np.sqrt(y_weights)[None, :]
    return mat


def singular_values(matrix: np.ndarray) -> np.ndarray:
    """Descending singular values; routed through the smaller Gram side."""
    n_rows, n_cols = matrix.shape
    if n_rows <= n_cols:
        gram = matrix @ matrix.conj().T
    else:
        gram = matrix.conj().T @ matrix
    eigs = np.linalg.eigvalsh(gram)[::-1]
    return np.sqrt(np.clip(eigs, 0.0, None))


def paraboloid_phase(x_nodes: np.ndarray, y_nodes: np.ndarray) -> np.ndarray:
    """psi(x, y) = x . (y, y^2/2) for x in R^2, y in R (graph of a parabola)."""
    y = y_nodes[:, 0]
    return np.outer(x_nodes[:, 0], y) + np.outer(x_nodes[:, 1], 0.5 * y * y)


def distance_phase(x_nodes: np.ndarray, y_nodes: np.ndarray) -> np.ndarray:
    """psi(x, y) = |x - y| for x, y in R^2."""
    diff = x_nodes[:, None, :] - y_nodes[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


@dataclass(frozen=True)
class OscillatoryModel:
    """A discretized W T_lam ready for singular values at one resolution."""

    lam: float
    matrix: np.ndarray
    n_x_axis: int
    n_y_axis: int


def _axis_count(lam: float, extent: float, grad_bound: float,
                points_per_wavelength: float, floor: int = 12) -> int:
    cycles = lam * grad_bound * extent / (2.0 * math.pi)
    return max(floor, int(math.ceil(points_per_wavelength * cycles)))


X_BOX_PARABOLOID = ((-0.5, 0.5), (-0.5, 0.5))
Y_BOX_PARABOLOID = ((-0.5, 0.5),)


def paraboloid_model(lam: float, points_per_wavelength: float = 10.0,
                     refine: int = 1) -> OscillatoryModel:
    """Cutoff paraboloid-extension operator at the resolution rule.

    Amplitude and cutoff W are smooth box bumps on the supports above;
    gradient bounds |d psi/d y| <= 0.75 and |grad_x psi| <= 0.52 on them fix
    the per-axis node counts at >= points_per_wavelength per oscillation.
    """
    n_x = _axis_count(lam, 1.0, 0.52, points_per_wavelength) * refine
    n_y = _axis_count(lam, 1.0, 0.75, points_per_wavelength) * refine
    x_nodes, x_w = gauss_box(X_BOX_PARABOLOID, n_x)
    y_nodes, y_w = gauss_box(Y_BOX_PARABOLOID, n_y)

    def amplitude(xn, yn):
        return np.outer(box_bump(xn, X_BOX_PARABOLOID),
                        box_bump(yn, Y_BOX_PARABOLOID))

    mat = oscillatory_operator(paraboloid_phase, amplitude, lam,
                               x_nodes, x_w, y_nodes, y_w)
    return OscillatoryModel(lam, mat, n_x, n_y)


X_BOX_DISTANCE = ((-0.3, 0.3), (-0.3, 0.3))
Y_BOX_DISTANCE = ((-0.9, 0.9), (-0.9, 0.9))
DISTANCE_RING = (0.2, 0.8)


def distance_model(lam: float, points_per_wavelength: float = 10.0,
                   refine: int = 1) -> OscillatoryModel:
    """Cutoff distance-phase operator with annular amplitude support.

    The amplitude vanishes unless d(x, y) sits inside DISTANCE_RING, the
    annulus hypothesis of the distance-phase scaling; |grad psi| = 1 on
    both sides fixes the resolution rule.
    """
    n_x = _axis_count(lam, 0.6, 1.0, points_per_wavelength) * refine
    n_y = _axis_count(lam, 1.8, 1.0, points_per_wavelength) * refine
    x_nodes, x_w = gauss_box(X_BOX_DISTANCE, n_x)
    y_nodes, y_w = gauss_box(Y_BOX_DISTANCE, n_y)
    ring_lo, ring_hi = DISTANCE_RING
    center, halfwidth = 0.5 * (ring_lo + ring_hi), 0.5 * (ring_hi - ring_lo)

    def amplitude(xn, yn):
        base = np.outer(box_bump(xn, X_BOX_DISTANCE),
                        box_bump(yn, Y_BOX_DISTANCE))
        dist = distance_phase(xn, yn)
        return base * bump((dist - center) / halfwidth)

    mat = oscillatory_operator(distance_phase, amplitude, lam,
                               x_nodes, x_w, y_nodes, y_w)
    return OscillatoryModel(lam, mat, n_x, n_y)


def validate_resolution(builder, lam: float, top_k: int = 20,
                        rel_tol: float = 1e-4, **kwargs) -> tuple[bool, float]:
    """Doubling check: top singular values must move < rel_tol relative.

    Returns (converged, worst_drift); a False flag means the base
    resolution under-resolves the oscillation and its spectra are not to
    be trusted.
    """
    base = singular_values(builder(lam, **kwargs).matrix)
    fine = singular_values(builder(lam, refine=2, **kwargs).matrix)
    k = min(top_k, base.size, fine.size)
    scale = max(fine[0], 1e-300)
    drift = float(np.max(np.abs(base[:k] - fine[:k]) / scale))
    return drift < rel_tol, drift


# ---------------------------------------------------------------------------
# Trace-ideal comparison bound
# ---------------------------------------------------------------------------

SPHERE_WEYL_CONST = 1.0 / (2.0 * math.pi)  # sup_x Pi_n(x,x) <= (1+n) * this


def sphere_lp_norm(w_samples, grid: SphereGrid, p: float) -> float:
    """L^p(S^2) norm of a weight given as a callable on (theta, phi)."""
    thetas = np.repeat(grid.theta_nodes, grid.n_phi)
    phis = np.tile(grid.phi_nodes, grid.n_theta)
    vals = np.abs(np.asarray(w_samples(thetas, phis), dtype=float))
    if math.isinf(p):
        return float(vals.max())
    return float(np.dot(grid.surface_weights(), vals**p) ** (1.0 / p))


def kss_bound(beta, w_samples, p: float, grid: SphereGrid, n_max: int,
              fitted_const: float = SPHERE_WEYL_CONST) -> tuple[float, float]:
    """Both sides of the cluster comparison bound for beta(sqrt(Delta)) W.

    lhs: Schatten p-norm computed exactly on the finite-rank range of
    beta(sqrt(Delta)) restricted to degrees l <= n_max, via the Gram matrix
    of the functions beta_j W Y_j.  rhs: C^{1/p} ||W||_p
    (sum_n sup_{[n,n+1]} |beta|^p (1+n))^{1/p} with the sup sampled on 64
    points per unit interval.  Requires lhs <= rhs for the calibrated C.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    ells = [ell for ell in range(0, n_max + 1)
            if beta(math.sqrt(ell * (ell + 1.0))) != 0.0]
    if not ells:
        return 0.0, 0.0
    basis, labels, weights = ylm_matrix(ells, grid)
    betas = np.array([beta(math.sqrt(ell * (ell + 1.0))) for ell, _ in labels])
    thetas = np.repeat(grid.theta_nodes, grid.n_phi)
    phis = np.tile(grid.phi_nodes, grid.n_theta)
    w_vals = np.asarray(w_samples(thetas, phis), dtype=float)
    gram = basis.conj().T @ (basis * (weights * w_vals**2)[:, None])
    gram *= np.outer(betas, betas)
    eigs = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    if math.isinf(p):
        lhs = float(math.sqrt(eigs.max()))
    else:
        lhs = float(np.sum(eigs ** (p / 2.0)) ** (1.0 / p))

    tail = 0.0
    for n in range(0, n_max + 1):
        samples = np.linspace(n, n + 1, 64, endpoint=False)
        sup_beta = max(abs(beta(t)) for t in samples)
        if math.isinf(p):
            tail = max(tail, sup_beta)
        else:
            tail += sup_beta**p * (1.0 + n)
    w_norm = sphere_lp_norm(w_samples, grid, p)
    if math.isinf(p):
        rhs = w_norm * tail
    else:
        rhs = fitted_const ** (1.0 / p) * w_norm * tail ** (1.0 / p)
    return lhs, rhs
