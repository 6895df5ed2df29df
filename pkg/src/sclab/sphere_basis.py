"""Spherical-harmonic radial factors, special values, and quadrature on S^2.

The complex spherical harmonics factor as

    Y_l^m(theta, phi) = exp(i m phi) g_l^m(theta),

where g_l^m is the fully normalized associated Legendre function of
cos(theta), Condon-Shortley phase included:

    g_l^m(theta) = sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!) P_l^m(cos theta),

so that int |Y_l^m|^2 domega = 1 and int_0^pi |g_l^m|^2 sin(theta) dtheta
= 1/(2 pi).  The equatorial form

    v_l^m(theta) = sqrt(cos theta) * g_l^m(pi/2 - theta),   |theta| < pi/2,

satisfies the normal-form equation -v'' + Q v = 0 consumed by the WKB
engine, with int_{-pi/2}^{pi/2} |v|^2 dtheta = 1/(2 pi).

All evaluation goes through the fully normalized three-term recurrence
upward in degree at fixed order.  Normalized values stay O(sqrt(l)), so
there is no intermediate overflow for l <= 1e4 (seeds may underflow to
zero near the poles at high order, where the true values are far below
the double range; those zeros are harmless at the tolerances used here).
Closed-form values at the equator are evaluated through log-gamma.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, roots_legendre

FOUR_PI = 4.0 * math.pi
_LN2 = math.log(2.0)


class GridResolutionError(ValueError):
    """A quadrature grid is too coarse for the requested computation."""


# ---------------------------------------------------------------------------
# Fully normalized associated Legendre recurrences
# ---------------------------------------------------------------------------

def _seed_values(m: int, x: np.ndarray) -> np.ndarray:
    """g-value of degree m at order m on nodes x, via logs (no overflow)."""
    if m == 0:
        return np.full_like(x, 1.0 / math.sqrt(FOUR_PI))
    log_mag = (
        0.5 * (math.log(2 * m + 1) - math.log(FOUR_PI) + gammaln(2 * m + 1))
        - gammaln(m + 1)
        - m * _LN2
        + 0.5 * m * np.log1p(-x * x)
    )
    sign = -1.0 if m % 2 else 1.0
    with np.errstate(under="ignore"):
        return sign * np.exp(log_mag)


def legendre_degree_table(m: int, ell_max: int, x) -> np.ndarray:
    """g-values for all degrees m..ell_max at fixed order m.

    Parameters
    ----------
    m : order, >= 0
    ell_max : largest degree, >= m
    x : nodes in the open interval (-1, 1); typically cos(theta)

    Returns array of shape (ell_max - m + 1, len(x)); row k holds degree
    m + k.
    """
    if m < 0 or ell_max < m:
        raise ValueError(f"need 0 <= m <= ell_max, got m={m}, ell_max={ell_max}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) >= 1.0):
        raise ValueError("nodes must lie strictly inside (-1, 1)")
    out = np.empty((ell_max - m + 1, x.size))
    out[0] = _seed_values(m, x)
    if ell_max > m:
        out[1] = math.sqrt(2 * m + 3) * x * out[0]
    for ell in range(m + 2, ell_max + 1):
        a = math.sqrt((4 * ell * ell - 1.0) / (ell * ell - m * m))
        b = math.sqrt(((ell - 1.0) ** 2 - m * m) / (4.0 * (ell - 1.0) ** 2 - 1.0))
        k = ell - m
        out[k] = a * (x * out[k - 1] - b * out[k - 2])
    return out


def legendre_row(m: int, ell: int, x) -> np.ndarray:
    """g-values of a single (ell, m) on nodes x, O(1) memory in degree."""
    if not 0 <= m <= ell:
        raise ValueError(f"need 0 <= m <= ell, got m={m}, ell={ell}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) >= 1.0):
        raise ValueError("nodes must lie strictly inside (-1, 1)")
    prev = _seed_values(m, x)
    if ell == m:
        return prev
    cur = math.sqrt(2 * m + 3) * x * prev
    for deg in range(m + 2, ell + 1):
        a = math.sqrt((4 * deg * deg - 1.0) / (deg * deg - m * m))
        b = math.sqrt(((deg - 1.0) ** 2 - m * m) / (4.0 * (deg - 1.0) ** 2 - 1.0))
        prev, cur = cur, a * (x * cur - b * prev)
    return cur


# ---------------------------------------------------------------------------
# Radial tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialTable:
    """Sampled v- and g-values for a band of orders at fixed degree.

    ``thetas`` live in the equatorial chart (-pi/2, pi/2); row i of
    ``values_v`` is v_ell^m(theta) for m = m_lo + i, and ``values_g`` holds
    the matching colatitude values g_ell^m(pi/2 - theta).
    """

    ell: int
    m_lo: int
    m_hi: int
    thetas: np.ndarray
    values_v: np.ndarray
    values_g: np.ndarray

    @property
    def orders(self) -> np.ndarray:
        return np.arange(self.m_lo, self.m_hi + 1)


def legendre_band(ell: int, m_lo: int, m_hi: int, thetas) -> RadialTable:
    """Evaluate v_ell^m and g_ell^m for all orders m_lo..m_hi.

    thetas must avoid +-pi/2 exactly: cos(theta) = 0 makes the normal-form
    potential singular downstream, and the sqrt(cos) factor degenerate.
    """
    if not 0 <= m_lo <= m_hi <= ell:
        raise ValueError(
            f"need 0 <= m_lo <= m_hi <= ell, got ({m_lo}, {m_hi}) at ell={ell}"
        )
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if np.any(np.abs(thetas) >= math.pi / 2):
        raise ValueError("band nodes must satisfy |theta| < pi/2")
    x = np.sin(thetas)
    root_cos = np.sqrt(np.cos(thetas))
    values_g = np.empty((m_hi - m_lo + 1, thetas.size))
    for i, m in enumerate(range(m_lo, m_hi + 1)):
        values_g[i] = legendre_row(m, ell, x)
    values_v = root_cos * values_g
    return RadialTable(ell, m_lo, m_hi, thetas, values_v, values_g)


def radial_table_to_csv(table: RadialTable, path) -> None:
    """Debug dump, one row per (order, node): columns m, theta, v, g."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "theta", "v", "g"])
        for i, m in enumerate(table.orders):
            for j, theta in enumerate(table.thetas):
                writer.writerow(
                    [int(m), repr(float(theta)),
                     repr(float(table.values_v[i, j])),
                     repr(float(table.values_g[i, j]))]
                )


# ---------------------------------------------------------------------------
# Closed forms at the equator
# ---------------------------------------------------------------------------

def legendre_at_zero(ell: int, m: int) -> tuple[float, float]:
    """P_ell^m(0) and (P_ell^m)'(0), through log-gamma.

    Exactly one of the two is zero, by parity of ell + m.  The survivor is
    assembled in log space, so there is no intermediate overflow; the final
    value itself can exceed the double range for large ell + m (use
    :func:`normalized_at_zero` for a bounded variant).
    """
    if not 0 <= m <= ell:
        raise ValueError(f"need 0 <= m <= ell, got m={m}, ell={ell}")
    if (ell + m) % 2 == 0:
        log_mag = (
            m * _LN2 - 0.5 * math.log(math.pi)
            + gammaln((ell + m + 1) / 2.0) - gammaln((ell - m + 2) / 2.0)
        )
        sign = -1.0 if ((ell + m) // 2) % 2 else 1.0
        with np.errstate(over="ignore"):
            return sign * float(np.exp(log_mag)), 0.0
    log_mag = (
        (m + 1) * _LN2 - 0.5 * math.log(math.pi)
        + gammaln((ell + m + 2) / 2.0) - gammaln((ell - m + 1) / 2.0)
    )
    sign = -1.0 if ((ell + m - 1) // 2) % 2 else 1.0
    with np.errstate(over="ignore"):
        return 0.0, sign * float(np.exp(log_mag))


def _log_norm_constant(ell, m):
    """log of sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!), vectorized."""
    ell = np.asarray(ell, dtype=float)
    m = np.asarray(m, dtype=float)
    return 0.5 * (
        np.log(2 * ell + 1) - math.log(FOUR_PI)
        + gammaln(ell - m + 1) - gammaln(ell + m + 1)
    )


def normalized_at_zero(ell, m) -> tuple[np.ndarray, np.ndarray]:
    """v_ell^m(0) and (v_ell^m)'(0), bounded for all desk-scale (ell, m).

    Vectorized over (ell, m).  The normalization constant is folded into
    the closed forms inside the logarithm, so both outputs stay O(l^{1/4})
    even where P_ell^m(0) itself overflows.
    """
    ell_arr = np.atleast_1d(np.asarray(ell, dtype=int))
    m_arr = np.atleast_1d(np.asarray(m, dtype=int))
    ell_b, m_b = np.broadcast_arrays(ell_arr, m_arr)
    if np.any(m_b < 0) or np.any(m_b > ell_b):
        raise ValueError("need 0 <= m <= ell")
    log_n = _log_norm_constant(ell_b, m_b)
    even = (ell_b + m_b) % 2 == 0
    value = np.zeros(ell_b.shape)
    deriv = np.zeros(ell_b.shape)

    le, me = ell_b[even].astype(float), m_b[even].astype(float)
    log_mag = (
        me * _LN2 - 0.5 * math.log(math.pi)
        + gammaln((le + me + 1) / 2.0) - gammaln((le - me + 2) / 2.0)
    )
    sign = np.where((((ell_b[even] + m_b[even]) // 2) % 2) == 1, -1.0, 1.0)
    value[even] = sign * np.exp(log_mag + log_n[even])

    lo, mo = ell_b[~even].astype(float), m_b[~even].astype(float)
    log_mag = (
        (mo + 1) * _LN2 - 0.5 * math.log(math.pi)
        + gammaln((lo + mo + 2) / 2.0) - gammaln((lo - mo + 1) / 2.0)
    )
    sign = np.where((((ell_b[~even] + m_b[~even] - 1) // 2) % 2) == 1, -1.0, 1.0)
    deriv[~even] = sign * np.exp(log_mag + log_n[~even])

    if np.isscalar(ell) and np.isscalar(m):
        return float(value.reshape(-1)[0]), float(deriv.reshape(-1)[0])
    return value, deriv


# ---------------------------------------------------------------------------
# Quadrature grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereGrid:
    """Gauss colatitude rule plus equispaced azimuth.

    ``theta_weights`` absorb the sin(theta) area factor: sum_i w_i f(theta_i)
    approximates int_0^pi f sin(theta) dtheta, exactly so whenever f is a
    polynomial of degree <= ``degree`` in u = cos(theta).  The azimuthal
    trapezoid rule is exact on modes e^{ik phi} with |k| < n_phi.
    """

    theta_nodes: np.ndarray
    theta_weights: np.ndarray
    n_phi: int
    degree: int

    @property
    def n_theta(self) -> int:
        return self.theta_nodes.size

    @property
    def phi_nodes(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * math.pi, self.n_phi, endpoint=False)

    @property
    def phi_weight(self) -> float:
        return 2.0 * math.pi / self.n_phi

    def surface_weights(self) -> np.ndarray:
        """Flattened weights for the (theta, phi) product mesh, dOmega."""
        return np.repeat(self.theta_weights, self.n_phi) * self.phi_weight


@lru_cache(maxsize=128)
def _gauss_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def build_grid(n_theta: int, n_phi: int = 1) -> SphereGrid:
    """Gauss nodes in u = cos(theta), mapped to ascending theta in (0, pi).

    n_theta = 1 is rejected: a single interior node cannot certify any of
    the exactness properties the grid advertises.
    """
    if n_theta < 2:
        raise ValueError("n_theta must be >= 2")
    if n_phi < 1:
        raise ValueError("n_phi must be >= 1")
    u, w = _gauss_rule(n_theta)
    theta = np.arccos(u)[::-1].copy()
    weights = w[::-1].copy()
    return SphereGrid(theta, weights, n_phi, 2 * n_theta - 1)


def ylm_matrix(ells, grid: SphereGrid):
    """Columns Y_l^m on the flattened (theta, phi) mesh for all given degrees.

    Returns (matrix, labels, weights): matrix has shape
    (n_theta * n_phi, sum(2l+1)), labels is the list of (ell, m) pairs in
    column order, and weights are the matching surface weights.
    """
    ells = [int(e) for e in ells]
    x = np.cos(grid.theta_nodes)
    phis = grid.phi_nodes
    n_nodes = grid.n_theta * grid.n_phi
    dim = sum(2 * e + 1 for e in ells)
    matrix = np.empty((n_nodes, dim), dtype=complex)
    labels = []
    col = 0
    for ell in ells:
        for m in range(-ell, ell + 1):
            g = legendre_row(abs(m), ell, x)
            if m < 0 and m % 2 != 0:
                g = -g
            phase = np.exp(1j * m * phis)
            matrix[:, col] = np.outer(g, phase).ravel()
            labels.append((ell, m))
            col += 1
    return matrix, labels, grid.surface_weights()


# ---------------------------------------------------------------------------
# Spectral counting
# ---------------------------------------------------------------------------

def weyl_count(lam: float) -> int:
    """Number of spherical-harmonic eigenvalues l(l+1) strictly below lam^2.

    Equals (L+1)^2 with L the largest admissible degree; grows like lam^2
    with unit leading coefficient.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    lam2 = lam * lam
    L = int(math.floor((-1.0 + math.sqrt(1.0 + 4.0 * lam2)) / 2.0))
    while L >= 0 and L * (L + 1) >= lam2:
        L -= 1
    while (L + 1) * (L + 2) < lam2:
        L += 1
    return (L + 1) ** 2


def cluster_rank(lam: float) -> tuple[list[int], int]:
    """Degrees with lam^2 <= l(l+1) < (lam+1)^2, and their total multiplicity."""
    if lam < 1:
        raise ValueError("lam must be >= 1")
    lo, hi = lam * lam, (lam + 1.0) ** 2
    first = max(0, int(math.floor(lam)) - 2)
    last = int(math.ceil(lam)) + 2
    ells = [ell for ell in range(first, last + 1) if lo <= ell * (ell + 1) < hi]
    return ells, sum(2 * ell + 1 for ell in ells)
