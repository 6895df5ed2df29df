"""Oscillatory-regime approximants for the equatorial radial equation.

The equatorial profiles v of :mod:`sclab.sphere_basis` solve -v'' + Q v = 0
with the potential

    Q_{l,m}(theta) = (m^2 - 1/4)/cos^2(theta) - 1/4 - l(l+1),

negative throughout the windows treated here.  In that regime the
approximants

    y = cos(S)/|Q|^{1/4}   (l+m even),      y = sin(S)/|Q|^{1/4}  (l+m odd),
    S(theta) = int_0^theta sqrt(|Q(t)|) dt,

track v up to the matching constant c fixed at theta = 0 by the parity
data v(0) or v'(0).  The error functional

    E(theta) = int_0^{|theta|} |Q'' - 5 Q'^2 / (4Q)| / (8 |Q|^{3/2}) dt

yields the rigorous pointwise envelope |v - c y| <= 2(e^{2E}-1)|c||Q|^{-1/4}.

Two window geometries are used, selected by ``case_tag``:

    "2"   : orders just below l,   |theta| <  eta2 sqrt(r/l)   (equatorial)
    "inf" : orders of size r,      |theta| <  pi/2 - eta1 r/l  (off-polar)

with band radius r (default ceil(sqrt(l))) and window parameters eta2 < sqrt2,
eta1 > 2.  The defaults eta2 = 0.5, eta1 = 8 pass all desk-scale sign and
monotonicity checks; both are configurable everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sphere_basis import normalized_at_zero

DEFAULT_ETA1 = 8.0
DEFAULT_ETA2 = 0.5


class TurningPointError(RuntimeError):
    """The potential changes sign inside the integration range."""


def normalize_case(case_tag) -> str:
    """Map 2 / "2" / inf / "inf" to the canonical string tag."""
    if case_tag in (2, "2"):
        return "2"
    if case_tag in (math.inf, "inf", "oo"):
        return "inf"
    raise ValueError(f"unknown case tag {case_tag!r}; expected 2 or inf")


def band_radius(ell: int, zeta: float = 0.5) -> int:
    """Default window width r = ceil(l^zeta)."""
    if not 0.0 < zeta < 1.0:
        raise ValueError("zeta must lie in (0, 1)")
    return int(math.ceil(ell**zeta))


def case_window(ell: int, r: int, case_tag) -> np.ndarray:
    """Orders in the saturating window: (l-2r, l-r] for "2", [r, 2r) for "inf"."""
    if not 1 <= r <= ell // 2:
        raise ValueError(f"need 1 <= r <= ell/2, got r={r} at ell={ell}")
    if normalize_case(case_tag) == "2":
        return np.arange(ell - 2 * r + 1, ell - r + 1)
    return np.arange(r, 2 * r)


def case_interval(ell: int, r: int, case_tag, eta1: float = DEFAULT_ETA1,
                  eta2: float = DEFAULT_ETA2) -> tuple[float, float]:
    """Symmetric theta-interval on which the window's WKB data is built."""
    if normalize_case(case_tag) == "2":
        half = eta2 * math.sqrt(r / ell)
    else:
        half = math.pi / 2 - eta1 * r / ell
    if half <= 0:
        raise ValueError("empty interval: eta1 * r / ell >= pi/2")
    return (-half, half)


# ---------------------------------------------------------------------------
# Potential and derivatives
# ---------------------------------------------------------------------------

def q_potential(ell: int, m: int, theta):
    """(m^2 - 1/4)/cos^2(theta) - 1/4 - l(l+1); requires |theta| < pi/2."""
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta_arr) >= math.pi / 2):
        raise ValueError("q_potential requires |theta| < pi/2")
    c2 = np.cos(theta_arr) ** 2
    out = (m * m - 0.25) / c2 - 0.25 - ell * (ell + 1.0)
    return float(out) if np.isscalar(theta) else out


def q_derivatives(ell: int, m: int, theta):
    """Closed-form Q' and Q'' (the l-term drops out)."""
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta_arr) >= math.pi / 2):
        raise ValueError("q_derivatives requires |theta| < pi/2")
    c = np.cos(theta_arr)
    s = np.sin(theta_arr)
    coef = m * m - 0.25
    q1 = coef * 2.0 * s / c**3
    q2 = coef * (2.0 / c**2 + 6.0 * s**2 / c**4)
    if np.isscalar(theta):
        return float(q1), float(q2)
    return q1, q2


# ---------------------------------------------------------------------------
# Quadrature of the action and of the error functional
# ---------------------------------------------------------------------------

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _panel_nodes(a: float, b: float, n_panels: int):
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    nodes = (mid[:, None] + half * _GAUSS_NODES[None, :]).ravel()
    weights = np.tile(half * _GAUSS_WEIGHTS, n_panels)
    return nodes, weights


def _adaptive_integral(f, a: float, b: float, rtol: float) -> float:
    """Composite 16-point Gauss with panel doubling to relative agreement."""
    if a == b:
        return 0.0
    prev = None
    n_panels = 1
    for _ in range(16):
        nodes, weights = _panel_nodes(a, b, n_panels)
        val = float(np.dot(f(nodes), weights))
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val
        prev = val
        n_panels *= 2
    raise RuntimeError(f"adaptive quadrature failed to reach rtol={rtol}")


def action_integral(ell: int, m: int, theta: float, rtol: float = 1e-10) -> float:
    """Accumulated phase S(theta) = int_0^theta sqrt(|Q|); odd in theta.

    Raises :class:`TurningPointError` if Q reaches 0 on the range, which
    means the requested theta has left the oscillatory regime.
    """
    theta = float(theta)
    if theta == 0.0:
        return 0.0
    sign = 1.0 if theta > 0 else -1.0

    def integrand(t):
        q = q_potential(ell, m, t)
        if np.any(q >= 0):
            raise TurningPointError(
                f"Q_(l={ell}, m={m}) is nonnegative inside [0, {theta}]"
            )
        return np.sqrt(-q)

    return sign * _adaptive_integral(integrand, 0.0, abs(theta), rtol)


def action_values(ell: int, ms, theta: float, rtol: float = 1e-10) -> np.ndarray:
    """S_{l,m}(theta) for a whole vector of orders at one angle."""
    ms = np.asarray(ms, dtype=int)
    theta = float(theta)
    if theta == 0.0:
        return np.zeros(ms.size)
    sign = 1.0 if theta > 0 else -1.0
    a, b = 0.0, abs(theta)
    prev = None
    n_panels = 1
    for _ in range(16):
        nodes, weights = _panel_nodes(a, b, n_panels)
        c2 = np.cos(nodes) ** 2
        q = (ms[:, None] ** 2 - 0.25) / c2[None, :] - 0.25 - ell * (ell + 1.0)
        if np.any(q >= 0):
            raise TurningPointError(f"turning point inside [0, {theta}] at ell={ell}")
        vals = np.sqrt(-q) @ weights
        if prev is not None and np.all(
            np.abs(vals - prev) <= rtol * np.maximum(np.abs(vals), 1e-300)
        ):
            return sign * vals
        prev = vals
        n_panels *= 2
    raise RuntimeError("adaptive quadrature failed for action_values")


def wkb_error_functional(ell: int, m: int, theta: float, rtol: float = 1e-10) -> float:
    """Fedoryuk-form error integral E(theta); even, nonnegative, E(0) = 0."""
    theta = float(theta)
    if theta == 0.0:
        return 0.0

    def integrand(t):
        q = q_potential(ell, m, t)
        if np.any(q >= 0):
            raise TurningPointError(
                f"Q_(l={ell}, m={m}) is nonnegative inside [0, {abs(theta)}]"
            )
        q1, q2 = q_derivatives(ell, m, t)
        return np.abs(q2 - 1.25 * q1 * q1 / q) / (8.0 * np.abs(q) ** 1.5)

    return _adaptive_integral(integrand, 0.0, abs(theta), rtol)


def _cumulative(f, positive_thetas: np.ndarray) -> np.ndarray:
    """Cumulative integral of f from 0 along an ascending grid starting at 0."""
    out = np.zeros(positive_thetas.size)
    total = 0.0
    for i in range(1, positive_thetas.size):
        a, b = positive_thetas[i - 1], positive_thetas[i]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes = mid + half * _GAUSS_NODES
        total += half * float(np.dot(f(nodes), _GAUSS_WEIGHTS))
        out[i] = total
    return out


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WkbProfile:
    """All WKB data of one (l, m) sampled on its case interval."""

    ell: int
    m: int
    case_tag: str
    r: int
    eta1: float
    eta2: float
    interval: tuple[float, float]
    thetas: np.ndarray
    q: np.ndarray
    action: np.ndarray
    y: np.ndarray
    c: float
    err: np.ndarray

    @property
    def parity_even(self) -> bool:
        return (self.ell + self.m) % 2 == 0


def wkb_approximant(ell: int, m: int, case_tag, r: int | None = None,
                    eta1: float = DEFAULT_ETA1, eta2: float = DEFAULT_ETA2,
                    n_theta: int = 201) -> WkbProfile:
    """Sample Q, S, y, E on the case interval and match c at theta = 0.

    The matching uses v(0) for even l+m and v'(0) for odd l+m; the
    denominators |Q(0)|^{1/4} cannot vanish in the oscillatory regime,
    which is asserted.
    """
    case = normalize_case(case_tag)
    if r is None:
        r = band_radius(ell)
    interval = case_interval(ell, r, case, eta1, eta2)
    if n_theta % 2 == 0:
        n_theta += 1
    thetas = np.linspace(interval[0], interval[1], n_theta)
    q = q_potential(ell, m, thetas)
    if np.any(q >= 0):
        raise TurningPointError(
            f"Q_(l={ell}, m={m}) not negative on the case-{case} interval"
        )
    half = n_theta // 2
    pos = thetas[half:]

    s_pos = _cumulative(lambda t: np.sqrt(-q_potential(ell, m, t)), pos)
    action = np.concatenate([-s_pos[:0:-1], s_pos])

    def err_integrand(t):
        qq = q_potential(ell, m, t)
        q1, q2 = q_derivatives(ell, m, t)
        return np.abs(q2 - 1.25 * q1 * q1 / qq) / (8.0 * np.abs(qq) ** 1.5)

    e_pos = _cumulative(err_integrand, pos)
    err = np.concatenate([e_pos[:0:-1], e_pos])

    amp = np.abs(q) ** -0.25
    parity_even = (ell + m) % 2 == 0
    y = amp * (np.cos(action) if parity_even else np.sin(action))

    q0 = -q_potential(ell, m, 0.0)
    assert q0 > 0.0, "matching point left the oscillatory regime"
    v0, dv0 = normalized_at_zero(ell, m)
    c = v0 * q0**0.25 if parity_even else dv0 / q0**0.25
    return WkbProfile(ell, m, case, r, eta1, eta2, interval,
                      thetas, q, action, y, float(c), err)


def envelope(profile: WkbProfile) -> np.ndarray:
    """Rigorous pointwise bound on |v - c y| along the profile."""
    return 2.0 * np.expm1(2.0 * profile.err) * abs(profile.c) * np.abs(profile.q) ** -0.25


def wkb_defect(ell: int, m: int, theta, action=None) -> np.ndarray:
    """Closed-form residual -y'' + Q y of the approximant.

    Equals -A'' cos(S) (even parity) or -A'' sin(S) with A = |Q|^{-1/4};
    the S'-terms cancel identically, which is the construction.  ``action``
    may be supplied to reuse precomputed phases.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    q = q_potential(ell, m, theta)
    if np.any(q >= 0):
        raise TurningPointError("defect requested outside the oscillatory regime")
    q1, q2 = q_derivatives(ell, m, theta)
    absq = -q
    # with |Q|' = -Q' and |Q|'' = -Q'', A = |Q|^(-1/4) has
    a2 = (5.0 / 16.0) * absq**-2.25 * q1**2 + 0.25 * absq**-1.25 * q2
    if action is None:
        action = np.array([action_integral(ell, m, t) for t in theta])
    osc = np.cos(action) if (ell + m) % 2 == 0 else np.sin(action)
    return -a2 * osc


def window_q_bounds(ell: int, r: int, case_tag, eta1: float = DEFAULT_ETA1,
                    eta2: float = DEFAULT_ETA2, n_theta: int = 129):
    """Fitted constants (c1, c2) with -c1 <= Q/scale <= -c2 over the window.

    scale is l*r in case "2" and l^2 in case "inf".  Both constants are
    positive once l is past the sign threshold; experiments record them.
    """
    case = normalize_case(case_tag)
    lo, hi = case_interval(ell, r, case, eta1, eta2)
    thetas = np.linspace(lo, hi, n_theta)
    scale = ell * r if case == "2" else ell * ell
    ratios = []
    for m in case_window(ell, r, case):
        ratios.append(q_potential(ell, int(m), thetas) / scale)
    ratios = np.concatenate(ratios)
    return float(-ratios.min()), float(-ratios.max())
