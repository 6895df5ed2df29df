"""Configuration-driven experiment sweeps with CSV/JSON reporting.

Each experiment is a named runner taking an :class:`ExperimentConfig` and
returning pass/fail checks plus CSV rows.  Config files are flat key-value
text (``key = value``; '#' comments), ranges are comma lists, and a fixed
seed makes every run byte-reproducible.  All asymptotic claims are tested
as log-log slopes or as boundedness of compensated ratios; constants are
fitted, never asserted.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, fields

import numpy as np

from . import cluster_density as cd
from . import expsum as es
from . import schatten_lab as sl
from . import sphere_basis as sb
from . import wkb_engine as wkb

SCHEMA_VERSION = 1

EXPERIMENT_NAMES = (
    "sogge_single", "cluster_lower", "cluster_upper", "wkb_accuracy",
    "phase_sums", "schatten_dual", "oscillatory_scaling", "kss_compare",
    "heuristic_compare", "weyl",
)


class ConfigError(ValueError):
    """Malformed experiment configuration, with a line/field diagnostic."""


@dataclass
class ExperimentConfig:
    experiment: str
    ell_range: list | None = None
    lambda_range: list | None = None
    zeta: float = 0.5
    eta1: float = wkb.DEFAULT_ETA1
    eta2: float = wkb.DEFAULT_ETA2
    p_list: list | None = None
    n_theta: int | None = None
    n_phi: int | None = None
    seed: int = 0
    output: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENT_NAMES:
            raise ConfigError(
                f"field 'experiment': unknown experiment {self.experiment!r}"
            )
        if not 0.0 < self.zeta < 1.0:
            raise ConfigError(f"field 'zeta': must lie in (0, 1), got {self.zeta}")
        for name in ("ell_range", "lambda_range", "p_list"):
            value = getattr(self, name)
            if value is not None and len(value) == 0:
                raise ConfigError(f"field '{name}': must be nonempty when given")
        return self


_INT_FIELDS = {"seed", "n_theta", "n_phi"}
_FLOAT_FIELDS = {"zeta", "eta1", "eta2"}
_LIST_FIELDS = {"ell_range", "lambda_range", "p_list"}
_STR_FIELDS = {"experiment", "output"}


def _parse_number(token: str):
    token = token.strip()
    if token in ("inf", "Inf", "INF"):
        return math.inf
    value = float(token)
    return int(value) if value == int(value) and "e" not in token.lower() \
        and "." not in token else value


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat key-value config text; unknown keys fail with line numbers."""
    known = {f.name for f in fields(ExperimentConfig)}
    data = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _STR_FIELDS:
                data[key] = value
            elif key in _INT_FIELDS:
                data[key] = int(value)
            elif key in _FLOAT_FIELDS:
                data[key] = float(value)
            elif key in _LIST_FIELDS:
                data[key] = [_parse_number(tok) for tok in value.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: field {key!r}: {exc}") from None
    if "experiment" not in data:
        raise ConfigError("missing required key 'experiment'")
    return ExperimentConfig(**data).validate()


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# Checks and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    """One acceptance line: measured vs predicted at a tolerance.

    For slope-style checks ``passed`` means |measured - predicted| <= tol;
    for bound-style checks predicted is the cap and tol repeats it, with
    measured <= tol required.  ``passed`` is computed by the producer.
    """

    name: str
    predicted: float
    measured: float
    tol: float
    passed: bool


def slope_check(name: str, predicted: float, measured: float, tol: float) -> Check:
    predicted, measured, tol = float(predicted), float(measured), float(tol)
    return Check(name, predicted, measured, tol,
                 bool(abs(measured - predicted) <= tol))


def bound_check(name: str, measured: float, cap: float) -> Check:
    measured, cap = float(measured), float(cap)
    return Check(name, cap, measured, cap, bool(measured <= cap))


def flag_check(name: str, ok: bool) -> Check:
    return Check(name, 1.0, 1.0 if ok else 0.0, 0.0, bool(ok))


@dataclass
class AcceptanceReport:
    experiment: str
    seed: int
    checks: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "seed": self.seed,
            "checks": [
                {"check": c.name, "predicted": c.predicted, "measured": c.measured,
                 "tol": c.tol, "pass": c.passed}
                for c in self.checks
            ],
        }


def format_rows(header, rows) -> str:
    """RFC-4180 CSV text for the given rows (floats via shortest repr)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([
            repr(float(v)) if isinstance(v, (float, np.floating)) else v
            for v in row
        ])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Slope fitting
# ---------------------------------------------------------------------------

def fit_slope(points) -> tuple[float, float]:
    """Least-squares slope of log y against log x, with its standard error.

    Requires at least four points with strictly increasing positive x and
    positive y; fewer points cannot support the error estimate.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 4:
        raise ValueError("need at least 4 points for a slope fit")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs positive coordinates")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("x must be strictly increasing")
    lx, ly = np.log(xs), np.log(ys)
    lx_c = lx - lx.mean()
    slope = float(np.dot(lx_c, ly) / np.dot(lx_c, lx_c))
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (slope * lx + intercept)
    dof = len(pts) - 2
    stderr = float(np.sqrt(np.dot(resid, resid) / dof / np.dot(lx_c, lx_c)))
    return slope, stderr


def _int_geomspace(lo: float, hi: float, n: int) -> list[int]:
    vals = sorted({int(round(v)) for v in np.geomspace(lo, hi, n)})
    return vals


# ---------------------------------------------------------------------------
# Shared fixtures
# ---------------------------------------------------------------------------

def reference_weight(theta, phi):
    """The fixed smooth weight W used by the projector experiments."""
    return np.exp(-2.0 * (np.cos(theta) - 0.3) ** 2) * (
        1.0 + 0.3 * np.sin(theta) * np.cos(phi)
    )


def _cluster_grid(lam: float, pad: int = 12, n_theta: int | None = None,
                  n_phi: int | None = None) -> sb.SphereGrid:
    ells, _ = sb.cluster_rank(lam)
    lmax = max(ells)
    return sb.build_grid(max(n_theta or 0, lmax + pad),
                         max(n_phi or 0, 2 * lmax + pad + 4))


def _lower_slope_prediction(case: str, p: float, zeta: float) -> float:
    if case == "2":
        return (0.5 - 1.0 / p) + zeta * (0.5 + 1.0 / p)
    inv = 0.0 if math.isinf(p) else 4.0 / p
    return (1.0 - inv) + zeta * inv


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def run_weyl(cfg: ExperimentConfig):
    lo, hi = (cfg.lambda_range or [10.0, 300.0])[:2]
    lams = np.geomspace(lo, hi, 25)
    counts = [sb.weyl_count(lam) for lam in lams]
    slope, _ = fit_slope(zip(lams, counts))
    ratio_top = counts[-1] / lams[-1] ** 2
    checks = [
        slope_check("weyl-count-slope", 2.0, slope, 0.02),
        slope_check("weyl-leading-coefficient", 1.0, ratio_top, 0.05),
    ]
    rows = [(float(lam), count, count / lam**2) for lam, count in zip(lams, counts)]
    return checks, rows, ("lambda", "count", "count_over_lambda_sq")


def run_sogge_single(cfg: ExperimentConfig):
    ells = [int(e) for e in (cfg.ell_range or _int_geomspace(32, 512, 7))]
    norms = []
    for ell in ells:
        grid = sb.build_grid(max(4 * ell, 64))
        table = sb.legendre_band(ell, ell, ell, math.pi / 2 - grid.theta_nodes)
        rho = table.values_g[0] ** 2
        norm6 = (2.0 * math.pi * float(
            np.dot(grid.theta_weights, rho**3))) ** (1.0 / 6.0)
        norms.append(norm6)
    slope, _ = fit_slope(zip(ells, norms))
    s6, _ = cd.exponents(6.0)
    checks = [slope_check("sogge-single-L6-slope", s6, slope, 0.03)]
    rows = [(ell, norm) for ell, norm in zip(ells, norms)]
    return checks, rows, ("ell", "l6_norm")


def run_cluster_lower(cfg: ExperimentConfig):
    ells = [int(e) for e in (cfg.ell_range or _int_geomspace(100, 800, 7))]
    zeta = cfg.zeta
    case_plists = {
        "2": cfg.p_list or [2.0, 4.0, 6.0],
        "inf": cfg.p_list or [6.0, 8.0, math.inf],
    }
    profiles = {}
    for ell in ells:
        grid = sb.build_grid(max(cfg.n_theta or 0, 4 * ell))
        r = wkb.band_radius(ell, zeta)
        for case in ("2", "inf"):
            profiles[(ell, case)] = cd.density(cd.ClusterSpec(ell, r, case), grid)

    checks, rows = [], []
    for case, p_list in case_plists.items():
        for p in p_list:
            norms = [cd.lp_norm(profiles[(ell, case)], p) for ell in ells]
            predicted = _lower_slope_prediction(case, p, zeta)
            slope, _ = fit_slope(zip(ells, norms))
            checks.append(
                slope_check(f"lower-slope-case{case}-p{p}", predicted, slope, 0.07)
            )
            for ell, norm in zip(ells, norms):
                rows.append((ell, wkb.band_radius(ell, zeta), case,
                             float(p), norm, predicted, slope))

    # pointwise window constants (fitted, stability asserted)
    window_ells = [ell for ell in (200, 400, 800) if ell in ells] or ells[-3:]
    c2s, cinfs = [], []
    for ell in window_ells:
        r = wkb.band_radius(ell, zeta)
        prof2 = profiles[(ell, "2")]
        sel2 = np.abs(math.pi / 2 - prof2.thetas) <= cfg.eta2 * math.sqrt(r / ell)
        c2s.append(float(np.min(prof2.rho[sel2]) / math.sqrt(ell * r)))
        profi = profiles[(ell, "inf")]
        seli = (profi.thetas >= cfg.eta1 * r / ell) & (profi.thetas <= math.pi / 2)
        cinfs.append(float(np.min(profi.rho[seli] * np.sin(profi.thetas[seli])) / r))
    checks.append(flag_check("window-constants-positive",
                             min(c2s) > 0 and min(cinfs) > 0))
    checks.append(bound_check("window-constant-variation-case2",
                              max(c2s) / min(c2s), 2.0))
    checks.append(bound_check("window-constant-variation-caseinf",
                              max(cinfs) / min(cinfs), 2.0))

    # concentration-set estimate on the extremal profiles
    ell_c = 400 if 400 in ells else ells[len(ells) // 2]
    for case, p in (("2", 6.0), ("inf", 8.0)):
        lower, measured = cd.concentration_measure(profiles[(ell_c, case)], p)
        checks.append(flag_check(f"concentration-case{case}-p{p}",
                                 measured >= lower))

    # triangle-inequality gap: naive bound over measured norm grows like
    # l^{zeta (1 - 1/alpha(6))} on the case-2 family
    s6, alpha6 = cd.exponents(6.0)
    gap = [ell ** (2 * s6) * wkb.band_radius(ell, zeta)
           / cd.lp_norm(profiles[(ell, "2")], 6.0) for ell in ells]
    gap_slope, _ = fit_slope(zip(ells, gap))
    checks.append(slope_check("triangle-gap-slope",
                              zeta * (1.0 - 1.0 / alpha6), gap_slope, 0.07))
    header = ("ell", "r", "case", "p", "norm", "predicted_exponent", "fitted_slope")
    return checks, rows, header


CLUSTER_UPPER_RATIO_CAP = 2.5  # frozen after the calibration sweep


def run_cluster_upper(cfg: ExperimentConfig):
    lams = [float(v) for v in (cfg.lambda_range or [5, 10, 20, 35, 50])]
    p_list = cfg.p_list or [2.0, 4.0, 6.0, 10.0, math.inf]
    rng = np.random.default_rng(cfg.seed)
    rows, worst = [], {p: 0.0 for p in p_list}
    for lam in lams:
        grid = _cluster_grid(lam, n_theta=cfg.n_theta, n_phi=cfg.n_phi)
        _, dim = sb.cluster_rank(lam)
        n_funcs = max(1, dim // 2)
        rho, nu, weights = cd.random_cluster_density(lam, n_funcs, rng, grid)
        for p in p_list:
            s, alpha = cd.exponents(p)
            denom = lam ** (2 * s) * cd.schatten_sum(nu, alpha)
            ratio = cd.surface_lp_norm(rho, weights, p) / denom
            worst[p] = max(worst[p], ratio)
            rows.append((lam, float(p), ratio))
    checks = [bound_check(f"upper-ratio-p{p}", worst[p], CLUSTER_UPPER_RATIO_CAP)
              for p in p_list]
    return checks, rows, ("lambda", "p", "ratio")


WKB_SINGLE_C_CAP = 4.0  # |c|^2/l spread, both windows pooled


def run_wkb_accuracy(cfg: ExperimentConfig):
    ells = [int(e) for e in (cfg.ell_range or [100, 200, 400, 800])]
    checks, rows = [], []
    pooled_c = []
    for case in ("2", "inf"):
        metrics, sup_errs = [], []
        for ell in ells:
            r = wkb.band_radius(ell, cfg.zeta)
            window = wkb.case_window(ell, r, case)
            sampled = {int(window[0]), int(window[window.size // 2]), int(window[-1])}
            worst_metric, worst_e = 0.0, 0.0
            for m in sorted(sampled):
                value, deriv = sb.legendre_at_zero(ell, m)
                parity_even = (ell + m) % 2 == 0
                if (value == 0.0) == parity_even or (deriv == 0.0) != parity_even:
                    raise AssertionError("equator parity data inconsistent")
                prof = wkb.wkb_approximant(ell, m, case, r, cfg.eta1, cfg.eta2)
                v = sb.legendre_band(ell, m, m, prof.thetas).values_v[0]
                metric = float(np.max(
                    np.abs(v - prof.c * prof.y) * np.abs(prof.q) ** 0.25
                    / abs(prof.c)))
                worst_metric = max(worst_metric, metric)
                worst_e = max(worst_e, float(prof.err.max()))
                rows.append((ell, case, m, metric, float(prof.err.max()),
                             abs(prof.c) ** 2 / ell))
            metrics.append(worst_metric * r)
            sup_errs.append(worst_e * r)
            pooled_c.extend(
                float(np.abs(c) ** 2) / ell
                for c in _window_constants(ell, window)
            )
        checks.append(bound_check(f"wkb-metric-variation-case{case}",
                                  max(metrics) / min(metrics), 3.0))
        checks.append(bound_check(f"wkb-error-functional-variation-case{case}",
                                  max(sup_errs) / min(sup_errs), 3.0))
    checks.append(bound_check("normalization-constant-spread",
                              max(pooled_c) / min(pooled_c), WKB_SINGLE_C_CAP))
    header = ("ell", "case", "m", "sup_err_metric", "sup_error_functional",
              "c_sq_over_ell")
    return checks, rows, header


def _window_constants(ell: int, window: np.ndarray) -> np.ndarray:
    values, derivs = sb.normalized_at_zero(
        np.full(window.size, ell), window.astype(int))
    q0 = np.array([-wkb.q_potential(ell, int(m), 0.0) for m in window])
    even = (ell + window) % 2 == 0
    return np.where(even, values * q0**0.25, derivs / q0**0.25)


def run_phase_sums(cfg: ExperimentConfig):
    ells = [int(e) for e in (cfg.ell_range or [100, 200, 400, 700, 1000])]
    checks, rows = [], []
    for case in ("2", "inf"):
        amplitudes = []
        all_flags = True
        for ell in ells:
            r = wkb.band_radius(ell, cfg.zeta)
            _, hi = wkb.case_interval(ell, r, case, cfg.eta1, cfg.eta2)
            best = 0.0
            for theta in np.linspace(0.0, hi, 50):
                res = es.cluster_phase_sum(ell, case, r, cfg.eta1, cfg.eta2,
                                           float(theta))
                best = max(best, abs(res.total))
                all_flags &= res.monotone and res.separated and res.bound_holds
                rows.append((ell, case, float(theta), abs(res.total),
                             int(res.monotone), int(res.separated),
                             int(res.bound_holds)))
            amplitudes.append(best)
        checks.append(bound_check(f"phase-sum-variation-case{case}",
                                  max(amplitudes) / min(amplitudes), 2.0))
        checks.append(flag_check(f"phase-sum-flags-case{case}", all_flags))

    # tie the cluster sums back to the generic inequality machinery
    ell, r = ells[-1], wkb.band_radius(ells[-1], cfg.zeta)
    theta = 0.5 * wkb.case_interval(ell, r, "2", cfg.eta1, cfg.eta2)[1]
    window = wkb.case_window(ell, r, "2")
    actions = np.array([wkb.action_integral(ell, int(m), theta) for m in window])
    phases = 2.0 * actions + math.pi * window
    margin = float(np.diff(phases).min())
    seq = es.PhaseSequence(phases, min(margin, math.pi))
    direct = es.exp_sum(seq)
    res = es.cluster_phase_sum(ell, "2", r, cfg.eta1, cfg.eta2, theta)
    agree = abs(direct - res.total) <= 1e-12 * max(1.0, abs(direct))
    bound = es.kuzmin_landau_bound(seq.eps)
    checks.append(flag_check("phase-sum-matches-exp-sum",
                             agree and abs(direct) <= bound))
    header = ("ell", "case", "theta", "abs_sum", "monotone", "separated",
              "bound_holds")
    return checks, rows, header


def _dump_spectra(cfg: ExperimentConfig, spectra: dict) -> None:
    """One singular-value file per (lambda, experiment) under output/spectra."""
    if not cfg.output:
        return
    spectra_dir = os.path.join(cfg.output, "spectra")
    os.makedirs(spectra_dir, exist_ok=True)
    for lam, sv in spectra.items():
        path = os.path.join(spectra_dir, f"{cfg.experiment}_lambda{lam:g}.csv")
        with open(path, "w", newline="") as fh:
            fh.write(format_rows(("k", "sigma"),
                                 list(enumerate(np.asarray(sv, dtype=float)))))


def run_schatten_dual(cfg: ExperimentConfig):
    lams = [float(v) for v in (cfg.lambda_range or [5, 10, 15, 20, 25, 30, 40])]
    p_list = cfg.p_list or [4.0, 6.0, 10.0]
    checks, rows = [], []
    spectra = {
        lam: sl.projector_gram(
            lam, reference_weight,
            _cluster_grid(lam, n_theta=cfg.n_theta, n_phi=cfg.n_phi))
        for lam in lams
    }
    _dump_spectra(cfg, spectra)
    for p in p_list:
        ratios = []
        for lam in lams:
            report = sl.make_report(lam, p, spectra[lam], fitted_const=1.0)
            ratios.append(report.ratio)
            rows.append((lam, float(p), report.alpha_prime,
                         report.schatten_norm, report.ratio))
        tail = ratios[-max(3, len(ratios) // 2):]
        checks.append(bound_check(f"dual-ratio-tail-p{p}",
                                  max(tail) / min(tail), 2.0))
    return checks, rows, ("lambda", "p", "alpha_prime", "schatten_norm", "ratio")


def run_oscillatory_scaling(cfg: ExperimentConfig):
    lams = [float(v) for v in (cfg.lambda_range or [4, 8, 16, 32, 64])]
    checks, rows = [], []
    compensated = []
    spectra = {}
    for lam in lams:
        model = sl.paraboloid_model(lam)
        sv = sl.singular_values(model.matrix)
        spectra[lam] = sv[:40]
        norm = sl.schatten_norm(sv, 6.0)
        eta = norm * lam ** (1.0 / 3.0)
        compensated.append(eta)
        rows.append((lam, 6.0, 6.0, norm, eta))
    _dump_spectra(cfg, spectra)
    checks.append(bound_check("oscillatory-paraboloid-variation",
                              max(compensated) / min(compensated), 2.0))
    ok, _ = sl.validate_resolution(sl.paraboloid_model, max(lams))
    checks.append(flag_check("oscillatory-resolution-validated", ok))
    return checks, rows, ("lambda", "p", "alpha_prime", "schatten_norm", "ratio")


def run_kss_compare(cfg: ExperimentConfig):
    lams = [float(v) for v in (cfg.lambda_range or [6, 9, 14, 20, 30, 44, 60])]
    p = (cfg.p_list or [6.0])[0]
    s_p, _ = cd.exponents(p)
    q = 2.0 * p / (p - 2.0)
    measured, mains, ksss, rows = [], [], [], []
    for lam in lams:
        grid = _cluster_grid(lam, n_theta=cfg.n_theta, n_phi=cfg.n_phi)
        ells, _ = sb.cluster_rank(lam)
        beta = (lambda lo: (lambda t: 1.0 if lo <= t < lo + 1.0 else 0.0))(lam)
        lhs, _ = sl.kss_bound(beta, reference_weight, p, grid, max(ells) + 1)
        w_q = sl.sphere_lp_norm(reference_weight, grid, q)
        measured.append(lhs)
        mains.append(lam**s_p * w_q)
        ksss.append((1.0 + lam) ** (1.0 / q) * w_q)
    c_main = max(m / b for m, b in zip(measured, mains))
    c_kss = max(m / b for m, b in zip(measured, ksss))
    ratios = [c_main * m / (c_kss * k) for m, k in zip(mains, ksss)]
    slope, _ = fit_slope(zip(lams, ratios))
    predicted = s_p - 1.0 / q
    checks = [
        slope_check("kss-ratio-slope", predicted, slope, 0.1),
        flag_check("kss-bounds-hold", all(
            m <= c_main * b * (1 + 1e-12) and m <= c_kss * k * (1 + 1e-12)
            for m, b, k in zip(measured, mains, ksss))),
    ]
    for lam, m, b, k, rr in zip(lams, measured, mains, ksss, ratios):
        rows.append((lam, m, c_main * b, c_kss * k, rr))
    return checks, rows, ("lambda", "measured", "main_bound", "kss_bound", "ratio")


def run_heuristic_compare(cfg: ExperimentConfig):
    ells = [int(e) for e in (cfg.ell_range or [200, 400])]
    checks, rows = [], []
    for ell in ells:
        r = wkb.band_radius(ell, cfg.zeta)
        grid = sb.build_grid(max(cfg.n_theta or 0, 4 * ell))

        window = wkb.case_window(ell, r, "inf")
        theta_star = 2.0 * cfg.eta1 * r / ell
        prof = cd.density(cd.ClusterSpec(ell, r, "inf"), grid)
        exact = float(np.interp(theta_star, prof.thetas, prof.rho))
        heur = cd.heuristic_density(ell, int(window[0]), int(window[-1]),
                                    theta_star)
        ratio_inf = heur / exact
        rows.append((ell, "inf", theta_star, exact, heur, ratio_inf))
        checks.append(bound_check(f"heuristic-ratio-inf-ell{ell}",
                                  max(ratio_inf, 1.0 / ratio_inf), 2.0))

        window = wkb.case_window(ell, r, "2")
        wavelength = math.pi / math.sqrt(ell * r)
        thetas = np.linspace(math.pi / 2 - wavelength / 2,
                             math.pi / 2 + wavelength / 2, 65)
        prof2 = cd.density(cd.ClusterSpec(ell, r, "2"), grid)
        exact2 = float(np.interp(thetas, prof2.thetas, prof2.rho).mean())
        heur2 = float(cd.heuristic_density(ell, int(window[0]), int(window[-1]),
                                           thetas).mean())
        ratio_2 = heur2 / exact2
        rows.append((ell, "2", math.pi / 2, exact2, heur2, ratio_2))
        checks.append(bound_check(f"heuristic-ratio-2-ell{ell}",
                                  max(ratio_2, 1.0 / ratio_2), 2.0))
    return checks, rows, ("ell", "case", "theta", "exact", "heuristic", "ratio")


RUNNERS = {
    "weyl": run_weyl,
    "sogge_single": run_sogge_single,
    "cluster_lower": run_cluster_lower,
    "cluster_upper": run_cluster_upper,
    "wkb_accuracy": run_wkb_accuracy,
    "phase_sums": run_phase_sums,
    "schatten_dual": run_schatten_dual,
    "oscillatory_scaling": run_oscillatory_scaling,
    "kss_compare": run_kss_compare,
    "heuristic_compare": run_heuristic_compare,
}


def run(config: ExperimentConfig) -> AcceptanceReport:
    """Execute one experiment; write CSV rows and a JSON report if asked."""
    config.validate()
    checks, rows, header = RUNNERS[config.experiment](config)
    report = AcceptanceReport(config.experiment, config.seed, list(checks))
    if config.output:
        os.makedirs(config.output, exist_ok=True)
        csv_path = os.path.join(config.output, f"{config.experiment}.csv")
        with open(csv_path, "w", newline="") as fh:
            fh.write(format_rows(header, rows))
        json_path = os.path.join(config.output, f"{config.experiment}.json")
        with open(json_path, "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


# ---------------------------------------------------------------------------
# Coverage manifest: every public operation must be exercised by the suite
# ---------------------------------------------------------------------------

ALL_OPS = {
    "sphere_basis.legendre_band", "sphere_basis.legendre_at_zero",
    "sphere_basis.build_grid", "sphere_basis.weyl_count",
    "sphere_basis.cluster_rank",
    "wkb_engine.q_potential", "wkb_engine.action_integral",
    "wkb_engine.wkb_approximant", "wkb_engine.wkb_error_functional",
    "expsum.kuzmin_landau_bound", "expsum.exp_sum", "expsum.cluster_phase_sum",
    "cluster_density.density", "cluster_density.lp_norm",
    "cluster_density.exponents", "cluster_density.concentration_measure",
    "cluster_density.heuristic_density",
    "schatten_lab.projector_gram", "schatten_lab.schatten_norm",
    "schatten_lab.oscillatory_operator", "schatten_lab.kss_bound",
    "experiments_cli.run", "experiments_cli.fit_slope",
}

OP_COVERAGE = {
    "weyl": {"sphere_basis.weyl_count", "experiments_cli.fit_slope",
             "experiments_cli.run"},
    "sogge_single": {"sphere_basis.legendre_band", "sphere_basis.build_grid",
                     "cluster_density.exponents", "experiments_cli.fit_slope"},
    "cluster_lower": {"cluster_density.density", "cluster_density.lp_norm",
                      "cluster_density.exponents",
                      "cluster_density.concentration_measure",
                      "sphere_basis.build_grid", "experiments_cli.fit_slope"},
    "cluster_upper": {"sphere_basis.cluster_rank", "cluster_density.exponents",
                      "sphere_basis.build_grid"},
    "wkb_accuracy": {"wkb_engine.q_potential", "wkb_engine.wkb_approximant",
                     "wkb_engine.wkb_error_functional",
                     "sphere_basis.legendre_band",
                     "sphere_basis.legendre_at_zero"},
    "phase_sums": {"expsum.cluster_phase_sum", "expsum.kuzmin_landau_bound",
                   "expsum.exp_sum", "wkb_engine.action_integral"},
    "schatten_dual": {"schatten_lab.projector_gram",
                      "schatten_lab.schatten_norm", "sphere_basis.build_grid",
                      "sphere_basis.cluster_rank", "cluster_density.exponents"},
    "oscillatory_scaling": {"schatten_lab.oscillatory_operator",
                            "schatten_lab.schatten_norm"},
    "kss_compare": {"schatten_lab.kss_bound", "sphere_basis.build_grid",
                    "sphere_basis.cluster_rank", "experiments_cli.fit_slope"},
    "heuristic_compare": {"cluster_density.heuristic_density",
                          "cluster_density.density", "sphere_basis.build_grid"},
}
