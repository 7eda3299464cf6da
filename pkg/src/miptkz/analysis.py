"""Finite-time-scaling analysis: rescalings, data collapse, exponent fits.

Driven critical dynamics with a ramp velocity ``R`` obey scaling forms in
which ``R`` carries scaling dimension ``r = z + 1/nu``.  This module
rescales families of curves ``y(g)`` (``g = p - p_c``) into the scaling
variables, scores the quality of the resulting collapse, and fits the
asymptotic laws (logarithmic in the area-law regime, power law in the
volume-law regime).

Rescale modes (``A`` = subsystem size, ``L`` = system size):

===============  =============================  ==========================
mode             x transform                    y transform
===============  =============================  ==========================
STEADY           g * A^(1/nu)                   S - alpha*ln(A)
BULK             g * A^(1/nu)   [R*A^r fixed]   S - alpha*ln(A)
VELOCITY         g * R^(-1/(nu*r))              S - delta*ln(R)
SIZE             g * L^(1/nu)   [R*L^r fixed]   S - alpha*ln(L/2)
DIMENSIONLESS    g * L^(1/nu)   [R*L^r fixed]   unchanged (I3, S_Q)
CRITICAL         R * A^r (per-A master points)  S(g=0) - alpha*ln(A)
===============  =============================  ==========================

``delta = -alpha/r`` is the coefficient of the critical log law
``S(p_c, R) = delta*ln(R) + c``.  All modes except CRITICAL are
invertible via :func:`invert_rescale`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "ScalingConstants",
    "derived_exponents",
    "Curve",
    "FitResult",
    "FitError",
    "CollapseResult",
    "RESCALE_MODES",
    "rescale_fts",
    "invert_rescale",
    "collapse_quality",
    "fit_log",
    "fit_power_log",
    "fit_steady_alpha",
    "asymptote_check",
    "ramp_curve",
    "steady_curve",
    "write_collapse",
    "write_fit_report",
]

RESCALE_MODES = ("STEADY", "BULK", "VELOCITY", "SIZE", "DIMENSIONLESS", "CRITICAL")

_FIXED_PRODUCT_TOL = 0.01


@dataclass(frozen=True)
class ScalingConstants:
    """Critical point and exponents used by every rescaling.

    Defaults are the literature values for the (1+1)D hybrid Clifford
    transition: p_c = 0.15995, nu = 1.260, z = 1, and critical-entropy
    log coefficient alpha = 1.57 (bits per ln of subsystem size).
    """

    p_c: float = 0.15995
    nu: float = 1.260
    z: float = 1.0
    alpha: float = 1.57

    def __post_init__(self):
        if not 0 < self.p_c < 1:
            raise ValueError(f"p_c={self.p_c} outside (0, 1)")
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.z <= 0:
            raise ValueError(f"z must be positive, got {self.z}")

    @property
    def r(self) -> float:
        return self.z + 1.0 / self.nu

    @property
    def delta(self) -> float:
        return -self.alpha / self.r


def derived_exponents(constants: ScalingConstants) -> dict:
    """Exponent combinations implied by (nu, z, alpha)."""
    r = constants.r
    return {
        "r": r,
        "delta": constants.delta,
        "inv_r": 1.0 / r,
        "inv_nu_r": 1.0 / (constants.nu * r),
    }


@dataclass(frozen=True)
class Curve:
    """One labelled curve.  ``label`` carries the fixed parameters the
    rescale modes consult (keys among R, A, L, p0, direction, observable)."""

    x: np.ndarray
    y: np.ndarray
    yerr: np.ndarray | None = None
    label: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, float)
        y = np.asarray(self.y, float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 1 or y.shape != x.shape:
            raise ValueError(f"x and y must be equal-length 1D arrays, got {x.shape} vs {y.shape}")
        if x.size == 0:
            raise ValueError("empty curve")
        if x.size > 1:
            d = np.diff(x)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("curve x values must be strictly monotone")
        if self.yerr is not None:
            yerr = np.asarray(self.yerr, float)
            if yerr.shape != x.shape:
                raise ValueError("yerr must match x in shape")
            if np.any(yerr < 0):
                raise ValueError("yerr must be >= 0")
            object.__setattr__(self, "yerr", yerr)

    def require(self, key: str, mode: str) -> float:
        if key not in self.label:
            raise ValueError(
                f"mode {mode} needs label {key!r}; curve has {sorted(self.label)}"
            )
        return float(self.label[key])


class FitError(RuntimeError):
    """Fit failure with per-start diagnostics (never a silent answer)."""

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict
    stderr: dict
    rss: float
    n_points: int
    window: tuple | None
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for k, v in self.stderr.items():
            if not (v >= 0 or math.isnan(v)):
                raise ValueError(f"stderr[{k!r}] must be >= 0, got {v}")


@dataclass(frozen=True)
class CollapseResult:
    """Rescaled curves plus master-curve quality scores.

    ``quality``/``unrescaled_quality`` are the normalized master-curve
    residuals before/after rescaling (0 = perfect collapse); ``quality``
    is None only in CRITICAL mode when fewer than two master curves share
    support.
    """

    mode: str
    curves: tuple
    quality: float | None
    unrescaled_quality: float | None
    constants: ScalingConstants
    fixed_product: float | None = None


def _piecewise_linear_quality(curves) -> float:
    """Mean squared deviation from a pooled piecewise-linear master on the
    shared x-support, normalized by the pooled y variance."""
    if len(curves) < 2:
        raise ValueError(f"collapse quality needs >= 2 curves, got {len(curves)}")
    lo = max(np.min(c.x) for c in curves)
    hi = min(np.max(c.x) for c in curves)
    if not lo < hi:
        raise ValueError(
            f"curves have no overlapping x-support (shared window [{lo}, {hi}])"
        )
    xs, ys, counts = [], [], []
    for c in curves:
        m = (c.x >= lo) & (c.x <= hi)
        if np.any(m):
            xs.append(c.x[m])
            ys.append(c.y[m])
            counts.append(int(m.sum()))
    if len(xs) < 2:
        raise ValueError("fewer than two curves have points on the shared support")
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    k = max(counts)
    uniq = np.unique(x)
    if uniq.size <= max(k, 2):
        knots = uniq
    else:
        knots = np.unique(np.quantile(x, np.linspace(0.0, 1.0, max(k, 2))))
    if knots.size == 1:
        resid = y - y.mean()
    else:
        seg = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, knots.size - 2)
        t = (x - knots[seg]) / (knots[seg + 1] - knots[seg])
        design = np.zeros((x.size, knots.size))
        rows = np.arange(x.size)
        design[rows, seg] += 1.0 - t
        design[rows, seg + 1] += t
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = design @ coef - y
    mse = float(np.mean(resid**2))
    var = float(np.var(y))
    if mse < 1e-28 * max(1.0, float(np.mean(y**2))):
        return 0.0
    if var == 0.0:
        return math.inf
    return mse / var


def collapse_quality(curves) -> float:
    """Dimensionless collapse score: 0 = curves identical on the shared
    support, ~1 = scatter comparable to the pooled variance."""
    return _piecewise_linear_quality(list(curves))


def _check_fixed_product(products, what: str):
    products = np.asarray(products, float)
    spread = (products.max() - products.min()) / np.mean(products)
    if spread > _FIXED_PRODUCT_TOL + 1e-12:
        raise ValueError(
            f"fixed products {what} differ by {spread:.2%} (> 1%): "
            f"{products.tolist()}"
        )
    return float(np.mean(products))


def rescale_fts(curves, constants: ScalingConstants, mode: str) -> CollapseResult:
    """Rescale a family of curves into the scaling variables of ``mode``
    and score the collapse before and after (input order preserved)."""
    curves = list(curves)
    if not curves:
        raise ValueError("no curves given")
    mode = mode.upper()
    if mode not in RESCALE_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {RESCALE_MODES}")
    ex = derived_exponents(constants)
    inv_nu = 1.0 / constants.nu
    fixed_product = None

    if mode in ("BULK", "SIZE", "DIMENSIONLESS"):
        size_key = "A" if mode == "BULK" else "L"
        products = [
            c.require("R", mode) * c.require(size_key, mode) ** ex["r"] for c in curves
        ]
        fixed_product = _check_fixed_product(products, f"R*{size_key}^r")

    out = []
    if mode == "CRITICAL":
        groups: dict[float, list] = {}
        for i, c in enumerate(curves):
            a = c.require("A", mode)
            rr = c.require("R", mode)
            at_pc = np.flatnonzero(np.abs(c.x) <= 1e-9)
            if at_pc.size == 0:
                raise ValueError(
                    f"curve {i} has no sample at g=0 (needed for CRITICAL mode)"
                )
            j = at_pc[0]
            yv = c.y[j] - constants.alpha * math.log(a)
            ye = None if c.yerr is None else c.yerr[j]
            groups.setdefault(a, []).append((rr * a ** ex["r"], yv, ye))
        for a in sorted(groups):
            pts = sorted(groups[a])
            xs = np.array([p[0] for p in pts])
            ys = np.array([p[1] for p in pts])
            es = [p[2] for p in pts]
            yerr = None if any(e is None for e in es) else np.array(es)
            out.append(Curve(xs, ys, yerr, {"A": a, "critical": True}))
        quality = None
        if len(out) >= 2:
            try:
                quality = _piecewise_linear_quality(out)
            except ValueError:
                quality = None
        try:
            unrescaled = _piecewise_linear_quality(curves)
        except ValueError:
            unrescaled = None
        return CollapseResult(mode, tuple(out), quality, unrescaled, constants, None)

    for c in curves:
        if mode == "STEADY" or mode == "BULK":
            a = c.require("A", mode)
            x = c.x * a**inv_nu
            y = c.y - constants.alpha * math.log(a)
        elif mode == "VELOCITY":
            rr = c.require("R", mode)
            x = c.x * rr ** (-ex["inv_nu_r"])
            y = c.y - ex["delta"] * math.log(rr)
        elif mode == "SIZE":
            ell = c.require("L", mode)
            x = c.x * ell**inv_nu
            y = c.y - constants.alpha * math.log(ell / 2.0)
        else:  # DIMENSIONLESS
            ell = c.require("L", mode)
            x = c.x * ell**inv_nu
            y = c.y.copy()
        out.append(Curve(x, y, c.yerr, dict(c.label)))

    quality = _piecewise_linear_quality(out) if len(out) >= 2 else None
    unrescaled = _piecewise_linear_quality(curves) if len(curves) >= 2 else None
    return CollapseResult(mode, tuple(out), quality, unrescaled, constants, fixed_product)


def invert_rescale(result: CollapseResult, constants: ScalingConstants | None = None):
    """Map rescaled curves back to (g, y) coordinates (all modes except
    CRITICAL, whose point extraction is not invertible)."""
    constants = constants or result.constants
    ex = derived_exponents(constants)
    inv_nu = 1.0 / constants.nu
    mode = result.mode
    if mode == "CRITICAL":
        raise ValueError("CRITICAL mode extracts g=0 slices and cannot be inverted")
    out = []
    for c in result.curves:
        if mode in ("STEADY", "BULK"):
            a = c.require("A", mode)
            x = c.x / a**inv_nu
            y = c.y + constants.alpha * math.log(a)
        elif mode == "VELOCITY":
            rr = c.require("R", mode)
            x = c.x / rr ** (-ex["inv_nu_r"])
            y = c.y + ex["delta"] * math.log(rr)
        elif mode == "SIZE":
            ell = c.require("L", mode)
            x = c.x / ell**inv_nu
            y = c.y + constants.alpha * math.log(ell / 2.0)
        else:  # DIMENSIONLESS
            ell = c.require("L", mode)
            x = c.x / ell**inv_nu
            y = c.y.copy()
        out.append(Curve(x, y, c.yerr, dict(c.label)))
    return out


def _resolve_window(x, window):
    if window is None:
        return None, np.ones(x.size, bool)
    if isinstance(window, str):
        if window != "top_decade":
            raise ValueError(f"unknown window spec {window!r}")
        hi = float(np.max(x))
        if hi <= 0:
            raise ValueError("top_decade window needs positive x values")
        window = (hi / 10.0, hi)
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError(f"degenerate window [{lo}, {hi}]")
    return (lo, hi), (x >= lo) & (x <= hi)


def _weighted_linear(xd, y, sem):
    """WLS of y on [xd, 1]; returns params, stderr, rss (unweighted rss)."""
    design = np.column_stack([xd, np.ones_like(xd)])
    if sem is not None and np.all(sem > 0):
        w = 1.0 / sem
        coef, *_ = np.linalg.lstsq(design * w[:, None], y * w, rcond=None)
        cov = np.linalg.inv(design.T @ (design * (w**2)[:, None]))
    else:
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        dof = max(xd.size - 2, 1)
        s2 = float(np.sum((design @ coef - y) ** 2)) / dof
        cov = np.linalg.inv(design.T @ design) * s2
    resid = design @ coef - y
    return coef, np.sqrt(np.diag(cov)), float(np.sum(resid**2))


def _as_points(x, y, sem):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length 1D arrays")
    if sem is not None:
        sem = np.asarray(sem, float)
        if sem.shape != x.shape:
            raise ValueError("sem must match x in shape")
    return x, y, sem


def fit_log(R, S, sem=None, window=None, bootstrap: int = 0, bootstrap_seed: int = 0) -> FitResult:
    """Weighted least squares of ``S = slope*ln(R) + intercept``.

    ``window`` restricts to an R-range: None (all points), a (lo, hi)
    pair, or "top_decade" ([max/10, max]).
    """
    R, S, sem = _as_points(R, S, sem)
    if np.any(R <= 0):
        raise ValueError("R values must be positive")
    win, mask = _resolve_window(R, window)
    if mask.sum() < 3:
        raise ValueError(f"need >= 3 points in window, have {int(mask.sum())}")
    x, y = np.log(R[mask]), S[mask]
    if np.unique(x).size < 2:
        raise ValueError("window is degenerate: all R equal")
    w = None if sem is None else sem[mask]
    coef, err, rss = _weighted_linear(x, y, w)
    details = {}
    if bootstrap > 0:
        details["bootstrap_stderr"] = _bootstrap_linear(
            x, y, w, bootstrap, bootstrap_seed, names=("slope", "intercept")
        )
    return FitResult(
        model="S = slope*ln(R) + intercept",
        params={"slope": float(coef[0]), "intercept": float(coef[1])},
        stderr={"slope": float(err[0]), "intercept": float(err[1])},
        rss=rss,
        n_points=int(mask.sum()),
        window=win,
        details=details,
    )


def fit_steady_alpha(A, S, sem=None, bootstrap: int = 0, bootstrap_seed: int = 0) -> FitResult:
    """Least squares of the critical log law ``S = alpha*ln(A) + c``."""
    A, S, sem = _as_points(A, S, sem)
    if np.any(A <= 0):
        raise ValueError("subsystem sizes must be positive")
    if np.unique(A).size < 3:
        raise ValueError(f"need >= 3 distinct sizes, have {np.unique(A).size}")
    x = np.log(A)
    coef, err, rss = _weighted_linear(x, S, sem)
    details = {}
    if bootstrap > 0:
        details["bootstrap_stderr"] = _bootstrap_linear(
            x, S, sem, bootstrap, bootstrap_seed, names=("alpha", "intercept")
        )
    return FitResult(
        model="S = alpha*ln(A) + intercept",
        params={"alpha": float(coef[0]), "intercept": float(coef[1])},
        stderr={"alpha": float(err[0]), "intercept": float(err[1])},
        rss=rss,
        n_points=int(A.size),
        window=None,
        details=details,
    )


def _bootstrap_linear(x, y, sem, n_boot, seed, names):
    rng = np.random.default_rng(seed)
    draws = []
    for _ in range(n_boot):
        idx = rng.integers(0, x.size, x.size)
        if np.unique(x[idx]).size < 2:
            continue
        coef, _, _ = _weighted_linear(x[idx], y[idx], None if sem is None else sem[idx])
        draws.append(coef)
    draws = np.array(draws)
    return {name: float(np.std(draws[:, i], ddof=1)) for i, name in enumerate(names)}


def fit_power_log(
    R,
    S,
    sem=None,
    window=None,
    constants: ScalingConstants | None = None,
    bootstrap: int = 0,
    bootstrap_seed: int = 0,
) -> FitResult:
    """Nonlinear least squares of ``S = a*R^kappa + b*ln(R) + c``.

    The model is mildly degenerate (a small power is hard to tell from a
    log), so the solver multi-starts from kappa in {0.3, 0.5, 0.557, 0.7}
    and b in {0, +alpha/r, -alpha/r}; the best-residual converged solution
    wins.  Raises :class:`FitError` with per-start diagnostics when no
    start converges or the data cannot identify kappa.
    """
    R, S, sem = _as_points(R, S, sem)
    if np.any(R <= 0):
        raise ValueError("R values must be positive")
    win, mask = _resolve_window(R, window)
    if mask.sum() < 5:
        raise ValueError(f"need >= 5 points in window, have {int(mask.sum())}")
    x, y = R[mask], S[mask]
    w = None
    if sem is not None and np.all(sem[mask] > 0):
        w = 1.0 / sem[mask]
    if np.ptp(y) == 0.0:
        raise FitError(
            "all S values are equal: kappa is unidentifiable from constant data"
        )
    logx = np.log(x)
    constants = constants or ScalingConstants()
    b_scale = abs(constants.alpha / constants.r)

    def residuals(theta):
        a, kappa, b, c = theta
        res = a * x**kappa + b * logx + c - y
        return res if w is None else res * w

    starts = []
    for k0 in (0.3, 0.5, 0.557, 0.7):
        for b0 in (0.0, b_scale, -b_scale):
            design = np.column_stack([x**k0, np.ones_like(x)])
            ac, *_ = np.linalg.lstsq(design, y - b0 * logx, rcond=None)
            starts.append(np.array([ac[0], k0, b0, ac[1]]))

    best = None
    diagnostics = []
    for x0 in starts:
        try:
            res = least_squares(
                residuals,
                x0,
                bounds=([-np.inf, 1e-3, -np.inf, -np.inf], [np.inf, 3.0, np.inf, np.inf]),
                method="trf",
                max_nfev=2000,
            )
        except Exception as e:  # pragma: no cover - scipy internal failure
            diagnostics.append({"x0": x0.tolist(), "error": str(e)})
            continue
        diagnostics.append(
            {"x0": x0.tolist(), "status": res.status, "cost": float(res.cost)}
        )
        if res.status <= 0:
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None:
        raise FitError(
            "power+log fit failed to converge from every start", diagnostics
        )

    a, kappa, b, c = best.x
    rss = float(np.sum((a * x**kappa + b * logx + c - y) ** 2))
    jac = best.jac
    try:
        jtj_inv = np.linalg.inv(jac.T @ jac)
        if w is None:
            dof = max(x.size - 4, 1)
            cov = jtj_inv * (2.0 * best.cost / dof)
        else:
            cov = jtj_inv
        err = np.sqrt(np.clip(np.diag(cov), 0.0, np.inf))
    except np.linalg.LinAlgError:
        err = np.full(4, np.nan)
    names = ("amplitude", "exponent", "log_coeff", "constant")
    details = {"starts": diagnostics}
    if bootstrap > 0:
        rng = np.random.default_rng(bootstrap_seed)
        draws = []
        for _ in range(bootstrap):
            idx = rng.integers(0, x.size, x.size)
            try:
                rb = least_squares(
                    lambda th: (th[0] * x[idx] ** th[1] + th[2] * logx[idx] + th[3] - y[idx]),
                    best.x,
                    bounds=([-np.inf, 1e-3, -np.inf, -np.inf], [np.inf, 3.0, np.inf, np.inf]),
                    method="trf",
                    max_nfev=500,
                )
            except Exception:
                continue
            if rb.status > 0:
                draws.append(rb.x)
        if draws:
            details["bootstrap_stderr"] = {
                n: float(np.std(np.array(draws)[:, i], ddof=1))
                for i, n in enumerate(names)
            }
    return FitResult(
        model="S = a*R^kappa + b*ln(R) + c",
        params=dict(zip(names, (float(a), float(kappa), float(b), float(c)))),
        stderr=dict(zip(names, (float(e) for e in err))),
        rss=rss,
        n_points=int(x.size),
        window=win,
        details=details,
    )


def asymptote_check(master, form: str, constants: ScalingConstants | None = None) -> FitResult:
    """Fit the declared asymptotic form on the top decade of a master curve.

    ``master`` is a CollapseResult (its curves are pooled) or an iterable
    of curves.  ``form="log"`` fits ``y = slope*ln(x) + c``; ``form="power"``
    fits ``y = amplitude*x^exponent`` by log-log linear regression (tail y
    must be positive).
    """
    curves = master.curves if isinstance(master, CollapseResult) else list(master)
    x = np.concatenate([np.asarray(c.x, float) for c in curves])
    y = np.concatenate([np.asarray(c.y, float) for c in curves])
    order = np.argsort(x)
    x, y = x[order], y[order]
    hi = float(np.max(x))
    if hi <= 0:
        raise ValueError("asymptote check needs positive x values")
    tail = x >= hi / 10.0
    if tail.sum() < 3:
        raise ValueError(
            f"insufficient tail points: {int(tail.sum())} in the top decade"
        )
    xt, yt = x[tail], y[tail]
    if form == "log":
        coef, err, rss = _weighted_linear(np.log(xt), yt, None)
        return FitResult(
            model="y = slope*ln(x) + intercept",
            params={"slope": float(coef[0]), "intercept": float(coef[1])},
            stderr={"slope": float(err[0]), "intercept": float(err[1])},
            rss=rss,
            n_points=int(tail.sum()),
            window=(hi / 10.0, hi),
        )
    if form == "power":
        if np.any(yt <= 0):
            raise ValueError("power-form tail requires positive y values")
        coef, err, rss = _weighted_linear(np.log(xt), np.log(yt), None)
        amp = math.exp(coef[1])
        return FitResult(
            model="y = amplitude*x^exponent",
            params={"exponent": float(coef[0]), "amplitude": amp},
            stderr={"exponent": float(err[0]), "amplitude": amp * float(err[1])},
            rss=rss,
            n_points=int(tail.sum()),
            window=(hi / 10.0, hi),
        )
    raise ValueError(f"unknown asymptote form {form!r}; expected 'log' or 'power'")


def ramp_curve(agg, observable: str, region_size: int | None = None) -> Curve:
    """Curve (x=g) from a ramp aggregate, labelled with R/L/A/p0/direction.

    Fast ramps cross several grid values between consecutive readout
    boundaries, so the aggregate carries plateaus of rows that repeat one
    readout under different g labels.  Feeding those duplicates to a collapse
    would weight one measurement many times and smear its abscissa by the
    plateau width, so each plateau is reduced to a single point, keeping the
    grid label closest to the drive's value at that readout boundary.  Points
    stay in time order; slow ramps (one grid value per boundary) are returned
    unchanged.
    """
    from .protocol import LinearRamp

    cols = agg.curve(observable, region_size)
    sched = agg.spec.schedule
    if not isinstance(sched, LinearRamp):
        raise ValueError("ramp_curve needs an aggregate driven by a LinearRamp")
    size = region_size
    if size is None:
        size = agg.spec.L // 2 if observable == "S_half" else 0
    label = {
        "R": sched.rate,
        "L": agg.spec.L,
        "p0": sched.p0,
        "direction": sched.direction,
        "observable": observable,
    }
    if size:
        label["A"] = size
    t, g = cols["t"], cols["g"]
    boundaries, first = np.unique(t, return_index=True)
    keep = np.empty(boundaries.size, dtype=np.intp)
    for i, lo in enumerate(first):
        hi = first[i + 1] if i + 1 < first.size else t.size
        g_exact = sched.p_at(float(boundaries[i])) - sched.p_c
        keep[i] = lo + int(np.argmin(np.abs(g[lo:hi] - g_exact)))
    return Curve(g[keep], cols["mean"][keep], cols["sem"][keep], label)


def steady_curve(aggs, observable: str, region_size: int | None = None) -> Curve:
    """Curve (x=g) built from one steady-state aggregate per p value; each
    aggregate must hold a single sample point."""
    pts = []
    label = {"direction": "steady", "observable": observable}
    for agg in aggs:
        cols = agg.curve(observable, region_size)
        if cols["g"].size != 1:
            raise ValueError(
                "steady_curve expects single-sample aggregates; got "
                f"{cols['g'].size} points for p={cols['p']!r}"
            )
        pts.append((float(cols["g"][0]), float(cols["mean"][0]), float(cols["sem"][0])))
        label.setdefault("L", agg.spec.L)
    pts.sort()
    x = np.array([q[0] for q in pts])
    y = np.array([q[1] for q in pts])
    e = np.array([q[2] for q in pts])
    if region_size:
        label["A"] = int(region_size)
    return Curve(x, y, e, label)


def _constants_dict(constants: ScalingConstants) -> dict:
    d = {
        "p_c": constants.p_c,
        "nu": constants.nu,
        "z": constants.z,
        "alpha": constants.alpha,
    }
    d.update(derived_exponents(constants))
    return d


def write_collapse(result: CollapseResult, out_base) -> tuple[Path, Path]:
    """Write rescaled curves as CSV (curve,x,y,yerr) plus a JSON report
    {mode, constants, quality, curves' labels}."""
    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out_base.with_suffix(".csv")
    lines = ["curve,x,y,yerr"]
    for i, c in enumerate(result.curves):
        yerr = c.yerr if c.yerr is not None else np.zeros_like(c.x)
        for xv, yv, ev in zip(c.x, c.y, yerr):
            lines.append(f"{i:d},{xv:.17g},{yv:.17g},{ev:.17g}")
    csv_path.write_text("\n".join(lines) + "\n")
    report = {
        "mode": result.mode,
        "constants": _constants_dict(result.constants),
        "quality": result.quality,
        "unrescaled_quality": result.unrescaled_quality,
        "fixed_product": result.fixed_product,
        "curves": [dict(c.label) for c in result.curves],
    }
    report_path = out_base.with_suffix(".report.json")
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return csv_path, report_path


def write_fit_report(fit: FitResult, path, constants: ScalingConstants | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "model": fit.model,
        "parameters": fit.params,
        "stderr": fit.stderr,
        "rss": fit.rss,
        "n_points": fit.n_points,
        "window": list(fit.window) if fit.window else None,
    }
    if constants is not None:
        payload["constants"] = _constants_dict(constants)
    if "bootstrap_stderr" in fit.details:
        payload["bootstrap_stderr"] = fit.details["bootstrap_stderr"]
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
