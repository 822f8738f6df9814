"""
Damped least-squares fits for Lorentzian lines and double-sided exponential
correlation functions.

Models::

    lorentzian(x)         = baseline + amplitude * (w/2)^2 / ((x - center)^2 + (w/2)^2)
    double_exponential(t) = baseline * (1 - contrast * exp(-|t| / time_constant))

``amplitude`` is signed, negative for a dip.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .quantities import lifetime_to_fwhm


class FitError(RuntimeError):
    """The fit did not converge."""


class DegenerateDataError(ValueError):
    """Data carry no information about the model (e.g. constant values)."""


LORENTZIAN_PARAMS = ("baseline", "amplitude", "center", "fwhm")
DOUBLE_EXP_PARAMS = ("baseline", "contrast", "time_constant")


def lorentzian(x, baseline, amplitude, center, fwhm):
    h = 0.5 * fwhm
    return baseline + amplitude * h * h / ((np.asarray(x, dtype=float) - center) ** 2 + h * h)


def lorentzian_jacobian(x, baseline, amplitude, center, fwhm):
    u = np.asarray(x, dtype=float) - center
    h = 0.5 * fwhm
    d = u * u + h * h
    shape = h * h / d
    return np.column_stack((np.ones_like(u), shape,
                            amplitude * 2.0 * h * h * u / d ** 2,
                            amplitude * h * u * u / d ** 2))


def double_exponential(tau, baseline, contrast, time_constant):
    return baseline * (1.0 - contrast * np.exp(-np.abs(tau) / time_constant))


def double_exponential_jacobian(tau, baseline, contrast, time_constant):
    a = np.abs(np.asarray(tau, dtype=float))
    e = np.exp(-a / time_constant)
    return np.column_stack((1.0 - contrast * e, -baseline * e,
                            -baseline * contrast * e * a / time_constant ** 2))


@dataclass
class FitResult:
    model: str
    names: tuple
    params: np.ndarray
    errors: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    gradient_norm: float
    cost_history: list = field(default_factory=list, repr=False)
    covariance: np.ndarray = field(default=None, repr=False)
    extras: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return float(self.params[self.names.index(name)])

    def error(self, name):
        return float(self.errors[self.names.index(name)])

    def as_dict(self):
        return {"model": self.model,
                "parameters": {n: float(v) for n, v in zip(self.names, self.params)},
                "uncertainties": {n: float(v) for n, v in zip(self.names, self.errors)},
                "residual_norm": float(self.residual_norm),
                "iterations": int(self.iterations),
                "converged": bool(self.converged),
                "gradient_norm": float(self.gradient_norm),
                **({"derived": {k: float(v) if not isinstance(v, bool) else v
                                for k, v in self.extras.items()}} if self.extras else {})}

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def predict(self, x):
        fn = lorentzian if self.model == "lorentzian" else double_exponential
        return fn(x, *self.params)


# trial steps that overflow are rejected as non-finite
@np.errstate(over="ignore", invalid="ignore")
def levenberg_marquardt(fun, jac, p0, x, y, weights=None, scale=None, max_iter=200,
                        xtol=1e-8, gtol=1e-4, lam0=1e-3):
    """
    Marquardt-scaled damped Gauss-Newton.  Damping grows x10 on a rejected
    step; on an accepted one it follows the ratio of actual to predicted
    cost reduction (x2 below 0.25, /2 above 0.75), which damps the
    oscillation of poorly determined parameters.  The residual norm never
    increases across accepted iterations.

    Converged once every parameter step satisfies
    ``|dp_i| <= xtol * (|p_i| + scale_i)`` and the scaled gradient
    ``max_i |J_i . r| / (|J_i| |r|)`` is below ``gtol`` (or the residual vanishes).

    :return: (params, info dict)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sw = np.ones_like(y) if weights is None else np.sqrt(np.asarray(weights, dtype=float))
    p = np.array(p0, dtype=float)
    scale = np.abs(p) if scale is None else np.asarray(scale, dtype=float)

    def residual(q):
        return sw * (y - fun(x, *q))

    r = residual(p)
    cost = float(r @ r)
    history = [cost]
    lam = lam0
    converged = False
    it = 0
    # residual at round-off level: relative norm 1e-12
    floor = 1e-24 * max(float(np.sum((sw * y) ** 2)), 1e-300)

    def scaled_gradient(J, r):
        cn = np.linalg.norm(J, axis=0)
        rn = np.linalg.norm(r)
        if rn == 0:
            return 0.0
        return float(np.max(np.abs(J.T @ r) / np.where(cn > 0, cn, 1.0)) / rn)

    J = sw[:, None] * jac(x, *p)
    while it < max_iter:
        it += 1
        A = J.T @ J
        g = J.T @ r
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p + step
            r_new = residual(trial)
            c_new = float(r_new @ r_new)
            if np.all(np.isfinite(r_new)) and c_new <= cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            # no descent direction left: at a minimum to working precision
            converged = scaled_gradient(J, r) <= gtol or cost <= floor
            break
        predicted = float(2.0 * g @ step - step @ A @ step)
        rho = (cost - c_new) / predicted if predicted > 0 else 1.0
        p, r, cost = trial, r_new, c_new
        history.append(cost)
        if rho < 0.25:
            lam = min(lam * 2.0, 1e16)
        elif rho > 0.75:
            lam = max(lam / 2.0, 1e-12)
        J = sw[:, None] * jac(x, *p)
        small_step = np.all(np.abs(step) <= xtol * (np.abs(p) + scale))
        if small_step and (cost <= floor or scaled_gradient(J, r) <= gtol):
            converged = True
            break
    A = J.T @ J
    return p, {"cost": cost, "iterations": it, "converged": converged,
               "gradient_norm": float(np.linalg.norm(J.T @ r)),
               "scaled_gradient": scaled_gradient(J, r), "history": history, "normal": A}


def _covariance(A, cost, n, k, absolute_sigma):
    try:
        cov = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(A)
    if not absolute_sigma:
        cov = cov * (cost / max(n - k, 1))
    return cov


def _finish(model, names, fun, jac, p0, scale, x, y, weights, absolute_sigma, raise_on_failure,
            fixed=None, max_iter=200):
    p0 = np.array(p0, dtype=float)
    fixed = fixed or {}
    unknown = set(fixed) - set(names)
    if unknown:
        raise ValueError(f"unknown parameter(s) {sorted(unknown)}; expected {names}")
    for k, v in fixed.items():
        p0[names.index(k)] = v
    free = np.array([n not in fixed for n in names])
    if not free.any():
        raise ValueError("at least one parameter must be free")

    def full(q):
        out = p0.copy()
        out[free] = q
        return out

    q, info = levenberg_marquardt(lambda xx, *q: fun(xx, *full(q)),
                                  lambda xx, *q: jac(xx, *full(q))[:, free],
                                  p0[free], x, y, weights, scale[free], max_iter=max_iter)
    if not info["converged"] and raise_on_failure:
        raise FitError(f"{model} fit did not converge after {info['iterations']} iterations")
    if absolute_sigma is None:
        absolute_sigma = weights is not None
    k = int(free.sum())
    cov = np.zeros((len(names), len(names)))
    cov[np.ix_(free, free)] = _covariance(info["normal"], info["cost"], len(x), k, absolute_sigma)
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return FitResult(model, names, full(q), err, float(np.sqrt(info["cost"])), info["iterations"],
                     info["converged"], info["gradient_norm"], info["history"], cov)


def poisson_weights(counts):
    """Inverse-variance weights for count data, 1/max(counts, 1)."""
    return 1.0 / np.maximum(np.asarray(counts, dtype=float), 1.0)


def _check_data(x, y, min_points):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if len(x) < min_points:
        raise DegenerateDataError(f"need at least {min_points} points, got {len(x)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("data contain non-finite values")
    if np.ptp(y) <= 1e-14 * max(np.max(np.abs(y)), 1e-300):
        raise DegenerateDataError("data are constant")
    return x, y


def lorentzian_guess(x, y, smooth=1, sign=0):
    """
    Baseline from the outer fifth of the points, extremum of the deviation
    after a ``smooth``-point moving average, half-depth crossings.

    :param sign: +1 for a peak, -1 for a dip, 0 for whichever deviates most
    """
    order = np.argsort(x)
    x, y = x[order], y[order]
    n_edge = max(2, len(x) // 10)
    baseline = float(np.median(np.concatenate((y[:n_edge], y[-n_edge:]))))
    dev = y - baseline
    if smooth > 1:
        dev = np.convolve(dev, np.ones(smooth) / smooth, mode="same")
    i = int(np.argmax(np.abs(dev) if sign == 0 else sign * dev))
    amplitude = float(dev[i])
    center = float(x[i])
    half = 0.5 * amplitude
    inside = np.abs(dev) >= np.abs(half)
    lo = i
    while lo > 0 and inside[lo - 1]:
        lo -= 1
    hi = i
    while hi < len(x) - 1 and inside[hi + 1]:
        hi += 1
    span = x[-1] - x[0]
    if lo == 0 or hi == len(x) - 1:
        fwhm = span / 4.0
    else:
        x_lo = np.interp(abs(half), [abs(dev[lo - 1]), abs(dev[lo])], [x[lo - 1], x[lo]])
        x_hi = np.interp(abs(half), [abs(dev[hi + 1]), abs(dev[hi])], [x[hi + 1], x[hi]])
        fwhm = float(x_hi - x_lo)
        if fwhm <= 0:
            fwhm = span / 4.0
    return np.array([baseline, amplitude, center, fwhm])


def fit_lorentzian(x, y, weights=None, p0=None, absolute_sigma=None, raise_on_failure=True,
                   fixed=None):
    """
    Fit a Lorentzian peak or dip.

    :param weights: inverse variances (see :func:`poisson_weights`); when given,
        uncertainties are absolute, otherwise scaled by the residual variance
    :param fixed: parameters held at given values, e.g. ``{"center": 0, "fwhm": 58}``;
        their uncertainties are reported as 0
    :raises DegenerateDataError: fewer than 8 points or constant data
    :raises FitError: no convergence within 200 iterations
    """
    x, y = _check_data(x, y, 8)
    if p0 is None:
        # a lone noisy point can pass for a narrow line: start from peaks and dips
        # at several smoothings and keep the best fit
        starts = [lorentzian_guess(x, y, k, sign) for sign in (-1, 1)
                  for k in sorted({1, 3, max(3, len(x) // 16 | 1)})]
    else:
        starts = [np.asarray(p0, dtype=float)]
    # a line narrower than the sampling only fits single points; rank such
    # solutions below resolved ones
    spacing = np.min(np.diff(np.unique(x)))

    def run(p, max_iter):
        scale = np.array([abs(p[0]) + abs(p[1]), abs(p[1]), abs(p[3]), abs(p[3])])
        return _finish("lorentzian", LORENTZIAN_PARAMS, lorentzian, lorentzian_jacobian, p,
                       scale, x, y, weights, absolute_sigma, False, fixed, max_iter)

    res, best = None, None
    for p in starts:
        # short exploratory runs; only the winner is iterated to convergence
        r = run(p, 40 if len(starts) > 1 else 200)
        rank = (abs(r["fwhm"]) >= spacing, -r.residual_norm)
        if best is None or rank > best:
            res, best = r, rank
    if not res.converged:
        res = run(res.params, 200)
    if not res.converged and raise_on_failure:
        raise FitError(f"lorentzian fit did not converge after {res.iterations} iterations")
    if res["fwhm"] < 0:
        res.params[3] = -res.params[3]
    if res["baseline"] != 0:
        res.extras["depth"] = -res["amplitude"] / res["baseline"]
    res.extras["area"] = 0.5 * np.pi * res["amplitude"] * res["fwhm"]
    return res


def double_exponential_guess(tau, g2):
    a = np.abs(tau)
    tail = a >= 0.75 * a.max()
    baseline = float(np.mean(g2[tail]))
    g0 = float(np.mean(g2[a <= a.min() + 1e-12 * max(a.max(), 1.0)]))
    contrast = min(max(1.0 - g0 / baseline, 1e-3), 1.0)
    depth = (baseline - g2) / (baseline * contrast)
    # first |tau| where the dip has recovered to 1/e of its depth
    recovered = a[depth <= np.exp(-1.0)]
    T = recovered.min() if recovered.size and recovered.min() > 0 else a.max() / 10.0
    return np.array([baseline, contrast, max(T, 1e-9)])


def fit_double_exponential(tau, g2, weights=None, p0=None, absolute_sigma=None,
                           raise_on_failure=True, fixed=None):
    """
    Fit ``baseline * (1 - contrast * exp(-|tau|/T))`` to a correlation histogram.

    Derived quantities in ``extras``: ``implied_linewidth_mhz = 1/(2 pi T)``
    (``tau`` in ns), ``g2_zero = 1 - contrast`` and ``single_photon``
    (``g2_zero < 0.5``).
    """
    tau, g2 = _check_data(tau, g2, 8)
    p0 = double_exponential_guess(tau, g2) if p0 is None else np.asarray(p0, dtype=float)
    scale = np.array([abs(p0[0]), 1.0, abs(p0[2])])
    res = _finish("double_exponential", DOUBLE_EXP_PARAMS, double_exponential,
                  double_exponential_jacobian, p0, scale, tau, g2, weights, absolute_sigma,
                  raise_on_failure, fixed)
    T = res["time_constant"]
    if T > 0:
        res.extras["implied_linewidth_mhz"] = lifetime_to_fwhm(T).fwhm
    res.extras["g2_zero"] = 1.0 - res["contrast"]
    res.extras["single_photon"] = bool(res.extras["g2_zero"] < 0.5)
    return res
