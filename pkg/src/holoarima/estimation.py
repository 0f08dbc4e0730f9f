"""ARIMA(p, d, q) estimation by conditional sum of squares (CSS).

Model, after ``d`` differences ``w_t`` of the data::

    (w_t - mu) = sum_i ar_i (w_{t-i} - mu) + u_t + sum_j ma_j u_{t-j}

The sum of squares runs over ``t = p .. n-1`` with ``u_t = 0`` before ``t = p``
(conditioning on the first ``p`` observations). MA coefficients are stored with
the plus sign above; the ``"spss"`` reporting convention prints them negated.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize
from scipy.signal import lfilter

from .distributions import t_two_sided
from .errors import DegenerateSeriesError, InputError, InsufficientDataError
from .identification import acf, durbin_levinson
from .series import TimeSeries, difference

MAX_ORDER = 5
MA_SIGNS = ("spss", "boxjenkins")
START_CLAMP = 0.995


@dataclass(frozen=True)
class ArimaSpec:
    p: int = 0
    d: int = 0
    q: int = 0
    include_constant: bool = True

    def __post_init__(self):
        for name in ("p", "d", "q"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0 or v > MAX_ORDER:
                raise InputError(f"{name} must be an integer in [0, {MAX_ORDER}], got {v!r}")
        if self.n_params < 1:
            raise InputError("model needs at least one parameter (AR, MA or constant)")

    @property
    def n_params(self) -> int:
        return self.p + self.q + int(self.include_constant)

    @property
    def label(self) -> str:
        return f"ARIMA({self.p},{self.d},{self.q}){'+c' if self.include_constant else ''}"

    def sort_key(self):
        return (self.p, self.d, self.q, not self.include_constant)

    def param_names(self) -> list[str]:
        names = ["Constant"] if self.include_constant else []
        names += [f"AR Lag {i}" for i in range(1, self.p + 1)]
        names += [f"MA Lag {j}" for j in range(1, self.q + 1)]
        return names


@dataclass(frozen=True)
class FitOptions:
    enforce_stationarity: bool = True
    enforce_invertibility: bool = True
    max_iter: int = 500
    ftol: float = 1e-10
    ma_sign: str = "spss"

    def __post_init__(self):
        if self.ma_sign not in MA_SIGNS:
            raise InputError(f"ma_sign must be one of {MA_SIGNS}, got {self.ma_sign!r}")


# -- parameter packing and constraint transform -------------------------------


def _unpack(params, spec: ArimaSpec):
    params = np.asarray(params, dtype=np.float64)
    i = int(spec.include_constant)
    mu = params[0] if i else 0.0
    return mu, params[i:i + spec.p], params[i + spec.p:i + spec.p + spec.q]


def pacf_to_coef(r) -> np.ndarray:
    """Map partial autocorrelations in (-1, 1) to stationary AR coefficients."""
    phi = np.zeros(0)
    for rk in np.asarray(r, dtype=np.float64):
        phi = np.r_[phi - rk * phi[::-1], rk]
    return phi


def coef_to_pacf(phi) -> np.ndarray:
    """Inverse of :func:`pacf_to_coef`; values outside (-1, 1) mean non-stationary."""
    phi = np.array(phi, dtype=np.float64)
    K = phi.size
    r = np.zeros(K)
    for k in range(K, 0, -1):
        rk = phi[k - 1]
        r[k - 1] = rk
        if k > 1:
            denom = 1.0 - rk * rk
            if denom <= 0.0:
                r[: k - 1] = np.nan
                break
            head = phi[: k - 1]
            phi = (head + rk * head[::-1]) / denom
    return r


def _clamp_poly(coef, limit: float, sign: float) -> np.ndarray:
    """Shrink ``coef`` into the stationary (sign=+1) or invertible (sign=-1) region."""
    if coef.size == 0:
        return coef
    r = coef_to_pacf(sign * coef)
    if not np.all(np.isfinite(r)):
        r = np.zeros_like(r)
    return sign * pacf_to_coef(np.clip(r, -limit, limit))


def is_stationary(ar) -> bool:
    """Step-down (Schur-Cohn) test: all partial autocorrelations strictly inside (-1, 1)."""
    ar = np.asarray(ar, dtype=np.float64)
    if ar.size == 0:
        return True
    with np.errstate(all="ignore"):
        r = coef_to_pacf(ar)
    return bool(np.all(np.isfinite(r)) and np.all(np.abs(r) < 1.0))


def is_invertible(ma) -> bool:
    return is_stationary(-np.asarray(ma, dtype=np.float64))


class _Transform:
    """Unconstrained <-> natural parameters (tanh of partial autocorrelations)."""

    def __init__(self, spec: ArimaSpec, options: FitOptions):
        self.spec = spec
        self.ar = options.enforce_stationarity and spec.p > 0
        self.ma = options.enforce_invertibility and spec.q > 0

    def to_natural(self, x):
        mu, a, b = _unpack(x, self.spec)
        if self.ar:
            a = pacf_to_coef(np.tanh(a))
        if self.ma:
            b = -pacf_to_coef(np.tanh(b))
        return _pack(mu, a, b, self.spec)

    def to_free(self, params):
        mu, a, b = _unpack(params, self.spec)
        lim = 1.0 - 1e-12
        if self.ar:
            a = np.arctanh(np.clip(coef_to_pacf(a), -lim, lim))
        if self.ma:
            b = np.arctanh(np.clip(coef_to_pacf(-b), -lim, lim))
        return _pack(mu, a, b, self.spec)

    def jacobian(self, x, h=1e-7):
        x = np.asarray(x, dtype=np.float64)
        J = np.empty((x.size, x.size))
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h * max(1.0, abs(x[i]))
            J[:, i] = (self.to_natural(x + e) - self.to_natural(x - e)) / (2 * e[i])
        return J

    def admissible(self, params) -> bool:
        _, a, b = _unpack(params, self.spec)
        return (not self.ar or is_stationary(a)) and (not self.ma or is_invertible(b))


def _pack(mu, a, b, spec: ArimaSpec) -> np.ndarray:
    head = [mu] if spec.include_constant else []
    return np.r_[head, a, b].astype(np.float64)


# -- objective ------------------------------------------------------------------


def css_residuals(w, params, spec: ArimaSpec) -> np.ndarray:
    """Innovations ``u_p .. u_{n-1}`` of the CSS recursion."""
    mu, a, b = _unpack(params, spec)
    dev = np.asarray(w, dtype=np.float64) - mu
    p = spec.p
    x = dev[p:].copy()
    for i in range(1, p + 1):
        x -= a[i - 1] * dev[p - i:dev.size - i]
    if spec.q == 0:
        return x
    return lfilter([1.0], np.r_[1.0, b], x)


def css(w, params, spec: ArimaSpec) -> float:
    u = css_residuals(w, params, spec)
    return float(np.dot(u, u))


def css_jacobian(w, params, spec: ArimaSpec):
    """Residuals and their exact derivatives (one column per parameter)."""
    mu, a, b = _unpack(params, spec)
    dev = np.asarray(w, dtype=np.float64) - mu
    p, q = spec.p, spec.q
    m = dev.size - p
    u = css_residuals(w, params, spec)
    den = np.r_[1.0, b]
    cols = []
    if spec.include_constant:
        cols.append(lfilter([1.0], den, np.full(m, -(1.0 - a.sum()))))
    for i in range(1, p + 1):
        cols.append(lfilter([1.0], den, -dev[p - i:dev.size - i]))
    for j in range(1, q + 1):
        lagged = np.r_[np.zeros(min(j, m)), u[:m - j]] if m > j else np.zeros(m)
        cols.append(lfilter([1.0], den, -lagged))
    return u, np.column_stack(cols) if cols else np.zeros((m, 0))


def css_gradient(w, params, spec: ArimaSpec) -> np.ndarray:
    u, J = css_jacobian(w, params, spec)
    return 2.0 * J.T @ u


def _steps(params):
    return 1e-4 * np.maximum(1.0, np.abs(params))


def hessian_second_differences(func, params) -> np.ndarray:
    """Hessian of a scalar function by central second differences."""
    x = np.asarray(params, dtype=np.float64)
    k = x.size
    h = _steps(x)
    H = np.empty((k, k))
    f0 = func(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (func(x + ei) - 2.0 * f0 + func(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                func(x + ei + ej) - func(x + ei - ej) - func(x - ei + ej) + func(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def hessian_from_gradient(grad, params) -> np.ndarray:
    """Hessian by central differences of an analytic gradient, symmetrized."""
    x = np.asarray(params, dtype=np.float64)
    k = x.size
    h = _steps(x)
    H = np.empty((k, k))
    for i in range(k):
        e = np.zeros(k)
        e[i] = h[i]
        H[:, i] = (grad(x + e) - grad(x - e)) / (2.0 * h[i])
    return 0.5 * (H + H.T)


def covariance_from_hessian(H, sigma2: float):
    """``inv(H / (2 sigma2))``; ``None`` when that matrix is not positive definite."""
    info = np.asarray(H) / (2.0 * sigma2)
    try:
        np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        return None
    return np.linalg.inv(info)


# -- starting values ----------------------------------------------------------


@dataclass(frozen=True)
class StartValues:
    params: np.ndarray
    fallback: bool = False


def initial_params(series, spec: ArimaSpec) -> StartValues:
    """Warm start: sample mean, Yule-Walker AR, Hannan-Rissanen MA, clamped to |pacf| <= 0.995.

    ``series`` is the already differenced data.
    """
    w = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=np.float64)
    mu = float(w.mean()) if spec.include_constant else 0.0
    dev = w - mu
    n = w.size
    a = np.zeros(spec.p)
    b = np.zeros(spec.q)
    fallback = False
    try:
        if spec.p:
            a = durbin_levinson(acf(dev, spec.p))[1]
        if spec.q:
            b = _hannan_rissanen_ma(dev, spec.p, spec.q)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise np.linalg.LinAlgError("non-finite start")
    except (np.linalg.LinAlgError, InsufficientDataError, DegenerateSeriesError, ValueError):
        a = np.full(spec.p, 0.1)
        b = np.full(spec.q, 0.1)
        fallback = True
    a = _clamp_poly(a, START_CLAMP, 1.0)
    b = _clamp_poly(b, START_CLAMP, -1.0)
    if n == 0:
        fallback = True
    return StartValues(_pack(mu, a, b, spec), fallback)


def _hannan_rissanen_ma(dev: np.ndarray, p: int, q: int) -> np.ndarray:
    n = dev.size
    m = int(min(max(p + q + 1, round(10 * math.log10(n))), n // 4))
    if m < 1 or n - m - q <= p + q + 1:
        raise np.linalg.LinAlgError("series too short for Hannan-Rissanen")
    long_ar = durbin_levinson(acf(dev, m))[1]
    ehat = dev[m:].copy()
    for i in range(1, m + 1):
        ehat -= long_ar[i - 1] * dev[m - i:n - i]
    # ehat[k] is the innovation at time m + k
    start = m + q
    rows = n - start
    X = np.empty((rows, p + q))
    for i in range(1, p + 1):
        X[:, i - 1] = dev[start - i:n - i]
    for j in range(1, q + 1):
        X[:, p + j - 1] = ehat[start - j - m:n - j - m]
    coef, *_ = np.linalg.lstsq(X, dev[start:], rcond=None)
    return coef[p:]


# -- the fit ------------------------------------------------------------------


@dataclass(frozen=True)
class ParamRow:
    name: str
    estimate: float
    se: float
    t: float
    p_value: float


@dataclass(frozen=True, eq=False)
class ArimaFit:
    """Estimated ARIMA model.

    ``ar`` and ``ma`` are in model convention (MA with a plus sign). ``se``,
    ``cov`` and ``params`` follow the internal ordering ``[mean, ar..., ma...]``.
    """

    spec: ArimaSpec
    series: TimeSeries
    differenced: np.ndarray
    params: np.ndarray
    mean: float | None
    ar: np.ndarray
    ma: np.ndarray
    se: np.ndarray
    cov: np.ndarray | None
    residuals: np.ndarray
    css: float
    sigma2: float
    n_obs: int
    n_terms: int
    log_likelihood: float
    aic: float
    bic: float
    converged: bool
    iterations: int
    se_available: bool
    ma_sign: str = "spss"
    message: str = ""
    start_fallback: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def n_cond(self) -> int:
        return self.spec.p

    @property
    def innovations(self) -> np.ndarray:
        """Residuals that enter the sum of squares (drops the ``p`` conditioning zeros)."""
        return self.residuals[self.n_cond:]

    @property
    def intercept(self) -> float | None:
        if self.mean is None:
            return None
        return float(self.mean * (1.0 - self.ar.sum()))

    @property
    def intercept_se(self) -> float | None:
        if self.mean is None or not self.se_available:
            return None
        g = np.zeros(self.params.size)
        g[0] = 1.0 - self.ar.sum()
        g[1:1 + self.spec.p] = -self.mean
        return float(math.sqrt(g @ self.cov @ g))

    @property
    def df_resid(self) -> int:
        return self.n_obs - self.spec.n_params

    @property
    def stationary_fit(self) -> bool:
        return is_stationary(self.ar)

    @property
    def invertible_fit(self) -> bool:
        return is_invertible(self.ma)

    @property
    def ma_reported(self) -> np.ndarray:
        return -self.ma if self.ma_sign == "spss" else self.ma.copy()

    def with_ma_sign(self, ma_sign: str) -> ArimaFit:
        if ma_sign not in MA_SIGNS:
            raise InputError(f"ma_sign must be one of {MA_SIGNS}")
        return replace(self, ma_sign=ma_sign)

    def coefficient_table(self) -> list[ParamRow]:
        """Rows ``Constant``, ``AR Lag i``, ``MA Lag j`` in the reporting convention.

        ``Constant`` is the process mean of the (differenced) series.
        """
        flip = np.ones(self.params.size)
        if self.ma_sign == "spss" and self.spec.q:
            flip[-self.spec.q:] = -1.0
        rows = []
        for name, est, se in zip(self.spec.param_names(), self.params * flip, self.se):
            if self.se_available and se > 0:
                t = float(est / se)
                pv = t_two_sided(t, max(self.df_resid, 1))
            else:
                t = pv = math.nan
            rows.append(ParamRow(name, float(est), float(se), t, pv))
        return rows

    @property
    def t_stat(self) -> np.ndarray:
        return np.array([r.t for r in self.coefficient_table()])

    @property
    def p_value(self) -> np.ndarray:
        return np.array([r.p_value for r in self.coefficient_table()])

    def table_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Model", "Parameter", "Estimate", "SE", "t", "Sig."])
        for r in self.coefficient_table():
            w.writerow([self.spec.label, r.name, _num(r.estimate), _num(r.se), _num(r.t), _num(r.p_value)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "spec": {"p": self.spec.p, "d": self.spec.d, "q": self.spec.q,
                     "include_constant": self.spec.include_constant, "label": self.spec.label},
            "ma_sign": self.ma_sign,
            "parameters": [
                {"name": r.name, "estimate": _jnum(r.estimate), "se": _jnum(r.se),
                 "t": _jnum(r.t), "p_value": _jnum(r.p_value)}
                for r in self.coefficient_table()
            ],
            "mean": _jnum(self.mean),
            "intercept": _jnum(self.intercept),
            "intercept_se": _jnum(self.intercept_se),
            "ar": [float(v) for v in self.ar],
            "ma_model_convention": [float(v) for v in self.ma],
            "sigma2": self.sigma2,
            "css": self.css,
            "n_obs": self.n_obs,
            "n_terms": self.n_terms,
            "df_resid": self.df_resid,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "bic": self.bic,
            "converged": self.converged,
            "iterations": self.iterations,
            "se_available": self.se_available,
            "stationary_fit": self.stationary_fit,
            "invertible_fit": self.invertible_fit,
            "start_fallback": self.start_fallback,
            "message": self.message,
            "notes": list(self.notes),
        }


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def _jnum(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) or math.isinf(x) else x


def information_criteria(css_value: float, n_terms: int, n_params: int) -> tuple[float, float, float]:
    """Gaussian log-likelihood at ``sigma2 = css / n`` and AIC/BIC with ``k = n_params + 1``."""
    sigma2 = css_value / n_terms
    loglik = -0.5 * n_terms * (math.log(2.0 * math.pi * sigma2) + 1.0)
    k = n_params + 1
    return loglik, -2.0 * loglik + 2.0 * k, -2.0 * loglik + k * math.log(n_terms)


def fit(series: TimeSeries, spec: ArimaSpec, options: FitOptions | None = None, start=None) -> ArimaFit:
    """Fit ``spec`` to ``series`` by conditional sum of squares.

    Non-convergence is reported through ``converged=False``, never raised.
    """
    options = options or FitOptions()
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series)
    w = difference(series, spec.d).values if spec.d else series.values
    n = w.size
    n_terms = n - spec.p
    k = spec.n_params
    if n_terms <= k:
        raise InsufficientDataError(f"{spec.label} needs more than {k + spec.p} observations after differencing, got {n}")
    if np.ptp(w) == 0.0:
        raise DegenerateSeriesError("series has zero variance after differencing")
    notes = []
    if n < 10 * (spec.p + spec.q + 1):
        notes.append(f"only {n} observations for {spec.p + spec.q + 1} ARMA terms; estimates may be unreliable")

    sv = initial_params(w, spec) if start is None else StartValues(np.asarray(start, dtype=np.float64))
    if sv.fallback:
        notes.append("starting values fell back to 0.1 per coefficient")

    if spec.p == 0 and spec.q == 0:
        # Constant only: least squares is the sample mean.
        params = np.array([w.mean()])
        converged, iterations, message = True, 0, "closed form"
    else:
        params, converged, iterations, message = _optimize(w, spec, options, sv.params)

    u = css_residuals(w, params, spec)
    S = float(np.dot(u, u))
    if not S > 0.0:
        raise DegenerateSeriesError("model reproduces the data exactly; innovation variance is zero")
    sigma2 = S / n_terms
    loglik, aic, bic = information_criteria(S, n_terms, k)

    H = hessian_second_differences(lambda th: css(w, th, spec), params)
    cov = covariance_from_hessian(H, sigma2)
    if cov is None or np.any(np.diag(cov) <= 0):
        se = np.full(k, math.nan)
        cov = None
        notes.append("Hessian not positive definite; standard errors unavailable")
    else:
        se = np.sqrt(np.diag(cov))

    mu, a, b = _unpack(params, spec)
    residuals = np.r_[np.zeros(spec.p), u]
    return ArimaFit(
        spec=spec,
        series=series,
        differenced=np.array(w),
        params=params,
        mean=float(mu) if spec.include_constant else None,
        ar=np.array(a),
        ma=np.array(b),
        se=se,
        cov=cov,
        residuals=residuals,
        css=S,
        sigma2=sigma2,
        n_obs=n,
        n_terms=n_terms,
        log_likelihood=loglik,
        aic=aic,
        bic=bic,
        converged=bool(converged),
        iterations=int(iterations),
        se_available=cov is not None,
        ma_sign=options.ma_sign,
        message=message,
        start_fallback=sv.fallback,
        notes=tuple(notes),
    )


def _optimize(w, spec: ArimaSpec, options: FitOptions, start):
    tr = _Transform(spec, options)
    objective = lambda x: css(w, tr.to_natural(x), spec)  # noqa: E731

    def free_grad(x):
        g = css_gradient(w, tr.to_natural(x), spec)
        return tr.jacobian(x).T @ g

    x0 = tr.to_free(start)
    k = x0.size
    scale = max(objective(x0), 1e-300)
    # np.errstate is thread-local; warnings.catch_warnings is not, and fits run in threads.
    with np.errstate(all="ignore"):
        nm = optimize.minimize(
            objective, x0, method="Nelder-Mead",
            options={"maxiter": options.max_iter, "xatol": 1e-8, "fatol": options.ftol * scale,
                     "adaptive": k > 2},
        )
        bf = optimize.minimize(
            objective, nm.x, jac=free_grad, method="L-BFGS-B",
            options={"maxiter": options.max_iter, "ftol": options.ftol, "gtol": 1e-10 * max(1.0, nm.fun)},
        )
    x = bf.x if bf.fun <= nm.fun else nm.x
    params = tr.to_natural(x)
    iterations = nm.nit + bf.nit

    params, steps, grad_ok = _newton_polish(w, spec, tr, params, options)
    iterations += steps
    S = css(w, params, spec)
    converged = grad_ok or (nm.success and (bf.success or abs(bf.fun - nm.fun) <= options.ftol * max(1.0, S)))
    if iterations >= 2 * options.max_iter and not grad_ok:
        converged = False
    message = "gradient ~ 0" if grad_ok else (bf.message if isinstance(bf.message, str) else str(bf.message))
    return params, converged, iterations, message


def _newton_polish(w, spec, tr: _Transform, params, options: FitOptions, max_steps: int = 20):
    """Newton steps on the natural parameters using the analytic gradient."""
    grad = lambda th: css_gradient(w, th, spec)  # noqa: E731
    S = css(w, params, spec)
    steps = 0
    for _ in range(max_steps):
        g = grad(params)
        if np.all(np.abs(g) <= 1e-7 * (1.0 + S)):
            return params, steps, True
        H = hessian_from_gradient(grad, params)
        try:
            delta = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        improved = False
        while t > 1e-6:
            cand = params - t * delta
            if tr.admissible(cand):
                S_c = css(w, cand, spec)
                if S_c <= S:
                    improved = True
                    break
            t *= 0.5
        if not improved:
            break
        rel = (S - S_c) / max(S, 1e-300)
        params, S = cand, S_c
        steps += 1
        if rel <= options.ftol and np.all(np.abs(grad(params)) <= 1e-5 * (1.0 + S)):
            return params, steps, True
    g = grad(params)
    return params, steps, bool(np.all(np.abs(g) <= 1e-5 * (1.0 + S)))
