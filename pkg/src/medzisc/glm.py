"""Self-contained regression engines.

Four estimators drive every model in the pipeline: ordinary least squares
for the outcome, beta regression (logit mean link, constant precision) for
zero proportions, negative-binomial regression (log link, scalar dispersion)
for mean expression, and an L1-penalized linear model for outcome screening.
Coefficient tests use the standard normal reference throughout, so a single
Wald helper serves all of them.

The beta and NB log-likelihoods and their analytic score vectors are public
so they can be checked against finite differences independently of the
fitting loops.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, expit, gammaln, ndtr, polygamma, xlogy

from .exceptions import (
    DegenerateResponseError,
    DomainError,
    SingularDesignError,
)

MAX_NEWTON_ITER = 200
MAX_CD_SWEEPS = 10_000
CD_TOL = 1e-7
THETA_CAP = 1e6
THETA_FLOOR = 1e-4
PHI_CAP = 1e8
PHI_FLOOR = 1e-6

# Linear predictors are clipped before exponentiation; beyond this range the
# likelihood is flat to double precision anyway.
_ETA_CLIP = 500.0


@dataclass(frozen=True)
class DesignMatrix:
    """Named design matrix. All entries must be finite."""

    values: np.ndarray
    names: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DomainError("design matrix must be 2-d")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        if values.shape[1] != len(self.names):
            raise DomainError("one name per design column is required")
        if len(set(self.names)) != len(self.names):
            raise DomainError("design column names must be unique")
        if values.size and not np.all(np.isfinite(values)):
            raise DomainError("design matrix contains non-finite entries")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]


def build_design(columns, intercept: bool = True) -> DesignMatrix:
    """Assemble a DesignMatrix from (name, column) pairs, optionally prepending an intercept."""
    cols = []
    names = []
    if intercept:
        names.append("intercept")
    for name, col in columns:
        col = np.asarray(col, dtype=float)
        if col.ndim != 1:
            raise DomainError(f"column {name!r} must be 1-d")
        names.append(name)
        cols.append(col)
    if not cols:
        raise DomainError("at least one non-intercept column is required")
    n = cols[0].shape[0]
    stacked = [np.ones(n)] if intercept else []
    stacked.extend(cols)
    return DesignMatrix(np.column_stack(stacked), tuple(names))


@dataclass(frozen=True)
class RegressionFit:
    """Result of a single regression fit.

    ``aux`` holds the family-specific nuisance estimate: ``residual_var``
    for OLS, ``precision`` for beta regression, ``dispersion`` (plus a
    ``near_poisson`` flag) for NB regression. ``ll_trace`` records the
    log-likelihood after every accepted iteration step and is non-decreasing
    by construction.
    """

    names: tuple
    coefficients: np.ndarray
    standard_errors: np.ndarray
    p_values: np.ndarray
    aux: dict
    converged: bool
    iterations: int
    log_likelihood: float
    ll_trace: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        for attr in ("coefficients", "standard_errors", "p_values"):
            arr = np.asarray(getattr(self, attr), dtype=float)
            if arr.shape != (len(self.names),):
                raise DomainError(f"{attr} must align with coefficient names")
            object.__setattr__(self, attr, arr)
        finite_p = self.p_values[np.isfinite(self.p_values)]
        if finite_p.size and (finite_p.min() < 0 or finite_p.max() > 1):
            raise DomainError("p-values must lie in [0, 1]")

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def stderr(self, name: str) -> float:
        return float(self.standard_errors[self.names.index(name)])

    def p_value(self, name: str) -> float:
        return float(self.p_values[self.names.index(name)])

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "coefficients": self.coefficients.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "p_values": self.p_values.tolist(),
            "aux": {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v)) for k, v in self.aux.items()},
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "log_likelihood": float(self.log_likelihood),
        }


@dataclass(frozen=True)
class LassoFit:
    """L1-penalized linear fit. Coefficients are on the original data scale."""

    names: tuple
    coefficients: np.ndarray
    lam: float
    selected: tuple
    unpenalized: tuple
    n_sweeps: int
    converged: bool
    objective_trace: tuple = ()
    cv_lambdas: tuple = ()
    cv_errors: tuple = ()

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "coefficients": self.coefficients.tolist(),
            "lambda": self.lam,
            "selected": list(self.selected),
            "unpenalized": list(self.unpenalized),
            "n_sweeps": self.n_sweeps,
            "converged": bool(self.converged),
        }


def wald_pvalue(estimate: float, se: float) -> float:
    """Two-sided p-value of estimate/se against the standard normal."""
    if not np.isfinite(estimate):
        raise DomainError("estimate must be finite")
    if not np.isfinite(se) or se <= 0:
        raise DomainError("standard error must be positive and finite")
    return float(2.0 * ndtr(-abs(estimate) / se))


def _check_full_rank(X: DesignMatrix) -> None:
    """Raise SingularDesignError naming the dependent columns."""
    values = X.values
    if values.shape[0] < values.shape[1]:
        raise SingularDesignError(X.names)
    # Column norms scale the tolerance so wildly different units are fine.
    scale = np.linalg.norm(values, axis=0)
    scale[scale == 0] = 1.0
    scaled = values / scale
    rank = np.linalg.matrix_rank(scaled)
    if rank == values.shape[1]:
        return
    # Greedy pass: a column is an offender if it adds no rank.
    offenders = []
    kept: list[int] = []
    for j in range(values.shape[1]):
        trial = scaled[:, kept + [j]]
        if np.linalg.matrix_rank(trial) == len(kept) + 1:
            kept.append(j)
        else:
            offenders.append(X.names[j])
    raise SingularDesignError(offenders)


def _pvalues_from(coef: np.ndarray, se: np.ndarray) -> np.ndarray:
    """Wald p-values tolerating the exact-fit edge where SEs are zero."""
    p = np.empty_like(coef)
    for i, (b, s) in enumerate(zip(coef, se)):
        if not np.isfinite(s) or s <= 0:
            p[i] = np.nan if not np.isfinite(s) else (1.0 if b == 0 else 0.0)
        else:
            p[i] = wald_pvalue(b, s)
    return p


def fit_ols(y: np.ndarray, X: DesignMatrix) -> RegressionFit:
    """Ordinary least squares with normal-reference Wald p-values."""
    y = np.asarray(y, dtype=float)
    n, p = X.values.shape
    if y.shape != (n,):
        raise DomainError("response length does not match the design")
    if not np.all(np.isfinite(y)):
        raise DomainError("response contains non-finite values")
    if n <= p:
        raise DomainError(f"need more observations ({n}) than predictors ({p})")
    _check_full_rank(X)

    coef, _, _, _ = np.linalg.lstsq(X.values, y, rcond=None)
    resid = y - X.values @ coef
    rss = float(resid @ resid)
    resid_var = rss / (n - p)
    xtx_inv = np.linalg.inv(X.values.T @ X.values)
    se = np.sqrt(np.maximum(np.diag(xtx_inv) * resid_var, 0.0))
    pvals = _pvalues_from(coef, se)
    sigma2_mle = rss / n
    ll = np.inf if sigma2_mle == 0 else -0.5 * n * (np.log(2 * np.pi * sigma2_mle) + 1.0)
    return RegressionFit(
        names=X.names,
        coefficients=coef,
        standard_errors=se,
        p_values=pvals,
        aux={"residual_var": resid_var},
        converged=True,
        iterations=1,
        log_likelihood=ll,
        ll_trace=(ll,),
    )


# ---------------------------------------------------------------------------
# Beta regression
# ---------------------------------------------------------------------------

def beta_loglike(y: np.ndarray, X: DesignMatrix, beta: np.ndarray, phi: float) -> float:
    """Log-likelihood of a logit-link beta regression with constant precision."""
    mu = expit(np.clip(X.values @ beta, -_ETA_CLIP, _ETA_CLIP))
    a = np.clip(mu * phi, 1e-300, None)
    b = np.clip((1.0 - mu) * phi, 1e-300, None)
    ll = (
        gammaln(phi)
        - gammaln(a)
        - gammaln(b)
        + (a - 1.0) * np.log(y)
        + (b - 1.0) * np.log1p(-y)
    )
    return float(np.sum(ll))


def beta_score(y: np.ndarray, X: DesignMatrix, beta: np.ndarray, phi: float) -> np.ndarray:
    """Analytic score of `beta_loglike` with respect to (beta, phi)."""
    mu = expit(np.clip(X.values @ beta, -_ETA_CLIP, _ETA_CLIP))
    a = np.clip(mu * phi, 1e-300, None)
    b = np.clip((1.0 - mu) * phi, 1e-300, None)
    ystar = np.log(y) - np.log1p(-y)
    mustar = digamma(a) - digamma(b)
    d_beta = X.values.T @ (phi * (ystar - mustar) * mu * (1.0 - mu))
    d_phi = np.sum(mu * (ystar - mustar) + np.log1p(-y) - digamma(b) + digamma(phi))
    return np.concatenate([d_beta, [d_phi]])


def _numeric_hessian(score_fn, params: np.ndarray) -> np.ndarray:
    """Observed information via central differences of an analytic score."""
    k = params.size
    H = np.empty((k, k))
    for j in range(k):
        h = 1e-6 * max(1.0, abs(params[j]))
        up = params.copy()
        dn = params.copy()
        up[j] += h
        dn[j] -= h
        H[:, j] = (score_fn(up) - score_fn(dn)) / (2.0 * h)
    return 0.5 * (H + H.T)


def _ascent_step(ll_fn, params, direction, ll_cur):
    """Backtracking line search guaranteeing a non-decreasing log-likelihood."""
    t = 1.0
    while t > 1e-12:
        trial = params + t * direction
        ll_trial = ll_fn(trial)
        if np.isfinite(ll_trial) and ll_trial >= ll_cur - 1e-12:
            return trial, ll_trial, t
        t *= 0.5
    return params, ll_cur, 0.0


def fit_beta_regression(y: np.ndarray, X: DesignMatrix, max_iter: int = MAX_NEWTON_ITER) -> RegressionFit:
    """Maximum-likelihood beta regression: logit(mu) = X beta, Beta(mu*phi, (1-mu)*phi).

    The response must lie strictly inside (0, 1); clamp zero proportions
    first. Standard errors come from the inverse observed information.
    """
    y = np.asarray(y, dtype=float)
    n, p = X.values.shape
    if y.shape != (n,):
        raise DomainError("response length does not match the design")
    if np.any(y <= 0.0) or np.any(y >= 1.0) or not np.all(np.isfinite(y)):
        raise DomainError("beta regression requires responses strictly inside (0, 1)")
    if n <= p:
        raise DomainError(f"need more observations ({n}) than predictors ({p})")
    _check_full_rank(X)

    # Warm start: OLS on the logit scale, method-of-moments precision.
    ylogit = np.log(y) - np.log1p(-y)
    beta0, _, _, _ = np.linalg.lstsq(X.values, ylogit, rcond=None)
    mu0 = expit(np.clip(X.values @ beta0, -_ETA_CLIP, _ETA_CLIP))
    var_e = float(np.mean((y - mu0) ** 2))
    if var_e > 0:
        phi0 = float(np.mean(mu0 * (1.0 - mu0)) / var_e - 1.0)
    else:
        phi0 = 100.0
    phi0 = float(np.clip(phi0, 1.0, PHI_CAP / 10))

    def unpack(params):
        return params[:p], float(np.exp(np.clip(params[p], -745.0, 700.0)))

    def ll_fn(params):
        b, phi = unpack(params)
        if not (PHI_FLOOR <= phi <= PHI_CAP):
            return -np.inf
        return beta_loglike(y, X, b, phi)

    def score_fn(params):
        b, phi = unpack(params)
        s = beta_score(y, X, b, phi)
        s[p] *= phi  # chain rule for the log-precision parameterization
        return s

    params = np.concatenate([beta0, [np.log(phi0)]])
    ll_cur = ll_fn(params)
    trace = [ll_cur]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = score_fn(params)
        H = _numeric_hessian(score_fn, params)
        try:
            direction = np.linalg.solve(-H, g)
        except np.linalg.LinAlgError:
            direction = g
        if not np.all(np.isfinite(direction)) or float(g @ direction) <= 0.0:
            direction = g
        new, ll_new, step = _ascent_step(ll_fn, params, direction, ll_cur)
        delta = np.max(np.abs(new - params))
        params, ll_cur = new, ll_new
        trace.append(ll_cur)
        at_cap = params[p] >= np.log(PHI_CAP) - 1e-9
        if delta < 1e-9 * (1.0 + np.max(np.abs(params))) or at_cap:
            g_now = score_fn(params)
            check = g_now[:p] if at_cap else g_now
            converged = bool(np.max(np.abs(check), initial=0.0) < 1e-5 * (1.0 + abs(ll_cur)))
            break

    beta_hat, phi_hat = unpack(params)
    H = _numeric_hessian(score_fn, params)
    se = np.full(p, np.nan)
    try:
        cov = np.linalg.inv(-H)
        diag = np.diag(cov)[:p]
        if np.all(np.isfinite(diag)) and np.all(diag > 0):
            se = np.sqrt(diag)
        else:
            converged = False
    except np.linalg.LinAlgError:
        converged = False
    pvals = _pvalues_from(beta_hat, se)
    return RegressionFit(
        names=X.names,
        coefficients=beta_hat,
        standard_errors=se,
        p_values=pvals,
        aux={"precision": phi_hat},
        converged=bool(converged),
        iterations=it,
        log_likelihood=ll_cur,
        ll_trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# Negative binomial regression
# ---------------------------------------------------------------------------

def nb_loglike(y: np.ndarray, X: DesignMatrix, beta: np.ndarray, theta: float) -> float:
    """NB log-likelihood with log(mu) = X beta and variance mu + mu^2/theta.

    Evaluated through log-gamma functions, so non-integer responses
    (per-subject mean counts) are accepted.
    """
    mu = np.exp(np.clip(X.values @ beta, -_ETA_CLIP, _ETA_CLIP))
    ll = (
        gammaln(y + theta)
        - gammaln(theta)
        - gammaln(y + 1.0)
        + theta * (np.log(theta) - np.log(theta + mu))
        + xlogy(y, mu)
        - y * np.log(theta + mu)
    )
    return float(np.sum(ll))


def nb_score(y: np.ndarray, X: DesignMatrix, beta: np.ndarray, theta: float) -> np.ndarray:
    """Analytic score of `nb_loglike` with respect to (beta, theta)."""
    mu = np.exp(np.clip(X.values @ beta, -_ETA_CLIP, _ETA_CLIP))
    d_beta = X.values.T @ (theta * (y - mu) / (theta + mu))
    d_theta = np.sum(
        digamma(y + theta)
        - digamma(theta)
        + np.log(theta)
        - np.log(theta + mu)
        + 1.0
        - (y + theta) / (theta + mu)
    )
    return np.concatenate([d_beta, [d_theta]])


def _nb_dll_dtheta(y, mu, theta):
    return float(
        np.sum(
            digamma(y + theta)
            - digamma(theta)
            + np.log(theta)
            - np.log(theta + mu)
            + 1.0
            - (y + theta) / (theta + mu)
        )
    )


def _nb_d2ll_dtheta2(y, mu, theta):
    return float(
        np.sum(
            polygamma(1, y + theta)
            - polygamma(1, theta)
            + 1.0 / theta
            - 1.0 / (theta + mu)
            - (mu - y) / (theta + mu) ** 2
        )
    )


def _profile_theta(y, mu, theta, ll_fn):
    """Maximize the NB log-likelihood over theta at fixed mu.

    Newton steps on log(theta) with step-halving; falls back to bisection on
    the first derivative when Newton stalls. A dispersion walking past the
    cap means the fit is indistinguishable from Poisson.
    """
    if _nb_dll_dtheta(y, mu, THETA_CAP) >= 0.0:
        return THETA_CAP, True
    if _nb_dll_dtheta(y, mu, THETA_FLOOR) <= 0.0:
        return THETA_FLOOR, False

    s = np.log(theta)
    ll_cur = ll_fn(np.exp(s))
    for _ in range(100):
        th = np.exp(s)
        d1 = _nb_dll_dtheta(y, mu, th)
        d2 = _nb_d2ll_dtheta2(y, mu, th)
        ds = th * d1  # dll/ds
        d2s = th * th * d2 + ds  # d2ll/ds2
        step = -ds / d2s if d2s < 0 else np.sign(ds)
        step = float(np.clip(step, -5.0, 5.0))
        t = 1.0
        improved = False
        while t > 1e-12:
            s_new = float(np.clip(s + t * step, np.log(THETA_FLOOR), np.log(THETA_CAP)))
            ll_new = ll_fn(np.exp(s_new))
            if ll_new >= ll_cur - 1e-12:
                improved = abs(s_new - s) > 0
                s, ll_cur = s_new, ll_new
                break
            t *= 0.5
        if not improved or abs(t * step) < 1e-10:
            break
    theta = float(np.exp(s))
    if abs(_nb_dll_dtheta(y, mu, theta)) > 1e-6 * (1.0 + abs(ll_cur)):
        # Bisection rescue on the monotone region around the root.
        lo, hi = THETA_FLOOR, THETA_CAP
        for _ in range(200):
            mid = np.sqrt(lo * hi)
            if _nb_dll_dtheta(y, mu, mid) > 0:
                lo = mid
            else:
                hi = mid
            if hi / lo < 1.0 + 1e-10:
                break
        theta = float(np.sqrt(lo * hi))
    return theta, theta >= THETA_CAP * (1.0 - 1e-9)


def fit_nb_regression(y: np.ndarray, X: DesignMatrix, max_iter: int = MAX_NEWTON_ITER) -> RegressionFit:
    """Maximum-likelihood NB regression via alternating IRLS and profile dispersion.

    Beta is updated by iteratively reweighted least squares given theta, and
    theta by one-dimensional Newton (bisection fallback) on the profile
    likelihood, with step-halving so the log-likelihood never decreases.
    Standard errors come from the observed information of beta at the
    optimum.
    """
    y = np.asarray(y, dtype=float)
    n, p = X.values.shape
    if y.shape != (n,):
        raise DomainError("response length does not match the design")
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise DomainError("NB regression requires a nonnegative response")
    if np.all(y == 0):
        raise DegenerateResponseError("response is zero for every observation")
    if n <= p:
        raise DomainError(f"need more observations ({n}) than predictors ({p})")
    _check_full_rank(X)

    # Warm start on the log scale; zeros are nudged by a small fraction of the mean.
    shift = max(float(np.mean(y)) * 0.1, 1e-8)
    beta = np.linalg.lstsq(X.values, np.log(y + shift), rcond=None)[0]
    mu = np.exp(np.clip(X.values @ beta, -_ETA_CLIP, _ETA_CLIP))
    mbar = float(np.mean(mu))
    excess = float(np.mean((y - mu) ** 2)) - mbar
    theta = float(np.clip(mbar**2 / excess if excess > 0 else THETA_CAP, THETA_FLOOR, THETA_CAP))

    def ll_at(b, th):
        return nb_loglike(y, X, b, th)

    ll_cur = ll_at(beta, theta)
    trace = [ll_cur]
    converged = False
    near_poisson = theta >= THETA_CAP * (1.0 - 1e-9)
    it = 0
    for it in range(1, max_iter + 1):
        beta_prev, theta_prev = beta.copy(), theta

        # IRLS update of beta at fixed theta, halved toward the previous
        # point whenever the likelihood would drop.
        for _ in range(50):
            eta = np.clip(X.values @ beta, -_ETA_CLIP, _ETA_CLIP)
            mu = np.exp(eta)
            w = mu * theta / (theta + mu)
            z = eta + (y - mu) / mu
            wx = X.values * w[:, None]
            try:
                beta_new = np.linalg.solve(X.values.T @ wx, wx.T @ z)
            except np.linalg.LinAlgError:
                break
            direction = beta_new - beta
            beta_trial, ll_new, step = _ascent_step(
                lambda b: ll_at(b, theta), beta, direction, ll_cur
            )
            moved = np.max(np.abs(beta_trial - beta))
            beta, ll_cur = beta_trial, ll_new
            trace.append(ll_cur)
            if step == 0.0 or moved < 1e-10 * (1.0 + np.max(np.abs(beta))):
                break

        mu = np.exp(np.clip(X.values @ beta, -_ETA_CLIP, _ETA_CLIP))
        theta, near_poisson = _profile_theta(y, mu, theta, lambda th: ll_at(beta, th))
        ll_cur = ll_at(beta, theta)
        trace.append(ll_cur)

        beta_move = np.max(np.abs(beta - beta_prev)) / (1.0 + np.max(np.abs(beta)))
        theta_move = abs(np.log(theta) - np.log(theta_prev))
        if beta_move < 1e-9 and theta_move < 1e-9:
            converged = True
            break

    mu = np.exp(np.clip(X.values @ beta, -_ETA_CLIP, _ETA_CLIP))
    info = X.values.T @ (X.values * (theta * mu * (theta + y) / (theta + mu) ** 2)[:, None])
    se = np.full(p, np.nan)
    try:
        cov = np.linalg.inv(info)
        diag = np.diag(cov)
        if np.all(np.isfinite(diag)) and np.all(diag > 0):
            se = np.sqrt(diag)
        else:
            converged = False
    except np.linalg.LinAlgError:
        converged = False
    pvals = _pvalues_from(beta, se)
    return RegressionFit(
        names=X.names,
        coefficients=beta,
        standard_errors=se,
        p_values=pvals,
        aux={"dispersion": theta, "near_poisson": bool(near_poisson)},
        converged=bool(converged),
        iterations=it,
        log_likelihood=ll_cur,
        ll_trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# Lasso
# ---------------------------------------------------------------------------

def soft_threshold(x: float, t: float) -> float:
    return float(np.sign(x) * max(abs(x) - t, 0.0))


def _cd_solve(P, r, beta, lam, tol, max_sweeps, objective_trace=None):
    """Coordinate descent on standardized columns (var 1 under the 1/n norm).

    ``r`` is the current residual and is updated in place together with
    ``beta``. Returns the number of sweeps used and a convergence flag.
    Active-set sweeps run between full sweeps, which keeps the cost
    proportional to the number of nonzero coefficients along a path.
    """
    n = r.shape[0]
    k = P.shape[1]
    sweeps = 0

    def sweep(indices):
        max_delta = 0.0
        for j in indices:
            xj = P[:, j]
            bj = beta[j]
            rho = (xj @ r) / n + bj
            bnew = soft_threshold(rho, lam)
            if bnew != bj:
                np.add(r, xj * (bj - bnew), out=r)
                beta[j] = bnew
                max_delta = max(max_delta, abs(bnew - bj))
        return max_delta

    def record():
        if objective_trace is not None:
            obj = float(r @ r) / (2.0 * n) + lam * float(np.sum(np.abs(beta)))
            objective_trace.append(obj)

    record()
    all_idx = range(k)
    while sweeps < max_sweeps:
        sweeps += 1
        delta = sweep(all_idx)
        record()
        if delta < tol:
            return sweeps, True
        active = np.flatnonzero(beta)
        while sweeps < max_sweeps and active.size:
            sweeps += 1
            delta = sweep(active)
            record()
            if delta < tol:
                break
    return sweeps, sweeps < max_sweeps


def fit_lasso(
    y: np.ndarray,
    X: DesignMatrix,
    unpenalized=(),
    lam: float | None = None,
    cv_folds: int = 10,
    n_lambdas: int = 100,
    lambda_min_ratio: float = 1e-3,
    cv_rule: str = "1se",
    seed: int = 0,
    tol: float = CD_TOL,
    max_sweeps: int = MAX_CD_SWEEPS,
) -> LassoFit:
    """L1-penalized least squares by coordinate descent.

    Penalized columns are standardized internally and coefficients reported
    on the original scale; an intercept is always fitted implicitly (do not
    pass a constant column). Columns named in ``unpenalized`` are exempt
    from the penalty. With ``lam=None`` the penalty is chosen by K-fold
    cross-validation over a log-spaced path from lambda_max down to
    ``lambda_min_ratio * lambda_max``, with folds drawn deterministically
    from ``seed``. ``cv_rule`` picks either the error-minimizing penalty
    ("min") or the largest penalty within one standard error of that
    minimum ("1se", the usual cross-validation default, which avoids the
    overselection that a flat error curve invites).
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if X.n_rows != n:
        raise DomainError("response length does not match the design")
    if n < 2:
        raise DomainError("lasso requires at least two observations")
    if lam is not None and (not np.isfinite(lam) or lam < 0):
        raise DomainError("lambda must be nonnegative")
    unpenalized = tuple(unpenalized)
    unknown = [u for u in unpenalized if u not in X.names]
    if unknown:
        raise DomainError("unpenalized names not in the design: " + ", ".join(unknown))

    pen_names = [nm for nm in X.names if nm not in unpenalized]
    u_idx = [X.names.index(nm) for nm in unpenalized]
    p_idx = [X.names.index(nm) for nm in pen_names]
    U = X.values[:, u_idx]
    P = X.values[:, p_idx]

    const_pen = [nm for j, nm in enumerate(pen_names) if P.size and np.ptp(P[:, j]) == 0]
    if const_pen:
        warnings.warn(
            "dropping constant penalized columns: " + ", ".join(const_pen),
            stacklevel=2,
        )

    prob = _build_partial(y, U, P)
    lam_max = prob["lambda_max"]

    if cv_rule not in ("min", "1se"):
        raise DomainError("cv_rule must be 'min' or '1se'")
    cv_lambdas: tuple = ()
    cv_errors: tuple = ()
    if lam is None:
        if lam_max == 0.0:
            lam = 0.0
        else:
            lambdas = np.geomspace(lam_max, lam_max * lambda_min_ratio, n_lambdas)
            errors, err_se = _cv_path_errors(y, U, P, lambdas, cv_folds, seed, tol, max_sweeps)
            best = int(np.argmin(errors))
            if cv_rule == "1se":
                cutoff = errors[best] + err_se[best]
                best = int(np.flatnonzero(errors <= cutoff)[0])  # largest lambda within 1 SE
            lam = float(lambdas[best])
            cv_lambdas = tuple(float(v) for v in lambdas)
            cv_errors = tuple(float(v) for v in errors)

    beta_std = np.zeros(P.shape[1])
    objective_trace: list = []
    r = prob["y_res"].copy()
    sweeps, converged = _cd_solve(
        prob["P_std"], r, beta_std, lam, tol, max_sweeps, objective_trace
    )
    intercept, b_u, b_p = _to_original(prob, y, U, P, beta_std)

    names = ("intercept",) + tuple(unpenalized) + tuple(pen_names)
    coefficients = np.concatenate([[intercept], b_u, b_p])
    selected = tuple(nm for nm, b in zip(pen_names, b_p) if b != 0.0)
    return LassoFit(
        names=names,
        coefficients=coefficients,
        lam=float(lam),
        selected=selected,
        unpenalized=tuple(unpenalized),
        n_sweeps=sweeps,
        converged=converged,
        objective_trace=tuple(objective_trace),
        cv_lambdas=cv_lambdas,
        cv_errors=cv_errors,
    )


def _build_partial(y, U, P):
    """Center, project out unpenalized columns, standardize penalized columns."""
    n = y.shape[0]
    y_mean = float(np.mean(y))
    yc = y - y_mean
    if U.size:
        u_means = U.mean(axis=0)
        Uc = U - u_means
        gram = Uc.T @ Uc
        def u_solve(rhs):
            return np.linalg.lstsq(gram, rhs, rcond=None)[0]
        y_res = yc - Uc @ u_solve(Uc.T @ yc)
        if P.size:
            p_means = P.mean(axis=0)
            Pc = P - p_means
            P_res = Pc - Uc @ u_solve(Uc.T @ Pc)
        else:
            p_means = np.zeros(0)
            Pc = P
            P_res = P
    else:
        u_means = np.zeros(0)
        Uc = U
        u_solve = None
        y_res = yc
        p_means = P.mean(axis=0) if P.size else np.zeros(0)
        Pc = P - p_means if P.size else P
        P_res = Pc

    scales = np.sqrt(np.mean(P_res**2, axis=0)) if P_res.size else np.zeros(0)
    valid = scales > 1e-12
    P_std = np.zeros_like(P_res, dtype=float)
    if P_res.size and np.any(valid):
        P_std[:, valid] = P_res[:, valid] / scales[valid]
    lam_max = 0.0
    if P_std.size and np.any(valid):
        lam_max = float(np.max(np.abs(P_std[:, valid].T @ y_res)) / n)
    return {
        "y_mean": y_mean,
        "u_means": u_means,
        "p_means": p_means,
        "Uc": Uc,
        "Pc": Pc,
        "u_solve": u_solve,
        "y_res": y_res,
        "P_std": P_std,
        "scales": scales,
        "valid": valid,
        "lambda_max": lam_max,
    }


def _to_original(prob, y, U, P, beta_std):
    """Recover intercept and original-scale coefficients from the standardized fit."""
    b_p = np.zeros_like(beta_std)
    valid = prob["valid"]
    if beta_std.size and np.any(valid):
        b_p[valid] = beta_std[valid] / prob["scales"][valid]
    if prob["u_solve"] is not None:
        yc = y - prob["y_mean"]
        target = yc - (prob["Pc"] @ b_p if P.size else 0.0)
        b_u = prob["u_solve"](prob["Uc"].T @ target)
    else:
        b_u = np.zeros(0)
    intercept = prob["y_mean"]
    if b_u.size:
        intercept -= float(prob["u_means"] @ b_u)
    if b_p.size:
        intercept -= float(prob["p_means"] @ b_p)
    return intercept, b_u, b_p


def _cv_path_errors(y, U, P, lambdas, cv_folds, seed, tol, max_sweeps):
    """Mean held-out squared error along the lambda path.

    Path fits use a looser tolerance and a sweep cap: deep in the path the
    training problem is typically overparameterized and exact solutions are
    pointless for picking lambda. The final fit at the chosen lambda runs at
    full precision.
    """
    n = y.shape[0]
    folds = min(cv_folds, n)
    rng = np.random.default_rng(seed)
    fold_id = np.empty(n, dtype=int)
    fold_id[rng.permutation(n)] = np.arange(n) % folds
    path_tol = max(tol, 1e-5)
    path_sweeps = 60

    errors = np.zeros((folds, lambdas.size))
    for f in range(folds):
        train = fold_id != f
        test = ~train
        n_train = int(np.sum(train))
        # Past this many active columns the training fit is saturated and
        # deeper lambdas only overfit; stop and carry the last error forward.
        df_budget = max(n_train - 1 - U.shape[1] - 1, 1)
        prob = _build_partial(y[train], U[train], P[train])
        beta_std = np.zeros(P.shape[1])
        r = prob["y_res"].copy()
        cap_hits = 0
        for li, lam in enumerate(lambdas):
            _, settled = _cd_solve(prob["P_std"], r, beta_std, lam, path_tol, path_sweeps)
            cap_hits = 0 if settled else cap_hits + 1
            intercept, b_u, b_p = _to_original(prob, y[train], U[train], P[train], beta_std)
            pred = np.full(int(np.sum(test)), intercept)
            if b_u.size:
                pred += U[test] @ b_u
            if b_p.size:
                pred += P[test] @ b_p
            errors[f, li] = float(np.mean((y[test] - pred) ** 2))
            saturated = int(np.sum(beta_std != 0.0)) >= df_budget
            if saturated or cap_hits >= 2:
                errors[f, li + 1 :] = errors[f, li]
                break
    if folds < 2:
        return errors.mean(axis=0), np.zeros(lambdas.size)
    return errors.mean(axis=0), errors.std(axis=0, ddof=1) / np.sqrt(folds)
