"""Random-walk-with-drift regression on yearly count data:
diff(y_t) = drift + beta * diff(log shelter_t) + noise, fit by exact
least squares on the differenced pairs, with normal prediction intervals.

A small AIC grid over nearby ARIMA orders is provided for model-selection
reporting; the grid candidates are evaluated with statsmodels while the
selected (0,1,0)+drift+covariate model is fit by the closed-form OLS here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .estimators import EstimateWithCi, z_quantile


@dataclass
class PitSeries:
    years: list[int]
    unsheltered: list[float]
    shelter_covariate: list[float]

    def __post_init__(self):
        if not (len(self.years) == len(self.unsheltered) == len(self.shelter_covariate)):
            raise InputError("years, unsheltered, shelter_covariate must have equal length")
        if any(y2 <= y1 for y1, y2 in zip(self.years, self.years[1:])):
            raise InputError("years must be strictly increasing")
        self.gap_years = [
            y2 for y1, y2 in zip(self.years, self.years[1:]) if y2 != y1 + 1
        ]
        if any(v < 0 for v in self.unsheltered):
            raise InputError("unsheltered counts must be >= 0")
        if any(v <= 0 for v in self.shelter_covariate):
            raise InputError("shelter covariate must be positive (log is taken)")

    def __len__(self) -> int:
        return len(self.years)

    @classmethod
    def from_csv(cls, path) -> "PitSeries":
        years, uns, shel = [], [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            need = {"year", "unsheltered", "sheltered"}
            if reader.fieldnames is None or not need <= set(reader.fieldnames):
                raise InputError(f"{path}: series CSV needs columns year,unsheltered,sheltered")
            for lineno, row in enumerate(reader, start=2):
                try:
                    years.append(int(row["year"]))
                    uns.append(float(row["unsheltered"]))
                    shel.append(float(row["sheltered"]))
                except (TypeError, ValueError):
                    raise InputError(f"{path}:{lineno}: non-numeric value") from None
        return cls(years, uns, shel)


@dataclass
class ArimaFit:
    drift: float
    beta_log_shelter: float
    sigma2: float
    log_likelihood: float
    aic: float
    n_obs: int
    se_drift: float = float("nan")
    se_beta: float = float("nan")
    sigma2_unbiased: float = float("nan")
    log_likelihood_css: float = float("nan")
    last_y: float = float("nan")
    last_log_covariate: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "drift": self.drift,
            "beta_log_shelter": self.beta_log_shelter,
            "sigma2": self.sigma2,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "n_obs": self.n_obs,
            "se_drift": self.se_drift,
            "se_beta": self.se_beta,
            "sigma2_unbiased": self.sigma2_unbiased,
            "log_likelihood_css": self.log_likelihood_css,
        }


def fit_arima010_with_covariate(s: PitSeries, variance: str = "ml") -> ArimaFit:
    """OLS of diff(y) on [1, diff(log shelter)].

    sigma2 uses the maximum-likelihood (1/n) divisor by default; pass
    variance="unbiased" to use 1/(n-2) as the reported sigma2.
    """
    if len(s) < 4:
        raise InputError("need at least 4 observations")
    if variance not in ("ml", "unbiased"):
        raise InputError("variance must be 'ml' or 'unbiased'")
    y = np.asarray(s.unsheltered, dtype=np.float64)
    lx = np.log(np.asarray(s.shelter_covariate, dtype=np.float64))
    dy = np.diff(y)
    dx = np.diff(lx)
    if np.allclose(dx, 0.0):
        raise InputError("covariate collinear with drift: diff(log shelter) is constant")
    n = dy.size
    X = np.column_stack((np.ones(n), dx))
    coef, *_ = np.linalg.lstsq(X, dy, rcond=None)
    resid = dy - X @ coef
    rss = float(resid @ resid)
    sigma2_ml = rss / n
    sigma2_unb = rss / (n - 2) if n > 2 else float("nan")
    # coefficient SEs use the unbiased divisor, matching regression-table convention
    xtx_inv = np.linalg.inv(X.T @ X)
    se = np.sqrt(np.diag(xtx_inv) * sigma2_unb)

    def gaussian_ll(sig2: float) -> float:
        if sig2 <= 0:
            return math.inf if rss == 0 else -math.inf
        return -0.5 * n * math.log(2 * math.pi * sig2) - rss / (2 * sig2)

    ll_ml = gaussian_ll(sigma2_ml) if sigma2_ml > 0 else math.inf
    ll_css = gaussian_ll(sigma2_unb) if sigma2_unb > 0 else math.inf
    sigma2 = sigma2_ml if variance == "ml" else sigma2_unb
    k = 3  # drift, beta, sigma2
    return ArimaFit(
        drift=float(coef[0]),
        beta_log_shelter=float(coef[1]),
        sigma2=float(sigma2),
        log_likelihood=float(ll_ml),
        aic=float(2 * k - 2 * ll_ml),
        n_obs=n,
        se_drift=float(se[0]),
        se_beta=float(se[1]),
        sigma2_unbiased=float(sigma2_unb),
        log_likelihood_css=float(ll_css),
        last_y=float(y[-1]),
        last_log_covariate=float(lx[-1]),
    )


def forecast(fit: ArimaFit, last_y: float, future_covariate_logs, level: float = 0.95) -> list[EstimateWithCi]:
    """h-step forecasts: last_y + h*drift + beta*(log x_{t+h} - log x_t),
    with prediction variance h*sigma2 and normal-quantile intervals."""
    logs = [float(v) for v in future_covariate_logs]
    if not logs:
        raise InputError("need at least one future covariate value")
    if not math.isfinite(fit.last_log_covariate):
        raise InputError("fit carries no last covariate value")
    z = z_quantile(level)
    out = []
    for h, lg in enumerate(logs, start=1):
        point = last_y + h * fit.drift + fit.beta_log_shelter * (lg - fit.last_log_covariate)
        se = math.sqrt(h * fit.sigma2)
        out.append(EstimateWithCi(point, se, point - z * se, point + z * se,
                                  level=level, method="analytic"))
    return out


def rank_arima_candidates(s: PitSeries) -> list[dict]:
    """AIC table over the documented search grid: p, q in {0, 1}, d in {0, 1},
    drift on/off, log-shelter covariate on/off (32 candidates).

    Candidates are fit with statsmodels (CSS-ML state space); failures are
    reported with aic = inf rather than raised.
    """
    import warnings

    from statsmodels.tsa.statespace.sarimax import SARIMAX

    y = np.asarray(s.unsheltered, dtype=np.float64)
    lx = np.log(np.asarray(s.shelter_covariate, dtype=np.float64))
    rows = []
    for p in (0, 1):
        for d in (0, 1):
            for q in (0, 1):
                for drift in (False, True):
                    for covariate in (False, True):
                        spec = {"p": p, "d": d, "q": q, "drift": drift, "covariate": covariate}
                        try:
                            with warnings.catch_warnings():
                                warnings.simplefilter("ignore")
                                res = SARIMAX(
                                    y,
                                    exog=lx.reshape(-1, 1) if covariate else None,
                                    order=(p, d, q),
                                    trend="t" if drift else None,
                                    simple_differencing=True,
                                ).fit(disp=False)
                            spec["aic"] = float(res.aic)
                            spec["log_likelihood"] = float(res.llf)
                        except Exception as exc:  # noqa: BLE001 - per-candidate report
                            spec["aic"] = float("inf")
                            spec["log_likelihood"] = float("-inf")
                            spec["error"] = str(exc)
                        rows.append(spec)
    rows.sort(key=lambda r: (r["aic"], r["p"] + r["q"], r["d"]))
    return rows
