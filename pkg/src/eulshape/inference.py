"""Likelihood assembly, maximum-likelihood estimation and tail probabilities.

The likelihood is a product of per-specimen densities, each evaluated at its
own sample roots.  Estimation runs derivative-free Nelder-Mead over a logit
reparametrization of the open unit box, sorting the parameter vector inside
the objective to keep the decreasing-order constraint without hard walls;
the exact finite density form is the default objective because the truncated
series objective is the one with documented optimizer pathologies.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .density import (
    CanonicalCorrModel,
    CorrelationSample,
    integrate_density,
    log_density_polynomial,
    log_density_polynomial_batch,
    log_density_series,
)
from .hypergeom import SeriesSpec
from .landmarks import LandmarkConfiguration, build_correlation_samples
from .orthogonal import QuadratureSpec
from .simulate import SimSpec, sample_r2_array

logger = logging.getLogger(__name__)

_RHO_CAP = 1.0 - 1e-9


@dataclass(frozen=True)
class MLEOptions:
    """Optimizer controls: start count, tolerances, objective selection."""

    n_starts: int = 5
    max_iter: int = 500
    xatol: float = 1e-8
    fatol: float = 1e-9
    objective: str = "auto"  # auto | polynomial | series
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    series: SeriesSpec = field(default_factory=SeriesSpec)

    def __post_init__(self):
        if self.objective not in ("auto", "polynomial", "series"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.n_starts < 1:
            raise ValueError("need at least one start")


@dataclass
class EstimationReport:
    """Outcome of one optimization (or the best of several starts)."""

    rho2_hat: tuple[float, ...]
    log_likelihood: float
    iterations: int
    converged: bool
    start: tuple[float, ...]
    function_evals: int
    objective: str = "polynomial"
    starts: list["EstimationReport"] | None = None

    def to_dict(self) -> dict:
        out = {
            "rho2_hat": list(self.rho2_hat),
            "log_likelihood": self.log_likelihood,
            "iterations": self.iterations,
            "converged": self.converged,
            "start": list(self.start),
            "function_evals": self.function_evals,
            "objective": self.objective,
        }
        if self.starts is not None:
            out["starts"] = [s.to_dict() for s in self.starts]
        return out


def log_likelihood(samples, model: CanonicalCorrModel, *,
                   objective: str = "auto",
                   quad: QuadratureSpec | None = None,
                   series: SeriesSpec | None = None) -> float:
    """Sum of per-sample log densities; the exact form when available.

    An invalid sample raises with its index so bad specimens are locatable.
    """
    samples = list(samples)
    if not samples:
        return 0.0
    use_poly = _use_polynomial(objective, model)
    if use_poly and model.K == 2:
        arr = _validated_array(samples, model)
        return float(np.sum(log_density_polynomial_batch(arr, model, quad)))
    total = 0.0
    for j, s in enumerate(samples):
        try:
            if use_poly:
                total += log_density_polynomial(s, model, quad)
            else:
                total += log_density_series(s, model, series)[0]
        except ValueError as exc:
            raise ValueError(f"sample {j}: {exc}") from exc
    return total


def _use_polynomial(objective: str, model: CanonicalCorrModel) -> bool:
    if objective == "polynomial":
        if not model.is_polynomial:
            raise ValueError(
                "polynomial objective requested but n - K is not a positive "
                "even integer"
            )
        return True
    if objective == "series":
        return False
    return model.is_polynomial


def _validated_array(samples, model: CanonicalCorrModel) -> np.ndarray:
    rows = []
    for j, s in enumerate(samples):
        try:
            if s.K != model.K:
                raise ValueError(f"has K = {s.K}, model needs {model.K}")
            s.require_interior()
        except ValueError as exc:
            raise ValueError(f"sample {j}: {exc}") from exc
        rows.append(s.r2)
    return np.asarray(rows, dtype=float)


def _deterministic_starts(samples_arr: np.ndarray, k: int, n_starts: int) -> list[np.ndarray]:
    """Fixed start list: the sample mean of r2 plus graded fallback levels."""
    starts = [np.clip(np.sort(samples_arr.mean(axis=0))[::-1], 1e-3, 0.95)]
    j = 0
    while len(starts) < n_starts:
        base = 0.05 + 0.9 * ((7 * j) % 13) / 13.0  # low-discrepancy ladder
        starts.append(np.array([base * 0.6 ** i for i in range(k)]))
        j += 1
    return starts


def _logit(p: np.ndarray) -> np.ndarray:
    return np.log(p) - np.log1p(-p)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def mle(samples, K: int, n: int, options: MLEOptions | None = None) -> EstimationReport:
    """Maximum-likelihood estimate of the population squared correlations.

    Multi-start Nelder-Mead on logit coordinates; the parameter vector is
    sorted decreasing inside the objective.  Returns the best start's report
    with every start's outcome attached; if no start converges the report
    says so rather than inventing an estimate.
    """
    if options is None:
        options = MLEOptions()
    samples = list(samples)
    if not samples:
        raise ValueError("cannot estimate from an empty sample list")
    probe = CanonicalCorrModel(K=K, n=n, rho2=(0.0,) * K)
    use_poly = _use_polynomial(options.objective, probe)
    objective_name = "polynomial" if use_poly else "series"
    arr = _validated_array(samples, probe)
    evals = 0

    def negative_loglik(z: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        rho2 = np.sort(np.clip(_sigmoid(z), 0.0, _RHO_CAP))[::-1]
        model = CanonicalCorrModel(K=K, n=n, rho2=tuple(rho2))
        if use_poly and K == 2:
            val = float(np.sum(log_density_polynomial_batch(arr, model, options.quad)))
        else:
            val = sum(
                (log_density_polynomial(CorrelationSample(tuple(row)), model, options.quad)
                 if use_poly else
                 log_density_series(CorrelationSample(tuple(row)), model, options.series)[0])
                for row in arr
            )
        if not math.isfinite(val):
            return 1e300
        return -val

    reports: list[EstimationReport] = []
    for start in _deterministic_starts(arr, K, options.n_starts):
        evals = 0
        res = minimize(
            negative_loglik,
            _logit(start),
            method="Nelder-Mead",
            options={
                "maxiter": options.max_iter,
                "xatol": options.xatol,
                "fatol": options.fatol,
            },
        )
        rho2_hat = tuple(np.sort(np.clip(_sigmoid(res.x), 0.0, _RHO_CAP))[::-1])
        reports.append(EstimationReport(
            rho2_hat=rho2_hat,
            log_likelihood=-float(res.fun),
            iterations=int(res.nit),
            converged=bool(res.success),
            start=tuple(start),
            function_evals=evals,
            objective=objective_name,
        ))

    converged = [r for r in reports if r.converged]
    pool = converged if converged else reports
    best = max(pool, key=lambda r: r.log_likelihood)
    return EstimationReport(
        rho2_hat=best.rho2_hat,
        log_likelihood=best.log_likelihood,
        iterations=best.iterations,
        converged=bool(converged),
        start=best.start,
        function_evals=best.function_evals,
        objective=objective_name,
        starts=reports,
    )


def tail_probability(t, model: CanonicalCorrModel,
                     quad: QuadratureSpec | None = None,
                     rel_tol: float = 1e-5,
                     mc_samples: int = 200000,
                     full_output: bool = False):
    """P(every sample root exceeds its threshold) under the model.

    K = 2 in the exact-form regime integrates the density over the ordered
    tail region by adaptive node-doubling quadrature; other regimes fall back
    to seeded Monte Carlo over the Wishart sampler, with the standard error
    reported.  The value is clamped to [0, 1].
    """
    if quad is None:
        quad = QuadratureSpec()
    t = tuple(float(v) for v in t)
    if len(t) != model.K:
        raise ValueError(f"threshold has length {len(t)}, model K = {model.K}")
    for v in t:
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"thresholds must lie in [0, 1], got {t}")
    if model.K == 2 and model.is_polynomial:
        val, err = integrate_density(model, quad, lower=t, rel_tol=rel_tol)
        result = min(max(val, 0.0), 1.0)
        if full_output:
            return result, {"method": "quadrature", "error": err}
        return result
    spec = SimSpec(K=model.K, n=model.n, rho2=model.rho2, count=mc_samples,
                   seed=quad.seed)
    arr = sample_r2_array(spec)
    hits = np.all(arr > np.asarray(t), axis=1)
    p = float(hits.mean())
    se = math.sqrt(max(p * (1.0 - p), 1e-12) / mc_samples)
    if full_output:
        return p, {"method": "monte-carlo", "error": se}
    return p


@dataclass
class DiscriminationStep:
    subset: tuple[int, ...]
    n_landmarks: int
    report: EstimationReport


@dataclass
class DiscriminationResult:
    """Estimation trajectory over landmark subsets.

    ``drastic_index`` is the first step whose leading estimate moved by more
    than the relative threshold against the previous step, or None.
    """

    steps: list[DiscriminationStep]
    drastic_index: int | None
    threshold: float
    warnings: list[str]


def discriminate_landmarks(population, reference, schedule, *,
                           threshold: float = 0.1,
                           options: MLEOptions | None = None,
                           center: str = "auto") -> DiscriminationResult:
    """Re-estimate with shrinking landmark subsets and flag the break point.

    ``schedule`` is an iterable of landmark index tuples (0-based, into the
    configurations' rows).  Subsets too small for the model (N' < 2K + 1), or
    violating the parity condition when the exact form is requested, are
    skipped with a warning.
    """
    if options is None:
        options = MLEOptions()
    population = list(population)
    reference = list(reference) if isinstance(reference, (list, tuple)) else [reference]
    if not population:
        raise ValueError("empty population")
    k = population[0].n_dims
    steps: list[DiscriminationStep] = []
    warnings_log: list[str] = []
    for subset in schedule:
        subset = tuple(int(i) for i in subset)
        n_prime = len(subset)
        if len(set(subset)) != n_prime:
            warnings_log.append(f"subset {subset}: repeated landmark indices, skipped")
            continue
        if n_prime < 2 * k + 1:
            warnings_log.append(
                f"subset {subset}: {n_prime} landmarks < {2 * k + 1} required, skipped"
            )
            continue
        n_df = n_prime - 1
        if options.objective in ("auto", "polynomial") and (n_df - k) % 2 != 0:
            if options.objective == "polynomial":
                warnings_log.append(
                    f"subset {subset}: n - K = {n_df - k} odd, exact form "
                    "unavailable, skipped"
                )
                continue
        try:
            pop_sub = [LandmarkConfiguration(c.label, c.coords[list(subset), :])
                       for c in population]
            ref_sub = [LandmarkConfiguration(c.label, c.coords[list(subset), :])
                       for c in reference]
            samples = build_correlation_samples(pop_sub, ref_sub, center=center)
            report = mle(samples, k, n_df, options)
        except (ValueError, np.linalg.LinAlgError) as exc:
            warnings_log.append(f"subset {subset}: {exc}; skipped")
            continue
        steps.append(DiscriminationStep(subset=subset, n_landmarks=n_prime, report=report))
    for msg in warnings_log:
        logger.warning("%s", msg)

    drastic = None
    for i in range(1, len(steps)):
        prev = steps[i - 1].report.rho2_hat[0]
        cur = steps[i].report.rho2_hat[0]
        if abs(cur - prev) / max(prev, 1e-9) > threshold:
            drastic = i
            break
    return DiscriminationResult(
        steps=steps, drastic_index=drastic, threshold=threshold, warnings=warnings_log
    )
