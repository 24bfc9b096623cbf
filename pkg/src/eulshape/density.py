"""Joint density of the squared canonical correlations, in two routes.

The series route multiplies the classical constant by the two-matrix Gauss
series; the polynomial route replaces that series by the Euler-relation form,
which for n - K a positive even integer involves only partitions with leading
part at most q = (n - K)/2 and an orthogonal-group quadrature, so it needs no
truncation.  Both routes share every other factor and are cross-checked in
the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hypergeom import SeriesReport, SeriesSpec, hyper_two_matrix, mv_log_gamma
from .orthogonal import QuadratureSpec, euler_2f1, euler_2f1_batch

_EDGE_TOL = 1e-12


class SampleDomainError(ValueError):
    """Sample roots sit on a boundary or tie where the density is singular."""


@dataclass(frozen=True)
class CanonicalCorrModel:
    """Parametric model: dimension K, degrees of freedom n, population
    squared canonical correlations rho2 (weakly decreasing, in [0, 1))."""

    K: int
    n: int
    rho2: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rho2", tuple(float(r) for r in self.rho2))
        if self.K < 1:
            raise ValueError(f"K must be positive, got {self.K}")
        if self.n < 2 * self.K:
            raise ValueError(f"need n >= 2K, got n = {self.n}, K = {self.K}")
        if len(self.rho2) != self.K:
            raise ValueError(f"rho2 must have length K = {self.K}, got {len(self.rho2)}")
        for i, r in enumerate(self.rho2):
            if not (0.0 <= r < 1.0):
                raise ValueError(f"rho2[{i}] = {r:g} outside [0, 1)")
            if i and self.rho2[i - 1] < r:
                raise ValueError(f"rho2 must be weakly decreasing, got {self.rho2}")

    @property
    def is_polynomial(self) -> bool:
        """True iff (K - n)/2 is a negative integer, i.e. n - K positive even."""
        d = self.n - self.K
        return d > 0 and d % 2 == 0

    @property
    def q(self) -> int | None:
        d = self.n - self.K
        return d // 2 if self.is_polynomial else None

    @property
    def polynomial_degree(self) -> int | None:
        """Total degree K*q of the zonal factor in the transformed roots."""
        return self.K * self.q if self.is_polynomial else None


@dataclass(frozen=True)
class CorrelationSample:
    """One sorted vector of squared sample canonical correlations.

    Structurally the entries live in the closed interval [0, 1] and are
    weakly decreasing (the eigenvalue routines legitimately return exact 0s
    and 1s).  Density evaluation additionally requires strictly interior,
    strictly decreasing roots; see :meth:`require_interior`.
    """

    r2: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "r2", tuple(float(v) for v in self.r2))
        for i, v in enumerate(self.r2):
            if not (0.0 <= v <= 1.0) or not math.isfinite(v):
                raise ValueError(f"r2[{i}] = {v!r} outside [0, 1]")
            if i and self.r2[i - 1] < v:
                raise ValueError(f"r2 must be sorted decreasing, got {self.r2}")

    @property
    def K(self) -> int:
        return len(self.r2)

    def require_interior(self, tol: float = _EDGE_TOL) -> None:
        """Reject boundary or tied roots, where the density formulas break."""
        for i, v in enumerate(self.r2):
            if v < tol or v > 1.0 - tol:
                raise SampleDomainError(
                    f"r2[{i}] = {v:.3g} within {tol:g} of the boundary"
                )
            if i and self.r2[i - 1] - v < tol:
                raise SampleDomainError(
                    f"r2[{i - 1}] and r2[{i}] tie within {tol:g}: {self.r2}"
                )


def log_norm_constant(model: CanonicalCorrModel) -> float:
    """log of pi^{K^2/2} / Gamma_K(K/2)^2 * Gamma_K(n/2) / Gamma_K((n-K)/2)."""
    k, n = model.K, model.n
    return (
        (k * k / 2.0) * math.log(math.pi)
        - 2.0 * mv_log_gamma(k, k / 2.0)
        + mv_log_gamma(k, n / 2.0)
        - mv_log_gamma(k, (n - k) / 2.0)
    )


def _log_base_batch(model: CanonicalCorrModel, r2: np.ndarray) -> np.ndarray:
    """Everything in log f except the hypergeometric/zonal factor.

    ``r2`` has shape (B, K) with sorted interior rows.
    """
    n, k = model.n, model.K
    out = np.full(r2.shape[0], log_norm_constant(model))
    out += (n / 2.0) * sum(math.log1p(-r) for r in model.rho2)
    with np.errstate(divide="ignore"):  # exact ties give -inf, i.e. density 0
        out += -0.5 * np.log(r2).sum(axis=1)
        out += ((n - 2 * k - 1) / 2.0) * np.log1p(-r2).sum(axis=1)
        for i in range(k):
            for j in range(i + 1, k):
                out += np.log(r2[:, i] - r2[:, j])
    return out


def log_density_series(sample: CorrelationSample, model: CanonicalCorrModel,
                       spec: SeriesSpec | None = None) -> tuple[float, SeriesReport]:
    """log density via the two-matrix Gauss series, with truncation diagnostics.

    Non-convergence within the truncation budget is reported on the returned
    diagnostics, not raised.
    """
    if spec is None:
        spec = SeriesSpec()
    _check_sample(sample, model)
    n, k = model.n, model.K
    f_val, report = hyper_two_matrix(
        [n / 2.0, n / 2.0], [k / 2.0], model.rho2, sample.r2, 2.0, spec
    )
    base = _log_base_batch(model, np.array([sample.r2]))[0]
    return base + math.log(f_val), report


def log_density_polynomial(sample: CorrelationSample, model: CanonicalCorrModel,
                           quad: QuadratureSpec | None = None) -> float:
    """log density via the Euler-relation form; exact up to quadrature.

    Only valid in the polynomial regime (n - K a positive even integer);
    other parameter combinations are rejected with a pointer to the series
    route.
    """
    if quad is None:
        quad = QuadratureSpec()
    _require_polynomial(model)
    _check_sample(sample, model)
    if model.K == 2:
        return float(log_density_polynomial_batch(
            np.array([sample.r2]), model, quad)[0])
    n, k = model.n, model.K
    s_val = euler_2f1(n / 2.0, n / 2.0, k / 2.0, model.rho2, sample.r2, quad)
    base = _log_base_batch(model, np.array([sample.r2]))[0]
    return base + math.log(s_val)


def log_density_polynomial_batch(r2: np.ndarray, model: CanonicalCorrModel,
                                 quad: QuadratureSpec | None = None) -> np.ndarray:
    """Vectorized polynomial-form log density over rows of ``r2`` (K = 2 only).

    Rows must already be valid interior samples; this is the hot path for
    likelihood maximization and the 2-D quadratures.
    """
    if quad is None:
        quad = QuadratureSpec()
    _require_polynomial(model)
    if model.K != 2:
        raise ValueError("batched evaluation is implemented for K = 2")
    r2 = np.asarray(r2, dtype=float)
    n = model.n
    s_val = euler_2f1_batch(n / 2.0, n / 2.0, 1.0, model.rho2, r2, quad)
    return _log_base_batch(model, r2) + np.log(s_val)


def _require_polynomial(model: CanonicalCorrModel) -> None:
    if not model.is_polynomial:
        raise ValueError(
            f"(K - n)/2 = {(model.K - model.n) / 2:g} is not a negative integer; "
            "the exact finite form needs n - K positive and even "
            "(use log_density_series instead)"
        )


def _check_sample(sample: CorrelationSample, model: CanonicalCorrModel) -> None:
    if sample.K != model.K:
        raise ValueError(f"sample has K = {sample.K}, model has K = {model.K}")
    sample.require_interior()


# ---------------------------------------------------------------------------
# 2-D quadrature over the ordered domain {1 > r1 > r2 > 0}
# ---------------------------------------------------------------------------
#
# Substituting r_i = sin^2(theta_i) absorbs the r^{-1/2} edge singularity
# exactly (the Jacobian contributes 2 sin cos per axis), leaving a smooth
# integrand on a triangle in theta-space.  The integral is then computed by
# tensor Gauss-Legendre with node doubling until two successive refinements
# agree, which also yields the reported error estimate.


def integrate_density(model: CanonicalCorrModel, quad: QuadratureSpec | None = None,
                      lower: tuple[float, float] = (0.0, 0.0),
                      rel_tol: float = 1e-6, start_nodes: int = 24,
                      max_level: int = 4) -> tuple[float, float]:
    """Integral of the polynomial-form density over
    {r1 > lower[0], r2 > lower[1], r1 > r2}; returns (value, error estimate).
    """
    if quad is None:
        quad = QuadratureSpec()
    _require_polynomial(model)
    if model.K != 2:
        raise ValueError("density quadrature is implemented for K = 2")
    t1, t2 = lower
    if not (0.0 <= t1 <= 1.0 and 0.0 <= t2 <= 1.0):
        raise ValueError(f"thresholds must lie in [0, 1], got {lower}")
    lo1 = math.asin(math.sqrt(max(t1, t2)))
    lo2 = math.asin(math.sqrt(t2))
    hi = math.pi / 2.0

    def value_at(nodes: int) -> float:
        x, w = np.polynomial.legendre.leggauss(nodes)
        # outer: theta1 in (lo1, hi); inner: theta2 in (lo2, theta1)
        th1 = 0.5 * (hi - lo1) * (x + 1.0) + lo1
        w1 = 0.5 * (hi - lo1) * w
        total = 0.0
        for a, wa in zip(th1, w1):
            th2 = 0.5 * (a - lo2) * (x + 1.0) + lo2
            w2 = 0.5 * (a - lo2) * w
            u = math.sin(a) ** 2
            v = np.sin(th2) ** 2
            r2 = np.column_stack([np.full(nodes, u), v])
            dens = np.exp(log_density_polynomial_batch(r2, model, quad))
            jac = (2.0 * math.sin(a) * math.cos(a)) * (2.0 * np.sin(th2) * np.cos(th2))
            total += wa * float((dens * jac) @ w2)
        return total

    if max_level < 1:
        raise ValueError(f"max_level must be >= 1, got {max_level}")
    nodes = start_nodes
    prev = value_at(nodes)
    err = math.inf
    for _ in range(max_level):
        nodes *= 2
        cur = value_at(nodes)
        err = abs(cur - prev)
        if err <= rel_tol * max(abs(cur), 1e-12):
            break
        prev = cur
    return cur, err


def density_cell_means(model: CanonicalCorrModel, resolution: int,
                       quad: QuadratureSpec | None = None,
                       cell_nodes: int = 4) -> list[tuple[float, float, float]]:
    """Cell-averaged density over an ordered-triangle grid.

    The unit square is split into ``resolution`` x ``resolution`` cells; for
    every cell with center below the diagonal (r2 <= r1) the density is
    averaged over the cell (counting the region above the diagonal as zero),
    in the edge-respecting theta coordinates.  With this convention the plain
    Riemann sum  sum(value) / resolution^2  telescopes to total probability.
    Returns rows (r1_center, r2_center, mean density).
    """
    if quad is None:
        quad = QuadratureSpec()
    _require_polynomial(model)
    if model.K != 2:
        raise ValueError("density grids are implemented for K = 2")
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    h = 1.0 / resolution
    gx, gw = np.polynomial.legendre.leggauss(cell_nodes)

    rows: list[tuple[float, float, float]] = []
    batch_u: list[np.ndarray] = []
    batch_v: list[np.ndarray] = []
    batch_j: list[np.ndarray] = []
    batch_w: list[np.ndarray] = []
    centers: list[tuple[float, float]] = []
    for i in range(resolution):
        u0, u1 = i * h, (i + 1) * h
        a0, a1 = math.asin(math.sqrt(u0)), math.asin(math.sqrt(u1))
        tha = 0.5 * (a1 - a0) * (gx + 1.0) + a0
        wa = 0.5 * (a1 - a0) * gw
        for j in range(i + 1):
            v0, v1 = j * h, (j + 1) * h
            b0, b1 = math.asin(math.sqrt(v0)), math.asin(math.sqrt(v1))
            thb = 0.5 * (b1 - b0) * (gx + 1.0) + b0
            wb = 0.5 * (b1 - b0) * gw
            ta, tb = np.meshgrid(tha, thb, indexing="ij")
            plan_w = np.outer(wa, wb)
            mask = tb < ta  # zero extension above the diagonal
            u = np.sin(ta) ** 2
            v = np.sin(tb) ** 2
            jac = 4.0 * np.sin(ta) * np.cos(ta) * np.sin(tb) * np.cos(tb)
            batch_u.append(u[mask])
            batch_v.append(v[mask])
            batch_j.append(jac[mask])
            batch_w.append(plan_w[mask])
            centers.append(((i + 0.5) * h, (j + 0.5) * h))

    sizes = [len(u) for u in batch_u]
    flat = np.column_stack([np.concatenate(batch_u), np.concatenate(batch_v)])
    dens = np.exp(log_density_polynomial_batch(flat, model, quad))
    offset = 0
    area = h * h
    for size, jc, wc, (cu, cv) in zip(sizes, batch_j, batch_w, centers):
        cell_integral = float((dens[offset:offset + size] * jc) @ wc)
        offset += size
        rows.append((cu, cv, cell_integral / area))
    return rows
