"""Normalized integration over small orthogonal groups, and the Euler-relation
route to the Gauss function of two matrix arguments.

O(2) is handled by Gauss-Legendre quadrature in the rotation angle over both
group components; O(K) for K > 2 falls back to seeded Monte Carlo over
Haar-distributed matrices.  The Euler form rewrites the two-matrix Gauss
series with numerator parameter b1 - a1; when that is -q for a nonnegative
integer q the partition sum is finite (leading part <= q) and the evaluation
is exact up to quadrature error.

Normalization note: the integrand here carries no 1/C_lambda(I_m) factor.
Both normalizations were implemented and cross-checked numerically against
the double-series definition (see test_orthogonal.py); only the plain form
reproduces it.  ``include_identity_norm=True`` keeps the rejected variant
available for that check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jack
from .partitions import Partition, gen_pochhammer, partitions_of


class QuadratureDomainError(ValueError):
    """The integrand left its domain (determinant factor not positive)."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for group integration.

    nodes: Gauss-Legendre node count over the rotation angle (O(2) path).
    include_reflections: both O(2) components; required for Haar on the full
        group (False integrates over rotations only).
    mc_samples, seed: Monte Carlo fallback for K > 2.
    """

    nodes: int = 64
    include_reflections: bool = True
    mc_samples: int = 20000
    seed: int = 0

    def __post_init__(self):
        if self.nodes < 1:
            raise ValueError(f"nodes must be >= 1, got {self.nodes}")
        if self.mc_samples < 1:
            raise ValueError(f"mc_samples must be >= 1, got {self.mc_samples}")


def gauss_legendre_angles(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Angles in [0, 2pi) and weights summing to one."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return math.pi * (x + 1.0), w / 2.0


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def integrate_O2(f, spec: QuadratureSpec | None = None) -> float:
    """Integral of f over O(2) against the normalized invariant measure.

    Averages f over rotations by Gauss-Legendre in the angle and, when
    ``include_reflections`` is set, equally over the reflection component.
    """
    if spec is None:
        spec = QuadratureSpec()
    thetas, weights = gauss_legendre_angles(spec.nodes)
    reflect = np.diag([1.0, -1.0])
    rot = 0.0
    ref = 0.0
    for theta, w in zip(thetas, weights):
        h = rotation_matrix(theta)
        rot += w * f(h)
        if spec.include_reflections:
            ref += w * f(h @ reflect)
    if not spec.include_reflections:
        return rot
    return 0.5 * (rot + ref)


def haar_orthogonal(k: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar-distributed K x K orthogonal matrix (QR with sign fixing)."""
    g = rng.standard_normal((k, k))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def integrate_OK(f, k: int, spec: QuadratureSpec | None = None) -> float:
    """Normalized integral over O(K): exact 2-point sum for K = 1, angle
    quadrature for K = 2, seeded Monte Carlo otherwise."""
    if spec is None:
        spec = QuadratureSpec()
    if k == 1:
        return 0.5 * (f(np.array([[1.0]])) + f(np.array([[-1.0]])))
    if k == 2:
        return integrate_O2(f, spec)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(spec.seed)))
    total = 0.0
    for _ in range(spec.mc_samples):
        total += f(haar_orthogonal(k, rng))
    return total / spec.mc_samples


# ---------------------------------------------------------------------------
# Euler-relation evaluation of 2F1 with two matrix arguments (real case)
# ---------------------------------------------------------------------------


def _euler_partitions(q: int | None, m: int, series_cap: int) -> list[Partition]:
    """Partitions entering the Euler sum: parts <= q when terminating."""
    out: list[Partition] = []
    top = (q * m) if q is not None else series_cap
    for k in range(0, top + 1):
        for lam in partitions_of(k, m):
            if q is None or lam.weight == 0 or lam[0] <= q:
                out.append(lam)
    return out


def _terminating_q(a1: float, b1: float) -> int | None:
    d = b1 - a1
    if d <= 0 and d == math.floor(d):
        return int(-d)
    return None


def _node_products(x_eigs: np.ndarray, y_batch: np.ndarray,
                   nodes: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """tr and det of X H Y H' over rotation nodes, plus the node weights.

    y_batch has shape (B, 2); returns (B, nodes) trace array and (B, 1)
    determinant array.  For diagonal arguments the reflection component of
    O(2) yields the identical product matrix (diag(1,-1) Y diag(1,-1) = Y),
    so rotation nodes already cover the full group average.
    """
    thetas, weights = gauss_legendre_angles(nodes)
    c2 = np.cos(thetas) ** 2
    s2 = 1.0 - c2
    u = y_batch[:, :1]
    v = y_batch[:, 1:]
    h11 = u * c2 + v * s2
    h22 = u * s2 + v * c2
    tr = x_eigs[0] * h11 + x_eigs[1] * h22
    det = (x_eigs[0] * x_eigs[1]) * (u * v)
    return tr, det, weights


def euler_2f1_batch(a1: float, a2: float, b1: float, x_eigs, y_batch,
                    spec: QuadratureSpec | None = None,
                    series_cap: int = 60,
                    include_identity_norm: bool = False) -> np.ndarray:
    """Euler-relation 2F1 of two 2x2 matrix arguments, batched over Y.

    ``x_eigs`` is one eigenvalue pair, ``y_batch`` an array (B, 2) of pairs.
    Vectorizes the group quadrature and the zonal-polynomial kernel across
    the batch; the per-partition weight is (b1-a1)_lam (a2)_lam / (b1)_lam
    divided by the degree factorial, with the real (alpha = 2) symbols.
    """
    if spec is None:
        spec = QuadratureSpec()
    x_eigs = np.asarray(x_eigs, dtype=float)
    y_batch = np.atleast_2d(np.asarray(y_batch, dtype=float))
    if x_eigs.shape != (2,) or y_batch.shape[1] != 2:
        raise ValueError("euler_2f1_batch handles 2x2 arguments")
    q = _terminating_q(a1, b1)
    tr, det, weights = _node_products(x_eigs, y_batch, spec.nodes)
    g = 1.0 - tr + det  # det(I - XHYH') per node
    if np.any(g <= 0.0):
        raise QuadratureDomainError(
            "det(I - X H Y H') <= 0 at a quadrature node; eigenvalues of the "
            "product must stay below one"
        )
    e1 = -(tr - 2.0 * det) / g
    e2 = det / g
    detfac = g ** (-a2)
    total = np.zeros(y_batch.shape[0])
    for lam in _euler_partitions(q, 2, series_cap):
        num = gen_pochhammer(b1 - a1, lam, 2.0) * gen_pochhammer(a2, lam, 2.0)
        if num == 0.0:
            continue
        den = gen_pochhammer(b1, lam, 2.0) * math.factorial(lam.weight)
        coef = num / den
        if include_identity_norm:
            coef /= jack.jack_C_identity(2.0, lam, 2)
        kernel = detfac if lam.weight == 0 else detfac * jack.eval_c2(2.0, lam, e1, e2)
        total += coef * (kernel @ weights)
    return total


def euler_2f1(a1: float, a2: float, b1: float, x_eigs, y_eigs,
              spec: QuadratureSpec | None = None,
              series_cap: int = 60,
              include_identity_norm: bool = False) -> float:
    """Euler-relation value of 2F1(a1, a2; b1; X, Y) in the real case.

    X and Y enter through their eigenvalues.  Exact (up to quadrature) when
    b1 - a1 is a nonpositive integer; otherwise truncated at ``series_cap``
    total degree.  K = 2 uses the vectorized angle quadrature; other sizes
    go through the generic group integral with the oracle polynomials.
    """
    if spec is None:
        spec = QuadratureSpec()
    x_eigs = tuple(float(v) for v in x_eigs)
    y_eigs = tuple(float(v) for v in y_eigs)
    if len(x_eigs) != len(y_eigs):
        raise ValueError(f"argument dimension mismatch: {len(x_eigs)} vs {len(y_eigs)}")
    m = len(x_eigs)
    if m == 2:
        return float(euler_2f1_batch(
            a1, a2, b1, x_eigs, np.array([y_eigs]), spec,
            series_cap=series_cap, include_identity_norm=include_identity_norm,
        )[0])

    q = _terminating_q(a1, b1)
    lams = _euler_partitions(q, m, series_cap)
    x = np.diag(x_eigs)
    y = np.diag(y_eigs)
    ev = jack.evaluator(2.0)

    def integrand(h: np.ndarray) -> float:
        prod = x @ h @ y @ h.T
        eye = np.eye(m)
        gdet = np.linalg.det(eye - prod)
        if gdet <= 0.0:
            raise QuadratureDomainError("det(I - X H Y H') <= 0 at a sample")
        mu = np.linalg.eigvals(prod).real
        xi = -mu / (1.0 - mu)
        total = 0.0
        for lam in lams:
            num = gen_pochhammer(b1 - a1, lam, 2.0) * gen_pochhammer(a2, lam, 2.0)
            if num == 0.0:
                continue
            den = gen_pochhammer(b1, lam, 2.0) * math.factorial(lam.weight)
            coef = num / den
            if include_identity_norm:
                coef /= jack.jack_C_identity(2.0, lam, m)
            total += coef * ev.jack_C(lam, tuple(xi))
        return gdet ** (-a2) * total

    return integrate_OK(integrand, m, spec)
