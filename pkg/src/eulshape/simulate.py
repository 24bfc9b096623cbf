"""Synthetic sampler for squared canonical correlations.

Draws n Gaussian rows with the canonical-form covariance [[I, P], [P, I]]
(P diagonal with the population canonical correlations), forms the Gram
blocks and returns the latent roots.  Blockwise nonsingular transformations
leave the roots invariant, so the canonical form loses no generality.  Each
sample has its own counter-based random stream keyed by (seed, index), so
results are deterministic and independent of evaluation order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .density import CorrelationSample

logger = logging.getLogger(__name__)

_TIE_TOL = 1e-12
_MAX_REDRAWS = 100


@dataclass(frozen=True)
class SimSpec:
    """Target model (K, n, rho2), sample count and seed."""

    K: int
    n: int
    rho2: tuple[float, ...]
    count: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rho2", tuple(float(r) for r in self.rho2))
        if self.K < 1:
            raise ValueError(f"K must be positive, got {self.K}")
        if self.n < 2 * self.K:
            raise ValueError(f"need n >= 2K, got n = {self.n}, K = {self.K}")
        if len(self.rho2) != self.K:
            raise ValueError(f"rho2 must have length {self.K}, got {len(self.rho2)}")
        for i, r in enumerate(self.rho2):
            if not (0.0 <= r < 1.0):
                raise ValueError(f"rho2[{i}] = {r:g} outside [0, 1)")
            if i and self.rho2[i - 1] < r:
                raise ValueError(f"rho2 must be weakly decreasing, got {self.rho2}")
        if self.count < 0:
            raise ValueError(f"count must be nonnegative, got {self.count}")


def _sample_stream(seed: int, index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_roots(spec: SimSpec, rng: np.random.Generator) -> np.ndarray:
    k, n = spec.K, spec.n
    rho = np.sqrt(np.asarray(spec.rho2))
    resid = np.sqrt(1.0 - rho ** 2)
    g_a = rng.standard_normal((n, k))
    g_b = rng.standard_normal((n, k))
    y = g_a
    x = g_a * rho + g_b * resid
    a11 = y.T @ y
    a22 = x.T @ x
    a12 = y.T @ x
    mid = a12 @ np.linalg.solve(a22, a12.T)
    roots = scipy.linalg.eigvalsh(mid, a11)
    return np.sort(roots)[::-1]


def sample_canonical_pairs(spec: SimSpec) -> list[CorrelationSample]:
    """``spec.count`` independent root vectors, strictly ordered and interior.

    Draws that tie or touch the boundary within 1e-12 (probability-zero
    events up to floating point) are redrawn from the same per-sample stream;
    the redraw count is logged at DEBUG level.
    """
    samples: list[CorrelationSample] = []
    redraws = 0
    for j in range(spec.count):
        rng = _sample_stream(spec.seed, j)
        for _ in range(_MAX_REDRAWS):
            roots = _draw_roots(spec, rng)
            interior = roots[0] < 1.0 - _TIE_TOL and roots[-1] > _TIE_TOL
            gaps_ok = spec.K == 1 or np.min(roots[:-1] - roots[1:]) > _TIE_TOL
            if interior and gaps_ok and np.all(np.isfinite(roots)):
                samples.append(CorrelationSample(tuple(roots)))
                break
            redraws += 1
        else:
            raise RuntimeError(f"sample {j}: exceeded {_MAX_REDRAWS} redraws")
    if redraws:
        logger.debug("resampled %d degenerate draws", redraws)
    return samples


def sample_r2_array(spec: SimSpec) -> np.ndarray:
    """Same draws as :func:`sample_canonical_pairs`, as a (count, K) array."""
    return np.array([s.r2 for s in sample_canonical_pairs(spec)], dtype=float).reshape(
        spec.count, spec.K
    )
