"""Hypergeometric series of one and two matrix arguments.

The two-matrix series is a double sum over total degree and partitions with
ratios of generalized Pochhammer symbols; it is evaluated with log-domain
magnitude guards and per-degree convergence diagnostics, because automatic
convergence detection for these series is an open problem and silent
truncation would hide exactly the failures the diagnostics exist to expose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from scipy.special import gammaln

from . import jack
from .partitions import Partition, partitions_of, signed_log_pochhammer

_LOG_HUGE = 700.0  # ~log of float max; terms beyond this overflow


class SeriesOverflowError(OverflowError):
    """A series term exceeded floating-point range before truncation."""


class PoleError(ValueError):
    """A gamma factor or denominator parameter sits on a pole."""


@dataclass(frozen=True)
class SeriesSpec:
    """Truncation control: total-degree cap and relative tail tolerance."""

    max_degree: int = 60
    tail_tolerance: float = 1e-12

    def __post_init__(self):
        if self.max_degree < 1:
            raise ValueError(f"max_degree must be >= 1, got {self.max_degree}")
        if self.tail_tolerance <= 0:
            raise ValueError(f"tail_tolerance must be positive, got {self.tail_tolerance}")


@dataclass
class SeriesReport:
    """Per-run diagnostics: degree increments, partial sums, convergence flags.

    ``converged`` is True iff the last three per-degree increments are each
    below tail_tolerance times the partial sum, or the series terminated
    exactly (a numerator parameter annihilates all higher degrees).
    """

    max_degree: int
    tail_tolerance: float
    degrees_used: int = 0
    last_term: float = 0.0
    partial_sums: list[float] = field(default_factory=list)
    increments: list[float] = field(default_factory=list)
    converged: bool = False
    terminated_exactly: bool = False


def mv_gamma(m: int, a: float) -> float:
    """Multivariate gamma: pi^{m(m-1)/4} prod_{i=1}^m Gamma(a - (i-1)/2)."""
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    val = math.pi ** (m * (m - 1) / 4.0)
    for i in range(1, m + 1):
        x = a - (i - 1) / 2.0
        if x <= 0 and x == math.floor(x):
            raise PoleError(f"multivariate gamma pole: a - (i-1)/2 = {x:g} at i = {i}")
        val *= math.gamma(x)
    return val


def mv_log_gamma(m: int, a: float) -> float:
    """log of :func:`mv_gamma`, valid on a > (m-1)/2 where all factors are positive."""
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if a <= (m - 1) / 2.0:
        raise PoleError(
            f"mv_log_gamma needs a > (m-1)/2 = {(m - 1) / 2.0:g}, got a = {a:g}"
        )
    val = math.log(math.pi) * (m * (m - 1) / 4.0)
    for i in range(1, m + 1):
        val += gammaln(a - (i - 1) / 2.0)
    return float(val)


def gauss_2f1_terminating(a: float, b: float, c: float, x: float) -> float:
    """Terminating Gauss series: requires a or b to be a nonpositive integer.

    Returns the exact finite sum sum_{j<=J} (a)_j (b)_j / ((c)_j j!) x^j where
    J is the smallest termination order.
    """

    def term_order(v: float) -> int | None:
        if v <= 0 and v == math.floor(v):
            return int(-v)
        return None

    orders = [o for o in (term_order(a), term_order(b)) if o is not None]
    if not orders:
        raise ValueError(f"series does not terminate: a = {a:g}, b = {b:g}")
    n = min(orders)
    total = 0.0
    term = 1.0
    for j in range(n + 1):
        total += term
        if j == n:
            break
        cj = c + j
        if cj == 0.0:
            raise PoleError(f"denominator parameter hits a pole: c + {j} = 0")
        term *= (a + j) * (b + j) / (cj * (j + 1)) * x
    return total


def _termination_degree(a_list, alpha: float, m: int) -> int | None:
    """Exact total-degree bound beyond which all series terms vanish, if any.

    A numerator parameter a makes the row-i factor vanish once
    k_i > q_i where q_i = -(a - (i-1)/alpha) whenever that is a nonnegative
    integer.  If the leading row is bounded, so is the total degree.
    """
    best = None
    for a in a_list:
        caps = []
        for i in range(m):
            x = -(a - i / alpha)
            caps.append(int(x) if (x >= 0 and x == math.floor(x)) else None)
        if caps[0] is None:
            continue
        degree = 0
        prev = caps[0]
        for cap in caps:
            row = prev if cap is None else min(prev, cap)
            degree += row
            prev = row
        if best is None or degree < best:
            best = degree
    return best


def _c_value(alpha: float, kappa: Partition, eigs: tuple[float, ...]) -> float:
    m = len(eigs)
    if kappa.length > m:
        return 0.0
    if m <= 2 and float(alpha) in (0.5, 1.0, 2.0):
        if m == 1:
            e1, e2 = eigs[0], 0.0
        else:
            e1, e2 = eigs[0] + eigs[1], eigs[0] * eigs[1]
        return jack.eval_c2(float(alpha), kappa, e1, e2)
    return jack.evaluator(alpha).jack_C(kappa, eigs)


@lru_cache(maxsize=64)
def _series_weights(a_list: tuple[float, ...], b_list: tuple[float, ...],
                    alpha: float, m: int, top: int):
    """Per-degree tables of (partition, sign, log weight) for the double series.

    The weight is prod (a_i)_kappa / (prod (b_j)_kappa * k! * C_kappa(I_m));
    it is independent of the matrix arguments, so one table serves every
    evaluation at the same parameters.  Partitions whose numerator vanishes
    are dropped (their terms are exactly zero); a vanishing denominator
    raises.
    """
    tables = []
    for k in range(1, top + 1):
        log_kfact = float(gammaln(k + 1))
        rows = []
        for kappa in partitions_of(k, m):
            sign = 1
            logmag = -log_kfact - math.log(jack.jack_C_identity(alpha, kappa, m))
            zero = False
            for a in a_list:
                s, lm = signed_log_pochhammer(a, kappa, alpha)
                if s == 0:
                    zero = True
                    break
                sign *= s
                logmag += lm
            if zero:
                continue
            for b in b_list:
                s, lm = signed_log_pochhammer(b, kappa, alpha)
                if s == 0:
                    raise PoleError(
                        f"denominator parameter {b:g} vanishes on partition {tuple(kappa)}"
                    )
                sign *= s
                logmag -= lm
            rows.append((kappa, sign, logmag))
        tables.append(rows)
    return tables


def hyper_two_matrix(a_list, b_list, x_eigs, y_eigs, alpha: float,
                     spec: SeriesSpec | None = None) -> tuple[float, SeriesReport]:
    """Truncated hypergeometric function of two matrix arguments.

    sum_k sum_{kappa |- k, l <= m}  prod (a_i)_kappa / prod (b_j)_kappa
        * C_kappa(X) C_kappa(Y) / (k! C_kappa(I_m))

    evaluated on the eigenvalues of X and Y.  Term ordering is deterministic
    (degree-major, reverse-lexicographic within a degree), so reruns produce
    bit-identical sums.  Overflowing terms raise SeriesOverflowError rather
    than saturating.
    """
    if spec is None:
        spec = SeriesSpec()
    x_eigs = tuple(float(v) for v in x_eigs)
    y_eigs = tuple(float(v) for v in y_eigs)
    if len(x_eigs) != len(y_eigs):
        raise ValueError(
            f"argument dimension mismatch: {len(x_eigs)} vs {len(y_eigs)}"
        )
    m = len(x_eigs)
    a_list = [float(a) for a in a_list]
    b_list = [float(b) for b in b_list]
    report = SeriesReport(max_degree=spec.max_degree, tail_tolerance=spec.tail_tolerance)

    if not any(x_eigs) or not any(y_eigs):
        # zero matrix argument: every nonempty partition contributes C(0) = 0
        report.partial_sums = [1.0]
        report.increments = [1.0]
        report.converged = True
        report.terminated_exactly = True
        return 1.0, report

    exact_stop = _termination_degree(a_list, alpha, m)
    top = spec.max_degree
    if exact_stop is not None and exact_stop < top:
        top = exact_stop

    weights = _series_weights(tuple(a_list), tuple(b_list), float(alpha), m, top)
    total = 1.0  # empty partition contributes 1
    report.partial_sums.append(total)
    report.increments.append(1.0)
    for k in range(1, top + 1):
        increment = 0.0
        for kappa, sign, logweight in weights[k - 1]:
            cx = _c_value(alpha, kappa, x_eigs)
            cy = _c_value(alpha, kappa, y_eigs)
            if cx == 0.0 or cy == 0.0:
                continue
            logmag = logweight + math.log(abs(cx)) + math.log(abs(cy))
            if cx < 0:
                sign = -sign
            if cy < 0:
                sign = -sign
            if logmag > _LOG_HUGE:
                raise SeriesOverflowError(
                    f"series term overflows at degree {k}, partition {tuple(kappa)} "
                    f"(log magnitude {logmag:.1f})"
                )
            increment += sign * math.exp(logmag)
        total += increment
        report.partial_sums.append(total)
        report.increments.append(increment)

    report.degrees_used = len(report.partial_sums) - 1
    report.last_term = abs(report.increments[-1])
    if exact_stop is not None and exact_stop <= spec.max_degree:
        report.terminated_exactly = True
        report.converged = True
    else:
        scale = abs(total)
        tail = report.increments[-3:]
        report.converged = len(tail) == 3 and all(
            abs(t) <= spec.tail_tolerance * max(scale, 1e-300) for t in tail
        )
    return total, report
