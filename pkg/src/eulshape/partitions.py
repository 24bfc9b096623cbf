"""Integer-partition combinatorics for symmetric-polynomial indexing.

Partitions (weakly decreasing tuples of positive integers) index the Jack
polynomials and the generalized Pochhammer symbols used by the matrix-argument
hypergeometric series.  Everything here is a pure function of immutable data.
"""

from __future__ import annotations

import math


class Partition(tuple):
    """A weakly decreasing tuple of positive integers.

    Trailing zeros are stripped on construction, so ``Partition((2, 0))``
    equals ``Partition((2,))``.  The empty partition is allowed and has
    weight 0 and length 0.
    """

    def __new__(cls, parts=()):
        parts = tuple(int(p) for p in parts)
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        for i, p in enumerate(parts):
            if p < 1:
                raise ValueError(f"partition parts must be positive, got {parts}")
            if i and parts[i - 1] < p:
                raise ValueError(f"partition parts must be weakly decreasing, got {parts}")
        return super().__new__(cls, parts)

    @property
    def weight(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def __repr__(self) -> str:
        return f"Partition({tuple(self)})"


def partitions_of(k: int, max_length: int | None = None) -> list[Partition]:
    """All partitions of ``k`` with at most ``max_length`` parts.

    Ordered reverse-lexicographically, e.g. (4), (3,1), (2,2) for
    ``partitions_of(4, 2)``.  ``k = 0`` yields exactly the empty partition.
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if max_length is None:
        max_length = k
    if max_length < 1 and k > 0:
        return []
    out: list[Partition] = []

    def descend(remaining: int, cap: int, prefix: tuple[int, ...]) -> None:
        if remaining == 0:
            out.append(Partition(prefix))
            return
        slots = max_length - len(prefix)
        if slots <= 0:
            return
        lo = -(-remaining // slots)  # ceil: smallest feasible leading part
        for part in range(min(cap, remaining), lo - 1, -1):
            descend(remaining - part, part, prefix + (part,))

    descend(k, k, ())
    return out


def conjugate(p: Partition) -> Partition:
    """Transpose of the partition diagram: k'_i = #{j : k_j >= i}."""
    p = Partition(p)
    if not p:
        return p
    return Partition(sum(1 for part in p if part >= i) for i in range(1, p[0] + 1))


def dominance_leq(lam, kappa) -> bool:
    """True iff every partial sum of ``lam`` is <= the one of ``kappa``.

    Only defined between partitions of equal weight.
    """
    lam, kappa = Partition(lam), Partition(kappa)
    if lam.weight != kappa.weight:
        raise ValueError(
            f"dominance order needs equal weights, got {lam.weight} and {kappa.weight}"
        )
    s_l = s_k = 0
    for i in range(max(len(lam), len(kappa))):
        s_l += lam[i] if i < len(lam) else 0
        s_k += kappa[i] if i < len(kappa) else 0
        if s_l > s_k:
            return False
    return True


def gen_pochhammer(a: float, p, alpha: float) -> float:
    """Generalized rising factorial (a)_p with Jack parameter ``alpha``.

    (a)_p = prod_i (a - (i-1)/alpha)_{p_i} with the scalar rising factorial
    (x)_n = x (x+1) ... (x+n-1).  Returns exactly 0.0 when a factor chain
    crosses zero; with alpha = 2 and a = -q this happens iff p_1 > q, which
    is what truncates the terminating hypergeometric series.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    p = Partition(p)
    val = 1.0
    for i, part in enumerate(p):
        base = a - i / alpha
        for j in range(part):
            val *= base + j
    return val


def signed_log_pochhammer(a: float, p, alpha: float) -> tuple[int, float]:
    """(sign, log|value|) form of :func:`gen_pochhammer` for overflow-safe series.

    Sign 0 encodes an exact zero (log magnitude is then ``-inf``).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    p = Partition(p)
    sign = 1
    logmag = 0.0
    for i, part in enumerate(p):
        base = a - i / alpha
        for j in range(part):
            f = base + j
            if f == 0.0:
                return 0, float("-inf")
            if f < 0:
                sign = -sign
            logmag += math.log(abs(f))
    return sign, logmag


def hook_norm(p, alpha: float) -> float:
    """Product of upper and lower hook lengths over the cells of ``p``.

    Upper hook at cell (i, j): k'_j - i + alpha (k_i - j + 1);
    lower hook:               k'_j - i + 1 + alpha (k_i - j).
    This is the normalizing constant relating the two Jack scalings; it is
    only used for nonempty partitions (the empty case is 1 by convention
    upstream), so the empty partition is rejected here.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    p = Partition(p)
    if not p:
        raise ValueError("hook_norm is undefined for the empty partition")
    conj = conjugate(p)
    prod = 1.0
    for i, part in enumerate(p, start=1):
        for j in range(1, part + 1):
            upper = conj[j - 1] - i + alpha * (part - j + 1)
            lower = conj[j - 1] - i + 1 + alpha * (part - j)
            prod *= upper * lower
    return prod
