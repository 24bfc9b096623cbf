"""Landmark ingestion, Helmertization, shape coordinates and sample roots.

A configuration is an N x K matrix of landmark coordinates.  Left-multiplying
by the (N-1) x N sub-Helmert contrast matrix removes translation; the shape
coordinates then come from an orthogonal reduction of the first figure, and
the squared canonical correlations of a pair are the latent roots shared by
the two equivalent determinant equations checked in the tests.

File format (UTF-8 text): optional '#' comment lines; a header "N K M"
(landmarks, dimensions, specimen count); then M blocks of N rows of K
whitespace-separated floats, blocks separated by one blank line.  Numbers are
written with 17 significant digits so parse/write round-trips are bit-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .density import CorrelationSample


class LandmarkFormatError(ValueError):
    """Malformed landmark text; the message carries the offending line."""


@dataclass(frozen=True)
class LandmarkConfiguration:
    """One labelled figure: N landmarks in K dimensions (rows x columns)."""

    label: str
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2:
            raise ValueError(f"coords must be a 2-D array, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise ValueError(f"configuration {self.label!r} has non-finite coordinates")
        coords = coords.copy()
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n_landmarks(self) -> int:
        return self.coords.shape[0]

    @property
    def n_dims(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class HelmertizedPair:
    """Translation-free pair: x and y are (N-1) x K with rank(x) = K."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape:
            raise ValueError(f"pair shapes differ: {x.shape} vs {y.shape}")
        if x.ndim != 2 or x.shape[0] <= x.shape[1]:
            raise ValueError(f"need more contrasts than dimensions, got shape {x.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def K(self) -> int:
        return self.x.shape[1]


def helmert_submatrix(n_landmarks: int) -> np.ndarray:
    """(N-1) x N sub-Helmert contrasts: orthonormal rows orthogonal to ones.

    Row j has j entries 1/sqrt(j(j+1)) followed by -j/sqrt(j(j+1)) and zeros;
    the leading signs are fixed positive for determinism.
    """
    if n_landmarks < 2:
        raise ValueError(f"need at least 2 landmarks, got {n_landmarks}")
    mat = np.zeros((n_landmarks - 1, n_landmarks))
    for j in range(1, n_landmarks):
        s = 1.0 / math.sqrt(j * (j + 1))
        mat[j - 1, :j] = s
        mat[j - 1, j] = -j * s
    return mat


def helmertize(coords: np.ndarray) -> np.ndarray:
    """Remove translation: the (N-1) x K contrast image of a configuration."""
    coords = np.asarray(coords, dtype=float)
    return helmert_submatrix(coords.shape[0]) @ coords


def eulerian_coordinates(pair: HelmertizedPair) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shape coordinates (X1, U, V) of a pair.

    One orthogonal H maps x to [X1; 0] with X1 upper triangular, positive
    diagonal, and the same H splits y into the K x K block U and the
    (n-K) x K block V.  X1 carries the first figure's shape; (U, V) carry
    the pair's joint structure.
    """
    n, k = pair.n, pair.K
    q_full, r_full = np.linalg.qr(pair.x, mode="complete")
    x1 = r_full[:k, :]
    diag = np.sign(np.diag(x1))
    if np.any(diag == 0) or np.any(np.abs(np.diag(x1)) < 1e-12 * max(1.0, np.abs(pair.x).max())):
        raise np.linalg.LinAlgError("first configuration is rank deficient")
    h = q_full.T.copy()
    h[:k, :] *= diag[:, None]
    x1 = x1 * diag[:, None]
    hy = h @ pair.y
    return x1, hy[:k, :], hy[k:, :]


def squared_canonical_correlations(pair: HelmertizedPair) -> CorrelationSample:
    """Sample squared canonical correlations of a Helmertized pair.

    Latent roots of (Y'Y)^{-1} Y'X (X'X)^{-1} X'Y, computed from the
    symmetric generalized eigenproblem for stability; sorted decreasing and
    clipped to [0, 1].
    """
    x, y = pair.x, pair.y
    gxx = x.T @ x
    gyy = y.T @ y
    for name, g in (("X", gxx), ("Y", gyy)):
        if np.linalg.cond(g) > 1e12:
            raise np.linalg.LinAlgError(f"{name}'{name} is singular or near singular")
    cross = y.T @ x
    mid = cross @ np.linalg.solve(gxx, cross.T)
    roots = scipy.linalg.eigvalsh(mid, gyy)
    roots = np.clip(roots, 0.0, 1.0)
    return CorrelationSample(tuple(sorted(roots, reverse=True)))


def build_correlation_samples(y_configs, x_configs, *, center: str = "auto",
                              y_mean=None, x_mean=None) -> list[CorrelationSample]:
    """Pairwise sample roots for a population against a second population,
    a template, or a single figure.

    ``x_configs`` must have the same length as ``y_configs`` or length one
    (replicated).

    Centering: an explicitly provided mean configuration (``y_mean`` /
    ``x_mean``, N x K) is always subtracted after Helmertization.  Otherwise
    ``center="auto"`` subtracts each side's sample mean, but only when both
    sides are genuine populations (>= 2 distinct specimens): against a fixed
    template or single figure the raw configurations are compared, since
    removing the population mean would strip exactly the component the
    template comparison is after, and the template's own mean is itself.
    ``center="none"`` disables the implicit centering.
    """
    if center not in ("auto", "none"):
        raise ValueError(f"center must be 'auto' or 'none', got {center!r}")
    y_configs = list(y_configs)
    x_configs = list(x_configs)
    if not y_configs:
        raise ValueError("no specimens supplied")
    if len(x_configs) not in (1, len(y_configs)):
        raise ValueError(
            f"need one or {len(y_configs)} figures on the second side, got {len(x_configs)}"
        )
    shape = y_configs[0].coords.shape
    for c in y_configs + x_configs:
        if c.coords.shape != shape:
            raise ValueError(
                f"configuration {c.label!r} has shape {c.coords.shape}, expected {shape}"
            )
    if len(x_configs) == 1:
        x_configs = x_configs * len(y_configs)

    y_h = [helmertize(c.coords) for c in y_configs]
    x_h = [helmertize(c.coords) for c in x_configs]

    def is_population(side):
        return any(not np.array_equal(side[0], m) for m in side[1:])

    means = [None, None]
    for idx, explicit in enumerate((y_mean, x_mean)):
        if explicit is not None:
            coords = explicit.coords if hasattr(explicit, "coords") else np.asarray(explicit)
            if coords.shape != shape:
                raise ValueError(
                    f"mean configuration has shape {coords.shape}, expected {shape}"
                )
            means[idx] = helmertize(coords)
    if center == "auto" and is_population(y_h) and is_population(x_h):
        if means[0] is None:
            means[0] = np.mean(y_h, axis=0)
        if means[1] is None:
            means[1] = np.mean(x_h, axis=0)
    for side, mean in zip((y_h, x_h), means):
        if mean is not None:
            for i in range(len(side)):
                side[i] = side[i] - mean

    samples = []
    for j, (yj, xj) in enumerate(zip(y_h, x_h)):
        try:
            samples.append(squared_canonical_correlations(HelmertizedPair(xj, yj)))
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(f"specimen pair {j}: {exc}") from exc
    return samples


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def _format_float(v: float) -> str:
    return format(v, ".17g")


def write_landmark_file(configs) -> bytes:
    """Serialize configurations sharing one (N, K) to the text format."""
    configs = list(configs)
    if not configs:
        raise ValueError("nothing to write")
    shape = configs[0].coords.shape
    for c in configs:
        if c.coords.shape != shape:
            raise ValueError(f"mixed shapes: {c.coords.shape} vs {shape}")
    lines = [f"{shape[0]} {shape[1]} {len(configs)}"]
    for idx, c in enumerate(configs):
        if idx:
            lines.append("")
        for row in c.coords:
            lines.append(" ".join(_format_float(v) for v in row))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_landmark_file(data: bytes | str, label_prefix: str = "specimen"
                        ) -> list[LandmarkConfiguration]:
    """Parse the landmark text format; errors carry 1-based line numbers."""
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    numbered = [(i + 1, line.strip()) for i, line in enumerate(text.splitlines())]
    content = [(no, line) for no, line in numbered if line and not line.startswith("#")]
    if not content:
        raise LandmarkFormatError("line 1: missing header 'N K M'")
    head_no, head = content[0]
    parts = head.split()
    if len(parts) != 3:
        raise LandmarkFormatError(f"line {head_no}: header must be 'N K M', got {head!r}")
    try:
        n, k, m = (int(p) for p in parts)
    except ValueError:
        raise LandmarkFormatError(
            f"line {head_no}: header must hold three integers, got {head!r}"
        ) from None
    if n < 1 or k < 1 or m < 0:
        raise LandmarkFormatError(f"line {head_no}: nonpositive header values in {head!r}")
    rows = content[1:]
    expected = n * m
    if len(rows) != expected:
        raise LandmarkFormatError(
            f"line {rows[-1][0] if rows else head_no}: expected {expected} coordinate "
            f"rows for {m} specimens of {n} landmarks, found {len(rows)}"
        )
    configs = []
    width = len(str(max(m, 1)))
    for s in range(m):
        block = rows[s * n:(s + 1) * n]
        coords = np.empty((n, k))
        for r, (no, line) in enumerate(block):
            fields = line.split()
            if len(fields) != k:
                raise LandmarkFormatError(
                    f"line {no}: expected {k} coordinates, found {len(fields)}"
                )
            for c, field in enumerate(fields):
                try:
                    v = float(field)
                except ValueError:
                    raise LandmarkFormatError(
                        f"line {no}: {field!r} is not a decimal number"
                    ) from None
                if not math.isfinite(v):
                    raise LandmarkFormatError(f"line {no}: non-finite value {field!r}")
                coords[r, c] = v
        configs.append(LandmarkConfiguration(f"{label_prefix}-{s + 1:0{width}d}", coords))
    return configs
