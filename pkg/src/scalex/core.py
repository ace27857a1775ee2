"""Sinkhorn-Knopp scaling of positive matrices to prescribed row/column sums.

A pair of positive vectors ``(x, y)`` scales ``A`` to row sums ``r`` and
column sums ``c`` when ``P = diag(x) @ A @ diag(y)`` satisfies
``P.sum(1) == r`` and ``P.sum(0) == c``. For strictly positive ``A`` the
scaled matrix ``P`` is unique and the factors are unique up to
``(alpha * x, y / alpha)``; :func:`normalize_gauge` fixes ``alpha`` by
requiring ``||x||_1 == ||y||_1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from scalex.rng import philox

__all__ = [
    "InvalidInputError",
    "Marginals",
    "ScalingSolution",
    "as_positive_matrix",
    "margin_residual",
    "normalize_gauge",
    "operator_norm",
    "scaled_matrix",
    "sinkhorn_knopp",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITERS = 10**6
# relative mismatch allowed between ||r||_1 and ||c||_1
MARGINAL_CONSISTENCY_TOL = 1e-8


class InvalidInputError(ValueError):
    """Raised when an input violates an operation's preconditions."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_positive_matrix(A, name: str = "A") -> np.ndarray:
    """Return ``A`` as a 2-D float64 array, checking it is finite and strictly positive.

    The error message names the first offending entry as ``(row, column)``,
    zero-based.
    """
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D matrix, got shape {A.shape}")
    bad = ~np.isfinite(A)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise InvalidInputError(f"{name} entry at row {i}, column {j} is not finite ({A[i, j]})")
    bad = A <= 0
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise InvalidInputError(
            f"{name} entry at row {i}, column {j} is not strictly positive ({A[i, j]})"
        )
    return A


def _positive_vector(v, name: str) -> np.ndarray:
    v = np.array(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if np.any(v <= 0):
        k = int(np.argmax(v <= 0))
        raise InvalidInputError(f"{name} entry {k} is not strictly positive ({v[k]})")
    return v


@dataclass(frozen=True, eq=False)
class Marginals:
    """Target row sums ``r`` and column sums ``c``.

    ``s`` is the common total mass; when ``||r||_1`` and ``||c||_1`` differ by
    rounding only it is their average. ``r_bar = r / sqrt(s)`` and
    ``c_bar = c / sqrt(s)`` are the natural scale of the gauge-normalized
    factors.
    """

    r: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        r = _positive_vector(self.r, "row sums r")
        c = _positive_vector(self.c, "column sums c")
        sr, sc = float(r.sum()), float(c.sum())
        if abs(sr - sc) > MARGINAL_CONSISTENCY_TOL * max(sr, sc):
            raise InvalidInputError(
                f"inconsistent marginals: sum(r) = {sr!r} but sum(c) = {sc!r}"
            )
        s = 0.5 * (sr + sc)
        root = np.sqrt(s)
        object.__setattr__(self, "r", _frozen(r))
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "r_bar", _frozen(r / root))
        object.__setattr__(self, "c_bar", _frozen(c / root))

    @property
    def M(self) -> int:
        return self.r.size

    @property
    def N(self) -> int:
        return self.c.size

    @classmethod
    def uniform(cls, M: int, N: int, row_value: float = 1.0, col_value: float | None = None):
        """Constant targets; ``col_value`` defaults to ``row_value * M / N``."""
        if col_value is None:
            col_value = row_value * M / N
        return cls(np.full(M, float(row_value)), np.full(N, float(col_value)))


@dataclass(frozen=True, eq=False)
class ScalingSolution:
    """Result of :func:`sinkhorn_knopp`.

    Attributes
    ----------
    x, y : ndarray
        Row and column factors, gauge-normalized so ``x.sum() == y.sum()``.
    scaled : ndarray
        ``x[:, None] * A * y[None, :]``.
    iterations : int
        Number of row+column sweeps performed.
    final_margin_error : float
        Largest absolute deviation of a row or column sum of ``scaled``
        from its target.
    converged : bool
        Whether ``final_margin_error <= tol`` was reached within ``max_iters``.
    """

    x: np.ndarray
    y: np.ndarray
    scaled: np.ndarray
    iterations: int
    final_margin_error: float
    converged: bool


def scaled_matrix(A: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``diag(x) @ A @ diag(y)`` computed entrywise."""
    return (x[:, None] * A) * y[None, :]


def normalize_gauge(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Rescale ``(x, y)`` to ``(alpha * x, y / alpha)`` with equal l1 norms.

    ``alpha = sqrt(||y||_1 / ||x||_1)``. The products ``x_i * y_j`` are
    unchanged.

    >>> normalize_gauge([4.0], [1.0])
    (array([2.]), array([2.]))
    """
    x = _positive_vector(x, "x")
    y = _positive_vector(y, "y")
    alpha = np.sqrt(y.sum() / x.sum())
    return alpha * x, y / alpha


def margin_residual(P, m: Marginals) -> float:
    """Max absolute deviation of the row and column sums of ``P`` from ``m``."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape != (m.M, m.N):
        raise InvalidInputError(
            f"matrix shape {P.shape} does not match marginals ({m.M}, {m.N})"
        )
    row_err = np.max(np.abs(P.sum(axis=1) - m.r))
    col_err = np.max(np.abs(P.sum(axis=0) - m.c))
    return float(max(row_err, col_err))


def sinkhorn_knopp(
    A,
    m: Marginals,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    y0=None,
) -> ScalingSolution:
    """Scale ``A`` to the row/column sums in ``m`` by alternating normalization.

    Each sweep sets ``x = r / (A @ y)`` and then ``y = c / (A.T @ x)``, so
    column sums are exact (to rounding) after every sweep and the stopping
    test is driven by the row sums. The iteration starts from ``y0``
    (all ones by default).

    Parameters
    ----------
    A : array_like, shape (M, N)
        Strictly positive matrix.
    m : Marginals
        Targets; ``m.r`` has length M and ``m.c`` length N.
    tol : float
        Absolute tolerance on every row and column sum.
    max_iters : int
        Sweep cap. Exhausting it is not an error: the returned solution has
        ``converged=False``.
    y0 : array_like, optional
        Positive starting column factors.

    Returns
    -------
    ScalingSolution
        Factors in the canonical gauge ``x.sum() == y.sum()``.
    """
    A = as_positive_matrix(A)
    M, N = A.shape
    if (m.M, m.N) != (M, N):
        raise InvalidInputError(f"matrix shape {A.shape} does not match marginals ({m.M}, {m.N})")
    if not tol > 0:
        raise InvalidInputError(f"tol must be positive, got {tol}")
    if int(max_iters) < 1:
        raise InvalidInputError(f"max_iters must be >= 1, got {max_iters}")
    max_iters = int(max_iters)

    y = np.ones(N) if y0 is None else _positive_vector(y0, "y0").copy()
    if y.size != N:
        raise InvalidInputError(f"y0 has length {y.size}, expected {N}")
    r, c = m.r, m.c

    Ay = A @ y
    it = 0
    while True:
        it += 1
        x = r / Ay
        y = c / (x @ A)
        Ay = A @ y
        estimate = np.max(np.abs(x * Ay - r))
        if estimate <= tol or it >= max_iters:
            xs, ys = normalize_gauge(x, y)
            P = scaled_matrix(A, xs, ys)
            err = margin_residual(P, m)
            if err <= tol or it >= max_iters:
                return ScalingSolution(
                    x=_frozen(xs),
                    y=_frozen(ys),
                    scaled=_frozen(P),
                    iterations=it,
                    final_margin_error=err,
                    converged=bool(err <= tol),
                )


def _power_norm(P: np.ndarray, tol: float, seed: int, max_iters: int) -> float:
    v = philox(seed).standard_normal(P.shape[1])
    v /= np.linalg.norm(v)
    lam_prev = None
    lam = 0.0
    for _ in range(max_iters):
        w = P @ v
        lam = float(w @ w)  # Rayleigh quotient of P^T P at unit v
        if lam == 0.0:
            return 0.0
        if lam_prev is not None and abs(lam - lam_prev) <= tol * lam:
            break
        lam_prev = lam
        u = w @ P
        v = u / np.linalg.norm(u)
    return float(np.sqrt(lam))


def _bidiag_top(alphas: list[float], betas: list[float]) -> float:
    # upper bidiagonal, k x k or k x (k+1) when a trailing beta is present
    k = len(alphas)
    B = np.zeros((k, len(betas) + 1 if len(betas) >= k else k))
    B[np.arange(k), np.arange(k)] = alphas
    B[np.arange(len(betas)), np.arange(1, len(betas) + 1)] = betas
    return float(scipy.linalg.svdvals(B)[0])


def _lanczos_norm(P: np.ndarray, tol: float, seed: int, max_iters: int) -> float:
    # Golub-Kahan bidiagonalization with full reorthogonalization
    M, N = P.shape
    scale = float(np.linalg.norm(P))
    if scale == 0.0:
        return 0.0
    tiny = 1e-13 * scale
    kmax = min(M, N, max_iters)
    V = np.empty((kmax + 1, N))
    U = np.empty((kmax, M))
    alphas: list[float] = []
    betas: list[float] = []
    v = philox(seed).standard_normal(N)
    V[0] = v / np.linalg.norm(v)
    sigma_prev = None
    for k in range(kmax):
        u = P @ V[k]
        if k:
            u -= betas[-1] * U[k - 1]
            u -= U[:k].T @ (U[:k] @ u)
        alpha = float(np.linalg.norm(u))
        if alpha <= tiny:
            break
        U[k] = u / alpha
        alphas.append(alpha)
        v = U[k] @ P - alpha * V[k]
        v -= V[: k + 1].T @ (V[: k + 1] @ v)
        beta = float(np.linalg.norm(v))
        sigma = _bidiag_top(alphas, betas)
        if sigma_prev is not None and abs(sigma - sigma_prev) <= tol * sigma:
            break
        sigma_prev = sigma
        if beta <= tiny:
            break
        betas.append(beta)
        V[k + 1] = v / beta
    return _bidiag_top(alphas, betas)


def operator_norm(
    P, tol: float = 1e-10, method: str = "power", seed: int = 0, max_iters: int = 100_000
) -> float:
    """Largest singular value of ``P``.

    Parameters
    ----------
    P : array_like, shape (M, N)
        Finite matrix.
    tol : float
        Relative stagnation tolerance. For ``method="power"`` it applies to
        the Rayleigh quotient of ``P.T @ P``; for ``method="lanczos"`` to the
        leading Ritz value.
    method : {"power", "lanczos"}
        ``"power"`` runs power iteration on ``P.T @ P``. ``"lanczos"`` runs
        Golub-Kahan bidiagonalization, which needs far fewer products when
        the top singular values are clustered (e.g. a noise matrix).
    seed : int
        Seed of the deterministic start vector.
    """
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.size == 0:
        raise InvalidInputError(f"operator_norm needs a non-empty 2-D matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("operator_norm input has NaN or infinite entries")
    if not tol > 0:
        raise InvalidInputError(f"tol must be positive, got {tol}")
    if method == "power":
        return _power_norm(P, tol, seed, max_iters)
    if method == "lanczos":
        return _lanczos_norm(P, tol, seed, max_iters)
    raise InvalidInputError(f"unknown operator_norm method {method!r}")
