"""Closed-form constants, tail probabilities and error bounds for random scaling.

All functions are pure. Vacuous bounds are returned as computed (a
probability floor may be negative, an error bound may exceed one); nothing
is clamped except the zero-width limits, where an exponential tail with an
infinite exponent is reported as exactly zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from scalex.core import InvalidInputError, Marginals

__all__ = [
    "ConcentrationReport",
    "EnsembleBounds",
    "MarginalProfile",
    "concentration_constants",
    "error_measure",
    "lemma1_bounds",
    "lemma2_tail",
    "lemma3_bound",
    "rho_profile",
    "theorem2_report",
]


@dataclass(frozen=True, eq=False)
class EnsembleBounds:
    """Entrywise almost-sure support ``[lower, upper]`` of a random matrix.

    ``a`` is the smallest lower value, ``b`` the largest upper value and
    ``d`` the largest width ``upper - lower``.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=np.float64)
        hi = np.array(self.upper, dtype=np.float64)
        if lo.ndim != 2 or lo.shape != hi.shape or lo.size == 0:
            raise InvalidInputError(
                f"envelope arrays must be 2-D with equal shapes, got {lo.shape} and {hi.shape}"
            )
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidInputError("envelope has non-finite values")
        if np.any(lo <= 0):
            raise InvalidInputError("envelope lower values must be strictly positive")
        if np.any(hi < lo):
            i, j = np.argwhere(hi < lo)[0]
            raise InvalidInputError(f"envelope upper < lower at row {i}, column {j}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def shape(self) -> tuple[int, int]:
        return self.lower.shape

    @property
    def a(self) -> float:
        return float(self.lower.min())

    @property
    def b(self) -> float:
        return float(self.upper.max())

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def d(self) -> float:
        return float(self.widths.max())

    @classmethod
    def constant(cls, M: int, N: int, low: float, high: float) -> "EnsembleBounds":
        return cls(np.full((M, N), float(low)), np.full((M, N), float(high)))

    @classmethod
    def around(cls, A, half_width: float) -> "EnsembleBounds":
        """Envelope ``[A - h, A + h]`` of a uniform perturbation of ``A``."""
        A = np.asarray(A, dtype=np.float64)
        return cls(A - half_width, A + half_width)

    @classmethod
    def from_scalars(cls, M: int, N: int, a: float, b: float, d: float) -> "EnsembleBounds":
        """Some envelope whose aggregates are exactly ``(a, b, d)``.

        Entry ``(0, 0)`` is ``[b - d, b]`` and every other entry is
        ``[a, a + d]``. Requires ``0 < a``, ``0 <= d <= b - a`` and, unless
        ``b == a + d``, at least two entries.
        """
        if not (a > 0 and 0 <= d <= b - a):
            raise InvalidInputError(f"need 0 < a and 0 <= d <= b - a, got a={a}, b={b}, d={d}")
        if M * N < 2 and not math.isclose(b, a + d):
            raise InvalidInputError("a 1x1 envelope needs b == a + d")
        lo = np.full((M, N), float(a))
        hi = np.full((M, N), float(a + d))
        lo[0, 0], hi[0, 0] = b - d, b
        if M * N == 1:
            lo[0, 0] = a
        return cls(lo, hi)


@dataclass(frozen=True)
class MarginalProfile:
    rho1: float
    rho2: float
    rho3: float
    M: int
    N: int


@dataclass(frozen=True)
class ConcentrationReport:
    delta: float
    probability_floor: float
    row_rel_error_bound: float
    col_rel_error_bound: float
    c_p: float
    c_e: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def lemma1_bounds(env: EnsembleBounds) -> tuple[float, float]:
    """Interval ``(sqrt(a)/b, sqrt(b)/a)`` containing every ratio ``x_i / r_bar_i`` and ``y_j / c_bar_j``.

    Holds for the gauge-normalized factors of any matrix with entries in
    ``[env.a, env.b]``.
    """
    a, b = env.a, env.b
    return math.sqrt(a) / b, math.sqrt(b) / a


def _check_dims(m: Marginals, M: int, N: int):
    if (m.M, m.N) != (M, N):
        raise InvalidInputError(f"marginals have shape ({m.M}, {m.N}), expected ({M}, {N})")


def rho_profile(m: Marginals, M: int, N: int) -> MarginalProfile:
    r, c, s = m.r, m.c, m.s
    _check_dims(m, M, N)
    rho1 = max(float(np.linalg.norm(r)) / s, float(np.linalg.norm(c)) / s)
    rho2 = max(s / (M * float(r.min())), s / (N * float(c.min())))
    rho3 = math.sqrt(M) * float(r.max()) * math.sqrt(N) * float(c.max()) / s
    return MarginalProfile(rho1=rho1, rho2=rho2, rho3=rho3, M=M, N=N)


def concentration_constants(a: float, b: float, d: float) -> tuple[float, float]:
    """``(C_p, C_e) = (sqrt(2) * b * d / a**2, 1 + 2 * (b / a)**3.5)``."""
    return math.sqrt(2.0) * b * d / a**2, 1.0 + 2.0 * (b / a) ** 3.5


def _neg_exp(numerator: float, denominator: float) -> float:
    # exp(-numerator / denominator), continuously extended to 0 at denominator == 0
    if denominator == 0.0:
        return 0.0
    return math.exp(-numerator / denominator)


def theorem2_report(
    env: EnsembleBounds, m: Marginals, M: int, N: int, delta: float
) -> ConcentrationReport:
    """Probability floor and relative error bounds for the random scaling factors.

    With probability at least ``probability_floor`` the factors of the random
    matrix deviate from those of its mean by at most ``row_rel_error_bound``
    (rows) and ``col_rel_error_bound`` (columns), relatively and entrywise.
    """
    if not (0.0 < delta <= 1.0):
        raise InvalidInputError(f"delta must lie in (0, 1], got {delta}")
    _check_dims(m, M, N)
    if env.shape != (M, N):
        raise InvalidInputError(f"envelope shape {env.shape} does not match ({M}, {N})")
    c_p, c_e = concentration_constants(env.a, env.b, env.d)
    s = m.s
    num = delta**2 * s**2
    prob = (
        1.0
        - 2 * M * _neg_exp(num, c_p**2 * float(m.c @ m.c))
        - 2 * N * _neg_exp(num, c_p**2 * float(m.r @ m.r))
    )
    row = c_e * delta * s / (M * float(m.r.min()))
    col = c_e * delta * s / (N * float(m.c.min()))
    return ConcentrationReport(
        delta=float(delta),
        probability_floor=prob,
        row_rel_error_bound=row,
        col_rel_error_bound=col,
        c_p=c_p,
        c_e=c_e,
    )


def lemma2_tail(env: EnsembleBounds, m: Marginals, eps: float, axis: str, index: int) -> float:
    """Hoeffding bound on a relative row or column sum deviation.

    Bounds ``Pr{|sum_j x_i A~_ij y_j / r_i - 1| > eps}`` for ``axis="row"``
    (and the column analogue for ``axis="col"``), where ``(x, y)`` scales the
    mean matrix and ``A~`` has independent entries within the selected line,
    each supported on its envelope interval.
    """
    if not eps > 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    M, N = env.shape
    _check_dims(m, M, N)
    C = env.b / env.a**2
    w2 = env.widths**2
    if axis == "row":
        if not 0 <= index < M:
            raise InvalidInputError(f"row index {index} out of range for M={M}")
        spread = float(m.c**2 @ w2[index])
    elif axis == "col":
        if not 0 <= index < N:
            raise InvalidInputError(f"column index {index} out of range for N={N}")
        spread = float(m.r**2 @ w2[:, index])
    else:
        raise InvalidInputError(f"axis must be 'row' or 'col', got {axis!r}")
    return 2.0 * _neg_exp(2.0 * eps**2 * m.s**2, C**2 * spread)


def lemma3_bound(
    eps: float,
    env_a: float,
    env_b: float,
    s: float,
    M: int,
    min_r: float,
    N: int,
    min_c: float,
    C1: float,
    C2: float,
) -> tuple[float, float]:
    """Stability of scaling factors under approximate scaling.

    If ``(x, y)`` scales a matrix with entries in ``[env_a, env_b]`` to within
    relative ``eps`` of every target, some exact scaling pair lies within the
    returned relative distances of ``x`` (rows) and ``y`` (columns).
    ``C1 = min_i x_i / r_bar_i`` and ``C2 = min_j y_j / c_bar_j`` are supplied
    by the caller.
    """
    if eps >= 1.0 or eps < 0.0:
        raise InvalidInputError(f"eps must lie in [0, 1), got {eps}")
    for name, v in [("env_a", env_a), ("env_b", env_b), ("s", s), ("min_r", min_r),
                    ("min_c", min_c), ("C1", C1), ("C2", C2)]:
        if not v > 0:
            raise InvalidInputError(f"{name} must be positive, got {v}")
    head = eps / (1.0 - eps)
    k = 4.0 * eps * s * math.sqrt(env_b) / (env_a**2 * C1**1.5 * C2**1.5)
    return head + k / (M * min_r), head + k / (N * min_c)


def error_measure(x_tilde, y_tilde, x, y) -> float:
    """Largest entrywise relative error of ``(x_tilde, y_tilde)`` against ``(x, y)``.

    No gauge alignment is done here: both pairs should already satisfy
    ``||x||_1 == ||y||_1``.
    """
    xt, yt = np.asarray(x_tilde, dtype=np.float64), np.asarray(y_tilde, dtype=np.float64)
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if xt.shape != x.shape or yt.shape != y.shape or x.ndim != 1 or y.ndim != 1:
        raise InvalidInputError(
            f"length mismatch: x_tilde {xt.shape} vs x {x.shape}, y_tilde {yt.shape} vs y {y.shape}"
        )
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidInputError("reference factors must be strictly positive")
    return float(max(np.max(np.abs(xt - x) / x), np.max(np.abs(yt - y) / y)))
