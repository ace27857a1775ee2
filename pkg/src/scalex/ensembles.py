"""Seeded random positive matrices.

Three ensembles:

* ``uniform_population``: i.i.d. entries uniform on ``[low, high]``.
* ``uniform_observation``: ``A + U`` with ``U`` i.i.d. uniform on ``[-h, h]``,
  i.e. a noisy observation whose entrywise mean is ``A``.
* ``rademacher_dependent``: entry ``(i, j)`` is ``upper_ij`` when
  ``u_i * v_j == +1`` and ``lower_ij`` otherwise, for independent Rademacher
  signs ``u`` (rows) and ``v`` (columns). Entries are independent within any
  single row or column, but the matrix as a whole is strongly dependent.

Each generator is a pure function of its arguments and ``seed``; see
:mod:`scalex.rng` for the stream definition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from scalex.bounds import EnsembleBounds
from scalex.core import InvalidInputError
from scalex.rng import derive_seed, philox

KINDS = ("uniform_population", "uniform_observation", "rademacher_dependent")


def gen_population(M: int, N: int, low: float, high: float, seed: int) -> np.ndarray:
    if not (0 < low < high):
        raise InvalidInputError(f"need 0 < low < high, got low={low}, high={high}")
    if M < 1 or N < 1:
        raise InvalidInputError(f"matrix dimensions must be positive, got ({M}, {N})")
    out = philox(seed).random((M, N))
    out *= high - low
    out += low
    return out


def gen_observation(A, half_width: float, seed: int) -> np.ndarray:
    """Noisy observation ``A + U`` with ``U_ij`` uniform on ``[-half_width, half_width]``."""
    A = np.asarray(A, dtype=np.float64)
    if not half_width > 0:
        raise InvalidInputError(f"half_width must be positive, got {half_width}")
    if A.ndim != 2 or A.size == 0:
        raise InvalidInputError(f"A must be a non-empty 2-D matrix, got shape {A.shape}")
    if not A.min() > half_width:
        raise InvalidInputError(
            f"min entry of A ({A.min()}) must exceed half_width ({half_width}) to stay positive"
        )
    out = philox(seed).random(A.shape)
    out *= 2.0 * half_width
    out += A - half_width
    return out


def rademacher_signs(M: int, N: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Row signs ``u`` then column signs ``v``, each +1/-1 with probability 1/2."""
    rng = philox(seed)
    u = 2 * rng.integers(0, 2, size=M) - 1
    v = 2 * rng.integers(0, 2, size=N) - 1
    return u, v


def gen_rademacher_dependent(M: int, N: int, env: EnsembleBounds, seed: int) -> np.ndarray:
    if env.shape != (M, N):
        raise InvalidInputError(f"envelope shape {env.shape} does not match ({M}, {N})")
    u, v = rademacher_signs(M, N, seed)
    plus = np.outer(u, v) > 0
    return np.where(plus, env.upper, env.lower)


@dataclass(frozen=True)
class EnsembleSpec:
    """Serializable description of one generated matrix.

    ``parameters`` by kind:

    * ``uniform_population``: ``low``, ``high``
    * ``uniform_observation``: ``low``, ``high`` (population interval) and
      ``half_width``; the population is drawn with ``derive_seed(seed, "population")``
      and the noise with ``derive_seed(seed, "observation")``.
    * ``rademacher_dependent``: ``lower``, ``upper`` as nested lists
    """

    kind: str
    M: int
    N: int
    seed: int
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown ensemble kind {self.kind!r}; expected one of {KINDS}")
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        p = self.parameters
        if self.kind in ("uniform_population", "uniform_observation"):
            if not (0 < p.get("low", 0) < p.get("high", 0)):
                raise InvalidInputError("interval endpoints must satisfy 0 < low < high")
        if self.kind == "uniform_observation" and not (0 < p.get("half_width", 0) < p["low"]):
            raise InvalidInputError("half_width must be positive and below low")

    def generate(self) -> np.ndarray:
        p = self.parameters
        if self.kind == "uniform_population":
            return gen_population(self.M, self.N, p["low"], p["high"], self.seed)
        if self.kind == "uniform_observation":
            A = gen_population(self.M, self.N, p["low"], p["high"], derive_seed(self.seed, "population"))
            return gen_observation(A, p["half_width"], derive_seed(self.seed, "observation"))
        env = EnsembleBounds(np.array(p["lower"]), np.array(p["upper"]))
        return gen_rademacher_dependent(self.M, self.N, env, self.seed)

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "M": self.M, "N": self.N, "seed": int(self.seed),
             "parameters": self.parameters}
        )

    @classmethod
    def from_json(cls, text: str) -> "EnsembleSpec":
        d = json.loads(text)
        return cls(kind=d["kind"], M=int(d["M"]), N=int(d["N"]), seed=int(d["seed"]),
                   parameters=d.get("parameters", {}))
