"""Decomposition of a real vector into integer-weighted binary rows.

A vector ``v`` is shifted by its minimum ``S``, scaled by its range ``D``
and quantized to integers ``w = round((v - S) / D * 10**I_e)``. The integer
vector is then peeled: the support of the remainder is emitted as a binary
row together with the smallest remaining value on that support, and that
multiple of the row is subtracted. Recomposition is

    v ~ (sum_i s_i * B_i) * D / U + S,   U = 10**I_e.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DecompositionResult:
    B: np.ndarray  # (rows, N) uint8
    s: np.ndarray  # (rows,) int64, every entry >= 1
    S: float
    D: float
    U: float
    I_e: int
    epsilon: float

    @property
    def rows(self) -> int:
        return self.B.shape[0]

    def to_dict(self) -> dict:
        return {
            "S": self.S,
            "D": self.D,
            "U": self.U,
            "I_e": self.I_e,
            "epsilon": self.epsilon,
            "s": [int(v) for v in self.s],
            "B": self.B.astype(int).tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "DecompositionResult":
        B = np.asarray(d["B"], dtype=np.uint8)
        if B.ndim != 2:
            raise ValueError("B must be a list of rows")
        return cls(
            B=B,
            s=np.asarray(d["s"], dtype=np.int64),
            S=float(d["S"]),
            D=float(d["D"]),
            U=float(d["U"]),
            I_e=int(d["I_e"]),
            epsilon=float(d["epsilon"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "DecompositionResult":
        return cls.from_dict(json.loads(text))


def decompose(v, I_e: int = 2, epsilon: float = 1e-3) -> DecompositionResult:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("v must be a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("v contains non-finite entries")
    if int(I_e) != I_e or not 1 <= I_e <= 9:
        raise ValueError(f"I_e must be an integer in [1, 9], got {I_e!r}")
    if not epsilon >= 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon!r}")
    I_e = int(I_e)
    N = v.size

    S = float(v.min())
    D = float((v - S).max())
    if D == 0:
        return DecompositionResult(
            B=np.zeros((1, N), dtype=np.uint8), s=np.ones(1, dtype=np.int64),
            S=S, D=1.0, U=1.0, I_e=I_e, epsilon=float(epsilon),
        )

    U = 10.0**I_e
    w = np.rint((v - S) / D * U).astype(np.int64)
    # Peeling support-by-support visits the distinct positive levels of w in
    # increasing order: step t emits [w >= level_t] with multiplicity
    # level_t - level_{t-1}.
    levels = np.unique(w[w > 0])
    counts = N - np.searchsorted(np.sort(w), levels, side="left")
    keep = counts / N >= epsilon
    # the support only shrinks, so epsilon cuts off a suffix of the levels
    stop = int(np.argmin(keep)) if not keep.all() else levels.size
    levels = levels[:stop]
    B = (w[None, :] >= levels[:, None]).astype(np.uint8)
    s = np.diff(levels, prepend=0).astype(np.int64)
    return DecompositionResult(B=B, s=s, S=S, D=D, U=U, I_e=I_e, epsilon=float(epsilon))


def recompose(r: DecompositionResult) -> np.ndarray:
    acc = r.s.astype(float) @ r.B.astype(float) if r.rows else np.zeros(r.B.shape[1])
    return acc * (r.D / r.U) + r.S
