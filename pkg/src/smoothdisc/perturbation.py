"""Rademacher sampling, even-row conditioning, parity padding and target sets."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import KomlosMatrix, RademacherMatrix, SignVector, validate_komlos
from .errors import DimensionMismatch, PreconditionViolated


def sample_rademacher(d: int, n: int, rng: np.random.Generator) -> RademacherMatrix:
    if d < 1 or n < 1:
        raise ValueError("d and n must be positive")
    return RademacherMatrix(rng.choice(np.array([-1, 1], dtype=np.int8), size=(d, n)))


def _even_rows(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    R = np.empty((d, n), dtype=np.int8)
    R[:, 1:] = rng.choice(np.array([-1, 1], dtype=np.int8), size=(d, n - 1))
    ones = np.count_nonzero(R[:, 1:] == 1, axis=1)
    R[:, 0] = np.where(ones % 2 == 0, -1, 1)
    return R


def sample_row_even(n: int, rng: np.random.Generator) -> SignVector:
    """Uniform member of the even class: entries 2..n free, entry 1 fixes parity."""
    if n < 1:
        raise ValueError("n must be positive")
    return SignVector(_even_rows(1, n, rng)[0])


def sample_even_rademacher(d: int, n: int, rng: np.random.Generator) -> RademacherMatrix:
    return RademacherMatrix(_even_rows(d, n, rng), row_parity_even=True)


def resample_first_column(R: RademacherMatrix, rng: np.random.Generator) -> RademacherMatrix:
    """Redraw column 1 i.i.d., turning even-row R into an unconditioned Rademacher matrix."""
    if not R.row_parity_even:
        raise PreconditionViolated("resampling expects a matrix with even rows")
    out = np.array(R.entries, copy=True)
    out[:, 0] = rng.choice(np.array([-1, 1], dtype=np.int8), size=R.d)
    return RademacherMatrix(out)


# ---------------------------------------------------------------- padding

@dataclass(frozen=True)
class PaddedInstance:
    base: KomlosMatrix
    padded: KomlosMatrix
    pad_count: int

    @property
    def pad_column(self) -> np.ndarray:
        return np.full(self.base.d, 1.0 / math.sqrt(self.base.d))

    def sidecar_json(self, **seeds) -> str:
        return json.dumps({"d": self.base.d, "n": self.base.n, "pad_count": self.pad_count,
                           "seeds": {k: int(v) for k, v in seeds.items()}}, sort_keys=True)


def pad_count_for(n: int) -> int:
    return 1 if n % 2 else 2


def pad_matrix(M: KomlosMatrix) -> PaddedInstance:
    """Append one copy of ``1/sqrt(d)`` if n is odd, two if n is even."""
    k = pad_count_for(M.n)
    u = np.full((M.d, 1), 1.0 / math.sqrt(M.d))
    padded = validate_komlos(np.hstack([M.values] + [u] * k))
    return PaddedInstance(M, padded, k)


def pad_entries(x_parity: int, pad_count: int) -> tuple[int, ...]:
    if pad_count == 1:
        return (-1,) if x_parity == 0 else (1,)
    if pad_count == 2:
        return (-1, -1) if x_parity == 0 else (-1, 1)
    raise ValueError("pad_count must be 1 or 2")


def pad_vector(x: SignVector, pad_count: int) -> SignVector:
    """Append entries making the +1 count even."""
    out = SignVector(np.concatenate([x.entries, np.array(pad_entries(x.parity, pad_count), dtype=np.int8)]))
    assert out.parity == 0
    return out


def pad_vectors(X: np.ndarray, pad_count: int) -> np.ndarray:
    """Vectorised :func:`pad_vector` over the rows of an int8 array."""
    par = np.count_nonzero(X == 1, axis=1) % 2
    if pad_count == 1:
        pads = np.where(par == 0, -1, 1)[:, None]
    elif pad_count == 2:
        pads = np.column_stack([-np.ones_like(par), np.where(par == 0, -1, 1)])
    else:
        raise ValueError("pad_count must be 1 or 2")
    return np.hstack([X, pads.astype(X.dtype)])


def unpad(x_padded: SignVector, R_padded: RademacherMatrix, pad_count: int) -> tuple[SignVector, RademacherMatrix]:
    """Drop the trailing pad entries of x and pad columns of R."""
    if pad_count not in (1, 2):
        raise ValueError("pad_count must be 1 or 2")
    if len(x_padded) != R_padded.n or len(x_padded) <= pad_count:
        raise DimensionMismatch("padded vector and matrix lengths are inconsistent")
    x = SignVector(x_padded.entries[:-pad_count])
    R = RademacherMatrix(R_padded.entries[:, :-pad_count])
    return x, R


# ---------------------------------------------------------------- target sets

@dataclass(frozen=True)
class TargetSet:
    """Even integers in ``[-sqrt(d)(Mx)_i - 1, -sqrt(d)(Mx)_i + 1]`` (closed)."""

    i: int
    values: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.values)


BOUNDARY_TOL = 1e-9


def even_integers_in(lo: float, hi: float, tol: float = BOUNDARY_TOL) -> tuple[int, ...]:
    """Even integers in ``[lo - tol, hi + tol]``; ``tol`` absorbs float noise at the ends."""
    first = math.ceil((lo - tol) / 2.0) * 2
    return tuple(range(first, math.floor(hi + tol) + 1, 2))


def target_sets(M: KomlosMatrix, x: SignVector) -> list[TargetSet]:
    """Per-row targets for ``(Rx)_i`` making ``|((M + R/sqrt d) x)_i| <= 1/sqrt d``."""
    if len(x) != M.n:
        raise DimensionMismatch("x does not match the column count of M")
    centre = -math.sqrt(M.d) * (M.values @ x.as_float())
    out = []
    for i, c in enumerate(centre):
        vals = even_integers_in(float(c) - 1.0, float(c) + 1.0)
        assert 1 <= len(vals) <= 2
        out.append(TargetSet(i, vals))
    return out


def delta_bound_holds(values: np.ndarray, R: RademacherMatrix, x: SignVector) -> bool:
    """``||(values + R/sqrt d) x||_inf <= 1/sqrt d``."""
    d = values.shape[0]
    y = (values + R.as_float() / math.sqrt(d)) @ x.as_float()
    return float(np.max(np.abs(y))) <= 1.0 / math.sqrt(d) + 1e-12
