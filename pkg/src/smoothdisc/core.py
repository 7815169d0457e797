"""Sign vectors, Komlós and Rademacher matrices, and discrepancy evaluation."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ColumnNormExceeded, DimensionMismatch, TooLarge

COLUMN_NORM_TOL = 1e-9
ENUMERATION_CAP = 24


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


class SignVector:
    """Immutable ±1 vector with its +1 count and that count's parity."""

    __slots__ = ("entries", "ones_count", "parity")

    def __init__(self, entries):
        arr = np.asarray(entries)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("a sign vector must be a non-empty 1-d sequence")
        if not np.all((arr == 1) | (arr == -1)):
            raise ValueError("sign vector entries must be exactly -1 or +1")
        self.entries = _frozen(arr.astype(np.int8))
        self.ones_count = int(np.count_nonzero(self.entries == 1))
        self.parity = self.ones_count % 2

    @classmethod
    def from_bits(cls, bits: int, n: int) -> SignVector:
        """Bit ``j`` set means entry ``j`` is -1."""
        return cls([-1 if (bits >> j) & 1 else 1 for j in range(n)])

    def __len__(self) -> int:
        return self.entries.shape[0]

    def __neg__(self) -> SignVector:
        return SignVector(-self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SignVector):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash(self.entries.tobytes())

    def __repr__(self) -> str:
        return f"SignVector({self.entries.tolist()})"

    def as_float(self) -> np.ndarray:
        return self.entries.astype(np.float64)

    def tolist(self) -> list[int]:
        return [int(v) for v in self.entries]

    def to_text(self) -> str:
        return " ".join(str(v) for v in self.tolist())

    @classmethod
    def from_text(cls, text: str) -> SignVector:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) != 1:
            raise ValueError("sign-vector text must be a single non-empty line")
        return cls([int(tok) for tok in lines[0].split()])


@dataclass(frozen=True, eq=False)
class KomlosMatrix:
    """d×n real matrix whose columns lie in the unit ball.

    Build through :func:`validate_komlos`; direct construction skips the check.
    """

    values: np.ndarray

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=0)


@dataclass(frozen=True, eq=False)
class RademacherMatrix:
    entries: np.ndarray
    row_parity_even: bool = False

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 2 or e.size == 0:
            raise ValueError("Rademacher matrix must be a non-empty 2-d array")
        if not np.all((e == 1) | (e == -1)):
            raise ValueError("Rademacher entries must be exactly -1 or +1")
        object.__setattr__(self, "entries", _frozen(e.astype(np.int8)))
        if self.row_parity_even and np.any(np.count_nonzero(self.entries == 1, axis=1) % 2):
            raise ValueError("row_parity_even set but some row has an odd +1 count")

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    def as_float(self) -> np.ndarray:
        return self.entries.astype(np.float64)


@dataclass(frozen=True)
class DiscrepancyReport:
    value: float
    witness: SignVector
    exhaustive: bool


def validate_komlos(values, tol: float = COLUMN_NORM_TOL) -> KomlosMatrix:
    """Check that every column has 2-norm at most ``1 + tol``.

    Raises
    ------
    ColumnNormExceeded
        For the worst offending column.
    """
    a = np.array(values, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"expected a non-empty d×n grid, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    norms = np.linalg.norm(a, axis=0)
    worst = int(np.argmax(norms))
    if norms[worst] > 1.0 + tol:
        raise ColumnNormExceeded(worst, float(norms[worst]))
    return KomlosMatrix(_frozen(a))


def _check_length(M: KomlosMatrix, x: SignVector) -> None:
    if len(x) != M.n:
        raise DimensionMismatch(f"sign vector has length {len(x)}, matrix has {M.n} columns")


def disc_value(M: KomlosMatrix, x: SignVector) -> float:
    """``||M x||_inf``."""
    _check_length(M, x)
    return float(np.max(np.abs(M.values @ x.as_float())))


def brute_force_disc(M: KomlosMatrix, cap: int = ENUMERATION_CAP) -> DiscrepancyReport:
    """Exact ``DISC(M)`` by enumerating ``2^(n-1)`` sign vectors."""
    if M.n > cap:
        raise TooLarge(f"n = {M.n} exceeds the enumeration cap {cap}")
    _, x = kernels.brute_force(M.values)
    witness = SignVector(x.astype(np.int8))
    # report the value recomputed from the witness, not the running sum
    return DiscrepancyReport(disc_value(M, witness), witness, exhaustive=True)


def perturb(M: KomlosMatrix, R: RademacherMatrix, scale: float) -> np.ndarray:
    """Entrywise ``M + scale * R``. The result need not be Komlós."""
    if M.shape != R.entries.shape:
        raise DimensionMismatch(f"M is {M.shape} but R is {R.entries.shape}")
    if scale < 0:
        raise ValueError("scale must be non-negative")
    return M.values + scale * R.as_float()


def canonical_scale(d: int) -> float:
    return 1.0 / np.sqrt(d)


# ---------------------------------------------------------------- text I/O

def format_matrix(values) -> str:
    a = np.asarray(values, dtype=np.float64)
    d, n = a.shape
    rows = [f"{d} {n}"]
    rows += [" ".join(repr(float(v)) for v in row) for row in a]
    return "\n".join(rows) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("first line must be 'd n'")
    d, n = int(header[0]), int(header[1])
    if len(lines) - 1 != d:
        raise DimensionMismatch(f"header says {d} rows, found {len(lines) - 1}")
    a = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])
    if a.shape != (d, n):
        raise DimensionMismatch(f"header says {d}x{n}, rows give {a.shape}")
    return a


def write_matrix(path, values) -> None:
    Path(path).write_text(format_matrix(values), encoding="utf-8", newline="\n")


def read_matrix(path) -> KomlosMatrix:
    return validate_komlos(parse_matrix(Path(path).read_text(encoding="utf-8")))
