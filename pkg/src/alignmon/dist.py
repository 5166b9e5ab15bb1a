"""Finite probability distributions over indexed outcome spaces.

Outcomes are plain integer indices ``0..n-1``; state names live at the
ingestion boundary only.  Distributions are immutable after construction
and safe to share between threads.  Sampling takes an external
``numpy.random.Generator`` so that one seeded generator drives one
simulation run.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

#: Tolerance for the mass-sum invariant.  Renormalisation is never silent;
#: use :meth:`Distribution.renormalized` explicitly.
MASS_TOL = 1e-9

#: Supports at least this fraction of n are stored densely.
_DENSE_FRACTION = 0.25


class DistributionError(ValueError):
    """Base class for invalid-distribution errors."""

    code = "invalid"


class NegativeMass(DistributionError):
    code = "negative_mass"

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"negative mass {value!r} at index {index}")


class MassSumMismatch(DistributionError):
    code = "mass_sum_mismatch"

    def __init__(self, total: float):
        self.total = total
        super().__init__(f"mass sums to {total!r}, expected 1 +/- {MASS_TOL}")


class IndexOutOfRange(DistributionError):
    code = "index_out_of_range"

    def __init__(self, index: int, n: int):
        self.index = index
        self.n = n
        super().__init__(f"index {index} out of range for {n} outcomes")


class EmptySupport(DistributionError):
    code = "empty_support"

    def __init__(self, message: str = "support is empty"):
        super().__init__(message)


class Distribution:
    """A probability vector over ``n`` indexed outcomes.

    Internally dense (full ``float64`` vector) or sparse (sorted index and
    value arrays) depending on the support size; the representation is
    chosen at construction time and is semantically invisible.
    """

    __slots__ = ("n", "_dense", "_idx", "_val", "_cum")

    def __init__(self, n: int, idx: np.ndarray, val: np.ndarray, dense: np.ndarray | None):
        self.n = n
        self._idx = idx
        self._val = val
        self._dense = dense
        self._cum = None  # lazy sampling table

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_dense(values: Iterable[float], validate: bool = True) -> "Distribution":
        dense = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                           dtype=np.float64).copy()
        if dense.ndim != 1 or dense.size == 0:
            raise EmptySupport("distribution needs at least one outcome")
        n = int(dense.size)
        if validate:
            _check_masses(dense, np.arange(n), n)
        idx = np.flatnonzero(dense > 0.0)
        if idx.size == 0:
            raise EmptySupport()
        if idx.size * 4 >= n:
            dense.setflags(write=False)
            return Distribution(n, idx, dense[idx], dense)
        val = dense[idx].copy()
        return Distribution(n, idx, val, None)

    @staticmethod
    def from_sparse(n: int, mass: Mapping[int, float], validate: bool = True) -> "Distribution":
        if n <= 0:
            raise EmptySupport("distribution needs at least one outcome")
        if not mass:
            raise EmptySupport()
        idx = np.array(sorted(mass), dtype=np.int64)
        val = np.array([mass[int(i)] for i in idx], dtype=np.float64)
        if validate:
            _check_masses(val, idx, n)
        keep = val > 0.0
        idx, val = idx[keep], val[keep]
        if idx.size == 0:
            raise EmptySupport()
        if idx.size * 4 >= n:
            dense = np.zeros(n)
            dense[idx] = val
            dense.setflags(write=False)
            return Distribution(n, idx, val, dense)
        return Distribution(n, idx, val, None)

    # -- accessors ---------------------------------------------------------

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    @property
    def support_size(self) -> int:
        return int(self._idx.size)

    def support(self) -> np.ndarray:
        """Indices with strictly positive mass, ascending."""
        return self._idx

    def items(self) -> tuple[np.ndarray, np.ndarray]:
        """(indices, masses) arrays of the support. Do not mutate."""
        return self._idx, self._val

    def prob(self, i: int) -> float:
        if i < 0 or i >= self.n:
            raise IndexOutOfRange(i, self.n)
        if self._dense is not None:
            return float(self._dense[i])
        k = np.searchsorted(self._idx, i)
        if k < self._idx.size and self._idx[k] == i:
            return float(self._val[k])
        return 0.0

    def as_dense(self) -> np.ndarray:
        """Full-length mass vector (read-only view when stored densely)."""
        if self._dense is not None:
            return self._dense
        dense = np.zeros(self.n)
        dense[self._idx] = self._val
        return dense

    def sum_sq(self) -> float:
        return float(np.dot(self._val, self._val))

    def mass_total(self) -> float:
        return float(self._val.sum())

    # -- operations --------------------------------------------------------

    def renormalized(self) -> "Distribution":
        """Exact renormalisation, offered explicitly (never applied silently)."""
        total = self._val.sum()
        if total <= 0.0:
            raise EmptySupport("cannot renormalize zero total mass")
        return Distribution.from_sparse(
            self.n, {int(i): float(v / total) for i, v in zip(self._idx, self._val)})

    def sample(self, rng: np.random.Generator) -> int:
        """Draw one outcome index. Same generator state => same draw."""
        if self._cum is None:
            self._cum = np.cumsum(self._val)
        u = rng.random() * self._cum[-1]
        k = int(np.searchsorted(self._cum, u, side="right"))
        if k >= self._idx.size:  # guard the u == total edge
            k = self._idx.size - 1
        return int(self._idx[k])

    # -- dunder ------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self._idx, other._idx)
                and np.array_equal(self._val, other._val))

    def __hash__(self):  # identity hashing; equality above is for tests
        return id(self)

    def __repr__(self) -> str:
        kind = "dense" if self.is_dense else "sparse"
        return f"Distribution(n={self.n}, support={self.support_size}, {kind})"


def _check_masses(val: np.ndarray, idx: np.ndarray, n: int) -> None:
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        bad = int(idx[0]) if idx[0] < 0 else int(idx[-1])
        raise IndexOutOfRange(bad, n)
    neg = np.flatnonzero(val < 0.0)
    if neg.size:
        k = int(neg[0])
        raise NegativeMass(int(idx[k]), float(val[k]))
    total = float(val.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise MassSumMismatch(total)


def validate(d: Distribution) -> None:
    """Re-check the distribution invariants; raises a typed error on violation."""
    idx, val = d.items()
    _check_masses(val, idx, d.n)


def point_mass(n: int, i: int) -> Distribution:
    if i < 0 or i >= n:
        raise IndexOutOfRange(i, n)
    return Distribution.from_sparse(n, {i: 1.0})


def uniform(n: int) -> Distribution:
    if n <= 0:
        raise EmptySupport("distribution needs at least one outcome")
    return Distribution.from_dense(np.full(n, 1.0 / n))


def uniform_over(n: int, support: Iterable[int]) -> Distribution:
    """Uniform mass over ``support``, zero elsewhere."""
    members = sorted(set(int(i) for i in support))
    if not members:
        raise EmptySupport("uniform_over needs a non-empty support")
    for i in members:
        if i < 0 or i >= n:
            raise IndexOutOfRange(i, n)
    w = 1.0 / len(members)
    return Distribution.from_sparse(n, {i: w for i in members})
