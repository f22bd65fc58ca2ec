"""Canonical storage for order-4 symmetric tensors over N modes.

A symmetric tensor is stored as one value per sorted index 4-tuple
(i <= j <= k <= l), enumerated in lexicographic order.  Permutation
symmetry is therefore structural: every rearrangement of an index tuple
reads the same storage slot.  Dense (N, N, N, N) views are available for
small N as a debug/oracle device and as a fast lookup cache.
"""

from __future__ import annotations

from itertools import combinations_with_replacement
from math import factorial

import numpy as np

from ._util import DENSE_TENSOR_LIMIT, InvalidParameterError

_ORDER = 4


class _IndexLayout:
    """Shared per-N index structures for canonical sorted-tuple storage."""

    def __init__(self, n_modes: int):
        self.n_modes = n_modes
        self.tuples = list(combinations_with_replacement(range(n_modes), _ORDER))
        self.index = {t: i for i, t in enumerate(self.tuples)}
        orbit = np.empty(len(self.tuples), dtype=np.int64)
        for i, t in enumerate(self.tuples):
            denom = 1
            for v in set(t):
                denom *= factorial(t.count(v))
            orbit[i] = factorial(_ORDER) // denom
        self.orbit_sizes = orbit
        self.tuples_array = np.array(self.tuples, dtype=np.int64)
        self._dense_index = None

    @property
    def dense_index(self) -> np.ndarray:
        """(N, N, N, N) map from an arbitrary index tuple to its slot."""
        if self._dense_index is None:
            n = self.n_modes
            if n > DENSE_TENSOR_LIMIT:
                raise InvalidParameterError(
                    f"dense order-4 view limited to N <= {DENSE_TENSOR_LIMIT}, got N={n}"
                )
            idx = np.empty((n, n, n, n), dtype=np.int64)
            grid = np.indices((n, n, n, n)).reshape(4, -1)
            key = np.sort(grid, axis=0)
            # rank of a sorted tuple in combinations_with_replacement order,
            # resolved through the dict to keep a single source of truth
            flat = np.fromiter(
                (self.index[tuple(key[:, c])] for c in range(key.shape[1])),
                dtype=np.int64,
                count=key.shape[1],
            )
            idx.ravel()[:] = flat
            self._dense_index = idx
        return self._dense_index


_LAYOUTS: dict[int, _IndexLayout] = {}


def layout(n_modes: int) -> _IndexLayout:
    if n_modes < 1:
        raise InvalidParameterError(f"need at least one mode, got N={n_modes}")
    if n_modes not in _LAYOUTS:
        _LAYOUTS[n_modes] = _IndexLayout(n_modes)
    return _LAYOUTS[n_modes]


class SymmetricTensor4:
    """Order-4 symmetric tensor in canonical sorted-tuple storage.

    Attributes:
        n_modes: number of modes N.
        values: canonical entries, one per sorted 4-tuple, float64 or
            complex128.
    """

    __slots__ = ("n_modes", "values")

    def __init__(self, n_modes: int, values: np.ndarray):
        lay = layout(n_modes)
        values = np.asarray(values)
        if values.shape != (len(lay.tuples),):
            raise InvalidParameterError(
                f"expected {len(lay.tuples)} canonical entries for N={n_modes}, "
                f"got shape {values.shape}"
            )
        dtype = np.complex128 if np.iscomplexobj(values) else np.float64
        self.n_modes = n_modes
        self.values = values.astype(dtype, copy=True)

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, n_modes: int, complex_values: bool = False) -> "SymmetricTensor4":
        m = len(layout(n_modes).tuples)
        dtype = np.complex128 if complex_values else np.float64
        return cls(n_modes, np.zeros(m, dtype=dtype))

    @classmethod
    def from_dense(cls, dense: np.ndarray, symmetrize: bool = False) -> "SymmetricTensor4":
        """Read a dense (N, N, N, N) array.

        With symmetrize=False the array must already be permutation
        symmetric; with symmetrize=True it is averaged over the 24 index
        permutations first.
        """
        dense = np.asarray(dense)
        if dense.ndim != 4 or len(set(dense.shape)) != 1:
            raise InvalidParameterError(f"expected an (N,N,N,N) array, got shape {dense.shape}")
        n = dense.shape[0]
        if symmetrize:
            dense = symmetrize_dense(dense)
        lay = layout(n)
        vals = np.array([dense[t] for t in lay.tuples])
        tensor = cls(n, vals)
        if not symmetrize:
            # cheap spot check that the caller really passed a symmetric array
            back = tensor.to_dense()
            if not np.allclose(back, dense, rtol=0, atol=1e-12 * max(1.0, float(np.abs(dense).max()))):
                raise InvalidParameterError("dense input is not permutation symmetric")
        return tensor

    # -- element access ------------------------------------------------
    def __getitem__(self, index_tuple) -> complex:
        key = tuple(sorted(int(i) for i in index_tuple))
        return self.values[layout(self.n_modes).index[key]]

    def to_dense(self) -> np.ndarray:
        return self.values[layout(self.n_modes).dense_index]

    # -- algebra --------------------------------------------------------
    def _check_same_shape(self, other: "SymmetricTensor4"):
        if self.n_modes != other.n_modes:
            raise InvalidParameterError(
                f"mode count mismatch: {self.n_modes} vs {other.n_modes}"
            )

    def __add__(self, other: "SymmetricTensor4") -> "SymmetricTensor4":
        self._check_same_shape(other)
        return SymmetricTensor4(self.n_modes, self.values + other.values)

    def __sub__(self, other: "SymmetricTensor4") -> "SymmetricTensor4":
        self._check_same_shape(other)
        return SymmetricTensor4(self.n_modes, self.values - other.values)

    def __mul__(self, scalar) -> "SymmetricTensor4":
        return SymmetricTensor4(self.n_modes, self.values * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "SymmetricTensor4":
        return SymmetricTensor4(self.n_modes, self.values / scalar)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def real_part(self) -> "SymmetricTensor4":
        return SymmetricTensor4(self.n_modes, self.values.real)

    def norm(self) -> float:
        """Frobenius norm over all N^4 entries (orbit-weighted)."""
        w = layout(self.n_modes).orbit_sizes
        return float(np.sqrt(np.sum(w * np.abs(self.values) ** 2)))

    def frobenius_inner(self, other: "SymmetricTensor4") -> complex:
        """Full-entry inner product sum(conj(self) * other)."""
        self._check_same_shape(other)
        w = layout(self.n_modes).orbit_sizes
        val = np.sum(w * np.conj(self.values) * other.values)
        return complex(val) if self.is_complex or other.is_complex else float(val.real)


def symmetrize_dense(dense: np.ndarray) -> np.ndarray:
    """Average a dense order-4 array over all 24 index permutations."""
    from itertools import permutations

    acc = np.zeros_like(np.asarray(dense, dtype=np.result_type(dense, np.float64)))
    for perm in permutations(range(4)):
        acc += np.transpose(dense, perm)
    return acc / 24.0


def rank_one(v: np.ndarray) -> SymmetricTensor4:
    """The tensor with entries v_i v_j v_k v_l."""
    v = np.asarray(v, dtype=float)
    lay = layout(v.shape[0])
    vals = np.prod(v[lay.tuples_array], axis=1)
    return SymmetricTensor4(v.shape[0], vals)
