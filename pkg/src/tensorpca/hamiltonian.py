"""The number-conserving operator H(T) on the symmetric subspace.

For a real symmetric order-4 tensor T,

    H(T) = sum_{mu nu rho sigma} T_{mu nu rho sigma}
           adag_mu adag_nu a_rho a_sigma,

restricted to states with exactly n_bos bosons.  (The Hermitian-conjugate
half of the two-sided definition collapses into this single sum for real
symmetric T after relabeling; the dense first-quantized oracle below keeps
the literal (1/2)(... + h.c.) form so the collapse is verified, not
assumed.)

The matvec enumerates annihilation pairs rho <= sigma and creation pairs
mu <= nu with multiplicity weights, reading the canonical tensor entries
through a dense lookup view.  An optional sparse row cache turns repeated
products into a CSR multiply.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ._util import (
    DENSE_LIMIT,
    FULL_DENSE_LIMIT,
    CapacityError,
    InvalidParameterError,
    falling_factorial,
)
from .fock import OccupationBasis, StateVector, full_space_sequences
from .symtensor import SymmetricTensor4


def _mode_pairs(n_modes: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All pairs a <= b with the count of their ordered arrangements."""
    pa, pb = np.triu_indices(n_modes)
    mult = np.where(pa == pb, 1.0, 2.0)
    return pa, pb, mult


class HamiltonianOperator:
    """Matrix-free H(T) over a fixed occupation basis.

    Args:
        tensor: real symmetric order-4 tensor (complex tensors are
            rejected; the operator is only ever built from real inputs).
        basis: occupation basis the operator acts on.
        cache_rows: build a CSR matrix on first application and reuse it.
            Trades O(D N^4) memory for fast repeated matvecs (Lanczos).
    """

    def __init__(self, tensor: SymmetricTensor4, basis: OccupationBasis, cache_rows: bool = True):
        if tensor.is_complex:
            raise InvalidParameterError("H(T) is only defined for real tensors here")
        if tensor.n_modes != basis.n_modes:
            raise InvalidParameterError("tensor and basis mode counts differ")
        self.tensor = tensor
        self.basis = basis
        self.cache_rows = cache_rows
        self.matvec_count = 0
        self._sparse = None
        pa, pb, mult = _mode_pairs(basis.n_modes)
        self._pa, self._pb = pa, pb
        dense = tensor.to_dense()
        # W[c, a] = mult_c * mult_a * T[mu_c, nu_c, rho_a, sigma_a]
        self._weights = (mult[:, None] * mult[None, :]) * dense[
            pa[:, None], pb[:, None], pa[None, :], pb[None, :]
        ]
        # colex-rank increments for adding one boson to modes mu and nu,
        # tabulated for every creation pair (used by the chunked assembly)
        if basis.n_modes > 1:
            j = np.arange(1, basis.n_modes)
            self._add_hi = (pa[:, None] <= j[None, :]).astype(np.int64) + (
                pb[:, None] <= j[None, :]
            ).astype(np.int64)
            self._add_lo = (pa[:, None] <= j[None, :] - 1).astype(np.int64) + (
                pb[:, None] <= j[None, :] - 1
            ).astype(np.int64)
        else:
            self._add_hi = self._add_lo = np.zeros((pa.size, 0), dtype=np.int64)

    @property
    def dim(self) -> int:
        return self.basis.dim

    # -- application ---------------------------------------------------
    def apply(self, x: StateVector) -> StateVector:
        if not self.basis.same_space(x.basis):
            raise InvalidParameterError("state lives on a different basis")
        return StateVector(self.basis, self.matvec(x.amps))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.dim,):
            raise InvalidParameterError(f"vector of shape {x.shape}, expected ({self.dim},)")
        self.matvec_count += 1
        if self.cache_rows:
            return self.sparse_matrix().dot(x)
        return self._matvec_loop(x)

    def sparse_matrix(self) -> sp.csr_matrix:
        if self._sparse is None:
            rows, cols, vals = self._triplets()
            self._sparse = sp.csr_matrix(
                (vals, (rows, cols)), shape=(self.dim, self.dim), dtype=np.float64
            )
        return self._sparse

    def _pair_terms(self, a: int):
        """Sources, coefficients and target ranks for annihilation pair a."""
        basis = self.basis
        occ = basis.states
        rho, sigma = int(self._pa[a]), int(self._pb[a])
        if rho == sigma:
            valid = occ[:, rho] >= 2
        else:
            valid = (occ[:, rho] >= 1) & (occ[:, sigma] >= 1)
        src = np.nonzero(valid)[0]
        if src.size == 0:
            return None
        n_rho = occ[src, rho].astype(np.float64)
        n_sigma = occ[src, sigma].astype(np.float64)
        acoef = np.sqrt(n_sigma * (n_rho - (1.0 if rho == sigma else 0.0)))
        occ2 = occ[src].astype(np.int64)
        occ2[:, rho] -= 1
        occ2[:, sigma] -= 1
        pre2 = np.cumsum(occ2, axis=1)
        return src, acoef, occ2, pre2

    def _creation_chunks(self, occ2: np.ndarray, pre2: np.ndarray):
        """Yield (pair_block, ccoef (V,B), ranks (V,B)) covering all creation
        pairs in memory-bounded blocks."""
        n_pairs = self._pa.size
        v = occ2.shape[0]
        n1 = max(self.basis.n_modes - 1, 1)
        block = max(1, min(n_pairs, int(2_000_000 / max(v * n1, 1)) or 1))
        table = self.basis._binom
        j = np.arange(1, self.basis.n_modes)
        for lo_idx in range(0, n_pairs, block):
            pairs = np.arange(lo_idx, min(lo_idx + block, n_pairs))
            mu, nu = self._pa[pairs], self._pb[pairs]
            occ_mu = occ2[:, mu]
            occ_nu = occ2[:, nu]
            # (n_mu+1)(n_nu+1), with the extra (n_mu+1) for a doubled mode
            ccoef = np.sqrt(
                (occ_mu + 1.0) * (occ_nu + 1.0) + (mu == nu) * (occ_mu + 1.0)
            )
            if self.basis.n_modes == 1:
                ranks = np.zeros((v, pairs.size), dtype=np.int64)
            else:
                hi = table[j + pre2[:, None, 1:] + self._add_hi[None, pairs, :], j]
                lo = table[j + pre2[:, None, :-1] + self._add_lo[None, pairs, :], j]
                ranks = np.sum(hi - lo, axis=2)
            yield pairs, ccoef, ranks

    def _matvec_loop(self, x: np.ndarray) -> np.ndarray:
        complex_in = np.iscomplexobj(x)
        y = np.zeros(self.dim, dtype=np.complex128 if complex_in else np.float64)
        n_pairs = self._pa.size
        for a in range(n_pairs):
            terms = self._pair_terms(a)
            if terms is None:
                continue
            src, acoef, occ2, pre2 = terms
            xs = x[src] * acoef
            for pairs, ccoef, ranks in self._creation_chunks(occ2, pre2):
                contrib = (ccoef * xs[:, None]) * self._weights[pairs, a][None, :]
                flat_ranks = ranks.ravel()
                flat = contrib.ravel()
                if complex_in:
                    y += np.bincount(flat_ranks, weights=flat.real, minlength=self.dim)
                    y += 1j * np.bincount(flat_ranks, weights=flat.imag, minlength=self.dim)
                else:
                    y += np.bincount(flat_ranks, weights=flat, minlength=self.dim)
        return y

    def _triplets(self):
        rows, cols, vals = [], [], []
        n_pairs = self._pa.size
        for a in range(n_pairs):
            terms = self._pair_terms(a)
            if terms is None:
                continue
            src, acoef, occ2, pre2 = terms
            for pairs, ccoef, ranks in self._creation_chunks(occ2, pre2):
                weights = (ccoef * acoef[:, None]) * self._weights[pairs, a][None, :]
                rows.append(ranks.ravel())
                cols.append(np.broadcast_to(src[:, None], ranks.shape).ravel())
                vals.append(weights.ravel())
        if not rows:
            return (
                np.zeros(0, dtype=np.int64),
                np.zeros(0, dtype=np.int64),
                np.zeros(0, dtype=np.float64),
            )
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)

    # -- dense ----------------------------------------------------------
    def materialize_dense(self, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
        """Dense matrix of the operator, symmetrized against roundoff.

        The raw assembly is already symmetric to machine precision; the
        cleanup (H + H^T)/2 is applied after checking the residue is below
        1e-12 of the matrix scale.
        """
        if self.dim > dense_limit:
            raise CapacityError(f"dense limit {dense_limit} < dimension {self.dim}")
        self.matvec_count += self.dim  # one application per column, however assembled
        if self.cache_rows:
            dense = self.sparse_matrix().toarray()
        else:
            dense = np.column_stack(
                [self._matvec_loop(col) for col in np.eye(self.dim)]
            )
        scale = max(1.0, float(np.abs(dense).max()))
        asym = float(np.abs(dense - dense.T).max())
        if asym > 1e-12 * scale:
            raise RuntimeError(f"assembled operator asymmetry {asym:.3e} exceeds tolerance")
        return (dense + dense.T) / 2.0

    def expectation(self, x: StateVector) -> float:
        """<x|H|x> for a normalized state (real up to a checked residue)."""
        nrm = x.norm()
        if abs(nrm - 1.0) > 1e-8:
            raise InvalidParameterError(f"expectation needs a normalized state, |x| = {nrm}")
        val = x.inner(self.apply(x))
        if isinstance(val, complex):
            scale = max(1.0, abs(val))
            if abs(val.imag) > 1e-9 * scale:
                raise RuntimeError(f"expectation has imaginary residue {val.imag:.3e}")
            return val.real
        return float(val)


def apply(h: HamiltonianOperator, x: StateVector) -> StateVector:
    return h.apply(x)


def expectation(h: HamiltonianOperator, x: StateVector) -> float:
    return h.expectation(x)


def materialize_dense(h: HamiltonianOperator, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    return h.materialize_dense(dense_limit=dense_limit)


# ---------------------------------------------------------------------------
# Ideal-state moments (rotated frame: the signal direction is mode 0)
# ---------------------------------------------------------------------------


def ideal_energy(t: SymmetricTensor4, n_bos: int) -> float:
    """<H> in the state with all n_bos bosons in mode 0: n(n-1) T_0000."""
    return falling_factorial(n_bos, 2) * float(np.real(t[0, 0, 0, 0]))


def ideal_moment2(t: SymmetricTensor4, n_bos: int) -> float:
    """<H^2> in the all-bosons-in-mode-0 state.

    Exact closed form in the rotated frame, with P_{n,k} the falling
    factorial (zero for k > n, which covers n_bos < 4 automatically):

        P_{n,4} T_0000^2 + 4 P_{n,3} sum_a T_000a^2
        + 2 P_{n,2} sum_{a,b} T_00ab^2

    where the sums run over all modes including 0.
    """
    dense = t.to_dense()
    t0000 = float(np.real(dense[0, 0, 0, 0]))
    row = np.real(dense[0, 0, 0, :])
    block = np.real(dense[0, 0, :, :])
    n = n_bos
    return (
        falling_factorial(n, 4) * t0000**2
        + 4.0 * falling_factorial(n, 3) * float(np.sum(row**2))
        + 2.0 * falling_factorial(n, 2) * float(np.sum(block**2))
    )


# ---------------------------------------------------------------------------
# Basis rotations
# ---------------------------------------------------------------------------


def rotate_tensor(t: SymmetricTensor4, u: np.ndarray) -> SymmetricTensor4:
    """Apply an N x N orthogonal matrix to all four tensor slots."""
    u = np.asarray(u, dtype=float)
    dense = t.to_dense()
    rotated = np.einsum("ai,bj,ck,dl,ijkl->abcd", u, u, u, u, dense, optimize=True)
    return SymmetricTensor4.from_dense(rotated, symmetrize=True)


def rotation_aligning(v: np.ndarray) -> np.ndarray:
    """Orthogonal U with U v = |v| e_0 (Householder reflection)."""
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise InvalidParameterError("cannot align the zero vector")
    u = v / nrm
    e0 = np.zeros_like(u)
    e0[0] = 1.0
    w = u - e0
    wnorm2 = float(w @ w)
    if wnorm2 < 1e-28:
        return np.eye(v.size)
    return np.eye(v.size) - 2.0 * np.outer(w, w) / wnorm2


# ---------------------------------------------------------------------------
# First-quantized full-space oracle
# ---------------------------------------------------------------------------


def _embed_two_site(k2: np.ndarray, i1: int, i2: int, n_modes: int, n_bos: int) -> np.ndarray:
    """Lift an N^2 x N^2 operator onto legs (i1, i2) of an n_bos-leg space."""
    rest = n_bos - 2
    full = np.kron(k2, np.eye(n_modes**rest))
    shape = (n_modes,) * (2 * n_bos)
    tensor = full.reshape(shape)
    # legs currently ordered (i1, i2, others...); send them home
    order = [i1, i2] + [j for j in range(n_bos) if j not in (i1, i2)]
    perm = np.argsort(order)
    axes = list(perm) + [n_bos + p for p in perm]
    tensor = np.transpose(tensor, axes)
    dim = n_modes**n_bos
    return tensor.reshape(dim, dim)


def first_quantized_dense(
    t: SymmetricTensor4,
    n_modes: int,
    n_bos: int,
    dense_limit: int = FULL_DENSE_LIMIT,
) -> np.ndarray:
    """Dense full-space matrix of the two-sided pairwise definition.

    Sums the two-site operator T (acting on ordered pairs of distinct
    legs, diagonal elsewhere) and takes (1/2)(M + M^dagger) literally.
    """
    if t.n_modes != n_modes:
        raise InvalidParameterError("tensor mode count mismatch")
    dim = n_modes**n_bos
    if dim > dense_limit:
        raise CapacityError(f"full-space dense limit {dense_limit} < dimension {dim}")
    if n_bos < 2:
        return np.zeros((dim, dim))
    k2 = t.to_dense().reshape(n_modes**2, n_modes**2)
    m = np.zeros((dim, dim))
    for i1 in range(n_bos):
        for i2 in range(n_bos):
            if i1 == i2:
                continue
            m += _embed_two_site(k2, i1, i2, n_modes, n_bos)
    return 0.5 * (m + m.T)


def symmetric_isometry(basis: OccupationBasis) -> np.ndarray:
    """(N^n_bos, D) matrix with orthonormal columns spanning the symmetric
    subspace; column r holds the full-space expansion of occupation state r.
    """
    seqs = full_space_sequences(basis.n_modes, basis.n_bos)
    occs = np.zeros((seqs.shape[0], basis.n_modes), dtype=np.int64)
    rows = np.repeat(np.arange(seqs.shape[0]), basis.n_bos)
    np.add.at(occs, (rows, seqs.ravel()), 1)
    ranks = basis.rank_array(occs)
    v = np.zeros((seqs.shape[0], basis.dim))
    v[np.arange(seqs.shape[0]), ranks] = np.exp(-0.5 * basis.log_seq_count[ranks])
    return v


def restrict_to_symmetric(h_full: np.ndarray, basis: OccupationBasis) -> np.ndarray:
    """V^T H_full V: the full-space operator expressed on occupation states."""
    v = symmetric_isometry(basis)
    return v.T @ h_full @ v
