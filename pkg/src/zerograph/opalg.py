"""Dense complex linear algebra and Hilbert-Schmidt operator spaces.

Matrices are plain ``numpy`` complex arrays. Operator spaces are stored as
a stack of Hilbert-Schmidt orthonormal matrices, with row-major
vectorization used everywhere a matrix is flattened.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TAU_EXACT = 1e-10
TAU_RANK = 1e-8
TAU_MEMBER = 1e-8


class DimensionError(ValueError):
    """Raised when operand shapes are incompatible."""


def as_cmat(a) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array (vectors become columns)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product trace(a^dagger b)."""
    return complex(np.vdot(a, b))


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def tensor(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    return np.kron(as_cmat(a), as_cmat(b))


def partial_trace(m, dim_a: int, dim_b: int, keep: str = "A") -> np.ndarray:
    """Trace out one factor of an operator on C^dim_a (x) C^dim_b."""
    m = as_cmat(m)
    n = dim_a * dim_b
    if m.shape != (n, n):
        raise DimensionError(f"operator of shape {m.shape} is not on a {dim_a}x{dim_b} product space")
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep.upper() == "A":
        return np.einsum("ijkj->ik", t)
    if keep.upper() == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so that its largest-magnitude entry is real positive."""
    vecs = np.array(vecs, dtype=complex)
    if vecs.size == 0:
        return vecs
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.where(pivots == 0, 1, np.abs(pivots)), 1)
    return vecs / phases


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and eigenvectors for the nonzero part of the spectrum."""
        keep = np.abs(self.eigenvalues) > TAU_RANK
        return self.eigenvalues[keep], self.eigenvectors[:, keep]


def is_hermitian(a: np.ndarray, tol: float = TAU_EXACT) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and hs_norm(a - dagger(a)) <= tol * max(1.0, hs_norm(a))


def eig_hermitian(a) -> Spectrum:
    """Eigendecomposition with descending eigenvalues and phase-fixed eigenvectors."""
    a = as_cmat(a)
    if not is_hermitian(a):
        raise ValueError("eig_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh((a + dagger(a)) / 2)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], fix_phase(v[:, order])
    return Spectrum(w, v, int(np.sum(np.abs(w) > TAU_RANK)))


def psd_sqrt(a) -> np.ndarray:
    spec = eig_hermitian(a)
    w = np.clip(spec.eigenvalues, 0.0, None)
    v = spec.eigenvectors
    return (v * np.sqrt(w)) @ dagger(v)


@dataclass(frozen=True, eq=False)
class OperatorSpace:
    """Subspace of n x n matrices held as an HS-orthonormal basis of shape (d, n, n)."""

    basis: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[-1]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"<OperatorSpace of dim {self.dim} on C^{self.ambient_dim}>"

    @property
    def matrix(self) -> np.ndarray:
        """Basis as rows of a (d, n^2) array, row-major vectorized."""
        return self.basis.reshape(self.dim, -1)

    def coefficients(self, m) -> np.ndarray:
        m = as_cmat(m)
        self._check(m)
        return np.conj(self.matrix) @ m.reshape(-1)

    def project(self, m) -> np.ndarray:
        c = self.coefficients(m)
        return (c @ self.matrix).reshape(self.ambient_dim, self.ambient_dim)

    def residual(self, m) -> float:
        m = as_cmat(m)
        return hs_norm(m - self.project(m))

    def contains(self, m, tol: float = TAU_MEMBER) -> tuple[bool, float]:
        """Membership test; returns (is_member, residual HS norm)."""
        m = as_cmat(m)
        r = self.residual(m)
        return r <= tol * max(1.0, hs_norm(m)), r

    def __contains__(self, m) -> bool:
        return self.contains(m)[0]

    def issubspace(self, other: "OperatorSpace", tol: float = TAU_MEMBER) -> bool:
        return all(other.contains(b, tol)[0] for b in self.basis)

    def equals(self, other: "OperatorSpace", tol: float = TAU_MEMBER) -> bool:
        return (self.ambient_dim == other.ambient_dim and self.dim == other.dim
                and self.issubspace(other, tol) and other.issubspace(self, tol))

    def contains_identity(self, tol: float = TAU_MEMBER) -> bool:
        return self.contains(np.eye(self.ambient_dim), tol)[0]

    def is_adjoint_closed(self, tol: float = TAU_MEMBER) -> bool:
        return all(self.contains(dagger(b), tol)[0] for b in self.basis)

    def compress(self, vectors) -> np.ndarray:
        """Array C[a, i, j] = <v_i| B_a v_j> for columns v of ``vectors``."""
        x = as_cmat(vectors)
        self._check_vec(x)
        return np.einsum("pi,apq,qj->aij", np.conj(x), self.basis, x, optimize=True)

    def _check(self, m: np.ndarray) -> None:
        if m.shape != (self.ambient_dim, self.ambient_dim):
            raise DimensionError(f"matrix of shape {m.shape} does not act on C^{self.ambient_dim}")

    def _check_vec(self, x: np.ndarray) -> None:
        if x.shape[0] != self.ambient_dim:
            raise DimensionError(f"vectors of length {x.shape[0]} do not live in C^{self.ambient_dim}")


@dataclass(frozen=True, eq=False)
class ProductSpace:
    """Span of all a (x) b with a, b drawn from two operator spaces.

    The basis is never materialized unless asked for; products of
    orthonormal bases are themselves orthonormal.
    """

    left: OperatorSpace
    right: OperatorSpace

    @property
    def ambient_dim(self) -> int:
        return self.left.ambient_dim * self.right.ambient_dim

    @property
    def dim(self) -> int:
        return self.left.dim * self.right.dim

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"<ProductSpace of dim {self.dim} on C^{self.ambient_dim}>"

    @property
    def basis(self) -> np.ndarray:
        a, b = self.left.basis, self.right.basis
        n1, n2 = self.left.ambient_dim, self.right.ambient_dim
        out = np.einsum("aij,bkl->abikjl", a, b)
        return out.reshape(self.dim, n1 * n2, n1 * n2)

    def materialize(self) -> OperatorSpace:
        return OperatorSpace(self.basis)

    def compress(self, vectors) -> np.ndarray:
        x = as_cmat(vectors)
        if x.shape[0] != self.ambient_dim:
            raise DimensionError(f"vectors of length {x.shape[0]} do not live in C^{self.ambient_dim}")
        n1, n2 = self.left.ambient_dim, self.right.ambient_dim
        # (A (x) B) vec(X) = vec(A X B^T) for row-major vec
        xs = x.T.reshape(-1, n1, n2)
        c = np.einsum("ipq,apr,bqs,jrs->abij", np.conj(xs), self.left.basis, self.right.basis, xs,
                      optimize=True)
        return c.reshape(self.dim, x.shape[1], x.shape[1])


def span(mats: Iterable, n: int | None = None, tol: float = TAU_RANK) -> OperatorSpace:
    """HS-orthonormal basis of the linear span of ``mats``.

    Uses an SVD of the stacked row-major vectorizations so the rank decision
    does not depend on generator order.
    """
    mats = [as_cmat(m) for m in mats]
    if not mats:
        raise ValueError("span of an empty family")
    if n is None:
        n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise DimensionError(f"generator of shape {m.shape} is not {n}x{n}")
    g = np.stack([m.reshape(-1) for m in mats])
    _, s, vh = np.linalg.svd(g, full_matrices=False)
    if s[0] <= tol:
        raise ValueError("span of an all-zero family")
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return OperatorSpace(vh[:r].reshape(r, n, n))


def tensor_spaces(a: OperatorSpace, b: OperatorSpace, lazy: bool = False):
    """Span of elementary tensors; returns a ``ProductSpace`` when ``lazy``."""
    prod = ProductSpace(a, b)
    return prod if lazy else prod.materialize()


def hermitian_basis(space: OperatorSpace, tol: float = TAU_RANK) -> np.ndarray:
    """Real-linear basis of the Hermitian part of an adjoint-closed space.

    The first element is the normalized identity when the space contains it;
    the rest are HS-orthonormal and orthogonal to the identity.
    """
    n = space.ambient_dim
    herm = []
    for b in space.basis:
        herm.append((b + dagger(b)) / 2)
        herm.append((b - dagger(b)) / 2j)
    ident = np.eye(n) / np.sqrt(n)
    if space.contains_identity():
        herm = [h - hs_inner(ident, h).real * ident for h in herm]
        head = [ident]
    else:
        head = []
    # real coordinates of Hermitian matrices: (Re, Im) of row-major entries
    g = np.stack([np.concatenate([h.real.ravel(), h.imag.ravel()]) for h in herm])
    _, s, vh = np.linalg.svd(g, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0]))) if s.size and s[0] > tol else 0
    rest = [(v[: n * n] + 1j * v[n * n:]).reshape(n, n) for v in vh[:r]]
    return np.array(head + rest)


def gram_rank(vectors: Sequence[np.ndarray], tol: float = TAU_RANK) -> int:
    g = np.stack([np.asarray(v, dtype=complex).ravel() for v in vectors])
    s = np.linalg.svd(g, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))
