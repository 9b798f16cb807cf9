"""Quantum channels in Kraus form and the pseudo-diagonal channel builder."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .opalg import (TAU_EXACT, TAU_MEMBER, DimensionError, OperatorSpace, as_cmat, dagger,
                    eig_hermitian, gram_rank, hermitian_basis, hs_norm, span)


class TracePreservationError(ValueError):
    def __init__(self, deviation: float):
        super().__init__(f"Kraus operators are not trace preserving (|sum K^dag K - I| = {deviation:.3e})")
        self.deviation = deviation


class GraphConditionError(ValueError):
    """The operator space is not adjoint-closed or lacks the identity."""


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    kraus: np.ndarray  # (env_dim, dim_out, dim_in)

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def env_dim(self) -> int:
        return self.kraus.shape[0]

    def __repr__(self) -> str:
        return f"<QuantumChannel C^{self.dim_in} -> C^{self.dim_out}, {self.env_dim} Kraus operators>"

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)


@dataclass(frozen=True, eq=False)
class PositiveBasis:
    ops: np.ndarray  # (d, n, n)

    @property
    def count(self) -> int:
        return self.ops.shape[0]

    @property
    def dim(self) -> int:
        return self.ops.shape[-1]

    def ranks(self) -> list[int]:
        return [eig_hermitian(a).rank for a in self.ops]

    def span(self) -> OperatorSpace:
        return span(self.ops)


def trace_deviation(kraus: np.ndarray) -> float:
    s = np.einsum("kji,kjl->il", np.conj(kraus), kraus)
    return hs_norm(s - np.eye(kraus.shape[2]))


def make_channel(kraus: Sequence, tol: float = TAU_EXACT) -> QuantumChannel:
    ops = [as_cmat(k) for k in kraus]
    if not ops:
        raise ValueError("a channel needs at least one Kraus operator")
    shape = ops[0].shape
    for k in ops:
        if k.shape != shape:
            raise DimensionError(f"Kraus operators have mixed shapes {shape} and {k.shape}")
    arr = np.stack(ops)
    dev = trace_deviation(arr)
    if dev > tol:
        raise TracePreservationError(dev)
    return QuantumChannel(arr)


def apply(ch: QuantumChannel, rho) -> np.ndarray:
    rho = as_cmat(rho)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimensionError(f"input of shape {rho.shape} does not match channel input C^{ch.dim_in}")
    return np.sum(ch.kraus @ rho @ dagger(ch.kraus), axis=0)


def complementary(ch: QuantumChannel) -> QuantumChannel:
    """Complementary channel from the Stinespring isometry V = sum_k K_k (x) |k>.

    Its Kraus operators R_b carry row b of each K_k, so that
    output[k, l] = trace(K_l^dag K_k rho).
    """
    return make_channel(np.transpose(ch.kraus, (1, 0, 2)))


def ncgraph(ch: QuantumChannel) -> OperatorSpace:
    """Noncommutative graph span{K_l^dag K_k}."""
    prods = np.einsum("lji,kjm->lkim", np.conj(ch.kraus), ch.kraus).reshape(-1, ch.dim_in, ch.dim_in)
    g = span(prods, ch.dim_in)
    if not (g.contains_identity() and g.is_adjoint_closed()):
        raise AssertionError("noncommutative graph failed identity/adjoint closure")
    return g


def tensor_channels(a: QuantumChannel, b: QuantumChannel) -> QuantumChannel:
    kraus = np.einsum("kij,lmn->klimjn", a.kraus, b.kraus)
    shape = (a.env_dim * b.env_dim, a.dim_out * b.dim_out, a.dim_in * b.dim_in)
    return QuantumChannel(kraus.reshape(shape))


def choi(ch: QuantumChannel) -> np.ndarray:
    """Choi matrix sum_ij |i><j| (x) Phi(|i><j|), of size dim_in*dim_out."""
    # vec_k = sum_i |i> (x) K_k|i>
    vecs = np.transpose(ch.kraus, (0, 2, 1)).reshape(ch.env_dim, -1)
    return vecs.T @ np.conj(vecs)


def choi_rank(ch: QuantumChannel) -> int:
    return eig_hermitian(choi(ch)).rank


def channels_equal(a: QuantumChannel, b: QuantumChannel, tol: float = TAU_EXACT) -> bool:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        return False
    return hs_norm(choi(a) - choi(b)) <= tol


def check_graph_condition(space: OperatorSpace) -> None:
    """Raise unless the space contains the identity and is closed under adjoint."""
    problems = []
    if not space.contains_identity():
        problems.append("does not contain the identity")
    if not space.is_adjoint_closed():
        problems.append("is not closed under adjoint")
    if problems:
        raise GraphConditionError("operator space " + " and ".join(problems))


def validate_positive_basis(ops, tol: float = TAU_EXACT, require_independent: bool = True) -> PositiveBasis:
    ops = np.stack([as_cmat(a) for a in ops])
    n = ops.shape[-1]
    for i, a in enumerate(ops):
        if hs_norm(a - dagger(a)) > tol:
            raise ValueError(f"operator {i} is not Hermitian")
        if np.linalg.eigvalsh((a + dagger(a)) / 2)[0] < -tol:
            raise ValueError(f"operator {i} is not positive semidefinite")
    if hs_norm(ops.sum(axis=0) - np.eye(n)) > tol:
        raise ValueError("operators do not sum to the identity")
    if require_independent and gram_rank(ops) != len(ops):
        raise ValueError("operators are linearly dependent")
    return PositiveBasis(ops)


def positive_basis(space: OperatorSpace) -> PositiveBasis:
    """Basis of positive operators summing to the identity.

    Each traceless Hermitian basis element H is shifted to H + |H| I, which is
    positive, and weighted so that the shifted elements sum to at most I/2;
    the identity remainder fills the first slot.
    """
    check_graph_condition(space)
    n = space.ambient_dim
    herm = hermitian_basis(space)
    d = len(herm)
    if d == 1:
        return PositiveBasis(np.eye(n, dtype=complex)[None])
    weight = 1.0 / (2 * (d - 1))
    rest = []
    for h in herm[1:]:
        h = (h + dagger(h)) / 2
        top = np.max(np.abs(np.linalg.eigvalsh(h)))
        rest.append(weight * (h + top * np.eye(n)) / (2 * top))
    first = np.eye(n) - np.sum(rest, axis=0)
    return validate_positive_basis([first] + rest)


def default_psis(d: int, m: int) -> list[np.ndarray]:
    """First ``d`` vectors of a fixed sequence in C^m with independent projectors.

    Order: standard basis, then (e_i + e_j)/sqrt2 and (e_i + i e_j)/sqrt2 with
    pairs taken by descending j, ascending i. For m = 3 this starts
    e1, e2, e3, (e1+e3)/sqrt2, (e2+e3)/sqrt2.
    """
    if d > m * m:
        raise ValueError(f"cannot choose {d} independent rank-one projectors in C^{m}")
    eye = np.eye(m, dtype=complex)
    pairs = [(i, j) for j in range(m - 1, 0, -1) for i in range(j)]
    seq = list(eye)
    seq += [(eye[i] + eye[j]) / np.sqrt(2) for i, j in pairs]
    seq += [(eye[i] + 1j * eye[j]) / np.sqrt(2) for i, j in pairs]
    return seq[:d]


def minimal_env_dim(d: int) -> int:
    """Smallest m with d <= m^2."""
    m = int(np.ceil(np.sqrt(d)))
    while m * m < d:
        m += 1
    while m > 1 and (m - 1) ** 2 >= d:
        m -= 1
    return m


def block_factors(basis: PositiveBasis) -> list[np.ndarray]:
    """W_i A_i^(1/2) restricted to its r_i x n block."""
    out = []
    for a in basis.ops:
        w, v = eig_hermitian(a).support()
        out.append(np.sqrt(w)[:, None] * dagger(v))
    return out


def build_pseudo_diagonal(basis: PositiveBasis, psis: Sequence | None = None,
                          m: int | None = None) -> QuantumChannel:
    """Channel with noncommutative graph span(basis.ops).

    Kraus operators V_k = sum_i <k|psi_i> W_i A_i^(1/2), where W_i maps the
    eigenvectors of A_i (descending order) onto the i-th output block.
    """
    d = basis.count
    if psis is None:
        psis = default_psis(d, m if m is not None else minimal_env_dim(d))
    psis = [as_cmat(p).ravel() for p in psis]
    if len(psis) != d:
        raise ValueError(f"need {d} vectors, got {len(psis)}")
    m = psis[0].shape[0]
    if d > m * m:
        raise ValueError(f"basis size {d} exceeds m^2 = {m * m}")
    for p in psis:
        if abs(np.linalg.norm(p) - 1) > TAU_EXACT:
            raise ValueError("psi vectors must be unit vectors")
    if gram_rank([np.outer(p, np.conj(p)) for p in psis]) != d:
        raise ValueError("projectors onto the psi vectors are linearly dependent")
    blocks = block_factors(basis)
    kraus = [np.vstack([p[k] * b for p, b in zip(psis, blocks)]) for k in range(m)]
    return make_channel(kraus)


def measure_prepare(basis: PositiveBasis, psis: Sequence) -> callable:
    """rho -> sum_i trace(A_i rho) |psi_i><psi_i| as a plain function."""
    projs = [np.outer(p, np.conj(p)) for p in (as_cmat(q).ravel() for q in psis)]

    def psi_map(rho):
        rho = as_cmat(rho)
        return sum(np.trace(a @ rho) * pr for a, pr in zip(basis.ops, projs))

    return psi_map


def same_graph(a: OperatorSpace, b: OperatorSpace, tol: float = TAU_MEMBER) -> bool:
    return a.equals(b, tol)
