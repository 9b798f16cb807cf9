"""Observables (finite POVMs), their quantum-classical channels and indistinguishable subspaces.

A subspace H0 is indistinguishable for an observable when every state
supported on H0 yields the same outcome distribution. This reduces to the
zero-error code conditions on span{M_i}, so the checks here delegate to
``graphcap``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import QuantumChannel, make_channel, positive_basis
from .graphcap import (TAU_CODE, CodeCertificate, CodeSubspace, ViolationReport, check_code,
                       random_code_state, search_violation)
from .opalg import TAU_EXACT, DimensionError, OperatorSpace, as_cmat, dagger, eig_hermitian, hs_norm, span


@dataclass(frozen=True, eq=False)
class Observable:
    effects: np.ndarray  # (m, dim, dim)
    sharp: bool

    @property
    def dim(self) -> int:
        return self.effects.shape[-1]

    @property
    def outcomes(self) -> int:
        return self.effects.shape[0]

    def __repr__(self) -> str:
        kind = "sharp" if self.sharp else "unsharp"
        return f"<Observable ({kind}) with {self.outcomes} outcomes on C^{self.dim}>"

    def probabilities(self, rho) -> np.ndarray:
        rho = as_cmat(rho)
        return np.real(np.einsum("iab,ba->i", self.effects, rho))

    def span(self) -> OperatorSpace:
        return span(self.effects)


def _is_sharp(effects: np.ndarray, tol: float = TAU_EXACT) -> bool:
    for i, a in enumerate(effects):
        for j, b in enumerate(effects):
            target = a if i == j else 0
            if hs_norm(a @ b - target) > tol:
                return False
    return True


def make_observable(effects: Sequence, tol: float = TAU_EXACT) -> Observable:
    ops = [as_cmat(e) for e in effects]
    if not ops:
        raise ValueError("an observable needs at least one effect")
    n = ops[0].shape[0]
    for i, e in enumerate(ops):
        if e.shape != (n, n):
            raise DimensionError(f"effect {i} has shape {e.shape}, expected {(n, n)}")
        if hs_norm(e - dagger(e)) > tol:
            raise ValueError(f"effect {i} is not Hermitian")
        if np.linalg.eigvalsh((e + dagger(e)) / 2)[0] < -tol:
            raise ValueError(f"effect {i} is not positive")
    arr = np.stack(ops)
    if hs_norm(arr.sum(axis=0) - np.eye(n)) > tol:
        raise ValueError("effects do not sum to the identity")
    return Observable(arr, _is_sharp(arr))


def pi_channel(obs: Observable) -> QuantumChannel:
    """rho -> sum_i trace(M_i rho) |i><i| with Kraus operators sqrt(mu) |i><v|."""
    kraus = []
    for i, e in enumerate(obs.effects):
        w, v = eig_hermitian(e).support()
        for mu, vec in zip(w, v.T):
            k = np.zeros((obs.outcomes, obs.dim), dtype=complex)
            k[i] = np.sqrt(mu) * np.conj(vec)
            kraus.append(k)
    return make_channel(kraus)


def is_indistinguishable(obs: Observable, code: CodeSubspace, tol: float = TAU_CODE) -> CodeCertificate:
    """Basis criterion: <phi_k|M_i phi_j> = 0 and equal diagonals for all i, j, k."""
    if code.ambient_dim != obs.dim:
        raise DimensionError(f"subspace lives in C^{code.ambient_dim}, observable acts on C^{obs.dim}")
    return check_code(obs.span(), code, tol)


def orthogonal_pairs_residual(obs: Observable, code: CodeSubspace, samples: int = 16,
                              seed: int = 0) -> float:
    """Largest |<psi|M_i phi>| over random orthogonal pairs drawn inside the subspace."""
    rng = np.random.default_rng(seed)
    k = code.size
    worst = 0.0
    for _ in range(samples):
        z = rng.standard_normal((k, 2)) + 1j * rng.standard_normal((k, 2))
        q, _ = np.linalg.qr(z)
        phi, psi = code.vectors @ q[:, 0], code.vectors @ q[:, 1]
        vals = np.einsum("a,iab,b->i", np.conj(psi), obs.effects, phi)
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst


def distribution_spread(obs: Observable, code: CodeSubspace, samples: int = 10, seed: int = 0) -> float:
    """Largest difference between outcome distributions of random states on the subspace."""
    rng = np.random.default_rng(seed)
    probs = np.array([obs.probabilities(random_code_state(code, rng)) for _ in range(samples)])
    return float(np.max(np.abs(probs - probs[0])))


def tensor_observables(a: Observable, b: Observable) -> Observable:
    effects = np.einsum("iab,jcd->ijacbd", a.effects, b.effects)
    n = a.dim * b.dim
    return Observable(effects.reshape(-1, n, n), a.sharp and b.sharp)


def find_indistinguishable(obs: Observable, starts: int, seed: int,
                           threads: int | None = None) -> ViolationReport:
    return search_violation(obs.span(), starts, seed, threads=threads)


def observable_from_graph(space: OperatorSpace) -> Observable:
    return make_observable(positive_basis(space).ops)


def sharp_observable(unitary: np.ndarray, ranks: Sequence[int]) -> Observable:
    """Projectors onto consecutive groups of columns of ``unitary``."""
    u = as_cmat(unitary)
    if sum(ranks) != u.shape[0]:
        raise ValueError("ranks must add up to the dimension")
    effects, lo = [], 0
    for r in ranks:
        cols = u[:, lo:lo + r]
        effects.append(cols @ dagger(cols))
        lo += r
    return make_observable(effects)
