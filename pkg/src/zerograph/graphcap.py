"""Zero-error code certification and the multi-start search for code pairs.

A pair of orthonormal vectors (phi, psi) spans a perfectly reversible
plane for every channel with graph L exactly when

    F(phi, psi) = sum_B |<psi|B phi>|^2 + |<phi|B phi> - <psi|B psi>|^2

vanishes, the sum running over an orthonormal basis of L. ``search_violation``
minimizes F over pairs of unit vectors.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import QuantumChannel, apply, make_channel, ncgraph
from .opalg import TAU_EXACT, DimensionError, OperatorSpace, ProductSpace, as_cmat, dagger

TAU_CODE = 1e-9
TAU_RECOVER = 1e-8
EPS_GAP = 1e-4

GRAD_TOL = 1e-10
MAX_ITER = 5000
CHUNK = 256
VALUE_FLOOR = 1e-20


class CodeNotCertifiedError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CodeSubspace:
    vectors: np.ndarray  # columns are the code vectors

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    def projector(self) -> np.ndarray:
        return self.vectors @ dagger(self.vectors)


def make_code(vectors, tol: float = TAU_EXACT) -> CodeSubspace:
    """Validate an orthonormal family; accepts a list of vectors or a matrix of columns."""
    if isinstance(vectors, (list, tuple)):
        x = np.column_stack([as_cmat(v).ravel() for v in vectors])
    else:
        x = as_cmat(vectors)
    if x.shape[1] == 0:
        raise ValueError("empty code")
    g = dagger(x) @ x
    if np.max(np.abs(g - np.eye(x.shape[1]))) > tol:
        raise ValueError("code vectors are not orthonormal")
    return CodeSubspace(x)


@dataclass(frozen=True)
class CodeCertificate:
    passed: bool
    max_offdiag_residual: float
    max_diag_residual: float
    capacity_bound_bits: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_offdiag_residual": self.max_offdiag_residual,
            "max_diag_residual": self.max_diag_residual,
            "capacity_bound_bits": self.capacity_bound_bits,
        }


def code_residuals(space, code: CodeSubspace) -> tuple[float, float]:
    if code.ambient_dim != space.ambient_dim:
        raise DimensionError(f"code lives in C^{code.ambient_dim}, space acts on C^{space.ambient_dim}")
    c = space.compress(code.vectors)
    k = code.size
    off = c[:, ~np.eye(k, dtype=bool)]
    diag = np.einsum("aii->ai", c)
    off_res = float(np.max(np.abs(off))) if off.size else 0.0
    diag_res = float(np.max(np.abs(diag[:, :, None] - diag[:, None, :])))
    return off_res, diag_res


def check_code(space, code: CodeSubspace, tol: float = TAU_CODE) -> CodeCertificate:
    """Check <phi_i|A phi_j> = 0 (i != j) and equal diagonals over a basis of the space."""
    off, diag = code_residuals(space, code)
    passed = off <= tol and diag <= tol
    return CodeCertificate(passed, off, diag, float(np.log2(code.size)) if passed else 0.0)


def _unit(v, name: str) -> np.ndarray:
    v = as_cmat(v).ravel()
    if abs(np.linalg.norm(v) - 1) > TAU_EXACT:
        raise ValueError(f"{name} is not a unit vector")
    return v


def violation_functional(space, phi, psi) -> float:
    phi, psi = _unit(phi, "phi"), _unit(psi, "psi")
    c = space.compress(np.column_stack([phi, psi]))
    a = c[:, 1, 0]
    b = c[:, 0, 0] - c[:, 1, 1]
    return float(np.sum(np.abs(a) ** 2) + np.sum(np.abs(b) ** 2))


def _stacked(basis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Basis and its adjoints stacked into (d*n, n) matrices."""
    d, n, _ = basis.shape
    return basis.reshape(d * n, n), dagger(basis).reshape(d * n, n)


def _batched_value_grad(stacked, phi: np.ndarray, psi: np.ndarray):
    """F and its Euclidean gradient (2 dF/d conj) for batches of shape (S, n)."""
    bm, bh = stacked
    s, n = phi.shape
    bphi = (phi @ bm.T).reshape(s, -1, n)
    bpsi = (psi @ bm.T).reshape(s, -1, n)
    bdphi = (phi @ bh.T).reshape(s, -1, n)
    bdpsi = (psi @ bh.T).reshape(s, -1, n)
    cphi, cpsi = np.conj(phi)[:, None, :], np.conj(psi)[:, None, :]
    a = np.sum(cpsi * bphi, axis=2)
    b = np.sum(cphi * bphi, axis=2) - np.sum(cpsi * bpsi, axis=2)
    f = np.sum(np.abs(a) ** 2 + np.abs(b) ** 2, axis=1)
    a3, b3, bc3 = a[:, :, None], b[:, :, None], np.conj(b)[:, :, None]
    g_phi = np.sum(a3 * bdpsi + bc3 * bphi + b3 * bdphi, axis=1)
    g_psi = np.sum(np.conj(a3) * bphi - bc3 * bpsi - b3 * bdpsi, axis=1)
    return f, 2 * g_phi, 2 * g_psi


def _tangent(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    return g - np.real(np.sum(np.conj(x) * g, axis=1, keepdims=True)) * x


def _normalize(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def start_vectors(n: int, seed: int, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Complex-Gaussian start pair for start ``index``, from its own Philox stream."""
    rng = np.random.Generator(np.random.Philox(key=(index << 64) | (seed & (2**64 - 1))))
    z = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z[0], z[1]


def _sqnorm(x: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(x) ** 2, axis=1)


def minimize_pairs(basis: np.ndarray, phi: np.ndarray, psi: np.ndarray,
                   max_iter: int = MAX_ITER, grad_tol: float = GRAD_TOL):
    """Projected gradient descent with backtracking on a batch of sphere pairs.

    Trial steps start from a Barzilai-Borwein (short) estimate. Once the
    decrease in F falls below rounding, a step is accepted if it shrinks the
    gradient. A row is converged when its gradient norm reaches ``grad_tol``
    or its value reaches ``VALUE_FLOOR``; rows evolve independently and
    freeze once converged or stalled.
    Returns (phi, psi, values, converged).
    """
    stacked = _stacked(np.asarray(basis, dtype=complex))
    phi, psi = _normalize(phi.astype(complex)), _normalize(psi.astype(complex))
    s = phi.shape[0]
    step = np.ones(s)
    done = np.zeros(s, dtype=bool)
    f, g1, g2 = _batched_value_grad(stacked, phi, psi)
    t1, t2 = _tangent(phi, g1), _tangent(psi, g2)
    gn2 = _sqnorm(t1) + _sqnorm(t2)
    eps = np.finfo(float).eps
    for _ in range(max_iter):
        done |= (np.sqrt(gn2) <= grad_tol) | (f <= VALUE_FLOOR)
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        pending = act
        for _ in range(60):
            st = step[pending, None]
            nphi = _normalize(phi[pending] - st * t1[pending])
            npsi = _normalize(psi[pending] - st * t2[pending])
            nf, ng1, ng2 = _batched_value_grad(stacked, nphi, npsi)
            nt1, nt2 = _tangent(nphi, ng1), _tangent(npsi, ng2)
            ngn2 = _sqnorm(nt1) + _sqnorm(nt2)
            fp = f[pending]
            armijo = nf <= fp - 1e-4 * step[pending] * gn2[pending]
            flat = (np.abs(nf - fp) <= 16 * eps * np.maximum(fp, 1e-300)) & (ngn2 < gn2[pending])
            ok = armijo | flat
            idx = pending[ok]
            if idx.size:
                # Barzilai-Borwein estimate for the next trial step
                ds = np.concatenate([nphi[ok] - phi[idx], npsi[ok] - psi[idx]], axis=1)
                dy = np.concatenate([nt1[ok] - t1[idx], nt2[ok] - t2[idx]], axis=1)
                sy = np.real(np.sum(np.conj(ds) * dy, axis=1))
                bb = np.where(sy > 0, sy / np.maximum(_sqnorm(dy), 1e-300), 2 * step[idx])
                phi[idx], psi[idx], f[idx] = nphi[ok], npsi[ok], nf[ok]
                t1[idx], t2[idx], gn2[idx] = nt1[ok], nt2[ok], ngn2[ok]
                step[idx] = np.clip(bb, 1e-6, 1e3)
            pending = pending[~ok]
            if pending.size == 0:
                break
            step[pending] *= 0.5
        done[pending] = True  # no acceptable step at all: stalled
    return phi, psi, f, (np.sqrt(gn2) <= grad_tol) | (f <= VALUE_FLOOR)


@dataclass(frozen=True)
class ViolationReport:
    graph_dim: int
    best_value: float
    phi: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    starts: int
    seed: int
    converged_fraction: float
    best_start: int = 0

    @property
    def witness_found(self) -> bool:
        return self.best_value <= TAU_EXACT

    @property
    def gap_evidence(self) -> bool:
        return self.best_value >= EPS_GAP

    def to_dict(self) -> dict:
        from .io import cmat_to_json

        return {
            "graph_dim": self.graph_dim,
            "best_value": self.best_value,
            "phi": cmat_to_json(self.phi.reshape(-1, 1)),
            "psi": cmat_to_json(self.psi.reshape(-1, 1)),
            "starts": self.starts,
            "seed": self.seed,
            "converged_fraction": self.converged_fraction,
        }


def default_threads() -> int:
    env = os.environ.get("ZEROGRAPH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def search_violation(space, starts: int, seed: int, threads: int | None = None,
                     max_iter: int = MAX_ITER) -> ViolationReport:
    """Multi-start minimization of the violation functional.

    Starts are processed in fixed chunks so the outcome does not depend on
    the thread count; the lowest value wins, ties go to the lowest index.
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    basis = space.basis if not isinstance(space, ProductSpace) else space.materialize().basis
    n = basis.shape[-1]
    pairs = [start_vectors(n, seed, i) for i in range(starts)]
    phi0 = np.array([p[0] for p in pairs])
    psi0 = np.array([p[1] for p in pairs])
    chunks = [(lo, min(lo + CHUNK, starts)) for lo in range(0, starts, CHUNK)]

    def run(bounds):
        lo, hi = bounds
        return minimize_pairs(basis, phi0[lo:hi], psi0[lo:hi], max_iter=max_iter)

    threads = threads or default_threads()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    phi = np.concatenate([r[0] for r in results])
    psi = np.concatenate([r[1] for r in results])
    vals = np.concatenate([r[2] for r in results])
    conv = np.concatenate([r[3] for r in results])
    best = int(np.argmin(vals))  # argmin returns the first index on ties
    return ViolationReport(
        graph_dim=int(basis.shape[0]),
        best_value=float(violation_functional(space, phi[best], psi[best])),
        phi=phi[best],
        psi=psi[best],
        starts=starts,
        seed=seed,
        converged_fraction=float(np.mean(conv)),
        best_start=best,
    )


def witness_code(report: ViolationReport) -> CodeSubspace:
    """Orthonormalized witness pair as a two-dimensional code."""
    phi = report.phi / np.linalg.norm(report.phi)
    psi = report.psi - np.vdot(phi, report.psi) * phi
    return make_code([phi, psi / np.linalg.norm(psi)], tol=1e-6)


def build_recovery(ch: QuantumChannel, code: CodeSubspace, tol: float = TAU_CODE) -> QuantumChannel:
    """Recovery channel for a certified code.

    The matrix lam[k, l] defined by P K_k^dag K_l P = lam[k, l] P is
    diagonalized; each rotated error F_a with weight d_a > 0 is undone by
    P F_a^dag / sqrt(d_a). The rest of the output space is sent to a code
    state so that the recovery is trace preserving.
    """
    cert = check_code(ncgraph(ch), code, tol)
    if not cert.passed:
        raise CodeNotCertifiedError(
            f"code not certified (offdiag {cert.max_offdiag_residual:.2e}, diag {cert.max_diag_residual:.2e})")
    c = code.vectors
    kc = np.einsum("kij,jc->kic", ch.kraus, c)
    lam = np.einsum("kic,lic->kl", np.conj(kc), kc) / code.size
    d, u = np.linalg.eigh((lam + dagger(lam)) / 2)
    fk = np.einsum("ka,kij->aij", u, ch.kraus)
    ops = []
    for a in range(len(d)):
        if d[a] > TAU_RECOVER:
            fc = fk[a] @ c  # dim_out x code size, columns orthogonal with norm sqrt(d_a)
            ops.append(c @ dagger(fc) / np.sqrt(d[a]))
    covered = sum(dagger(r) @ r for r in ops)
    w, v = np.linalg.eigh(np.eye(ch.dim_out) - (covered + dagger(covered)) / 2)
    rest = v[:, w > 0.5]
    for lo in range(0, rest.shape[1], ch.dim_in):
        block = rest[:, lo:lo + ch.dim_in]
        ops.append(np.eye(ch.dim_in)[:, :block.shape[1]] @ dagger(block))
    return make_channel(ops, tol=max(TAU_EXACT, 10 * tol))


def trace_distance(a, b) -> float:
    diff = as_cmat(a) - as_cmat(b)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((diff + dagger(diff)) / 2))))


def random_code_state(code: CodeSubspace, rng: np.random.Generator) -> np.ndarray:
    k = code.size
    g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    rho = g @ dagger(g)
    rho /= np.trace(rho).real
    return code.vectors @ rho @ dagger(code.vectors)


def recovery_errors(ch: QuantumChannel, recovery: QuantumChannel, code: CodeSubspace,
                    samples: int = 20, seed: int = 0) -> list[float]:
    """Trace distances |R(Phi(rho)) - rho| for random states on the code."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(samples):
        rho = random_code_state(code, rng)
        out.append(trace_distance(apply(recovery, apply(ch, rho)), rho))
    return out
