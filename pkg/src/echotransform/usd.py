"""Optimal unambiguous discrimination of linearly independent pure states.

A design maps input ``i`` to ``sqrt(1 - q_i) |i> + |fail_i>``: a component on a
dedicated conclusive mode plus a failure component in a shared auxiliary
block. Such a unitary exists iff the failure Gram matrix
``G - diag(1 - q)`` is positive semidefinite, and the optimal design minimises
``sum_i p_i q_i`` over that set.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import ModeVector, UnitaryMatrix, inner_product
from .errors import (ConvergenceError, DegenerateSetError, DimensionError,
                     DomainError, NormalizationError)

GRAM_DET_MIN = 1e-12
RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscriminationDesign:
    inputs: tuple            # ModeVector, padded to the embedding dimension
    priors: np.ndarray
    outputs: tuple           # ModeVector
    embedding: UnitaryMatrix
    p_inconclusive: np.ndarray   # per state
    p_error_helstrom: float | None
    mode_roles: tuple        # ("conclusive", i) or ("inconclusive", None) per output mode
    optimal: bool = True

    @property
    def p_inconclusive_avg(self) -> float:
        return float(np.dot(self.priors, self.p_inconclusive))

    @property
    def n_states(self) -> int:
        return len(self.inputs)

    @property
    def dim(self) -> int:
        return self.embedding.dim

    @property
    def aux_dim(self) -> int:
        return sum(1 for role, _ in self.mode_roles if role == "inconclusive")

    @property
    def occupied_modes(self) -> list[int]:
        """Input modes carrying amplitude in at least one input state."""
        a = np.array([v.amplitudes for v in self.inputs])
        return [j for j in range(a.shape[1]) if np.any(np.abs(a[:, j]) > 0)]

    def transfer_matrix(self) -> np.ndarray:
        """Embedding columns acting on occupied input modes (what gets compiled)."""
        return self.embedding.entries[:, self.occupied_modes]

    def input_amplitudes(self, i: int) -> np.ndarray:
        return self.inputs[i].amplitudes[self.occupied_modes]


def _require_normalized(*vs):
    for v in vs:
        if not v.is_normalized:
            raise NormalizationError(f"state has norm {v.norm:.15g}")


def helstrom_bound(a: ModeVector, b: ModeVector) -> float:
    """Minimum error probability of a conclusive measurement, equal priors."""
    _require_normalized(a, b)
    ov = min(abs(inner_product(a, b)), 1.0)
    return 0.5 * (1.0 - np.sqrt(1.0 - ov ** 2))


def idp_bound(a: ModeVector, b: ModeVector) -> float:
    """Minimum inconclusive probability for unambiguous discrimination, equal priors."""
    _require_normalized(a, b)
    return min(abs(inner_product(a, b)), 1.0)


def complete_basis(cols: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Extend orthonormal columns to a unitary by Gram-Schmidt on e_0, e_1, ..."""
    cols = np.asarray(cols, dtype=complex)
    n = cols.shape[0] if dim is None else dim
    q = [c for c in cols.T]
    for k in range(n):
        if len(q) == n:
            break
        v = np.zeros(n, dtype=complex)
        v[k] = 1.0
        for _ in range(2):
            for u in q:
                v = v - np.vdot(u, v) * u
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            q.append(v / nv)
    return np.column_stack(q)


def qubit_family(alpha: float) -> tuple[ModeVector, ModeVector]:
    """The pair (cos a, +-sin a, 0)."""
    c, s = np.cos(alpha), np.sin(alpha)
    return ModeVector([c, s, 0.0]), ModeVector([c, -s, 0.0])


def design_qubit_pair(alpha: float) -> DiscriminationDesign:
    if not 0 < alpha <= np.pi / 4 + 1e-15:
        raise DomainError(f"alpha = {alpha} outside (0, pi/4]")
    plus, minus = qubit_family(alpha)
    c, s = np.cos(alpha), np.sin(alpha)
    c2 = np.cos(2 * alpha)
    fail = np.sqrt(c2) if c2 > 1e-15 else 0.0  # cos(pi/2) rounds to 6e-17
    out_plus = ModeVector([np.sqrt(2) * s, 0.0, fail])
    out_minus = ModeVector([0.0, np.sqrt(2) * s, fail])
    # U e0 = (out+ + out-) / (2 cos a), U e1 = (out+ - out-) / (2 sin a)
    col0 = (out_plus.amplitudes + out_minus.amplitudes) / (2 * c)
    col1 = (out_plus.amplitudes - out_minus.amplitudes) / (2 * s)
    u = complete_basis(np.column_stack([col0, col1]))
    q = fail ** 2
    return DiscriminationDesign(
        inputs=(plus, minus),
        priors=np.array([0.5, 0.5]),
        outputs=(out_plus, out_minus),
        embedding=UnitaryMatrix(u),
        p_inconclusive=np.array([q, q]),
        p_error_helstrom=helstrom_bound(plus, minus),
        mode_roles=(("conclusive", 0), ("conclusive", 1), ("inconclusive", None)),
    )


def symmetric_states(n: int, overlap: float) -> list[ModeVector]:
    """n states in dimension n with every pairwise overlap equal to ``overlap``."""
    g = (1 - overlap) * np.eye(n) + overlap * np.ones((n, n))
    w, v = np.linalg.eigh(g)
    if w.min() <= 0:
        raise DegenerateSetError(f"overlap {overlap} gives a singular Gram matrix for n={n}")
    root = (v * np.sqrt(w)) @ v.T
    return [ModeVector(root[:, i]) for i in range(n)]


def gram_matrix(states) -> np.ndarray:
    a = np.column_stack([v.amplitudes for v in states])
    return a.conj().T @ a


def failure_feasible(gram: np.ndarray, q, tol: float = 1e-12) -> bool:
    """Is ``G - diag(1 - q)`` positive semidefinite (within ``tol``)?"""
    q = np.asarray(q, dtype=float)
    if np.any(q < -tol) or np.any(q > 1 + tol):
        return False
    return np.linalg.eigvalsh(gram - np.diag(1 - q)).min() >= -tol


def boundary_scale(gram: np.ndarray, s) -> float:
    """Largest c with ``G - c * diag(s) >= 0``."""
    r = np.sqrt(np.asarray(s, dtype=float))
    return 1.0 / np.linalg.eigvalsh(r[:, None] * np.linalg.inv(gram) * r[None, :]).max()


def optimal_failure(gram: np.ndarray, priors, gap: float = 1e-11, max_newton: int = 100):
    """Minimise ``priors . q`` subject to ``G - diag(1 - q) >= 0``.

    Log-barrier interior-point method on the success probabilities
    ``s = 1 - q``; the final iterate is scaled onto the feasible boundary.
    Returns ``(q, converged)``.
    """
    g = np.asarray(gram, dtype=complex)
    p = np.asarray(priors, dtype=float)
    n = len(p)
    s = np.full(n, 0.5 * np.linalg.eigvalsh(g).min())
    m_barrier = 2 * n

    def phi(s, t):
        if np.any(s <= 0):
            return np.inf
        try:
            chol = np.linalg.cholesky(g - np.diag(s))
        except np.linalg.LinAlgError:
            return np.inf
        return -t * p @ s - 2 * np.sum(np.log(np.abs(np.diag(chol)))) - np.sum(np.log(s))

    t = 1.0
    converged = True
    while m_barrier / t > gap:
        for _ in range(max_newton):
            x = np.linalg.inv(g - np.diag(s))
            grad = -t * p + np.real(np.diag(x)) - 1 / s
            hess = np.abs(x) ** 2 + np.diag(1 / s ** 2)
            step = -np.linalg.solve(hess, grad)
            dec = -grad @ step
            # barrier values carry rounding noise of order eps * t
            if dec / 2 <= 1e-13 * max(1.0, t):
                break
            f0, h = phi(s, t), 1.0
            while phi(s + h * step, t) > f0 - 0.25 * h * dec and h > 1e-12:
                h *= 0.5
            if h <= 1e-12:
                break
            s = s + h * step
        else:
            converged = False
        t *= 8.0
    s = s * boundary_scale(g, s)
    return np.clip(1 - s, 0.0, 1.0), converged


def design_n_states(inputs, priors=None) -> DiscriminationDesign:
    """Numerically optimal USD design for 2 <= N <= 4 linearly independent states."""
    inputs = list(inputs)
    n = len(inputs)
    if not 2 <= n <= 4:
        raise DomainError(f"need 2 <= N <= 4 states, got {n}")
    dim_in = inputs[0].dim
    if any(v.dim != dim_in for v in inputs):
        raise DimensionError("input states differ in dimension")
    _require_normalized(*inputs)
    p = np.full(n, 1.0 / n) if priors is None else np.asarray(priors, dtype=float)
    if p.shape != (n,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise DomainError("priors must be N non-negative numbers summing to 1")

    psi = np.column_stack([v.amplitudes for v in inputs])
    gram = psi.conj().T @ psi
    if dim_in < n or abs(np.linalg.det(gram)) <= GRAM_DET_MIN:
        raise DegenerateSetError(f"states are linearly dependent (Gram det {abs(np.linalg.det(gram)):.2e})")

    q, converged = optimal_failure(gram, p)
    fail = gram - np.diag(1 - q)
    w, v = np.linalg.eigh(fail)
    keep = w > RANK_TOL
    phi = (v[:, keep] * np.sqrt(w[keep])).conj().T     # rows: auxiliary modes
    q = np.real(np.diag(phi.conj().T @ phi)) if keep.any() else np.zeros(n)
    r = phi.shape[0]
    dim = max(dim_in, n + r)

    out = np.zeros((dim, n), dtype=complex)
    out[:n, :n] = np.diag(np.sqrt(np.clip(1 - q, 0, 1)))
    out[n:n + r, :] = phi
    psi_pad = np.zeros((dim, n), dtype=complex)
    psi_pad[:dim_in] = psi

    # unitary carrying span(inputs) onto span(outputs); complements by Gram-Schmidt
    q_in, _ = np.linalg.qr(psi_pad)
    q_out = out @ np.linalg.pinv(psi_pad) @ q_in
    basis_in = complete_basis(q_in, dim)
    basis_out = complete_basis(q_out, dim)
    u = basis_out @ basis_in.conj().T

    in_labels = inputs[0].labels + tuple(f"pad{k}" for k in range(dim - dim_in))
    roles = tuple([("conclusive", i) for i in range(n)] + [("inconclusive", None)] * (dim - n))
    design = DiscriminationDesign(
        inputs=tuple(ModeVector(psi_pad[:, i], in_labels) for i in range(n)),
        priors=p,
        outputs=tuple(ModeVector(out[:, i]) for i in range(n)),
        embedding=UnitaryMatrix(u),
        p_inconclusive=q,
        p_error_helstrom=helstrom_bound(inputs[0], inputs[1]) if n == 2 else None,
        mode_roles=roles,
        optimal=converged,
    )
    if not converged:
        raise ConvergenceError("barrier iterations did not converge",
                               best=replace(design, optimal=False))
    return design
