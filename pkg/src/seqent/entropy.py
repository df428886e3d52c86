"""Classical and quantum entropies (base 2), relative entropies, and
conditional min/max entropies.

Subsystems are addressed by label on a :class:`~seqent.qstate.DensityState`.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import SUPPORT_FLOOR, DomainError
from .qstate import DensityState, as_state
from .sdp import SdpResult, solve_hmin_sdp

LN2 = math.log(2.0)


def _labels(x) -> list[str]:
    return [x] if isinstance(x, str) else list(x)


def classical_entropy(p, variant: str = "shannon") -> float:
    """Shannon or min-entropy of a probability vector, in bits."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"not a probability distribution: {p}")
    p = np.clip(p, 0.0, None)
    if variant == "shannon":
        q = p[p > 0]
        return float(max(-np.sum(q * np.log2(q)), 0.0))
    if variant == "min":
        return float(max(-np.log2(p.max()), 0.0))
    raise ValueError(f"unknown entropy variant {variant!r}")


def binary_entropy(p: float) -> float:
    return classical_entropy([p, 1.0 - p])


def _spectrum_entropy(w: np.ndarray) -> float:
    w = w[w > SUPPORT_FLOOR]
    return float(max(-np.sum(w * np.log2(w)), 0.0))


def von_neumann(rho) -> float:
    """``-Tr(rho log2 rho)``."""
    m = rho.op if isinstance(rho, DensityState) else linalg.as_matrix(rho)
    if not linalg.is_hermitian(m, 1e-9):
        raise DomainError("von_neumann needs a Hermitian operator")
    w = linalg.eigvalsh(m)
    if w[0] < -1e-9 or abs(w.sum() - 1.0) > 1e-9:
        raise DomainError("von_neumann needs a density operator")
    return _spectrum_entropy(w)


def entropy_of(rho: DensityState, labels: Sequence[str]) -> float:
    labels = _labels(labels)
    if not labels:
        return 0.0
    return von_neumann(rho.marginal(labels))


def conditional_vn(rho: DensityState, a, b) -> float:
    """``H(A|B) = H(AB) - H(B)``."""
    a, b = _labels(a), _labels(b)
    if set(a) & set(b):
        raise ValueError("conditioning labels overlap")
    for x in a + b:
        rho.index(x)
    return entropy_of(rho, a + b) - entropy_of(rho, b)


def mutual_information(rho: DensityState, a, b) -> float:
    a, b = _labels(a), _labels(b)
    return entropy_of(rho, a) + entropy_of(rho, b) - entropy_of(rho, a + b)


def dephase(rho: DensityState, label: str, basis) -> DensityState:
    """Apply ``sum_j [b_j] . [b_j]`` to one subsystem (a classical register for that basis)."""
    idx = rho.index(label)
    out = np.zeros_like(rho.op)
    for proj in basis.projectors():
        out += linalg.apply_local(proj, rho.op, rho.dims, [idx])
    return DensityState(linalg.hermitize(out), rho.dims, rho.labels, check=False)


def relative_entropy(rho, sigma, variant: str = "vn") -> float:
    """Relative entropy ``D(rho || sigma)`` in bits.

    ``vn`` is Umegaki's relative entropy, ``max`` is ``log2 min{l : rho <= l sigma}``
    and ``fid`` is ``-2 log2 F(rho, sigma)``. A support violation gives
    ``math.inf`` rather than raising.
    """
    r = rho.op if isinstance(rho, DensityState) else linalg.as_matrix(rho)
    s = sigma.op if isinstance(sigma, DensityState) else linalg.as_matrix(sigma)
    if r.shape != s.shape:
        raise linalg.ShapeError("relative entropy arguments differ in shape")
    if variant == "fid":
        f = linalg.root_fidelity(r, s)
        return math.inf if f <= 0.0 else float(-2.0 * np.log2(f))
    sd = linalg.eigh(s)
    supp = sd.eigenvalues > SUPPORT_FLOOR
    vs = sd.eigenvectors[:, supp]
    # weight of rho outside supp(sigma)
    r_in = vs.conj().T @ r @ vs
    if np.real(np.trace(r)) - np.real(np.trace(r_in)) > 1e-10:
        return math.inf
    if variant == "vn":
        rr = linalg.eigh(r)
        lr = rr.eigenvalues
        m = lr > SUPPORT_FLOOR
        term1 = float(np.sum(lr[m] * np.log2(lr[m])))
        # Tr(rho log sigma) on supp(sigma)
        log_s = np.log2(sd.eigenvalues[supp])
        term2 = float(np.real(np.sum(np.diag(r_in) * log_s)))
        # Klein's inequality: only round-off can push this below zero
        return max(term1 - term2, 0.0)
    if variant == "max":
        inv_sqrt = (vs / np.sqrt(sd.eigenvalues[supp])) @ vs.conj().T
        m = linalg.hermitize(inv_sqrt @ r @ inv_sqrt)
        lam = float(linalg.eigvalsh(m)[-1])
        return float(np.log2(lam))
    raise ValueError(f"unknown relative entropy variant {variant!r}")


def pinsker_bound(rho, sigma) -> float:
    """``||rho - sigma||_1^2 / (2 ln 2)``, the Pinsker lower bound on ``D`` in bits."""
    r = rho.op if isinstance(rho, DensityState) else np.asarray(rho)
    s = sigma.op if isinstance(sigma, DensityState) else np.asarray(sigma)
    return linalg.trace_norm(r - s) ** 2 / (2.0 * LN2)


def _bipartite(rho, a, b) -> tuple[np.ndarray, int, int]:
    rho = as_state(rho)
    a, b = _labels(a), _labels(b)
    if set(a) & set(b):
        raise ValueError("conditioning labels overlap")
    st = rho.marginal(a + b)
    st = st.reorder(a + b) if list(st.labels) != a + b else st
    return st.op, st.dim_of(a), st.dim_of(b)


def hmin_conditional(rho: DensityState, a, b) -> SdpResult:
    """Solve ``min{Tr sigma_B : 1_A (x) sigma_B >= rho_AB}``; ``H_min(A|B) = -log2`` of it.

    An empty ``b`` gives the unconditional ``H_min(A) = -log2 lambda_max``.
    """
    op, da, db = _bipartite(rho, a, b)
    if db == 1:
        lam = float(linalg.eigvalsh(op)[-1])
        return SdpResult(lam, np.array([[lam]], dtype=complex), 0.0, 0.0, lam, 0)
    return solve_hmin_sdp(op, da, db)


def hmin(rho: DensityState, a, b) -> float:
    return hmin_conditional(rho, a, b).hmin


def purify_bipartite(op: np.ndarray, tol: float = SUPPORT_FLOOR) -> tuple[np.ndarray, int]:
    """Purification vector of ``op`` on ``system (x) C`` with ``dim C = rank(op)``."""
    sd = linalg.eigh(op)
    keep = sd.eigenvalues > tol
    lam = sd.eigenvalues[keep]
    vecs = sd.eigenvectors[:, keep]
    r = int(keep.sum())
    psi = np.zeros(op.shape[0] * r, dtype=complex)
    for i in range(r):
        e = np.zeros(r, dtype=complex)
        e[i] = 1.0
        psi += np.sqrt(lam[i]) * np.kron(vecs[:, i], e)
    return psi / np.linalg.norm(psi), r


def hmax_conditional(rho: DensityState, a, b) -> float:
    """``H_max(A|B) = -H_min(A|C)`` where ``C`` purifies ``rho_AB``."""
    op, da, db = _bipartite(rho, a, b)
    psi, r = purify_bipartite(op)
    full = DensityState(np.outer(psi, psi.conj()), (da, db, r), ("A", "B", "C"), check=False)
    if r == 1:
        return -hmin(full, ["A"], [])
    return -hmin(full, ["A"], ["C"])
