"""Log-barrier Newton solver for ``min Tr(sigma)  s.t.  1_A (x) sigma >= rho_AB``.

The variable is a Hermitian ``sigma`` on ``B`` written in an orthonormal
Hermitian basis (``d_B^2`` real coordinates). For each barrier weight ``t``
the solver minimises ``t Tr(sigma) - log det(1 (x) sigma - rho)`` by damped
Newton steps, then sets ``t <- 10 t`` until ``m / t`` falls below the target
gap (``m = d_A d_B``). The central-path point yields a dual-feasible
``Y = S^-1 / t``; after rescaling so that ``Tr_A Y = 1_B`` exactly, ``Tr(rho Y)``
is a certified lower bound on the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg


class ConvergenceError(RuntimeError):
    """The barrier method failed to reach the requested gap."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(f"{message}: {diagnostics}")
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SdpResult:
    """Optimum of the conditional min-entropy program.

    ``value`` is the primal optimum ``min Tr sigma``; ``dual_value`` the matching
    certified lower bound; ``gap`` their difference; ``feasibility`` the smallest
    eigenvalue of ``1 (x) sigma - rho``.
    """

    value: float
    sigma: np.ndarray
    gap: float
    feasibility: float
    dual_value: float
    iterations: int

    @property
    def hmin(self) -> float:
        return float(-np.log2(self.value))


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of n x n Hermitian matrices, shape (n*n, n, n)."""
    out = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        out.append(e)
    r = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = r
            out.append(e)
            f = np.zeros((n, n), dtype=complex)
            f[i, j] = -1j * r
            f[j, i] = 1j * r
            out.append(f)
    return np.array(out)


def _partial_trace_a(y: np.ndarray, da: int, db: int) -> np.ndarray:
    return np.einsum("ajak->jk", y.reshape(da, db, da, db))


def _lift(sigma: np.ndarray, da: int) -> np.ndarray:
    return np.kron(np.eye(da), sigma)


def _chol_ok(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def solve_hmin_sdp(rho, da: int, db: int, gap_target: float = 1e-8, max_newton: int = 200,
                   max_total: int = 3000) -> SdpResult:
    """Solve ``min Tr sigma`` over ``1_A (x) sigma >= rho`` with ``rho`` on ``A (x) B``."""
    rho = linalg.hermitize(np.asarray(rho, dtype=complex))
    if rho.shape != (da * db, da * db):
        raise linalg.ShapeError("rho does not match da * db")
    basis = hermitian_basis(db)
    nvar = basis.shape[0]
    trace_vec = np.real(np.einsum("kii->k", basis))
    # basis lifted to the joint space: 1_A (x) E_k
    lifted = np.array([_lift(e, da) for e in basis])
    m = da * db

    lam_max = float(linalg.eigvalsh(rho)[-1])
    x = np.real(np.einsum("kij,ji->k", basis, (lam_max + 0.1) * np.eye(db)))

    def sigma_of(v):
        return np.einsum("k,kij->ij", v, basis)

    t = 1.0
    total = 0
    while True:
        for _ in range(max_newton):
            total += 1
            if total > max_total:
                raise ConvergenceError("iteration budget exhausted", {"t": t, "iterations": total})
            s = _lift(sigma_of(x), da) - rho
            sinv = np.linalg.inv(s)
            sinv = linalg.hermitize(sinv)
            # A_k = S^-1 (1 (x) E_k)
            a = np.matmul(sinv, lifted)
            grad = t * trace_vec - np.real(np.einsum("kii->k", a))
            flat = a.reshape(nvar, -1)
            flat_t = np.swapaxes(a, 1, 2).reshape(nvar, -1)
            hess = np.real(flat @ flat_t.T)
            hess = 0.5 * (hess + hess.T)
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            decrement = float(-grad @ step)
            if decrement / 2.0 <= 1e-10:
                break
            # Backtracking on the barrier objective, staying strictly feasible.
            f0 = t * trace_vec @ x - np.linalg.slogdet(s)[1]
            h = 1.0
            while h > 1e-14:
                xn = x + h * step
                sn = _lift(sigma_of(xn), da) - rho
                if _chol_ok(sn):
                    f1 = t * trace_vec @ xn - np.linalg.slogdet(sn)[1]
                    if f1 <= f0 - 0.25 * h * decrement:
                        break
                h *= 0.5
            else:
                break
            x = xn
        if m / t <= gap_target:
            break
        t *= 10.0

    sigma = linalg.hermitize(sigma_of(x))
    s = _lift(sigma, da) - rho
    value = float(np.real(np.trace(sigma)))
    feas = float(linalg.eigvalsh(s)[0])
    y = linalg.hermitize(np.linalg.inv(s)) / t
    ya = linalg.hermitize(_partial_trace_a(y, da, db))
    w, v = np.linalg.eigh(ya)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    y = _lift(inv_sqrt, da) @ y @ _lift(inv_sqrt, da)
    dual = float(np.real(np.trace(rho @ y)))
    gap = value - dual
    if not np.isfinite(gap) or gap > max(1e-6, 1e-6 * abs(value)):
        raise ConvergenceError("duality gap not closed", {"value": value, "dual": dual, "t": t, "iterations": total})
    return SdpResult(value, sigma, gap, feas, dual, total)
