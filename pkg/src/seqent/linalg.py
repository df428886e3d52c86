"""Dense complex linear algebra: Kronecker structure, partial traces,
Hermitian spectra, matrix functions, norms and fidelity.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Subsystems of a composite operator are addressed by position in a
``dims`` sequence using big-endian (row-major) ordering, so that for
``dims = (d0, d1)`` the basis index is ``i0 * d1 + i1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ATOL_EXACT = 1e-9
ATOL_SDP = 1e-6
SLACK_TOL = 1e-7

# Largest total Hilbert-space dimension any constructor will build.
DIM_CAP = 4096

# Eigenvalues at or below this are outside the support.
SUPPORT_FLOOR = 1e-12


class DimensionCapError(ValueError):
    """Raised when a composite dimension would exceed the configured cap."""


class ShapeError(ValueError):
    """Raised on inconsistent matrix shapes or subsystem dimensions."""


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply(self, func) -> np.ndarray:
        """Return ``f(A) = V f(diag(lambda)) V^dagger``."""
        v = self.eigenvectors
        return (v * func(self.eigenvalues)) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, tol: float = ATOL_EXACT) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def is_unitary(a, tol: float = ATOL_EXACT) -> bool:
    a = np.asarray(a)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])), initial=0.0) <= tol)


def is_psd(a, tol: float = ATOL_EXACT) -> bool:
    if not is_hermitian(a, tol):
        return False
    return bool(eigvalsh(a)[0] >= -tol)


def trace(a) -> complex:
    return complex(np.trace(a))


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def kron(a, b, cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product ``a (x) b`` with a guard on the resulting size."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > cap:
        raise DimensionCapError(f"kron result {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def kron_all(mats: Iterable, cap: int = DIM_CAP) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m, cap=cap)
    return out


def _check_dims(n: int, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(x) for x in dims)
    if any(x < 1 for x in dims) or int(np.prod(dims)) != n:
        raise ShapeError(f"dims {dims} do not factor dimension {n}")
    return dims


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems appear in their original order. An empty ``keep``
    returns the full trace as a 1x1 matrix.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError("partial_trace needs a square matrix")
    dims = _check_dims(m.shape[0], dims)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    t = m.reshape(dims + dims)
    # Contract each traced pair of (row, col) axes, highest index first so
    # the remaining axis numbers stay valid.
    for i in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def permute_subsystems(m, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a square operator.

    ``order[i]`` names the old subsystem placed at new position ``i``.
    """
    m = np.asarray(m, dtype=complex)
    dims = _check_dims(m.shape[0], dims)
    n = len(dims)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ShapeError(f"{order} is not a permutation of {n} subsystems")
    t = m.reshape(dims + dims).transpose(order + [n + k for k in order])
    return t.reshape(m.shape)


def apply_local(op, m, dims: Sequence[int], targets: Sequence[int], right=None) -> np.ndarray:
    """Compute ``(op (x) 1) m (right (x) 1)^dagger`` acting on the ``targets`` factors.

    ``right`` defaults to ``op``, which gives the conjugation ``op m op^dagger``.
    ``op`` is a square operator on the tensor product of the target factors
    taken in the listed order.
    """
    m = np.asarray(m, dtype=complex)
    dims = _check_dims(m.shape[0], dims)
    n = len(dims)
    targets = list(targets)
    dt = int(np.prod([dims[t] for t in targets]))
    op = np.asarray(op, dtype=complex)
    right = op if right is None else np.asarray(right, dtype=complex)
    if op.shape != (dt, dt) or right.shape != (dt, dt):
        raise ShapeError(f"local operator must be {dt}x{dt}")
    rest = [i for i in range(n) if i not in targets]
    order = targets + rest
    front = permute_subsystems(m, dims, order)
    pdims = [dims[i] for i in order]
    dr = m.shape[0] // dt
    t = front.reshape(dt, dr, dt, dr)
    t = np.einsum("ab,bicj->aicj", op, t)
    t = np.einsum("aicj,dc->aidj", t, right.conj())
    out = t.reshape(m.shape)
    inverse = list(np.argsort(order))
    return permute_subsystems(out, pdims, inverse)


def embed(op, dims: Sequence[int], targets: Sequence[int], cap: int = DIM_CAP) -> np.ndarray:
    """Full-space matrix of a local operator acting on ``targets``."""
    dims = tuple(int(x) for x in dims)
    total = int(np.prod(dims))
    if total > cap:
        raise DimensionCapError(f"dimension {total} exceeds cap {cap}")
    targets = list(targets)
    dt = int(np.prod([dims[t] for t in targets]))
    rest = [i for i in range(len(dims)) if i not in targets]
    dr = total // dt
    full = np.kron(np.asarray(op, dtype=complex), np.eye(dr))
    order = targets + rest
    pdims = [dims[i] for i in order]
    return permute_subsystems(full, pdims, list(np.argsort(order)))


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 100) -> SpectralDecomposition:
    """Cyclic complex Jacobi diagonalisation of a Hermitian matrix.

    Each rotation zeroes one off-diagonal pair (p, q) by conjugating with a
    2x2 unitary built from the phase of ``A[p, q]`` and a real rotation.
    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||A||_F``.
    """
    a = hermitize(as_matrix(a))
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.linalg.norm(a) ** 2 - np.sum(np.abs(np.diag(a)) ** 2), 0.0))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                # Phase-strip the 2x2 block, then rotate it diagonal:
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]].
                theta = 0.5 * np.arctan2(2.0 * mag, aqq - app)
                c = np.cos(theta)
                s = np.sin(theta)
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                pq = [p, q]
                a[:, pq] = a[:, pq] @ g
                a[pq, :] = g.conj().T @ a[pq, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                v[:, pq] = v[:, pq] @ g
    w = np.real(np.diag(a))
    idx = np.argsort(w, kind="stable")
    return SpectralDecomposition(w[idx], v[:, idx])


def eigh(a, method: str = "lapack") -> SpectralDecomposition:
    """Hermitian eigendecomposition with ascending eigenvalues.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"``
    uses :func:`jacobi_eigh`. The input is symmetrised before solving.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError("eigh needs a square matrix")
    if not is_hermitian(a, 1e-10 * max(1.0, float(np.max(np.abs(a), initial=0.0)))):
        raise DomainError("eigh input is not Hermitian")
    a = hermitize(a)
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    w, v = np.linalg.eigh(a)
    return SpectralDecomposition(w, v)


def eigvalsh(a) -> np.ndarray:
    return np.linalg.eigvalsh(hermitize(np.asarray(a, dtype=complex)))


def sqrtm_psd(a) -> np.ndarray:
    """Square root of a PSD matrix; negative round-off eigenvalues clip to 0."""
    return eigh(a).apply(lambda w: np.sqrt(np.clip(w, 0.0, None)))


def logm_support(a, base: float = 2.0) -> np.ndarray:
    """Logarithm restricted to the support (eigenvalues above ``SUPPORT_FLOOR``)."""
    def f(w):
        out = np.zeros_like(w)
        m = w > SUPPORT_FLOOR
        out[m] = np.log(w[m]) / np.log(base)
        return out

    return eigh(a).apply(f)


def trace_norm(a) -> float:
    """Sum of singular values, ``Tr sqrt(A^dagger A)``."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError("trace_norm needs a square matrix")
    if is_hermitian(a, 1e-12):
        return float(np.sum(np.abs(eigvalsh(a))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def trace_distance(a, b) -> float:
    return 0.5 * trace_norm(np.asarray(a) - np.asarray(b))


def root_fidelity(rho, sigma) -> float:
    """``F(rho, sigma) = Tr[(sqrt(rho) sigma sqrt(rho))^(1/2)]``."""
    rho = as_matrix(rho)
    sigma = as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ShapeError("fidelity arguments differ in shape")
    for x in (rho, sigma):
        if not is_hermitian(x, 1e-9) or eigvalsh(x)[0] < -1e-9:
            raise DomainError("fidelity arguments must be PSD")
    r = sqrtm_psd(rho)
    inner = hermitize(r @ sigma @ r)
    return float(np.sum(np.sqrt(np.clip(eigvalsh(inner), 0.0, None))))
