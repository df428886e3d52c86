"""Bases, generalized Pauli operators, density states and random ensembles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import ATOL_EXACT, DomainError, ShapeError

BASIS_KINDS = ("standard", "fourier", "rotation", "haar")


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def rng_for(seed) -> np.random.Generator:
    """Portable PCG64 generator; all randomness in the package flows through here."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class Basis:
    """Orthonormal basis stored as the columns of a unitary matrix.

    ``vectors[:, j]`` is the basis ket ``|X_j>``.
    """

    vectors: np.ndarray
    name: str = ""

    def __post_init__(self):
        v = linalg.as_matrix(self.vectors)
        if v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ShapeError("basis matrix must be square")
        if not linalg.is_unitary(v, 1e-10):
            raise DomainError("basis vectors are not orthonormal")
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def ket(self, j: int) -> np.ndarray:
        return self.vectors[:, j]

    def projector(self, j: int) -> np.ndarray:
        k = self.vectors[:, j]
        return np.outer(k, k.conj())

    def projectors(self) -> list[np.ndarray]:
        return [self.projector(j) for j in range(self.dim)]

    def probabilities(self, rho) -> np.ndarray:
        """Outcome distribution ``<X_j|rho|X_j>``."""
        rho = np.asarray(rho, dtype=complex)
        v = self.vectors
        p = np.real(np.einsum("ij,ik,kj->j", v.conj(), rho, v))
        return np.clip(p, 0.0, None)


def make_basis(kind: str, d: int, param=None) -> Basis:
    """Build a basis of dimension ``d``.

    ``rotation`` takes the angle ``theta`` (qubits only); ``haar`` takes an
    integer seed. ``fourier`` has column ``k`` equal to ``omega^(jk)/sqrt(d)``.
    """
    if d < 2:
        raise ValueError("basis dimension must be at least 2")
    if kind == "standard":
        return Basis(np.eye(d, dtype=complex), "standard")
    if kind == "fourier":
        j = np.arange(d)
        return Basis(omega(d) ** np.outer(j, j) / np.sqrt(d), "fourier")
    if kind == "rotation":
        if d != 2:
            raise ValueError("rotation bases are only defined for d = 2")
        if param is None:
            raise TypeError("rotation basis needs an angle")
        c, s = np.cos(param), np.sin(param)
        return Basis(np.array([[c, -s], [s, c]], dtype=complex), f"rotation({param:.6g})")
    if kind == "haar":
        if param is None:
            raise TypeError("haar basis needs a seed")
        return Basis(haar_unitary(d, param), f"haar({param})")
    raise ValueError(f"unknown basis kind {kind!r}")


def haar_unitary(d: int, seed) -> np.ndarray:
    """Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal phases removed."""
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def overlap_matrix(x: Basis, z: Basis) -> np.ndarray:
    """Matrix of squared overlaps ``|<X_j|Z_k>|^2`` (rows j, columns k)."""
    if x.dim != z.dim:
        raise ShapeError("bases have different dimensions")
    return np.abs(x.vectors.conj().T @ z.vectors) ** 2


def overlap_c(x: Basis, z: Basis) -> float:
    """Largest squared overlap between the two bases."""
    return float(np.max(overlap_matrix(x, z)))


def is_mub(x: Basis, z: Basis, tol: float = 1e-10) -> bool:
    return bool(np.all(np.abs(overlap_matrix(x, z) - 1.0 / x.dim) <= tol))


def phase_operator(b: Basis) -> np.ndarray:
    """``sum_j omega^j |b_j><b_j|``, the generalized Pauli diagonal in ``b``."""
    d = b.dim
    v = b.vectors
    return (v * omega(d) ** np.arange(d)) @ v.conj().T


def shift_operator(d: int) -> np.ndarray:
    """Cyclic shift ``|k> -> |k+1 mod d>``."""
    if d < 2:
        raise ValueError("shift needs d >= 2")
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def fourier_ket(d: int, k: int) -> np.ndarray:
    """``|q_k> = d^(-1/2) sum_j omega^(-jk) |j>``; then ``sum_k omega^(jk) |q_k> = sqrt(d) |j>``."""
    j = np.arange(d)
    return omega(d) ** (-j * k) / np.sqrt(d)


@dataclass(frozen=True, eq=False)
class DensityState:
    """Density operator on labelled subsystems (big-endian order)."""

    op: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        op = linalg.as_matrix(self.op)
        dims = tuple(int(x) for x in self.dims)
        labels = tuple(self.labels)
        if op.shape[0] != op.shape[1] or int(np.prod(dims)) != op.shape[0]:
            raise ShapeError(f"dims {dims} do not match operator of shape {op.shape}")
        if len(labels) != len(dims) or len(set(labels)) != len(labels):
            raise ShapeError(f"labels {labels} must be unique, one per subsystem")
        if self.check:
            if not linalg.is_hermitian(op, ATOL_EXACT):
                raise DomainError("density operator is not Hermitian")
            if abs(np.trace(op) - 1.0) > ATOL_EXACT:
                raise DomainError(f"density operator has trace {np.trace(op).real:.12g}")
            if linalg.eigvalsh(op)[0] < -ATOL_EXACT:
                raise DomainError("density operator has a negative eigenvalue")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no subsystem labelled {label!r} in {self.labels}") from None

    def dim_of(self, labels: Sequence[str]) -> int:
        return int(np.prod([self.dims[self.index(x)] for x in labels]))

    def marginal(self, keep: Sequence[str]) -> "DensityState":
        """Reduced state on ``keep``; subsystems stay in their original order."""
        idx = sorted(self.index(x) for x in keep)
        op = linalg.partial_trace(self.op, self.dims, idx)
        return DensityState(op, [self.dims[i] for i in idx], [self.labels[i] for i in idx], check=False)

    def reorder(self, labels: Sequence[str]) -> "DensityState":
        order = [self.index(x) for x in labels]
        if len(order) != len(self.labels):
            raise ShapeError("reorder needs every label exactly once")
        op = linalg.permute_subsystems(self.op, self.dims, order)
        return DensityState(op, [self.dims[i] for i in order], list(labels), check=False)

    def tensor(self, other: "DensityState") -> "DensityState":
        return DensityState(
            linalg.kron(self.op, other.op), self.dims + other.dims, self.labels + other.labels, check=False
        )

    def purity(self) -> float:
        return float(np.real(np.vdot(self.op, self.op)))

    def spectrum(self) -> np.ndarray:
        return linalg.eigvalsh(self.op)


def as_state(rho, dims=None, labels=None) -> DensityState:
    if isinstance(rho, DensityState):
        return rho
    m = linalg.as_matrix(rho)
    dims = (m.shape[0],) if dims is None else tuple(dims)
    labels = tuple(f"A{i}" for i in range(len(dims))) if labels is None else tuple(labels)
    return DensityState(m, dims, labels)


def pure_state(psi, dims=None, labels=("S",)) -> DensityState:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    dims = (psi.size,) if dims is None else tuple(dims)
    return DensityState(np.outer(psi, psi.conj()), dims, labels)


def maximally_mixed(d: int, label: str = "S") -> DensityState:
    return DensityState(np.eye(d, dtype=complex) / d, (d,), (label,))


def basis_state(d: int, k: int = 0, label: str = "S") -> DensityState:
    e = np.zeros(d, dtype=complex)
    e[k] = 1.0
    return pure_state(e, labels=(label,))


def maximally_entangled(b: Basis, labels=("S", "Sp")) -> DensityState:
    """Projector onto ``d^(-1/2) sum_j |b_j>|j>``."""
    d = b.dim
    psi = np.zeros(d * d, dtype=complex)
    for j in range(d):
        e = np.zeros(d, dtype=complex)
        e[j] = 1.0
        psi += np.kron(b.ket(j), e)
    psi /= np.sqrt(d)
    return DensityState(np.outer(psi, psi.conj()), (d, d), labels)


def purification_vector(rho) -> np.ndarray:
    """Vector ``sum_i sqrt(lambda_i) |e_i>|i>`` on system (x) reference of equal dimension."""
    rho = np.asarray(rho.op if isinstance(rho, DensityState) else rho, dtype=complex)
    sd = linalg.eigh(rho)
    d = rho.shape[0]
    lam = np.clip(sd.eigenvalues, 0.0, None)
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        if lam[i] <= linalg.SUPPORT_FLOOR:
            continue
        e = np.zeros(d, dtype=complex)
        e[i] = 1.0
        psi += np.sqrt(lam[i]) * np.kron(sd.eigenvectors[:, i], e)
    return psi / np.linalg.norm(psi)


def purify(rho: DensityState, ref_label: str = "Sp") -> DensityState:
    """Pure state on ``rho``'s system and a reference of the same dimension."""
    rho = as_state(rho)
    if len(rho.dims) != 1:
        raise ShapeError("purify expects a single-subsystem state")
    psi = purification_vector(rho)
    d = rho.dim
    return DensityState(np.outer(psi, psi.conj()), (d, d), (rho.labels[0], ref_label))


def random_pure(d: int, seed, label: str = "S") -> DensityState:
    rng = rng_for(seed)
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return pure_state(psi, labels=(label,))


def random_density(d: int, rank: int, seed, label: str = "S") -> DensityState:
    """Random state of the given rank: partial trace of a Haar-random pure state on d x rank."""
    if not 1 <= rank <= d:
        raise ValueError(f"rank {rank} outside [1, {d}]")
    rng = rng_for(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    rho = linalg.hermitize(rho / np.trace(rho).real)
    return DensityState(rho, (d,), (label,))


def random_bipartite(dims: Sequence[int], seed, rank: int | None = None, labels=("A", "B")) -> DensityState:
    """Random state on a product space (mixed by default, full rank)."""
    n = int(np.prod(dims))
    st = random_density(n, n if rank is None else rank, seed)
    return DensityState(st.op, tuple(dims), tuple(labels))


def device_state(probs: Sequence[float], label: str) -> DensityState:
    p = validate_distribution(probs)
    return DensityState(np.diag(p).astype(complex), (p.size,), (label,))


def validate_distribution(probs, tol: float = 1e-12) -> np.ndarray:
    p = np.asarray(probs, dtype=float).ravel()
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > tol:
        raise DomainError(f"not a probability distribution: {p}")
    return p


def pure_device(d: int) -> np.ndarray:
    p = np.zeros(d)
    p[0] = 1.0
    return p
