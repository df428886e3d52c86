"""Exact simulation of sequential coherent measurements.

A system ``S`` of dimension ``d`` interacts in turn with devices ``M1 ... Mn``
(each of dimension ``d``, initially diagonal in the standard basis) through
controlled shifts ``sum_j [X_j] (x) Shift^j``. When ``track_reference`` is set the
initial state is purified onto a reference ``Sp`` that is never acted upon.
Tensor order is always ``S, M1, ..., Mn[, Sp]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import DIM_CAP, DimensionCapError, ShapeError
from .qstate import (
    Basis,
    DensityState,
    as_state,
    fourier_ket,
    omega,
    overlap_c,
    purify,
    shift_operator,
    validate_distribution,
)

SYSTEM = "S"
REFERENCE = "Sp"


def device_label(m: int) -> str:
    """Label of the m-th device, counting from 1."""
    return f"M{m}"


class UnsupportedError(ValueError):
    """Raised when an operation is asked for a configuration it does not cover."""


@dataclass(frozen=True, eq=False)
class MeasurementStep:
    basis: Basis
    device: np.ndarray = None

    def __post_init__(self):
        dev = np.zeros(self.basis.dim) if self.device is None else self.device
        if self.device is None:
            dev[0] = 1.0
        dev = validate_distribution(dev)
        if dev.size != self.basis.dim:
            raise ShapeError("device distribution length must equal the basis dimension")
        object.__setattr__(self, "device", dev)

    @property
    def pure_device(self) -> bool:
        return bool(self.device[0] == 1.0)


@dataclass(frozen=True, eq=False)
class Scenario:
    initial: DensityState
    steps: tuple[MeasurementStep, ...]
    track_reference: bool = False
    cap: int = DIM_CAP

    def __post_init__(self):
        init = as_state(self.initial)
        if len(init.dims) != 1:
            raise ShapeError("initial state must live on the system alone")
        init = DensityState(init.op, init.dims, (SYSTEM,), check=False)
        steps = tuple(self.steps)
        d = init.dim
        if any(s.basis.dim != d for s in steps):
            raise ShapeError("every step must act on the system dimension")
        total = d ** (1 + len(steps) + int(self.track_reference))
        if total > self.cap:
            raise DimensionCapError(f"scenario needs dimension {total} > cap {self.cap}")
        object.__setattr__(self, "initial", init)
        object.__setattr__(self, "steps", steps)

    @property
    def d(self) -> int:
        return self.initial.dim

    def with_initial(self, initial, track_reference: bool | None = None) -> "Scenario":
        track = self.track_reference if track_reference is None else track_reference
        return Scenario(initial, self.steps, track, self.cap)


def scenario_from_bases(initial, bases: Sequence[Basis], devices=None, track_reference=False) -> Scenario:
    devices = [None] * len(bases) if devices is None else devices
    steps = [MeasurementStep(b, None if p is None else np.asarray(p, float)) for b, p in zip(bases, devices)]
    return Scenario(initial, tuple(steps), track_reference)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States at times t_0 ... t_n, plus the data that produced them."""

    scenario: Scenario
    states: tuple[DensityState, ...]
    overlaps: tuple[float, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.states) - 1

    @property
    def d(self) -> int:
        return self.scenario.d

    @property
    def bases(self) -> tuple[Basis, ...]:
        return tuple(s.basis for s in self.scenario.steps)

    @property
    def devices(self) -> tuple[np.ndarray, ...]:
        return tuple(s.device for s in self.scenario.steps)

    @property
    def tracked(self) -> bool:
        return self.scenario.track_reference

    @property
    def final(self) -> DensityState:
        return self.states[-1]

    @property
    def pure_devices(self) -> bool:
        return all(s.pure_device for s in self.scenario.steps)

    def device_labels(self, m: int | None = None) -> list[str]:
        m = self.n if m is None else m
        return [device_label(k) for k in range(1, m + 1)]

    def initial_system(self) -> DensityState:
        return self.scenario.initial


def controlled_shift(b: Basis) -> np.ndarray:
    """``sum_j [b_j] (x) Shift^j`` on system (x) device."""
    d = b.dim
    sh = shift_operator(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    power = np.eye(d, dtype=complex)
    for j in range(d):
        out += np.kron(b.projector(j), power)
        power = sh @ power
    return out


def measurement_unitary(b: Basis, slot: int, total_devices: int, cap: int = DIM_CAP) -> np.ndarray:
    """Controlled shift from ``S`` onto device ``slot`` (0-based) of ``total_devices``."""
    if not 0 <= slot < total_devices:
        raise ValueError(f"slot {slot} outside 0..{total_devices - 1}")
    d = b.dim
    dims = [d] * (1 + total_devices)
    return linalg.embed(controlled_shift(b), dims, [0, 1 + slot], cap=cap)


def measurement_isometry(b: Basis, form: str = "direct") -> np.ndarray:
    """Isometry ``S -> S (x) M`` produced by a measurement on a device in ``|0>``.

    ``direct`` is ``sum_j [b_j] (x) |j>``; ``fourier`` is the same map written
    as ``d^(-1/2) sum_k U_k (x) |q_k>`` with ``U_k = sum_j omega^(jk) [b_j]``.
    """
    d = b.dim
    v = np.zeros((d * d, d), dtype=complex)
    if form == "direct":
        for j in range(d):
            e = np.zeros((d, 1), dtype=complex)
            e[j] = 1.0
            v += np.kron(b.projector(j), e)
    elif form == "fourier":
        for k in range(d):
            v += np.kron(shift_unitary(b, k), fourier_ket(d, k).reshape(d, 1)) / np.sqrt(d)
    else:
        raise ValueError(f"unknown isometry form {form!r}")
    return v


def shift_unitary(b: Basis, k: int) -> np.ndarray:
    """``U_k = sum_j omega^(jk) [b_j]``, the k-th power of the phase operator of ``b``."""
    d = b.dim
    v = b.vectors
    return (v * omega(d) ** (np.arange(d) * k)) @ v.conj().T


def _insert_device(state: DensityState, probs: np.ndarray, m: int, cap: int) -> DensityState:
    dev = np.diag(probs).astype(complex)
    op = linalg.kron(state.op, dev, cap=cap)
    dims = state.dims + (probs.size,)
    labels = state.labels + (device_label(m),)
    if REFERENCE in state.labels:
        # keep the reference last
        r = state.labels.index(REFERENCE)
        order = [i for i in range(len(dims)) if i != r] + [r]
        op = linalg.permute_subsystems(op, dims, order)
        dims = tuple(dims[i] for i in order)
        labels = tuple(labels[i] for i in order)
    return DensityState(op, dims, labels, check=False)


def simulate(s: Scenario) -> Trajectory:
    """Run every step of the scenario and return all intermediate states."""
    if s.track_reference:
        psi = purify(s.initial, REFERENCE)
        state = psi
    else:
        state = s.initial
    states = [state]
    for m, step in enumerate(s.steps, start=1):
        state = _insert_device(state, step.device, m, s.cap)
        op = linalg.apply_local(controlled_shift(step.basis), state.op, state.dims, [0, state.index(device_label(m))])
        state = DensityState(linalg.hermitize(op), state.dims, state.labels, check=False)
        states.append(state)
    bases = [st.basis for st in s.steps]
    overlaps = tuple(overlap_c(bases[i], bases[i + 1]) for i in range(len(bases) - 1))
    return Trajectory(s, tuple(states), overlaps)


def _non_device_labels(state: DensityState) -> list[str]:
    return [x for x in state.labels if not x.startswith("M")]


def random_pauli_channel(rho, x: Basis, z: Basis, dims=None, target: int = 0) -> np.ndarray:
    """``d^-2 sum_{k,l} (sZ^k sX^l) rho (sZ^k sX^l)^dagger`` acting on subsystem ``target``."""
    rho = np.asarray(rho, dtype=complex)
    dims = (rho.shape[0],) if dims is None else tuple(dims)
    d = x.dim
    out = np.zeros_like(rho)
    for k in range(d):
        zk = shift_unitary(z, k)
        for l in range(d):
            u = zk @ shift_unitary(x, l)
            out += linalg.apply_local(u, rho, dims, [target])
    return out / d**2


def system_channel(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Reduced non-device state at t_2 and the random-Pauli-channel prediction for it.

    Both act on ``S`` (and ``Sp`` when tracked), so the pair can be compared directly.
    """
    if traj.n != 2:
        raise UnsupportedError("system_channel needs exactly two measurements")
    keep = _non_device_labels(traj.final)
    reduced = traj.final.marginal(keep).op
    start = traj.states[0]
    predicted = random_pauli_channel(start.op, traj.bases[0], traj.bases[1], start.dims, 0)
    return reduced, predicted


def complementary_channel(s: Scenario, input_state) -> DensityState:
    """Device-side output ``Tr_S rho^(n)`` for the given system input."""
    if not all(step.pure_device for step in s.steps):
        raise UnsupportedError("complementary_channel assumes devices start in |0>")
    traj = simulate(s.with_initial(input_state, track_reference=False))
    return traj.final.marginal(traj.device_labels())


def undo_kraus(b: Basis) -> list[np.ndarray]:
    """Kraus operators ``U_j^dagger (x) |0><q_j|`` on ``S (x) M`` undoing a measurement in ``b``."""
    d = b.dim
    zero = np.zeros(d, dtype=complex)
    zero[0] = 1.0
    ops = []
    for j in range(d):
        ops.append(np.kron(shift_unitary(b, j).conj().T, np.outer(zero, fourier_ket(d, j).conj())))
    return ops


def reset_last_device(traj: Trajectory) -> DensityState:
    """``rho^(n-1) (x) |0><0|`` placed in the slot of the last device."""
    prev = traj.states[-2]
    d = traj.d
    p = np.zeros(d)
    p[0] = 1.0
    return _insert_device(prev, p, traj.n, traj.scenario.cap)


def locc_undo_last(traj: Trajectory) -> tuple[DensityState, list[np.ndarray]]:
    """Measure the last device in the Fourier basis, reset it, and undo ``U_j`` on ``S``.

    Returns the post-operation state together with the Kraus operators, which act
    on ``S (x) Mn`` (system first).
    """
    if traj.n < 1:
        raise UnsupportedError("nothing to undo")
    if not traj.scenario.steps[-1].pure_device:
        raise UnsupportedError("undo construction requires the last device to start in |0>")
    kraus = undo_kraus(traj.bases[-1])
    state = traj.final
    targets = [0, state.index(device_label(traj.n))]
    out = np.zeros_like(state.op)
    for k in kraus:
        out += linalg.apply_local(k, state.op, state.dims, targets)
    return DensityState(linalg.hermitize(out), state.dims, state.labels, check=False), kraus


def undo_branches(traj: Trajectory) -> list[np.ndarray]:
    """Rescaled branch states ``d Lambda_j rho^(n) Lambda_j^dagger``."""
    state = traj.final
    targets = [0, state.index(device_label(traj.n))]
    return [traj.d * linalg.apply_local(k, state.op, state.dims, targets) for k in undo_kraus(traj.bases[-1])]


def conditional_states_given_device(traj: Trajectory, device: int) -> list[tuple[float, DensityState | None]]:
    """Standard-basis readout of device ``M<device>`` (1-based) at the final time.

    Each entry holds the outcome probability and the normalised post-measurement
    state on the remaining subsystems, or ``None`` for a zero-probability outcome.
    """
    if not 1 <= device <= traj.n:
        raise IndexError(f"device {device} outside 1..{traj.n}")
    state = traj.final
    label = device_label(device)
    idx = state.index(label)
    d = state.dims[idx]
    rest = [x for x in state.labels if x != label]
    t = state.op.reshape(state.dims + state.dims)
    n = len(state.dims)
    out = []
    for j in range(d):
        block = np.take(np.take(t, j, axis=n + idx), j, axis=idx)
        dr = int(np.prod([state.dims[i] for i in range(n) if i != idx]))
        block = block.reshape(dr, dr)
        p = float(np.real(np.trace(block)))
        if p <= 1e-15:
            out.append((max(p, 0.0), None))
            continue
        dims = [state.dims[i] for i in range(n) if i != idx]
        out.append((p, DensityState(linalg.hermitize(block / p), dims, rest, check=False)))
    return out
