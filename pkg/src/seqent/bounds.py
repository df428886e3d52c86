"""Numerical verifiers for the entanglement, decoupling and teleportation bounds.

Every verifier returns one or more :class:`BoundReport` records. A report
stores the two sides of an inequality and a ``slack`` oriented so that the
inequality holds exactly when ``slack >= -tol``:

* ``>=``: slack = lhs - rhs
* ``<=``: slack = rhs - lhs
* ``==``: slack = -|lhs - rhs|
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .circuit import (
    REFERENCE,
    SYSTEM,
    Scenario,
    Trajectory,
    UnsupportedError,
    conditional_states_given_device,
    locc_undo_last,
    reset_last_device,
    simulate,
    undo_branches,
)
from .entropy import (
    classical_entropy,
    conditional_vn,
    dephase,
    entropy_of,
    hmax_conditional,
    hmin_conditional,
    pinsker_bound,
    relative_entropy,
)
from .linalg import ATOL_EXACT, SLACK_TOL
from .qstate import Basis, DensityState, is_mub, make_basis, maximally_mixed, overlap_c, overlap_matrix

# Budget for comparisons in which an SDP optimum enters.
SDP_SLACK_TOL = 1e-5


class PreconditionError(ValueError):
    """The inputs do not satisfy the hypotheses of the statement being checked."""


@dataclass
class BoundReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    holds: bool
    direction: str = ">="
    tol: float = SLACK_TOL
    skipped: bool = False
    meta: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "holds": self.holds,
            "direction": self.direction,
            "tol": self.tol,
            "skipped": self.skipped,
            "meta": self.meta,
        }


def make_report(name, lhs, rhs, direction=">=", tol=SLACK_TOL, meta=None, extra_ok=True) -> BoundReport:
    lhs, rhs = float(lhs), float(rhs)
    if direction == ">=":
        slack = lhs - rhs
    elif direction == "<=":
        slack = rhs - lhs
    elif direction == "==":
        slack = -abs(lhs - rhs)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if math.isnan(slack):
        # inf - inf; only an exact tie of infinities counts as holding
        slack = 0.0 if lhs == rhs else -math.inf
    holds = bool(slack >= -tol) and bool(extra_ok)
    return BoundReport(name, lhs, rhs, float(slack), holds, direction, tol, False, dict(meta or {}))


def skipped_report(name: str, reason: str) -> BoundReport:
    return BoundReport(name, 0.0, 0.0, 0.0, True, "==", 0.0, True, {"reason": reason})


def _log_inv(c: float) -> float:
    return float(-np.log2(c))


def _devices_entropy(traj: Trajectory) -> float:
    return sum(classical_entropy(p) for p in traj.devices)


def _require_pure_devices(traj: Trajectory, what: str):
    if not traj.pure_devices:
        raise UnsupportedError(f"{what} assumes every device starts in |0>")


def entanglement_coherent(traj: Trajectory) -> float:
    """``-H(S | M1 ... Mn)`` at the final time (signed, not floored)."""
    if traj.n < 1:
        raise UnsupportedError("need at least one measurement")
    return -conditional_vn(traj.final, SYSTEM, traj.device_labels())


def entanglement_sequence(traj: Trajectory) -> list[float]:
    """``-H(S | M1 ... Mm)`` evaluated on ``rho^(m)`` for m = 1 ... n."""
    return [-conditional_vn(traj.states[m], SYSTEM, traj.device_labels(m)) for m in range(1, traj.n + 1)]


def check_maassen_uffink(rho, x: Basis, z: Basis, tol: float = SLACK_TOL) -> BoundReport:
    """``H(X) + H(Z) >= log2(1/c)`` for a single-system state."""
    op = rho.op if isinstance(rho, DensityState) else np.asarray(rho, dtype=complex)
    hx = classical_entropy(x.probabilities(op) / np.sum(x.probabilities(op)))
    hz = classical_entropy(z.probabilities(op) / np.sum(z.probabilities(op)))
    c = overlap_c(x, z)
    return make_report("maassen_uffink", hx + hz, _log_inv(c), ">=", tol, {"H_X": hx, "H_Z": hz, "c": c})


def _initial_probs(traj: Trajectory, b: Basis) -> np.ndarray:
    p = b.probabilities(traj.initial_system().op)
    return p / p.sum()


def check_main_bounds(traj: Trajectory, tol: float = SLACK_TOL,
                      identity_tol: float = ATOL_EXACT) -> tuple[BoundReport, BoundReport, BoundReport]:
    """Reports for ``E >= log2(1/c)``, the overlap-entropy refinement, and the
    quantum-memory identity at t_1.

    The identity report compares ``H(Z|Sp)`` on ``rho^(1)`` with ``E`` and also
    requires ``H(X|M1 M2) = 0`` on ``rho^(1)``; it is skipped without a
    tracked reference.
    """
    if traj.n != 2:
        raise UnsupportedError("main bounds are stated for two measurements")
    _require_pure_devices(traj, "the main bound")
    x, z = traj.bases
    c = traj.overlaps[0]
    e = entanglement_coherent(traj)
    rhs2 = _log_inv(c)
    p = _initial_probs(traj, x)
    ov = overlap_matrix(x, z)
    row_entropies = [classical_entropy(row / row.sum()) for row in ov]
    rhs4 = float(np.dot(p, row_entropies))
    meta = {"c": c, "d": traj.d, "E": e}
    ent_rep = make_report("entanglement_bound", e, rhs2, ">=", tol, meta)
    overlap_rep = make_report(
        "overlap_entropy_bound", e, rhs4, ">=", tol,
        dict(meta, p=p.tolist(), rhs_entanglement=rhs2, dominates_entanglement_bound=bool(rhs4 >= rhs2 - tol)),
        extra_ok=rhs4 >= rhs2 - tol,
    )
    if not traj.tracked:
        return ent_rep, overlap_rep, skipped_report("memory_identity", "no tracked reference")
    r1 = traj.states[1]
    h_x = conditional_vn(dephase(r1.marginal([SYSTEM, "M1"]), SYSTEM, x), SYSTEM, ["M1"])
    h_z = conditional_vn(dephase(r1.marginal([SYSTEM, REFERENCE]), SYSTEM, z), SYSTEM, [REFERENCE])
    memory_rep = make_report(
        "memory_identity", h_z, e, "==", identity_tol,
        dict(meta, H_X_given_M=h_x, H_Z_given_Sp=h_z, uncertainty_sum=h_x + h_z, rhs_entanglement=rhs2),
        extra_ok=abs(h_x) <= identity_tol and h_x + h_z >= rhs2 - tol,
    )
    return ent_rep, overlap_rep, memory_rep


def factorization_unitaries(x: Basis, z: Basis) -> tuple[np.ndarray, np.ndarray]:
    """``H_M1 = sum_j |X_j><j|`` and ``U_M1M2 = sum_j sigma^(j) (x) [j]`` with
    ``sigma^(j) = sqrt(d) sum_k <X_k|Z_j> [X_k]``."""
    d = x.dim
    h = x.vectors.copy()
    inner = x.vectors.conj().T @ z.vectors  # <X_k|Z_j>
    u = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        sig = np.sqrt(d) * (x.vectors * inner[:, j]) @ x.vectors.conj().T
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1.0
        u += np.kron(sig, e)
    return h, u


def check_mub_factorization(rho0, x: Basis | None = None, z: Basis | None = None, tol: float = ATOL_EXACT) -> BoundReport:
    """Distance between the locally rotated final state and ``[Phi]_{S M2} (x) rho0_{M1}``."""
    rho0 = rho0 if isinstance(rho0, DensityState) else DensityState(rho0, (len(rho0),), (SYSTEM,))
    d = rho0.dim
    x = make_basis("standard", d) if x is None else x
    z = make_basis("fourier", d) if z is None else z
    if not is_mub(x, z):
        raise PreconditionError("the factorization requires mutually unbiased bases")
    from .circuit import scenario_from_bases

    traj = simulate(scenario_from_bases(rho0, [x, z]))
    h, u = factorization_unitaries(x, z)
    st = traj.final
    op = linalg.apply_local(h, st.op, st.dims, [1])
    op = linalg.apply_local(u, op, st.dims, [1, 2])
    phi = np.zeros(d * d, dtype=complex)
    for j in range(d):
        e = np.zeros(d, dtype=complex)
        e[j] = 1.0
        phi += np.kron(z.ket(j), e)
    phi /= np.sqrt(d)
    # target in order (S, M2, M1), then moved to (S, M1, M2)
    target = np.kron(np.outer(phi, phi.conj()), rho0.op)
    target = linalg.permute_subsystems(target, (d, d, d), [0, 2, 1])
    dist = linalg.trace_distance(op, target)
    sig_unitary = all(
        linalg.is_unitary(np.sqrt(d) * (x.vectors * (x.vectors.conj().T @ z.vectors)[:, j]) @ x.vectors.conj().T)
        for j in range(d)
    )
    return make_report("mub_factorization", dist, 0.0, "<=", tol, {"d": d, "sigma_unitary": sig_unitary},
                       extra_ok=sig_unitary)


def _consecutive(traj: Trajectory) -> list[float]:
    if traj.n < 2:
        raise UnsupportedError("need at least two measurements")
    return list(traj.overlaps)


def check_decoupling(traj: Trajectory, tol: float = SLACK_TOL) -> BoundReport:
    """``D(rho_{S Sp} || 1/d (x) rho_Sp) <= min_m log2(d c_{m,m+1})``."""
    if not traj.tracked:
        raise PreconditionError("decoupling needs a tracked reference")
    cs = _consecutive(traj)
    d = traj.d
    ssp = traj.final.marginal([SYSTEM, REFERENCE])
    sp = ssp.marginal([REFERENCE])
    tau = np.kron(np.eye(d) / d, sp.op)
    lhs = relative_entropy(ssp, tau)
    rhs = min(float(np.log2(d * c)) for c in cs)
    pinsker = pinsker_bound(ssp.op, tau)
    identity = float(np.log2(d)) - conditional_vn(ssp, SYSTEM, REFERENCE)
    meta = {
        "d": d,
        "c": cs,
        "pinsker_lower": pinsker,
        "pinsker_holds": bool(lhs >= pinsker - tol),
        "log_d_minus_H_S_given_Sp": identity,
    }
    return make_report("decoupling", lhs, rhs, "<=", tol, meta, extra_ok=lhs >= pinsker - tol)


def check_mixture_lemma(states: Sequence[DensityState], probs, a=("A",), b=("B",),
                        tol: float = SLACK_TOL) -> BoundReport:
    """``-H(A|B)_rho >= sum_j p_j [-H(A|B)_{rho_j}] - H(p)`` for ``rho = sum_j p_j rho_j``."""
    probs = np.asarray(probs, dtype=float)
    if len(states) != len(probs) or not states:
        raise ValueError("one probability per state is required")
    first = states[0]
    if any(s.dims != first.dims or s.labels != first.labels for s in states):
        raise linalg.ShapeError("mixture components must share dims and labels")
    mix = DensityState(sum(p * s.op for p, s in zip(probs, states)), first.dims, first.labels)
    lhs = -conditional_vn(mix, a, b)
    avg = float(sum(p * -conditional_vn(s, a, b) for p, s in zip(probs, states)))
    hp = classical_entropy(probs)
    return make_report("mixture_lemma", lhs, avg - hp, ">=", tol, {"H_p": hp, "average": avg})


def check_mixed_device(traj: Trajectory, tol: float = SLACK_TOL) -> BoundReport:
    """``-H(S|M1 M2) >= log2(1/c) - [H(alpha) + H(beta)]``, compared signed."""
    if traj.n != 2:
        raise UnsupportedError("the mixed-device bound is stated for two measurements")
    c = traj.overlaps[0]
    e = entanglement_coherent(traj)
    hd = [classical_entropy(p) for p in traj.devices]
    rhs = _log_inv(c) - sum(hd)
    return make_report("mixed_device_bound", e, rhs, ">=", tol,
                       {"c": c, "H_devices": hd, "E_floor": max(0.0, e)})


def _teleport_trajectory(traj: Trajectory) -> Trajectory:
    s = traj.scenario
    return simulate(Scenario(maximally_mixed(traj.d), s.steps, True, s.cap))


def check_coherent_teleport(traj: Trajectory, tol: float = SLACK_TOL,
                            sdp_tol: float = SDP_SLACK_TOL) -> tuple[BoundReport, BoundReport]:
    """Coherent-information and recovery-fidelity bounds for the device-side channel.

    Both reports rerun the scenario's measurement steps on the maximally mixed
    input, purified onto ``Sp``. The capacity report uses
    ``H(M) - H(S M)`` (the coherent information of the channel into the
    devices); the fidelity report uses ``2^(-H_min(Sp|M)) / d`` from the SDP.
    """
    cs = _consecutive(traj)
    pure = traj.pure_devices
    if not pure and traj.n != 2:
        raise UnsupportedError("mixed-device teleportation bounds are stated for two measurements")
    t = _teleport_trajectory(traj)
    d = t.d
    dev = t.device_labels()
    st = t.final
    h_m = entropy_of(st, dev)
    h_s = entropy_of(st, [SYSTEM])
    h_sm = entropy_of(st, [SYSTEM] + dev)
    coherent = h_m - h_sm
    if pure:
        rhs_cap = max(_log_inv(c) for c in cs)
        penalty = 0.0
    else:
        penalty = _devices_entropy(t)
        rhs_cap = _log_inv(cs[0]) - penalty
    cap = make_report("capacity_bound", coherent, rhs_cap, ">=", tol,
                      {"d": d, "c": cs, "H_M": h_m, "H_S": h_s, "H_SM": h_sm, "H_devices": penalty})
    sdp = hmin_conditional(st, [REFERENCE], dev)
    hmin = sdp.hmin
    fid = 2.0 ** (-hmin) / d
    h_cond = conditional_vn(st, [REFERENCE], dev)
    chain_ok = -hmin >= -h_cond - sdp_tol
    if pure:
        rhs_fid = 1.0 / (d * min(cs))
    else:
        rhs_fid = 2.0 ** (-penalty) / (d * cs[0])
    fid_rep = make_report(
        "fidelity_bound", fid, rhs_fid, ">=", sdp_tol,
        {"d": d, "Hmin_Sp_given_M": hmin, "H_Sp_given_M": h_cond, "chain_holds": bool(chain_ok),
         "sdp_gap": sdp.gap, "sdp_feasibility": sdp.feasibility},
        extra_ok=chain_ok,
    )
    return cap, fid_rep


def check_efid_chain(traj: Trajectory, tol: float = SDP_SLACK_TOL) -> BoundReport:
    """Min/max-entropy route for two measurements.

    Checks ``H_min(Z|Sp)`` on ``rho^(1)`` against ``-H_max(S|M1 M2)`` on ``rho^(2)``
    (equality), together with ``-H_max <= -H`` and ``-H_max >= log2(1/c)``.
    """
    if traj.n != 2 or not traj.tracked:
        raise PreconditionError("needs two measurements and a tracked reference")
    _require_pure_devices(traj, "the min/max-entropy route")
    z = traj.bases[1]
    c = traj.overlaps[0]
    r1 = dephase(traj.states[1].marginal([SYSTEM, REFERENCE]), SYSTEM, z)
    hmin_z = hmin_conditional(r1, [SYSTEM], [REFERENCE]).hmin
    e_fid = -hmax_conditional(traj.final, [SYSTEM], traj.device_labels())
    e = entanglement_coherent(traj)
    ok = e_fid <= e + tol and e_fid >= _log_inv(c) - tol
    return make_report("minmax_chain", hmin_z, e_fid, "==", tol,
                       {"E_fid": e_fid, "E": e, "rhs_entanglement": _log_inv(c)}, extra_ok=ok)


def undo_diagnostics(traj: Trajectory) -> dict:
    restored, kraus = locc_undo_last(traj)
    expected = reset_last_device(traj)
    dist = linalg.trace_distance(restored.op, expected.op)
    branch = max(linalg.trace_distance(b, expected.op) for b in undo_branches(traj))
    completeness = sum(k.conj().T @ k for k in kraus)
    comp_err = float(np.max(np.abs(completeness - np.eye(completeness.shape[0]))))
    return {"restore_distance": dist, "branch_distance": branch, "kraus_completeness_error": comp_err}


def check_monotonicity(traj: Trajectory, tol: float = SLACK_TOL) -> BoundReport:
    """The sequence ``-H(S|M1..Mm)`` is non-decreasing in m.

    ``lhs`` is the smallest step of the sequence, ``rhs`` is zero. The
    constructive LOCC undo of the last measurement is checked alongside.
    """
    if traj.n < 2:
        raise UnsupportedError("need at least two measurements")
    _require_pure_devices(traj, "monotonicity")
    seq = entanglement_sequence(traj)
    steps = np.diff(seq)
    undo = undo_diagnostics(traj)
    ok = undo["restore_distance"] <= ATOL_EXACT and undo["branch_distance"] <= ATOL_EXACT
    return make_report("monotonicity", float(steps.min()), 0.0, ">=", tol,
                       dict(undo, sequence=seq), extra_ok=ok)


def check_multi_bound(traj: Trajectory, tol: float = SLACK_TOL, sdp_tol: float = SDP_SLACK_TOL) -> BoundReport:
    """``E(X^1..X^n) >= max_m log2(1/c_{m,m+1})`` for both ``-H`` and ``-H_max``."""
    cs = _consecutive(traj)
    _require_pure_devices(traj, "the multi-measurement bound")
    e = entanglement_coherent(traj)
    rhs = max(_log_inv(c) for c in cs)
    e_fid = -hmax_conditional(traj.final, [SYSTEM], traj.device_labels())
    fid_ok = e_fid >= rhs - sdp_tol and e_fid <= e + sdp_tol
    return make_report("multi_bound", e, rhs, ">=", tol, {"c": cs, "E_fid": e_fid, "E_fid_holds": bool(fid_ok)},
                       extra_ok=fid_ok)


def conditional_entanglement_average(traj: Trajectory) -> float:
    """``sum_j p_j H(rho_{S,j})`` after reading out ``M1``; the quantity behind the refinement."""
    total = 0.0
    for p, st in conditional_states_given_device(traj, 1):
        if st is not None:
            total += p * entropy_of(st, [SYSTEM])
    return total
