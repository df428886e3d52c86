"""Command-line harness: ``seqent verify | sweep | demo``.

Exit codes: 0 when every report holds, 1 when any fails, 2 on I/O or usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .circuit import Scenario, scenario_from_bases, simulate
from .entropy import classical_entropy, conditional_vn, entropy_of
from .linalg import DIM_CAP
from .qstate import basis_state, make_basis, maximally_mixed, random_density
from .serialize import ScenarioError, csv_text, fmt, load_scenario, record_line
from .suite import Tolerances, run_suite

SWEEP_AXES = ("theta", "dimension", "device_mixing")
DEMOS = ("prop1", "teleport", "decouple", "multistep")

# Fidelity columns need an SDP on d x d^2; above this the column is left empty.
MAX_SWEEP_SDP_DIM = 4

THETA_COLUMNS = ["theta", "d", "c", "E_coherent", "rhs_entanglement", "rhs_overlap",
                 "decoupling_lhs", "decoupling_rhs", "fidelity_lhs", "fidelity_rhs"]
MIXING_COLUMNS = ["mixing", "d", "c", "H_devices", "E_coherent", "rhs_mixed",
                  "capacity_lhs", "capacity_rhs", "fidelity_lhs", "fidelity_rhs"]


@dataclass
class RunConfig:
    seed: int = 42
    dims: list[int] = field(default_factory=lambda: [2, 3])
    trials: int = 100
    scenario_path: str | None = None
    out_path: str = "-"
    tolerances: dict = field(default_factory=dict)
    workers: int = 1

    def validate(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for d in self.dims:
            if d < 2 or d**3 > DIM_CAP:
                raise ValueError(f"dimension {d} outside the supported range")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@contextlib.contextmanager
def _open_out(path: str):
    if path in ("-", ""):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _scenario_reports(s: Scenario, tol: Tolerances) -> list[bounds.BoundReport]:
    """Every verifier whose hypotheses the user scenario meets."""
    traj = simulate(s)
    reps = []
    if traj.n == 2:
        reps.append(bounds.check_maassen_uffink(s.initial, *traj.bases, tol.slack))
        reps.append(bounds.check_mixed_device(traj, tol.slack))
        if traj.pure_devices:
            reps.extend(bounds.check_main_bounds(traj, tol.slack, tol.exact))
    if traj.n >= 2:
        if traj.tracked:
            reps.append(bounds.check_decoupling(traj, tol.slack))
        if traj.pure_devices:
            reps.append(bounds.check_monotonicity(traj, tol.slack))
            reps.append(bounds.check_multi_bound(traj, tol.slack, tol.sdp))
    return reps


def cmd_verify(config: RunConfig) -> int:
    try:
        config.validate()
        tol = Tolerances.from_overrides(config.tolerances)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    scenario = None
    if config.scenario_path:
        try:
            scenario = load_scenario(config.scenario_path)
        except (OSError, ScenarioError) as exc:
            print(f"error: cannot load scenario: {exc}", file=sys.stderr)
            return 2
    try:
        with _open_out(config.out_path) as fh:
            records = run_suite(config.dims, config.trials, config.seed, tol, config.workers)
            if scenario is not None:
                for rep in _scenario_reports(scenario, tol):
                    rec = {"instance": -1, "d": scenario.d, "trial": 0, "seed": config.seed, "family": "scenario"}
                    rec.update(rep.as_record())
                    records.append(rec)
            for rec in records:
                fh.write(record_line(rec) + "\n")
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 2
    failed = [r for r in records if not r["holds"]]
    checked = sum(1 for r in records if not r["skipped"])
    if failed:
        print(f"{len(failed)} of {checked} checks failed", file=sys.stderr)
        by_name: dict[str, int] = {}
        for r in failed:
            by_name[r["name"]] = by_name.get(r["name"], 0) + 1
        for name, count in sorted(by_name.items()):
            print(f"  {name}: {count}", file=sys.stderr)
        return 1
    print(f"all {checked} checks hold", file=sys.stderr)
    return 0


def _fidelity_pair(traj, d):
    if d > MAX_SWEEP_SDP_DIM:
        return None, None
    _, fid = bounds.check_coherent_teleport(traj)
    return fid.lhs, fid.rhs


def _pair_row(x, z, d, label):
    traj = simulate(scenario_from_bases(basis_state(d), [x, z]))
    ent, overlap, _ = bounds.check_main_bounds(traj)
    dec = bounds.check_decoupling(simulate(scenario_from_bases(maximally_mixed(d), [x, z], track_reference=True)))
    f_lhs, f_rhs = _fidelity_pair(traj, d)
    return [label, d, traj.overlaps[0], ent.lhs, ent.rhs, overlap.rhs, dec.lhs, dec.rhs, f_lhs, f_rhs]


def sweep_rows(axis: str, grid: list[float] | None, dims: list[int]) -> tuple[list[str], list[list]]:
    """Header and rows for one sweep axis (deterministic; no randomness involved)."""
    if axis == "theta":
        grid = [0.0, math.pi / 8, math.pi / 6, math.pi / 4] if grid is None else grid
        x = make_basis("standard", 2)
        return THETA_COLUMNS, [_pair_row(x, make_basis("rotation", 2, t), 2, float(t)) for t in grid]
    if axis == "dimension":
        header = THETA_COLUMNS[1:]
        rows = [_pair_row(make_basis("standard", d), make_basis("fourier", d), d, None)[1:] for d in dims]
        return header, rows
    if axis == "device_mixing":
        grid = [0.0, 0.25, 0.5, 0.75, 1.0] if grid is None else grid
        d = dims[0]
        x, z = make_basis("standard", d), make_basis("fourier", d)
        rows = []
        for lam in grid:
            if not 0.0 <= lam <= 1.0:
                raise ValueError(f"mixing parameter {lam} outside [0, 1]")
            p = np.full(d, lam / d)
            p[0] += 1.0 - lam
            traj = simulate(scenario_from_bases(basis_state(d), [x, z], devices=[p, p]))
            mixed = bounds.check_mixed_device(traj)
            cap_rep, fid_rep = bounds.check_coherent_teleport(traj) if d <= MAX_SWEEP_SDP_DIM else (None, None)
            rows.append([
                float(lam), d, traj.overlaps[0], 2 * classical_entropy(p), mixed.lhs, mixed.rhs,
                cap_rep and cap_rep.lhs, cap_rep and cap_rep.rhs, fid_rep and fid_rep.lhs, fid_rep and fid_rep.rhs,
            ])
        return MIXING_COLUMNS, rows
    raise ValueError(f"unknown sweep axis {axis!r}")


def cmd_sweep(config: RunConfig, axis: str, grid: list[float] | None = None) -> int:
    try:
        config.validate()
        header, rows = sweep_rows(axis, grid, config.dims)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        with _open_out(config.out_path) as fh:
            fh.write(csv_text(header, rows))
    except OSError as exc:
        print(f"error: cannot write csv: {exc}", file=sys.stderr)
        return 2
    return 0


def _print_report(rep: bounds.BoundReport, statement: str, out):
    status = "holds" if rep.holds else "FAILS"
    print(f"  [{status}] {statement}", file=out)
    print(f"          lhs = {fmt(rep.lhs)}   rhs = {fmt(rep.rhs)}   slack = {fmt(rep.slack)}", file=out)


def _print_entropies(traj, out):
    for m, st in enumerate(traj.states):
        s = entropy_of(st, ["S"])
        line = f"  t{m}: H(S) = {fmt(s)}"
        if m:
            devs = "M1" if m == 1 else f"M1..M{m}"
            line += f"   -H(S|{devs}) = {fmt(-conditional_vn(st, 'S', traj.device_labels(m)))}"
        print(line, file=out)


def cmd_demo(name: str, out=None) -> int:
    out = sys.stdout if out is None else out
    if name == "prop1":
        d = 3
        rho0 = random_density(d, 2, 11)
        print(f"Two mutually unbiased measurements (standard, Fourier), d = {d}, random rank-2 input.", file=out)
        traj = simulate(scenario_from_bases(rho0, [make_basis("standard", d), make_basis("fourier", d)]))
        _print_entropies(traj, out)
        rep = bounds.check_mub_factorization(rho0)
        print("Local unitary on M1 M2 factors the final state into a maximally entangled S M2 pair", file=out)
        print(f"and a copy of the input on M1; trace-distance residual = {fmt(rep.lhs)}", file=out)
        _print_report(rep, "residual <= 1e-9 (MUB factorization)", out)
        return 0 if rep.holds else 1
    if name == "teleport":
        ok = True
        for label, z in (("MUB pair", make_basis("fourier", 2)), ("theta = pi/6", make_basis("rotation", 2, math.pi / 6))):
            x = make_basis("standard", 2)
            traj = simulate(scenario_from_bases(maximally_mixed(2), [x, z], track_reference=True))
            cap, fid = bounds.check_coherent_teleport(traj)
            print(f"Coherent teleportation into the devices, {label} (c = {fmt(traj.overlaps[0])}):", file=out)
            _print_report(cap, "coherent information of S -> M1 M2 >= log2(1/c)", out)
            _print_report(fid, "best recovery entanglement fidelity >= 1/(d c)", out)
            ok = ok and cap.holds and fid.holds
        return 0 if ok else 1
    if name == "decouple":
        ok = True
        for label, z in (("MUB pair", make_basis("fourier", 2)), ("theta = pi/6", make_basis("rotation", 2, math.pi / 6))):
            x = make_basis("standard", 2)
            traj = simulate(scenario_from_bases(maximally_mixed(2), [x, z], track_reference=True))
            rep = bounds.check_decoupling(traj)
            print(f"Decoupling of S from a reference Sp, {label}: D = {fmt(rep.lhs)}", file=out)
            _print_report(rep, "D(rho_{S Sp} || 1/d (x) rho_Sp) <= log2(d c)", out)
            ok = ok and rep.holds
        return 0 if ok else 1
    if name == "multistep":
        bases = [make_basis("rotation", 2, t) for t in (0.0, math.pi / 8, math.pi / 5)]
        traj = simulate(scenario_from_bases(basis_state(2), bases))
        print("Three qubit measurements at angles 0, pi/8, pi/5 on |0>:", file=out)
        _print_entropies(traj, out)
        mono = bounds.check_monotonicity(traj)
        multi = bounds.check_multi_bound(traj)
        print("  entanglement sequence: " + ", ".join(fmt(v) for v in mono.meta["sequence"]), file=out)
        _print_report(mono, "entanglement never decreases with another measurement", out)
        _print_report(multi, "final entanglement >= max_m log2(1/c_{m,m+1})", out)
        return 0 if mono.holds and multi.holds else 1
    print(f"error: unknown demo {name!r}; choose from {', '.join(DEMOS)}", file=sys.stderr)
    return 2


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _tolerance(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("tolerance overrides look like KEY=VALUE")
    return key.strip(), float(value)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seqent", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--dims", type=_int_list, default=[2, 3], help="comma-separated dimensions")
        sp.add_argument("--out", default="-", help="output file, '-' for stdout")

    v = sub.add_parser("verify", help="run the randomised verification campaign")
    common(v)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--tolerance", type=_tolerance, action="append", default=[], metavar="KEY=VALUE")
    v.add_argument("--scenario", default=None, help="scenario JSON to verify in addition")

    s = sub.add_parser("sweep", help="tabulate quantities along one parameter axis")
    common(s)
    s.add_argument("--axis", choices=SWEEP_AXES, required=True)
    s.add_argument("--grid", type=_float_list, default=None, help="comma-separated grid values")

    d = sub.add_parser("demo", help="narrated single-instance walkthrough")
    d.add_argument("name", choices=DEMOS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "demo":
        return cmd_demo(args.name)
    config = RunConfig(seed=args.seed, dims=args.dims, out_path=args.out)
    if args.command == "verify":
        config.trials = args.trials
        config.workers = args.workers
        config.tolerances = dict(args.tolerance)
        config.scenario_path = args.scenario
        return cmd_verify(config)
    return cmd_sweep(config, args.axis, args.grid)


if __name__ == "__main__":
    sys.exit(main())
