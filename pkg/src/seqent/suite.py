"""Randomised regression campaign over every verifier.

Instances are enumerated in a fixed order (dimension-major, then trial) and
instance ``i`` draws all of its randomness from seed ``seed + i``, so the
output does not depend on how instances are spread over workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .circuit import scenario_from_bases, simulate
from .linalg import ATOL_EXACT, SLACK_TOL
from .qstate import make_basis, random_bipartite, random_density, rng_for
from .sdp import ConvergenceError

# Instances above these dimensions skip the SDP-heavy or reference-heavy checks.
MAX_TELEPORT_DIM = 3
MAX_TRACKED_MULTI_DIM = 3

TOLERANCE_KEYS = ("SLACK_TOL", "ATOL_EXACT", "SDP_SLACK_TOL")


@dataclass(frozen=True)
class Tolerances:
    slack: float = SLACK_TOL
    exact: float = ATOL_EXACT
    sdp: float = bounds.SDP_SLACK_TOL

    @classmethod
    def from_overrides(cls, overrides: dict | None) -> "Tolerances":
        overrides = dict(overrides or {})
        unknown = set(overrides) - set(TOLERANCE_KEYS)
        if unknown:
            raise ValueError(f"unknown tolerance keys {sorted(unknown)}; expected {TOLERANCE_KEYS}")
        return cls(
            float(overrides.get("SLACK_TOL", SLACK_TOL)),
            float(overrides.get("ATOL_EXACT", ATOL_EXACT)),
            float(overrides.get("SDP_SLACK_TOL", bounds.SDP_SLACK_TOL)),
        )


@dataclass(frozen=True)
class Instance:
    index: int
    d: int
    trial: int
    seed: int
    tol: Tolerances = field(default_factory=Tolerances)


def _dirichlet(rng: np.random.Generator, d: int) -> np.ndarray:
    p = rng.dirichlet(np.ones(d))
    return p / p.sum()


def instance_reports(inst: Instance) -> list[dict]:
    """Run every verifier family on one random instance and return flat records."""
    rng = rng_for(inst.seed)
    d, tol = inst.d, inst.tol
    seeds = [int(s) for s in rng.integers(0, 2**31 - 1, size=12)]
    rank = int(rng.integers(1, d + 1))
    rho0 = random_density(d, rank, seeds[0])
    x = make_basis("haar", d, seeds[1])
    z = make_basis("haar", d, seeds[2])
    w = make_basis("haar", d, seeds[3])
    out: list[tuple[str, object]] = []

    def run(family, fn):
        try:
            res = fn()
        except ConvergenceError as exc:
            rep = bounds.BoundReport(family, 0.0, 0.0, -np.inf, False, "==", 0.0, False,
                                     {"error": "sdp_convergence", "diagnostics": str(exc.diagnostics)})
            out.append((family, rep))
            return
        for rep in res if isinstance(res, tuple) else (res,):
            out.append((family, rep))

    main = simulate(scenario_from_bases(rho0, [x, z], track_reference=True))
    run("main", lambda: bounds.check_maassen_uffink(rho0, x, z, tol.slack))
    run("main", lambda: bounds.check_main_bounds(main, tol.slack, tol.exact))
    run("main", lambda: bounds.check_decoupling(main, tol.slack))
    run("main", lambda: bounds.check_efid_chain(main, tol.sdp))

    devices = [_dirichlet(rng, d), _dirichlet(rng, d)]
    mixed = simulate(scenario_from_bases(rho0, [x, z], devices=devices, track_reference=True))
    run("mixed_device", lambda: bounds.check_mixed_device(mixed, tol.slack))
    run("mixed_device", lambda: bounds.check_decoupling(mixed, tol.slack))

    comps = [random_bipartite((d, 2), seeds[4 + k], rank=int(rng.integers(1, 2 * d + 1))) for k in range(3)]
    probs = _dirichlet(rng, 3)
    run("mixture", lambda: bounds.check_mixture_lemma(comps, probs, ["A"], ["B"], tol.slack))

    if d <= MAX_TELEPORT_DIM:
        run("teleport", lambda: bounds.check_coherent_teleport(main, tol.slack, tol.sdp))
        run("teleport", lambda: bounds.check_coherent_teleport(mixed, tol.slack, tol.sdp))

    multi = simulate(scenario_from_bases(rho0, [x, z, w], track_reference=d <= MAX_TRACKED_MULTI_DIM))
    run("multistep", lambda: bounds.check_monotonicity(multi, tol.slack))
    run("multistep", lambda: bounds.check_multi_bound(multi, tol.slack, tol.sdp))
    if multi.tracked:
        run("multistep", lambda: bounds.check_decoupling(multi, tol.slack))

    records = []
    for family, rep in out:
        rec = {"instance": inst.index, "d": d, "trial": inst.trial, "seed": inst.seed, "family": family}
        rec.update(rep.as_record())
        records.append(rec)
    return records


def enumerate_instances(dims, trials: int, seed: int, tol: Tolerances | None = None) -> list[Instance]:
    tol = tol or Tolerances()
    out = []
    for d in dims:
        for t in range(trials):
            i = len(out)
            out.append(Instance(i, int(d), t, int(seed) + i, tol))
    return out


def run_suite(dims, trials: int, seed: int, tol: Tolerances | None = None, workers: int = 1) -> list[dict]:
    """All records for the campaign, in instance order regardless of ``workers``."""
    instances = enumerate_instances(dims, trials, seed, tol)
    if workers <= 1:
        chunks = [instance_reports(i) for i in instances]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(instance_reports, instances, chunksize=max(1, len(instances) // (4 * workers))))
    return [rec for chunk in chunks for rec in chunk]
