"""Real- and imaginary-time evolution restricted to order-M sequential circuits.

Every step applies a Trotter step to the current circuit state, holds the
result as an MPS, and compresses it back into the circuit by overlap
maximization warm-started from the current gates.  The product of the
per-step fidelities is the accumulated error estimate.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from cqc import mps
from cqc.circuit import SequentialCircuit, circuit_to_mps
from cqc.model import IMAGINARY_TIME, REAL_TIME, X, Z, IsingParams, TrotterStep, trotter_step
from cqc.sweep import SweepAccelerator, SweepConfig, maximize_overlap
from cqc.tensor_core import DEFAULT_CUTOFF

REAL = "real"
IMAGINARY = "imaginary"


@dataclass(frozen=True)
class EvolutionConfig:
    """Inputs of a restricted evolution.

    Attributes:
        params: Hamiltonian parameters.
        order: Circuit order ``M``.
        dt: Time step (first imaginary step when no schedule is given).
        t_end: Final time.  For imaginary time it caps the time spent at each
            step size, so ``inf`` means "until converged".
        kind: ``"real"`` or ``"imaginary"``.
        trotter_order: 2 or 4.
        sweep: Stopping rules of each compression.
        dt_schedule: Strictly decreasing step sizes (imaginary time only).
        per_gate: Compress after every Trotter gate instead of every step.
        energy_tol: Per-step energy change ending an imaginary-time level.
        patience: Consecutive steps below ``energy_tol`` needed to end a level.
        accelerate: Anderson history depth across imaginary-time steps
            (0 disables).  The step map is treated as a fixed-point iteration
            and an extrapolated circuit is accepted only if it lowers the
            energy, so the fixed point is unchanged.
        increase_tol: Energy increase per step that is flagged.
        keep_circuits: Store the circuit after every step in the report.
    """

    params: IsingParams
    order: int
    dt: float
    t_end: float
    kind: str = REAL
    trotter_order: int = 2
    sweep: SweepConfig = field(default_factory=SweepConfig)
    dt_schedule: tuple[float, ...] | None = None
    per_gate: bool = False
    energy_tol: float = 1e-10
    patience: int = 3
    accelerate: int = 0
    increase_tol: float = 1e-9
    keep_circuits: bool = False

    def __post_init__(self):
        if self.kind not in (REAL, IMAGINARY):
            raise ValueError(f"kind must be {REAL!r} or {IMAGINARY!r}, got {self.kind!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.order < 1:
            raise ValueError("circuit order must be >= 1")
        if self.patience < 1 or self.accelerate < 0:
            raise ValueError("patience must be >= 1 and accelerate >= 0")
        if self.accelerate and self.kind != IMAGINARY:
            raise ValueError("accelerate is only meaningful for imaginary time")
        if self.dt_schedule is not None:
            if self.kind != IMAGINARY:
                raise ValueError("dt_schedule is only meaningful for imaginary time")
            sched = tuple(float(x) for x in self.dt_schedule)
            if not sched or any(x <= 0 for x in sched) or any(b >= a for a, b in zip(sched, sched[1:])):
                raise ValueError("dt_schedule must be positive and strictly decreasing")
            object.__setattr__(self, "dt_schedule", sched)

    @property
    def schedule(self) -> tuple[float, ...]:
        return self.dt_schedule if self.dt_schedule else (self.dt,)

    @property
    def target_chi(self) -> int:
        return 2 ** (self.order + 2)


@dataclass
class EvolutionReport:
    """Time series of one restricted evolution; entry 0 is the initial state."""

    times: list[float] = field(default_factory=list)
    dts: list[float] = field(default_factory=list)
    fidelities: list[float] = field(default_factory=list)
    accumulated: list[float] = field(default_factory=list)
    sz: list[np.ndarray] = field(default_factory=list)
    sx: list[np.ndarray] = field(default_factory=list)
    entropy: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    sweeps: list[int] = field(default_factory=list)
    truncation: list[float] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    circuits: list[SequentialCircuit] = field(default_factory=list)

    @property
    def final_accumulated(self) -> float:
        return self.accumulated[-1]

    def central(self, name: str = "sz") -> np.ndarray:
        """Series of a local observable on the central site."""
        data = np.asarray(getattr(self, name))
        return data[:, data.shape[1] // 2]

    def rows(self) -> list[dict]:
        out = []
        for k, t in enumerate(self.times):
            row = {
                "t": t,
                "dt": self.dts[k],
                "fidelity": self.fidelities[k],
                "accumulated": self.accumulated[k],
                "energy": self.energies[k],
                "entropy": self.entropy[k],
                "sweeps": self.sweeps[k],
                "truncation": self.truncation[k],
            }
            for j, v in enumerate(self.sz[k], start=1):
                row[f"sz_{j}"] = float(v)
            for j, v in enumerate(self.sx[k], start=1):
                row[f"sx_{j}"] = float(v)
            out.append(row)
        return out

    def to_csv(self, path: str | Path) -> None:
        rows = self.rows()
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            for r in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})

    def to_dict(self) -> dict:
        return {
            "times": self.times,
            "dts": self.dts,
            "fidelities": self.fidelities,
            "accumulated": self.accumulated,
            "energies": self.energies,
            "entropy": self.entropy,
            "sweeps": self.sweeps,
            "truncation": self.truncation,
            "sz": [list(map(float, v)) for v in self.sz],
            "sx": [list(map(float, v)) for v in self.sx],
            "flags": self.flags,
        }

    def to_json(self, path: str | Path, config: EvolutionConfig | None = None) -> None:
        doc = self.to_dict()
        if config is not None:
            cfg = asdict(config)
            cfg["dt_schedule"] = list(config.dt_schedule) if config.dt_schedule else None
            doc["config"] = cfg
        Path(path).write_text(json.dumps(doc, indent=1))


def _record(rep: EvolutionReport, c: SequentialCircuit, p: IsingParams, t, dt, fid, sweeps, trunc, keep) -> float:
    state = circuit_to_mps(c)
    e = mps.energy(state, p)
    rep.times.append(float(t))
    rep.dts.append(float(dt))
    rep.fidelities.append(float(fid))
    prev = rep.accumulated[-1] if rep.accumulated else 1.0
    rep.accumulated.append(float(prev * min(fid, 1.0)))
    rep.sz.append(mps.local_expectations(state, Z))
    rep.sx.append(mps.local_expectations(state, X))
    rep.entropy.append(mps.half_chain_entropy(state))
    rep.energies.append(e)
    rep.sweeps.append(int(sweeps))
    rep.truncation.append(float(trunc))
    if keep:
        rep.circuits.append(c)
    return e


def _compress_step(c: SequentialCircuit, step: TrotterStep, cfg: EvolutionConfig):
    """One step: apply ``step`` to the circuit state and fit the circuit back.

    Returns the new circuit, the product of fidelities, the sweep count,
    the discarded weight of the target, and whether every fit converged.
    """
    renorm = step.kind == IMAGINARY_TIME
    groups = [[g] for g in step.gates] if cfg.per_gate else [list(step.gates)]
    fid, sweeps, trunc, ok = 1.0, 0, 0.0, True
    for gates in groups:
        state = circuit_to_mps(c)
        target, w = mps.apply_gates(state, gates, cfg.target_chi, DEFAULT_CUTOFF, renormalize=renorm)
        target = mps.canonicalize(target, 0)
        c, report = maximize_overlap(target, c, cfg.sweep)
        fid *= report.final_fidelity
        sweeps += report.iterations
        trunc += w
        ok = ok and report.converged_by != "max_iters"
    return c, fid, sweeps, trunc, ok


def evolve_real(cfg: EvolutionConfig, init: SequentialCircuit) -> tuple[EvolutionReport, SequentialCircuit]:
    """Real-time evolution ``exp(-iHt)`` restricted to order ``cfg.order``.

    Args:
        cfg: Run configuration with ``kind == "real"``.
        init: Initial circuit of the same order.

    Returns:
        The report (with observables at every step) and the final circuit.
    """
    if cfg.kind != REAL:
        raise ValueError("evolve_real needs kind='real'")
    _check_init(cfg, init)
    p = cfg.params
    step = trotter_step(p, cfg.dt, cfg.trotter_order, REAL_TIME)
    n_steps = int(round(cfg.t_end / cfg.dt))
    rep = EvolutionReport()
    c = init
    _record(rep, c, p, 0.0, 0.0, 1.0, 0, 0.0, cfg.keep_circuits)
    capped = 0
    for k in range(1, n_steps + 1):
        c, fid, sweeps, trunc, ok = _compress_step(c, step, cfg)
        capped += not ok
        _record(rep, c, p, k * cfg.dt, cfg.dt, fid, sweeps, trunc, cfg.keep_circuits)
    if capped:
        rep.flags.append(f"sweep limit reached in {capped} of {n_steps} steps")
    return rep, c


def evolve_imaginary(cfg: EvolutionConfig, init: SequentialCircuit) -> tuple[EvolutionReport, SequentialCircuit]:
    """Imaginary-time projection ``exp(-H tau)`` restricted to order ``cfg.order``.

    Each step size of the schedule is iterated until the energy changes by
    less than ``cfg.energy_tol`` on ``cfg.patience`` consecutive steps (or
    ``cfg.t_end`` is used up), then the next smaller step takes over.  Energy
    increases above ``cfg.increase_tol`` are flagged; they signal a step that
    is too large.
    """
    if cfg.kind != IMAGINARY:
        raise ValueError("evolve_imaginary needs kind='imaginary'")
    _check_init(cfg, init)
    p = cfg.params
    rep = EvolutionReport()
    c = init
    e = _record(rep, c, p, 0.0, 0.0, 1.0, 0, 0.0, cfg.keep_circuits)
    tau = 0.0
    capped = total = 0
    for dtau in cfg.schedule:
        step = trotter_step(p, dtau, cfg.trotter_order, IMAGINARY_TIME)
        accel = SweepAccelerator(cfg.accelerate) if cfg.accelerate else None
        max_steps = math.inf if math.isinf(cfg.t_end) else max(1, int(round(cfg.t_end / dtau)))
        k = quiet = 0
        while k < max_steps and quiet < cfg.patience:
            k += 1
            before = c.gates
            c, fid, sweeps, trunc, ok = _compress_step(c, step, cfg)
            if accel is not None:
                c = _accelerated(accel, before, c, p)
            tau += dtau
            e_new = _record(rep, c, p, tau, dtau, fid, sweeps, trunc, cfg.keep_circuits)
            capped += not ok
            total += 1
            if e_new > e + cfg.increase_tol:
                rep.flags.append(f"tau={tau:.6g}: energy rose by {e_new - e:.3e} at dtau={dtau}")
            quiet = quiet + 1 if abs(e_new - e) < cfg.energy_tol else 0
            e = e_new
    if capped:
        rep.flags.append(f"sweep limit reached in {capped} of {total} steps")
    return rep, c


def _accelerated(accel: SweepAccelerator, before: np.ndarray, c: SequentialCircuit, p: IsingParams):
    """Anderson-extrapolate the step map; keep the guess only if it lowers the energy."""
    guess = accel.propose(before, c.gates)
    if guess is None:
        return c
    cand = SequentialCircuit(c.n_sites, guess)
    if mps.energy(circuit_to_mps(cand), p) < mps.energy(circuit_to_mps(c), p):
        return cand
    accel.reset()
    return c


def estimate_error(report: EvolutionReport, threshold: float = 0.99) -> float | None:
    """First time the accumulated fidelity drops below ``threshold`` (None if never)."""
    for t, acc in zip(report.times, report.accumulated):
        if acc < threshold:
            return t
    return None


def _check_init(cfg: EvolutionConfig, init: SequentialCircuit) -> None:
    if init.n_sites != cfg.params.n_sites:
        raise ValueError(f"circuit has {init.n_sites} sites, Hamiltonian {cfg.params.n_sites}")
    if init.order != cfg.order:
        raise ValueError(f"circuit order {init.order} differs from configured order {cfg.order}")
