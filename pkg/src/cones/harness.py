"""Run loop, per-step records, parameter sweeps, and serialized outputs."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .algorithms import JUMP, Policy, make_policy
from .errors import DegenerateFit
from .instances import Instance
from .solvers import minimize_over


@dataclass
class StepRecord:
    t: int
    x: np.ndarray
    f_x: float
    v_t: float
    move_inc: float
    move_cum: float
    F_t: float
    regret_cum: float
    kind: str
    phase: int


@dataclass
class Trace:
    records: list[StepRecord]
    jump_times: list[int]
    instance_meta: dict
    policy_name: str
    adversary_report: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return len(self.records)

    def final(self) -> StepRecord:
        return self.records[-1]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def run(policy: Policy, instance: Instance) -> Trace:
    """Drive one policy over one instance; adaptive feeds see each action
    only after it is played."""
    feed = instance.start_feed()
    policy.start(instance.x0)
    records: list[StepRecord] = []
    x_prev = instance.x0
    F = 0.0
    move_cum = 0.0
    for t in range(1, instance.T + 1):
        S = feed.reveal(t, x_prev)
        f = instance.objective_at(t)
        outcome = policy.step(t, f, S)
        x = outcome.action
        if not S.contains(x, 10.0 * S.feas_tol()):
            raise RuntimeError(
                f"policy {policy.name!r} produced an infeasible action at t={t}: {x}"
            )
        v_t = outcome.diagnostics.get("v_t")
        if v_t is None:
            v_t = minimize_over(f, S).value
        f_x = f.eval(x)
        move_inc = float(np.linalg.norm(x - x_prev))
        move_cum += move_inc
        F += f_x
        records.append(
            StepRecord(
                t=t,
                x=np.array(x, dtype=float),
                f_x=f_x,
                v_t=float(v_t),
                move_inc=move_inc,
                move_cum=move_cum,
                F_t=F,
                regret_cum=F - t * float(v_t),
                kind=outcome.kind,
                phase=int(outcome.diagnostics.get("phase", 0)),
            )
        )
        feed.observe(t, x)
        x_prev = x
    return Trace(
        records=records,
        jump_times=list(getattr(policy, "jump_times", [])),
        instance_meta=dict(instance.meta, family=instance.family, T=instance.T),
        policy_name=policy.name,
        adversary_report=feed.report(),
    )


def record_oblivious(instance: Instance, policy: Policy) -> tuple[Trace, Instance]:
    """Run a policy against an adaptive instance and package the revealed set
    sequence as an oblivious instance."""
    feed = instance.start_feed()
    policy.start(instance.x0)
    x_prev = instance.x0
    for t in range(1, instance.T + 1):
        S = feed.reveal(t, x_prev)
        outcome = policy.step(t, instance.objective_at(t), S)
        feed.observe(t, outcome.action)
        x_prev = outcome.action
    recorded = Instance(
        family=instance.family + "_recorded",
        T=instance.T,
        x0=instance.x0.copy(),
        domain=instance.domain,
        objective=instance.objective,
        per_step=instance.per_step,
        sets=list(feed.revealed),
        meta=dict(instance.meta, recorded_from=instance.family, **feed.report()),
    )
    trace = Trace(
        records=[],
        jump_times=list(getattr(policy, "jump_times", [])),
        instance_meta=dict(instance.meta),
        policy_name=policy.name,
        adversary_report=feed.report(),
    )
    return trace, recorded


@dataclass
class SweepRow:
    T: int
    regret_final: float
    move_final: float
    jumps: int
    runtime_ms: float


def sweep_T(
    policy_factory,
    family: str,
    T_values: Sequence[int],
    params: Optional[dict] = None,
) -> list[SweepRow]:
    """One full run per horizon; each horizon gets its own instance."""
    from .instances import make_instance

    rows = []
    for T in T_values:
        instance = make_instance(family, int(T), params)
        policy = policy_factory(int(T)) if callable(policy_factory) else policy_factory
        t0 = time.perf_counter()
        trace = run(policy, instance)
        ms = (time.perf_counter() - t0) * 1e3
        rows.append(
            SweepRow(
                T=int(T),
                regret_final=trace.final().regret_cum,
                move_final=trace.final().move_cum,
                jumps=len(trace.jump_times),
                runtime_ms=ms,
            )
        )
    return rows


def fit_loglog_slope(rows, column: str) -> float:
    """Least-squares slope of log(column) against log(T)."""
    if hasattr(rows, "records"):
        raise DegenerateFit("expected sweep rows, got a trace")
    Ts = np.array([r.T for r in rows], dtype=float)
    ys = np.array([getattr(r, column) for r in rows], dtype=float)
    if len(rows) < 4:
        raise DegenerateFit("need at least 4 rows")
    if np.any(ys <= 0):
        raise DegenerateFit("column has nonpositive values")
    slope = np.polyfit(np.log(Ts), np.log(ys), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# serialization


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def trace_csv_rows(trace: Trace) -> tuple[list[str], list[list]]:
    d = trace.records[0].x.size if trace.records else 0
    header = (
        ["t"]
        + [f"x{i}" for i in range(d)]
        + ["f_x", "v_t", "move_inc", "move_cum", "F_t", "regret_cum", "kind", "phase"]
    )
    rows = []
    for r in trace.records:
        rows.append(
            [r.t]
            + [float(c) for c in r.x]
            + [r.f_x, r.v_t, r.move_inc, r.move_cum, r.F_t, r.regret_cum, r.kind, r.phase]
        )
    return header, rows


def sweep_csv_rows(rows: list[SweepRow]) -> tuple[list[str], list[list]]:
    header = ["T", "regret_final", "move_final", "jumps", "runtime_ms"]
    return header, [
        [r.T, r.regret_final, r.move_final, r.jumps, r.runtime_ms] for r in rows
    ]


def emit_csv(obj, path) -> Path:
    """Write a trace or sweep table as CSV with 17-significant-digit floats."""
    header, rows = (
        trace_csv_rows(obj) if isinstance(obj, Trace) else sweep_csv_rows(obj)
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(c) for c in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def emit_json(obj, path) -> Path:
    header, rows = (
        trace_csv_rows(obj) if isinstance(obj, Trace) else sweep_csv_rows(obj)
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = [dict(zip(header, row)) for row in rows]
    path.write_text(json.dumps(payload, indent=1, default=float) + "\n")
    return path
