"""End-to-end solve and the benchmark driver."""
from __future__ import annotations

import json
import logging
import os
import statistics
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .engine import EngineConfig, EngineResult, run
from .errors import ContractViolation, TooLarge
from .generators import GeneratorSpec, generate
from .model import Allocation, Instance, Valuation, format_value
from .seeding import Seed, build_top_goods, build_weights, rank_fix, select_matching
from .verification import (
    ORACLE_LIMIT,
    BruteForceOracle,
    ContractReport,
    FairnessReport,
    _ratio,
    fairness_report,
    welfare_bound_holds,
    welfare_of,
)
from .welfare import format_p, parse_p

log = logging.getLogger(__name__)


class _Counted(Valuation):
    """Delegating valuation that counts oracle queries."""

    def __init__(self, inner: Valuation, counter: list[int]):
        self.inner = inner
        self.counter = counter
        self.kind = inner.kind

    @property
    def m(self) -> int:
        return self.inner.m

    def _evaluate(self, goods):
        self.counter[0] += 1
        return self.inner._evaluate(goods)


def _counting(instance: Instance) -> tuple[Instance, list[int]]:
    counter = [0]
    vals = tuple(_Counted(v, counter) for v in instance.valuations)
    return Instance(instance.n, instance.m, vals), counter


def oracle_call_bound(n: int, m: int, steps: int) -> int:
    """Documented ceiling on valuation queries for one solve.

    Seeding needs ``n*(m+1)`` queries.  Each engine step rebuilds the envy
    graph (``n**2``), scans candidates (``n*m``), checks extensions
    (``n*m``) and may shrink a pool claim (``n*m**2``).
    """
    return n * (m + 1) + 4 * (steps + 1) * (n + 1) ** 2 * (m + 1) ** 2


@dataclass
class RunReport:
    digest: str
    mode: str
    epsilon: Fraction
    alpha: Fraction
    p: object
    allocation: Allocation
    values: list[Fraction]
    fairness: FairnessReport
    contract: ContractReport
    seed: Seed
    engine: EngineResult
    welfare: dict = field(default_factory=dict)
    ratio: dict = field(default_factory=dict)
    bound_ok: dict = field(default_factory=dict)
    oracle_calls: int = 0
    wall_time: float = 0.0

    @property
    def overflow(self) -> bool:
        return self.engine.overflow

    @property
    def bound(self) -> Fraction:
        n = len(self.values)
        return self.alpha / (4 * (n + 1))

    def to_json(self, wall_time: bool = True) -> dict:
        out = {
            "instance": self.digest,
            "mode": self.mode,
            "epsilon": format_value(self.epsilon),
            "alpha": format_value(self.alpha),
            "p": format_p(self.p),
            "seed": self.seed.allocation.to_json(),
            "rank_fix_iterations": self.seed.iterations,
            "allocation": self.allocation.to_json(),
            "values": [format_value(v) for v in self.values],
            "fairness": self.fairness.to_json(),
            "contract": self.contract.to_json(),
            "welfare": {k: _num(v) for k, v in self.welfare.items()},
            "ratio": dict(self.ratio),
            "bound": format_value(self.bound),
            "bound_ok": dict(self.bound_ok),
            "engine": self.engine.counters(),
            "overflow": self.overflow,
            "oracle_calls": self.oracle_calls,
        }
        if wall_time:
            out["wall_time"] = self.wall_time
        return out


def _num(x):
    if isinstance(x, Fraction):
        return format_value(x)
    return float(x)


def _dump_reproducer(directory, instance, p, cfg, weights, exc) -> Path:
    directory = Path(directory or Path(tempfile.gettempdir()) / "fairdiv-repro")
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{instance.digest()}-{cfg.mode_name}-p{format_p(p).replace('/', '_')}.json"
    payload = {
        "instance": instance.to_json(),
        "p": format_p(p),
        "mode": cfg.mode_name,
        "epsilon": str(cfg.epsilon),
        "weights": None if weights is None else [str(Fraction(w)) for w in weights],
        "error": str(exc),
        "diagnostics": repr(getattr(exc, "diagnostics", None)),
    }
    path.write_text(json.dumps(payload, indent=1))
    return path


def solve(instance: Instance, p, cfg: EngineConfig | None = None, weights: Sequence | None = None,
          oracle=False, report_ps: Iterable | None = None, reproducer_dir=None) -> RunReport:
    """Seed, complete and verify one allocation.

    ``oracle`` may be ``True`` (build a brute-force oracle if the instance is
    small enough) or a ready :class:`BruteForceOracle` to reuse.  Welfare is
    reported for every ``p`` in ``report_ps`` (default: just ``p``).
    """
    cfg = cfg or EngineConfig()
    p = parse_p(p)
    ps = [p] if report_ps is None else [parse_p(q) for q in report_ps]
    t0 = time.perf_counter()
    counted, calls = _counting(instance)
    try:
        idx = build_top_goods(counted)
        W = build_weights(counted, idx, p, weights)
        start = select_matching(W, p)
        sd = rank_fix(counted, idx, start, p, W)
        result = run(counted, sd.allocation, cfg, idx)
    except ContractViolation as exc:
        exc.reproducer = _dump_reproducer(reproducer_dir, instance, p, cfg, weights, exc)
        log.error("contract violation, reproducer at %s", exc.reproducer)
        raise
    n_calls = calls[0]
    if n_calls > oracle_call_bound(instance.n, instance.m, result.steps):
        exc = ContractViolation("oracle calls exceed the documented bound",
                                {"calls": n_calls, "steps": result.steps})
        exc.reproducer = _dump_reproducer(reproducer_dir, instance, p, cfg, weights, exc)
        raise exc

    Z = result.allocation
    report = RunReport(
        digest=instance.digest(),
        mode=cfg.mode_name,
        epsilon=cfg.epsilon,
        alpha=cfg.alpha,
        p=p,
        allocation=Z,
        values=Z.values(instance),
        fairness=fairness_report(instance, Z, cfg.alpha),
        contract=result.contract,
        seed=sd,
        engine=result,
        oracle_calls=n_calls,
    )
    if oracle is True:
        try:
            oracle = BruteForceOracle(instance)
        except TooLarge:
            oracle = None
    for q in ps:
        key = format_p(q)
        report.welfare[key] = welfare_of(instance, Z, q, weights)
        if oracle:
            best = oracle.best(q, weights)
            report.ratio[key] = _ratio(report.welfare[key], best.best_welfare)
            report.bound_ok[key] = welfare_bound_holds(report.values, best.best_values, q,
                                                       report.bound, weights)
    report.wall_time = time.perf_counter() - t0
    return report


# --------------------------------------------------------------------------
# bench


def _bench_one(args):
    spec, ps, cfgs, limit = args
    instance = generate(spec)
    rows = []
    oracle = None
    if instance.n ** instance.m <= limit:
        oracle = BruteForceOracle(instance, limit)
    for cfg in cfgs:
        for p in ps:
            row = {"family": spec.family, "n": spec.n, "m": spec.m, "seed": spec.seed,
                   "mode": cfg.mode_name, "epsilon": str(cfg.epsilon), "p": format_p(p)}
            try:
                rep = solve(instance, p, cfg, oracle=oracle or False)
            except Exception as exc:  # partial results: log and keep going
                log.warning("bench run failed: %s %s", row, exc)
                row["error"] = f"{type(exc).__name__}: {exc}"
                rows.append(row)
                continue
            row.update({
                "contract_ok": rep.contract.ok,
                "ef1": rep.fairness.ef1,
                "alpha_efx": rep.fairness.alpha_efx,
                "exact_efx": rep.fairness.exact_efx,
                "overflow": rep.overflow,
                "steps": rep.engine.steps,
                "ratio": rep.ratio.get(format_p(p)),
                "bound_ok": rep.bound_ok.get(format_p(p)),
                "wall_time": rep.wall_time,
            })
            rows.append(row)
    return rows


def bench(specs: Sequence[GeneratorSpec], p_list: Sequence, modes: Sequence[EngineConfig],
          trials: int = 1, workers: int = 1, limit: int = ORACLE_LIMIT):
    """Run every spec for ``trials`` consecutive seeds; returns ``(rows, table)``.

    ``table`` aggregates rows per (family, mode, epsilon, p).
    """
    ps = [parse_p(p) for p in p_list]
    jobs = []
    for spec in specs:
        for t in range(trials):
            s = GeneratorSpec(spec.family, spec.n, spec.m, spec.V, spec.seed + t)
            jobs.append((s, ps, list(modes), limit))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_bench_one, jobs))
    else:
        chunks = [_bench_one(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    return rows, aggregate(rows)


def aggregate(rows: Sequence[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["family"], r["mode"], r["epsilon"], r["p"]), []).append(r)
    table = []
    for (family, mode, eps, p), rs in sorted(groups.items()):
        ok = [r for r in rs if "error" not in r]
        ratios = [r["ratio"] for r in ok if r.get("ratio") is not None]
        steps = [r["steps"] for r in ok]

        def rate(key):
            return sum(1 for r in ok if r[key]) / len(ok) if ok else 0.0

        table.append({
            "family": family, "mode": mode, "epsilon": eps, "p": p,
            "runs": len(rs),
            "errors": len(rs) - len(ok),
            "contract_pass": rate("contract_ok"),
            "efx_pass": rate("alpha_efx"),
            "ef1_pass": rate("ef1"),
            "overflow_rate": rate("overflow"),
            "bound_violations": sum(1 for r in ok if r.get("bound_ok") is False),
            "min_ratio": min(ratios) if ratios else None,
            "mean_ratio": statistics.fmean(ratios) if ratios else None,
            "mean_steps": statistics.fmean(steps) if steps else None,
            "max_steps": max(steps) if steps else None,
        })
    return table


_COLUMNS = ["family", "mode", "epsilon", "p", "runs", "errors", "contract_pass", "efx_pass",
            "ef1_pass", "overflow_rate", "bound_violations", "min_ratio", "mean_ratio",
            "mean_steps", "max_steps"]


def format_table(table: Sequence[dict]) -> str:
    def cell(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.4g}"
        return str(v)

    cells = [_COLUMNS] + [[cell(r[c]) for c in _COLUMNS] for r in table]
    widths = [max(len(row[k]) for row in cells) for k in range(len(_COLUMNS))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells)


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1) // 2)
