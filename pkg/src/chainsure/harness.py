"""Experiment harness: configs, instance generation, sweeps, CSV output.

A sweep runs one equilibrium solve per point of the Cartesian product of
the configured coordinate lists (users x externality x attacker resource x
block size) and emits one CSV row per point, deterministically ordered and
reproducible from the seed.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .demand import ExternalityGraph, check_contraction
from .equilibrium import EquilibriumReport, SolveOptions, solve_stackelberg
from .errors import ChainsureError, ConfigurationError
from .market import (
    GAMMA_FLOOR,
    InsurerStrategy,
    MarketParams,
    ProviderStrategy,
)
from .risk import RiskModel, attack_probability, premium


def _as_list(value, kind) -> list:
    if isinstance(value, (list, tuple)):
        out = [kind(v) for v in value]
    else:
        out = [kind(value)]
    if not out:
        raise ConfigurationError("sweep lists must be nonempty")
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a sweep; scalars are treated as one-point sweeps."""

    n_users: list[int] = field(default_factory=lambda: [100])
    alpha: list[float] = field(default_factory=lambda: [7e-4])
    attacker_resource: list[float] = field(default_factory=lambda: [100.0])
    tx_per_block: list[int] = field(default_factory=lambda: [100])
    blocks_per_period: float = 10.0
    compensation_rate: float = 10.0
    mining_reward: float = 10.0
    beta: float = 10.0
    price_cap: float = 1.0
    gamma_cap: float = 2.0
    g_low: float = 0.0
    g_high: float = 10.0
    seed: int = 0
    replicates: int = 1
    solve: SolveOptions = field(default_factory=SolveOptions)
    output_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_users", _as_list(self.n_users, int))
        object.__setattr__(self, "alpha", _as_list(self.alpha, float))
        object.__setattr__(self, "attacker_resource", _as_list(self.attacker_resource, float))
        object.__setattr__(self, "tx_per_block", _as_list(self.tx_per_block, int))
        if self.g_low > self.g_high:
            raise ConfigurationError(f"g_low {self.g_low} exceeds g_high {self.g_high}")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigurationError("seed must fit in an unsigned 64-bit integer")
        if self.replicates < 1:
            raise ConfigurationError("replicates must be at least 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        if "solve" in kwargs and isinstance(kwargs["solve"], dict):
            kwargs["solve"] = SolveOptions(**kwargs["solve"])
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigurationError(f"config {path} must contain a JSON object")
        return cls.from_dict(raw)

    def market_params(self, attacker_resource: float, tx_per_block: int) -> MarketParams:
        risk = RiskModel(
            blocks_per_period=self.blocks_per_period,
            tx_per_block=tx_per_block,
            compensation_rate=self.compensation_rate,
            mining_reward=self.mining_reward,
        )
        return MarketParams(
            risk=risk,
            attacker_resource=attacker_resource,
            beta=self.beta,
            price_cap=self.price_cap,
            gamma_cap=self.gamma_cap,
        )


def default_config(**overrides) -> ExperimentConfig:
    """The default coefficient set used throughout the evaluation sweeps."""
    return ExperimentConfig(**overrides)


@dataclass(frozen=True)
class SweepRow:
    """One solved sweep point; field order defines the CSV schema."""

    n_users: int
    alpha: float
    attacker_resource: float
    tx_per_block: int
    mean_price: float
    total_demand: float
    hbar_star: float
    gamma_star: float
    investment: float
    attack_prob: float
    premium: float
    profit_provider: float
    profit_insurer: float
    converged: bool
    rounds: int


def sweep_points(config: ExperimentConfig) -> list[tuple[int, float, float, int]]:
    """Deterministic row order: the Cartesian product in config-field order."""
    return list(
        itertools.product(
            config.n_users, config.alpha, config.attacker_resource, config.tx_per_block
        )
    )


def generate_instance(config: ExperimentConfig, n: int, alpha: float,
                      replicate: int = 0) -> ExternalityGraph:
    """Seeded externality matrix: off-diagonal U[g_low, g_high], zero diagonal.

    The stream is derived from (seed, n, replicate) only, so sweep points
    that differ in alpha, attacker resource, or block size share the same
    draw and stay comparable; parallel execution order cannot change it.
    """
    if n < 1:
        raise ConfigurationError(f"need at least one user, got {n}")
    seq = np.random.SeedSequence(entropy=config.seed, spawn_key=(n, replicate))
    rng = np.random.default_rng(seq)
    weights = rng.uniform(config.g_low, config.g_high, size=(n, n))
    np.fill_diagonal(weights, 0.0)
    graph = ExternalityGraph(weights=weights, alpha=alpha)
    chk = check_contraction(graph)
    if not chk.holds:
        raise ConfigurationError(
            f"externality too strong for n={n}: alpha * rho(G) = {chk.alpha_rho:.6g} >= 1"
        )
    return graph


def _default_starts(config: ExperimentConfig, n: int) -> tuple[ProviderStrategy, InsurerStrategy]:
    start_p = ProviderStrategy(
        prices=np.full(n, 0.75 * config.price_cap),
        investment_ratio=0.75,
    )
    start_i = InsurerStrategy(0.5 * (GAMMA_FLOOR + config.gamma_cap))
    return start_p, start_i


def _report_row(config: ExperimentConfig, n: int, alpha: float, a: float,
                n_t: int, report: EquilibriumReport) -> SweepRow:
    hbar = report.provider.investment_ratio
    params = config.market_params(a, n_t)
    return SweepRow(
        n_users=n,
        alpha=alpha,
        attacker_resource=a,
        tx_per_block=n_t,
        mean_price=report.provider.mean_price,
        total_demand=report.demand.total,
        hbar_star=hbar,
        gamma_star=report.insurer.gamma,
        investment=a * hbar / (1.0 - hbar),
        attack_prob=attack_probability(params.risk, hbar),
        premium=premium(params.risk, report.insurer.gamma),
        profit_provider=report.profits[0],
        profit_insurer=report.profits[1],
        converged=report.converged,
        rounds=report.rounds,
    )


def _failed_row(n: int, alpha: float, a: float, n_t: int) -> SweepRow:
    nan = float("nan")
    return SweepRow(
        n_users=n, alpha=alpha, attacker_resource=a, tx_per_block=n_t,
        mean_price=nan, total_demand=nan, hbar_star=nan, gamma_star=nan,
        investment=nan, attack_prob=nan, premium=nan,
        profit_provider=nan, profit_insurer=nan, converged=False, rounds=0,
    )


def _mean_rows(rows: Sequence[SweepRow]) -> SweepRow:
    if len(rows) == 1:
        return rows[0]
    first = rows[0]
    numeric = {
        name: float(np.mean([getattr(r, name) for r in rows]))
        for name in (
            "mean_price", "total_demand", "hbar_star", "gamma_star", "investment",
            "attack_prob", "premium", "profit_provider", "profit_insurer",
        )
    }
    return SweepRow(
        n_users=first.n_users, alpha=first.alpha,
        attacker_resource=first.attacker_resource, tx_per_block=first.tx_per_block,
        converged=all(r.converged for r in rows),
        rounds=max(r.rounds for r in rows),
        **numeric,
    )


def solve_point(config: ExperimentConfig, n: int, alpha: float, a: float,
                n_t: int) -> SweepRow:
    """Solve one sweep point (averaging over replicates when configured)."""
    replicate_rows = []
    for rep in range(config.replicates):
        try:
            graph = generate_instance(config, n, alpha, replicate=rep)
            params = config.market_params(a, n_t)
            start_p, start_i = _default_starts(config, n)
            report = solve_stackelberg(params, graph, start_p, start_i, config.solve)
            replicate_rows.append(_report_row(config, n, alpha, a, n_t, report))
        except (ChainsureError, np.linalg.LinAlgError):
            replicate_rows.append(_failed_row(n, alpha, a, n_t))
    return _mean_rows(replicate_rows)


def run_sweep(config: ExperimentConfig, threads: int = 1,
              csv_path: str | Path | None = None) -> list[SweepRow]:
    """Solve every sweep point; failures become non-converged rows.

    Rows come back in the deterministic point order regardless of thread
    count. When csv_path (or config.output_path) is set, completed rows are
    flushed to the file incrementally in order.
    """
    points = sweep_points(config)
    target = csv_path if csv_path is not None else config.output_path
    writer = _IncrementalCsv(target) if target else None
    results: dict[int, SweepRow] = {}
    try:
        if threads <= 1:
            for idx, point in enumerate(points):
                results[idx] = solve_point(config, *point)
                if writer:
                    writer.advance(results)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = {
                    pool.submit(solve_point, config, *point): idx
                    for idx, point in enumerate(points)
                }
                for future, idx in futures.items():
                    results[idx] = future.result()
                    if writer:
                        writer.advance(results)
    finally:
        if writer:
            writer.close()
    return [results[i] for i in range(len(points))]


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".12g")
    return str(value)


class _IncrementalCsv:
    """Writes rows 0, 1, 2, ... as soon as a contiguous prefix is complete."""

    def __init__(self, path: str | Path):
        try:
            self._handle = open(path, "w", encoding="utf-8", newline="")
        except OSError as exc:
            raise ConfigurationError(f"cannot write CSV {path}: {exc}") from exc
        self._writer = csv.writer(self._handle)
        self._writer.writerow([f.name for f in dataclasses.fields(SweepRow)])
        self._next = 0

    def advance(self, results: dict[int, SweepRow]) -> None:
        while self._next in results:
            row = results[self._next]
            self._writer.writerow(
                [_format_value(getattr(row, f.name)) for f in dataclasses.fields(SweepRow)]
            )
            self._handle.flush()
            self._next += 1

    def close(self) -> None:
        self._handle.close()


def emit_csv(rows: Iterable[SweepRow], path: str | Path) -> None:
    """Write rows to a UTF-8 CSV: exact field-name header, 12 significant digits."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow([f.name for f in dataclasses.fields(SweepRow)])
            for row in rows:
                writer.writerow(
                    [_format_value(getattr(row, f.name)) for f in dataclasses.fields(SweepRow)]
                )
    except OSError as exc:
        raise ConfigurationError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path: str | Path) -> list[SweepRow]:
    """Parse a file produced by emit_csv back into rows."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        rows = []
        for record in reader:
            rows.append(SweepRow(
                n_users=int(record["n_users"]),
                alpha=float(record["alpha"]),
                attacker_resource=float(record["attacker_resource"]),
                tx_per_block=int(record["tx_per_block"]),
                mean_price=float(record["mean_price"]),
                total_demand=float(record["total_demand"]),
                hbar_star=float(record["hbar_star"]),
                gamma_star=float(record["gamma_star"]),
                investment=float(record["investment"]),
                attack_prob=float(record["attack_prob"]),
                premium=float(record["premium"]),
                profit_provider=float(record["profit_provider"]),
                profit_insurer=float(record["profit_insurer"]),
                converged=record["converged"] == "true",
                rounds=int(record["rounds"]),
            ))
    return rows
