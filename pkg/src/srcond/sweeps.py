"""Experiment runner: phase-transition sweeps and bound-verification campaigns.

A sweep walks a grid of (separation x node count x seed) cells, builds
the unit-weight block Jacobian for each generated node set, and records
the smallest singular value together with the condition proxy
n / sigma_min.  Results go to CSV with a fixed header and to a rendered
figure next to it.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import minorant, moments, torus
from .errors import ConfigError, InfeasibleError, SrcondError

CSV_HEADER = "nominal_sep_n,measured_sep,count,sigma_min,proxy,bound,runtime_ms"

_GENERATORS = ("hex", "grid", "random")


@dataclass
class SweepConfig:
    """Configuration of one sweep; JSON files mirror these field names."""

    dim: int
    bandlimit: float
    separation_grid: list
    count_grid: list
    generator: str
    seeds: list
    tau: float
    output_path: str

    def __post_init__(self):
        if self.generator not in _GENERATORS:
            raise ConfigError(f"generator must be one of {_GENERATORS}")
        if not self.separation_grid or not self.count_grid or not self.seeds:
            raise ConfigError("separation_grid, count_grid and seeds must be nonempty")
        if not self.bandlimit > 0:
            raise ConfigError("bandlimit must be positive")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.tau < 0:
            raise ConfigError("tau must be nonnegative")
        n_index = len(moments.index_set(self.dim, self.bandlimit))
        worst = (self.dim + 1) * max(self.count_grid)
        if n_index < worst:
            raise ConfigError(
                f"infeasible shape: |I|={n_index} < (d+1) max(count)={worst}"
            )

    @classmethod
    def from_json(cls, doc) -> "SweepConfig":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            return cls(
                dim=int(doc["dim"]),
                bandlimit=float(doc["bandlimit"]),
                separation_grid=[float(v) for v in doc["separation_grid"]],
                count_grid=[int(v) for v in doc["count_grid"]],
                generator=str(doc["generator"]),
                seeds=[int(v) for v in doc["seeds"]],
                tau=float(doc["tau"]),
                output_path=str(doc["output_path"]),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config field: {exc}") from exc

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "bandlimit": self.bandlimit,
            "separation_grid": list(self.separation_grid),
            "count_grid": list(self.count_grid),
            "generator": self.generator,
            "seeds": list(self.seeds),
            "tau": self.tau,
            "output_path": self.output_path,
        }


@dataclass
class SweepRow:
    nominal_sep_n: float
    measured_sep: float
    count: int
    sigma_min: float
    proxy: float
    bound: float
    runtime_ms: float
    skip_reason: str | None = field(default=None, compare=False)

    def values(self) -> tuple:
        return (self.nominal_sep_n, self.measured_sep, self.count,
                self.sigma_min, self.proxy, self.bound, self.runtime_ms)


@dataclass
class SweepResult:
    dim: int
    bandlimit: float
    rows: list

    def __eq__(self, other):
        # NaN-aware: two results are equal when they serialize identically
        if not isinstance(other, SweepResult):
            return NotImplemented
        mine = [tuple(_fmt(v) for v in r.values()) for r in self.rows]
        theirs = [tuple(_fmt(v) for v in r.values()) for r in other.rows]
        return (self.dim == other.dim and self.bandlimit == other.bandlimit
                and mine == theirs)


def _generate(config: SweepConfig, sep_n: float, count: int, seed: int) -> torus.NodeSet:
    n = config.bandlimit
    if config.generator == "hex":
        if config.dim != 2:
            raise InfeasibleError("hex generator needs dim=2")
        return torus.gen_hex_lattice(sep_n / n, count)
    if config.generator == "grid":
        # the grid realizes the nearest achievable separation; the
        # requested count is advisory for this generator
        per_axis = max(1, round(n / sep_n))
        return torus.gen_grid(config.dim, per_axis)
    return torus.gen_random_separated(config.dim, sep_n / n, count, seed)


def _run_cell(config: SweepConfig, I: moments.FrequencyIndexSet, bound_value,
              q_tau, sep_n: float, count: int, seed: int) -> SweepRow:
    n = config.bandlimit
    start = time.perf_counter()
    try:
        nodes = _generate(config, sep_n, count, seed)
        measured = torus.separation(nodes) if len(nodes) >= 2 else math.nan
        G = moments.block_jacobian(nodes, moments.unit_weights(len(nodes)), I).matrix
        smin = moments.sigma_min(G)
    except SrcondError as exc:
        ms = 1000.0 * (time.perf_counter() - start)
        return SweepRow(sep_n, math.nan, count, math.nan, math.nan, math.nan,
                        ms, skip_reason=str(exc))
    proxy = math.inf if smin == 0.0 else n / smin
    bound = math.nan
    if bound_value is not None and measured == measured and measured * n >= q_tau:
        bound = bound_value
    ms = 1000.0 * (time.perf_counter() - start)
    return SweepRow(sep_n, measured, len(nodes), smin, proxy, bound, ms)


def run_sweep(config: SweepConfig, max_workers: int = 4) -> SweepResult:
    """Run every (separation, count, seed) cell; never aborts on one cell.

    Cells are independent and execute on a bounded thread pool; rows come
    back ordered by grid index regardless of completion order.  Skipped
    cells keep their row with NaN metrics and carry the reason.
    """
    I = moments.index_set(config.dim, config.bandlimit)
    bound_value = None
    q_tau = math.inf
    if config.tau > 0 and config.dim in (1, 2, 3):
        model = minorant.MinorantModel.build(config.dim, config.tau)
        bound_value = minorant.prop_bound(model, config.bandlimit).value
        q_tau = model.support_radius
    cells = [
        (sep_n, count, seed)
        for sep_n in config.separation_grid
        for count in config.count_grid
        for seed in config.seeds
    ]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(
            lambda c: _run_cell(config, I, bound_value, q_tau, *c), cells
        ))
    return SweepResult(dim=config.dim, bandlimit=config.bandlimit, rows=rows)


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.17g}"


def emit_csv(result: SweepResult, path) -> None:
    """Fixed-header CSV; identical results serialize byte-identically.

    The runtime_ms column is wall-clock measurement and is the one column
    outside the determinism contract.
    """
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in result.rows:
            fh.write(",".join(_fmt(v) for v in row.values()) + "\n")


def parse_csv(path, dim: int = 0, bandlimit: float = 0.0) -> SweepResult:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ConfigError(f"unexpected CSV header: {header}")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != 7:
                raise ConfigError(f"malformed CSV row: {line.strip()}")
            rows.append(SweepRow(
                nominal_sep_n=float(parts[0]), measured_sep=float(parts[1]),
                count=int(parts[2]), sigma_min=float(parts[3]),
                proxy=float(parts[4]), bound=float(parts[5]),
                runtime_ms=float(parts[6]),
            ))
    return SweepResult(dim=dim, bandlimit=bandlimit, rows=rows)


def emit_plot(result: SweepResult, path) -> None:
    """Render the sweep: a heatmap of log10 proxy over (sep n, count),
    or a line plot when either axis is a single value.  SVG output is
    static markup."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    seps = sorted({row.nominal_sep_n for row in result.rows})
    counts = sorted({row.count for row in result.rows})
    agg: dict = {}
    for row in result.rows:
        agg.setdefault((row.nominal_sep_n, row.count), []).append(row.proxy)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if len(seps) >= 2 and len(counts) >= 2:
        img = np.full((len(counts), len(seps)), np.nan)
        for (s, c), vals in agg.items():
            finite = [v for v in vals if math.isfinite(v)]
            if finite:
                img[counts.index(c), seps.index(s)] = math.log10(np.mean(finite))
        mesh = ax.pcolormesh(seps, counts, img, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="log10 condition proxy")
        ax.set_ylabel("node count")
    else:
        xs = seps if len(seps) >= 2 else counts
        key = (lambda s: (s, counts[0])) if len(seps) >= 2 else (lambda c: (seps[0], c))
        ys = []
        for x in xs:
            vals = [v for v in agg.get(key(x), []) if math.isfinite(v)]
            ys.append(np.mean(vals) if vals else np.nan)
        ax.plot(xs, ys, "o-")
        ax.set_yscale("log")
        ax.set_ylabel("condition proxy")
        if len(seps) < 2:
            ax.set_xlabel("node count")
    if len(seps) >= 2:
        ax.set_xlabel("separation x bandlimit")
    ax.set_title(f"d={result.dim}, n={result.bandlimit:g}")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


@dataclass
class CampaignEntry:
    bandlimit: float
    trials: int
    passes: int
    bound_value: float
    min_ratio: float
    min_sigma2_over_nd: float
    violations: list

    def to_json(self) -> dict:
        return {
            "bandlimit": self.bandlimit,
            "trials": self.trials,
            "passes": self.passes,
            "bound_value": self.bound_value,
            "min_ratio": self.min_ratio,
            "min_sigma2_over_nd": self.min_sigma2_over_nd,
            "violations": self.violations,
        }


@dataclass
class CampaignReport:
    dim: int
    tau: float
    entries: list
    passed: bool
    envelope: float  # smallest sigma_min^2 / n^d seen anywhere

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "tau": self.tau,
            "passed": self.passed,
            "envelope": self.envelope,
            "entries": [e.to_json() for e in self.entries],
        }


def _ball_volume(d: int, radius: float) -> float:
    return math.pi ** (d / 2.0) * radius**d / math.gamma(d / 2.0 + 1.0)


def run_bound_campaign(dim: int, tau: float, n_grid, trials: int, seed: int,
                       count: int | None = None) -> CampaignReport:
    """Random instances at the critical separation against the lower bound.

    For each n, draws `trials` random node sets with separation at least
    support_radius / n and checks sigma_min^2 of the unit-weight block
    Jacobian against the bound.  Also reports sigma_min^2 / n^d so the
    n-independence of the floor is visible across the grid.
    """
    if tau <= 0:
        raise ConfigError("tau must be positive")
    model = minorant.MinorantModel.build(dim, tau)
    rng = np.random.default_rng(seed)
    entries = []
    envelope = math.inf
    for n in n_grid:
        report = minorant.prop_bound(model, n)
        q = report.min_separation
        if count is None:
            cap = int(0.45 / _ball_volume(dim, q / 2.0))
            n_index = len(moments.index_set(dim, n))
            cells = max(2, min(6, cap, n_index // (dim + 1)))
        else:
            cells = count
        I = moments.index_set(dim, n)
        passes = 0
        min_ratio = math.inf
        min_rel = math.inf
        violations = []
        for t in range(trials):
            nodes = torus.gen_random_separated(dim, q, cells, int(rng.integers(2**62)))
            G = moments.block_jacobian(nodes, moments.unit_weights(cells), I).matrix
            s2 = moments.sigma_min(G) ** 2
            ratio = s2 / report.value
            min_ratio = min(min_ratio, ratio)
            min_rel = min(min_rel, s2 / n**dim)
            if s2 >= report.value * (1.0 - 1e-6):
                passes += 1
            else:
                violations.append({
                    "trial": t, "sigma_min_sq": s2, "bound": report.value,
                    "nodes": nodes.to_json(),
                })
        envelope = min(envelope, min_rel)
        entries.append(CampaignEntry(
            bandlimit=float(n), trials=trials, passes=passes,
            bound_value=report.value, min_ratio=min_ratio,
            min_sigma2_over_nd=min_rel, violations=violations,
        ))
    passed = all(e.passes == e.trials for e in entries)
    return CampaignReport(dim=dim, tau=tau, entries=entries, passed=passed,
                          envelope=envelope)
