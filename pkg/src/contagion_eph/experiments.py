"""End-to-end experiment scenarios with deterministic, cell-isolated seeding.

Every simulated run belongs to a *cell* (a dataset plus one parameter setting)
and draws its randomness from ``SeedSequence([master_seed, crc32(cell_id), run])``,
so results do not depend on scheduling, worker count, or which other cells
were run alongside it.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml
from scipy.stats import mannwhitneyu, spearmanr

from . import datasets as ds
from .contagion import PER_EDGE, ContagionParams, InfectedFraction, StepCap, run
from .features import CSV_COLUMNS, FeatureRow, featurize_batch
from .graph import Graph, sample_nodes
from .learn import (accuracy_with_ci, fit_forest, fit_poly, fit_tree, predict_theta,
                    r2_score, split_indices)

log = logging.getLogger(__name__)

SCENARIOS = ("distributions", "classification", "theta_regression", "q_regression",
             "partial_observation", "cross_network", "step_capped")

DEFAULT_RUNS = {
    "distributions": 200,
    "classification": 800,
    "theta_regression": 200,
    "q_regression": 200,
    "partial_observation": 200,
    "cross_network": 200,
    "step_capped": 200,
}


class ExperimentError(RuntimeError):
    pass


@dataclass
class DatasetSpec:
    name: str
    path: str
    format: str = "edge-list"


@dataclass
class ExperimentConfig:
    scenario: str = "distributions"
    datasets: list[DatasetSpec] = field(default_factory=list)
    simple_q: list[float] = field(default_factory=lambda: [0.02, 0.03, 0.04, 0.05])
    theta: list[int] = field(default_factory=lambda: [2, 3, 4, 5, 6, 7])
    complex_q: float = 0.02
    runs_per_cell: int | None = None
    seed_count: int | None = None
    infected_fraction: float = 0.85
    step_cap: int | None = None
    distribution_step_cap: int = 3
    observation_fractions: list[float] = field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8, 1.0])
    partial_tasks: list[str] = field(default_factory=lambda: ["classification", "theta", "q"])
    step_caps: list[int] = field(default_factory=lambda: [3, 5, 7, 10])
    master_seed: int = 0
    output_dir: str = "results"
    sub_threshold: str = PER_EDGE
    classifier: str = "tree"
    train_fraction: float = 0.8
    workers: int = 1
    validate: bool = True

    def __post_init__(self):
        self.datasets = [d if isinstance(d, DatasetSpec) else DatasetSpec(**d) for d in self.datasets]
        if self.scenario not in SCENARIOS:
            raise ExperimentError(f"unknown scenario {self.scenario!r}")
        for name in ("simple_q", "theta", "observation_fractions", "step_caps"):
            if not getattr(self, name):
                raise ExperimentError(f"{name} grid is empty")
        if self.runs_per_cell is not None and self.runs_per_cell < 1:
            raise ExperimentError("runs_per_cell must be >= 1")
        if self.classifier not in ("tree", "forest"):
            raise ExperimentError(f"unknown classifier {self.classifier!r}")

    @property
    def runs(self) -> int:
        return self.runs_per_cell or DEFAULT_RUNS[self.scenario]

    @property
    def termination(self):
        return StepCap(self.step_cap) if self.step_cap else InfectedFraction(self.infected_fraction)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ExperimentError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(yaml.safe_load(text) or {})

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        return cls.loads(Path(path).read_text())


# -- seeding -----------------------------------------------------------------

def derive_seed(master_seed: int, cell_id: str, run_index: int) -> int:
    ss = np.random.SeedSequence([master_seed, zlib.crc32(cell_id.encode()), run_index])
    return int(ss.generate_state(1, np.uint64)[0])


def derive_rng(master_seed: int, tag: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, tag, index))


# -- cells and execution -----------------------------------------------------

@dataclass(frozen=True)
class Cell:
    """One parameter setting on one dataset.

    ``choices`` lists alternative params; each run picks one uniformly using a
    stream separate from the simulation stream.
    """

    cell_id: str
    dataset: str
    choices: tuple[ContagionParams, ...]
    runs: int


@dataclass(frozen=True)
class Sample:
    cell_id: str
    dataset: str
    run: int
    observed: float
    row: FeatureRow

    @property
    def label(self) -> str:
        return "simple" if self.row.model == "simple" else "complex"


SAMPLE_COLUMNS = ("cell_id", "dataset", "run", "observed") + CSV_COLUMNS

_GRAPHS: dict[str, Graph] = {}


def _init_worker(graphs):
    _GRAPHS.clear()
    _GRAPHS.update(graphs)


def _run_task(task):
    cell, run_index, master_seed, observations = task
    g = _GRAPHS[cell.dataset]
    params = cell.choices[0]
    if len(cell.choices) > 1:
        pick = derive_rng(master_seed, cell.cell_id + "#choice", run_index)
        params = cell.choices[int(pick.integers(len(cell.choices)))]
    seed = derive_seed(master_seed, cell.cell_id, run_index)
    trace = run(g, params, seed)
    out = []
    for frac, nodes in observations:
        row = featurize_batch(g, [trace], None if nodes is None else nodes)[0]
        out.append(Sample(cell.cell_id, cell.dataset, run_index, frac, row))
    return out


class Runner:
    """Simulates and featurizes cells, caching samples by (cell id, observation, run).

    Because every run has its own stream, asking for more runs of a cached cell
    only simulates the missing run indices.
    """

    def __init__(self, graphs: dict[str, Graph], master_seed: int, workers: int = 1):
        self.graphs = graphs
        self.master_seed = master_seed
        self.workers = max(1, workers)
        self._cache: dict[tuple[str, float], dict[int, Sample]] = {}
        self.timings: dict[str, float] = {}

    def observation(self, dataset: str, fraction: float):
        if fraction >= 1.0:
            return None
        rng = derive_rng(self.master_seed, f"observe/{dataset}/{fraction!r}")
        return sample_nodes(self.graphs[dataset], fraction, rng)

    def _missing(self, cell: Cell, fractions) -> list[int]:
        have = [self._cache.get((cell.cell_id, f), {}) for f in fractions]
        return [r for r in range(cell.runs) if any(r not in h for h in have)]

    def samples(self, cells: Sequence[Cell], fractions: Sequence[float] = (1.0,)) -> dict:
        """Map ``(cell_id, fraction)`` to that cell's samples ordered by run."""
        obs = {d: [(f, self.observation(d, f)) for f in fractions] for d in {c.dataset for c in cells}}
        tasks = [(c, r, self.master_seed, obs[c.dataset]) for c in cells for r in self._missing(c, fractions)]
        if tasks:
            t0 = time.perf_counter()
            if self.workers == 1 or len(tasks) < 2:
                _init_worker(self.graphs)
                results = [_run_task(t) for t in tasks]
            else:
                with ProcessPoolExecutor(self.workers, initializer=_init_worker,
                                         initargs=(self.graphs,)) as pool:
                    results = list(pool.map(_run_task, tasks, chunksize=8))
            for res in results:
                for s in res:
                    self._cache.setdefault((s.cell_id, s.observed), {}).setdefault(s.run, s)
            elapsed = time.perf_counter() - t0
            self.timings[f"simulate[{len(tasks)} runs]"] = elapsed
            log.info("simulated %d runs in %.1fs", len(tasks), elapsed)
        return {(c.cell_id, f): [self._cache[c.cell_id, f][r] for r in range(c.runs)]
                for c in cells for f in fractions}


# -- result container ----------------------------------------------------------

@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(x) for x in r])
        return buf.getvalue()

    def dicts(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


@dataclass
class ScenarioResult:
    scenario: str
    config: ExperimentConfig
    tables: dict[str, Table] = field(default_factory=dict)
    texts: dict[str, str] = field(default_factory=dict)
    notes: dict[str, object] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)

    def write(self, out_dir: str | os.PathLike) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {}
        for name, table in self.tables.items():
            data = table.to_csv().encode()
            (out / f"{name}.csv").write_bytes(data)
            files[f"{name}.csv"] = git_blob_hash(data)
        for name, text in self.texts.items():
            data = text.encode()
            (out / name).write_bytes(data)
            files[name] = git_blob_hash(data)
        manifest = {
            "scenario": self.scenario,
            "config": self.config.to_dict(),
            "inputs": self.inputs,
            "outputs": files,
            "notes": self.notes,
            "timings_seconds": self.timings,
            "seeding": "SeedSequence([master_seed, crc32(cell_id), run_index])",
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
        return out


def git_blob_hash(data: bytes) -> str:
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


# -- scenario helpers ------------------------------------------------------------

def load_datasets(config: ExperimentConfig) -> tuple[dict[str, Graph], dict[str, str]]:
    if not config.datasets:
        raise ExperimentError("no datasets configured")
    graphs, hashes = {}, {}
    for spec in config.datasets:
        if spec.name in graphs:
            raise ExperimentError(f"dataset {spec.name!r} listed twice")
        path = Path(spec.path)
        if not path.exists():
            raise ExperimentError(f"dataset file not found: {path}")
        g = ds.load_graph(path, spec.format)
        if config.validate and spec.name in ds.CANONICAL:
            report = ds.validate_dataset(g, ds.CANONICAL[spec.name])
            if not report.passed:
                raise ExperimentError(f"dataset validation failed: {report}")
        graphs[spec.name] = g
        hashes[str(path)] = git_blob_hash(path.read_bytes())
    return graphs, hashes


def _term_token(term) -> str:
    return f"cap{term.steps}" if isinstance(term, StepCap) else f"frac{term.fraction!r}"


def _simple(config, q, term):
    return ContagionParams.simple(q, seed_count=config.seed_count, termination=term)


def _complex(config, theta, term):
    return ContagionParams.threshold(theta, config.complex_q, seed_count=config.seed_count,
                                     termination=term, sub_threshold=config.sub_threshold)


def simple_cell(config, dataset, q, term, runs) -> Cell:
    return Cell(f"{dataset}/{_term_token(term)}/simple/q={q!r}", dataset,
                (_simple(config, q, term),), runs)


def complex_cell(config, dataset, theta, term, runs) -> Cell:
    return Cell(f"{dataset}/{_term_token(term)}/complex/theta={theta}/q={config.complex_q!r}",
                dataset, (_complex(config, theta, term),), runs)


def simple_mix_cell(config, dataset, term, runs) -> Cell:
    qs = tuple(config.simple_q)
    return Cell(f"{dataset}/{_term_token(term)}/simple/q~" + "|".join(map(repr, qs)), dataset,
                tuple(_simple(config, q, term) for q in qs), runs)


def complex_mix_cell(config, dataset, term, runs) -> Cell:
    th = tuple(config.theta)
    return Cell(f"{dataset}/{_term_token(term)}/complex/theta~" + "|".join(map(str, th)) + f"/q={config.complex_q!r}",
                dataset, tuple(_complex(config, t, term) for t in th), runs)


def _sample_table(samples: Sequence[Sample]) -> Table:
    t = Table(SAMPLE_COLUMNS)
    for s in samples:
        r = s.row
        t.rows.append((s.cell_id, s.dataset, s.run, s.observed, r.model, r.q, r.theta, r.seed,
                       r.steps_run, r.infected_fraction, r.eph, r.eph_pair_count, r.baseline_corr))
    return t


def _classify(config, train: Sequence[Sample], test: Sequence[Sample], feature: str, tag: str):
    x_tr = np.array([getattr(s.row, feature) for s in train])
    y_tr = np.array([s.label for s in train])
    x_te = np.array([getattr(s.row, feature) for s in test])
    y_te = [s.label for s in test]
    if config.classifier == "forest":
        model = fit_forest(x_tr, y_tr, derive_rng(config.master_seed, "forest/" + tag))
    else:
        model = fit_tree(x_tr, y_tr)
    pred = list(model.predict(x_te))
    return model, pred, y_te


def _split(config, samples: Sequence[Sample], tag: str, labels=None):
    rng = derive_rng(config.master_seed, "split/" + tag)
    labels = [s.label for s in samples] if labels is None else labels
    tr, te = split_indices(len(samples), config.train_fraction, rng, labels)
    return [samples[i] for i in tr], [samples[i] for i in te]


CLASSIFICATION_COLUMNS = ("dataset", "task", "observed", "feature", "classifier", "n_train", "n_test",
                          "accuracy", "ci_low", "ci_high", "train_cells", "test_cells")


def _classification_rows(config, dataset, task, observed, train, test, tag, confusion=None):
    rows = []
    for feature in ("eph", "baseline_corr"):
        _, pred, truth = _classify(config, train, test, feature, f"{tag}/{feature}")
        acc, lo, hi = accuracy_with_ci(pred, truth)
        rows.append((dataset, task, observed, "eph" if feature == "eph" else "baseline",
                     config.classifier, len(train), len(test), acc, lo, hi,
                     ";".join(sorted({s.cell_id for s in train})),
                     ";".join(sorted({s.cell_id for s in test}))))
        if confusion is not None:
            for t_lab in ("simple", "complex"):
                for p_lab in ("simple", "complex"):
                    n = sum(1 for p, t in zip(pred, truth) if p == p_lab and t == t_lab)
                    confusion.rows.append((dataset, task, observed, rows[-1][3], t_lab, p_lab, n))
    return rows


# -- scenarios ---------------------------------------------------------------------

def run_distributions(config: ExperimentConfig, runner: Runner | None = None) -> ScenarioResult:
    runner, res = _setup(config, runner)
    terms = [config.termination, StepCap(config.distribution_step_cap)]
    summary = Table(("cell_id", "dataset", "termination", "model", "q", "theta", "runs",
                     "mean_eph", "median_eph", "std_eph", "mean_pair_count", "mean_steps"))
    trends = Table(("dataset", "termination", "family", "cell_low", "cell_high", "mean_low",
                    "mean_high", "alternative", "p_value"))
    all_samples = []
    for name in (d.name for d in config.datasets):
        for term in terms:
            s_cells = [simple_cell(config, name, q, term, config.runs) for q in config.simple_q]
            c_cells = [complex_cell(config, name, t, term, config.runs) for t in config.theta]
            got = runner.samples(s_cells + c_cells)
            for c in s_cells + c_cells:
                rows = got[c.cell_id, 1.0]
                all_samples += rows
                eph = np.array([s.row.eph for s in rows])
                p = c.choices[0]
                summary.rows.append((c.cell_id, name, _term_token(term), p.model, p.q, float(p.theta),
                                     len(rows), eph.mean(), float(np.median(eph)), eph.std(),
                                     np.mean([s.row.eph_pair_count for s in rows]),
                                     np.mean([s.row.steps_run for s in rows])))
            # complex: EPH rises with theta; simple: EPH falls as q rises
            for family, cells, alt in (("theta", c_cells, "less"), ("q", s_cells, "greater")):
                for a, b in zip(cells, cells[1:]):
                    ea = [s.row.eph for s in got[a.cell_id, 1.0]]
                    eb = [s.row.eph for s in got[b.cell_id, 1.0]]
                    p = mannwhitneyu(ea, eb, alternative=alt).pvalue if len(ea) > 1 else math.nan
                    trends.rows.append((name, _term_token(term), family, a.cell_id, b.cell_id,
                                        float(np.mean(ea)), float(np.mean(eb)), alt, float(p)))
    res.tables.update(features=_sample_table(all_samples), summary=summary, trends=trends)
    return _finish(res, runner)


def run_classification(config: ExperimentConfig, runner: Runner | None = None) -> ScenarioResult:
    runner, res = _setup(config, runner)
    term = config.termination
    metrics = Table(CLASSIFICATION_COLUMNS)
    confusion = Table(("dataset", "task", "observed", "feature", "true", "predicted", "count"))
    all_samples = []
    for name in (d.name for d in config.datasets):
        simple = simple_mix_cell(config, name, term, config.runs)
        per_theta = [complex_cell(config, name, t, term, config.runs) for t in config.theta]
        pooled = complex_mix_cell(config, name, term, config.runs)
        got = runner.samples([simple, *per_theta, pooled])
        s_rows = got[simple.cell_id, 1.0]
        all_samples += s_rows
        for c in per_theta + [pooled]:
            c_rows = got[c.cell_id, 1.0]
            all_samples += c_rows
            data = s_rows + c_rows
            task = "pooled" if c is pooled else f"theta={c.choices[0].theta}"
            train, test = _split(config, data, f"{name}/{task}")
            metrics.rows += _classification_rows(config, name, task, 1.0, train, test,
                                                 f"{name}/{task}", confusion if c is pooled else None)
    res.tables.update(features=_sample_table(all_samples), classification=metrics, confusion=confusion)
    res.notes["pooled_theta_mix"] = f"uniform over {config.theta}"
    res.notes["simple_q_mix"] = f"uniform over {config.simple_q}"
    return _finish(res, runner)


THETA_COLUMNS = ("dataset", "observed", "subset", "n_test", "exact_rate", "within1_rate",
                 "beyond1_rate", "r2_raw", "r2_rounded")


def _theta_fit(config, name, observed, rows, metrics, predictions, models, tag):
    thetas = sorted({int(s.row.theta) for s in rows})
    if len(thetas) < 2:
        raise ExperimentError("theta regression needs at least two threshold values")
    train, test = _split(config, rows, tag, labels=[int(s.row.theta) for s in rows])
    model = fit_poly([s.row.eph for s in train], [s.row.theta for s in train], 2)
    models[f"theta_model_{name}_obs{observed!r}.txt"] = model.dumps()
    x = np.array([s.row.eph for s in test])
    y = np.array([int(s.row.theta) for s in test])
    raw = model.predict(x)
    pred = predict_theta(model, x, min(thetas), max(thetas))
    if predictions is not None:
        for s, r, p in zip(test, raw, pred):
            predictions.rows.append((s.cell_id, s.run, observed, s.row.eph, int(s.row.theta), float(r), int(p)))
    subsets = [("all", np.ones(len(y), bool))]
    if max(thetas) > 5 and min(thetas) <= 5:
        subsets.append(("theta<=5", y <= 5))
    subsets += [(f"theta={t}", y == t) for t in thetas]
    for label, m in subsets:
        err = np.abs(pred[m] - y[m])
        r2r = r2_score(raw[m], y[m]) if len(set(y[m])) > 1 else math.nan
        r2p = r2_score(pred[m], y[m]) if len(set(y[m])) > 1 else math.nan
        metrics.rows.append((name, observed, label, int(m.sum()), float((err == 0).mean()),
                             float((err <= 1).mean()), float((err > 1).mean()), r2r, r2p))


def run_theta_regression(config: ExperimentConfig, runner: Runner | None = None) -> ScenarioResult:
    runner, res = _setup(config, runner)
    if len(set(config.theta)) < 2:
        raise ExperimentError("theta regression needs at least two threshold values")
    metrics = Table(THETA_COLUMNS)
    preds = Table(("cell_id", "run", "observed", "eph", "theta", "raw_prediction", "prediction"))
    all_samples = []
    for name in (d.name for d in config.datasets):
        cells = [complex_cell(config, name, t, config.termination, config.runs) for t in config.theta]
        got = runner.samples(cells)
        rows = [s for c in cells for s in got[c.cell_id, 1.0]]
        all_samples += rows
        _theta_fit(config, name, 1.0, rows, metrics, preds, res.texts, f"{name}/theta")
    res.tables.update(features=_sample_table(all_samples), theta_regression=metrics, theta_predictions=preds)
    return _finish(res, runner)


Q_COLUMNS = ("dataset", "observed", "n_test", "r2", "residual_mean", "residual_std",
             "fitted_monotone_decreasing")


def _q_fit(config, name, observed, rows, metrics, residuals, curve, models, tag):
    qs = sorted({s.row.q for s in rows})
    if len(qs) < 2:
        raise ExperimentError("q regression needs at least two transmission probabilities")
    train, test = _split(config, rows, tag, labels=[s.row.q for s in rows])
    model = fit_poly([s.row.eph for s in train], [s.row.q for s in train], 3)
    models[f"q_model_{name}_obs{observed!r}.txt"] = model.dumps()
    x = np.array([s.row.eph for s in test])
    y = np.array([s.row.q for s in test])
    pred = model.predict(x)
    resid = y - pred
    grid = np.linspace(min(s.row.eph for s in rows), max(s.row.eph for s in rows), 50)
    fitted = model.predict(grid)
    if curve is not None:
        curve.rows += [(name, observed, float(a), float(b)) for a, b in zip(grid, fitted)]
    if residuals is not None:
        residuals.rows += [(s.cell_id, s.run, observed, s.row.eph, s.row.q, float(p), float(r))
                           for s, p, r in zip(test, pred, resid)]
    monotone = bool((np.diff(fitted) <= 1e-12).all())
    metrics.rows.append((name, observed, len(test), r2_score(pred, y), float(resid.mean()),
                         float(resid.std()), monotone))


def run_q_regression(config: ExperimentConfig, runner: Runner | None = None) -> ScenarioResult:
    runner, res = _setup(config, runner)
    if len(set(config.simple_q)) < 2:
        raise ExperimentError("q regression needs at least two transmission probabilities")
    metrics = Table(Q_COLUMNS)
    residuals = Table(("cell_id", "run", "observed", "eph", "q", "prediction", "residual"))
    curve = Table(("dataset", "observed", "eph", "fitted_q"))
    all_samples = []
    for name in (d.name for d in config.datasets):
        cells = [simple_cell(config, name, q, config.termination, config.runs) for q in config.simple_q]
        got = runner.samples(cells)
        rows = [s for c in cells for s in got[c.cell_id, 1.0]]
        all_samples += rows
        _q_fit(config, name, 1.0, rows, metrics, residuals, curve, res.texts, f"{name}/q")
    res.tables.update(features=_sample_table(all_samples), q_regression=metrics,
                      q_residuals=residuals, q_curve=curve)
    return _finish(res, runner)


def run_partial_observation(config: ExperimentConfig, runner: Runner | None = None) -> ScenarioResult:
    runner, res = _setup(config, runner)
    term = config.termination
    fracs = sorted(config.observation_fractions)
    cls_table = Table(CLASSIFICATION_COLUMNS)
    theta_table = Table(THETA_COLUMNS)
    q_table = Table(Q_COLUMNS)
    trend = Table(("dataset", "metric", "spearman_vs_fraction"))
    all_samples = []
    for name in (d.name for d in config.datasets):
        if "classification" in config.partial_tasks:
            simple = simple_mix_cell(config, name, term, config.runs)
            pooled = complex_mix_cell(config, name, term, config.runs)
            got = runner.samples([simple, pooled], fracs)
            accs = []
            for f in fracs:
                data = got[simple.cell_id, f] + got[pooled.cell_id, f]
                all_samples += data
                train, test = _split(config, data, f"{name}/pooled")
                rows = _classification_rows(config, name, "pooled", f, train, test, f"{name}/pooled")
                cls_table.rows += rows
                accs.append(rows[0][7])
            trend.rows.append((name, "accuracy", _spearman(fracs, accs)))
        if "theta" in config.partial_tasks:
            cells = [complex_cell(config, name, t, term, config.runs) for t in config.theta]
            got = runner.samples(cells, fracs)
            for f in fracs:
                rows = [s for c in cells for s in got[c.cell_id, f]]
                all_samples += rows
                _theta_fit(config, name, f, rows, theta_table, None, res.texts, f"{name}/theta")
            r2s = [r[7] for r in theta_table.rows if r[0] == name and r[2] == "all"]
            trend.rows.append((name, "theta_r2", _spearman(fracs, r2s)))
        if "q" in config.partial_tasks:
            cells = [simple_cell(config, name, q, term, config.runs) for q in config.simple_q]
            got = runner.samples(cells, fracs)
            for f in fracs:
                rows = [s for c in cells for s in got[c.cell_id, f]]
                all_samples += rows
                _q_fit(config, name, f, rows, q_table, None, None, res.texts, f"{name}/q")
            r2s = [r[3] for r in q_table.rows if r[0] == name]
            trend.rows.append((name, "q_r2", _spearman(fracs, r2s)))
    res.tables.update(features=_sample_table(all_samples), classification=cls_table,
                      theta_regression=theta_table, q_regression=q_table, trend=trend)
    res.notes["observation_sets"] = "one uniform node sample per (dataset, fraction), shared by all runs"
    return _finish(res, runner)


def _spearman(x, y) -> float:
    if len(x) < 2 or np.ptp(y) == 0:
        return math.nan
    return float(spearmanr(x, y).statistic)


def run_cross_network(config: ExperimentConfig, runner: Runner | None = None) -> ScenarioResult:
    names = [d.name for d in config.datasets]
    paths = [os.path.realpath(d.path) for d in config.datasets]
    if len(set(names)) != len(names) or len(set(paths)) != len(paths):
        raise ExperimentError("cross-network evaluation needs distinct datasets (train and test overlap)")
    if len(names) < 2:
        raise ExperimentError("cross-network evaluation needs at least two datasets")
    runner, res = _setup(config, runner)
    term = config.termination
    metrics = Table(CLASSIFICATION_COLUMNS)
    per_ds = {}
    for name in (d.name for d in config.datasets):
        cells = [simple_mix_cell(config, name, term, config.runs), complex_mix_cell(config, name, term, config.runs)]
        got = runner.samples(cells)
        per_ds[name] = [s for c in cells for s in got[c.cell_id, 1.0]]
    for held in names:
        train = [s for n in names if n != held for s in per_ds[n]]
        test = per_ds[held]
        metrics.rows += _classification_rows(config, held, f"held_out={held}", 1.0, train, test,
                                             f"cross/{held}")
    res.tables.update(features=_sample_table([s for n in names for s in per_ds[n]]),
                      cross_network=metrics)
    return _finish(res, runner)


def run_step_capped(config: ExperimentConfig, runner: Runner | None = None) -> ScenarioResult:
    runner, res = _setup(config, runner)
    metrics = Table(CLASSIFICATION_COLUMNS)
    all_samples = []
    terms = [StepCap(k) for k in sorted(config.step_caps)] + [config.termination]
    for name in (d.name for d in config.datasets):
        for term in terms:
            cells = [simple_mix_cell(config, name, term, config.runs),
                     complex_mix_cell(config, name, term, config.runs)]
            got = runner.samples(cells)
            data = got[cells[0].cell_id, 1.0] + got[cells[1].cell_id, 1.0]
            all_samples += data
            task = _term_token(term)
            train, test = _split(config, data, f"{name}/pooled")
            metrics.rows += _classification_rows(config, name, task, 1.0, train, test, f"{name}/{task}")
    res.tables.update(features=_sample_table(all_samples), step_capped=metrics)
    return _finish(res, runner)


def _setup(config, runner):
    res = ScenarioResult(config.scenario, config)
    if runner is None:
        graphs, hashes = load_datasets(config)
        runner = Runner(graphs, config.master_seed, config.workers)
        res.inputs = hashes
    missing = [d.name for d in config.datasets if d.name not in runner.graphs]
    if missing or runner.master_seed != config.master_seed:
        raise ExperimentError(f"runner does not match config (missing datasets {missing} or different seed)")
    runner.timings.clear()
    res.timings["start"] = time.perf_counter()
    return runner, res


def _finish(res, runner):
    res.timings = {"wall": time.perf_counter() - res.timings["start"], **runner.timings}
    return res


RUNNERS = {
    "distributions": run_distributions,
    "classification": run_classification,
    "theta_regression": run_theta_regression,
    "q_regression": run_q_regression,
    "partial_observation": run_partial_observation,
    "cross_network": run_cross_network,
    "step_capped": run_step_capped,
}


def run_scenario(config: ExperimentConfig, runner: Runner | None = None) -> ScenarioResult:
    return RUNNERS[config.scenario](config, runner)
