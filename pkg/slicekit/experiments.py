# slicekit/experiments.py
"""Experiment runner: landscapes, approx-error, interpolate, style-transfer and selector ablations."""
from __future__ import annotations

import json
import logging
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .cache import ReferenceCache, content_key
from .dataio import Image, load_directions, load_image, load_point_cloud, save_image
from .errors import FormatError, InvalidArgumentError
from .flows import FlowConfig, euler_flow, style_transfer
from .landscapes import Landscape, LandscapeKind, budgeted_search, landscape_constants, load_landscapes
from .methods import BO_METHODS, QSW_METHODS, FixedSelector, list_methods
from .ot1d import as_point_cloud, sw_estimate
from .qsw import make_qsw
from .results import (ResultRow, loglog_slope, plot_series, write_results_csv, write_summary_csv,
                      write_timings_csv)
from .selectors import SelectorConfig, SliceOracle, bosw
from .sphere import sample_uniform

logger = logging.getLogger(__name__)

EXPERIMENTS = ("landscapes", "approx-error", "interpolate", "style-transfer", "ablation")
# Experiments that flow one point cloud onto another
CLOUD_FLOWS = ("interpolate", "ablation")

# === Defaults per experiment ===

DEFAULT_METHODS = {
    "landscapes": ["SW", "GQSW", "EQSW", "SQSW", "DQSW", "CQSW",
                   "RGQSW", "REQSW", "RSQSW", "RDQSW", "RCQSW", "BOSW"],
    "approx-error": ["SW", "GQSW", "EQSW", "SQSW", "DQSW", "CQSW", "BOSW"],
    "interpolate": ["SW", "CQSW", "RCQSW", "BOSW", "RBOSW", "ABOSW", "ARBOSW"],
    "style-transfer": ["SW", "RCQSW", "RBOSW", "ARBOSW"],
    "ablation": ["BOSW", "RBOSW", "ABOSW", "ARBOSW"],
}
DEFAULT_SEEDS = {
    "landscapes": [0, 1, 2, 3, 4],
    "approx-error": [0, 1, 2, 3, 4],
    "interpolate": [0, 1, 2],
    "style-transfer": [0],
    "ablation": [0, 1, 2],
}
DEFAULT_GRID = {
    "landscapes": [5, 10, 15, 20],
    "approx-error": [10, 100, 1000, 10000],
}
# Sequential BO suits the tiny landscape budgets
DEFAULT_SELECTOR = {"landscapes": {"batch": 1}}
DEFAULT_PAIRS = [[0, 1], [0, 2], [1, 3], [2, 3]]
# Selector knobs varied one at a time around the defaults
DEFAULT_SWEEP = {
    "acquisition": ["UCB", "EI", "LOG_EI", "THOMPSON"],
    "beta": [0.35, 0.7, 1.4, 2.8],
    "cos_cutoff": [0.9, 0.95, 0.98, 0.99],
    "pool_size": [512, 1024, 4096, 16384],
}


@dataclass
class RunConfig:
    """Everything a run needs; ``resolved()`` fills in the experiment defaults."""
    experiment: str
    methods: list[str] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    selector: dict = field(default_factory=dict)
    flow: dict = field(default_factory=dict)
    grid: list[int] = field(default_factory=list)
    landscapes: list[str] = field(default_factory=list)
    landscape_constants: dict | None = None
    inputs: dict = field(default_factory=dict)
    synthetic: dict = field(default_factory=dict)
    output: str = "results"
    workers: int | None = None
    data_seed: int = 0
    bo_max_L: int = 1000
    scramble_method: str = "owen"
    # approx-error ground truth: {"slices": ..., "seed": ...}; unset keys come from the settings profile
    reference: dict = field(default_factory=dict)
    # ablation only: selector key -> values tried one at a time
    sweep: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        data.pop("version", None)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise InvalidArgumentError("config must name an experiment")
        return cls(**data)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"{path}: cannot read run config ({exc})") from exc
        return cls.from_dict(data)

    def resolved(self) -> "RunConfig":
        """Copy with defaults filled in and every field validated."""
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgumentError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        exp = self.experiment
        methods = [m.upper() for m in (self.methods or DEFAULT_METHODS[exp])]
        known = set(list_methods())
        bad = [m for m in methods if m not in known]
        if bad:
            raise InvalidArgumentError(f"unknown methods {bad}; see --list-methods")
        seeds = list(self.seeds or DEFAULT_SEEDS[exp])
        if not seeds:
            raise InvalidArgumentError("seed list must be nonempty")
        selector = {**DEFAULT_SELECTOR.get(exp, {}), **self.selector}
        grid = list(self.grid or DEFAULT_GRID.get(exp, []))
        if any(L < 1 for L in grid):
            raise InvalidArgumentError(f"budget grid values must be >= 1, got {grid}")
        if self.scramble_method not in ("owen", "xor"):
            raise InvalidArgumentError(f"unknown scramble method {self.scramble_method!r}")
        unknown_ref = set(self.reference) - {"slices", "seed"}
        if unknown_ref:
            raise InvalidArgumentError(f"unknown reference settings: {sorted(unknown_ref)}")
        if int(self.reference.get("slices", 1)) < 1:
            raise InvalidArgumentError(f"reference slices must be >= 1, got {self.reference['slices']}")
        landscapes = list(self.landscapes or [k.value for k in LandscapeKind])
        unknown = [name for name in landscapes if name not in {k.value for k in LandscapeKind}]
        if unknown:
            raise InvalidArgumentError(f"unknown landscapes {unknown}")
        for key, path in self.inputs.items():
            paths = path if isinstance(path, list) else [path]
            for p in paths:
                if isinstance(p, str) and not os.path.exists(p):
                    raise InvalidArgumentError(f"input {key!r} refers to missing file {p}")
        sweep = self._resolved_sweep(methods, selector)
        resolved = replace(self, methods=methods, seeds=seeds, selector=selector, grid=grid, landscapes=landscapes,
                           sweep=sweep)
        # Constructing the configs validates them
        resolved.selector_config()
        resolved.flow_config()
        return resolved

    def _resolved_sweep(self, methods: list[str], selector: dict) -> dict:
        if self.experiment != "ablation":
            if self.sweep:
                raise InvalidArgumentError(f"sweep only applies to the ablation experiment, not {self.experiment}")
            return {}
        non_bo = [m for m in methods if m not in BO_METHODS]
        if non_bo:
            raise InvalidArgumentError(f"ablation sweeps BO selector settings; {non_bo} have none")
        sweep = {key: list(values) if isinstance(values, (list, tuple)) else [values]
                 for key, values in (self.sweep or DEFAULT_SWEEP).items()}
        for key, values in sweep.items():
            if key not in SelectorConfig.__dataclass_fields__:
                raise InvalidArgumentError(f"cannot sweep unknown selector setting {key!r}")
            if not values:
                raise InvalidArgumentError(f"sweep over {key} needs at least one value")
            for value in values:
                SelectorConfig.from_dict({**selector, key: value})
        return sweep

    def pinned(self, settings) -> "RunConfig":
        """Copy with every profile-dependent value written into the config itself."""
        reference = {"slices": settings.REFERENCE_SLICES, "seed": settings.REFERENCE_SEED, **self.reference}
        flow = {"eval_slices": settings.SW_EVAL_SLICES, "eval_seed": settings.SW_EVAL_SEED, **self.flow}
        return replace(self, reference={k: int(v) for k, v in reference.items()}, flow=flow)

    def selector_config(self) -> SelectorConfig:
        return SelectorConfig.from_dict(self.selector)

    def flow_config(self) -> FlowConfig:
        flow = dict(self.flow)
        unknown = set(flow) - set(FlowConfig.__dataclass_fields__)
        if unknown:
            raise InvalidArgumentError(f"unknown flow settings: {sorted(unknown)}")
        if "checkpoints" in flow:
            flow["checkpoints"] = tuple(flow["checkpoints"])
        if self.experiment == "style-transfer":
            return FlowConfig.for_style_transfer(**flow)
        return FlowConfig(**flow)

    def to_lock(self, landscapes: dict[LandscapeKind, Landscape] | None = None) -> dict:
        """Fully resolved settings; loading the lock reproduces the run."""
        lock = {
            "version": __version__,
            "experiment": self.experiment,
            "methods": self.methods,
            "seeds": self.seeds,
            "selector": self.selector_config().to_dict(),
            "flow": self.flow_config().to_dict(),
            "grid": self.grid,
            "landscapes": self.landscapes,
            "inputs": self.inputs,
            "synthetic": self.synthetic,
            "output": self.output,
            "workers": self.workers,
            "data_seed": self.data_seed,
            "bo_max_L": self.bo_max_L,
            "scramble_method": self.scramble_method,
            "reference": self.reference,
            "sweep": self.sweep,
        }
        if landscapes is not None:
            lock["landscape_constants"] = landscape_constants(landscapes)
        return lock


def sub_run_rng(seed: int, method: str) -> np.random.Generator:
    """Generator for one (method, seed) sub-run, independent of the method list."""
    return np.random.default_rng([seed, zlib.crc32(method.encode())])


# === Synthetic fixtures ===

def gaussian_pair(rng: np.random.Generator, n: int = 512, d: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Unit Gaussian source and a shrunken, shifted Gaussian target."""
    X = rng.standard_normal((n, d))
    Y = 0.5 * rng.standard_normal((n, d)) + np.linspace(1.0, 0.5, d)
    return X, Y


def gaussian_clouds(rng: np.random.Generator, count: int = 4, n: int = 512, d: int = 3) -> list[np.ndarray]:
    """Anisotropic Gaussian clouds with different scales and offsets."""
    clouds = []
    for k in range(count):
        scales = np.linspace(1.0, 0.4 + 0.2 * k, d)
        clouds.append(rng.standard_normal((n, d)) * scales + 0.3 * k)
    return clouds


def synthetic_image_pair(size: int = 64) -> tuple[Image, Image]:
    """Grey horizontal gradient source and a two-colour (split) target."""
    ramp = np.linspace(40.0, 215.0, size)
    grey = np.repeat(np.tile(ramp, size)[:, None], 3, axis=1)
    half = np.arange(size * size) % size < size // 2
    target = np.where(half[:, None], np.array([200.0, 60.0, 40.0]), np.array([30.0, 90.0, 180.0]))
    return Image(size, size, np.rint(grey)), Image(size, size, target)


# === Runner ===

class ExperimentRunner:
    """Runs experiments with the settings and cache built by ``create_runner``."""

    def __init__(self, settings, cache: ReferenceCache):
        self.settings = settings
        self.cache = cache

    # -- inputs ------------------------------------------------------------

    def _clouds(self, cfg: RunConfig, minimum: int = 2) -> list[np.ndarray]:
        paths = cfg.inputs.get("clouds")
        if isinstance(paths, str):
            paths = [paths]
        if paths:
            if len(paths) < minimum:
                raise InvalidArgumentError(f"{cfg.experiment} needs at least {minimum} files in inputs.clouds, got {len(paths)}")
            return [load_point_cloud(p) for p in paths]
        rng = np.random.default_rng(cfg.data_seed)
        n = int(cfg.synthetic.get("n", 512))
        d = int(cfg.synthetic.get("d", 3))
        if cfg.experiment in CLOUD_FLOWS:
            return list(gaussian_pair(rng, n, d))
        return gaussian_clouds(rng, int(cfg.synthetic.get("count", 4)), n, d)

    def _images(self, cfg: RunConfig) -> tuple[Image, Image]:
        if "source" in cfg.inputs and "target" in cfg.inputs:
            return load_image(cfg.inputs["source"]), load_image(cfg.inputs["target"])
        return synthetic_image_pair(int(cfg.synthetic.get("size", 64)))

    def _selector(self, cfg: RunConfig, method: str):
        """A user direction file replaces the named method's selector."""
        if "directions" in cfg.inputs:
            return FixedSelector(load_directions(cfg.inputs["directions"]))
        return method

    def reference_sw(self, X: np.ndarray, Y: np.ndarray, slices: int | None = None, seed: int | None = None) -> float:
        """High-budget MC estimate of SW_2^2, cached by content hash."""
        slices = self.settings.REFERENCE_SLICES if slices is None else slices
        seed = self.settings.REFERENCE_SEED if seed is None else seed
        key = content_key(X, Y, slices=slices, seed=seed, p=2)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        started = time.perf_counter()
        dirs = sample_uniform(np.random.default_rng(seed), X.shape[1], slices)
        value = sw_estimate(X, Y, dirs, 2.0, chunk=self.settings.SW_CHUNK_SLICES).value
        logger.info(f"Reference SW with L={slices} computed in {time.perf_counter() - started:.2f}s")
        self.cache.put(key, value)
        return value

    # -- sub-runs ----------------------------------------------------------

    def _landscapes_run(self, cfg, method, seed, landscapes):
        rng = sub_run_rng(seed, method)
        scfg = cfg.selector_config()
        rows = []
        for name in cfg.landscapes:
            landscape = landscapes[LandscapeKind(name)]
            for L in cfg.grid:
                started = time.perf_counter()
                best = budgeted_search(method, landscape, L, rng, scfg)
                rows.append(ResultRow(f"landscapes/{name}", method, seed, L, best,
                                      time.perf_counter() - started, L))
        return rows

    def _approx_error_run(self, cfg, method, seed, clouds, pairs, references):
        rng = sub_run_rng(seed, method)
        scfg = cfg.selector_config()
        rows = []
        for (i, j), reference in zip(pairs, references):
            X, Y = clouds[i], clouds[j]
            experiment = f"approx-error/pair-{i + 1}-{j + 1}"
            for L in cfg.grid:
                started = time.perf_counter()
                evaluations = 0
                if method in BO_METHODS:
                    if L > cfg.bo_max_L:
                        logger.warning(f"{method}: skipping L={L} (above bo_max_L={cfg.bo_max_L})")
                        continue
                    oracle = SliceOracle.for_clouds(X, Y)
                    dirs = bosw(oracle, scfg.for_budget(L), rng)
                    evaluations = oracle.evaluations
                elif method == "SW":
                    dirs = sample_uniform(rng, X.shape[1], L)
                else:
                    kind, mode = QSW_METHODS[method]
                    dirs = make_qsw(kind, L, mode, rng, d=X.shape[1], scramble_method=cfg.scramble_method)
                error = abs(sw_estimate(X, Y, dirs, 2.0).value - reference)
                rows.append(ResultRow(experiment, method, seed, L, error, time.perf_counter() - started, evaluations))
        return rows

    def _flow_rows(self, experiment, method, seed, trace):
        return [ResultRow(experiment, method, seed, r.step, r.metric, r.seconds, r.evaluations)
                for r in trace.records]

    def _interpolate_run(self, cfg, method, seed, X, Y):
        rng = sub_run_rng(seed, method)
        trace = euler_flow(X, Y, self._selector(cfg, method), cfg.selector_config(), cfg.flow_config(), rng,
                           cfg.scramble_method)
        return self._flow_rows("interpolate", method, seed, trace)

    def _ablation_run(self, cfg, method, seed, key, value, X, Y):
        label = f"{method}[{key}={value}]"
        rng = sub_run_rng(seed, label)
        scfg = SelectorConfig.from_dict({**cfg.selector, key: value})
        trace = euler_flow(X, Y, method, scfg, cfg.flow_config(), rng, cfg.scramble_method)
        return self._flow_rows(f"ablation/{key}", label, seed, trace)

    def _style_run(self, cfg, method, seed, src, tgt):
        rng = sub_run_rng(seed, method)
        image, trace = style_transfer(src, tgt, self._selector(cfg, method), cfg.selector_config(),
                                      cfg.flow_config(), rng, cfg.scramble_method)
        save_image(os.path.join(cfg.output, f"style-{method}-seed{seed}.ppm"), image)
        return self._flow_rows("style-transfer", method, seed, trace)

    # -- driver ------------------------------------------------------------

    def run(self, cfg: RunConfig) -> int:
        """Executes every (method, seed) sub-run and writes the outputs; returns an exit code."""
        cfg = cfg.resolved().pinned(self.settings)
        os.makedirs(cfg.output, exist_ok=True)
        landscapes = None
        if cfg.experiment == "landscapes":
            if cfg.landscape_constants:
                landscapes = {k: Landscape(k, cfg.landscape_constants[k.value]) for k in LandscapeKind}
            else:
                landscapes = load_landscapes()
        with open(os.path.join(cfg.output, "config.lock"), "w", encoding="utf-8") as fh:
            json.dump(cfg.to_lock(landscapes), fh, indent=2, sort_keys=True)
            fh.write("\n")

        logger.info(f"Starting {cfg.experiment}: methods={cfg.methods}, seeds={cfg.seeds}")
        tasks = self._tasks(cfg, landscapes)
        workers = cfg.workers or self.settings.WORKERS
        rows: list[ResultRow] = []
        failed = 0
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            futures = [(label, pool.submit(fn)) for label, fn in tasks]
            for label, future in futures:
                try:
                    sub_rows = future.result()
                except Exception as e:
                    failed += 1
                    logger.error(f"Sub-run {label} failed: {e}")
                    continue
                rows.extend(sub_rows)
                logger.info(f"Sub-run {label} finished ({len(sub_rows)} rows)")

        self._write_outputs(cfg, rows)
        if failed:
            logger.error(f"{failed} of {len(tasks)} sub-runs failed; partial results kept in {cfg.output}")
            return 1
        logger.info(f"Finished {cfg.experiment}: {len(rows)} rows in {cfg.output}")
        return 0

    def _tasks(self, cfg: RunConfig, landscapes):
        tasks = []
        if cfg.experiment == "landscapes":
            for method in cfg.methods:
                for seed in cfg.seeds:
                    tasks.append(((method, seed), lambda m=method, s=seed: self._landscapes_run(cfg, m, s, landscapes)))
        elif cfg.experiment == "approx-error":
            clouds = [as_point_cloud(c) for c in self._clouds(cfg)]
            pairs = [tuple(p) for p in cfg.inputs.get("pairs", [])] or \
                [tuple(p) for p in DEFAULT_PAIRS if max(p) < len(clouds)] or [(0, 1)]
            for pair in pairs:
                if len(pair) != 2 or not all(0 <= k < len(clouds) for k in pair):
                    raise InvalidArgumentError(f"inputs.pairs entry {list(pair)} does not index the {len(clouds)} clouds")
            references = [self.reference_sw(clouds[i], clouds[j], cfg.reference["slices"], cfg.reference["seed"])
                          for i, j in pairs]
            for method in cfg.methods:
                for seed in cfg.seeds:
                    tasks.append(((method, seed), lambda m=method, s=seed:
                                  self._approx_error_run(cfg, m, s, clouds, pairs, references)))
        elif cfg.experiment == "interpolate":
            X, Y = (as_point_cloud(c) for c in self._clouds(cfg)[:2])
            for method in cfg.methods:
                for seed in cfg.seeds:
                    tasks.append(((method, seed), lambda m=method, s=seed: self._interpolate_run(cfg, m, s, X, Y)))
        elif cfg.experiment == "ablation":
            X, Y = (as_point_cloud(c) for c in self._clouds(cfg)[:2])
            for key, values in cfg.sweep.items():
                for value in values:
                    for method in cfg.methods:
                        for seed in cfg.seeds:
                            tasks.append(((f"{method}[{key}={value}]", seed), lambda m=method, s=seed, k=key, v=value:
                                          self._ablation_run(cfg, m, s, k, v, X, Y)))
        else:
            src, tgt = self._images(cfg)
            for method in cfg.methods:
                for seed in cfg.seeds:
                    tasks.append(((method, seed), lambda m=method, s=seed: self._style_run(cfg, m, s, src, tgt)))
        return tasks

    def _write_outputs(self, cfg: RunConfig, rows: list[ResultRow]) -> None:
        out = cfg.output
        write_results_csv(os.path.join(out, "results.csv"), rows)
        write_timings_csv(os.path.join(out, "timings.csv"), rows)
        write_summary_csv(os.path.join(out, "summary.csv"), rows)
        experiments = sorted({r.experiment for r in rows})
        for experiment in experiments:
            stem = experiment.replace("/", "-")
            if cfg.experiment == "landscapes":
                plot_series(os.path.join(out, f"{stem}.svg"), rows, experiment, "budget L", "best fitness")
            elif cfg.experiment == "approx-error":
                plot_series(os.path.join(out, f"{stem}.svg"), rows, experiment, "L", "absolute error",
                            log_x=True, log_y=True)
                self._log_slopes(rows, experiment)
            else:
                ylabel = "W2" if cfg.flow_config().eval == "exact-w2" else "SW2 (high L)"
                plot_series(os.path.join(out, f"{stem}.svg"), rows, experiment, "step", ylabel, log_y=True)

    @staticmethod
    def _log_slopes(rows: list[ResultRow], experiment: str) -> None:
        by_method: dict[str, dict[float, list[float]]] = {}
        for r in rows:
            if r.experiment == experiment:
                by_method.setdefault(r.method, {}).setdefault(r.axis, []).append(r.value)
        for method, series in sorted(by_method.items()):
            axis = sorted(series)
            means = [float(np.mean(series[a])) for a in axis]
            if len(axis) >= 2 and all(m > 0 for m in means):
                logger.info(f"{experiment} {method}: log-log slope {loglog_slope(axis, means):.3f}")


def run_experiment(cfg: RunConfig, runner: ExperimentRunner | None = None) -> int:
    """Runs ``cfg`` with a default runner unless one is given; returns the exit code."""
    if runner is None:
        from . import create_runner
        runner = create_runner()
    return runner.run(cfg)
