# slicekit/flows.py
"""Euler-discretized SW gradient flows, the exact W2 metric and colour style transfer."""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .config import Config
from .dataio import Image
from .errors import DegenerateGradientError, InvalidArgumentError, ProblemTooLargeError
from .methods import DirectionSelector, make_selector
from .ot1d import GRADIENT_MODES, GradientMode, PointCloud, as_point_cloud, sw_estimate, sw_gradient
from .selectors import SelectorConfig, SliceOracle
from .sphere import sample_uniform

logger = logging.getLogger(__name__)

EvalMode = Literal["exact-w2", "sw-highL"]
EVAL_MODES = ("exact-w2", "sw-highL")


@dataclass(frozen=True)
class FlowConfig:
    """Euler scheme settings and the evaluation protocol."""
    steps: int = 500
    step_size: float = 0.01
    L: int = 100
    p: float = 2.0
    gradient_mode: GradientMode = "sw2"
    checkpoints: tuple[int, ...] = (100, 200, 300, 400, 500)
    eval: EvalMode = "exact-w2"
    # sw-highL metric: fixed MC slice set
    eval_slices: int = Config.SW_EVAL_SLICES
    eval_seed: int = Config.SW_EVAL_SEED

    def __post_init__(self):
        object.__setattr__(self, "checkpoints", tuple(sorted(set(int(c) for c in self.checkpoints))))
        if self.steps < 1:
            raise InvalidArgumentError(f"steps must be >= 1, got {self.steps}")
        if self.step_size <= 0:
            raise InvalidArgumentError(f"step_size must be > 0, got {self.step_size}")
        if self.p != 2:
            raise InvalidArgumentError("flows are defined for p = 2 only")
        if self.gradient_mode not in GRADIENT_MODES:
            raise InvalidArgumentError(f"unknown gradient mode {self.gradient_mode!r}")
        if self.eval not in EVAL_MODES:
            raise InvalidArgumentError(f"unknown evaluation mode {self.eval!r}")
        if self.eval_slices < 1:
            raise InvalidArgumentError(f"eval_slices must be >= 1, got {self.eval_slices}")
        if any(c < 1 or c > self.steps for c in self.checkpoints):
            raise InvalidArgumentError(f"checkpoints must lie in [1, {self.steps}], got {self.checkpoints}")

    @classmethod
    def for_style_transfer(cls, **overrides) -> "FlowConfig":
        """1000 steps of size 1 on SW_2^2, SW-based evaluation (pixel clouds exceed the exact guard).

        The SW_2 gradient is normalized by SW_2, so a unit step moves pixels at most
        about one grey level (RMS) and 1000 of them do not carry the palette across.
        """
        settings = dict(steps=1000, step_size=1.0, gradient_mode="sw2-squared",
                        checkpoints=(200, 400, 600, 800, 1000), eval="sw-highL")
        settings.update(overrides)
        return cls(**settings)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["checkpoints"] = list(self.checkpoints)
        return out


@dataclass(frozen=True)
class CheckpointRecord:
    step: int
    metric: float
    seconds: float
    evaluations: int


@dataclass
class FlowTrace:
    """Checkpoint metrics plus the final cloud Z(steps)."""
    records: list[CheckpointRecord] = field(default_factory=list)
    final: PointCloud | None = None
    stopped_at: int | None = None

    def metrics(self) -> dict[int, float]:
        return {r.step: r.metric for r in self.records}


# === Metrics ===

def exact_w2(X: PointCloud, Y: PointCloud, max_points: int = Config.EXACT_W2_MAX_POINTS) -> float:
    """W2 between equal-weight clouds via an exact assignment."""
    X = as_point_cloud(X)
    Y = as_point_cloud(Y)
    if X.shape != Y.shape:
        raise InvalidArgumentError(f"clouds must have equal shapes, got {X.shape} and {Y.shape}")
    if X.shape[0] > max_points:
        raise ProblemTooLargeError(f"exact W2 is limited to {max_points} points (got {X.shape[0]}); use the sw-highL eval mode")
    cost = cdist(X, Y, metric="sqeuclidean")
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(max(np.mean(cost[rows, cols]), 0.0)))


def high_l_sw(X: PointCloud, Y: PointCloud, L: int = Config.SW_EVAL_SLICES, seed: int = Config.SW_EVAL_SEED) -> float:
    """SW_2 from a large fixed Monte Carlo slice set."""
    dirs = sample_uniform(np.random.default_rng(seed), X.shape[1], L)
    return sw_estimate(X, Y, dirs, 2.0, chunk=Config.SW_CHUNK_SLICES).distance


def _metric(Z: PointCloud, Y: PointCloud, fcfg: FlowConfig) -> float:
    if fcfg.eval == "exact-w2":
        return exact_w2(Z, Y)
    return high_l_sw(Z, Y, fcfg.eval_slices, fcfg.eval_seed)


# === Flow ===

def euler_flow(X: PointCloud, Y: PointCloud, selector: str | DirectionSelector, scfg: SelectorConfig,
               fcfg: FlowConfig, rng: np.random.Generator, scramble_method: str = "owen") -> FlowTrace:
    """Evolves Z from X toward Y along the SW gradient; metrics at the checkpoints.

    Seconds count the flow loop only (direction selection included, metric
    evaluation excluded).
    """
    X = as_point_cloud(X)
    Y = as_point_cloud(Y)
    if X.shape != Y.shape:
        raise InvalidArgumentError(f"clouds must have equal shapes, got {X.shape} and {Y.shape}")
    n, d = X.shape
    if isinstance(selector, str):
        if scfg.L != fcfg.L:
            scfg = replace(scfg, L=fcfg.L, init_size=min(scfg.init_size, fcfg.L), batch=min(scfg.batch, fcfg.L))
        selector = make_selector(selector, scfg, d, scramble_method)

    Z = X.copy()
    trace = FlowTrace()
    pending = list(fcfg.checkpoints)
    elapsed = 0.0

    for t in range(fcfg.steps):
        started = time.perf_counter()
        oracle = SliceOracle.for_clouds(Z, Y, fcfg.p)
        dirs = selector.select(t, oracle, rng)
        try:
            grad = sw_gradient(Z, Y, dirs, fcfg.gradient_mode)
        except DegenerateGradientError as exc:
            elapsed += time.perf_counter() - started
            logger.warning(f"Flow stopped at step {t}: {exc}")
            trace.stopped_at = t
            break
        Z = Z - fcfg.step_size * n * grad
        elapsed += time.perf_counter() - started

        step = t + 1
        if pending and step == pending[0]:
            pending.pop(0)
            trace.records.append(CheckpointRecord(step, _metric(Z, Y, fcfg), elapsed, selector.evaluations))

    if pending:
        # Early stop: the remaining checkpoints carry the metric of the last state
        metric = _metric(Z, Y, fcfg)
        for step in pending:
            trace.records.append(CheckpointRecord(step, metric, elapsed, selector.evaluations))
    trace.final = Z
    return trace


# === Style transfer ===

def match_pixel_count(target: PointCloud, n: int, rng: np.random.Generator) -> PointCloud:
    """Uniform random subsample (or duplication) of target rows to exactly n rows."""
    m = target.shape[0]
    if m == n:
        return target
    logger.warning(f"Resampling target pixels from {m} to {n}")
    idx = rng.choice(m, size=n, replace=m < n)
    return target[idx]


def style_transfer(src: Image, tgt: Image, selector: str | DirectionSelector, scfg: SelectorConfig,
                   fcfg: FlowConfig | None, rng: np.random.Generator, scramble_method: str = "owen") -> tuple[Image, FlowTrace]:
    """Moves the source colours toward the target palette; pixels rounded at the end."""
    fcfg = fcfg or FlowConfig.for_style_transfer()
    target = match_pixel_count(tgt.pixels, src.pixels.shape[0], rng)
    trace = euler_flow(src.pixels, target, selector, scfg, fcfg, rng, scramble_method)
    pixels = np.clip(np.rint(trace.final), 0, 255)
    return Image(src.width, src.height, pixels), trace


def histogram_tv(a: npt.NDArray[np.float64], b: npt.NDArray[np.float64]) -> float:
    """Largest per-channel total-variation distance between 256-bin histograms."""
    worst = 0.0
    for channel in range(a.shape[1]):
        ha = np.bincount(a[:, channel].astype(np.int64), minlength=256) / a.shape[0]
        hb = np.bincount(b[:, channel].astype(np.int64), minlength=256) / b.shape[0]
        worst = max(worst, 0.5 * float(np.sum(np.abs(ha - hb))))
    return worst
