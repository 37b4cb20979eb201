# slicekit/selectors.py
"""BO-driven direction selectors: BOSW, RBOSW, ABOSW and ARBOSW.

Orientation is maximization throughout: the GP models the slice cost
f(theta) = W_p^p of the projected clouds and the acquisition rewards large f.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import asdict, dataclass, replace
from typing import Callable

import numpy as np
import numpy.typing as npt

from . import gp
from .errors import InvalidArgumentError, InvalidStateError
from .gp import AcquisitionKind, GpState
from .ot1d import PointCloud, as_point_cloud, slice_costs
from .qsw import QswKind, RandomizeMode, make_qsw
from .sphere import Direction, DirectionSet, sample_uniform

logger = logging.getLogger(__name__)


class SelectorKind(enum.Enum):
    BOSW = "BOSW"
    RBOSW = "RBOSW"
    ABOSW = "ABOSW"
    ARBOSW = "ARBOSW"


# Refresh periods used when SelectorConfig.refresh_period is left unset
DEFAULT_REFRESH = {SelectorKind.RBOSW: 25, SelectorKind.ARBOSW: 100}
# Extra candidate pools ABOSW may draw when dedup leaves a batch short
REFILL_ATTEMPTS = 3
# Used when batch / init_size are left unset; clamped to L
DEFAULT_BATCH = 5
DEFAULT_INIT_SIZE = 10


@dataclass(frozen=True)
class SelectorConfig:
    """Budget and BO settings shared by every selector."""
    L: int = 100
    batch: int | None = None
    rounds: int = 2
    pool_size: int = 4096
    beta: float = 0.7
    cos_cutoff: float = 0.98
    init_size: int | None = None
    refresh_period: int | None = None
    seed_kind: QswKind = QswKind.COULOMB_OPTIMIZED
    reseed_mode: RandomizeMode = RandomizeMode.NONE
    acquisition: AcquisitionKind = AcquisitionKind.UCB
    gamma: float | None = None

    def __post_init__(self):
        if self.batch is None:
            object.__setattr__(self, "batch", min(DEFAULT_BATCH, max(self.L, 1)))
        if self.init_size is None:
            object.__setattr__(self, "init_size", min(DEFAULT_INIT_SIZE, max(self.L, 1)))
        self.validate()

    def validate(self) -> None:
        if self.L < 1:
            raise InvalidArgumentError(f"L must be >= 1, got {self.L}")
        if not 1 <= self.batch <= self.L:
            raise InvalidArgumentError(f"batch must be in [1, L={self.L}], got {self.batch}")
        if not 1 <= self.init_size <= self.L:
            raise InvalidArgumentError(f"init_size must be in [1, L={self.L}], got {self.init_size}")
        if self.rounds < 0:
            raise InvalidArgumentError(f"rounds must be >= 0, got {self.rounds}")
        if self.pool_size < self.batch:
            raise InvalidArgumentError(f"pool_size ({self.pool_size}) must be >= batch ({self.batch})")
        if not 0 < self.cos_cutoff < 1:
            raise InvalidArgumentError(f"cos_cutoff must be in (0, 1), got {self.cos_cutoff}")
        if self.refresh_period is not None and self.refresh_period < 1:
            raise InvalidArgumentError(f"refresh_period must be >= 1, got {self.refresh_period}")
        if self.beta < 0:
            raise InvalidArgumentError(f"beta must be >= 0, got {self.beta}")
        if self.gamma is not None and not 0 < self.gamma < 1:
            raise InvalidArgumentError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.reseed_mode is RandomizeMode.SCRAMBLE and not self.seed_kind.sobol_based:
            raise InvalidArgumentError(f"{self.seed_kind.name} seeds cannot be scrambled; use ROTATE")

    def refresh_for(self, kind: SelectorKind) -> int:
        if self.refresh_period is not None:
            return self.refresh_period
        return DEFAULT_REFRESH.get(kind, 1)

    def for_budget(self, L: int) -> "SelectorConfig":
        """Same settings shrunk to a small evaluation budget."""
        init = min(self.init_size, max(2, L // 4), L)
        return replace(self, L=L, init_size=init, batch=min(self.batch, L))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["seed_kind"] = self.seed_kind.name
        out["reseed_mode"] = self.reseed_mode.name
        out["acquisition"] = self.acquisition.name
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SelectorConfig":
        data = dict(data)
        for key, enum_type in (("seed_kind", QswKind), ("reseed_mode", RandomizeMode), ("acquisition", AcquisitionKind)):
            if key in data:
                try:
                    data[key] = enum_type[str(data[key]).upper()]
                except KeyError:
                    raise InvalidArgumentError(f"unknown {key} {data[key]!r}; expected one of {[e.name for e in enum_type]}") from None
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidArgumentError(f"unknown selector settings: {sorted(unknown)}")
        return cls(**data)


@dataclass
class AnnealingClock:
    """BO rounds taken over a selector's lifetime; supplies t for the annealed acquisition."""
    rounds: int = 0

    def tick(self) -> int:
        self.rounds += 1
        return self.rounds


class SliceOracle:
    """Counts every evaluation of a black-box slice objective f(theta)."""

    def __init__(self, func: Callable[[DirectionSet], npt.NDArray[np.float64]], dim: int):
        self._func = func
        self.dim = dim
        self.evaluations = 0

    @classmethod
    def for_clouds(cls, mu: PointCloud, nu: PointCloud, p: float = 2.0) -> "SliceOracle":
        """f(theta) = W_p^p between the projections of ``mu`` and ``nu``."""
        mu = as_point_cloud(mu)
        nu = as_point_cloud(nu)
        return cls(lambda dirs: slice_costs(mu, nu, dirs, p), mu.shape[1])

    @classmethod
    def for_function(cls, func: Callable[[Direction], float], dim: int) -> "SliceOracle":
        """Wraps a scalar function of one direction."""
        return cls(lambda dirs: np.array([func(row) for row in dirs], dtype=np.float64), dim)

    def __call__(self, theta: Direction) -> float:
        return float(self.evaluate_many(np.asarray(theta)[None, :])[0])

    def evaluate_many(self, dirs: DirectionSet) -> npt.NDArray[np.float64]:
        dirs = np.atleast_2d(dirs)
        if dirs.shape[0] == 0:
            return np.empty(0)
        values = np.asarray(self._func(dirs), dtype=np.float64)
        self.evaluations += dirs.shape[0]
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("slice oracle returned non-finite values")
        return values


# === Batch proposal ===

def propose_batch(state: GpState, current: DirectionSet, cfg: SelectorConfig, rng: np.random.Generator,
                  t: int = 1, b: int | None = None) -> DirectionSet:
    """Up to ``b`` new directions from a uniform candidate pool, ranked by acquisition.

    Candidates whose |cos| with the current set or an earlier pick exceeds the
    cutoff are skipped; fewer than ``b`` come back when the pool runs out.
    """
    b = cfg.batch if b is None else b
    d = state.train_dirs.shape[1]
    if b <= 0:
        return np.empty((0, d))
    pool = sample_uniform(rng, d, cfg.pool_size)
    scores = gp.acquisition_scores(state, pool, cfg.acquisition, state.best, rng, cfg.beta)

    current = np.atleast_2d(current)
    if current.shape[0]:
        allowed = np.max(np.abs(pool @ current.T), axis=1) <= cfg.cos_cutoff
    else:
        allowed = np.ones(pool.shape[0], dtype=bool)

    picked: list[Direction] = []
    while len(picked) < b and np.any(allowed):
        candidates = np.flatnonzero(allowed)
        if cfg.gamma is None:
            choice = candidates[int(np.argmax(scores[candidates]))]
        else:
            choice = candidates[gp.annealed_choice(scores[candidates], t, cfg.gamma, rng)]
        picked.append(pool[choice])
        allowed[choice] = False
        allowed &= np.abs(pool @ pool[choice]) <= cfg.cos_cutoff

    if len(picked) < b:
        logger.debug(f"Candidate pool exhausted by dedup: {len(picked)}/{b} proposals")
    return np.array(picked).reshape(len(picked), d)


# === Selectors ===

def bosw(oracle: SliceOracle, cfg: SelectorConfig, rng: np.random.Generator,
         clock: AnnealingClock | None = None) -> DirectionSet:
    """One-shot BO: random init, then batches of proposals until L directions."""
    clock = clock or AnnealingClock()
    dirs = sample_uniform(rng, oracle.dim, cfg.init_size)
    vals = oracle.evaluate_many(dirs)
    rounds = 0
    while dirs.shape[0] < cfg.L:
        state = gp.fit(dirs, vals)
        need = cfg.L - dirs.shape[0]
        proposals = propose_batch(state, dirs, cfg, rng, t=clock.tick(), b=min(cfg.batch, need))
        if proposals.shape[0] == 0:
            # Dedup consumed the whole pool: fill with uniform directions
            proposals = sample_uniform(rng, oracle.dim, min(cfg.batch, need))
        dirs = np.vstack([dirs, proposals])
        vals = np.concatenate([vals, oracle.evaluate_many(proposals)])
        rounds += 1
    logger.debug(f"BOSW built {dirs.shape[0]} directions in {rounds} BO rounds")
    return dirs


def abosw(oracle: SliceOracle, seed: DirectionSet, cfg: SelectorConfig, rng: np.random.Generator,
          clock: AnnealingClock | None = None) -> DirectionSet:
    """QSW-seeded refinement: r rounds that swap the worst directions for better proposals."""
    clock = clock or AnnealingClock()
    dirs = np.array(seed, dtype=np.float64, copy=True)
    if dirs.shape[0] != cfg.L:
        raise InvalidArgumentError(f"seed has {dirs.shape[0]} directions but L = {cfg.L}")
    vals = oracle.evaluate_many(dirs)
    seen_dirs, seen_vals = dirs.copy(), vals.copy()

    for round_index in range(cfg.rounds):
        state = gp.fit(seen_dirs, seen_vals)
        t = clock.tick()
        proposals = propose_batch(state, dirs, cfg, rng, t=t)
        for _ in range(REFILL_ATTEMPTS):
            if proposals.shape[0] >= cfg.batch:
                break
            # Dedup can exhaust one pool when the set is dense; draw fresh pools
            more = propose_batch(state, np.vstack([dirs, proposals]), cfg, rng, t=t,
                                 b=cfg.batch - proposals.shape[0])
            proposals = np.vstack([proposals, more])
        if proposals.shape[0] == 0:
            continue
        proposal_vals = oracle.evaluate_many(proposals)
        seen_dirs = np.vstack([seen_dirs, proposals])
        seen_vals = np.concatenate([seen_vals, proposal_vals])

        # k-th best proposal against k-th worst incumbent; swap only on strict improvement
        best_first = np.argsort(-proposal_vals, kind="stable")
        worst_first = np.argsort(vals, kind="stable")[:best_first.size]
        swaps = 0
        for k, slot in zip(best_first, worst_first):
            if proposal_vals[k] > vals[slot]:
                dirs[slot] = proposals[k]
                vals[slot] = proposal_vals[k]
                swaps += 1
        logger.debug(f"ABOSW round {round_index + 1}: {swaps} of {proposals.shape[0]} proposals swapped in")
    return dirs


def select_for_step(selector_kind: SelectorKind, t: int, prev: DirectionSet | None, oracle: SliceOracle,
                    cfg: SelectorConfig, rng: np.random.Generator, clock: AnnealingClock | None = None) -> DirectionSet:
    """Direction set for outer step ``t``: rebuilt at t=0 (and on refresh steps), else ``prev``."""
    if t < 0:
        raise InvalidArgumentError(f"step index must be >= 0, got {t}")
    if selector_kind in (SelectorKind.BOSW, SelectorKind.ABOSW):
        rebuild = t == 0
    else:
        rebuild = t % cfg.refresh_for(selector_kind) == 0

    if not rebuild:
        if prev is None:
            raise InvalidStateError(f"{selector_kind.value} needs the previous direction set at step {t}")
        return prev

    if selector_kind in (SelectorKind.BOSW, SelectorKind.RBOSW):
        # RBOSW starts every refresh from scratch: fresh uniform init, fresh surrogate
        return bosw(oracle, cfg, rng, clock)
    if selector_kind is SelectorKind.ABOSW:
        seed = make_qsw(cfg.seed_kind, cfg.L, RandomizeMode.NONE, rng, d=oracle.dim)
    else:
        seed = make_qsw(cfg.seed_kind, cfg.L, cfg.reseed_mode, rng, d=oracle.dim)
    return abosw(oracle, seed, cfg, rng, clock)
