"""Seeded random states, unitaries and channels, and the Monte Carlo verification campaign.

Trial ``t`` of a campaign draws everything from its own PCG64 substream
``SeedSequence(seed, spawn_key=(t,))``, so results do not depend on the
number of worker processes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from typing import Callable, Optional

import numpy as np

from .channels import KrausChannel, run_process, stinespring_dilation
from .correlations import SUPPORTED_MEASURED_DIMS, OptimizerConfig
from .decorator import speed
from .error_handling import InvalidParameterError, QEraseError, UnsupportedDimensionError
from .ledger import BoundCheckResult, EntropyLedger, build_ledger, check_classical_monotonicity, evaluate_bounds
from .qmath import ComplexMatrix, DensityOperator, SubsystemDims

logger = logging.getLogger("qerase")

STATE_FAMILIES = ("random", "quantum-classical")
CAMPAIGN_CHECKS = ("erasure_bound", "creation_bound", "generalized_landauer", "mutual_info_compensation", "total_entropy")
MAX_SEED = 2**64 - 1

LedgerHook = Callable[[EntropyLedger], EntropyLedger]


@dataclass(frozen=True)
class EnsembleConfig:
    """Monte Carlo campaign settings; ``kraus_count`` is the largest Kraus count sampled."""

    seed: int = 0
    dim_A: int = 2
    dim_B: int = 2
    env_dim: int = 4
    kraus_count: int = 4
    trials: int = 100
    state_family: str = "random"
    workers: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= MAX_SEED:
            raise InvalidParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.dim_A < 2 or self.dim_B < 2:
            raise InvalidParameterError(f"dimensions must be >= 2, got ({self.dim_A}, {self.dim_B})")
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {self.trials}")
        if self.kraus_count < 1:
            raise InvalidParameterError(f"kraus_count must be >= 1, got {self.kraus_count}")
        if self.env_dim < self.kraus_count:
            raise InvalidParameterError(f"env_dim {self.env_dim} cannot hold {self.kraus_count} Kraus operators")
        if self.state_family not in STATE_FAMILIES:
            raise InvalidParameterError(f"state_family must be one of {list(STATE_FAMILIES)}, got {self.state_family!r}")
        if self.workers < 1:
            raise InvalidParameterError(f"workers must be >= 1, got {self.workers}")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2)


def haar_random_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """QR of a complex Ginibre matrix with the phases of R's diagonal moved into Q."""
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    q, r = np.linalg.qr(_ginibre(dim, dim, rng))
    diagonal = np.diagonal(r)
    return q * (diagonal / np.abs(diagonal))


def haar_random_pure_state(dim: int, rng: np.random.Generator, dims: SubsystemDims | None = None) -> DensityOperator:
    dims = dims or SubsystemDims.single(dim, "S")
    vector = _ginibre(dim, 1, rng)[:, 0]
    return DensityOperator.from_pure(vector / np.linalg.norm(vector), dims)


def random_density_matrix(
    dim: int,
    rank: int | None,
    rng: np.random.Generator,
    dims: SubsystemDims | None = None,
) -> DensityOperator:
    """G G^dagger / Tr(G G^dagger) for a dim x rank Ginibre G; rank defaults to dim."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise InvalidParameterError(f"rank must be in 1..{dim}, got {rank}")
    dims = dims or SubsystemDims.single(dim, "S")
    g = _ginibre(dim, rank, rng)
    rho = g @ g.conj().T
    return DensityOperator(rho / np.real(np.trace(rho)), dims)


def random_kraus_channel(dim: int, kraus_count: int, rng: np.random.Generator) -> KrausChannel:
    """Split the first ``dim`` columns of a Haar unitary on dim*kraus_count into row blocks."""
    if kraus_count < 1:
        raise InvalidParameterError(f"kraus_count must be >= 1, got {kraus_count}")
    isometry = haar_random_unitary(dim * kraus_count, rng)[:, :dim]
    return KrausChannel(tuple(isometry[k * dim : (k + 1) * dim] for k in range(kraus_count)))


def random_quantum_classical_state(
    dim_A: int,
    dim_B: int,
    rng: np.random.Generator,
    labels: tuple[str, str] = ("A", "B"),
) -> DensityOperator:
    """sum_i p_i rho_i (x) |b_i><b_i| with a random orthonormal basis {b_i} on B."""
    weights = rng.dirichlet(np.ones(dim_B))
    basis = haar_random_unitary(dim_B, rng)
    rho = np.zeros((dim_A * dim_B, dim_A * dim_B), dtype=np.complex128)
    for i in range(dim_B):
        block = random_density_matrix(dim_A, int(rng.integers(1, dim_A + 1)), rng).matrix
        rho += weights[i] * np.kron(block, np.outer(basis[:, i], basis[:, i].conj()))
    return DensityOperator(rho, SubsystemDims.bipartite(dim_A, dim_B, labels))


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    rank: int = 0
    kraus_count: int = 0
    ledger: Optional[EntropyLedger] = None
    checks: tuple[BoundCheckResult, ...] = ()
    artifact: bool = False
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def violated(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.holds)


@dataclass(frozen=True)
class MonteCarloSummary:
    """Per-check violation counts and minimum margins over a campaign."""

    seed: int
    trials: int
    records: tuple[TrialRecord, ...]
    violations: dict[str, int] = field(default_factory=dict)
    min_margins: dict[str, float] = field(default_factory=dict)
    slack_mean: float = 0.0
    slack_max: float = 0.0
    artifacts: int = 0
    failures: int = 0

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    @property
    def ok(self) -> bool:
        """No violations and no crashed trials; a crashed trial verified nothing."""
        return self.total_violations == 0 and self.failures == 0


def _sample_state(cfg: EnsembleConfig, rng: np.random.Generator) -> tuple[DensityOperator, int]:
    if cfg.state_family == "quantum-classical":
        state = random_quantum_classical_state(cfg.dim_A, cfg.dim_B, rng)
        return state, int(np.linalg.matrix_rank(state.matrix, tol=1e-10))
    dim = cfg.dim_A * cfg.dim_B
    rank = int(rng.integers(1, dim + 1))
    return random_density_matrix(dim, rank, rng, SubsystemDims.bipartite(cfg.dim_A, cfg.dim_B)), rank


def run_trial(
    trial: int,
    cfg: EnsembleConfig,
    opt: OptimizerConfig,
    channel: KrausChannel | None = None,
    ledger_hook: LedgerHook | None = None,
) -> TrialRecord:
    """Sample, dilate, run, account and check one trial; failures are recorded, not raised."""
    rng = trial_rng(cfg.seed, trial)
    try:
        state, rank = _sample_state(cfg, rng)
        if channel is None:
            count = int(rng.integers(1, cfg.kraus_count + 1))
            ch = random_kraus_channel(cfg.dim_B, count, rng)
        else:
            ch = channel
        dilation = stinespring_dilation(ch, max(cfg.env_dim, ch.kraus_count))
        outcome = run_process(state, dilation)
        ledger = build_ledger(outcome, "B", opt)
        if ledger_hook is not None:
            ledger = ledger_hook(ledger)
        checks = tuple(evaluate_bounds(ledger, outcome))
        monotonic = check_classical_monotonicity(ledger)
    except (QEraseError, np.linalg.LinAlgError) as exc:
        logger.error(f"[MONTECARLO] trial {trial} failed: {exc}")
        return TrialRecord(trial=trial, error=f"{type(exc).__name__}: {exc}")
    return TrialRecord(
        trial=trial,
        rank=rank,
        kraus_count=ch.kraus_count,
        ledger=ledger,
        checks=checks,
        artifact=not monotonic.satisfied,
    )


def summarize(seed: int, records: list[TrialRecord]) -> MonteCarloSummary:
    violations = {name: 0 for name in CAMPAIGN_CHECKS}
    min_margins = {name: math.inf for name in CAMPAIGN_CHECKS}
    slacks = []
    for record in records:
        if record.ledger is not None:
            slacks.append(record.ledger.optimizer_slack)
        for check in record.checks:
            if not check.applicable:
                continue
            min_margins[check.name] = min(min_margins.get(check.name, math.inf), check.margin)
            if not check.holds:
                violations[check.name] = violations.get(check.name, 0) + 1
    return MonteCarloSummary(
        seed=seed,
        trials=len(records),
        records=tuple(records),
        violations=violations,
        # checks that were never applicable report no margin
        min_margins={k: v for k, v in min_margins.items() if math.isfinite(v)},
        slack_mean=float(np.mean(slacks)) if slacks else 0.0,
        slack_max=float(np.max(slacks)) if slacks else 0.0,
        artifacts=sum(r.artifact for r in records),
        failures=sum(r.failed for r in records),
    )


@speed
def monte_carlo_verify(
    cfg: EnsembleConfig,
    opt: OptimizerConfig | None = None,
    *,
    channel: KrausChannel | None = None,
    ledger_hook: LedgerHook | None = None,
) -> MonteCarloSummary:
    """Run ``cfg.trials`` independent trials and count bound violations per check.

    ``channel`` forces the same channel on every trial. ``ledger_hook`` rewrites
    each ledger before the checks run and must be picklable when ``cfg.workers > 1``.
    """
    opt = opt or OptimizerConfig()
    if cfg.dim_B not in SUPPORTED_MEASURED_DIMS:
        raise UnsupportedDimensionError(
            f"dim_B {cfg.dim_B} is outside the supported measured dimensions {list(SUPPORTED_MEASURED_DIMS)}"
        )
    if channel is not None and (channel.dim_in != cfg.dim_B or not channel.is_square):
        raise InvalidParameterError(f"forced channel must act on dimension {cfg.dim_B}")

    logger.info(f"[MONTECARLO] trials={cfg.trials} dims=({cfg.dim_A},{cfg.dim_B}) seed={cfg.seed} workers={cfg.workers}")
    worker = partial(run_trial, cfg=cfg, opt=opt, channel=channel, ledger_hook=ledger_hook)
    if cfg.workers > 1:
        with Pool(processes=cfg.workers) as pool:
            records = pool.map(worker, range(cfg.trials))
    else:
        records = [worker(t) for t in range(cfg.trials)]

    summary = summarize(cfg.seed, records)
    level = logging.INFO if summary.ok else logging.WARNING
    logger.log(
        level,
        f"[MONTECARLO] violations={summary.total_violations} failures={summary.failures} artifacts={summary.artifacts}",
    )
    return summary
