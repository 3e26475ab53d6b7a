"""Seeded Monte Carlo campaigns: threshold calibration, Pd, ROC/AUC and sweeps.

Trials are processed in fixed-size chunks. Each chunk regenerates its own
trials from per-trial seeds, so the results do not depend on how many workers
run the chunks or in which order they finish.

Three child seeds are derived from a campaign's master seed: one for the H0
calibration run, one for the H0 evaluation run and one for the H1 evaluation
run. Thresholds are therefore never evaluated on the data that set them.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .covariance import combinatorial_covariance, eigvals_hermitian
from .detectors import DetectorKind, statistic
from .errors import ConfigError, NumericError, TrialError
from .signal_model import Hypothesis, ScenarioConfig, Stacking, derive_seed, simulate_batch

log = logging.getLogger(__name__)

CHUNK_SIZE = 250
MIN_TRIALS = 100

# child-seed roles
CALIBRATION = 0
EVAL_H0 = 1
EVAL_H1 = 2


def campaign_seed(master_seed: int, role: int) -> int:
    return derive_seed(master_seed, role)


def default_workers() -> int:
    return os.cpu_count() or 1


def rank_deficient(scenario: ScenarioConfig, p: int) -> bool:
    """Whether R' is singular for every draw (so lam_min = 0)."""
    M, N = scenario.num_sensors, scenario.num_samples
    mp = M - p + 1
    if scenario.stacking is Stacking.VERTICAL:
        return p * mp > min(M, N)
    return mp > p * N


def check_detectors(scenario: ScenarioConfig, detectors, p_list):
    for det in detectors:
        det = DetectorKind(det)
        for p in p_list:
            if not 1 <= p <= scenario.num_sensors - 1:
                raise ConfigError(f"overlap p={p} outside [1, {scenario.num_sensors - 1}]")
            if det.needs_full_rank and rank_deficient(scenario, p):
                raise ConfigError(
                    f"{det.value} divides by the smallest eigenvalue, which is identically zero "
                    f"for M={scenario.num_sensors}, N={scenario.num_samples}, p={p}, "
                    f"stacking={scenario.stacking.value}")


def _chunk_statistics(scenario, hypothesis, seed, start, stop, p_list, detectors):
    X = simulate_batch(scenario, hypothesis, seed, start, stop)
    out = {}
    for p in p_list:
        try:
            spec = eigvals_hermitian(combinatorial_covariance(X, p, scenario.stacking))
        except NumericError as exc:
            raise TrialError(f"p={p}: {exc}", start + (exc.index or 0)) from exc
        for det in detectors:
            nv = scenario.noise_variance if det.needs_noise_variance else None
            try:
                out[det, p] = statistic(det, spec, nv)
            except NumericError as exc:
                raise TrialError(f"{det.value}, p={p}: {exc}", start + (exc.index or 0)) from exc
    return out


def collect_statistics(scenario: ScenarioConfig, hypothesis, master_seed: int, trials: int,
                       p_list: Sequence[int], detectors, workers: int = 1) -> dict:
    """Statistics for every (detector, p) over the same ``trials`` received matrices.

    Returns a dict keyed by ``(DetectorKind, p)`` with arrays ordered by trial index.
    """
    detectors = [DetectorKind(d) for d in detectors]
    p_list = [int(p) for p in p_list]
    check_detectors(scenario, detectors, p_list)
    if trials < 1:
        raise ConfigError("trials must be positive")
    bounds = [(s, min(s + CHUNK_SIZE, trials)) for s in range(0, trials, CHUNK_SIZE)]
    args = (scenario, Hypothesis(hypothesis), master_seed)
    if workers is None:
        workers = default_workers()
    workers = max(1, min(int(workers), len(bounds)))
    if workers == 1:
        parts = [_chunk_statistics(*args, a, b, p_list, detectors) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_chunk_statistics, *args, a, b, p_list, detectors)
                       for a, b in bounds]
            parts = [f.result() for f in futures]
    return {key: np.concatenate([part[key] for part in parts]) for key in parts[0]}


def run_trials(scenario: ScenarioConfig, hypothesis, detector, trials: int, master_seed: int,
               workers: int = 1) -> np.ndarray:
    """One statistic per trial for the scenario's own overlap."""
    stats = collect_statistics(scenario, hypothesis, master_seed, trials,
                               [scenario.overlap], [detector], workers)
    return stats[DetectorKind(detector), scenario.overlap]


def calibrate_threshold(h0_stats, alpha: float) -> float:
    """Empirical upper quantile: the ceil((1-alpha)K)-th order statistic of K H0 values.

    At most a fraction alpha of the calibration values lies strictly above it.
    """
    h0 = np.asarray(h0_stats, dtype=float).reshape(-1)
    if h0.size == 0:
        raise ValueError("no calibration statistics")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha!r}")
    K = h0.size
    # rounding guard: (1 - 0.1) * 10 must give rank 9, not 10
    rank = math.ceil(round((1.0 - alpha) * K, 9))
    rank = min(max(rank, 1), K)
    return float(np.partition(h0, rank - 1)[rank - 1])


def estimate_pd(h1_stats, gamma: float) -> float:
    """Fraction of statistics strictly above gamma."""
    h1 = np.asarray(h1_stats, dtype=float).reshape(-1)
    if h1.size == 0:
        raise ValueError("no statistics")
    return float(np.count_nonzero(h1 > gamma)) / h1.size


def binomial_se(prob: float, n: int) -> float:
    return math.sqrt(max(prob * (1.0 - prob), 0.0) / n)


@dataclass
class RocCurve:
    """Empirical ROC.

    ``thresholds[k]`` is the k-th distinct observed statistic in descending
    order; point k+1 holds the rates for a threshold just below it. Point 0 is
    (0, 0). The raw statistics are kept in trial order for paired resampling.
    """

    pf: np.ndarray
    pd: np.ndarray
    thresholds: np.ndarray
    auc: float
    detector: Optional[DetectorKind] = None
    p: Optional[int] = None
    scenario: dict = field(default_factory=dict)
    h0_stats: Optional[np.ndarray] = field(default=None, repr=False)
    h1_stats: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def points(self):
        return list(zip(self.pf.tolist(), self.pd.tolist()))


def roc_curve(h0_stats, h1_stats, detector=None, p=None, scenario=None) -> RocCurve:
    raw0 = np.asarray(h0_stats, dtype=float).reshape(-1)
    raw1 = np.asarray(h1_stats, dtype=float).reshape(-1)
    if raw0.size == 0 or raw1.size == 0:
        raise ValueError("ROC needs statistics under both hypotheses")
    h0, h1 = np.sort(raw0), np.sort(raw1)
    thresholds = np.unique(np.concatenate([h0, h1]))[::-1]
    pf = (h0.size - np.searchsorted(h0, thresholds, side="left")) / h0.size
    pd = (h1.size - np.searchsorted(h1, thresholds, side="left")) / h1.size
    pf = np.concatenate([[0.0], pf])
    pd = np.concatenate([[0.0], pd])
    auc = float(np.trapezoid(pd, pf))
    return RocCurve(pf, pd, thresholds, auc,
                    DetectorKind(detector) if detector is not None else None, p,
                    scenario or {}, raw0, raw1)


def auc_concordance(h0_stats, h1_stats) -> float:
    """Mann-Whitney AUC: share of (h1, h0) pairs with h1 > h0, ties counted half."""
    h0 = np.sort(np.asarray(h0_stats, dtype=float).reshape(-1))
    h1 = np.asarray(h1_stats, dtype=float).reshape(-1)
    below = np.searchsorted(h0, h1, side="left")
    at_or_below = np.searchsorted(h0, h1, side="right")
    return float((below.sum() + 0.5 * (at_or_below - below).sum()) / (h0.size * h1.size))


def bootstrap_auc_se(h0_stats, h1_stats, n_boot: int = 200, seed: int = 0) -> float:
    h0 = np.asarray(h0_stats, dtype=float)
    h1 = np.asarray(h1_stats, dtype=float)
    rng = np.random.default_rng(seed)
    reps = [auc_concordance(h0[rng.integers(0, h0.size, h0.size)],
                            h1[rng.integers(0, h1.size, h1.size)]) for _ in range(n_boot)]
    return float(np.std(reps, ddof=1))


def paired_bootstrap_auc_diff(a: RocCurve, b: RocCurve, n_boot: int = 200, seed: int = 0):
    """AUC(a) - AUC(b) and its paired bootstrap standard error.

    Both curves must come from the same trials; each replicate resamples trial
    indices once and applies them to both.
    """
    h0a, h1a, h0b, h1b = (np.asarray(x) for x in (a.h0_stats, a.h1_stats, b.h0_stats, b.h1_stats))
    if h0a.size != h0b.size or h1a.size != h1b.size:
        raise ValueError("paired comparison needs curves from the same trials")
    rng = np.random.default_rng(seed)
    diffs = np.empty(n_boot)
    for k in range(n_boot):
        i0 = rng.integers(0, h0a.size, h0a.size)
        i1 = rng.integers(0, h1a.size, h1a.size)
        diffs[k] = auc_concordance(h0a[i0], h1a[i1]) - auc_concordance(h0b[i0], h1b[i1])
    return a.auc - b.auc, float(np.std(diffs, ddof=1))


@dataclass
class CampaignConfig:
    scenario: ScenarioConfig
    detectors: tuple = (DetectorKind.RLRT,)
    trials: int = 10_000
    alpha: float = 0.1
    p_grid: Optional[tuple] = None
    snr_grid: Optional[tuple] = None

    def __post_init__(self):
        self.detectors = tuple(DetectorKind(d) for d in self.detectors)
        if self.trials < MIN_TRIALS:
            raise ConfigError(f"trials must be >= {MIN_TRIALS} for quantile calibration")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"target false-alarm rate must lie in (0, 1), got {self.alpha!r}")
        if self.alpha * self.trials < 10:
            log.warning("alpha * trials = %.1f < 10: threshold estimate will be coarse",
                        self.alpha * self.trials)
        if self.p_grid is not None:
            self.p_grid = tuple(int(p) for p in self.p_grid)
            if not self.p_grid:
                raise ConfigError("empty p grid")
        if self.snr_grid is not None:
            self.snr_grid = tuple(float(s) for s in self.snr_grid)
            if not self.snr_grid:
                raise ConfigError("empty SNR grid")
        check_detectors(self.scenario, self.detectors, self.overlaps)

    @property
    def overlaps(self):
        return self.p_grid if self.p_grid is not None else (self.scenario.overlap,)

    @property
    def snrs(self):
        return self.snr_grid if self.snr_grid is not None else (self.scenario.snr_db,)


def sweep_overlap(campaign: CampaignConfig, master_seed: Optional[int] = None,
                  workers: int = 1) -> list:
    """One ROC per (detector, p), all from the same paired H0/H1 trials."""
    sc = campaign.scenario
    seed = sc.master_seed if master_seed is None else master_seed
    p_list = campaign.overlaps
    h0 = collect_statistics(sc, Hypothesis.H0, campaign_seed(seed, EVAL_H0), campaign.trials,
                            p_list, campaign.detectors, workers)
    h1 = collect_statistics(sc, Hypothesis.H1, campaign_seed(seed, EVAL_H1), campaign.trials,
                            p_list, campaign.detectors, workers)
    summary = sc.to_dict()
    return [roc_curve(h0[det, p], h1[det, p], det, p, summary)
            for det in campaign.detectors for p in p_list]


def calibrate(campaign: CampaignConfig, master_seed: Optional[int] = None,
              workers: int = 1) -> dict:
    """Threshold per (detector, p) from the calibration H0 run."""
    sc = campaign.scenario
    seed = sc.master_seed if master_seed is None else master_seed
    h0 = collect_statistics(sc, Hypothesis.H0, campaign_seed(seed, CALIBRATION),
                            campaign.trials, campaign.overlaps, campaign.detectors, workers)
    return {key: calibrate_threshold(stats, campaign.alpha) for key, stats in h0.items()}


@dataclass
class SweepResult:
    detector: DetectorKind
    p: int
    snr_db: np.ndarray
    pd: np.ndarray
    gamma: float
    alpha: float
    trials: int
    seed: int


def sweep_snr(campaign: CampaignConfig, master_seed: Optional[int] = None,
              workers: int = 1) -> list:
    """Pd at the calibrated threshold for every (detector, p) over the SNR grid.

    H0 statistics do not depend on SNR, so one threshold per (detector, p)
    serves the whole axis. Every SNR point reuses the same H1 seed, so the
    points differ only through the signal power.
    """
    sc = campaign.scenario
    seed = sc.master_seed if master_seed is None else master_seed
    gammas = calibrate(campaign, seed, workers)
    h1_seed = campaign_seed(seed, EVAL_H1)
    pd = {key: [] for key in gammas}
    for snr in campaign.snrs:
        h1 = collect_statistics(sc.replace(snr_db=snr), Hypothesis.H1, h1_seed, campaign.trials,
                                campaign.overlaps, campaign.detectors, workers)
        for key, stats in h1.items():
            pd[key].append(estimate_pd(stats, gammas[key]))
    snrs = np.asarray(campaign.snrs, dtype=float)
    return [SweepResult(det, p, snrs, np.asarray(pd[det, p]), gammas[det, p],
                        campaign.alpha, campaign.trials, seed)
            for det in campaign.detectors for p in campaign.overlaps]


def eigen_profile(scenario: ScenarioConfig, realizations: int, master_seed: Optional[int] = None):
    """Mean descending eigenvalues of R and R' under H0 and H1."""
    seed = scenario.master_seed if master_seed is None else master_seed
    out = {}
    for hyp, role in ((Hypothesis.H0, EVAL_H0), (Hypothesis.H1, EVAL_H1)):
        X = simulate_batch(scenario, hyp, campaign_seed(seed, role), 0, realizations)
        out["R", hyp] = eigvals_hermitian(combinatorial_covariance(X, 1)).mean(axis=0)
        out["Rprime", hyp] = eigvals_hermitian(
            combinatorial_covariance(X, scenario.overlap, scenario.stacking)).mean(axis=0)
    return out
