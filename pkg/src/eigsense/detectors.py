"""Eigenvalue-based test statistics and the threshold decision.

All statistics take a descending-sorted spectrum (or a stack of them along the
leading axes) and are vectorized over the batch.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DegenerateInputError, NumericError, RankDeficiencyError
from .signal_model import Hypothesis

# smallest eigenvalue below this fraction of the largest counts as zero
RANK_TOL = 1e-10


class DetectorKind(str, enum.Enum):
    RLRT = "rlrt"
    GLRT = "glrt"
    MME = "mme"
    EME = "eme"

    @property
    def needs_noise_variance(self) -> bool:
        return self is DetectorKind.RLRT

    @property
    def needs_full_rank(self) -> bool:
        return self in (DetectorKind.MME, DetectorKind.EME)


ALL_DETECTORS = tuple(DetectorKind)


def _first_bad(mask):
    flat = np.asarray(mask).reshape(-1)
    return int(np.flatnonzero(flat)[0]) if flat.size > 1 else None


def _spectrum(spec):
    spec = np.asarray(spec, dtype=float)
    if spec.shape[-1] == 0:
        raise ValueError("empty spectrum")
    return spec


def _check_min(spec):
    lam_min = spec[..., -1]
    bad = lam_min <= RANK_TOL * np.abs(spec[..., 0])
    if np.any(bad):
        raise RankDeficiencyError(
            "minimum eigenvalue is zero to working precision (N < L or degenerate input)",
            index=_first_bad(bad))
    return lam_min


def rlrt(spec, noise_variance):
    """Largest eigenvalue over the known noise variance."""
    if noise_variance is None or not noise_variance > 0:
        raise ConfigError(f"RLRT needs a positive noise variance, got {noise_variance!r}")
    return _spectrum(spec)[..., 0] / noise_variance


def glrt(spec, L=None):
    """Largest eigenvalue over the average eigenvalue, L*lam1/sum(lam)."""
    spec = _spectrum(spec)
    if L is not None and L != spec.shape[-1]:
        raise ValueError(f"L={L} does not match spectrum length {spec.shape[-1]}")
    tr = spec.sum(axis=-1)
    bad = ~(tr > 0)
    if np.any(bad):
        raise DegenerateInputError("zero trace", index=_first_bad(bad))
    return spec[..., 0] / (tr / spec.shape[-1])


def mme(spec):
    spec = _spectrum(spec)
    return spec[..., 0] / _check_min(spec)


def eme(spec, L=None):
    """Average per-dimension energy, trace/L, over the smallest eigenvalue."""
    spec = _spectrum(spec)
    if L is not None and L != spec.shape[-1]:
        raise ValueError(f"L={L} does not match spectrum length {spec.shape[-1]}")
    lam_min = _check_min(spec)
    return (spec.sum(axis=-1) / spec.shape[-1]) / lam_min


def statistic(kind, spec, noise_variance: Optional[float] = None):
    """Dispatch on the detector kind.

    Blind detectors refuse a noise variance so they cannot silently use one.
    """
    kind = DetectorKind(kind)
    if kind is DetectorKind.RLRT:
        return rlrt(spec, noise_variance)
    if noise_variance is not None:
        raise ConfigError(f"{kind.value} is blind and must not receive a noise variance")
    if kind is DetectorKind.GLRT:
        return glrt(spec)
    if kind is DetectorKind.MME:
        return mme(spec)
    return eme(spec)


@dataclass(frozen=True)
class Decision:
    statistic: float
    threshold: float
    verdict: Hypothesis


def decide(T, gamma) -> Decision:
    """H1 iff T > gamma; ties go to H0."""
    if not (math.isfinite(T) and math.isfinite(gamma)):
        raise NumericError(f"non-finite decision inputs T={T!r}, gamma={gamma!r}")
    return Decision(float(T), float(gamma), Hypothesis.H1 if T > gamma else Hypothesis.H0)
