"""Primary-user signal, channel and noise generation.

Every random draw comes from an explicit ``numpy.random.Generator``. Monte
Carlo trials obtain their generators from :func:`trial_streams`, which derives
independent signal / channel / noise streams from ``(master_seed, trial)``
with ``numpy.random.SeedSequence`` spawn keys. Trial ``t`` therefore sees the
same numbers no matter how trials are scheduled, and an H0 run and an H1 run
that share a master seed share their noise realizations.
"""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError


class Hypothesis(str, enum.Enum):
    H0 = "H0"
    H1 = "H1"


class FieldMode(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


class ChannelModel(str, enum.Enum):
    UNIT = "unit"
    FIXED = "fixed"
    RAYLEIGH = "rayleigh_per_trial"


class Stacking(str, enum.Enum):
    """How the overlapping subgroups are concatenated into the combinatorial matrix.

    ``horizontal``: side by side along the sample axis, giving an M'x(pN)
    matrix and an M'xM' covariance (the sum of the shifted diagonal blocks).
    ``vertical``: stacked along the sensor axis, giving a (pM')xN matrix and
    the (pM')x(pM') block-shifted covariance.
    """

    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


# stream ids used in the per-trial spawn key
SIGNAL_STREAM = 0
CHANNEL_STREAM = 1
NOISE_STREAM = 2


@dataclass(frozen=True)
class ScenarioConfig:
    """One sensing scenario.

    Exactly one of ``snr_db`` / ``signal_variance`` defines the signal power.
    """

    num_sensors: int = 8
    num_samples: int = 200
    overlap: int = 1
    snr_db: Optional[float] = -13.0
    signal_variance: Optional[float] = None
    noise_variance: float = 1.0
    field_mode: FieldMode = FieldMode.REAL
    channel_model: ChannelModel = ChannelModel.UNIT
    channel_gains: Optional[tuple] = None
    stacking: Stacking = Stacking.HORIZONTAL
    master_seed: int = 0

    def __post_init__(self):
        # accept plain strings for the enum fields
        object.__setattr__(self, "field_mode", _coerce(FieldMode, self.field_mode, "field_mode"))
        object.__setattr__(self, "channel_model", _coerce(ChannelModel, self.channel_model, "channel_model"))
        object.__setattr__(self, "stacking", _coerce(Stacking, self.stacking, "stacking"))
        if self.channel_gains is not None:
            object.__setattr__(self, "channel_gains", tuple(complex(*g) if isinstance(g, (list, tuple)) else complex(g)
                                                     for g in self.channel_gains))
        self.validate()

    @property
    def m_prime(self) -> int:
        return self.num_sensors - self.overlap + 1

    @property
    def signal_power(self) -> float:
        if self.signal_variance is not None:
            return float(self.signal_variance)
        return self.noise_variance * 10.0 ** (self.snr_db / 10.0)

    @property
    def covariance_dim(self) -> int:
        """Dimension L of the covariance the detectors see."""
        if self.stacking is Stacking.VERTICAL:
            return self.overlap * self.m_prime
        return self.m_prime

    def validate(self):
        M, N, p = self.num_sensors, self.num_samples, self.overlap
        if not isinstance(M, (int, np.integer)) or M < 2:
            raise ConfigError(f"num_sensors must be an integer >= 2, got {M!r}")
        if not isinstance(N, (int, np.integer)) or N < 1:
            raise ConfigError(f"num_samples must be a positive integer, got {N!r}")
        if not isinstance(p, (int, np.integer)) or not 1 <= p <= M - 1:
            raise ConfigError(f"overlap p must lie in [1, {M - 1}] for M={M}, got {p!r}")
        if (self.snr_db is None) == (self.signal_variance is None):
            raise ConfigError("specify exactly one of snr_db and signal_variance")
        # -inf is allowed and means no signal
        if self.snr_db is not None and (np.isnan(self.snr_db) or self.snr_db == np.inf):
            raise ConfigError(f"snr_db must be a number or -inf, got {self.snr_db!r}")
        if self.signal_variance is not None and not self.signal_variance >= 0:
            raise ConfigError(f"signal_variance must be >= 0, got {self.signal_variance!r}")
        if not (self.noise_variance > 0 and np.isfinite(self.noise_variance)):
            raise ConfigError(f"noise_variance must be positive, got {self.noise_variance!r}")
        if self.channel_model is ChannelModel.FIXED:
            if self.channel_gains is None or len(self.channel_gains) != M:
                raise ConfigError(f"fixed channel needs exactly {M} gains")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")

    def replace(self, **changes) -> "ScenarioConfig":
        if "signal_variance" in changes and changes["signal_variance"] is not None:
            changes.setdefault("snr_db", None)
        if "snr_db" in changes and changes["snr_db"] is not None:
            changes.setdefault("signal_variance", None)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k in ("field_mode", "channel_model", "stacking"):
            d[k] = d[k].value
        if self.channel_gains is not None:
            d["channel_gains"] = [[g.real, g.imag] for g in self.channel_gains]
        return d


def _coerce(enum_cls, value, name):
    try:
        return enum_cls(value)
    except ValueError:
        choices = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{name} must be one of {{{choices}}}, got {value!r}") from None


def derive_seed(master_seed: int, *keys: int) -> int:
    """Deterministically derive a child 64-bit seed from ``master_seed`` and integer keys."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def trial_streams(master_seed: int, trial: int) -> dict:
    """Generators for the signal, channel and noise draws of one trial."""
    return {
        sid: np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(int(master_seed), spawn_key=(int(trial), sid)))
        )
        for sid in (SIGNAL_STREAM, CHANNEL_STREAM, NOISE_STREAM)
    }


def _gaussian(rng, shape, variance, field_mode):
    if FieldMode(field_mode) is FieldMode.COMPLEX:
        z = rng.standard_normal((2,) + tuple(shape))
        return np.sqrt(variance / 2.0) * (z[0] + 1j * z[1])
    return np.sqrt(variance) * rng.standard_normal(shape)


def gen_pu_signal(num_samples, signal_variance, rng, field_mode=FieldMode.REAL):
    """Zero-mean Gaussian primary-user samples S of length N (circular in complex mode)."""
    if num_samples < 1 or signal_variance < 0:
        raise ConfigError("need num_samples >= 1 and signal_variance >= 0")
    return _gaussian(rng, (num_samples,), signal_variance, field_mode)


def gen_channel(num_sensors, model, rng=None, gains: Optional[Sequence] = None,
                field_mode=FieldMode.COMPLEX):
    """Channel gain vector A of length M.

    ``rayleigh_per_trial`` draws i.i.d. Gaussian gains and rescales them to unit
    mean power, (1/M) sum |a_m|^2 = 1. In real mode the gains are real Gaussian.
    """
    model = _coerce(ChannelModel, model, "channel_model")
    if num_sensors < 2:
        raise ConfigError("num_sensors must be >= 2")
    if model is ChannelModel.UNIT:
        return np.ones(num_sensors)
    if model is ChannelModel.FIXED:
        if gains is None or len(gains) != num_sensors:
            raise ConfigError(f"fixed channel needs exactly {num_sensors} gains")
        a = np.asarray(gains)
        if np.iscomplexobj(a) and not np.any(a.imag):
            a = a.real
        return a.copy()
    a = _gaussian(rng, (num_sensors,), 1.0, field_mode)
    return a / np.sqrt(np.mean(np.abs(a) ** 2))


def gen_noise(num_sensors, num_samples, noise_variance, rng, field_mode=FieldMode.REAL):
    """M x N white Gaussian noise W with per-entry variance ``noise_variance``."""
    if num_sensors < 1 or num_samples < 1 or not noise_variance > 0:
        raise ConfigError("need M, N >= 1 and noise_variance > 0")
    return _gaussian(rng, (num_sensors, num_samples), noise_variance, field_mode)


@dataclass
class ReceivedMatrix:
    data: np.ndarray
    hypothesis: Hypothesis = Hypothesis.H1

    @property
    def shape(self):
        return self.data.shape


def synthesize_received(hypothesis, channel, signal, noise) -> ReceivedMatrix:
    """X = W under H0 and X = A S + W under H1."""
    hypothesis = Hypothesis(hypothesis)
    A = np.asarray(channel).reshape(-1)
    S = np.asarray(signal).reshape(-1)
    W = np.asarray(noise)
    if W.ndim != 2 or W.shape != (A.size, S.size):
        raise ValueError(
            f"dimension mismatch: A has {A.size} rows, S has {S.size} samples, W is {W.shape}"
        )
    if hypothesis is Hypothesis.H0:
        return ReceivedMatrix(W.copy(), hypothesis)
    return ReceivedMatrix(np.outer(A, S) + W, hypothesis)


def simulate_trial(scenario: ScenarioConfig, hypothesis, master_seed: int, trial: int) -> np.ndarray:
    """Received matrix X of one Monte Carlo trial."""
    streams = trial_streams(master_seed, trial)
    M, N = scenario.num_sensors, scenario.num_samples
    W = gen_noise(M, N, scenario.noise_variance, streams[NOISE_STREAM], scenario.field_mode)
    if Hypothesis(hypothesis) is Hypothesis.H0:
        return W
    A = gen_channel(M, scenario.channel_model, streams[CHANNEL_STREAM],
                    scenario.channel_gains, scenario.field_mode)
    S = gen_pu_signal(N, scenario.signal_power, streams[SIGNAL_STREAM], scenario.field_mode)
    return synthesize_received(Hypothesis.H1, A, S, W).data


def simulate_batch(scenario: ScenarioConfig, hypothesis, master_seed: int,
                   start: int, stop: int) -> np.ndarray:
    """Stack of received matrices for trials ``start .. stop-1``, shape (T, M, N)."""
    return np.stack([simulate_trial(scenario, hypothesis, master_seed, t) for t in range(start, stop)])
