import numpy as np
import pytest
from scipy import stats

from eigsense.errors import ConfigError
from eigsense.signal_model import (
    ChannelModel,
    FieldMode,
    Hypothesis,
    ScenarioConfig,
    derive_seed,
    gen_channel,
    gen_noise,
    gen_pu_signal,
    simulate_trial,
    synthesize_received,
    trial_streams,
)


def test_zero_variance_signal_is_all_zero(rng):
    s = gen_pu_signal(37, 0.0, rng)
    assert s.shape == (37,)
    assert np.all(s == 0)


@pytest.mark.parametrize("mode", ["real", "complex"])
def test_signal_is_deterministic_per_seed(mode):
    a = gen_pu_signal(200, 1.0, np.random.default_rng(5), mode)
    b = gen_pu_signal(200, 1.0, np.random.default_rng(5), mode)
    np.testing.assert_array_equal(a, b)


def _variance_band_probability(n, mode):
    # N * sample_power / sigma^2 is chi2(N) for real, chi2(2N)/2 for complex samples
    if mode == "real":
        dist, scale = stats.chi2(n), n
    else:
        dist, scale = stats.chi2(2 * n), 2 * n
    return dist.cdf(1.15 * scale) - dist.cdf(0.85 * scale)


@pytest.mark.parametrize("mode", ["real", "complex"])
def test_signal_variance_band(mode):
    s = gen_pu_signal(200, 1.0, np.random.default_rng(11), mode)
    assert abs(np.mean(np.abs(s) ** 2) - 1.0) < 0.15

    # across seeds the hit rate of the +-15% band must match the chi-square law
    prob = _variance_band_probability(200, mode)
    hits = [abs(np.mean(np.abs(gen_pu_signal(200, 1.0, np.random.default_rng(k), mode)) ** 2) - 1) < 0.15
            for k in range(600)]
    se = np.sqrt(prob * (1 - prob) / 600)
    assert abs(np.mean(hits) - prob) < 4 * se


def test_complex_signal_is_circular():
    s = gen_pu_signal(200_000, 2.0, np.random.default_rng(3), "complex")
    assert np.var(s.real) == pytest.approx(1.0, rel=0.02)
    assert np.var(s.imag) == pytest.approx(1.0, rel=0.02)
    assert abs(np.mean(s.real * s.imag)) < 0.02


def test_channel_models(rng):
    np.testing.assert_array_equal(gen_channel(3, "unit"), [1, 1, 1])
    np.testing.assert_array_equal(gen_channel(2, "fixed", gains=[2, 0]), [2, 0])
    a = gen_channel(8, ChannelModel.RAYLEIGH, rng)
    assert np.iscomplexobj(a)
    assert np.mean(np.abs(a) ** 2) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ConfigError):
        gen_channel(3, "fixed", gains=[1, 2])


def test_noise_determinism_and_scaling():
    w1 = gen_noise(8, 200, 1.0, np.random.default_rng(9), "complex")
    w1b = gen_noise(8, 200, 1.0, np.random.default_rng(9), "complex")
    w4 = gen_noise(8, 200, 4.0, np.random.default_rng(9), "complex")
    np.testing.assert_array_equal(w1, w1b)
    np.testing.assert_allclose(w4, 2 * w1, rtol=1e-15, atol=0)
    assert w1.shape == (8, 200)


@pytest.mark.parametrize("mode", ["real", "complex"])
def test_noise_mean_within_clt_bound(mode):
    w = gen_noise(8, 200, 1.0, np.random.default_rng(1), mode)
    # 3 sigma / sqrt(MN) = 0.075
    assert abs(w.real.mean()) < 0.08
    assert abs(w.imag.mean()) < 0.08


def test_synthesize_examples():
    W = np.zeros((2, 2))
    X = synthesize_received("H1", np.array([1, 2]), np.array([1, -1]), W).data
    np.testing.assert_array_equal(X, [[1, -1], [2, -2]])

    S = np.array([0.5, 1.5, -2.0])
    X = synthesize_received(Hypothesis.H1, np.ones(4), S, np.zeros((4, 3))).data
    for row in X:
        np.testing.assert_array_equal(row, S)

    W = np.arange(6.0).reshape(2, 3)
    X0 = synthesize_received("H0", np.array([3, 4]), np.array([1, 1, 1]), W)
    np.testing.assert_array_equal(X0.data, W)
    assert X0.hypothesis is Hypothesis.H0

    with pytest.raises(ValueError):
        synthesize_received("H1", np.ones(3), np.ones(4), np.zeros((2, 4)))


def test_scenario_validation():
    assert ScenarioConfig().m_prime == 8
    assert ScenarioConfig(overlap=7).m_prime == 2
    with pytest.raises(ConfigError):
        ScenarioConfig(overlap=8)
    with pytest.raises(ConfigError):
        ScenarioConfig(overlap=0)
    with pytest.raises(ConfigError):
        ScenarioConfig(snr_db=-3, signal_variance=1.0)
    with pytest.raises(ConfigError):
        ScenarioConfig(noise_variance=0)
    with pytest.raises(ConfigError):
        ScenarioConfig(field_mode="quaternion")
    with pytest.raises(ConfigError):
        ScenarioConfig(channel_model="fixed", channel_gains=[1, 2])


def test_snr_defines_signal_power():
    sc = ScenarioConfig(snr_db=-13.0, noise_variance=2.0)
    assert sc.signal_power == pytest.approx(2.0 * 10 ** -1.3)
    assert ScenarioConfig(snr_db=None, signal_variance=0.25).signal_power == 0.25
    assert ScenarioConfig(snr_db=-np.inf).signal_power == 0.0


def test_trial_streams_are_independent_and_reproducible():
    a = trial_streams(42, 7)
    b = trial_streams(42, 7)
    c = trial_streams(42, 8)
    x = [g.standard_normal(4) for g in a.values()]
    y = [g.standard_normal(4) for g in b.values()]
    z = [g.standard_normal(4) for g in c.values()]
    for u, v in zip(x, y):
        np.testing.assert_array_equal(u, v)
    assert not np.array_equal(x[0], x[1]) and not np.array_equal(x[0], z[0])
    assert derive_seed(1, 2) == derive_seed(1, 2) != derive_seed(1, 3)


def test_simulated_trial_is_deterministic_and_collapses_without_signal():
    sc = ScenarioConfig(field_mode="complex", master_seed=3)
    X1 = simulate_trial(sc, "H1", 99, 5)
    np.testing.assert_array_equal(X1, simulate_trial(sc, "H1", 99, 5))
    quiet = sc.replace(signal_variance=0.0)
    np.testing.assert_array_equal(simulate_trial(quiet, "H1", 99, 5), simulate_trial(sc, "H0", 99, 5))


@pytest.mark.parametrize("mode", list(FieldMode))
def test_power_accounting_unit_channel(mode):
    sc = ScenarioConfig(snr_db=None, signal_variance=0.5, noise_variance=1.0, field_mode=mode)
    X = simulate_trial(sc, "H1", 123, 0)
    # columns are independent; rows share the signal sample
    col_power = np.mean(np.abs(X) ** 2, axis=0)
    se = col_power.std(ddof=1) / np.sqrt(col_power.size)
    assert abs(col_power.mean() - 1.5) < 3 * se
