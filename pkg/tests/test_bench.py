import math

import numpy as np
import pytest

from mickit.bench import (
    BenchConfig,
    ModelInstance,
    PowerCurve,
    StatCache,
    equitability_report,
    instance_at,
    interpretable_interval,
    noise_for_r2,
    power_function,
    r_squared,
    reliable_interval,
    resolve_statistic,
    sample_instance,
    uncertain_set,
)
from mickit.estimators import mic_e
from mickit.functions import FunctionSpec

LINEAR = FunctionSpec("linear")
QUADRATIC = FunctionSpec("quadratic")


def _config(**kw):
    base = dict(functions=(LINEAR,), models=("Y,U",), n=100, trials=50, seed=1, alpha=0.05, grid_step=0.05)
    base.update(kw)
    return BenchConfig(**base)


class TestModels:
    def test_noiseless_points_on_diagonal(self):
        s = sample_instance(ModelInstance(LINEAR, "Y,U"), 5, 0)
        assert np.array_equal(s.x, s.y)

    def test_same_seed_same_sample(self):
        inst = ModelInstance(QUADRATIC, "XY,G", 0.2, 0.1)
        a, b = sample_instance(inst, 50, 7), sample_instance(inst, 50, 7)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)

    def test_y_models_reject_x_noise(self):
        with pytest.raises(ValueError):
            ModelInstance(LINEAR, "Y,U", 0.1, 0.1)

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            ModelInstance(LINEAR, "Z,U")

    def test_noise_is_uniform_with_half_width_b(self):
        s = sample_instance(ModelInstance(LINEAR, "Y,U", 0.3), 10**5, 3)
        resid = s.y - s.x
        assert resid.min() >= -0.3 and resid.max() <= 0.3
        assert resid.var() == pytest.approx(0.09 / 3, rel=0.02)


class TestRSquared:
    def test_noiseless_is_one(self):
        assert r_squared(ModelInstance(QUADRATIC, "Y,U")) == 1.0

    def test_linear_half(self):
        assert r_squared(ModelInstance(LINEAR, "Y,U", 0.5)) == pytest.approx(0.5, abs=1e-15)

    def test_independence_limit_is_zero(self):
        assert r_squared(instance_at(LINEAR, "XY,U", 0.0)) == 0.0

    @pytest.mark.parametrize("function", [LINEAR, QUADRATIC, FunctionSpec("sinusoidal", 2.0)], ids=lambda f: f.label)
    @pytest.mark.parametrize("model", ["XY,U", "XY,G"])
    def test_xy_models_match_monte_carlo(self, function, model):
        inst = ModelInstance(function, model, 0.15, 0.1)
        s = sample_instance(inst, 10**6, 11)
        mc = np.corrcoef(function(s.x), s.y)[0, 1] ** 2
        # standard error of a squared correlation near r^2 at n = 1e6 is below 1e-3
        assert r_squared(inst) == pytest.approx(mc, abs=3e-3)


class TestNoiseForR2:
    def test_linear_half(self):
        assert noise_for_r2(LINEAR, "Y,U", 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_target_one_is_noiseless(self):
        assert noise_for_r2(QUADRATIC, "XY,U", 1.0) == 0.0

    def test_target_zero_rejected(self):
        with pytest.raises(ValueError):
            noise_for_r2(LINEAR, "Y,U", 0.0)

    @pytest.mark.parametrize("model", ["Y,U", "XY,U", "Y,G", "XY,G"])
    def test_sinusoid_round_trip(self, model):
        f = FunctionSpec("sinusoidal", 3.0)
        for target in (0.3, 0.7):
            b = noise_for_r2(f, model, target)
            a = b if model.startswith("XY") else 0.0
            assert r_squared(ModelInstance(f, model, b, a)) == pytest.approx(target, abs=0.005)


class TestReliableInterval:
    def test_noiseless_linear_is_one_point(self):
        iv = reliable_interval(resolve_statistic("mic_e"), 1.0, 0.05, _config(trials=10))
        assert (iv.lo, iv.hi) == (1.0, 1.0)

    def test_alpha_near_half_spans_medians(self):
        cfg = _config(functions=(LINEAR, QUADRATIC), trials=101)
        stat = resolve_statistic("mic_approx")
        cache = StatCache(stat, cfg)
        iv = reliable_interval(stat, 0.5, 0.4999, cfg, cache)
        medians = [np.median(cache.values(f, "Y,U", 0.5)) for f in (LINEAR, QUADRATIC)]
        assert iv.lo == pytest.approx(min(medians), abs=1e-3) and iv.hi == pytest.approx(max(medians), abs=1e-3)

    def test_rejects_alpha_at_half(self):
        with pytest.raises(ValueError):
            reliable_interval(resolve_statistic("mic_e"), 0.5, 0.5, _config())

    def test_empty_function_set_rejected(self):
        with pytest.raises(ValueError):
            _config(functions=())

    def test_doubling_trials_nests(self):
        stat = resolve_statistic("mic_e")
        small = reliable_interval(stat, 0.5, 0.05, _config(functions=(LINEAR, QUADRATIC), n=500, trials=500))
        large = reliable_interval(stat, 0.5, 0.05, _config(functions=(LINEAR, QUADRATIC), n=500, trials=1000))
        assert abs(large.lo - small.lo) <= 0.02 and abs(large.hi - small.hi) <= 0.02


class TestInterpretableInterval:
    def test_score_one_only_at_noiseless(self):
        iv = interpretable_interval(resolve_statistic("mic_e"), 1.0, 0.05, _config(n=200, trials=30))
        assert (iv.lo, iv.hi) == (1.0, 1.0)

    def test_unreachable_score_is_empty(self):
        iv = interpretable_interval(resolve_statistic("mic_e"), -1.0, 0.05, _config(trials=10))
        assert iv.empty and math.isnan(iv.width)

    def test_grid_refinement_agrees_within_one_step(self):
        functions = (LINEAR, QUADRATIC, FunctionSpec("sinusoidal", 1.0))
        stat = resolve_statistic("mic_approx")
        coarse = interpretable_interval(stat, 0.5, 0.05, _config(functions=functions, trials=60, grid_step=0.05))
        fine = interpretable_interval(stat, 0.5, 0.05, _config(functions=functions, trials=60, grid_step=0.025))
        assert abs(coarse.width - fine.width) <= 0.05


class TestPower:
    def test_power_at_null_is_at_most_alpha(self):
        cfg = _config(functions=(LINEAR, QUADRATIC), trials=200)
        stat = resolve_statistic("mic_approx")
        curve = power_function(stat, 0.3, [0.3], 0.05, cfg)
        assert curve.power[0] <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / 200)

    def test_independence_vs_noiseless_has_full_power(self):
        curve = power_function(resolve_statistic("mic_e"), 0.0, [1.0], 0.05, _config(n=500, trials=50))
        assert curve.power == (1.0,)

    def test_power_nondecreasing_on_linear_family(self):
        cfg = _config(trials=200)
        xs = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
        curve = power_function(resolve_statistic("mic_e"), 0.1, xs, 0.05, cfg)
        for i in range(len(xs) - 1):
            slack = 2 * (curve.mc_error[i] + curve.mc_error[i + 1])
            assert curve.power[i + 1] >= curve.power[i] - slack
        assert all(0 <= p <= 1 for p in curve.power)

    def test_uncertain_set_examples(self):
        xs = (0.2, 0.4, 0.6, 0.8, 1.0)
        full = PowerCurve(0.2, 0.05, xs, (0.05, 1, 1, 1, 1), 0.5)
        assert uncertain_set(full).diameter == 0.0
        none = PowerCurve(0.2, 0.05, xs, (0.0, 0.1, 0.2, 0.3, 0.4), 0.5)
        assert uncertain_set(none).diameter == pytest.approx(0.8)


class TestReport:
    def test_constant_statistic_is_uninterpretable(self):
        report = equitability_report(resolve_statistic("constant"), _config(trials=5))
        row = next(r for r in report.rows if r[0] == 0.5)
        assert (row[1], row[2], row[3]) == (0.0, 1.0, 1.0)
        assert report.worst_width == 1.0

    def test_oracle_statistic_is_perfect(self):
        report = equitability_report(resolve_statistic("r2-oracle"), _config(functions=(LINEAR, QUADRATIC), trials=5))
        assert report.worst_width == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("name", ["mic_e", "mic_approx"])
    def test_report_is_reproducible(self, name):
        cfg = _config(functions=(LINEAR, QUADRATIC), n=60, trials=20, grid_step=0.05)
        a = equitability_report(resolve_statistic(name), cfg)
        b = equitability_report(resolve_statistic(name), cfg)
        assert a == b

    def test_threads_do_not_change_values(self, monkeypatch):
        cfg = _config(trials=20)
        serial = StatCache(resolve_statistic("mic_e"), cfg).values(LINEAR, "Y,U", 0.4)
        monkeypatch.setenv("MICKIT_THREADS", "4")
        threaded = StatCache(resolve_statistic("mic_e"), cfg).values(LINEAR, "Y,U", 0.4)
        assert np.array_equal(serial, threaded)


@pytest.mark.parametrize("model", ["Y,U", "XY,U", "Y,G", "XY,G"])
@pytest.mark.parametrize("function", [LINEAR, QUADRATIC, FunctionSpec("cubic"), FunctionSpec("sinusoidal", 2.0)], ids=lambda f: f.label)
def test_median_score_falls_as_noise_grows(function, model):
    medians = []
    for b in (0.0, 0.25, 0.5, 1.0):
        inst = ModelInstance(function, model, b, b if model.startswith("XY") else 0.0)
        scores = [mic_e(sample_instance(inst, 100, np.random.SeedSequence([5, t]))) for t in range(100)]
        medians.append(float(np.median(scores)))
    assert all(b < a for a, b in zip(medians, medians[1:])), medians
