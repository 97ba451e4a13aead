import math

import numpy as np
import pytest

from halfspace_lab import experiments as ex
from halfspace_lab.experiments import ConfigError, ExperimentConfig, TrialResult
from halfspace_lab.noise import PolynomialNoise, stop_count

POLY = PolynomialNoise(1.0, 0.25)
ZERO_DET = {"type": "det", "noise": {"family": "zero"}, "strategy": {"name": "farthest"}}
POLY_DET = {"type": "det", "noise": POLY.to_dict(), "strategy": {"name": "farthest"}}
POLY_PROB = {"type": "prob", "noise": POLY.to_dict(), "strategy": {"name": "scaled-uniform"}}


def test_zero_noise_threshold_trials_are_exact():
    cfg = ExperimentConfig(learner="active-thresh-det", mechanism=ZERO_DET, epsilon=1e-6, trials=10)
    res = ex.run_trials(cfg)
    assert [r.interactions for r in res] == [1] * 10
    assert all(r.final_error <= 2.0**-40 for r in res)


def test_mdm_one_shot_trials():
    cfg = ExperimentConfig(
        learner="hhs-one-shot",
        mechanism={"type": "mdm"},
        concept={"type": "random", "kind": "homogeneous"},
        k=3,
        trials=100,
        epsilon=0.05,
    )
    res = ex.run_trials(cfg)
    assert all(r.interactions == 1 for r in res)
    assert max(r.final_error for r in res) <= 1e-7


def test_trials_are_reproducible_and_parallel_safe():
    cfg = ExperimentConfig(learner="prob-thresh-verified", mechanism=POLY_PROB, epsilon=1e-3, trials=12, seed=5)
    a = ex.results_to_csv(ex.run_trials(cfg))
    b = ex.results_to_csv(ex.run_trials(cfg))
    c = ex.results_to_csv(ex.run_trials(cfg, n_jobs=2))
    assert a == b == c
    assert a != ex.results_to_csv(ex.run_trials(cfg.replace(seed=6)))


def test_csv_round_trip():
    res = [TrialResult(0, 7, 3, 0.1 + 0.2, 2), TrialResult(1, 8, 4, 1e-17, None)]
    text = ex.results_to_csv(res)
    assert text.splitlines()[0] == "trial,seed,interactions,final_error,first_hit"
    assert ex.results_from_csv(text) == res


def test_config_validation_messages():
    with pytest.raises(ConfigError, match=r"epsilon must be in \(0, 1\]"):
        ExperimentConfig(learner="active-thresh-det", mechanism=ZERO_DET, epsilon=0.0)
    with pytest.raises(ConfigError, match="unknown id"):
        ExperimentConfig(learner="svm", mechanism=ZERO_DET)
    with pytest.raises(ConfigError, match="trials"):
        ExperimentConfig(learner="active-thresh-det", mechanism=ZERO_DET, trials=0)
    with pytest.raises(ConfigError, match="monotone"):
        ExperimentConfig(learner="active-thresh-det", mechanism=ZERO_DET, sweep=[1, 3, 2])
    with pytest.raises(ConfigError, match="mechanism"):
        ExperimentConfig(learner="active-thresh-det", mechanism={"type": "det", "noise": {"family": "nope"}})
    with pytest.raises(ConfigError, match="sample size"):
        ExperimentConfig(learner="passive-thresh", mechanism=ZERO_DET)
    with pytest.raises(ConfigError, match="unknown config field"):
        ExperimentConfig.from_dict({"learner": "active-thresh-det", "mechanism": ZERO_DET, "epsilom": 0.1})
    with pytest.raises(ConfigError, match="metric"):
        ExperimentConfig(learner="active-thresh-det", mechanism=ZERO_DET, assertions=[{"metric": "speed", "value": 1}])


def test_config_round_trip():
    cfg = ExperimentConfig(learner="hs-chain", mechanism=POLY_DET, concept={"type": "random", "kind": "halfspace"}, k=2)
    assert ExperimentConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_sample_complexity_zero_noise_is_one():
    for eps, delta, trials in ((0.1, 0.1, 50), (1e-4, 0.05, 400)):
        cfg = ExperimentConfig(learner="active-thresh-det", mechanism=ZERO_DET, epsilon=eps, delta=delta, trials=trials)
        assert ex.estimate_sample_complexity(cfg, grid=[0, 1, 2]) == 1


def test_sample_complexity_vacuous_delta():
    cfg = ExperimentConfig(learner="active-thresh-det", mechanism=ZERO_DET, delta=1.0)
    assert ex.estimate_sample_complexity(cfg) == 0


def test_sample_complexity_passive_threshold_within_bound():
    m_bound = math.ceil(math.log(1 / 0.1) / min(POLY.inverse(0.01), 0.01))
    assert m_bound == 231
    cfg = ExperimentConfig(learner="passive-thresh", mechanism=POLY_DET, epsilon=0.01, delta=0.1, trials=200, sample_size=231)
    assert ex.estimate_sample_complexity(cfg, grid=[150, 200, 231]) <= 231


def test_sample_complexity_needs_grid():
    cfg = ExperimentConfig(learner="active-thresh-det", mechanism=ZERO_DET)
    with pytest.raises(ValueError, match="grid"):
        ex.estimate_sample_complexity(cfg)


def test_expected_error_deterministic_mechanism_has_zero_spread():
    cfg = ExperimentConfig(
        learner="active-thresh-det",
        mechanism=POLY_DET,
        concept={"type": "fixed", "concept": {"kind": "threshold", "theta": 0.3}},
        epsilon=1e-3,
        trials=5,
    )
    mean, se = ex.estimate_expected_error(cfg, None)
    assert se == 0.0
    assert mean == ex.run_trials(cfg.replace(trials=1))[0].final_error


def test_expected_error_with_no_budget_is_prior_midpoint():
    cfg = ExperimentConfig(learner="active-thresh-det", mechanism=POLY_DET, epsilon=1e-3, trials=2000)
    mean, se = ex.estimate_expected_error(cfg, 0)
    assert abs(mean - 0.25) <= 4 * se


def test_expected_error_prob_threshold_bound():
    n = 3
    g = [float(POLY(2.0**-i)) / 2.0**-i for i in range(1, n + 1)]
    bound = 2.0 ** (-n - 1) * float(np.prod(g))
    cfg = ExperimentConfig(learner="prob-thresh-exp", mechanism=POLY_PROB, n_subphases=n, trials=500, seed=3)
    mean, se = ex.estimate_expected_error(cfg, None)
    assert mean <= bound + 3 * se


def test_expected_requirement_point_mass_is_deterministic():
    mech = {"type": "prob", "noise": POLY.to_dict(), "strategy": {"name": "point-mass"}}
    cfg = ExperimentConfig(learner="prob-thresh-verified", mechanism=mech, epsilon=1e-4, trials=20)
    est = ex.estimate_expected_requirement(cfg)
    assert est.std_error == 0.0 and est.censored == 0
    assert est.mean == 2


def test_expected_requirement_epsilon_one_is_zero():
    for learner, mech, extra in (
        ("prob-thresh-verified", POLY_PROB, {}),
        ("active-thresh-det", POLY_DET, {}),
        ("hs-chain", POLY_DET, {"concept": {"type": "random", "kind": "halfspace"}, "k": 2}),
    ):
        cfg = ExperimentConfig(learner=learner, mechanism=mech, trials=5, **extra)
        assert ex.estimate_expected_requirement(cfg, epsilon=1.0).mean == 0


def test_expected_requirement_reports_censoring():
    cfg = ExperimentConfig(learner="active-thresh-det", mechanism=POLY_DET, epsilon=1e-6, budget=1, trials=10)
    with pytest.raises(ValueError, match="censored"):
        ex.estimate_expected_requirement(cfg)
    res = [TrialResult(0, 0, 3, 0.0, 2), TrialResult(1, 0, 3, 0.5, None)]
    est = ex.requirement_from_results(res)
    assert est == (2.0, 0.0, 1)


def test_highprob_to_expect_identity():
    rng = np.random.default_rng(0)
    errs = np.abs(rng.normal(0, 0.02, 500))
    rep = ex.highprob_to_expect_check(errs, 0.03)
    assert rep["ok"]
    assert rep["bound"] == pytest.approx(rep["gamma"] * rep["delta_hat"] + 0.03 * (1 - rep["delta_hat"]))


def test_monotone_budget_sanity():
    cfg = ExperimentConfig(learner="prob-thresh-exp", mechanism=POLY_PROB, trials=200, seed=1)
    assert ex.monotone_budget_check(cfg, [2, 4, 8])["ok"]


def test_log_star_and_predictors():
    assert [ex.log_star(v) for v in (1, 2, 4, 16, 65536, 1e300)] == [0, 1, 2, 3, 4, 5]
    assert ex.predictor("loglog", 2.0**-16) == pytest.approx(4.0)
    assert ex.predictor("sqrtlog", 2.0**-16) == pytest.approx(4.0)
    assert ex.predictor("linear", 2.0**-16) == pytest.approx(16.0)
    with pytest.raises(ValueError):
        ex.predictor("cubic", 0.1)


def test_scaling_fit_loglog_on_polynomial_counts():
    meas = [(e, stop_count(POLY.tilde_f, 1.0, 2 * e)) for e in (2.0 ** -(2**j) for j in range(2, 7))]
    rep = ex.scaling_fit(meas, "loglog")
    assert rep.passed and rep.a > 0


def test_scaling_fit_logstar_on_exponential_counts():
    from halfspace_lab.noise import ExponentialNoise

    f = ExponentialNoise(0.25)
    meas = [(e, stop_count(f.tilde_f, 1.0, 2 * e)) for e in (0.5, 0.25, 1 / 16, 2.0**-16, 1e-15)]
    assert max(n for _, n in meas) <= 7
    assert ex.scaling_fit(meas, "logstar").passed


def test_scaling_fit_constant_counts():
    rep = ex.scaling_fit([(1e-2, 1), (1e-4, 1), (1e-8, 1)], "linear")
    assert rep.a == pytest.approx(0.0, abs=1e-12)
    assert rep.max_residual == pytest.approx(0.0, abs=1e-12)
    assert not rep.passed
    with pytest.raises(ValueError):
        ex.scaling_fit([(0.1, 1), (0.01, 2)], "loglog")
    with pytest.raises(ValueError, match="degenerate"):
        ex.scaling_fit([(0.3, 1), (0.35, 2), (0.4, 3)], "logstar")


def test_aggregate_and_assertions():
    res = [TrialResult(i, i, 2 + i % 2, 0.01 * i, 1) for i in range(4)]
    stats = ex.aggregate(res, 0.015)
    assert stats["mean_interactions"] == 2.5
    assert stats["max_error"] == pytest.approx(0.03)
    assert stats["failure_rate"] == 0.5
    checks = ex.check_assertions(
        stats,
        [
            {"metric": "max_interactions", "op": "<=", "value": 3},
            {"metric": "failure_rate", "op": "<=", "value": 0.3},
            {"metric": "failure_rate", "op": "<=", "value": 0.3, "se_margin": 1},
            {"metric": "censored", "op": "==", "value": 0},
        ],
    )
    assert [c["passed"] for c in checks] == [True, False, True, True]
