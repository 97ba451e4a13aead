"""Acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line. Run with ``pytest tests/test_acceptance.py -s``
or directly as ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from halfspace_lab import cli, suites, tables
from halfspace_lab import geometry as geo
from halfspace_lab.experiments import ExperimentConfig, failure_rate, requirement_from_results, run_trials, scaling_fit
from halfspace_lab.learners import HalfspaceChain, ThresholdBisection, default_subphase_budget
from halfspace_lab.noise import INFINITY, ExponentialNoise, PolynomialNoise, ScaledNoise
from halfspace_lab.oracles import ContrastiveOracle, DetAMDM, FarthestValid, ThresholdVersionSpaceAdversary

POLY = PolynomialNoise(1.0, 0.25)
SQUARE = PolynomialNoise(1.0, 1.0)
F16 = PolynomialNoise(1.0, 1.0 / 16)
EXP = ExponentialNoise(0.25)


def _prob(f, strategy="scaled-uniform"):
    return {"type": "prob", "noise": f.to_dict(), "strategy": {"name": strategy}}


def _det(f, strategy="farthest"):
    return {"type": "det", "noise": f.to_dict(), "strategy": {"name": strategy}}


def loop_stop(h, u, b, cap=10_000):
    """Plain iteration count, kept separate from the library routine."""
    n = 0
    while u > b:
        nxt = h(u)
        if n == cap or nxt >= u:
            return INFINITY
        u, n = nxt, n + 1
    return n


def adversarial_count(f, eps):
    o = ContrastiveOracle(None, DetAMDM(f, ThresholdVersionSpaceAdversary(ties="left")), seed=0)
    est = ThresholdBisection(f, eps).fit(o)
    theta = o.finalize(est.hypothesis_)
    return est.n_interactions_, geo.threshold_error(theta, est.hypothesis_), o.audit()


@pytest.fixture
def verdict(capsys):
    def emit(n, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} | {detail}")
        assert ok, detail

    return emit


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_threshold_exactness(verdict):
    with Timer() as t:
        rows = []
        for eps in (1e-2, 1e-4, 1e-6, 1e-8):
            n, err, audit = adversarial_count(POLY, eps)
            rows.append((eps, n, loop_stop(POLY.tilde_f, 1.0, 2 * eps), err, audit))
    ok = all(n == want and err <= eps and not audit for eps, n, want, err, audit in rows) and t.elapsed < 1.0
    detail = ", ".join(f"eps={e:g}: {n}/{w}" for e, n, w, _, _ in rows) + f"; {t.elapsed:.2f}s"
    verdict(1, "threshold count equals the contraction stop count", ok, detail)


def test_criterion_02_loglog_scaling(verdict):
    with Timer() as t:
        meas = []
        for j in range(2, 7):
            eps = 2.0 ** -(2**j)
            n, err, audit = adversarial_count(POLY, eps)
            assert err <= eps and not audit
            meas.append((eps, n))
        rep = scaling_fit(meas, "loglog")
    ok = rep.passed and t.elapsed < 5.0
    detail = f"counts {[n for _, n in meas]}, a={rep.a:.3f}, max residual {rep.max_residual:.3f}; {t.elapsed:.2f}s"
    verdict(2, "log-log scaling for polynomial noise", ok, detail)


def test_criterion_03_logstar_scaling(verdict):
    with Timer() as t:
        meas = []
        for eps in tables.LOGSTAR_GRID:
            n, err, audit = adversarial_count(EXP, eps)
            assert err <= eps and not audit
            meas.append((eps, n))
        rep = scaling_fit(meas, "logstar")
    ok = rep.passed and max(n for _, n in meas) <= 7 and t.elapsed < 5.0
    detail = f"counts {[n for _, n in meas]} at eps down to {meas[-1][0]:g}, a={rep.a:.3f}, residual {rep.max_residual:.3f}; {t.elapsed:.2f}s"
    verdict(3, "log-star scaling for exponential noise", ok, detail)


def test_criterion_04_one_query_homogeneous(verdict):
    with Timer() as t:
        cfg = ExperimentConfig(
            learner="hhs-one-shot",
            mechanism=_prob(SQUARE),
            concept={"type": "random", "kind": "homogeneous"},
            k=3,
            epsilon=0.05,
            delta=0.2,
            trials=1000,
            seed=4,
        )
        res = run_trials(cfg)
        fr = failure_rate(res, 0.05)
    ok = fr <= 0.24 and all(r.interactions == 1 for r in res) and t.elapsed < 30
    verdict(4, "one-query homogeneous learner", ok, f"failure rate {fr:.4f} <= 0.24, 1 interaction each; {t.elapsed:.1f}s")


def test_criterion_05_chain_learner(verdict):
    with Timer() as t:
        rng = np.random.default_rng(5)
        m = HalfspaceChain(POLY, 0.1, 1.0).n_steps(2)
        worst_inter, worst_excess = 0, -math.inf
        for i in range(100):
            c = geo.random_concept("halfspace", 2, rng)
            o = ContrastiveOracle(c, DetAMDM(POLY, FarthestValid()), seed=i)
            est = HalfspaceChain(POLY, 0.1, 1.0).fit(o)
            err, se = geo.monte_carlo_error(c, est.hypothesis_, 100_000, rng)
            worst_inter = max(worst_inter, est.n_interactions_)
            worst_excess = max(worst_excess, err - 0.1 - 4 * se)
    ok = m == 2 and worst_inter <= 2 and worst_excess <= 0 and t.elapsed < 60
    verdict(5, "chain learner for half-spaces", ok, f"max interactions {worst_inter} <= 2, worst err - (eps + 4se) = {worst_excess:.4f}; {t.elapsed:.1f}s")


def test_criterion_06_errdist_suite(verdict):
    with Timer() as t:
        rep = suites.verify_errdist(k_list=(2, 3, 5), n_configs=10_000, mc_samples=100_000, seed=0, mc_configs=200)
    ok = rep["ok"] and rep["configs"] >= 10_000 and t.elapsed < 120
    detail = (
        f"violations angle/halfspace/homogeneous = {rep['angle_violations']}/{rep['halfspace_violations']}/"
        f"{rep['homogeneous_violations']}, orientation flips skipped {rep['orientation_flips']}; {t.elapsed:.1f}s"
    )
    verdict(6, "distance-to-error bounds", ok, detail)


def test_criterion_07_verified_threshold(verdict):
    with Timer() as t:
        cfg = ExperimentConfig(learner="prob-thresh-verified", mechanism=_prob(POLY), epsilon=1e-4, trials=500, seed=7)
        res = run_trials(cfg)
        mean = float(np.mean([r.interactions for r in res]))
        bound = 4 * loop_stop(ScaledNoise(POLY, 4.0, 1.0), 1.0, 2e-4)
    ok = mean <= bound and max(r.final_error for r in res) <= 1e-4 and t.elapsed < 30
    note = " (4f(1) = 1, so the iteration never contracts and the bound is infinite)" if bound == INFINITY else ""
    verdict(7, "verified probabilistic threshold learner", ok, f"mean interactions {mean:.2f} <= {bound}{note}; all errors <= 1e-4; {t.elapsed:.1f}s")


def test_criterion_08_subphase_halfspace(verdict):
    with Timer() as t:
        budget = default_subphase_budget(F16, 0.1, 1.0, 2)
        cfg = ExperimentConfig(
            learner="prob-hs-subphase",
            mechanism=_prob(F16),
            concept={"type": "random", "kind": "halfspace"},
            k=2,
            epsilon=0.1,
            trials=200,
            mc_samples=100_000,
            seed=8,
        )
        est = requirement_from_results(run_trials(cfg))
    ok = budget == 24 and est.mean <= budget + 3 * est.std_error and t.elapsed < 120
    verdict(8, "sub-phase half-space learner", ok, f"mean first hit {est.mean:.2f} (se {est.std_error:.2f}, censored {est.censored}) <= {budget}; {t.elapsed:.1f}s")


def test_criterion_09_passive_threshold(verdict):
    with Timer() as t:
        m = tables.passive_threshold_size(POLY, 0.01, 0.1)
        cfg = ExperimentConfig(learner="passive-thresh", mechanism=_det(POLY), epsilon=0.01, delta=0.1, sample_size=m, trials=1000, seed=9)
        fr = failure_rate(run_trials(cfg), 0.01)
    ok = m == 231 and fr <= 0.14 and t.elapsed < 30
    verdict(9, "passive threshold sample size", ok, f"m={m}, failure rate {fr:.4f} <= 0.14; {t.elapsed:.1f}s")


def test_criterion_10_passive_homogeneous(verdict):
    with Timer() as t:
        m = tables.passive_homogeneous_size(SQUARE, 0.02, 0.1)
        rates = {}
        for k in (2, 3):
            cfg = ExperimentConfig(
                learner="passive-hhs",
                mechanism=_det(SQUARE),
                concept={"type": "random", "kind": "homogeneous"},
                k=k,
                epsilon=0.02,
                delta=0.1,
                sample_size=m,
                trials=1000,
                seed=10 + k,
            )
            rates[k] = failure_rate(run_trials(cfg), 0.02)
    ok = m == 37 and max(rates.values()) <= 0.14 and t.elapsed < 60
    verdict(10, "passive homogeneous sample size", ok, f"m={m}, failure rates {rates} <= 0.14; {t.elapsed:.1f}s")


def test_criterion_11_expected_error_bisection(verdict):
    with Timer() as t:
        out = {}
        for n in (3, 5):
            g = [float(POLY(2.0**-i)) / 2.0**-i for i in range(1, n + 1)]
            bound = 2.0 ** (-n - 1) * float(np.prod(g))
            cfg = ExperimentConfig(learner="prob-thresh-exp", mechanism=_prob(POLY), n_subphases=n, trials=2000, seed=11)
            errs = [r.final_error for r in run_trials(cfg)]
            mean, se = float(np.mean(errs)), float(np.std(errs, ddof=1) / math.sqrt(len(errs)))
            out[n] = (mean, se, bound)
    ok = all(mean <= bound + 3 * se for mean, se, bound in out.values()) and t.elapsed < 60
    detail = ", ".join(f"n={n}: mean {m:.3g} (se {s:.2g}) vs bound {b:.3g}" for n, (m, s, b) in out.items())
    verdict(11, "expected error of probabilistic bisection", ok, f"{detail}; {t.elapsed:.1f}s")


def test_criterion_12_property_suites(verdict):
    with tempfile.TemporaryDirectory() as d, Timer() as t:
        code = cli.main(["verify", "--out", d, "--seed", "0"])
        import json

        report = json.loads((Path(d) / "report.json").read_text())
    names = {k: v["ok"] for k, v in report["suites"].items()}
    two_atom = report["suites"]["oracles"]["two_atom"]
    ok = code == 0 and all(names.values()) and two_atom["ok"] and t.elapsed < 180
    verdict(12, "property suites via verify", ok, f"{names}, two-atom freq {two_atom['frequency']:.4f} vs {two_atom['target']:.4f}; {t.elapsed:.1f}s")


def test_criterion_13_determinism(verdict):
    config = Path(__file__).resolve().parent.parent / "configs" / "verified_threshold.json"
    with tempfile.TemporaryDirectory() as d, Timer() as t:
        codes = [cli.main(["run", "--config", str(config), "--out", str(Path(d) / s)]) for s in ("a", "b")]
        a, b = ((Path(d) / s / "results.csv").read_bytes() for s in ("a", "b"))
    ok = codes == [0, 0] and a == b and t.elapsed < 5
    verdict(13, "byte-identical reruns", ok, f"{len(a)} bytes identical={a == b}; {t.elapsed:.2f}s")


if __name__ == "__main__":

    def emit(n, title, ok, detail):
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} | {detail}", flush=True)
        results.append(ok)

    results = []
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn(emit)
            except AssertionError as e:
                print(f"[FAIL] {name}: {e}", flush=True)
                results.append(False)
    sys.exit(0 if all(results) else 1)
