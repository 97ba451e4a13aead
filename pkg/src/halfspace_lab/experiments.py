"""Trial orchestration and empirical complexity estimates."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from . import geometry as geo
from .learners import LEARNERS, PASSIVE, build_learner
from .oracles import ContrastiveOracle, mechanism_from_dict

MODELS = ("loglog", "logstar", "sqrtlog", "linear")
METRICS = (
    "mean_interactions",
    "max_interactions",
    "mean_error",
    "max_error",
    "failure_rate",
    "mean_first_hit",
    "censored",
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    learner: str
    mechanism: dict
    concept: dict = field(default_factory=lambda: {"type": "random", "kind": "threshold"})
    epsilon: float = 0.1
    delta: float = 0.1
    k: int = 1
    trials: int = 10
    mc_samples: int = 100_000
    seed: int = 0
    c: float = 1.0
    budget: Optional[int] = None
    n_subphases: Optional[int] = None
    sample_size: Optional[int] = None
    sweep: list = field(default_factory=list)
    assertions: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.learner not in LEARNERS:
            raise ConfigError(f"learner: unknown id {self.learner!r}; choose from {sorted(LEARNERS)}")
        for name in ("epsilon", "delta"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1]")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be an integer >= 1")
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigError("k must be an integer >= 1")
        if not isinstance(self.mc_samples, int) or self.mc_samples < 1:
            raise ConfigError("mc_samples must be an integer >= 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        s = list(self.sweep)
        if len(s) > 1:
            d = np.diff(np.asarray(s, dtype=float))
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ConfigError("sweep must be strictly monotone")
        if self.learner in PASSIVE and self.sample_size is None and self.budget is None and not s:
            raise ConfigError("sample_size: passive learners need a sample size")
        try:
            self.mechanism_obj = mechanism_from_dict(self.mechanism)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"mechanism: {e}") from None
        ctype = self.concept.get("type")
        if ctype not in ("fixed", "random", "adversarial"):
            raise ConfigError(f"concept: type must be fixed, random or adversarial, got {ctype!r}")
        if ctype == "fixed":
            try:
                geo.concept_from_dict(self.concept["concept"])
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"concept: {e}") from None
        if ctype == "random" and self.concept.get("kind") not in ("threshold", "homogeneous", "halfspace"):
            raise ConfigError("concept: kind must be threshold, homogeneous or halfspace")
        for a in self.assertions:
            if a.get("metric") not in METRICS:
                raise ConfigError(f"assertions: unknown metric {a.get('metric')!r}")
            if a.get("op", "<=") not in ("<=", ">=", "=="):
                raise ConfigError(f"assertions: unknown op {a.get('op')!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - names
        if extra:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(extra))}")
        if "learner" not in d or "mechanism" not in d:
            raise ConfigError("config needs 'learner' and 'mechanism'")
        return cls(**d)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.to_dict()
        d.update(changes)
        return ExperimentConfig(**d)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    interactions: int
    final_error: float
    first_hit: Optional[int] = None


def trial_seed(master: int, trial: int) -> int:
    return int(np.random.SeedSequence([master, trial]).generate_state(1)[0])


def _error_fn(concept, mc_samples: int, rng):
    pts = None

    def err(h):
        nonlocal pts
        if h is None:
            return 1.0
        e = geo.exact_error(concept, h)
        if e is not None:
            return e
        if pts is None:
            pts = geo.sample_domain(concept, rng, mc_samples)
        return float(np.mean(concept.predict(pts) != h.predict(pts)))

    return err


def _make_concept(cfg: ExperimentConfig, rng):
    ctype = cfg.concept["type"]
    if ctype == "fixed":
        return geo.concept_from_dict(cfg.concept["concept"])
    if ctype == "random":
        return geo.random_concept(cfg.concept["kind"], cfg.k, rng)
    return None


def run_one(cfg: ExperimentConfig, trial: int, budget: Optional[int] = None) -> TrialResult:
    seed = trial_seed(cfg.seed, trial)
    c_ss, o_ss, e_ss = np.random.SeedSequence(seed).spawn(3)
    concept = _make_concept(cfg, np.random.default_rng(c_ss))
    mech = mechanism_from_dict(cfg.mechanism)
    oracle = ContrastiveOracle(concept, mech, rng=np.random.default_rng(o_ss))
    m = budget if budget is not None else cfg.budget
    learner = build_learner(
        cfg.learner,
        noise=mech.noise,
        epsilon=cfg.epsilon,
        delta=cfg.delta,
        c=cfg.c,
        budget=m,
        n_subphases=cfg.n_subphases,
    )
    if cfg.learner in PASSIVE:
        size = m if m is not None else cfg.sample_size
        learner.fit_pairs(oracle.sample_batch(int(size)))
    else:
        learner.fit(oracle)
    concept = oracle.finalize(learner.hypothesis_)
    err = _error_fn(concept, cfg.mc_samples, np.random.default_rng(e_ss))
    final = err(learner.hypothesis_)
    first = None
    cache = {}
    for i, h in enumerate(learner.snapshots_):
        key = id(h)
        if key not in cache:
            cache[key] = err(h) if h is not learner.hypothesis_ else final
        if cache[key] <= cfg.epsilon:
            first = i
            break
    return TrialResult(trial, seed, int(learner.n_interactions_), float(final), first)


def run_trials(cfg: ExperimentConfig, budget: Optional[int] = None, n_jobs: int = 1) -> list:
    """``cfg.trials`` independent trials, deterministic given ``cfg.seed``."""
    if n_jobs == 1:
        out = [run_one(cfg, i, budget) for i in range(cfg.trials)]
    else:
        out = Parallel(n_jobs=n_jobs)(delayed(run_one)(cfg, i, budget) for i in range(cfg.trials))
    return sorted(out, key=lambda r: r.trial)


# ---------------------------------------------------------------------------
# estimators


def _mean_se(v) -> tuple:
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def failure_rate(results, epsilon: float) -> float:
    return float(np.mean([r.final_error > epsilon for r in results]))


def estimate_sample_complexity(cfg: ExperimentConfig, epsilon=None, delta=None, grid=None, n_jobs: int = 1) -> int:
    """Smallest grid budget whose failure fraction clears ``delta`` with a margin.

    Failure probability is assumed non-increasing in the budget; the next two
    budgets after the answer are spot-checked and a warning is issued if they
    fail the same test.
    """
    eps = cfg.epsilon if epsilon is None else epsilon
    dl = cfg.delta if delta is None else delta
    if dl >= 1.0:
        return 0
    grid = list(cfg.sweep if grid is None else grid)
    if not grid:
        raise ValueError("estimate_sample_complexity needs a sweep grid of budgets")
    R = cfg.trials
    target = dl - 2.0 * math.sqrt(dl * (1.0 - dl) / R)

    def ok(m):
        return failure_rate(run_trials(cfg, budget=int(m), n_jobs=n_jobs), eps) < target

    for m in sorted(grid):
        if ok(m):
            for extra in (m + 1, m + 2):
                if not ok(extra):
                    warnings.warn(f"failure rate rose again at budget {extra} after passing at {m}")
            return int(m)
    raise ValueError(f"no budget in the grid reaches failure rate < {target:.4g}")


def estimate_expected_error(cfg: ExperimentConfig, m: Optional[int], n_jobs: int = 1) -> tuple:
    """Mean final error at budget ``m`` and its standard error."""
    return _mean_se([r.final_error for r in run_trials(cfg, budget=m, n_jobs=n_jobs)])


class RequirementEstimate(NamedTuple):
    mean: float
    std_error: float
    censored: int


def requirement_from_results(results) -> RequirementEstimate:
    hits = [r.first_hit for r in results if r.first_hit is not None]
    censored = len(results) - len(hits)
    if not hits:
        raise ValueError("every trial was censored")
    mean, se = _mean_se(hits)
    return RequirementEstimate(mean, se, censored)


def estimate_expected_requirement(cfg: ExperimentConfig, epsilon=None, n_jobs: int = 1) -> RequirementEstimate:
    """Mean first interaction count at which the running hypothesis has error
    at most ``epsilon`` (uncensored trials only; censored ones are counted)."""
    if epsilon is not None and epsilon != cfg.epsilon:
        cfg = cfg.replace(epsilon=epsilon)
    return requirement_from_results(run_trials(cfg, n_jobs=n_jobs))


def highprob_to_expect_check(errors: Sequence[float], epsilon: float) -> dict:
    """Check ``mean <= gamma delta_hat + eps (1 - delta_hat) + 3 se`` on observed errors."""
    e = np.asarray(errors, dtype=float)
    mean, se = _mean_se(e)
    d_hat = float(np.mean(e > epsilon))
    gamma = float(e.max())
    bound = gamma * d_hat + epsilon * (1.0 - d_hat)
    return {"mean": mean, "std_error": se, "delta_hat": d_hat, "gamma": gamma, "bound": bound, "ok": mean <= bound + 3.0 * se + 1e-15}


def monotone_budget_check(cfg: ExperimentConfig, budgets: Sequence[int], n_jobs: int = 1) -> dict:
    """Mean error should not grow (beyond 3 standard errors) as the budget grows."""
    stats = [estimate_expected_error(cfg, int(m), n_jobs) for m in budgets]
    ok = all(b[0] <= a[0] + 3.0 * math.hypot(a[1], b[1]) + 1e-15 for a, b in zip(stats, stats[1:]))
    return {"budgets": list(budgets), "stats": stats, "ok": ok}


# ---------------------------------------------------------------------------
# scaling


def log_star(x: float, base: float = 2.0) -> int:
    """Times ``log_base`` must be applied to bring ``x`` down to at most 1."""
    n = 0
    while x > 1.0:
        x = math.log(x, base)
        n += 1
    return n


def predictor(model: str, epsilon: float) -> float:
    inv = 1.0 / epsilon
    if model == "loglog":
        return math.log2(math.log2(inv))
    if model == "logstar":
        return float(log_star(inv))
    if model == "sqrtlog":
        return math.sqrt(math.log2(inv))
    if model == "linear":
        return math.log2(inv)
    raise ValueError(f"unknown model {model!r}; choose from {MODELS}")


@dataclass(frozen=True)
class FitReport:
    model: str
    a: float
    b: float
    max_residual: float
    passed: bool


def scaling_fit(measurements, model: str, tol: float = 1.5) -> FitReport:
    """Least-squares ``count ~ a p(eps) + b``; passes when every residual is
    within ``tol`` counts and the slope is positive."""
    meas = [(float(e), float(n)) for e, n in measurements]
    if len(meas) < 3:
        raise ValueError("scaling_fit needs at least 3 measurements")
    if any(not 0.0 < e < 1.0 for e, _ in meas):
        raise ValueError("scaling_fit needs epsilon in (0, 1)")
    p = np.array([predictor(model, e) for e, _ in meas])
    n = np.array([v for _, v in meas])
    if np.ptp(p) == 0.0:
        raise ValueError("degenerate grid: the predictor is constant")
    A = np.column_stack([p, np.ones_like(p)])
    (a, b), *_ = np.linalg.lstsq(A, n, rcond=None)
    res = float(np.max(np.abs(A @ np.array([a, b]) - n)))
    return FitReport(model, float(a), float(b), res, bool(res <= tol and a > 0))


# ---------------------------------------------------------------------------
# reporting


def aggregate(results, epsilon: float) -> dict:
    inter = [r.interactions for r in results]
    errs = [r.final_error for r in results]
    mi, mi_se = _mean_se(inter)
    me, me_se = _mean_se(errs)
    fr = failure_rate(results, epsilon)
    hits = [r.first_hit for r in results if r.first_hit is not None]
    mh, mh_se = _mean_se(hits) if hits else (math.nan, math.nan)
    return {
        "trials": len(results),
        "mean_interactions": mi,
        "mean_interactions_se": mi_se,
        "max_interactions": int(max(inter)),
        "mean_error": me,
        "mean_error_se": me_se,
        "max_error": float(max(errs)),
        "failure_rate": fr,
        "failure_rate_se": math.sqrt(fr * (1 - fr) / len(results)),
        "mean_first_hit": mh,
        "mean_first_hit_se": mh_se,
        "censored": len(results) - len(hits),
    }


def check_assertions(stats: dict, assertions) -> list:
    out = []
    for a in assertions:
        metric, op, value = a["metric"], a.get("op", "<="), float(a["value"])
        got = stats[metric]
        slack = float(a.get("se_margin", 0.0)) * float(stats.get(metric + "_se", 0.0) or 0.0)
        if op == "<=":
            ok = got <= value + slack
        elif op == ">=":
            ok = got >= value - slack
        else:
            ok = got == value
        out.append({"metric": metric, "op": op, "value": value, "observed": got, "passed": bool(ok)})
    return out


def results_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "seed", "interactions", "final_error", "first_hit"])
    for r in results:
        w.writerow([r.trial, r.seed, r.interactions, repr(r.final_error), "" if r.first_hit is None else r.first_hit])
    return buf.getvalue()


def results_from_csv(text: str) -> list:
    rows = csv.DictReader(io.StringIO(text))
    return [
        TrialResult(int(r["trial"]), int(r["seed"]), int(r["interactions"]), float(r["final_error"]), int(r["first_hit"]) if r["first_hit"] else None)
        for r in rows
    ]
