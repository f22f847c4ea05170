"""Bound computation, verification against measured distances, and example tables."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..bounds import BoundReport, compute_bound, gamma_params, sigma, tau
from ..laws import (
    Bernoulli,
    Binomial,
    FiniteCount,
    FiniteIntPmf,
    FiniteLatticePmf,
    GammaMixedPoisson,
    Hypergeometric,
    Poisson,
    point_claim,
    rademacher,
)
from ..metrics import (
    DistanceEstimate,
    GammaTarget,
    poisson_target,
    stoploss_distance,
    tv_empirical_vs_pmf,
    tv_pmf,
    wasserstein_empirical_vs_normal,
    wasserstein_empirical_vs_pmf,
    wasserstein_pmf_vs_normal,
    wasserstein_pmf_vs_pmf,
)
from ..model import RandomSumModel, exact_pmf, mean_var, sample_sum
from ..rng import stream
from .config import TARGET_OF, ExperimentConfig, validate

EXACT_SUPPORT_LIMIT = 10**5
CONSTANT_COLUMNS = ("tau", "sigma", "alpha", "beta", "r", "s", "c_r")
VERIFY_COLUMNS = (
    "bound_kind",
    "target",
    "count",
    "claim",
    "rho",
    "seed",
    "mc_budget",
    "tail_eps",
    *CONSTANT_COLUMNS,
    "bound",
    "bound_conservative",
    "distance",
    "distance_method",
    "distance_error",
    "slack",
    "pass",
)


@dataclass(frozen=True)
class Table:
    title: str
    columns: tuple
    rows: list
    notes: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(r.get("pass", True) is not False for r in self.rows)


@dataclass(frozen=True)
class VerificationRow:
    config: ExperimentConfig
    bound: BoundReport
    distance: DistanceEstimate

    @property
    def slack(self) -> float:
        return self.bound.value - self.distance.value

    @property
    def tolerance(self) -> float:
        return self.distance.error_bound + 3.0 * self.bound.mc_standard_error

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance

    def as_row(self) -> dict:
        row = self.config.echo()
        for name in CONSTANT_COLUMNS:
            row[name] = self.bound.constants.get(name, "")
        row.update(
            bound=self.bound.value,
            bound_conservative=self.bound.conservative_value,
            distance=self.distance.value,
            distance_method=self.distance.method,
            distance_error=self.distance.error_bound,
            slack=self.slack,
        )
        row["pass"] = self.passed
        return row


# --------------------------------------------------------------------------
# distances
# --------------------------------------------------------------------------


def support_estimate(model: RandomSumModel, tail_eps: float) -> int:
    """Rough number of lattice points the exact law of ``Y`` occupies."""
    k = model.count.truncated_support(tail_eps)
    idx = model.claim.lattice_indices
    return int(k * max(int(idx.max() - idx.min()), 1) + 1)


def measure_distance(kind: str, model: RandomSumModel, tail_eps: float, mc_budget: int, rng) -> DistanceEstimate:
    """The distance a bound of ``kind`` controls, exactly when the support is manageable."""
    target = TARGET_OF[kind]
    mean, var = mean_var(model)
    exact = support_estimate(model, tail_eps) <= EXACT_SUPPORT_LIMIT
    y = exact_pmf(model, tail_eps) if exact else sample_sum(model, rng, mc_budget)
    if target == "normal":
        if exact:
            return wasserstein_pmf_vs_normal(y, mean, math.sqrt(var))
        return wasserstein_empirical_vs_normal(y, mean, math.sqrt(var))
    if target == "gamma":
        r, s = gamma_params(model.count.lam, model.claim, model.rho)
        return stoploss_distance(y, GammaTarget(r, s))
    po = poisson_target(mean, tail_eps)
    if kind == "poisson_wasserstein":
        return wasserstein_pmf_vs_pmf(y, po) if exact else wasserstein_empirical_vs_pmf(y, po)
    return tv_pmf(y, po) if exact else tv_empirical_vs_pmf(y, po)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_bound(cfg: ExperimentConfig) -> BoundReport:
    validate(cfg)
    return compute_bound(
        cfg.bound_kind,
        cfg.model,
        d_method=cfg.d_method,
        mc_budget=cfg.mc_budget,
        rng=stream(cfg.seed, 0),
        tail_eps=cfg.tail_eps,
    )


def cmd_verify(cfg: ExperimentConfig) -> VerificationRow:
    report = cmd_bound(cfg)
    dist = measure_distance(cfg.bound_kind, cfg.model, cfg.tail_eps, cfg.mc_budget, stream(cfg.seed, 1))
    return VerificationRow(cfg, report, dist)


def _row_key(row: dict):
    return tuple(str(row.get(c, "")) for c in ("bound_kind", "count", "claim", "rho", "seed"))


def verify_many(cfgs, workers: int = 1) -> list[VerificationRow]:
    """Verify every config; results are sorted by config key, whatever the pool order."""
    cfgs = list(cfgs)
    if workers > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(cmd_verify, cfgs))
    else:
        rows = [cmd_verify(c) for c in cfgs]
    return sorted(rows, key=lambda r: _row_key(r.as_row()))


def verification_table(rows, title="verification") -> Table:
    return Table(title, VERIFY_COLUMNS, [r.as_row() for r in rows])


def cmd_sweep_rho(cfg: ExperimentConfig, rhos, workers: int = 1) -> Table:
    """Bound and distance across a grid of ``rho``, with monotonicity of the mixing weights."""
    rhos = sorted(float(r) for r in rhos)
    cfgs = [ExperimentConfig(**{**cfg.__dict__, "model": cfg.model.with_rho(r)}) for r in rhos]
    rows = verify_many(cfgs, workers)
    rows.sort(key=lambda r: r.config.model.rho)
    out, taus, sigmas = [], [], []
    poisson = isinstance(cfg.model.count, Poisson)
    for r in rows:
        m = r.config.model
        t = tau(m)
        s = sigma(m.count.lam, m.claim, m.rho) if poisson else float("nan")
        taus.append(t)
        sigmas.append(s)
        out.append(
            {
                "rho": m.rho,
                "tau": t,
                "sigma": s if poisson else "",
                "bound_kind": r.bound.bound_kind,
                "bound": r.bound.value,
                "distance": r.distance.value,
                "slack": r.slack,
                "pass": r.passed,
            }
        )
    notes = [f"tau strictly increasing in rho: {_increasing(taus)}"]
    if poisson:
        notes.append(f"sigma strictly increasing in rho: {_increasing(sigmas)}")
    cols = ("rho", "tau", "sigma", "bound_kind", "bound", "distance", "slack", "pass")
    return Table(f"sweep-rho {cfg.bound_kind}", cols, out, notes)


def _increasing(xs) -> bool:
    return bool(np.all(np.diff(np.asarray(xs, dtype=float)) > 0))


# --------------------------------------------------------------------------
# randomized configurations for the dominance sweep
# --------------------------------------------------------------------------


def _random_count(rng, poisson_only=False):
    pick = 0 if poisson_only else rng.integers(5)
    if pick == 0:
        return Poisson(round(float(rng.uniform(0.5, 30.0)), 3))
    if pick == 1:
        return Binomial(int(rng.integers(1, 41)), round(float(rng.uniform(0.05, 0.95)), 3))
    if pick == 2:
        return GammaMixedPoisson(round(float(rng.uniform(0.5, 20.0)), 3), round(float(rng.uniform(0.2, 0.8)), 3))
    if pick == 3:
        pop = int(rng.integers(5, 80))
        return Hypergeometric(pop, int(rng.integers(1, pop + 1)), int(rng.integers(1, pop + 1)))
    support = sorted(rng.choice(np.arange(0, 15), size=int(rng.integers(1, 5)), replace=False).tolist())
    if support == [0]:
        support = [0, 1]
    w = rng.dirichlet(np.ones(len(support)))
    return FiniteCount({int(k): float(p) for k, p in zip(support, w)})


def _random_centred_claim(rng):
    if rng.integers(3) == 0:
        return rademacher(int(rng.integers(1, 3)))
    a = -int(rng.integers(1, 4))
    b = int(rng.integers(1, 4))
    # two-point law on {a, b} with mean zero, optionally with an atom at 0
    zero = float(rng.uniform(0.0, 0.5)) if rng.integers(2) else 0.0
    pa = (1 - zero) * b / (b - a)
    weights = {a: pa, b: (1 - zero) - pa}
    if zero:
        weights[0] = zero
    return FiniteLatticePmf(weights)


def _random_int_claim(rng):
    pick = rng.integers(4)
    if pick == 0:
        return point_claim(1)
    if pick == 1:
        return Bernoulli(round(float(rng.uniform(0.05, 0.95)), 3))
    support = sorted(rng.choice(np.arange(0, 6), size=int(rng.integers(2, 5)), replace=False).tolist())
    if support == [0] or max(support) == 0:
        support = [0, 1]
    w = rng.dirichlet(np.ones(len(support)))
    return FiniteIntPmf({int(k): float(p) for k, p in zip(support, w)})


def _random_rho(rng):
    return [0.0, 0.0, 0.05, 0.1, 0.3, 0.5, 1.0][int(rng.integers(7))]


def random_configs(kind: str, n: int, seed: int, mc_budget: int = 10**5, tail_eps: float = 1e-12, d_method: str = "exact"):
    """``n`` valid randomized configurations for ``kind``; config ``k`` uses stream ``(seed, k)``."""
    out = []
    for k in range(n):
        rng = stream(seed, k)
        rho = _random_rho(rng)
        if kind in ("normal_zero_mean", "normal_zero_mean_indep", "normal_count_coupling_alt"):
            count, claim = _random_count(rng), _random_centred_claim(rng)
            if kind != "normal_zero_mean":
                rho = 0.0
        elif kind in ("normal_poisson", "gamma_stoploss"):
            count = _random_count(rng, poisson_only=True)
            claim = _random_int_claim(rng) if kind == "gamma_stoploss" or rng.integers(2) else _random_centred_claim(rng)
        else:
            count, claim = _random_count(rng), _random_int_claim(rng)
        cfg = ExperimentConfig(
            RandomSumModel(count, claim, rho),
            kind,
            TARGET_OF[kind],
            mc_budget=mc_budget,
            seed=seed * 1000 + k,
            tail_eps=tail_eps,
            d_method=d_method,
        )
        validate(cfg)
        out.append(cfg)
    return out


# --------------------------------------------------------------------------
# worked examples
# --------------------------------------------------------------------------


def _verify_model(kind, model, tail_eps):
    cfg = ExperimentConfig(model, kind, TARGET_OF[kind], tail_eps=tail_eps)
    return cmd_verify(cfg)


def _normal_rows(kind, models, extra, tail_eps):
    rows = []
    for label, model in models:
        v = _verify_model(kind, model, tail_eps)
        row = {"case": label, "bound": v.bound.value}
        row.update(extra(model))
        row.update(distance=v.distance.value, slack=v.slack)
        row["pass"] = v.passed
        rows.append(row)
    return rows


def _cor_display(model, delta):
    mo = model.claim.moments()
    en = model.count.moments().mean
    return 2 / math.sqrt(en * mo.variance) * (mo.m3abs / (2 * mo.variance) + delta * mo.m1abs)


def _rep_eq13(tail_eps):
    claim = rademacher(1)
    models = [(f"lambda={lam}", RandomSumModel(Poisson(lam), claim)) for lam in (10, 100, 1000)]

    def extra(m):
        mo = m.claim.moments()
        return {"display": mo.m3abs / (math.sqrt(m.count.lam) * mo.variance**1.5)}

    rows = _normal_rows("normal_zero_mean", models, extra, tail_eps)
    return Table(
        "Poisson count, Rademacher claims, rho = 0",
        ("case", "bound", "display", "distance", "slack", "pass"),
        rows,
        ["display = E|X|^3 / (sqrt(lambda) Var(X)^(3/2))"],
    )


def _rep_binomial(tail_eps):
    claims = [("rademacher", rademacher(1)), ("{-1:2/3,2:1/3}", FiniteLatticePmf({-1: 2 / 3, 2: 1 / 3}))]
    models = [
        (f"Bin({n},{p}) {cl}", RandomSumModel(Binomial(n, p), claim))
        for n, p in ((50, 0.1), (100, 0.5), (1000, 0.1))
        for cl, claim in claims
    ]
    rows = _normal_rows("normal_zero_mean", models, lambda m: {"display": _cor_display(m, m.count.p)}, tail_eps)
    return Table(
        "Binomial count, rho = 0",
        ("case", "bound", "display", "distance", "slack", "pass"),
        rows,
        ["display = 2/sqrt(np Var X) (E|X|^3/(2 Var X) + p E|X|)"],
    )


def _rep_hypergeometric(tail_eps):
    models = [
        (f"Hyp({M},{K},{n})", RandomSumModel(Hypergeometric(M, K, n), rademacher(1)))
        for M, K, n in ((200, 50, 40), (1000, 300, 100), (5000, 2500, 500))
    ]

    def extra(m):
        c = m.count
        en = c.draws * c.successes / c.population
        var = en * (c.population - c.successes) / c.population * (c.population - c.draws) / (c.population - 1)
        delta = 1 + en - (var + en**2) / en
        return {"delta_count": delta, "display": _cor_display(m, delta)}

    rows = _normal_rows("normal_zero_mean", models, extra, tail_eps)
    return Table(
        "Hypergeometric count, Rademacher claims, rho = 0",
        ("case", "bound", "delta_count", "display", "distance", "slack", "pass"),
        rows,
        ["delta_count = E[N + 1 - N^s] = 1 + E[N] - E[N^2]/E[N]"],
    )


def _negbin_pair(r, p, claim):
    mo = claim.moments()
    ours = math.sqrt(p / (1 - p)) * mo.m3abs / math.sqrt(r) + 2 * math.sqrt((1 - p) / p) * mo.m1abs / math.sqrt(r)
    other = math.sqrt(p / (1 - p)) * mo.m3abs / math.sqrt(r) + 1.0801 / r
    return ours, other


def _rep_negbin(tail_eps):
    claim = rademacher(1)
    models = [(f"r={r},p=0.5", RandomSumModel(GammaMixedPoisson(r, 0.5), claim)) for r in (10, 100, 1000)]

    def extra(m):
        ours, other = _negbin_pair(m.count.r, m.count.p, claim)
        return {"display": ours, "comparator": other}

    rows = _normal_rows("normal_zero_mean", models, extra, tail_eps)
    return Table(
        "Negative binomial count, Rademacher claims, rho = 0",
        ("case", "bound", "display", "comparator", "distance", "slack", "pass"),
        rows,
        [
            "display = sqrt(p/(1-p)) E|X|^3/sqrt(r) + 2 sqrt((1-p)/p) E|X|/sqrt(r)",
            "comparator = sqrt(p/(1-p)) E|X|^3/sqrt(r) + 1.0801/r",
        ],
    )


def _rep_compare(tail_eps):
    claim = rademacher(1)
    grid = [(100, p) for p in (0.01, 0.1, 0.5, 0.9)] + [(r, 1 / r) for r in (10, 1000)]
    rows = []
    for r, p in grid:
        report = compute_bound("normal_zero_mean", RandomSumModel(GammaMixedPoisson(r, p), claim), tail_eps=tail_eps)
        ours, other = _negbin_pair(r, p, claim)
        rows.append({"r": r, "p": p, "bound": report.value, "display": ours, "comparator": other, "ratio": ours / other})
    return Table(
        "Negative binomial: display versus comparator",
        ("r", "p", "bound", "display", "comparator", "ratio"),
        rows,
        ["with p = 1/r the comparator decays like 1/r while the display stays of order 1"],
    )


def _rep_poisson_normal(tail_eps):
    claims = [
        ("bernoulli(0.5)", Bernoulli(0.5)),
        ("{0:.2,1:.3,3:.5}", FiniteIntPmf({0: 0.2, 1: 0.3, 3: 0.5})),
        ("rademacher", rademacher(1)),
    ]
    models = [(f"lambda={lam} {cl}", RandomSumModel(Poisson(lam), c)) for lam in (10, 100, 1000) for cl, c in claims]

    def extra(m):
        mo = m.claim.moments()
        return {"display": mo.m3abs / (math.sqrt(m.count.lam) * mo.m2**1.5)}

    rows = _normal_rows("normal_poisson", models, extra, tail_eps)
    return Table(
        "Poisson count, rho = 0, non-centred claims",
        ("case", "bound", "display", "distance", "slack", "pass"),
        rows,
        ["display = E|X|^3 / (sqrt(lambda) E[X^2]^(3/2))"],
    )


def _cr(r):
    return (math.sqrt(2 * math.pi) + math.exp(-1)) / math.sqrt(r + 2) + 2 / (r + 2)


def _rep_gamma(tail_eps):
    p = 0.5
    rows = []
    for lp in (10, 50, 200):
        v = _verify_model("gamma_stoploss", RandomSumModel(Poisson(lp / p), Bernoulli(p)), tail_eps)
        rows.append(
            {
                "lambda_p": lp,
                "c_r": v.bound.constants["c_r"],
                "bound": v.bound.value,
                "display": math.sqrt(2 * lp * _cr(lp)),
                "distance": v.distance.value,
                "slack": v.slack,
                "pass": v.passed,
            }
        )
    return Table(
        "Bernoulli(0.5) claims, Poisson count: stop-loss distance to Gamma(lambda p, 1)",
        ("lambda_p", "c_r", "bound", "display", "distance", "slack", "pass"),
        rows,
        ["display = sqrt(2 lambda p c_r), c_r = (sqrt(2 pi) + 1/e)/sqrt(r + 2) + 2/(r + 2)"],
    )


def _rep_poisson_examples(tail_eps):
    claims = [("one", point_claim(1)), ("bernoulli(0.5)", Bernoulli(0.5)), ("{1:.5,2:.5}", FiniteIntPmf({1: 0.5, 2: 0.5}))]
    counts = [
        ("Bin(20,0.1)", Binomial(20, 0.1)),
        ("Bin(100,0.05)", Binomial(100, 0.05)),
        ("NB(5,0.5)", GammaMixedPoisson(5, 0.5)),
        ("NB(50,0.8)", GammaMixedPoisson(50, 0.8)),
    ]
    rows = []

    def add(label, model, w_display, tv_display):
        w = _verify_model("poisson_wasserstein", model, tail_eps)
        t = _verify_model("poisson_tv", model, tail_eps)
        rows.append(
            {
                "case": label,
                "rho": model.rho,
                "w_bound": w.bound.value,
                "w_display": w_display,
                "w_distance": w.distance.value,
                "tv_bound": t.bound.value,
                "tv_display": tv_display,
                "tv_distance": t.distance.value,
                "pass": w.passed and t.passed,
            }
        )

    for cl, claim in claims:
        mo = claim.moments()
        for cn, count in counts:
            if isinstance(count, Binomial):
                en, excess = count.n * count.p, count.p
            else:
                en, excess = count.rate_mean, count.rate_variance / count.rate_mean
            bracket = mo.m2 / mo.mean - 1 + excess * mo.mean
            add(f"{cn} {cl}", RandomSumModel(count, claim), 3 * math.sqrt(en * mo.mean) * bracket, bracket)
    for rho in (0.0, 0.5, 1.0):
        add("Po(3) one", RandomSumModel(Poisson(3), point_claim(1), rho), 0.0, 0.0)
    return Table(
        "Poisson approximation of random sums",
        ("case", "rho", "w_bound", "w_display", "w_distance", "tv_bound", "tv_display", "tv_distance", "pass"),
        rows,
        [
            "w_display = 3 sqrt(E[N] E[X]) (E[X^2]/E[X] - 1 + excess E[X]); tv_display drops the 3 sqrt(.) factor",
            "excess = p for Bin(n, p), Var(L)/E[L] for a gamma-mixed Poisson count with rate L",
        ],
    )


def _rep_alt(tail_eps):
    rows = []
    claim = rademacher(1)
    for n in (100, 1000, 10000):
        model = RandomSumModel(Binomial(n, 0.1), claim)
        cor = compute_bound("normal_zero_mean", model, tail_eps=tail_eps)
        alt = compute_bound("normal_count_coupling_alt", model, tail_eps=tail_eps)
        rows.append(
            {
                "n": n,
                "p": 0.1,
                "delta_count": cor.constants["delta_count"],
                "dw_count_poisson": alt.constants["dw_count_poisson"],
                "corollary_bound": cor.value,
                "alt_bound": alt.value,
                "alt_exceeds": alt.value > cor.value,
            }
        )
    return Table(
        "Binomial count: direct bound versus Poisson-proxy count coupling",
        ("n", "p", "delta_count", "dw_count_poisson", "corollary_bound", "alt_bound", "alt_exceeds"),
        rows,
        ["alt_bound = (E|X|^3/Var X + d_W(M, N) E|X|)/sqrt(Var(X) E[N]), M ~ Poisson(E[N])"],
    )


REPRODUCE = {
    "eq13_poisson": _rep_eq13,
    "binomial_2_1_1": _rep_binomial,
    "hypergeometric_2_1_1": _rep_hypergeometric,
    "negbin_eq17": _rep_negbin,
    "shevtsova_compare_eq17_vs_18": _rep_compare,
    "poisson_rho0_normal_sec2_2": _rep_poisson_normal,
    "bernoulli_gamma_eq34": _rep_gamma,
    "poisson_examples_sec4": _rep_poisson_examples,
    "alt_coupling_closing_remark": _rep_alt,
}


class UnknownExample(KeyError):
    def __str__(self):
        return f"unknown example id {self.args[0]!r}; available: {', '.join(sorted(REPRODUCE))}"


def cmd_reproduce(example_id: str, tail_eps: float = 1e-12) -> Table:
    try:
        fn = REPRODUCE[example_id]
    except KeyError:
        raise UnknownExample(example_id) from None
    table = fn(tail_eps)
    return Table(f"{example_id}: {table.title}", table.columns, table.rows, table.notes)


__all__ = [
    "Table",
    "VerificationRow",
    "cmd_bound",
    "cmd_verify",
    "cmd_reproduce",
    "cmd_sweep_rho",
    "measure_distance",
    "random_configs",
    "verify_many",
    "verification_table",
    "REPRODUCE",
    "UnknownExample",
]
