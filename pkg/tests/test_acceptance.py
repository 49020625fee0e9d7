"""Acceptance criteria, one test each, at the stated tolerances and runtime budgets.

Each test records a PASS/FAIL line that is printed in the terminal summary.
Criteria 7 and 8 run at full scale (1000 replications) unless
``COXCOPULA_ACCEPTANCE_SMOKE=1`` selects the 100-replication variant with
the wider smoke tolerance.
"""
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from coxcopula import (
    ClaytonCopula,
    CovariateLink,
    ExtendedArchimedeanCopula,
    ExtremeValueCopula,
    GridSpec,
    GumbelBarnettCopula,
    GumbelCopula,
    GumbelPickands,
    ProductCopula,
    PropagatedModel,
    SeededRng,
    AMHCopula,
    asymmetric_logistic_pickands,
    check_pickands,
    check_pqd,
    check_tp2,
    cox_pl_fit,
    kendall_tau,
    propagate_archimedean,
    propagate_copula,
    propagate_pickands,
    sample_copula,
    sample_gumbel_via_frailty,
    sample_khoudraji,
    transition_pickands,
)
from coxcopula.copulas import make_copula, make_generator
from coxcopula.experiments import (
    ExperimentConfig,
    density_grid,
    pickands_curves,
    run_case_study,
    run_misspecification,
)
from coxcopula.model import PropagatedCopula
from coxcopula.sampling import sample_direct_gumbel

SMOKE = os.environ.get("COXCOPULA_ACCEPTANCE_SMOKE") == "1"


def record(number, passed, detail, elapsed, budget):
    ok = passed and elapsed <= budget
    timing = f"{elapsed:.2f}s / budget {budget:g}s"
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail} ({timing})")
    assert passed, detail
    assert elapsed <= budget, f"runtime {elapsed:.1f}s exceeds {budget}s"


def pct(values):
    return "(" + ", ".join(f"{100 * v:.2f}%" for v in values) + ")"


def test_criterion_01_gumbel_barnett_closed_form():
    start = time.perf_counter()
    link = CovariateLink([np.log(2.0)], [np.log(1.5)])
    m = PropagatedModel(GumbelBarnettCopula(0.5), link)
    t = np.linspace(0, 1, 66)[1:-1]
    uu, vv = np.meshgrid(t, t)
    literal = PropagatedCopula(GumbelBarnettCopula(0.5), *link.factors(1.0)).cdf(uu, vv)
    closed = GumbelBarnettCopula(0.5 / 2.0).cdf(uu, vv)
    via_model = propagate_copula(m, 1.0).cdf(uu, vv)
    err = max(np.max(np.abs(literal - closed)), np.max(np.abs(via_model - closed)))
    record(1, err <= 1e-12, f"Gumbel-Barnett closed form, max error {err:.2e} on 64x64",
           time.perf_counter() - start, 1)


def test_criterion_02_formula_cross_consistency():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(100):
        family = rng.choice(["clayton", "gumbel"])
        theta = rng.uniform(0.2, 8) if family == "clayton" else rng.uniform(1, 8)
        link = CovariateLink([rng.uniform(-2, 2)], [rng.uniform(-2, 2)])
        z = rng.uniform(-1, 1)
        u, v = rng.uniform(0.001, 0.999, 2)
        g = make_generator(family, theta)
        lit = PropagatedCopula(make_copula(family, theta), *link.factors(z)).cdf(u, v)
        worst = max(worst, abs(propagate_archimedean(g, link, z, u, v) - lit))
    s = np.linspace(0, 1, 101)
    worst_b = 0.0
    for theta, phi, psi in ((3.0, 2.0, 1.0), (3.0, 1.0, 2.5), (1.7, 0.3, 0.9), (6.0, 4.0, 0.5)):
        link = CovariateLink([np.log(phi)], [np.log(psi)])
        b = propagate_pickands(GumbelPickands(theta), link, 1.0)(s)
        ref = asymmetric_logistic_pickands(link.alpha(1.0), link.beta(1.0), theta)(s)
        worst_b = max(worst_b, np.max(np.abs(b - ref)))
    ok = worst <= 1e-10 and worst_b <= 1e-12
    record(2, ok, f"copula formulas max diff {worst:.2e}; dependence functions {worst_b:.2e}",
           time.perf_counter() - start, 5)


def test_criterion_03_transition_two_paths():
    start = time.perf_counter()
    rng = np.random.default_rng(303)
    link = CovariateLink([1.5], [2.0])
    s = np.linspace(0, 1, 101)
    worst = 0.0
    for _ in range(100):
        a = GumbelPickands(rng.uniform(1, 10))
        z, zp = rng.uniform(-1, 1, 2)
        direct = propagate_pickands(a, link, zp)(s)
        via = transition_pickands(propagate_pickands(a, link, z), link, z, zp)(s)
        worst = max(worst, np.max(np.abs(direct - via)))
    record(3, worst <= 1e-10, f"two-path max diff {worst:.2e} over 100 draws",
           time.perf_counter() - start, 5)


def test_criterion_04_pickands_validity():
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    failures = 0
    for _ in range(1000):
        link = CovariateLink([rng.uniform(-3, 3)], [rng.uniform(-3, 3)])
        b = propagate_pickands(GumbelPickands(rng.uniform(1, 15)), link, rng.uniform(-1, 1))
        failures += not check_pickands(b, 1001).passed
    record(4, failures == 0, f"{1000 - failures}/1000 propagated dependence functions valid",
           time.perf_counter() - start, 10)


def test_criterion_05_dependence_classes():
    start = time.perf_counter()
    grid = GridSpec(64, 1e-3)
    ok = all(check_tp2(c, grid).passed and check_pqd(c, grid).passed
             for c in (ClaytonCopula(3), GumbelCopula(3)))
    gb = check_tp2(GumbelBarnettCopula(0.5), grid)
    ok = ok and not gb.passed and gb.witness is not None
    # every TP2 pass must come with C >= uv at every grid entry
    t = grid.interior()
    uu, vv = np.meshgrid(t, t, indexing="ij")
    link = CovariateLink([1.5, 0.3], [2.0, -0.8])
    candidates = [ClaytonCopula(3), GumbelCopula(3), AMHCopula(0.8), ClaytonCopula(0.2),
                  GumbelBarnettCopula(0.5), ProductCopula()]
    candidates += [propagate_copula(PropagatedModel(c, link), z)
                   for c in (ClaytonCopula(3), GumbelCopula(3)) for z in ([0.2, 0.1], [1, -1])]
    implied = True
    for c in candidates:
        if check_tp2(c, grid).passed:
            implied &= bool(np.all(c.cdf(uu, vv) - uu * vv >= -1e-10))
    ok = ok and implied
    record(5, ok, f"Clayton/Gumbel TP2+PQD; Gumbel-Barnett TP2 fails at ({gb.witness[0]:.4f}, {gb.witness[1]:.4f}); "
           f"TP2 implies PQD on {len(candidates)} copulas", time.perf_counter() - start, 10)


def test_criterion_06_max_stability():
    start = time.perf_counter()
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(200):
        link = CovariateLink([rng.uniform(-2, 2)], [rng.uniform(-2, 2)])
        m = PropagatedModel(ExtremeValueCopula(GumbelPickands(rng.uniform(1, 8))), link)
        c = propagate_copula(m, rng.uniform(-1, 1))
        u, v = rng.uniform(0.001, 0.999, (2, 50))
        t = rng.uniform(0.01, 10, 50)
        worst = max(worst, np.max(np.abs(c.cdf(u**t, v**t) - c.cdf(u, v) ** t)))
    record(6, worst <= 1e-12, f"max-stability max diff {worst:.2e} on 10000 draws",
           time.perf_counter() - start, 2)


def _table(family, experiment="case-study"):
    reps = 100 if SMOKE else 1000
    cfg = ExperimentConfig.default(experiment, family=family, replications=reps)
    return run_misspecification(cfg) if experiment == "misspec" else run_case_study(cfg)


@pytest.mark.slow
def test_criterion_07_case_study_reproduction():
    start = time.perf_counter()
    tol = 0.015 if SMOKE else 0.005
    clayton = _table("clayton")
    gumbel = _table("gumbel")
    target_c = np.array([0.0093, 0.0203, 0.0260])
    target_g = np.array([0.0081, 0.0155, 0.0202])
    dc = clayton.mean() - target_c
    dg = gumbel.mean() - target_g
    ok_c = bool(np.all(np.abs(dc) <= tol))
    ok_g = bool(np.all(np.abs(dg) <= tol))
    detail = (f"{clayton.replications} reps, tol {100 * tol:.1f}pp: Clayton {pct(clayton.mean())} "
              f"[{'ok' if ok_c else 'off'}], Gumbel {pct(gumbel.mean())} "
              f"[{'ok' if ok_g else 'off'}]; excluded {clayton.excluded}+{gumbel.excluded}")
    record(7, ok_c and ok_g, detail, time.perf_counter() - start, 180 if SMOKE else 1800)


@pytest.mark.slow
def test_criterion_08_misspecification_reproduction():
    start = time.perf_counter()
    smoke = 0.015 if SMOKE else 0.0
    mis = _table("clayton", "misspec")
    err = mis.mean()
    rho = mis.mean("spearman_relative_error")
    ok3 = bool(np.all(np.abs(err - np.array([0.1738, 0.1761, 0.1472])) <= 0.02 + smoke))
    ok4 = bool(np.all(np.abs(rho - np.array([0.5339, 0.5485, 0.5529])) <= 0.04 + smoke))
    detail = (f"{mis.replications} reps: strata errors {pct(err)} [{'ok' if ok3 else 'off'}], "
              f"Spearman errors {pct(rho)} [{'ok' if ok4 else 'off'}]")
    record(8, ok3 and ok4, detail, time.perf_counter() - start, 180 if SMOKE else 1800)


def test_criterion_09_sampler_fidelity():
    start = time.perf_counter()
    n = 10_000
    tau_c = kendall_tau(sample_copula(ClaytonCopula(3), n, SeededRng(901)))
    tau_d = kendall_tau(sample_direct_gumbel(3, n, SeededRng(902)))
    tau_f = kendall_tau(sample_gumbel_via_frailty(3, n, SeededRng(903)))
    nk = 20_000
    s = sample_khoudraji(ProductCopula(), GumbelCopula(3), 0.7, 0.7, nk, SeededRng(904))
    target = ExtendedArchimedeanCopula(GumbelCopula(3).generator, 0.7, 0.7)
    g = (np.arange(10) + 0.5) / 10
    uu, vv = np.meshgrid(g, g, indexing="ij")
    emp = np.mean((s.first[:, None, None] <= uu) & (s.second[:, None, None] <= vv), axis=0)
    gap = np.max(np.abs(emp - target.cdf(uu, vv)))
    ok = (abs(tau_c - 0.6) <= 0.03 and abs(tau_d - 2 / 3) <= 0.03 and abs(tau_f - 2 / 3) <= 0.03
          and gap <= 2 / np.sqrt(nk))
    record(9, ok, f"tau Clayton {tau_c:.4f}, Gumbel direct {tau_d:.4f}, frailty {tau_f:.4f}; "
           f"Khoudraji max gap {gap:.4f} vs {2 / np.sqrt(nk):.4f}", time.perf_counter() - start, 30)


def test_criterion_10_cox_recovery():
    start = time.perf_counter()
    est = {}
    for n, seed in ((5000, 1001), (50_000, 1002)):
        rng = np.random.default_rng(seed)
        z = rng.integers(0, 2, n).astype(float)
        t = rng.exponential(1.0, n) / np.exp(0.5 * z)
        est[n] = cox_pl_fit(t, z).coefficients[0]
    ok = abs(est[5000] - 0.5) <= 0.1 and abs(est[50_000] - 0.5) <= 0.035
    record(10, ok, f"estimates {est[5000]:.4f} (n=5000), {est[50_000]:.4f} (n=50000)",
           time.perf_counter() - start, 30)


def test_criterion_11_figure_data():
    start = time.perf_counter()
    cfg = ExperimentConfig.default("figures", z_grid=[0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0])
    _, curves = pickands_curves(cfg)
    ordered = bool(np.all(np.diff(np.array(list(curves.values())), axis=0) >= -1e-15))
    t, dens = density_grid(cfg, 3.0)
    dev = np.abs(dens - 1.0)
    i, j = np.unravel_index(np.argmax(dev), dev.shape)
    flat = bool(dev.max() <= 0.05)
    detail = (f"dependence curves ordered: {ordered}; z=3 density max |c-1| = {dev.max():.4f} "
              f"at ({t[i]:.4f}, {t[j]:.4f}) on the 101x101 grid, "
              f"{100 * np.mean(dev <= 0.05):.2f}% of points within 0.05")
    record(11, ordered and flat, detail, time.perf_counter() - start, 60)
