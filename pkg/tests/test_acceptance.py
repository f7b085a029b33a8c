"""Acceptance criteria 1-10.

Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line (also repeated in the
pytest terminal summary) and then asserts it. Run the file directly with
``python tests/test_acceptance.py`` for the ten lines alone.
"""

import itertools
import time

import numpy as np
import pytest
from scipy import stats

from conftest import golden_argmax, instances, second_difference
from v2xcoop import cli
from v2xcoop.channel import (
    CorrelatedArray,
    FadingLink,
    cc_combiner_cdf,
    cc_combiner_cdf_quad,
    ec_combiner_cdf,
    ec_lambda,
    iid_snr_cdf,
    mrc_iid_cdf,
)
from v2xcoop.figures import load_recipe, run_recipe
from v2xcoop.game import (
    GameParams,
    hop_snrs,
    optimal_phi,
    optimal_power,
    relay_share,
    satisfaction,
    source_marginal,
    utility_source,
)
from v2xcoop.montecarlo import RngSpec, gaussian_corr_matrix, sample_correlated_gains
from v2xcoop.pep import block_error_components, combine_hops, packet_error_from_block, packet_error_prob
from v2xcoop.runconfig import RunConfig, Sweep, db_to_linear
from v2xcoop.runs import validate_table

RESULTS = {}

GAMMA0_GRID_DB = np.linspace(-20.0, 0.0, 5)


def report(n, ok, detail):
    line = f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def _oracle_grid(model):
    cfg = RunConfig(model=model, rho=0.1, trials=10 ** 5, sweep=Sweep("gamma0_db", -20.0, 0.0, 5))
    t0 = time.perf_counter()
    columns, rows, _, ok = validate_table(cfg)
    elapsed = time.perf_counter() - t0
    zmax = max(abs(r[columns.index("z")]) for r in rows)
    return ok, zmax, elapsed, len(rows)


def test_criterion_01_oracle_ec():
    ok, zmax, elapsed, n = _oracle_grid("ec")
    report(1, ok and n == 5 and elapsed < 30,
           f"EC closed form vs Monte Carlo, 5 thresholds, 1e5 trials: max |z| = {zmax:.3f} "
           f"(limit 3), {elapsed:.1f} s (limit 30 s)")


def test_criterion_02_oracle_cc():
    ok, zmax, elapsed, n = _oracle_grid("cc")
    worst = 0.0
    link = FadingLink(1.0, RunConfig().scenario("cc").rsu.branch.mean_snr)
    array = CorrelatedArray(10, "cc", 0.1, link)
    for g in GAMMA0_GRID_DB:
        g0 = db_to_linear(g)
        base = cc_combiner_cdf_quad(array, g0)
        tight = cc_combiner_cdf_quad(array, g0, epsabs=1e-11, epsrel=1e-9)
        worst = max(worst, abs(tight - base) / tight)
        # and at the level of the block error it feeds
        comp = block_error_components(RunConfig(model="cc", gamma0_db=float(g)).scenario("cc"))
        block_tight = combine_hops(comp.first_hop, tight)
        worst = max(worst, abs(combine_hops(comp.first_hop, base) - block_tight) / block_tight)
    report(2, ok and n == 5 and worst <= 1e-6,
           f"CC quadrature vs Monte Carlo, 5 thresholds, 1e5 trials: max |z| = {zmax:.3f} (limit 3); "
           f"10x tighter quadrature changes the CDF by {worst:.2e} relative (limit 1e-6)")


def test_criterion_03_reductions():
    failures = []
    mean = RunConfig().scenario("ec").rsu.branch.mean_snr
    for m in (1.0, 2.0):
        link = FadingLink(m, mean)
        for g in GAMMA0_GRID_DB:
            g0 = db_to_linear(g)
            iid = mrc_iid_cdf(10, link, g0)
            for model in ("cc", "ec"):
                cdf = cc_combiner_cdf if model == "cc" else ec_combiner_cdf
                v = cdf(CorrelatedArray(10, model, 1e-6, link), g0)
                if not abs(v / iid - 1) <= 1e-3:
                    failures.append(f"rho->0 {model} m={m} {g} dB: {v / iid - 1:.2e}")
            single = iid_snr_cdf(link, g0)
            ec1 = ec_combiner_cdf(CorrelatedArray(1, "ec", 0.5, link), g0)
            cc1 = cc_combiner_cdf_quad(CorrelatedArray(1, "cc", 0.5, link), g0)
            if not abs(ec1 / single - 1) <= 1e-9:
                failures.append(f"M=1 ec m={m} {g} dB")
            if not abs(cc1 / single - 1) <= 1e-6:
                failures.append(f"M=1 cc m={m} {g} dB: {cc1 / single - 1:.2e}")
    if any(ec_lambda(M, 0.0) != M for M in range(1, 33)):
        failures.append("ec_lambda(M, 0) != M")
    params = GameParams(steepness=0.1, revenue_weight=3e4, helper_cost=1.0, gamma0=0.1)
    for g0 in (0.1, 1.0, 7.3):
        if satisfaction(g0, GameParams(0.1, 3e4, 1.0, g0)) != 0.5:
            failures.append(f"satisfaction({g0}) != 0.5")
    if satisfaction(params.gamma0, params) != 0.5:
        failures.append("satisfaction(gamma0) != 0.5")
    report(3, not failures,
           "rho=1e-6 matches i.i.d. MRC to 1e-3; M=1 matches the Gamma CDF (EC 1e-9, CC quadrature 1e-6); "
           "ec_lambda(M,0)=M; satisfaction(gamma0)=0.5" + ("" if not failures else " -- " + "; ".join(failures)))


def test_criterion_04_packet_map():
    p5, p20 = packet_error_from_block(0.09, 5), packet_error_from_block(0.09, 20)
    err = max(abs(p5 - (1 - 0.91 ** 5)), abs(p20 - (1 - 0.91 ** 20)))
    ok = err < 1e-12 and round(p5, 3) == 0.376 and round(p20, 3) == 0.848
    report(4, ok,
           f"1-(1-0.09)^L: L=5 -> {p5:.6f}, L=20 -> {p20:.6f}, max error {err:.1e} (limit 1e-12); "
           f"the 0.4-at-L=20 figure does not follow from this map and is not pinned")


FACTORIAL_AXES = {
    # axis: (three levels around the default, +1 non-decreasing / -1 non-increasing)
    "gamma0": ([db_to_linear(v) for v in (-15, -10, -5)], +1),
    "L": ([5, 10, 20], +1),
    "rho": ([0.05, 0.1, 0.2], +1),
    "d_first": ([12.0, 17.319, 25.0], +1),
    "d_second": ([12.0, 17.319, 25.0], +1),
    "snr": ([db_to_linear(v) for v in (22, 25, 28)], -1),
    "n_helpers": ([3, 5, 8], -1),
    "antennas": ([5, 10, 15], -1),
}


def test_criterion_05_monotonicity():
    from conftest import default_scenario

    evals = 0

    def pep(model, **kw):
        nonlocal evals
        evals += 1
        L = kw.pop("L", 10)
        return packet_error_prob(default_scenario(model, **kw), L)

    t0 = time.perf_counter()
    bad = []
    for model in ("cc", "ec"):
        for axis, (levels, sign) in FACTORIAL_AXES.items():
            # cross each axis with three levels of a second factor
            other = "snr" if axis == "gamma0" else "gamma0"
            for o in FACTORIAL_AXES[other][0]:
                vals = [pep(model, **{axis: v, other: o}) for v in levels]
                if not all(sign * (b - a) >= 0 for a, b in zip(vals, vals[1:])):
                    bad.append(f"{model} {axis} at {other}={o:.3g}")
    elapsed = time.perf_counter() - t0
    report(5, not bad and evals <= 200 and elapsed < 5,
           f"3-level factorial, 8 axes x 3 levels of a second factor, both models: {evals} evaluations "
           f"(limit 200), {elapsed:.2f} s (limit 5 s)" + ("" if not bad else " -- violations: " + ", ".join(bad)))


def test_criterion_06_game_foc():
    worst = dict(split=0.0, foc=0.0, argmax=0.0)
    concave = True
    for ch, p in instances(100, 2024):
        g1, g2 = hop_snrs(optimal_phi(ch), 1.0, ch, complement=relay_share(ch))
        worst["split"] = max(worst["split"], abs(g1 - g2) / g1)
        P = optimal_power(ch, p)
        worst["foc"] = max(worst["foc"], abs(source_marginal(P, ch, p)))
        worst["argmax"] = max(worst["argmax"], abs(P / golden_argmax(ch, p) - 1))
        concave &= second_difference(ch, p, P) < 0
    ok = worst["split"] < 1e-12 and worst["foc"] <= 1e-9 and worst["argmax"] <= 1e-6 and concave
    report(6, ok,
           f"100 random feasible instances: hop-SNR mismatch {worst['split']:.1e} (limit 1e-12), "
           f"|dU_s/dP| at P* {worst['foc']:.1e} (limit 1e-9), P* vs golden-section argmax {worst['argmax']:.1e} "
           f"(limit 1e-6), second difference negative at P*: {concave}")


def test_criterion_07_derivative():
    rng = np.random.default_rng(77)
    worst = 0.0
    for ch, p in instances(20, 7007):
        P = optimal_power(ch, p) * rng.uniform(0.2, 2.0)
        h = 1e-6 * P
        fd = (utility_source(P + h, ch, p) - utility_source(P - h, ch, p)) / (2 * h)
        an = source_marginal(P, ch, p)
        worst = max(worst, abs(an - fd) / max(abs(an), abs(fd)))
    report(7, worst <= 1e-6,
           f"analytic dU_s/dP vs centered difference (step 1e-6 P) at 20 random points: "
           f"max relative gap {worst:.1e} (limit 1e-6)")


def test_criterion_08_fig6_trend():
    recipe = load_recipe("fig6")
    result = run_recipe(recipe)

    def curve(label):
        columns, rows = result[label]
        i, j = columns.index("power_star_db"), columns.index("model")
        return [r[i] for r in rows if r[j] == "cc"]

    near, far = curve("dsR=25"), curve("dsR=100")
    rise = far[0] - near[0]
    ends = [curve(s["label"])[-1] for s in recipe["series"]]
    spread = max(ends) - min(ends)
    report(8, 3.0 <= rise <= 7.0 and spread < 1.0,
           f"fig6 recipe (CC): P*(d_sR=100) - P*(d_sR=25) at d1=10 m = {rise:.3f} dB (range [3, 7]); "
           f"spread of all curves at d1=200 m = {spread:.3f} dB (limit 1)")


def test_criterion_09_sampler():
    t0 = time.perf_counter()
    n = 10 ** 6
    failures = []
    worst_corr, min_p = 0.0, 1.0
    configs = list(itertools.product((0.1, 0.5, 0.9), (2, 5, 10), (1.0, 2.0), ("cc", "ec")))
    for k, (rho, M, m, model) in enumerate(configs):
        arr = CorrelatedArray(M, model, rho, FadingLink(m, 1.0))
        g = sample_correlated_gains(arr, RngSpec(909, k).generator(), size=n)
        ks = stats.kstest(g[:, 0], stats.gamma(a=m, scale=1.0 / m).cdf)
        min_p = min(min_p, ks.pvalue)
        target = np.abs(gaussian_corr_matrix(arr)) ** 2
        err = np.max(np.abs(np.corrcoef(g.T) - target))
        worst_corr = max(worst_corr, err)
        if ks.pvalue <= 0.01 or err > 0.02:
            failures.append(f"{model} rho={rho} M={M} m={m}: KS p={ks.pvalue:.3g}, corr err {err:.3g}")
    elapsed = time.perf_counter() - t0
    report(9, not failures and elapsed < 120,
           f"{len(configs)} configurations (rho x M x m x model), 1e6 draws each: min KS p-value {min_p:.3g} "
           f"(limit 0.01), max power-correlation error {worst_corr:.4f} (limit 0.02), {elapsed:.0f} s (limit 120 s)"
           + ("" if not failures else " -- " + "; ".join(failures)))


def test_criterion_10_determinism(tmp_path, capsys):
    outs = []
    for i, workers in enumerate((1, 1, 2, 8)):
        path = tmp_path / f"run{i}.csv"
        code = cli.main(["validate", "--seed", "2024", "--trials", "100000",
                         "--sweep", "gamma0_db:-20:0:5", "--workers", str(workers), "--out", str(path)])
        outs.append((code, path.read_bytes()))
    capsys.readouterr()
    same = all(o == outs[0][1] for _, o in outs)
    report(10, same and all(c == 0 for c, _ in outs),
           "validate with seed 2024 run twice with 1 worker and again with 2 and 8 workers: "
           f"{'byte-identical' if same else 'outputs differ'} ({len(outs[0][1])} bytes)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
