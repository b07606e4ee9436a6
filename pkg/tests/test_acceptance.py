"""Acceptance suite: every criterion at its stated tolerance.

Run with ``pytest -v -s tests/test_acceptance.py`` to see one pass/fail
line per criterion.
"""
import math
import time

import numpy as np

from srcond import minorant, moments, sweeps, torus
from srcond.specfun import bessel_j, first_bessel_zero


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{name}] {'PASS' if ok else 'FAIL'} {detail}")


def separated_instance(seed: int, d_max: int = 2):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, d_max + 1))
    n = float(rng.uniform(8.0, 15.0))
    q = float(rng.uniform(1.3, 1.8)) / n
    if d == 1:
        cap = int(0.45 / q)
    else:
        cap = int(0.45 / (math.pi * (q / 2.0) ** 2))
    count = int(rng.integers(2, max(3, min(8, cap) + 1)))
    Y = torus.gen_random_separated(d, q, count, int(rng.integers(2**31)))
    return d, n, Y


def test_c01_bessel_constants():
    start = time.perf_counter()
    z_half = first_bessel_zero(0.5)
    z_one = first_bessel_zero(1)
    z_zero = first_bessel_zero(0)
    elapsed = time.perf_counter() - start

    ok_half = abs(z_half - math.pi) <= 1e-12
    # four significant digits against the independently known ratios
    ok_one = round(z_one / math.pi, 3) == 1.220 and abs(
        z_one / math.pi - 1.2196698912665045) < 5e-5
    ok_zero = round(2 * z_zero / math.pi, 3) == 1.531 and abs(
        2 * z_zero / math.pi - 1.5309594991254565) < 5e-5
    ok_res = all(abs(bessel_j(nu, first_bessel_zero(nu))) < 1e-11
                 for nu in (-0.5, 0.0, 0.5, 1.0, 1.5, 2.0))
    ok_time = elapsed < 1.0
    ok = ok_half and ok_one and ok_zero and ok_res and ok_time
    report("criterion 1", ok,
           f"j_1/pi={z_one / math.pi:.6f}, 2 j_0/pi={2 * z_zero / math.pi:.6f}, "
           f"|j_half - pi|={abs(z_half - math.pi):.2e}, {elapsed:.2f}s")
    assert ok


def test_c02_fim_equality_clause():
    start = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        d, n, Y = separated_instance(seed)
        I = moments.index_set(d, n)
        delta = 0.5 + 0.02 * seed / 10.0
        J = moments.fisher_information(Y, moments.unit_weights(len(Y)), delta, I)
        G = moments.block_jacobian(Y, moments.unit_weights(len(Y)), I).matrix
        lhs = delta**2 * J.lambda_min()
        rhs = moments.sigma_min(G) ** 2
        worst = max(worst, abs(lhs - rhs) / rhs)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 30.0
    report("criterion 2", ok, f"worst relative gap {worst:.2e} over 100 instances, "
                              f"{elapsed:.1f}s")
    assert ok


def test_c03_weight_inequality():
    rng = np.random.default_rng(123)
    violations = 0
    worst = 0.0
    for seed in range(100):
        d, n, Y = separated_instance(seed + 10_000)
        mods = rng.uniform(0.1, 1.0, len(Y))
        w = moments.WeightVector(mods * np.exp(2j * np.pi * rng.random(len(Y))))
        lower, lam = moments.weight_floor_bound(Y, w, 1.2, moments.index_set(d, n))
        slack = (lower - lam) / max(lam, 1e-300)
        worst = max(worst, slack)
        if lam < lower - 1e-8 * lam:
            violations += 1
    ok = violations == 0
    report("criterion 3", ok, f"{violations} violations, worst slack {worst:.2e}")
    assert ok


def test_c04_vandermonde_upper_bound():
    violations = 0
    for seed in range(100):
        d, n, Y = separated_instance(seed + 20_000)
        block_sq, vand_sq = moments.vandermonde_upper_bound(Y, moments.index_set(d, n))
        if block_sq > vand_sq + 1e-8 * vand_sq:
            violations += 1
    ok = violations == 0
    report("criterion 4", ok, f"{violations} violations over 100 instances")
    assert ok


def test_c05_admissibility_certification():
    start = time.perf_counter()
    failures = []
    for d in (1, 2, 3):
        for tau in (0.05, 0.1, 0.5):
            model = minorant.MinorantModel.build(d, tau)
            rep = minorant.certify_admissibility(model, 2000)
            if not rep.passed:
                failures.append((d, tau))
    zero_model = minorant.MinorantModel.build(1, 0.0)
    zero_rep = minorant.certify_admissibility(zero_model, 2000)
    zero_ok = (not zero_rep.passed) and (not zero_rep.clause("origin_maximum").passed)
    elapsed = time.perf_counter() - start
    ok = not failures and zero_ok and elapsed < 120.0
    report("criterion 5", ok,
           f"failures={failures}, tau=0 fails clause ii: {zero_ok}, {elapsed:.1f}s")
    assert ok


def test_c06_golden_closed_forms(model_factory):
    m = model_factory(1, 0.1)
    rs = np.linspace(0.0, 0.4999, 1000)
    phi_err = float(np.max(np.abs(
        minorant.phi(m, rs) - (1 + np.cos(2 * np.pi * rs)))))
    h0_err = abs(minorant.autocorrelation(m, 0.0) - 1.5)
    hat0_err = abs(minorant.phi_hat(m, 0.0) - 1.0)
    ok = phi_err <= 1e-8 and h0_err <= 1e-8 and hat0_err <= 1e-8
    report("criterion 6", ok,
           f"|phi - (1+cos)|={phi_err:.2e}, |h(0)-3/2|={h0_err:.2e}, "
           f"|phi_hat(0)-1|={hat0_err:.2e}")
    assert ok


def test_c07_bound_campaigns():
    start = time.perf_counter()
    summaries = []
    all_ok = True
    for d, tau in ((1, 0.21), (2, 0.1)):
        rep = sweeps.run_bound_campaign(d, tau, [10.0, 20.0, 40.0],
                                        trials=20, seed=7)
        all_ok = all_ok and rep.passed and rep.envelope > 0.0
        summaries.append(
            f"d={d}: pass={rep.passed}, min sigma^2/n^d={rep.envelope:.4f}"
        )
    elapsed = time.perf_counter() - start
    ok = all_ok and elapsed < 600.0
    report("criterion 7", ok, "; ".join(summaries) + f", {elapsed:.1f}s")
    assert ok


def test_c08_poisson_decomposition(model_factory):
    rng = np.random.default_rng(31)
    checked = 0
    worst_s1 = worst_s4 = worst_cross = 0.0

    m1 = model_factory(1, 0.21)
    for i in range(12):
        n = float((3, 4, 5)[i % 3])
        # three points at separation 1.1/4 can strand rejection sampling,
        # so the third node only enters at n = 5
        count = 2 if n < 5 else 3
        Y = torus.gen_random_separated(1, m1.support_radius / n, count,
                                       int(rng.integers(2**31)))
        u = rng.standard_normal((2 * count,)) + 1j * rng.standard_normal((2 * count,))
        # fix the block energies (0.7 weights, 0.3 nodes): the truncation
        # radius the k^2-weighted tail demands scales with their ratio
        u[:count] *= math.sqrt(0.7) / np.linalg.norm(u[:count])
        u[count:] *= math.sqrt(0.3) / np.linalg.norm(u[count:])
        K = minorant.suggest_k_max(m1, Y, u, n)
        rep = minorant.poisson_decomposition(m1, Y, u, n, K)
        worst_s1 = max(worst_s1, abs(rep.s_freq[0] - rep.s_real[0]) / abs(rep.s_real[0]))
        worst_s4 = max(worst_s4, abs(rep.s_freq[3] - rep.s_real[3]) / abs(rep.s_real[3]))
        worst_cross = max(worst_cross,
                          abs(rep.s_freq[1]) / rep.tail_estimate if rep.tail_estimate else 0.0)
        assert abs(rep.s_freq[1]) <= rep.tail_estimate
        assert abs(rep.s_freq[2]) <= rep.tail_estimate
        checked += 1

    m2 = model_factory(2, 0.1)
    for i in range(8):
        n = float((3, 4)[i % 2])
        count = int(rng.integers(2, 6))
        Y = torus.gen_random_separated(2, m2.support_radius / n, count,
                                       int(rng.integers(2**31)))
        u = np.zeros(3 * count, dtype=complex)
        u[:count] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
        u /= np.linalg.norm(u)
        K = minorant.suggest_k_max(m2, Y, u, n)
        rep = minorant.poisson_decomposition(m2, Y, u, n, K)
        worst_s1 = max(worst_s1, abs(rep.s_freq[0] - rep.s_real[0]) / abs(rep.s_real[0]))
        assert rep.s_freq[3] == rep.s_real[3] == 0.0
        assert abs(rep.s_freq[1]) <= rep.tail_estimate
        assert abs(rep.s_freq[2]) <= rep.tail_estimate
        checked += 1

    ok = checked == 20 and worst_s1 <= 1e-4 and worst_s4 <= 1e-4
    report("criterion 8", ok,
           f"{checked} instances; worst S1 rel {worst_s1:.2e}, "
           f"worst S4 rel {worst_s4:.2e}")
    assert ok


def test_c09_phase_transition(tmp_path):
    start = time.perf_counter()
    cfg = sweeps.SweepConfig(
        dim=2, bandlimit=20.0,
        separation_grid=[0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6],
        count_grid=[19], generator="hex", seeds=[0], tau=0.0,
        output_path=str(tmp_path / "phase.csv"),
    )
    result = sweeps.run_sweep(cfg)
    sweeps.emit_csv(result, cfg.output_path)
    proxies = {row.nominal_sep_n: row.proxy for row in result.rows}
    seps = sorted(proxies)
    logs = [math.log10(proxies[s]) for s in seps]
    jumps = [abs(logs[i + 1] - logs[i]) for i in range(len(logs) - 1)]
    steep_mid = 0.5 * (seps[int(np.argmax(jumps))] + seps[int(np.argmax(jumps)) + 1])
    ratio = proxies[0.9] / proxies[1.4]
    elapsed = time.perf_counter() - start

    steep_ok = steep_mid < 1.22
    ratio_ok = ratio >= 10.0
    ok = steep_ok and ratio_ok and elapsed < 600.0
    report("criterion 9", ok,
           f"proxy(0.9)/proxy(1.4)={ratio:.2f} (need >= 10), steep growth at "
           f"sep*n={steep_mid:.2f} (need < 1.22), {elapsed:.1f}s")
    assert steep_ok, f"steepest growth at {steep_mid}, expected left of 1.22"
    assert ratio_ok, (
        f"proxy ratio {ratio:.2f} < 10 for 19 hex nodes at n=20; the contrast "
        f"this criterion expects only emerges at larger node counts "
        f"(about 61 nodes at this bandlimit)"
    )


def test_c09_phase_transition_attainable_scale(tmp_path):
    """The 10x contrast of the transition, at the node count where it shows."""
    start = time.perf_counter()
    cfg = sweeps.SweepConfig(
        dim=2, bandlimit=20.0, separation_grid=[0.8, 0.9, 1.1, 1.2, 1.4, 1.6],
        count_grid=[61], generator="hex", seeds=[0], tau=0.0,
        output_path=str(tmp_path / "phase61.csv"),
    )
    result = sweeps.run_sweep(cfg)
    proxies = {row.nominal_sep_n: row.proxy for row in result.rows}
    ratio = proxies[0.9] / proxies[1.4]
    seps = sorted(proxies)
    logs = [math.log10(proxies[s]) for s in seps]
    jumps = [abs(logs[i + 1] - logs[i]) for i in range(len(logs) - 1)]
    steep_mid = 0.5 * (seps[int(np.argmax(jumps))] + seps[int(np.argmax(jumps)) + 1])
    elapsed = time.perf_counter() - start
    ok = ratio >= 10.0 and steep_mid < 1.22 and elapsed < 600.0
    report("criterion 9 (61 nodes)", ok,
           f"proxy(0.9)/proxy(1.4)={ratio:.2f}, steep at {steep_mid:.2f}, {elapsed:.1f}s")
    assert ok


def test_c10_derivative_structure(model_factory):
    failures = []
    for d in (2, 3):
        for tau in (0.1, 0.5):
            rep = minorant.radial_derivative_check(model_factory(d, tau))
            if not rep.passed:
                failures.append((d, tau))
    ok = not failures
    report("criterion 10", ok, f"failures={failures}")
    assert ok
