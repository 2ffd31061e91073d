"""Acceptance criteria 1-9, one test each.

Each test records a single PASS/FAIL line (shown in the terminal summary)
and then asserts the same condition.
"""
import json
import math
import time

import numpy as np
from scipy import stats

from qharness import cli, densities as D, sampler as SM, solver as SV, standardize as ST, verify as V
from qharness.processes import Dirichlet, FourParam, Secant, ThreeParam, TwoParam
from qharness.solver import InfeasibleError, SolveRequest

from oracles import cdf_oracle

# one member of each of the five families
FIVE = [FourParam(1, 1, 1, 1), ThreeParam(1, 1, 1), TwoParam(0.75 + 0.3j, 0.75 - 0.3j), Secant(0.3),
        Dirichlet(2.0)]


def test_criterion_1_normalization(acceptance_line):
    worst, slowest = 0.0, 0.0
    for fam in FIVE:
        t0 = time.perf_counter()
        rep = V.check_normalization(fam, V.default_grid(fam), tol=1e-8)
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, rep.max_residual)
    ok = worst <= 1e-8 and slowest < 1.0
    assert acceptance_line(1, ok, f"max |integral - 1| = {worst:.2e} (tol 1e-8), slowest check {slowest:.2f} s")


def test_criterion_2_moments(acceptance_line):
    worst = max(V.check_moments(fam, V.default_grid(fam), tol=1e-7).max_residual for fam in FIVE)
    worked = [
        D.wilson_mean(D.ParamQuadruple(1, 1, 1, 1)) - 1,
        D.wilson_var(D.ParamQuadruple(1, 1, 1, 1)) - 0.8,
        D.threeparam_mean(1, 1, 1) - 3,
        D.threeparam_var(1, 1, 1) - 8,
        D.hahn_var(D.HahnParams(1, 1)) - 0.2,
        D.secant_var(D.SecantParams(1, 0.0)) - 0.5,
    ]
    wmax = max(abs(w) for w in worked)
    ok = worst <= 1e-7 and wmax <= 1e-14
    assert acceptance_line(2, ok, f"max relative moment residual {worst:.2e} (tol 1e-7), "
                                  f"worked values off by {wmax:.1e}")


def test_criterion_3_chapman_kolmogorov(acceptance_line):
    t0 = time.perf_counter()
    worst = max(V.check_chapman(fam, *V.default_grid(fam), tol=1e-6).max_residual for fam in FIVE)
    took = time.perf_counter() - t0
    ok = worst <= 1e-6 and took < 30
    assert acceptance_line(3, ok, f"max relative CK residual {worst:.2e} (tol 1e-6) in {took:.1f} s")


def test_criterion_4_pivot_identities(acceptance_line):
    rng = np.random.default_rng(SM.DEFAULT_SEED)
    worst = 0.0
    for fam in FIVE:
        rep = V.check_pivot_identity(fam, V.random_pivot_points(fam, 100, rng), tol=1e-10)
        assert rep.grid["points"] == 100
        worst = max(worst, rep.max_residual)
    ok = worst <= 1e-10
    assert acceptance_line(4, ok, f"max log-residual {worst:.2e} over 5 x 100 points (tol 1e-10)")


def _standardization_grid():
    fams = []
    for a in (0.3, 1.0, 2.2):
        for b in (0.5, 1.7):
            fams.append(FourParam(a, b, 0.8, 1.3))
            fams.append(FourParam(complex(a, b), complex(a, -b), 0.9, 0.4))
            fams.append(FourParam(complex(a, b), complex(a, -b), complex(b, 0.6), complex(b, -0.6)))
            fams.append(ThreeParam(a, max(b, 0.7), min(b, 0.7)))
            fams.append(ThreeParam(a, complex(b, 1.1), complex(b, -1.1)))
            fams.append(TwoParam(complex(a, b), complex(b, -a)))
            fams.append(Secant(b - a))
            fams.append(Dirichlet(a * b))
    return fams


def test_criterion_5_standardization(acceptance_line):
    worst_p, worst_g, worst_d = 0.0, 0.0, 0.0
    for fam in _standardization_grid():
        proc, p = ST.standardize(fam)
        q = ST.harness_params(fam)
        worst_p = max(worst_p, max(abs(a - b) / max(1.0, abs(b)) for a, b in zip(p.as_tuple(), q.as_tuple())))
        worst_g = max(worst_g, abs(p.gamma - (1 + 2 * proc.input.epsilon * math.sqrt(p.sigma * p.tau))))
        closed = ST.closed_form_domain(fam)
        for a, b in ((proc.domain.lo, closed.lo), (proc.domain.hi, closed.hi)):
            if a != b:
                worst_d = max(worst_d, abs(a - b) / max(1.0, abs(b)))
    pairs, _ = ST.standardize(FourParam(0.5 + 1j, 0.5 - 1j, 0.5 + 0.5j, 0.5 - 0.5j))
    half_line = pairs.domain.as_tuple() == (0.0, math.inf)
    # "exactly" up to the last bit of the square root
    ok = worst_p <= 1e-12 and worst_d <= 1e-12 and worst_g <= 4e-16 and half_line
    assert acceptance_line(5, ok, f"params {worst_p:.1e}, domains {worst_d:.1e} (tol 1e-12); "
                                  f"gamma identity {worst_g:.1e}; two-pair T' = (0, inf): {half_line}")


def _random_requests(rng, per_track=50):
    out = []
    while len(out) < per_track:
        req = SolveRequest("four", rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.05, 0.95))
        try:
            out.append((req, SV.solve(req)))
        except InfeasibleError:
            continue
    for _ in range(per_track):
        req = SolveRequest("three", rng.uniform(0.05, 3), rng.uniform(0.05, 3))
        out.append((req, SV.solve(req)))
    for _ in range(per_track):
        s = rng.uniform(0.05, 0.95)
        req = SolveRequest("two", rng.uniform(-0.99, 0.99) * 2 * math.sqrt(s), sigma=s)
        out.append((req, SV.solve(req)))
    for _ in range(per_track):
        req = SolveRequest("dirichlet", sigma=rng.uniform(0.01, 0.99))
        out.append((req, SV.solve(req)))
    return out


def test_criterion_6_solver_round_trip(acceptance_line):
    rng = np.random.default_rng(SM.DEFAULT_SEED)
    pairs = _random_requests(rng)
    rt = max(SV.round_trip_residual(res, req) for req, res in pairs)
    cons = max(max(SV.four_constraint_residuals(res.family, req.eta, req.theta, req.sigma))
               for req, res in pairs if req.track == "four")
    infeasible = 0
    for _ in range(200):
        # eta theta >= 0 with eta + theta > 0 means both non-negative
        eta, theta = rng.uniform(0, 3, 2)
        try:
            SV.solve_four(eta, theta, rng.uniform(0.05, 0.95))
        except InfeasibleError:
            infeasible += 1
    ok = len(pairs) == 200 and rt <= 1e-10 and cons <= 1e-10 and infeasible == 0
    assert acceptance_line(6, ok, f"{len(pairs)} requests: round trip {rt:.1e}, constraints {cons:.1e} "
                                  f"(tol 1e-10); same-sign infeasible {infeasible}/200")


def test_criterion_7_empirical_harness(acceptance_line):
    worst, slowest, failed = 0.0, 0.0, []
    for fam, (s, t, u) in V.harness_cases():
        t0 = time.perf_counter()
        rep = V.check_harness_empirical(fam, s, t, u, n_paths=100_000, seed=SM.DEFAULT_SEED, tol=3.0)
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, rep.max_residual)
        if not rep.passed:
            failed.append(fam.tag)
    ok = not failed and slowest <= 300
    assert acceptance_line(7, ok, f"{len(V.harness_cases())} families at 1e5 paths: max |z| = {worst:.2f} "
                                  f"(tol 3), slowest {slowest:.0f} s" + (f", failed {failed}" if failed else ""))


def test_criterion_8_secant_bridge(acceptance_line):
    beta, S, U, yS, yU = 0.4, 0.25, 2.25, -0.5, 1.0
    times = (0.75, 1.25, 1.75)
    fam = Secant(beta)
    batch = SM.simulate_secant_bridge(beta, S, U, yS, yU, times, n_paths=10_000, rng=SM.DEFAULT_SEED)
    pvals = []
    for j, t in enumerate(times):
        m = fam.bridge_moments(S, t, U, yS, yU)
        cdf = cdf_oracle(lambda y: fam.bridge_log_pdf(S, t, U, yS, yU, y), "full-line", m.mean,
                         math.sqrt(m.variance))
        pvals.append(stats.kstest(batch.states[:, j], cdf).pvalue)
    ck = V.check_chapman(fam, *V.default_grid(fam), tol=1e-6)
    ok = min(pvals) > 0.01 and ck.passed
    assert acceptance_line(8, ok, f"bridge KS p-values {', '.join(f'{p:.3f}' for p in pvals)} (level 0.01); "
                                  f"semigroup residual {ck.max_residual:.1e} (tol 1e-6)")


def _capture(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr().out


def test_criterion_9_determinism(acceptance_line, capsys, tmp_path):
    runs = {
        "simulate csv": ["simulate", "--family", "fourparam", "--A", "1", "--B", "1", "--C", "1", "--D", "1",
                         "--times=-0.5,0,0.5", "--n-paths", "50", "--seed", "17"],
        "bridge csv": ["bridge", "--beta", "0.4", "--S", "0", "--U", "2", "--yS", "0", "--yU", "1",
                       "--times", "0.5,1,1.5", "--n-paths", "50", "--seed", "17"],
        "solve json": ["solve", "--track", "four", "--eta", "0.7", "--theta", "1.9", "--sigma", "0.3"],
        "verify json": ["verify", "--family", "dirichlet", "--A", "2", "--harness-times", "0.5", "1", "1.5",
                        "--n-paths", "2000", "--seed", "17"],
    }
    same = {}
    for name, argv in runs.items():
        outs = []
        for k in range(2):
            path = tmp_path / f"{name.replace(' ', '_')}_{k}"
            code, _ = _capture(argv + ["--out", str(path)], capsys)
            assert code == 0, name
            outs.append(path.read_bytes())
        same[name] = outs[0] == outs[1]
    json.loads((tmp_path / "verify_json_0").read_bytes())
    ok = all(same.values())
    assert acceptance_line(9, ok, "byte-identical reruns: " + ", ".join(f"{k} {v}" for k, v in same.items()))
