"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they are
also collected into the terminal summary by ``conftest.py``.
"""

import itertools
import math

import numpy as np
import pytest

from monoflow import cli
from monoflow import dynamics as D
from monoflow import integrator as I
from monoflow import operators as ops
from monoflow import schedules as S
from monoflow.oracle import PathOracle, min_norm_zero, path_lipschitz_check, regularized_zero
from monoflow.problems import build_sfp, build_vi, build_vi_literal, synthetic_ball_shift, synthetic_shift

RESULTS: dict[int, tuple[bool, str]] = {}

SFP_CELLS = list(itertools.product((0.5, 1.0), (0.15, 0.3)))   # (lambda, gamma)
SFP_HORIZON = 200.0
SFP_EPS = S.power_law(1.0, 0.5)


def report(number: int, title: str, passed: bool, detail: str):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number} ({title}): {detail}"
    RESULTS[number] = (passed, line)
    print(line)
    assert passed, line


def _sfp_run(sfp, variant, lam, gamma, eps=SFP_EPS, t_end=SFP_HORIZON):
    s = S.ScheduleSet(eps, S.constant(lam), S.constant(gamma), sfp.beta)
    spec = D.FieldSpec(variant, s, sfp.A, sfp.B)
    return spec, I.integrate(spec, sfp.x0, I.IntegratorOpts(t_end=t_end, sample_every=0.5))


@pytest.fixture(scope="module")
def sfp():
    return build_sfp()


@pytest.fixture(scope="module")
def sfp_runs(sfp):
    return {(v, lam, g): _sfp_run(sfp, v, lam, g)[1]
            for v in ("FB_outer", "FB_inner") for lam, g in SFP_CELLS}


def test_criterion_01_sfp_min_norm_convergence(sfp, sfp_runs):
    norms = {k: float(t.norm_x[-1]) for k, t in sfp_runs.items()}
    regularized_ok = all(n <= 0.05 for n in norms.values())
    plain = {}
    for lam, g in SFP_CELLS:
        traj = _sfp_run(sfp, "FB_inner", lam, g, eps=S.constant(0.0))[1]
        plain[(lam, g)] = (float(traj.norm_f[-1]), float(traj.norm_x[-1]))
    plain_ok = all(f < 1e-6 and n >= 0.1 for f, n in plain.values())
    worst = max(norms, key=norms.get)
    detail = (f"max ||x(T)|| = {norms[worst]:.3g} at {worst[0]} lambda={worst[1]} gamma={worst[2]} (<= 0.05); "
              f"unregularized: max field {max(f for f, _ in plain.values()):.1e} (< 1e-6), "
              f"min ||x|| {min(n for _, n in plain.values()):.3f} (>= 0.1)")
    report(1, "SFP minimum-norm convergence", regularized_ok and plain_ok, detail)


def test_criterion_02_oracle_agreement(sfp, sfp_runs):
    est = min_norm_zero(sfp.A, sfp.B)
    oracle_ok = np.linalg.norm(est.x_star) <= 1e-3
    dists = {(lam, g): float(np.linalg.norm(sfp_runs[("FB_inner", lam, g)].final - est.x_star))
             for lam, g in SFP_CELLS}
    worst = max(dists, key=dists.get)
    detail = (f"||min_norm_zero(sfp)|| = {np.linalg.norm(est.x_star):.2e} (<= 1e-3); "
              f"max FB_inner distance {dists[worst]:.3g} at lambda={worst[0]} gamma={worst[1]} (<= 2e-2)")
    report(2, "oracle agreement", oracle_ok and max(dists.values()) <= 2e-2, detail)


def test_criterion_03_vi_sweep():
    cfg = cli.RunConfig(problem="vi_paper_literal", variant="FBF_reg", lam="const(1)", t_end=3000.0,
                        decays=[0.0, 0.1, 0.5, 0.9], gammas=[0.2, 0.5])
    rows = {(r["decay"], r["gamma"]): r for r in cli.execute_sweep(cfg)}
    ttt = {k: r["time_to_tol"] for k, r in rows.items()}
    amp = {k: r["amplitude_x1"] for k, r in rows.items()}
    failures = [k for k, r in rows.items() if r["status"] != "ok" or not math.isfinite(r["time_to_tol"])]
    for g in (0.2, 0.5):
        if not ttt[(0.1, g)] < ttt[(0.9, g)] < ttt[(0.0, g)]:
            failures.append(("decay order", g))
        # regularization strength: none (0) < fast decay (0.9) < 0.5 < slow decay (0.1)
        strength = [amp[(d, g)] for d in (0.0, 0.9, 0.5, 0.1)]
        if not all(a > b for a, b in zip(strength, strength[1:])):
            failures.append(("amplitude", g))
    for d in (0.1, 0.5):
        if not ttt[(d, 0.5)] < ttt[(d, 0.2)]:
            failures.append(("step order", d))
    detail = "time-to-0.1: " + ", ".join(f"({d:g},{g:g})={ttt[(d, g)]:g}" for d, g in sorted(ttt))
    if failures:
        detail += f"; violations {failures}"
    report(3, "VI qualitative reproduction", not failures, detail)


def test_criterion_04_energy_audits(sfp):
    worst_fb = -math.inf
    oracle = PathOracle(sfp.A, sfp.B)
    for lam, g in SFP_CELLS:
        spec, traj = _sfp_run(sfp, "FB_inner", lam, g, t_end=50.0)
        worst_fb = max(worst_fb, I.lyapunov_audit(traj, spec, oracle).max_violation)
    worst_fbf = -math.inf
    for p in (build_vi(), build_vi_literal()):
        vi_oracle = PathOracle(p.A, p.B)
        for g in (0.2, 0.5):
            s = S.ScheduleSet(S.power_law(1.0, 0.5), S.constant(1.0), S.constant(g), p.beta)
            spec = D.FieldSpec("FBF_reg", s, p.A, p.B)
            traj = I.integrate(spec, p.x0, I.IntegratorOpts(t_end=100.0, sample_every=0.5))
            worst_fbf = max(worst_fbf, I.lyapunov_audit(traj, spec, vi_oracle).max_violation)
    detail = f"FB_inner max violation {worst_fb:.2e}, FBF_reg max violation {worst_fbf:.2e} (<= 1e-6)"
    report(4, "energy inequality audits", worst_fb <= 1e-6 and worst_fbf <= 1e-6, detail)


def test_criterion_05_fbf_field_bounds():
    problems = (build_sfp(), build_vi(), build_vi_literal())
    worst_ratio, worst_split, worst_r20, monotone = 0.0, 0.0, 0.0, True
    for p in problems:
        X, Y = ops.sample_pairs(p.dim, n=10_000, seed=11)
        bound0 = D.fbf_step_bound(p.beta, 0.0)
        params = [(eps, frac * D.fbf_step_bound(p.beta, eps)) for eps in (0.0, 0.1, 1.0) for frac in (0.5, 0.99)]
        for i, (x, y) in enumerate(zip(X, Y)):
            eps, gamma = params[i % len(params)]
            v = D.fbf_regularized_field(p.A, p.B, gamma, eps, x) - D.fbf_regularized_field(p.A, p.B, gamma, eps, y)
            worst_ratio = max(worst_ratio, np.linalg.norm(v) / np.linalg.norm(x - y))
            gamma_s = 0.5 * bound0
            split = D.fbf_regularized_field(p.A, p.B, gamma_s, 0.3, x) - D.fbf_plain_field(p.A, p.B, gamma_s, x) \
                - D.fbf_residual(p.A, p.B, gamma_s, 0.3, x)
            worst_split = max(worst_split, float(np.linalg.norm(split)))
        ks = [k for k in range(1, 21) if 2.0 ** -k < D.fbf_step_bound(p.beta, 2.0 ** -k)]
        for x in X[:20]:
            x = p.C.project(x)
            norms = [np.linalg.norm(D.fbf_residual(p.A, p.B, 2.0 ** -k, 2.0 ** -k, x)) for k in ks]
            monotone &= bool(np.all(np.diff(norms) <= 0))
            worst_r20 = max(worst_r20, norms[-1])
    ok = worst_ratio <= math.sqrt(6) and worst_split <= 1e-10 and worst_r20 < 1e-3 and monotone
    detail = (f"max Lipschitz ratio {worst_ratio:.4f} (<= sqrt 6 = {math.sqrt(6):.4f}), decomposition error "
              f"{worst_split:.1e} (<= 1e-10), max ||R|| at k=20 {worst_r20:.1e} (< 1e-3), monotone={monotone}")
    report(5, "FBF field bounds", ok, detail)


def test_criterion_06_regularization_path():
    tol = 1e-10
    eps_values = [2.0 ** -k for k in range(0, 12)]
    holds = []
    for p in (build_sfp(), synthetic_shift([1.0, -2.0]), synthetic_ball_shift([3.0, 4.0])):
        rep = path_lipschitz_check(PathOracle(p.A, p.B, tol).path(eps_values), tol)
        holds.append((p.name, rep.holds, rep.max_excess))
    b = np.array([1.0, -2.0, 0.5])
    shift = synthetic_shift(b)
    closed = max(float(np.linalg.norm(regularized_zero(shift.A, shift.B, e, tol).x_eps - b / (1 + e)))
                 for e in (1.0, 0.5, 0.1, 1e-3))
    ok = all(h for _, h, _ in holds) and closed <= 1e-10
    detail = ", ".join(f"{n}: max excess {x:.1e}" for n, _, x in holds) + f" (slack {10 * tol:.0e}); " \
        f"closed-form error {closed:.1e} (<= 1e-10)"
    report(6, "regularization path", ok, detail)


def _rescale_gap(sfp, lam, t_end):
    eps = SFP_EPS
    T = sfp.forward_backward_map(0.15)
    spec = D.FieldSpec("KM_reg", S.ScheduleSet(eps, lam, S.constant(0.15), sfp.beta), T=T)
    x = I.integrate(spec, sfp.x0, I.IntegratorOpts(t_end=t_end, sample_every=0.01))
    s_end = S.tau2(lam, t_end)
    u = I.rescale_trajectory(x, lam, grid=np.linspace(0.0, s_end, 2001))
    inverse = S.inverse_time_map(lam, x.times)

    def unit(s, y):
        t = float(inverse(np.array([s]))[0])
        return T(y) - y - eps(t) / lam(t) * y

    direct = I.integrate(unit, sfp.x0, I.IntegratorOpts(t_end=s_end, sample_every=s_end / 2000))
    return float(np.max(np.abs(u.states - direct.states)))


def test_criterion_07_time_rescaling(sfp):
    gaps = {label: _rescale_gap(sfp, lam, 50.0)
            for label, lam in (("const(0.5)", S.constant(0.5)), ("1/(1+t)", S.power_law(1.0, 1.0)))}
    detail = ", ".join(f"lambda={k}: sup gap {v:.1e}" for k, v in gaps.items()) + " over t in [0, 50] (<= 1e-4)"
    report(7, "time rescaling", max(gaps.values()) <= 1e-4, detail)


def test_criterion_08_hypothesis_checker():
    th1 = S.check_hypotheses("th1_fb", S.ScheduleSet(S.power_law(1.0, 0.6), S.cosinv(0.0), S.constant(0.5), 0.5))
    vi_beta = build_vi().beta
    fbf = [S.check_hypotheses("fbf_conv", S.ScheduleSet(S.power_law(1.0, 0.5), S.constant(1.0), S.constant(g),
                                                         vi_beta)) for g in (0.2, 0.5)]
    main2 = S.check_hypotheses("main2", S.ScheduleSet(S.power_law(1.0, 2.0), S.constant(1.0), S.constant(0.1), 1.0))
    ok = th1.all_hold and all(r.all_hold for r in fbf) and main2.verdict("(i)") == "fails"
    detail = (f"th1_fb all hold={th1.all_hold}, fbf_conv gamma in {{0.2, 0.5}} all hold="
              f"{all(r.all_hold for r in fbf)}, main2 (i) with powerlaw(1,2) = {main2.verdict('(i)')}")
    report(8, "hypothesis checker", ok, detail)


def test_criterion_09_integrator_order():
    def decay(t, x):
        return -x

    errs = []
    for h in (0.1, 0.05, 0.025, 0.0125):
        traj = I.integrate(decay, [1.0], I.IntegratorOpts("rk4_fixed", t_end=1.0, step=h, sample_every=1.0))
        errs.append(abs(traj.final[0] - math.exp(-1.0)))
    factors = [a / b for a, b in zip(errs, errs[1:])]
    eps = S.power_law(1.0, 0.5)
    spec = D.FieldSpec("KM_reg", S.ScheduleSet(eps, S.constant(0.5), S.constant(0.1), 1.0), T=lambda x: x)
    x0 = np.array([3.0, -4.0])
    traj = I.integrate(spec, x0, I.IntegratorOpts(t_end=50.0, sample_every=0.5))
    # x' = -eps x gives x(t) = x0 exp(-int_0^t eps) with int_0^t (1 + s)^-1/2 ds = 2(sqrt(1 + t) - 1)
    want = np.outer(np.exp(-2.0 * (np.sqrt(1.0 + traj.times) - 1.0)), x0)
    rel = float(np.max(np.linalg.norm(traj.states - want, axis=1) / np.linalg.norm(want, axis=1)))
    ok = all(8 <= f <= 32 for f in factors) and rel <= 1e-5
    detail = f"RK4 halving factors {', '.join(f'{f:.2f}' for f in factors)} (in [8, 32]), " \
        f"closed-form relative error {rel:.1e} (<= 1e-5)"
    report(9, "integrator order", ok, detail)


def test_criterion_10_forward_invariance():
    ball = ops.ball(1.0, 2)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(8):
        x0 = ball.project(rng.uniform(-2, 2, 2))
        y = ball.project(rng.uniform(-2, 2, 2))
        s = S.ScheduleSet(S.power_law(1.0, 0.5), S.constant(1.0), S.constant(0.1), 1.0)
        spec = D.FieldSpec("KM_anchored", s, T=ball.project, anchor_y=y, domain_D=ball)
        traj = I.integrate(spec, x0, I.IntegratorOpts(t_end=50.0, sample_every=0.05))
        worst = max(worst, max(ball.distance(x) for x in traj.states))
    report(10, "forward invariance", worst <= 1e-6, f"max distance to D {worst:.1e} (<= 1e-6)")
