import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from legcap import SwingKernel
from legcap.capturability import (
    CapturabilityResult,
    Regime,
    RobotSpec,
    SolverOptions,
    StepSequence,
    _objective_and_grad,
    decision_boundary,
    disturbance_of_sequence,
    forward_check,
    max_disturbance,
    min_actuation,
    one_step_analytic,
    plan_steps,
    replay_plan,
    step_objective,
    unconstrained_optimum,
)
from legcap.kernel import ReachExceededError


def random_case(rng):
    n = int(rng.integers(1, 6))
    kernel = SwingKernel(rng.uniform(0.1, 10), rng.uniform(1, 3),
                         rng.uniform(0.1, 2))
    taus = rng.uniform(0, 1, n) * kernel.tau_max
    taus[0] = max(taus[0], 1e-6)
    return kernel, StepSequence(taus)


# ----------------------------------------------------------- closed form

def test_disturbance_examples():
    e = math.exp
    assert disturbance_of_sequence(SwingKernel(1, 1.66, 5),
                                   StepSequence([1.0])) == pytest.approx(e(-1))
    assert disturbance_of_sequence(SwingKernel(1, 2, 5),
                                   StepSequence([1.0, 1.0])) == pytest.approx(e(-1))
    seq = StepSequence([1.0, 2.0])
    kernel = SwingKernel(1, 1, 5)
    d = disturbance_of_sequence(kernel, seq)
    assert d == pytest.approx(e(-1) + e(-3), rel=1e-14)
    assert d == pytest.approx(0.417666, abs=1e-6)
    assert forward_check(kernel, seq, d) < 1e-14


def test_disturbance_reach_exceeded():
    with pytest.raises(ReachExceededError):
        disturbance_of_sequence(SwingKernel(1, 1, 1), StepSequence([1.5]))


def test_sequence_validation():
    for bad in ([], [0.0], [-1.0], [1.0, -0.1], [math.nan]):
        with pytest.raises(ValueError):
            StepSequence(bad)
    assert len(StepSequence([1.0, 0.0, 2.0])) == 3


def test_oracle_equivalence_random():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        kernel, seq = random_case(rng)
        d = disturbance_of_sequence(kernel, seq)
        # the replay amplifies the rounding of d by exp(sum tau)
        cond = max(1.0, d * math.exp(sum(seq.taus)))
        assert forward_check(kernel, seq, d) < 1e-12 * cond


def test_replay_limited_by_resolution_of_d():
    # over the full reach range the replay error tracks the rounding of d
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        kernel = SwingKernel(rng.uniform(0.1, 10), rng.uniform(1, 3),
                             rng.uniform(0.1, 2))
        seq = StepSequence((1.0 - rng.random(n)) * kernel.tau_max)
        d = disturbance_of_sequence(kernel, seq)
        floor = 0.5 * np.spacing(d) * math.exp(sum(seq.taus))
        assert forward_check(kernel, seq, d) <= 1e-12 + 16 * floor


def test_step_objective_matches_double_sum():
    rng = np.random.default_rng(3)
    for _ in range(200):
        kernel, seq = random_case(rng)
        unit = SwingKernel(1.0, kernel.a)
        expected = disturbance_of_sequence(unit, seq)
        assert step_objective(seq.taus, kernel.a) == pytest.approx(expected,
                                                                   rel=1e-12)
    batch = rng.uniform(0, 2, (50, 3))
    batch[:, 0] += 0.01
    np.testing.assert_allclose(step_objective(batch, 1.66),
                               [step_objective(r, 1.66) for r in batch],
                               rtol=1e-14)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.uniform(0.2, 3, int(rng.integers(1, 6)))
        a = rng.uniform(1, 3)
        _, grad = _objective_and_grad(list(x), a)
        h = 1e-6
        numeric = [(step_objective(x + h * e, a) - step_objective(x - h * e, a))
                   / (2 * h) for e in np.eye(len(x))]
        np.testing.assert_allclose(grad, numeric, rtol=1e-6, atol=1e-9)


def test_forward_check_perturbation():
    rng = np.random.default_rng(1)
    for _ in range(100):
        kernel, seq = random_case(rng)
        d = disturbance_of_sequence(kernel, seq)
        res = forward_check(kernel, seq, d + 0.01)
        assert res == pytest.approx(0.01 * math.exp(sum(seq.taus)), rel=1e-9)


def test_forward_check_one_step_exact():
    kernel = SwingKernel(1.0, 1.0, 10.0)
    tau = 1.0
    d = kernel.eval(tau) * math.exp(-tau)
    assert forward_check(kernel, StepSequence([tau]), d) < 1e-15


def test_forward_check_negative_push_is_mirror():
    kernel, seq = SwingKernel(2.0, 1.66, 3.0), StepSequence([0.8, 1.1])
    d = disturbance_of_sequence(kernel, seq)
    assert forward_check(kernel, seq, -d) < 1e-14


@settings(max_examples=50)
@given(k=st.floats(0.1, 10), c=st.floats(0.1, 10), a=st.floats(1, 3),
       taus=st.lists(st.floats(0.01, 3), min_size=1, max_size=5))
def test_linear_in_k(k, c, a, taus):
    seq = StepSequence(taus)
    base = disturbance_of_sequence(SwingKernel(k, a), seq)
    scaled = disturbance_of_sequence(SwingKernel(c * k, a), seq)
    assert scaled == pytest.approx(c * base, rel=1e-12, abs=1e-300)


@settings(max_examples=50)
@given(k=st.floats(0.1, 10), a=st.floats(1, 3), tau=st.floats(1e-3, 5))
def test_one_step_specialization(k, a, tau):
    kernel = SwingKernel(k, a)
    assert disturbance_of_sequence(kernel, StepSequence([tau])) == \
        kernel.eval(tau) * math.exp(-tau)


# ---------------------------------------------------------- one-step optimum

def grid_scan_one_step(kernel, points=1_000_000):
    taus = np.linspace(0, min(kernel.tau_max, 50.0), points)
    vals = kernel.k * taus ** kernel.a * np.exp(-taus)
    i = int(np.argmax(vals))
    return taus[i], vals[i]


def test_one_step_analytic_examples():
    tau, d = one_step_analytic(SwingKernel(1, 1.66, 10))
    g_tau, g_d = grid_scan_one_step(SwingKernel(1, 1.66, 10))
    assert tau == 1.66
    assert abs(tau - g_tau) < 1e-4 and d == pytest.approx(g_d, rel=1e-9)
    assert d == pytest.approx(0.441, abs=1e-3)

    clamped = SwingKernel(1, 1, 0.5)
    tau, d = one_step_analytic(clamped)
    g_tau, g_d = grid_scan_one_step(clamped)
    assert tau == 0.5 == g_tau
    assert d == pytest.approx(0.5 * math.exp(-0.5)) and d == pytest.approx(g_d)
    assert d == pytest.approx(0.30327, abs=1e-5)

    assert one_step_analytic(SwingKernel(1e-300, 1.66, 1))[1] < 1e-299


def test_max_disturbance_one_step_matches_analytic():
    rng = np.random.default_rng(11)
    for _ in range(20):
        kernel = SwingKernel(rng.uniform(0.1, 10), rng.uniform(1, 3),
                             rng.uniform(0.1, 5))
        res = max_disturbance(kernel, 1)
        tau, d = one_step_analytic(kernel)
        assert res.sequence.taus[0] == pytest.approx(tau, abs=1e-6)
        assert res.d == pytest.approx(d, abs=1e-6)
        expected = Regime.STEP_LENGTH if kernel.tau_max < kernel.a \
            else Regime.STEP_TIME
        assert res.regime is expected


def test_max_disturbance_n2_regimes():
    a = 1.66
    interior = max_disturbance(SwingKernel(1, a, 9), 2)
    assert interior.regime is Regime.STEP_TIME
    assert interior.d == pytest.approx(0.48914, abs=1e-5)
    assert all(t < (9.0) ** (1 / a) for t in interior.sequence.taus)

    corner = max_disturbance(SwingKernel(1, a, 1), 2)
    assert corner.regime is Regime.STEP_LENGTH
    np.testing.assert_allclose(corner.sequence.taus, 1.0, rtol=1e-6)
    # brute-force check over the box
    g = np.linspace(1e-3, 1.0, 801)
    mesh = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)
    assert corner.d >= step_objective(mesh, a).max() - 1e-12


def test_max_disturbance_beats_dense_grid():
    for k, l, n in [(1, 3, 2), (0.5, 2, 2), (2, 0.7, 3), (1, 9, 3)]:
        kernel = SwingKernel(k, 1.66, l)
        res = max_disturbance(kernel, n)
        axes = [np.linspace(1e-3, kernel.tau_max, 60)] + \
            [np.linspace(0, kernel.tau_max, 60)] * (n - 1)
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
        assert res.d >= k * step_objective(mesh, 1.66).max() * (1 - 1e-12)
        assert res.d == pytest.approx(disturbance_of_sequence(kernel,
                                                              res.sequence))


def test_max_disturbance_mixed_reported():
    res = max_disturbance(SwingKernel(1, 1.66, 3), 2)
    assert res.regime is Regime.MIXED
    taus = res.sequence.taus
    upper = SwingKernel(1, 1.66, 3).tau_max
    assert taus[0] < upper * (1 - 1e-3)
    assert taus[1] == pytest.approx(upper, rel=1e-9)


def test_max_disturbance_infeasible_box():
    res = max_disturbance(SwingKernel(1, 2, 1e-8), 2)
    assert res.regime is Regime.INFEASIBLE and res.sequence is None
    assert res.d == 0
    with pytest.raises(ValueError):
        max_disturbance(SwingKernel(1, 2, 1), 0)


def test_local_solvers_agree():
    nm = SolverOptions(local="nelder-mead")
    for k, l, n in [(1, 1, 2), (1, 3, 2), (1, 2, 3), (1, 9, 2)]:
        kernel = SwingKernel(k, 1.66, l)
        fast = max_disturbance(kernel, n)
        slow = max_disturbance(kernel, n, nm)
        assert fast.d == pytest.approx(slow.d, rel=1e-8)
        assert fast.regime is slow.regime


def test_monotone_capability():
    ks = [0.2, 0.5, 1.0, 3.0]
    ls = [0.3, 1.0, 2.0]
    d = np.array([[[max_disturbance(SwingKernel(k, 1.66, l), n).d
                    for n in (1, 2, 3)] for l in ls] for k in ks])
    for axis in range(3):
        assert np.all(np.diff(d, axis=axis) >= -1e-9 * d.max())


def test_unconstrained_optimum_increasing_in_n():
    vals = [unconstrained_optimum(1.66, n)[0] for n in (1, 2, 3, 4)]
    assert vals[0] == pytest.approx(1.66 ** 1.66 * math.exp(-1.66))
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[1] == pytest.approx(0.48914, abs=1e-5)


def test_result_metadata():
    res = max_disturbance(SwingKernel(1, 1.66, 9), 1)
    lines = res.metadata().splitlines()
    assert [ln.split("=")[0] for ln in lines] == ["d_max", "regime", "k_min", "N"]
    assert lines[1] == "regime=StepTime" and lines[3] == "N=1"
    assert float(lines[0].split("=")[1]) == res.d
    empty = CapturabilityResult(0.0, None, Regime.INFEASIBLE, 0.0)
    assert empty.n_steps == 0 and "regime=Infeasible" in empty.metadata()


# ------------------------------------------------------------ min actuation

def constrained_grid_kmin(a, l_max, d, points=1_000_001, hi=30.0):
    taus = np.linspace(1e-6, hi, points)
    f = taus ** a * np.exp(-taus)
    ok = taus ** a <= (l_max / d) * f
    return d / f[ok].max()


def test_min_actuation_one_step_e():
    res = min_actuation(RobotSpec(a=1, l_max=10), 1.0, 1)
    assert res.k_min == pytest.approx(math.e, abs=1e-6)
    assert res.sequence.taus[0] == pytest.approx(1.0, abs=1e-6)
    assert res.regime is Regime.STEP_TIME
    assert res.k_min == pytest.approx(constrained_grid_kmin(1, 10, 1), abs=1e-6)


@pytest.mark.parametrize("a, l_max, d", [(1.66, 1, 0.3), (2, 2, 0.5),
                                         (1.2, 1, 0.25)])
def test_min_actuation_one_step_bound(a, l_max, d):
    res = min_actuation(RobotSpec(a=a, l_max=l_max), d, 1)
    # one step: the constraint reads exp(tau) <= l_max / d
    tau = min(a, math.log(l_max / d))
    assert res.sequence.taus[0] == pytest.approx(tau, abs=1e-6)
    assert res.k_min == pytest.approx(d * math.exp(tau) / tau ** a, rel=1e-9)
    scan = constrained_grid_kmin(a, l_max, d, 2_000_001, hi=2 * a)
    assert res.k_min <= scan * (1 + 1e-12)
    assert res.k_min == pytest.approx(scan, rel=1e-5)


@pytest.mark.parametrize("n", [1, 2])
def test_min_actuation_infeasible_equal_reach(n):
    res = min_actuation(RobotSpec(a=1.66, l_max=1.0), 1.0, n)
    assert res.regime is Regime.INFEASIBLE


def test_min_actuation_small_push():
    spec = RobotSpec(a=1.66, l_max=1.0)
    ks = [min_actuation(spec, d, 2).k_min for d in (1e-3, 1e-6)]
    res = min_actuation(spec, 1e-6, 2)
    assert res.regime is Regime.STEP_TIME
    np.testing.assert_allclose(res.sequence.taus,
                               unconstrained_optimum(1.66, 2)[1])
    assert ks[1] < ks[0] and ks[1] < 1e-5


def test_min_actuation_kmax_and_errors():
    spec = RobotSpec(a=1, l_max=10, k_max=2.0)
    assert min_actuation(spec, 1.0, 1).regime is Regime.INFEASIBLE
    with pytest.raises(ValueError):
        min_actuation(spec, 0.0, 1)
    with pytest.raises(ValueError):
        min_actuation(spec, 1.0, 0)


@pytest.mark.parametrize("l_max, d, n", [(1, 0.3, 2), (1, 0.45, 2),
                                         (2, 0.8, 2), (1, 0.4, 3)])
def test_min_actuation_matches_root_on_k(l_max, d, n):
    # independent oracle: the smallest k whose max push reaches d
    a = 1.66
    res = min_actuation(RobotSpec(a=a, l_max=l_max), d, n)
    k_star = optimize.brentq(
        lambda k: max_disturbance(SwingKernel(k, a, l_max), n).d - d,
        1e-3, 1e3, xtol=1e-14, rtol=1e-13)
    assert res.k_min == pytest.approx(k_star, rel=1e-7)
    kernel = SwingKernel(res.k_min, a, l_max * (1 + 1e-9))
    assert forward_check(kernel, res.sequence, d) < 1e-8


# --------------------------------------------------------- decision boundary

def test_decision_boundary_one_step():
    assert decision_boundary(RobotSpec(a=1, l_max=10), 1) == pytest.approx(
        10 * math.exp(-1), abs=1e-6)
    assert decision_boundary(RobotSpec(a=1.66, l_max=1), 1) == pytest.approx(
        math.exp(-1.66), abs=1e-6)


def test_decision_boundary_consistent_with_regimes():
    spec = RobotSpec(a=1.66, l_max=1.0)
    boundary = decision_boundary(spec, 2)
    for d in np.linspace(0.5 * boundary, 1.5 * boundary, 25):
        regime = min_actuation(spec, d, 2).regime
        if abs(d - boundary) > 1e-4:
            assert (regime is Regime.STEP_TIME) == (d < boundary)


# ------------------------------------------------------------------ planner

def test_plan_not_capturable():
    spec = RobotSpec(a=1.66, l_max=1.0)
    cap = max_disturbance(SwingKernel(1, 1.66, 1), 2).d
    plan = plan_steps(spec, 1.0, cap * 1.01, 2)
    assert not plan.capturable and plan.n_steps == 0 and plan.sequence is None


def test_plan_zero_push():
    plan = plan_steps(RobotSpec(), 1.0, 0.0, 2)
    assert plan.capturable and plan.n_steps == 0 and list(plan.rows()) == []


def test_plan_one_step_timed():
    spec = RobotSpec(a=1.66, l_max=1.0)
    d = 0.1
    assert d < decision_boundary(spec, 1)
    plan = plan_steps(spec, 1.0, d, 2)
    assert plan.n_steps == 1 and plan.regime is Regime.STEP_TIME
    tau = plan.taus[0]
    assert tau == pytest.approx(1.66)
    # tau solves k tau**a e**-tau = d for the planned k
    root = optimize.brentq(
        lambda t: plan.k * t ** 1.66 * math.exp(-t) - d, 1e-6, 1.66)
    big = optimize.brentq(
        lambda t: plan.k * t ** 1.66 * math.exp(-t) - d, 1.66, 50)
    assert tau == pytest.approx(root, abs=1e-6) or tau == pytest.approx(big, abs=1e-6)
    assert replay_plan(plan, spec) < 1e-8


def test_plan_uses_second_step_when_needed():
    spec = RobotSpec(a=1.66, l_max=1.0)
    kernel = SwingKernel(1.0, 1.66, 1.0)
    one = max_disturbance(kernel, 1).d
    # at full reach two steps resist no more than one
    assert max_disturbance(kernel, 2).d == pytest.approx(one, rel=1e-12)
    spec = RobotSpec(a=1.66, l_max=9.0)
    kernel = SwingKernel(1.0, 1.66, 9.0)
    one, two = max_disturbance(kernel, 1).d, max_disturbance(kernel, 2).d
    assert two > one * 1.05
    plan = plan_steps(spec, 1.0, 0.5 * (one + two), 2)
    assert plan.capturable and plan.n_steps == 2
    assert plan.k <= 1.0 * (1 + 1e-9)
    assert replay_plan(plan, spec) < 1e-8


def test_plan_csv(tmp_path):
    spec = RobotSpec(a=1.66, l_max=1.0)
    plan = plan_steps(spec, 3.0, 0.3, 2)
    path = tmp_path / "plan.csv"
    plan.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "step_index,tau,length,cumulative_time"
    assert len(lines) == plan.n_steps + 1
    cum = [float(ln.split(",")[3]) for ln in lines[1:]]
    assert cum[-1] == pytest.approx(sum(plan.taus))


def test_plan_rejects_bad_input():
    with pytest.raises(ValueError):
        plan_steps(RobotSpec(), 1.0, -0.1, 2)
    with pytest.raises(ValueError):
        plan_steps(RobotSpec(), 0.0, 0.1, 2)


@settings(max_examples=25, deadline=None)
@given(u=st.floats(0.01, 1.0), k=st.sampled_from([0.5, 1.0, 2.0, 5.0]),
       l_max=st.sampled_from([0.5, 1.0, 1.5]))
def test_plan_soundness(u, k, l_max):
    spec = RobotSpec(a=1.66, l_max=l_max)
    cap = max_disturbance(SwingKernel(k, 1.66, l_max), 2).d
    plan = plan_steps(spec, k, u * cap, 2)
    assert plan.capturable
    assert replay_plan(plan, spec) < 1e-8
    assert all(l <= l_max * (1 + 1e-9) for l in plan.lengths)
