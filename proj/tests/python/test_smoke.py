"""Smoke tests for the Python bindings: a miniature end-to-end pass over the
main operations. Run with PYTHONPATH pointing at the built package."""

import math
import os
import sys
import tempfile

import numpy as np

import robustmargin as rm


def test_loss_values():
    spec = rm.logistic()
    assert abs(spec.value(0.0) - math.log(2.0)) < 1e-15
    assert abs(spec.first_derivative(0.0) + 0.5) < 1e-15
    assert spec.smoothness == 1.0
    assert spec.tail.a == 1.0 and spec.tail.mu == 1.0


def test_generation_and_csv_roundtrip():
    d, truth = rm.generate_gaussian(50, 8, seed=3, min_margin=0.1)
    assert d.n == 50 and d.p == 8
    assert abs(np.linalg.norm(truth.true_weights) - 1.0) < 1e-12
    margins = d.labels * (d.features @ truth.true_weights)
    assert margins.min() >= 0.1
    assert rm.is_linearly_separable(d)

    d2 = rm.assign_budgets(d, rm.BudgetScheme.uniform_random(0.0, 0.5, seed=4))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "d.csv")
        rm.save_csv(d2, path)
        back = rm.load_csv(path)
    assert np.array_equal(back.features, d2.features)
    assert np.array_equal(back.budgets, d2.budgets)


def test_robust_loss_and_gradient():
    spec = rm.logistic()
    d, _ = rm.generate_gaussian(20, 5, seed=7)
    d = rm.assign_budgets(d, rm.BudgetScheme.uniform(0.3))
    w = np.linspace(0.5, 1.0, 5)
    loss = rm.robust_loss(spec, d, w)
    margins = rm.robust_margins(d, w)
    assert abs(loss - sum(spec.value(m) for m in margins)) < 1e-12

    grad = rm.robust_loss_gradient(spec, d, w)
    h = 1e-6 * (1.0 + np.linalg.norm(w))
    for j in range(5):
        wp, wm = w.copy(), w.copy()
        wp[j] += h
        wm[j] -= h
        fd = (rm.robust_loss(spec, d, wp) - rm.robust_loss(spec, d, wm)) / (2 * h)
        assert abs(grad[j] - fd) < 1e-5 * (1.0 + abs(fd))

    closed = spec.value(float(margins[0]))
    oracle = rm.inner_max_oracle(
        spec, d.features[0], float(d.labels[0]), float(d.budgets[0]), w, trials=500, seed=1
    )
    assert abs(closed - oracle) < 1e-12


def test_solvers_and_closed_form():
    d, _ = rm.generate_gaussian(40, 6, seed=11)
    mm = rm.max_margin(d)
    assert mm.status == rm.SolverStatus.optimal
    bound = rm.rm_existence_bound(d)
    assert abs(bound - 1.0 / mm.objective_norm) < 1e-15

    eps = 0.5 * bound
    du = rm.assign_budgets(d, rm.BudgetScheme.uniform(eps))
    sol = rm.rm_solve(du)
    assert sol.status == rm.SolverStatus.optimal
    closed = rm.rm_uniform_closed_form(mm, eps)
    assert np.linalg.norm(sol.weights - closed) <= 1e-6 * np.linalg.norm(closed)
    assert rm.kkt_residual(sol, du) < 1e-6
    assert rm.theta(sol, du) > 1.0
    assert rm.support_vectors(sol, du) == sol.support_set

    beyond = rm.assign_budgets(d, rm.BudgetScheme.uniform(bound))
    assert rm.rm_solve(beyond).status == rm.SolverStatus.infeasible


def test_training_dynamics():
    spec = rm.logistic()
    clean, _ = rm.generate_gaussian(25, 8, seed=13, min_margin=1.0)
    bound = rm.rm_existence_bound(clean)
    d = rm.assign_budgets(clean, rm.BudgetScheme.uniform(0.3 * bound))
    sol = rm.rm_solve(d)
    eta = 0.9 * rm.max_step_size(spec, d)
    traj = rm.train(spec, d, rm.GDConfig(eta, 20000), sol.weights)
    cps = traj.checkpoints
    assert cps[0].t == 0 and cps[-1].t == 20000

    s = [c.s_value for c in cps]
    assert all(b > a for a, b in zip(s, s[1:]))
    losses = [c.loss for c in cps]
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))
    assert cps[-1].weight_norm > 10 * cps[0].weight_norm
    assert min(cps[-1].robust_margins) > 0

    d_start = rm.direction_distance(cps[1].weights, sol.weights)
    d_end = rm.direction_distance(cps[-1].weights, sol.weights)
    assert d_end < d_start


def test_analysis_helpers():
    w1 = np.array([1.0, 0.0])
    w2 = np.array([0.0, 2.0])
    assert abs(rm.direction_distance(w1, w2) - math.sqrt(2.0)) < 1e-15
    truth = rm.GroundTruth(np.array([1.0, 0.0]))
    assert abs(rm.generalization_error(np.array([1.0, 1.0]), truth) - 0.25) < 1e-12

    try:
        rm.direction(np.zeros(2))
        raise AssertionError("expected ValueError for the zero vector")
    except ValueError:
        pass


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for fn in tests:
        fn()
        print(f"ok {fn.__name__}")
    print(f"{len(tests)} smoke tests passed (robustmargin {rm.__version__})")


if __name__ == "__main__":
    sys.exit(main())
