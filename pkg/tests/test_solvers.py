import numpy as np
import pytest

from proxsplit.funcs import (
    BoxIndicator,
    CallableSmooth,
    HardThreshold,
    L1Norm,
    LinfBallIndicator,
    SaddleProblem,
    ZeroFn,
    make_quadratic,
)
from proxsplit.linops import DenseOperator, IdentityOperator, ScaleOperator
from proxsplit.solvers import (
    DIVERGED,
    ITER_CAP,
    ConfigError,
    SolverConfig,
    admm,
    arrow_hurwicz,
    chambolle_pock,
    condat,
    douglas_rachford,
    forward_backward,
    gradient_descent,
    krasnoselskii_mann,
    nonconvex_forward_backward,
    ppxa,
    projected_gradient,
    proximal_point,
)


def half_square(dim=1):
    return make_quadratic(IdentityOperator(dim), np.zeros(dim))


def anisotropic():
    return make_quadratic(DenseOperator(np.diag([1.0, np.sqrt(10.0)])),
                          np.zeros(2), strong_convexity=1.0)


class TestGradientDescent:
    def test_one_exact_step(self):
        trace = gradient_descent(half_square(), [5.0],
                                 SolverConfig(gamma=1.0, max_iter=1))
        assert trace.x == pytest.approx([0.0])
        assert trace.objective[0] == pytest.approx(0.0)

    def test_hand_step_and_linear_bound(self):
        f = anisotropic()
        trace = gradient_descent(f, [1.0, 1.0], SolverConfig(gamma=0.1, max_iter=1))
        assert np.allclose(trace.iterates[1], [0.9, 0.0])
        assert trace.objective[0] == pytest.approx(0.405)
        assert trace.objective[0] <= 0.9 * f.value(np.array([1.0, 1.0]))

    def test_stepsize_guard(self):
        with pytest.raises(ConfigError):
            gradient_descent(half_square(), [1.0], SolverConfig(gamma=2.0))

    def test_backtracking_shrink_oracle(self):
        # shrink sequence 10, 5, 2.5, 1.25, 0.625: the decrease test
        # f(x) - f(x - g*x) > (g/2) x^2 holds iff g < 1, so 0.625 is accepted
        f = half_square()
        for g in (10.0, 5.0, 2.5, 1.25):
            x = np.array([3.0])
            assert not (f.value(x) - f.value(x - g * x) > 0.5 * g * float(x @ x))
        trace = gradient_descent(f, [3.0],
                                 SolverConfig(gamma=10.0, bt_shrink=0.5, max_iter=5),
                                 mode="backtracking")
        assert np.allclose(trace.extras["step"], 0.625)
        assert trace.objective[-1] < f.value(np.array([3.0]))

    def test_optimal_quadratic_step(self):
        f = anisotropic()
        trace = gradient_descent(f, [1.0, 1.0], SolverConfig(max_iter=1),
                                 mode="optimal_quadratic")
        # exact line search on the quadratic: ||g||^2 / ||A g||^2
        assert trace.extras["step"][0] == pytest.approx(101.0 / 1001.0)
        trace = gradient_descent(f, [1.0, 1.0], SolverConfig(max_iter=60),
                                 mode="optimal_quadratic")
        assert trace.objective[-1] <= 1e-12

    def test_backtracking_stops_at_stationary_point(self):
        trace = gradient_descent(half_square(), [0.0],
                                 SolverConfig(gamma=10.0, max_iter=5),
                                 mode="backtracking")
        assert trace.termination == "tol_reached"

    def test_optimal_needs_quadratic(self):
        smooth = CallableSmooth(lambda x: float(x @ x) / 2, lambda x: x, 1.0)
        with pytest.raises(ConfigError):
            gradient_descent(smooth, [1.0], mode="optimal_quadratic")

    def test_divergence_guard(self):
        # declared Lipschitz constant far below the truth: iterates blow up
        wrong = CallableSmooth(lambda x: 50.0 * float(x @ x),
                               lambda x: 100.0 * x, lipschitz=1.0)
        trace = gradient_descent(wrong, [1.0], SolverConfig(gamma=1.9, max_iter=100))
        assert trace.termination == DIVERGED

    def test_max_iter_zero_empty_trace(self):
        trace = gradient_descent(half_square(), [1.0], SolverConfig(max_iter=0))
        assert trace.steps.size == 0
        assert trace.termination == ITER_CAP

    def test_residual_tol_stop(self):
        trace = gradient_descent(half_square(), [1.0],
                                 SolverConfig(gamma=1.0, max_iter=50,
                                              residual_tol=1e-3))
        assert trace.termination == "tol_reached"


class TestProjectedGradient:
    def test_box_constrained_quadratic(self):
        f = make_quadratic(IdentityOperator(2), np.array([2.0, 2.0]))
        box = BoxIndicator(0.0, 1.0)
        trace = projected_gradient(f, box, np.zeros(2),
                                   SolverConfig(gamma=1.0, max_iter=200))
        assert np.allclose(trace.x, [1.0, 1.0], atol=1e-10)
        # variational inequality at the solution over sampled feasible points
        rng = np.random.default_rng(0)
        g = f.grad(trace.x)
        for _ in range(100):
            y = rng.uniform(0.0, 1.0, size=2)
            assert float(g @ (y - trace.x)) >= -1e-6

    def test_fixed_point_start(self):
        f = make_quadratic(IdentityOperator(2), np.array([0.5, 0.5]))
        box = BoxIndicator(0.0, 1.0)
        trace = projected_gradient(f, box, np.array([0.5, 0.5]),
                                   SolverConfig(gamma=1.0, max_iter=3))
        assert trace.residual[0] == 0.0

    def test_whole_space_matches_gradient_descent(self):
        f = anisotropic()
        cfg = SolverConfig(gamma=0.1, max_iter=40)
        free = BoxIndicator(-1e18, 1e18)
        t1 = projected_gradient(f, free, np.array([1.0, -2.0]), cfg)
        t2 = gradient_descent(f, np.array([1.0, -2.0]), cfg)
        assert np.array_equal(t1.x, t2.x)
        assert np.array_equal(t1.residual, t2.residual)


class TestProximalPoint:
    def test_l1_walk(self):
        trace = proximal_point(L1Norm(1.0), [10.0],
                               SolverConfig(gamma=1.0, max_iter=15, thin_every=1))
        vals = [float(it[0]) for it in trace.iterates]
        assert vals[:11] == pytest.approx([10.0 - k for k in range(11)])
        assert vals[-1] == pytest.approx(0.0)

    def test_minimizer_is_fixed(self):
        trace = proximal_point(L1Norm(1.0), [0.0], SolverConfig(max_iter=5))
        assert np.all(trace.residual == 0.0)

    def test_quadratic_halving(self):
        trace = proximal_point(half_square(), [8.0],
                               SolverConfig(gamma=1.0, max_iter=3, thin_every=1))
        assert [float(v[0]) for v in trace.iterates] == pytest.approx([8, 4, 2, 1])

    def test_decrease_margin_nonnegative(self):
        trace = proximal_point(L1Norm(1.0), [3.7], SolverConfig(max_iter=10))
        assert np.all(trace.extras["prox_decrease_margin"] >= -1e-12)


class TestForwardBackward:
    def test_zero_g_matches_gradient_descent(self):
        f = anisotropic()
        cfg = SolverConfig(gamma=0.1, max_iter=30)
        t1 = forward_backward(f, ZeroFn(), np.array([1.0, 1.0]), cfg)
        t2 = gradient_descent(f, np.array([1.0, 1.0]), cfg)
        assert np.array_equal(t1.x, t2.x)
        assert np.array_equal(t1.objective, t2.objective)

    def test_lasso_identity_closed_form(self):
        f = make_quadratic(IdentityOperator(2), np.array([3.0, 0.5]))
        trace = forward_backward(f, L1Norm(1.0), np.zeros(2),
                                 SolverConfig(gamma=1.0, max_iter=100))
        assert np.allclose(trace.x, [2.0, 0.0], atol=1e-10)

    def test_fista_t_sequence(self):
        f = half_square(2)
        trace = forward_backward(f, L1Norm(0.1), np.array([2.0, -1.0]),
                                 SolverConfig(gamma=1.0, inertia="fista_t",
                                              max_iter=3))
        t2 = (1.0 + np.sqrt(5.0)) / 2.0  # successor of t1 = 1
        t3 = (1.0 + np.sqrt(1.0 + 4.0 * t2 * t2)) / 2.0
        assert t2 == pytest.approx(1.6180, abs=1e-4)
        coefs = trace.extras["inertia_coef"]
        assert coefs[0] == 0.0  # (t1 - 1)/t2 with t1 = 1
        assert coefs[1] == pytest.approx((t2 - 1.0) / t3)

    def test_t_recurrence_identity(self):
        t = 1.0
        for _ in range(50):
            t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
            assert abs(t_next ** 2 - t_next - t ** 2) <= 1e-10 * max(1.0, t ** 2)
            t = t_next

    def test_inertia_needs_small_step(self):
        with pytest.raises(ConfigError):
            forward_backward(half_square(), L1Norm(1.0), [1.0],
                             SolverConfig(gamma=1.5, inertia="fista_t"))

    def test_beta_must_exceed_three(self):
        with pytest.raises(ConfigError):
            SolverConfig(inertia="fista_beta", beta=3.0)

    def test_vfista_needs_modulus(self):
        f = make_quadratic(DenseOperator(np.diag([1.0, 2.0])), np.zeros(2))
        with pytest.raises(ConfigError):
            forward_backward(f, L1Norm(1.0), np.zeros(2),
                             SolverConfig(inertia="vfista"))

    def test_fista_beats_fb_after_burn_in(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((12, 20)) / np.sqrt(12)
        f = make_quadratic(DenseOperator(A), rng.standard_normal(12))
        g = L1Norm(0.1)
        cfg = SolverConfig(max_iter=300, gamma=1.0 / f.lipschitz)
        fb = forward_backward(f, g, np.zeros(20), cfg)
        import dataclasses
        fista = forward_backward(f, g, np.zeros(20),
                                 dataclasses.replace(cfg, inertia="fista_t"))
        assert np.all(fista.objective[5:] <= fb.objective[5:] + 1e-12)


class TestNonconvexForwardBackward:
    def test_double_well_reaches_stationary_point(self):
        f = CallableSmooth(lambda x: float(np.sum(0.25 * (x ** 2 - 1) ** 2)),
                           lambda x: x ** 3 - x, lipschitz=6.0, convex=False)
        trace = nonconvex_forward_backward(f, ZeroFn(), [0.5],
                                           SolverConfig(gamma=0.1, max_iter=500))
        assert trace.x == pytest.approx([1.0], abs=1e-6)
        assert abs(f.grad(trace.x)[0]) <= 1e-6

    def test_hard_threshold_margins_nonnegative(self):
        f = make_quadratic(IdentityOperator(1), np.array([3.0]))
        trace = nonconvex_forward_backward(f, HardThreshold(1.0), [0.0],
                                           SolverConfig(gamma=0.5, max_iter=200))
        assert np.all(trace.extras["h1_margin"] >= -1e-8)
        assert trace.x == pytest.approx([3.0], abs=1e-8)

    def test_convex_instance_matches_forward_backward_exactly(self):
        f = make_quadratic(IdentityOperator(3), np.array([1.0, -2.0, 0.5]))
        g = L1Norm(0.3)
        cfg = SolverConfig(gamma=0.5, max_iter=60)
        t1 = forward_backward(f, g, np.zeros(3), cfg)
        t2 = nonconvex_forward_backward(f, g, np.zeros(3), cfg)
        assert np.array_equal(t1.x, t2.x)
        assert np.array_equal(t1.objective, t2.objective)
        assert np.array_equal(t1.residual, t2.residual)

    def test_weakly_convex_stepsize_relaxation(self):
        f = make_quadratic(IdentityOperator(1), np.array([1.0]))
        # gamma = 1.2 violates gamma < 1/L but passes 2/(L + 0.1)
        with pytest.raises(ConfigError):
            nonconvex_forward_backward(f, L1Norm(1.0), [0.0],
                                       SolverConfig(gamma=1.2, max_iter=5))
        trace = nonconvex_forward_backward(f, L1Norm(1.0), [0.0],
                                           SolverConfig(gamma=1.2, max_iter=5),
                                           weak_convexity=0.1)
        assert trace.steps.size == 5

    def test_stepsize_guard(self):
        f = half_square()
        with pytest.raises(ConfigError):
            nonconvex_forward_backward(f, ZeroFn(), [1.0], SolverConfig(gamma=1.0))


class TestKrasnoselskiiMann:
    def test_rotation_converges_averaged(self):
        mat = np.array([[0.0, -1.0], [1.0, 0.0]])
        T = lambda v: mat @ v
        trace = krasnoselskii_mann(T, [1.0, 0.0],
                                   SolverConfig(relaxation=0.5, max_iter=100))
        assert np.linalg.norm(trace.x) <= 1e-8
        res = trace.extras["fixed_point_residual"]
        assert np.all(np.diff(res) <= 1e-15)

    def test_plain_iteration_orbits(self):
        # sanity for the fixture: lambda = 1 never converges
        mat = np.array([[0.0, -1.0], [1.0, 0.0]])
        trace = krasnoselskii_mann(lambda v: mat @ v, [1.0, 0.0],
                                   SolverConfig(relaxation=1.0, max_iter=50))
        assert np.linalg.norm(trace.x) == pytest.approx(1.0)

    def test_identity_map_constant(self):
        trace = krasnoselskii_mann(lambda v: v, [1.0, 2.0],
                                   SolverConfig(relaxation=0.5, max_iter=10))
        assert np.all(trace.residual == 0.0)

    def test_zero_relaxation_constant(self):
        mat = np.array([[0.0, -1.0], [1.0, 0.0]])
        trace = krasnoselskii_mann(lambda v: mat @ v, [1.0, 0.0],
                                   SolverConfig(relaxation=0.0, max_iter=10))
        assert np.all(trace.residual == 0.0)

    def test_relaxation_range(self):
        with pytest.raises(ConfigError):
            krasnoselskii_mann(lambda v: v, [1.0], SolverConfig(relaxation=1.5))

    def test_harmonic_and_callable_relaxation(self):
        mat = np.array([[0.0, -1.0], [1.0, 0.0]])
        T = lambda v: mat @ v
        t1 = krasnoselskii_mann(T, [1.0, 0.0],
                                SolverConfig(relaxation="harmonic", max_iter=50))
        assert t1.extras["fixed_point_residual"][-1] < t1.extras[
            "fixed_point_residual"][0]
        t2 = krasnoselskii_mann(T, [1.0, 0.0],
                                SolverConfig(relaxation=lambda n: 0.5, max_iter=50))
        t3 = krasnoselskii_mann(T, [1.0, 0.0],
                                SolverConfig(relaxation=0.5, max_iter=50))
        assert np.array_equal(t2.x, t3.x)


class TestDouglasRachford:
    def test_two_quadratics_meet_in_middle(self):
        f = make_quadratic(IdentityOperator(1), np.array([0.0]))
        g = make_quadratic(IdentityOperator(1), np.array([4.0]))
        trace = douglas_rachford(f, g, [0.0], SolverConfig(gamma=1.0, max_iter=200))
        assert trace.x == pytest.approx([2.0], abs=1e-8)

    def test_common_minimizer_is_fixed_point(self):
        f = make_quadratic(IdentityOperator(2), np.array([1.0, -1.0]))
        g = L1Norm(0.0)  # zero weight: prox is identity, minimizer everywhere
        trace = douglas_rachford(f, f, np.array([1.0, -1.0]),
                                 SolverConfig(gamma=1.0, max_iter=5))
        assert np.all(trace.residual == 0.0)

    def test_matches_two_sequence_form(self):
        # independent implementation of the (x, y) two-sequence recursion
        f = L1Norm(1.0)
        g = make_quadratic(IdentityOperator(1), np.array([3.0]))
        gamma = 0.7
        x = np.array([0.25])
        ys, xs = [], []
        xv = x.copy()
        for _ in range(30):
            y = g.prox(xv, gamma)
            xv = xv + f.prox(2 * y - xv, gamma) - y
            ys.append(y.copy())
            xs.append(xv.copy())
        trace = douglas_rachford(f, g, x, SolverConfig(gamma=gamma, max_iter=30,
                                                       thin_every=1))
        # identical up to float association order in the relaxation update
        govern = trace.meta["governing"]
        assert np.allclose(govern, xs[-1], atol=1e-12, rtol=0)
        assert np.allclose(trace.x, g.prox(xs[-1], gamma), atol=1e-12)

    def test_relaxation_range(self):
        f = g = L1Norm(1.0)
        with pytest.raises(ConfigError):
            douglas_rachford(f, g, [0.0], SolverConfig(relaxation=2.5))

    def test_infeasible_iterates_report_inf_not_error(self):
        # the shadow point is feasible for g but may violate the indicator f
        # early on; the objective column carries +inf and the run continues
        f = BoxIndicator(0.0, 1.0)
        g = make_quadratic(IdentityOperator(1), np.array([5.0]))
        trace = douglas_rachford(f, g, [5.0], SolverConfig(gamma=1.0, max_iter=400))
        assert np.isposinf(trace.objective[0])
        assert trace.termination == ITER_CAP
        assert trace.x == pytest.approx([1.0], abs=1e-6)
        assert np.isfinite(trace.objective[-1])


class TestPPXA:
    def test_identical_terms_consensus(self):
        c = np.array([1.5])
        q = make_quadratic(IdentityOperator(1), c)
        trace = ppxa([q, q], [0.0], SolverConfig(gamma=1.0, max_iter=100))
        assert trace.x == pytest.approx([1.5], abs=1e-8)

    def test_scalar_lasso_consensus(self):
        trace = ppxa([L1Norm(1.0), make_quadratic(IdentityOperator(1), np.array([3.0]))],
                     [0.0], SolverConfig(gamma=1.0, max_iter=300))
        assert trace.x == pytest.approx([2.0], abs=1e-7)

    def test_matches_douglas_rachford_limit(self):
        f = L1Norm(1.0)
        g = make_quadratic(IdentityOperator(1), np.array([3.0]))
        t_ppxa = ppxa([f, g], [0.0], SolverConfig(gamma=1.0, max_iter=2000))
        t_dr = douglas_rachford(f, g, [0.0], SolverConfig(gamma=1.0, max_iter=2000))
        assert abs(t_ppxa.x[0] - t_dr.x[0]) <= 1e-6

    def test_operator_blocks(self):
        # min (x-3)^2/2 + |2x| has solution soft(3, 2) = 1 after rescaling:
        # grad block carries the factor-2 operator
        q = make_quadratic(IdentityOperator(1), np.array([3.0]))
        trace = ppxa([(q, None), (L1Norm(1.0), ScaleOperator(2.0, 1))],
                     [0.0], SolverConfig(gamma=1.0, max_iter=2000))
        # oracle: scalar grid search
        zs = np.linspace(-1, 4, 100001)
        vals = 0.5 * (zs - 3.0) ** 2 + np.abs(2.0 * zs)
        assert abs(trace.x[0] - zs[np.argmin(vals)]) <= 1e-4

    def test_needs_two_terms(self):
        with pytest.raises(ConfigError):
            ppxa([L1Norm(1.0)], [0.0])


class TestADMM:
    def test_identity_specialization_matches_prox_form(self):
        f = L1Norm(1.0)
        g = make_quadratic(IdentityOperator(1), np.array([3.0]))
        gamma = 1.0
        cfg = SolverConfig(gamma=gamma, max_iter=40)
        trace = admm(f, g, IdentityOperator(1), ScaleOperator(-1.0, 1),
                     np.zeros(1), cfg=cfg)
        # direct prox recursion for the x = y constraint
        x = np.zeros(1)
        y = np.zeros(1)
        z = np.zeros(1)
        for _ in range(40):
            x = f.prox(y - z / gamma, 1.0 / gamma)
            y = g.prox(x + z / gamma, 1.0 / gamma)
            z = z + gamma * (x - y)
        assert np.array_equal(trace.x, x)
        assert np.array_equal(trace.meta["y"], y)
        assert np.array_equal(trace.meta["z"], z)

    def test_scalar_consensus_limit(self):
        f = L1Norm(1.0)
        g = make_quadratic(IdentityOperator(1), np.array([3.0]))
        trace = admm(f, g, IdentityOperator(1), ScaleOperator(-1.0, 1),
                     np.zeros(1), cfg=SolverConfig(gamma=1.0, max_iter=2000))
        assert trace.x == pytest.approx([2.0], abs=1e-7)
        assert trace.meta["y"] == pytest.approx([2.0], abs=1e-7)
        assert trace.extras["primal_residual"][-1] <= 1e-7

    def test_constraint_shift_oracle(self):
        # shifting b and translating g moves the solution consistently
        f = L1Norm(1.0)
        g0 = make_quadratic(IdentityOperator(1), np.array([3.0]))
        c = 0.8
        g_shift = make_quadratic(IdentityOperator(1), np.array([3.0 - c]))
        base = admm(f, g0, IdentityOperator(1), ScaleOperator(-1.0, 1),
                    np.zeros(1), cfg=SolverConfig(gamma=1.0, max_iter=3000))
        shifted = admm(f, g_shift, IdentityOperator(1), ScaleOperator(-1.0, 1),
                       np.full(1, c), cfg=SolverConfig(gamma=1.0, max_iter=3000))
        assert shifted.x[0] == pytest.approx(base.x[0], abs=1e-6)
        assert shifted.meta["y"][0] == pytest.approx(base.meta["y"][0] - c, abs=1e-6)

    def test_quadratic_coupling_via_cg(self):
        # A = diag(1, 2) with quadratic f: the x-update solves a linear system
        rng = np.random.default_rng(2)
        f = make_quadratic(DenseOperator(rng.standard_normal((2, 2))),
                           rng.standard_normal(2))
        g = make_quadratic(IdentityOperator(2), np.array([1.0, -1.0]))
        A = DenseOperator(np.diag([1.0, 2.0]))
        trace = admm(f, g, A, ScaleOperator(-1.0, 2), np.zeros(2),
                     cfg=SolverConfig(gamma=1.0, max_iter=3000))
        assert trace.extras["primal_residual"][-1] <= 1e-8

    def test_rejects_unsupported_structure(self):
        with pytest.raises(ConfigError):
            admm(L1Norm(1.0), L1Norm(1.0),
                 DenseOperator(np.array([[1.0, 1.0], [0.0, 1.0]])),
                 ScaleOperator(-1.0, 2), np.zeros(2),
                 cfg=SolverConfig(max_iter=2))

    def test_user_subsolver(self):
        f = L1Norm(1.0)
        g = make_quadratic(IdentityOperator(1), np.array([3.0]))
        solver = lambda c, gamma: f.prox(c, 1.0 / gamma)
        trace = admm(f, g, IdentityOperator(1), ScaleOperator(-1.0, 1),
                     np.zeros(1), cfg=SolverConfig(gamma=1.0, max_iter=500),
                     x_solver=solver)
        assert trace.x == pytest.approx([2.0], abs=1e-6)


def scalar_saddle():
    return SaddleProblem(
        K=ScaleOperator(1.0, 1),
        g=make_quadratic(IdentityOperator(1), np.zeros(1)),
        f_conj=LinfBallIndicator(1.0),
        f_primal=L1Norm(1.0),
    )


class TestChambollePock:
    def test_zero_coupling_decouples_into_prox_chains(self):
        prob = SaddleProblem(
            K=ScaleOperator(0.0, 2),
            g=make_quadratic(IdentityOperator(2), np.array([1.0, -1.0])),
            f_conj=LinfBallIndicator(0.5),
        )
        cfg = SolverConfig(sigma=1.0, tau=1.0, max_iter=20)
        trace = chambolle_pock(prob, np.array([3.0, 3.0]), np.array([2.0, -2.0]), cfg)
        # x chain: prox of g iterated; y chain: ball projection is idempotent
        pp = proximal_point(prob.g, np.array([3.0, 3.0]),
                            SolverConfig(gamma=1.0, max_iter=20))
        assert np.allclose(trace.x, pp.x)
        assert np.allclose(trace.meta["y"], [0.5, -0.5])

    def test_saddle_point_start_is_stationary(self):
        prob = scalar_saddle()
        cfg = SolverConfig(sigma=0.9, tau=0.9, max_iter=10)
        trace = chambolle_pock(prob, np.zeros(1), np.zeros(1), cfg)
        assert np.all(trace.residual == 0.0)
        assert np.all(trace.extras["dual_residual"] == 0.0)

    def test_stepsize_product_guard_names_estimate(self):
        prob = scalar_saddle()
        with pytest.raises(ConfigError) as err:
            chambolle_pock(prob, np.zeros(1), np.zeros(1),
                           SolverConfig(sigma=2.0, tau=2.0, max_iter=5))
        assert "operator norm estimate" in str(err.value)

    def test_converges_on_scalar_saddle(self):
        prob = scalar_saddle()
        trace = chambolle_pock(prob, np.array([1.5]), np.array([0.5]),
                               SolverConfig(max_iter=400))
        assert abs(trace.x[0]) <= 1e-6
        assert abs(trace.meta["y"][0]) <= 1e-5

    def test_ergodic_snapshots(self):
        prob = scalar_saddle()
        trace = chambolle_pock(prob, np.array([1.5]), np.array([0.5]),
                               SolverConfig(max_iter=50), ergodic_at=(10, 50))
        assert set(trace.meta["ergodic"]) == {10, 50}

    def test_gap_recorded_when_boxes_supplied(self):
        prob = scalar_saddle()
        trace = chambolle_pock(prob, np.array([1.5]), np.array([0.5]),
                               SolverConfig(max_iter=200),
                               gap_boxes=((-2.0, 2.0), (-1.0, 1.0)))
        gaps = trace.extras["pd_gap"]
        assert np.all(gaps >= -1e-10)
        assert gaps[-1] < gaps[0]  # the ergodic gap shrinks


class TestArrowHurwicz:
    def test_converges_with_strong_convexity(self):
        prob = scalar_saddle()  # the primal side is strongly convex
        trace = arrow_hurwicz(prob, np.array([1.5]), np.array([0.5]),
                              SolverConfig(sigma=0.7, tau=0.7, max_iter=800))
        assert abs(trace.x[0]) <= 1e-8

    def test_matches_cp_at_fixed_point(self):
        prob = scalar_saddle()
        cfg = SolverConfig(sigma=0.9, tau=0.9, max_iter=5)
        t1 = arrow_hurwicz(prob, np.zeros(1), np.zeros(1), cfg)
        t2 = chambolle_pock(prob, np.zeros(1), np.zeros(1), cfg)
        assert np.array_equal(t1.x, t2.x)

    def test_zero_coupling_decouples(self):
        prob = SaddleProblem(
            K=ScaleOperator(0.0, 1),
            g=make_quadratic(IdentityOperator(1), np.array([2.0])),
            f_conj=LinfBallIndicator(1.0),
        )
        trace = arrow_hurwicz(prob, np.zeros(1), np.zeros(1),
                              SolverConfig(sigma=1.0, tau=1.0, max_iter=30))
        pp = proximal_point(prob.g, np.zeros(1), SolverConfig(gamma=1.0, max_iter=30))
        assert np.allclose(trace.x, pp.x)


class TestCondat:
    def test_no_terms_zero_g_is_plain_gradient_descent(self):
        f = anisotropic()
        cfg = SolverConfig(tau=0.1, rho=1.0, max_iter=30)
        t1 = condat(f, ZeroFn(), [], np.array([1.0, 1.0]), cfg=cfg)
        t2 = gradient_descent(f, np.array([1.0, 1.0]),
                              SolverConfig(gamma=0.1, max_iter=30))
        assert np.allclose(t1.x, t2.x)
        assert np.allclose(t1.objective, t2.objective)

    def test_matches_chambolle_pock_when_aligned(self):
        # with f = g = 0 and one identity-coupled term, the primal chain
        # coincides with the over-relaxed primal-dual one after aligning the
        # dual initialization u0 = y1
        lam = 1.0
        prob = SaddleProblem(
            K=IdentityOperator(1),
            g=ZeroFn(),
            f_conj=LinfBallIndicator(lam),
        )
        sigma = tau = 0.9
        x0 = np.array([1.3])
        y0 = np.array([0.2])
        cp = chambolle_pock(prob, x0, y0,
                            SolverConfig(sigma=sigma, tau=tau, max_iter=40,
                                         thin_every=1))
        y1 = LinfBallIndicator(lam).prox(y0 + sigma * x0, sigma)
        cd = condat(ZeroFn(), ZeroFn(), [(LinfBallIndicator(lam), IdentityOperator(1))],
                    x0, u0s=[y1],
                    cfg=SolverConfig(sigma=sigma, tau=tau, rho=1.0, max_iter=40,
                                     thin_every=1))
        for a, b in zip(cp.iterates, cd.iterates):
            assert np.allclose(a, b, atol=1e-12)

    def test_stepsize_guard(self):
        f = half_square()
        with pytest.raises(ConfigError):
            condat(f, ZeroFn(), [(LinfBallIndicator(1.0), IdentityOperator(1))],
                   [0.0], cfg=SolverConfig(sigma=2.0, tau=2.0))

    def test_duals_are_recorded(self):
        trace = condat(half_square(), ZeroFn(),
                       [(LinfBallIndicator(1.0), IdentityOperator(1))],
                       [2.0], cfg=SolverConfig(max_iter=10))
        assert len(trace.meta["duals"]) == 1


class TestDescentAndResidualInvariants:
    def test_descent_methods_are_monotone_and_residuals_vanish(self):
        f = make_quadratic(IdentityOperator(3), np.array([1.0, -2.0, 0.5]))
        g = L1Norm(0.3)
        runs = [
            gradient_descent(f, np.array([2.0, 2.0, 2.0]),
                             SolverConfig(gamma=1.0 / f.lipschitz, max_iter=300)),
            forward_backward(f, g, np.array([2.0, 2.0, 2.0]),
                             SolverConfig(gamma=1.0 / f.lipschitz, max_iter=300)),
            proximal_point(f, np.array([2.0, 2.0, 2.0]),
                           SolverConfig(gamma=1.0, max_iter=300)),
        ]
        for trace in runs:
            path = trace.objective_path()
            assert np.all(np.diff(path) <= 1e-12)
            assert trace.residual[-1] <= 1e-10


class TestTraceContract:
    def test_runs_are_deterministic(self):
        f = anisotropic()
        g = L1Norm(0.2)
        cfg = SolverConfig(gamma=0.05, inertia="fista_t", max_iter=100, seed=4)
        t1 = forward_backward(f, g, np.array([1.0, -1.0]), cfg)
        t2 = forward_backward(f, g, np.array([1.0, -1.0]), cfg)
        assert np.array_equal(t1.objective, t2.objective)
        assert np.array_equal(t1.residual, t2.residual)
        assert np.array_equal(t1.x, t2.x)
        d1 = douglas_rachford(g, f, np.array([0.5, 0.5]),
                              SolverConfig(gamma=1.0, max_iter=60))
        d2 = douglas_rachford(g, f, np.array([0.5, 0.5]),
                              SolverConfig(gamma=1.0, max_iter=60))
        assert np.array_equal(d1.x, d2.x)

    def test_record_count_bounded_by_cap(self):
        trace = gradient_descent(half_square(), [1.0],
                                 SolverConfig(gamma=1.0, max_iter=7))
        assert len(trace.objective) <= 7
        assert np.all(trace.residual >= 0.0)
        assert trace.termination in ("tol_reached", "iter_cap", "diverged")

    def test_thinning(self):
        trace = gradient_descent(half_square(), [1.0],
                                 SolverConfig(gamma=0.5, max_iter=10, thin_every=5))
        assert trace.iterate_steps[0] == 0
        assert trace.iterate_steps[1:] == [5, 10]
        # objective still recorded every iteration
        assert len(trace.objective) == 10

    def test_objective_path_includes_start(self):
        trace = gradient_descent(half_square(), [2.0],
                                 SolverConfig(gamma=0.5, max_iter=4))
        path = trace.objective_path()
        assert path[0] == pytest.approx(2.0)
        assert len(path) == 5
