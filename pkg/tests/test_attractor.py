import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

import nedlab as nl
from nedlab import GridSpec, InapplicableError, WeightedFunction

from conftest import constant_scalar, decay_cert


def _ball_cloud(rng, n_points, dim, radius=1.0):
    pts = rng.normal(size=(n_points, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return radius * pts * rng.uniform(0.0, 1.0, size=(n_points, 1))


class TestWeightedNorm:
    def test_closed_forms(self):
        grid = GridSpec(-10.0, 10.0, 0.25)
        b0 = WeightedFunction(lambda t: math.exp(-abs(t)), eta=0.0,
                              domain=nl.FULL_LINE)
        assert nl.weighted_norm(b0, grid) == pytest.approx(1.0)
        b1 = WeightedFunction(lambda t: math.exp(-abs(t)), eta=-1.0,
                              domain=nl.FULL_LINE)
        # e^{|t|} e^{-|t|} = 1 everywhere.
        assert nl.weighted_norm(b1, grid) == pytest.approx(1.0)

    def test_domain_respected(self):
        b = WeightedFunction(lambda t: 1.0, eta=0.0,
                             domain=nl.HALF_LINE_MINUS)
        with pytest.raises(ValueError):
            nl.weighted_norm(b, GridSpec(1.0, 2.0, 0.5))


class TestComparisonBound:
    def test_closed_form(self, constant_process):
        b = WeightedFunction(lambda t: 1.0, eta=0.0, domain=nl.FULL_LINE)
        got = nl.comparison_bound(constant_process, b, 3.0, 0.0, 4.0)
        # e^{-3} * 4 + int_0^3 e^{-(3-r)} dr = 1 + 3 e^{-3}
        assert got == pytest.approx(1.0 + 3 * math.exp(-3.0), rel=1e-10)

    def test_certificate_sanity_check(self, constant_process):
        b = WeightedFunction(lambda t: 1.0, eta=0.0, domain=nl.FULL_LINE)
        with pytest.raises(InapplicableError):
            nl.comparison_bound(constant_process, b, 1.0, 0.0, 1.0,
                                cert=decay_cert(1.0, kind="I"))

    def test_orientation(self, constant_process):
        b = WeightedFunction(lambda t: 1.0, eta=0.0, domain=nl.FULL_LINE)
        with pytest.raises(ValueError):
            nl.comparison_bound(constant_process, b, 0.0, 1.0, 1.0)

    def test_dominates_dissipative_trajectories(self):
        # f(t, x) = (a/2) x - x^3 + c(t) with a = -2, c = 0.5 e^{-|t|}:
        # 2 <f, x> = a x^2 - 2 x^4 + 2 c x <= (a + 1) x^2 + c^2.
        c = lambda t: 0.5 * math.exp(-abs(t))
        field = lambda t, x: -x - x ** 3 + c(t)
        spec = nl.DissipativitySpec(field=lambda t, x: np.atleast_1d(field(t, x[0])),
                                    a=lambda t: -1.0,
                                    b=lambda t: c(t) ** 2, dimension=1)
        worst, ok = spec.certify((-5.0, 5.0), 3.0, n_samples=500)
        assert ok, worst
        witness = constant_scalar(-1.0)
        bw = WeightedFunction(lambda t: c(t) ** 2, eta=0.0,
                              domain=nl.FULL_LINE)
        for x0 in (-2.0, 0.5, 3.0):
            times = np.linspace(0.5, 5.0, 10)
            sol = solve_ivp(lambda t, x: [field(t, x[0])], (0.0, 5.0), [x0],
                            rtol=1e-10, atol=1e-12, t_eval=times)
            for t, x in zip(times, sol.y[0]):
                bound = nl.comparison_bound(witness, bw, float(t), 0.0,
                                            x0 * x0)
                assert x * x <= bound + 1e-8


class TestRadii:
    def test_pullback_radius_formula(self):
        cert = nl.DichotomyCertificate("II", nl.FULL_LINE, 2.0,
                                       nl.ExponentPair(3.0, 0.5),
                                       projection="zero")
        lam, bnorm, t = 1.0, 4.0, -2.0
        expect = math.sqrt((2.0 / (3.0 - 0.5)) * 4.0
                           * math.exp((1.0 + 1.0) * 0.5 * 2.0))
        assert nl.pullback_radius(cert, lam, bnorm, t) == pytest.approx(expect)

    def test_pullback_guard(self):
        cert = nl.DichotomyCertificate("II", nl.FULL_LINE, 1.0,
                                       nl.ExponentPair(1.0, 2.0),
                                       projection="zero")
        with pytest.raises(InapplicableError):
            nl.pullback_radius(cert, 1.0, 1.0, 0.0)

    def test_forward_attractor_cases(self):
        cert = decay_cert(1.0, kind="I")
        assert nl.forward_attractor_radius(cert, -2.0, 1.0) == {
            "kind": "point", "radius": 0.0}
        ball = nl.forward_attractor_radius(cert, -1.0, 4.0)
        assert ball["kind"] == "ball"
        assert ball["radius"] == pytest.approx(2.0)
        with pytest.raises(InapplicableError):
            nl.forward_attractor_radius(cert, -0.5, 1.0)

    def test_full_line_radius(self):
        cert = nl.DichotomyCertificate("I", nl.FULL_LINE, 1.0,
                                       nl.ExponentPair(2.0, 1.0),
                                       projection="zero")
        out = nl.forward_attractor_radius(cert, -1.0, 3.0, full_line=True)
        assert out["radius"] == pytest.approx(math.sqrt(3.0))
        tight = nl.DichotomyCertificate("I", nl.FULL_LINE, 1.0,
                                        nl.ExponentPair(1.0, 2.0),
                                        projection="zero")
        with pytest.raises(InapplicableError):
            nl.forward_attractor_radius(tight, -1.0, 1.0, full_line=True)


class TestForwardBound:
    def _quad_bound(self, cert, eta, bnorm, t, s, x0sq):
        """Direct quadrature of the comparison integral the regime
        formulas upper-bound."""
        beta, nu = cert.stable.rate, cert.stable.growth
        m = cert.m
        homogeneous = m * math.exp((nu - beta) * t + beta * s) * x0sq
        integrand = lambda tau: m * math.exp(nu * t - beta * (t - tau)) \
            * bnorm * math.exp(eta * nu * tau)
        val, _ = quad(integrand, s, t, epsabs=1e-12, epsrel=1e-10)
        return homogeneous + val

    @pytest.mark.parametrize("eta", [-1.5, -0.5, 0.5])
    def test_dominates_quadrature_above_threshold(self, eta):
        # The domination property is claimed for eta > -beta/nu only.
        cert = nl.DichotomyCertificate("II", nl.FULL_LINE, 1.5,
                                       nl.ExponentPair(2.0, 1.0),
                                       projection="zero")
        for (t, s) in [(1.0, 0.0), (3.0, 1.0), (2.0, 2.0)]:
            bound = nl.forward_bound(cert, eta, 0.7, t, s, 2.0)
            ref = self._quad_bound(cert, eta, 0.7, t, s, 2.0)
            assert bound >= ref - 1e-9 * max(1.0, abs(ref))

    def test_below_threshold_literal_formula(self):
        # Below the threshold the published three-case statement is
        # reproduced literally (it is not an upper bound of the raw
        # comparison integral when beta != nu; see the decisions log).
        cert = nl.DichotomyCertificate("II", nl.FULL_LINE, 1.5,
                                       nl.ExponentPair(2.0, 1.0),
                                       projection="zero")
        beta, nu, m, eta, bnorm = 2.0, 1.0, 1.5, -4.0, 0.7
        t, s, x0sq = 3.0, 1.0, 2.0
        expect = m * math.exp((nu - beta) * t + beta * s) * x0sq \
            - (m * bnorm / (beta + eta * nu)) * math.exp((nu - beta) * t) \
            * math.exp(nu * (eta + 1.0) * s)
        assert nl.forward_bound(cert, eta, bnorm, t, s, x0sq) \
            == pytest.approx(expect, rel=1e-14)

    def test_threshold_case(self):
        cert = nl.DichotomyCertificate("II", nl.FULL_LINE, 1.0,
                                       nl.ExponentPair(2.0, 1.0),
                                       projection="zero")
        eta = -2.0  # exactly -beta/nu
        bound = nl.forward_bound(cert, eta, 1.0, 2.0, 0.0, 0.0)
        assert bound == pytest.approx(math.exp(-2.0) * 2.0)
        ref = self._quad_bound(cert, eta, 1.0, 2.0, 0.0, 0.0)
        assert bound == pytest.approx(ref, rel=1e-9)

    def test_uniform_shortcut(self):
        cert = decay_cert(2.0, m=3.0)  # nu = 0
        bound = nl.forward_bound(cert, -5.0, 4.0, 3.0, 1.0, 0.0)
        assert bound == pytest.approx((3.0 / 2.0) * 4.0)

    def test_orientation_guard(self):
        cert = decay_cert(1.0)
        with pytest.raises(ValueError):
            nl.forward_bound(cert, -2.0, 1.0, 0.0, 1.0, 1.0)


class TestPullbackSimulation:
    def test_scalar_point_attractor(self):
        spec = nl.DissipativitySpec(field=lambda t, x: -x + 1.0,
                                    a=lambda t: -1.0, b=lambda t: 1.0,
                                    dimension=1)
        cloud = nl.simulate_pullback_omega(spec, 0.0,
                                           np.array([[0.5], [-2.0], [3.0]]))
        assert cloud.converged
        assert cloud.representatives.shape == (1, 1)
        assert abs(cloud.representatives[0, 0] - 1.0) <= 1e-6

    def test_nonautonomous_target(self):
        # x' = -x + cos t has the unique bounded solution
        # (cos t + sin t) / 2; the pullback section at time t is that point.
        spec = nl.DissipativitySpec(
            field=lambda t, x: -x + math.cos(t),
            a=lambda t: -1.0, b=lambda t: 1.0, dimension=1)
        for t in (-1.0, 0.0, 2.0):
            cloud = nl.simulate_pullback_omega(spec, t, np.array([[0.0], [2.0]]))
            expect = 0.5 * (math.cos(t) + math.sin(t))
            assert abs(cloud.representatives[0, 0] - expect) <= 1e-6

    def test_schedule_validation(self):
        spec = nl.DissipativitySpec(field=lambda t, x: -x, a=lambda t: -1.0,
                                    b=lambda t: 0.0, dimension=1)
        with pytest.raises(ValueError):
            nl.simulate_pullback_omega(spec, 0.0, np.array([[1.0]]),
                                       s_schedule=[-1.0, -0.5])

    def test_escape_reported(self):
        spec = nl.DissipativitySpec(field=lambda t, x: x ** 2,
                                    a=lambda t: 1.0, b=lambda t: 0.0,
                                    dimension=1)
        with pytest.raises(nl.TrajectoryEscapeError):
            nl.simulate_pullback_omega(spec, 0.0, np.array([[3.0]]),
                                       s_schedule=[-1.0, -2.0, -4.0])


class TestForwardSimulation:
    def test_contraction_to_origin(self):
        spec = nl.DissipativitySpec(field=lambda t, x: -x, a=lambda t: -1.0,
                                    b=lambda t: 0.0, dimension=1)
        cloud = nl.simulate_forward_omega(spec, np.array([[1.0], [-1.0]]), 0.0)
        assert np.max(np.abs(cloud.representatives)) <= 1e-6


class TestCooperative:
    def test_equilibrium_section(self):
        a = np.array([[-2.0, 1.0], [1.0, -2.0]])
        b = np.array([1.0, 1.0])
        spec = nl.CooperativeSpec(a_matrix=a, b_vector=b, dimension=2)
        cloud = nl.simulate_pullback_omega(
            spec, 0.0, np.array([[0.0, 0.0], [2.0, 3.0], [-1.0, 4.0]]))
        assert np.max(np.abs(cloud.representatives - 1.0)) <= 1e-6

    def test_structure_certification(self):
        a = np.array([[-2.0, 1.0], [1.0, -2.0]])
        spec = nl.CooperativeSpec(a_matrix=a, b_vector=np.array([1.0, 1.0]),
                                  dimension=2)
        assert spec.certify([0.0, 1.0]) >= 0.0
        bad = nl.CooperativeSpec(a_matrix=np.array([[-1.0, -0.5],
                                                    [0.2, -1.0]]),
                                 b_vector=np.array([0.0, 0.0]), dimension=2)
        assert bad.certify([0.0]) < 0.0

    def test_order_preservation(self):
        a = np.array([[-2.0, 1.0], [1.0, -2.0]])
        b = np.array([1.0, 1.0])
        spec = nl.CooperativeSpec(a_matrix=a, b_vector=b, dimension=2)
        rng = np.random.default_rng(1)
        lower = rng.uniform(-2.0, 2.0, size=(20, 2))
        upper = lower + rng.uniform(0.0, 1.0, size=(20, 2))
        for lo, hi in zip(lower, upper):
            sol = solve_ivp(lambda t, y: np.concatenate(
                [spec.field(t, y[:2]), spec.field(t, y[2:])]),
                (0.0, 3.0), np.concatenate([lo, hi]),
                rtol=1e-10, atol=1e-12)
            final = sol.y[:, -1]
            assert np.all(final[:2] <= final[2:] + 1e-10)


class TestContainmentReports:
    def test_margins(self):
        family = nl.SetFamily({0.0: np.array([[0.5, 0.0]]),
                               -1.0: np.array([[0.0, 0.25]])})
        envelope = nl.RadiusEnvelope(params={}, evaluator=lambda t: 1.0)
        report = nl.verify_containment(family, envelope)
        assert report.contained
        assert report.min_margin == pytest.approx(0.5)

    def test_max_norm_envelope(self):
        family = nl.SetFamily({0.0: np.array([[0.9, -0.9]])})
        env = nl.RadiusEnvelope(params={}, evaluator=lambda t: 1.0,
                                norm="max")
        assert nl.verify_containment(family, env).min_margin \
            == pytest.approx(0.1)

    def test_hausdorff_hand_values(self):
        a = np.array([[0.0, 0.0], [2.0, 0.0]])
        b = np.array([[0.0, 0.0]])
        assert nl.hausdorff_semidistance(a, b) == pytest.approx(2.0)
        assert nl.hausdorff_semidistance(b, a) == pytest.approx(0.0)

    def test_universe_membership(self):
        family = nl.SetFamily({0.0: np.array([[1.0]]),
                               -2.0: np.array([[4.0]])})
        # e^{-1 * 2} * 4 = 0.54 < 1, so the witness is set at t = 0.
        assert nl.universe_membership(family, 1.0) == pytest.approx(1.0)

    def test_set_family_validation(self):
        with pytest.raises(ValueError):
            nl.SetFamily({})


class TestCoincidence:
    def test_gamma_independence_linear(self):
        spec = nl.DissipativitySpec(field=lambda t, x: -x + 1.0,
                                    a=lambda t: -1.0, b=lambda t: 1.0,
                                    dimension=1)
        dists = nl.attractor_coincidence(spec, [-2.0, 0.0], 0.0,
                                         [0.25, 0.5], seeds_per_time=4)
        for gamma, d in dists.items():
            assert d <= 1e-4, (gamma, d)
