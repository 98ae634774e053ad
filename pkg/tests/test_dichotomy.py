import json
import math

import numpy as np
import pytest
from scipy.optimize import linprog

import nedlab as nl
from nedlab import (
    DichotomyCertificate,
    ExponentPair,
    GridSpec,
    InapplicableError,
    ProjectionFamily,
)

from conftest import constant_scalar, decay_cert


class TestExponentPair:
    def test_validation(self):
        with pytest.raises(ValueError):
            ExponentPair(0.0, 1.0)
        with pytest.raises(ValueError):
            ExponentPair(1.0, -0.1)
        p = ExponentPair(1.0, 0.0)
        assert p.rate == 1.0 and p.growth == 0.0


class TestCertificate:
    def test_json_roundtrip(self):
        cert = DichotomyCertificate(
            "I", nl.HALF_LINE_PLUS, 2.5, ExponentPair(1.5, 0.25),
            unstable=ExponentPair(0.75, 0.5), projection="identity")
        back = DichotomyCertificate.from_dict(json.loads(cert.to_json()))
        assert back == cert

    def test_combined_exponents(self):
        cert = DichotomyCertificate(
            "II", nl.FULL_LINE, 1.0, ExponentPair(2.0, 0.5),
            unstable=ExponentPair(3.0, 0.75), projection="identity")
        assert cert.omega == 2.0     # min of the rates
        assert cert.upsilon == 0.75  # max of the growths

    def test_m_below_one_rejected(self):
        with pytest.raises(ValueError):
            DichotomyCertificate("I", nl.FULL_LINE, 0.5,
                                 ExponentPair(1.0, 0.0))


def _lexicographic_lp(anchors, heights, delta_max=8.0, ln_m_max=8.0):
    """Reference solver: minimize delta, then ln M, by linear programming."""
    n = len(anchors)
    a_ub = np.column_stack([-anchors, -np.ones(n)])
    b_ub = -heights
    bounds = [(0.0, delta_max), (0.0, ln_m_max)]
    first = linprog([1.0, 0.0], A_ub=a_ub, b_ub=b_ub, bounds=bounds,
                    method="highs")
    if not first.success:
        return None
    delta = first.x[0]
    second = linprog([0.0, 1.0], A_ub=a_ub, b_ub=b_ub,
                     bounds=[(delta, delta), (0.0, ln_m_max)],
                     method="highs")
    return delta, second.x[1]


class TestFitBounds:
    def test_constant_decay_exact(self):
        p = constant_scalar(-1.0)
        grid = GridSpec(0.0, 10.0, 0.5)
        sampled = nl.sample_norm_grid(p, None, grid, part="stable")
        frontier = nl.fit_bounds(sampled, "II", "stable", [0.5, 1.0])
        for alpha, delta, ln_m in frontier.entries:
            assert delta == pytest.approx(0.0, abs=1e-12)
            assert ln_m == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_lp_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = 60
        tv = rng.uniform(-5.0, 5.0, n)
        sv = tv - rng.uniform(0.0, 4.0, n)
        logn = rng.normal(scale=3.0, size=n)
        grid = nl.NormGrid(np.column_stack([tv, sv, logn]), part="stable")
        for kind in ("I", "II"):
            frontier = nl.fit_bounds(grid, kind, "stable", [0.5, 2.0])
            anchors = np.abs(tv) if kind == "II" else np.abs(sv)
            for alpha, delta, ln_m in frontier.entries:
                ref = _lexicographic_lp(anchors, logn + alpha * (tv - sv))
                assert ref is not None
                assert delta == pytest.approx(ref[0], abs=1e-8)
                assert ln_m == pytest.approx(max(ref[1], 0.0), abs=1e-8)

    def test_feasibility_of_output(self):
        rng = np.random.default_rng(42)
        tv = rng.uniform(0.0, 8.0, 80)
        sv = tv - rng.uniform(0.0, 3.0, 80)
        logn = rng.normal(size=80)
        grid = nl.NormGrid(np.column_stack([tv, sv, logn]), part="stable")
        frontier = nl.fit_bounds(grid, "I", "stable", [0.25, 1.0, 3.0])
        for alpha, delta, ln_m in frontier.entries:
            heights = logn + alpha * (tv - sv)
            assert np.all(heights <= ln_m + delta * np.abs(sv) + 1e-9)

    def test_infeasible_reported(self):
        grid = nl.NormGrid(np.array([[1.0, 0.0, 50.0]]), part="stable")
        frontier = nl.fit_bounds(grid, "II", "stable", [1.0],
                                 delta_max=2.0, ln_m_max=2.0)
        assert frontier.entries == [] and frontier.infeasible == [1.0]

    def test_unsorted_alpha_grid_rejected(self):
        grid = nl.NormGrid(np.array([[1.0, 0.0, 0.0]]), part="stable")
        with pytest.raises(ValueError):
            nl.fit_bounds(grid, "II", "stable", [2.0, 1.0])


class TestCheckCertificate:
    def test_exact_boundary(self):
        p = constant_scalar(-1.0)
        grid = GridSpec(0.0, 10.0, 0.5)
        assert nl.check_certificate(p, decay_cert(1.0), grid) == pytest.approx(
            0.0, abs=1e-12)
        assert nl.check_certificate(p, decay_cert(1.1), grid) > 0.0
        # Equality is attained at t = s, so a slack rate still yields 0.
        assert nl.check_certificate(p, decay_cert(0.9), grid) == pytest.approx(
            0.0, abs=1e-12)

    def test_unstable_part(self):
        p = constant_scalar(1.0)  # expanding
        cert = DichotomyCertificate(
            "I", nl.FULL_LINE, 1.0, ExponentPair(1.0, 0.0),
            unstable=ExponentPair(1.0, 0.0), projection="identity")
        grid = GridSpec(-3.0, 3.0, 0.5)
        assert nl.check_certificate(p, cert, grid) == pytest.approx(0.0,
                                                                    abs=1e-10)

    def test_domain_clipping(self):
        p = constant_scalar(-1.0)
        cert = decay_cert(1.0, domain=nl.HALF_LINE_PLUS)
        # Full-line grid must be clipped to the certificate's half-line.
        v = nl.check_certificate(p, cert, GridSpec(-5.0, 5.0, 0.5))
        assert v == pytest.approx(0.0, abs=1e-12)


class TestConversion:
    def _random_cert(self, rng, domain):
        # Dyadic constants make the conversion arithmetic bitwise exact.
        scale = 2.0 ** -20
        rate = scale * float(rng.integers(1, 2 ** 22))
        growth = scale * float(rng.integers(0, 2 ** 22))
        m = 1.0 + scale * float(rng.integers(0, 2 ** 22))
        unstable = None
        if rng.integers(2):
            unstable = ExponentPair(scale * float(rng.integers(1, 2 ** 22)),
                                    growth)
        kind = "I" if rng.integers(2) else "II"
        proj = "zero" if unstable is None else "identity"
        return DichotomyCertificate(kind, domain, m, ExponentPair(rate, growth),
                                    unstable=unstable, projection=proj)

    def test_round_trip_bitwise(self):
        rng = np.random.default_rng(7)
        done = 0
        while done < 100:
            domain = nl.HALF_LINE_PLUS if rng.integers(2) else nl.HALF_LINE_MINUS
            cert = self._random_cert(rng, domain)
            try:
                there = nl.convert_halfline(cert)
            except InapplicableError:
                continue  # conversion would cross zero rate; skip
            back = nl.convert_halfline(there)
            assert back == cert  # dataclass equality: bitwise on floats
            done += 1

    def test_kind_and_shift(self):
        cert = DichotomyCertificate("I", nl.HALF_LINE_PLUS, 2.0,
                                    ExponentPair(1.0, 0.5), projection="zero")
        conv = nl.convert_halfline(cert)
        assert conv.kind == "II"
        assert conv.stable == ExponentPair(1.5, 0.5)
        assert conv.m == cert.m

    def test_converted_certificate_still_holds(self, barreira):
        grid = GridSpec(0.0, 40.0, 0.25)
        for claim in barreira.claims:
            cert = claim.certificate
            if cert.domain.kind != "plus":
                continue
            assert nl.check_certificate(barreira.process, cert, grid) <= 1e-9
            conv = nl.convert_halfline(cert)
            assert nl.check_certificate(barreira.process, conv, grid) <= 1e-9

    def test_full_line_rejected(self):
        with pytest.raises(InapplicableError):
            nl.convert_halfline(decay_cert(1.0))

    def test_nonpositive_rate_rejected(self):
        cert = DichotomyCertificate("II", nl.HALF_LINE_PLUS, 1.0,
                                    ExponentPair(1.0, 2.0), projection="zero")
        with pytest.raises(InapplicableError):
            nl.convert_halfline(cert)  # 1 - 2 <= 0


class TestUnifyExponents:
    def test_trade_growth_for_rate(self):
        cert = DichotomyCertificate("II", nl.HALF_LINE_PLUS, 3.0,
                                    ExponentPair(2.0, 0.5), projection="zero")
        uni = nl.unify_exponents(cert)
        assert uni.kind == "I"
        assert uni.stable == ExponentPair(1.5, 0.5)
        assert uni.m == 3.0

    def test_hypothesis_enforced(self):
        cert = DichotomyCertificate("II", nl.HALF_LINE_PLUS, 1.0,
                                    ExponentPair(1.0, 1.5), projection="zero")
        with pytest.raises(InapplicableError):
            nl.unify_exponents(cert)

    def test_unified_certificate_holds(self, barreira):
        grid = GridSpec(0.0, 40.0, 0.25)
        cert = [c.certificate for c in barreira.claims
                if c.certificate.domain.kind == "plus"
                and c.certificate.kind == "II"][0]  # (3, 2) on R+
        uni = nl.unify_exponents(cert)
        assert uni.kind == "I" and uni.stable == ExponentPair(1.0, 2.0)
        assert nl.check_certificate(barreira.process, uni, grid) <= 1e-9


class TestDualCertificate:
    def test_kind_and_projection_swap(self):
        cert = decay_cert(1.0, m=2.0)
        dual = nl.dual_certificate(cert)
        assert dual.kind == "I"
        assert dual.projection == "identity"
        assert dual.m == cert.m

    def test_dual_pair_validates_on_dual_process(self, barreira):
        p = barreira.process
        cert = [c.certificate for c in barreira.claims
                if c.certificate.domain.kind == "plus"
                and c.certificate.kind == "II"][0]
        dual_p = nl.dual_process(p)
        dual_c = nl.dual_certificate(cert)
        # Stable pairs (t, s) of p map to unstable pairs (s, t) of the
        # dual on the same half-line, so the swapped certificate holds
        # on the identical window.
        grid = GridSpec(0.0, 40.0, 0.25)
        assert nl.check_certificate(dual_p, dual_c, grid) <= 1e-9


class TestRejectionEvidence:
    def test_no_false_rejection_on_genuine_nedi(self):
        for rate in (-0.5, -1.5):
            p = constant_scalar(rate)
            ev = nl.nedi_rejection_evidence(
                p, [(-5.0, 5.0), (-10.0, 10.0)],
                box=((0.05, 4.0), (0.05, 4.0)), resolution=0.25, step=0.5)
            assert not ev.rejected()
            assert max(ev.min_ln_m["zero"]) <= 1e-9

    def test_window_nesting_enforced(self):
        p = constant_scalar(-1.0)
        with pytest.raises(ValueError):
            nl.nedi_rejection_evidence(p, [(-10.0, 10.0), (-5.0, 5.0)])


class TestClassify:
    def test_recovers_constant_rate(self):
        p = constant_scalar(-2.0)
        frontier, cert = nl.classify(
            p, ProjectionFamily.zero(1), "II", GridSpec(0.0, 10.0, 0.5),
            [0.5, 1.0, 1.5, 2.0], domain=nl.HALF_LINE_PLUS)
        assert cert is not None
        alpha, delta, ln_m = frontier.best()
        assert alpha == 2.0 and delta == pytest.approx(0.0, abs=1e-12)
        assert nl.check_certificate(p, cert, GridSpec(0.0, 10.0, 0.5)) <= 1e-9
