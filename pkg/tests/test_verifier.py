import math

import numpy as np
import pytest

from sectlab.bodies import LpBall, cube
from sectlab.measures import GaussianDensity, LebesgueDensity, RadialExpDensity
from sectlab.sampler import StreamHandle
from sectlab.verifier import (SuiteConfig, check_alpha_beta_construction,
                              check_bp_identity, check_busemann_petty_volume,
                              check_dpp, check_grinberg, check_logconcave_identity,
                              check_slicing_chain, check_stability, negative_control,
                              run_suite)

BALL3 = LpBall(3, 2.0)
CUBE3 = cube(3)


class TestBpIdentity:
    def test_ball3_matches_closed_form(self):
        rep = check_bp_identity(BALL3, 1, 200, 500, StreamHandle(1), sphere_samples=400)
        assert rep.passed
        # both sides equal 16 pi^2 / 9
        assert rep.lhs.to_linear().value == pytest.approx(16 * math.pi ** 2 / 9, rel=1e-9)
        assert rep.rhs.to_linear().value == pytest.approx(16 * math.pi ** 2 / 9, rel=0.02)

    def test_cube3(self):
        rep = check_bp_identity(CUBE3, 1, 600, 400, StreamHandle(2), sphere_samples=500)
        assert rep.passed
        assert rep.lhs.to_linear().value == pytest.approx(64.0, rel=1e-9)

    def test_segment_sections(self):
        # k = n-1: one-point simplices, conv(0, x) has length |x|
        rep = check_bp_identity(LpBall(2, 2.0), 1, 300, 500, StreamHandle(3),
                                sphere_samples=200)
        assert rep.passed


class TestChains:
    @pytest.mark.parametrize("density", [LebesgueDensity(3), GaussianDensity(3),
                                         RadialExpDensity(3)])
    def test_slicing_ball(self, density):
        rep = check_slicing_chain(density, BALL3, 1, 100, 400, StreamHandle(4))
        assert rep.passed and rep.relation == "<="
        assert "sampled" in rep.note

    def test_slicing_example_logs(self):
        # uniform on the ball: lhs log = 2 log(4 pi/3); all RHS factors closed form
        rep = check_slicing_chain(LebesgueDensity(3), BALL3, 1, 50, 300, StreamHandle(5))
        assert rep.lhs.value == pytest.approx(2 * math.log(4 * math.pi / 3), abs=1e-9)
        gamma3 = 0.8271339878658664
        rhs_expected = (math.log(gamma3 ** -3) + math.log(4 * math.pi)
                        + 2 * math.log(math.pi) + (2 / 3) * math.log(4 * math.pi / 3))
        assert rep.rhs.value == pytest.approx(rhs_expected, rel=1e-6)

    def test_stability_matches_slicing_form(self):
        a = check_stability(GaussianDensity(3), CUBE3, 1, 80, 300, StreamHandle(6))
        b = check_slicing_chain(GaussianDensity(3), CUBE3, 1, 80, 300, StreamHandle(6))
        assert a.passed and b.passed
        assert a.lhs.value == b.lhs.value     # same chain, same substreams
        assert a.check_name != b.check_name

    def test_l1_ball_4d(self):
        rep = check_slicing_chain(LebesgueDensity(4), LpBall(4, 1.0), 2, 80, 300,
                                  StreamHandle(7))
        assert rep.passed


class TestDpp:
    def test_uniform_ball_sits_at_equality(self):
        rep = check_dpp(LebesgueDensity(3), BALL3, 1, 60, 300, StreamHandle(8))
        assert rep.passed
        assert abs(rep.lhs.value - rep.rhs.value) < 1e-6   # log equality

    def test_gaussian_ball(self):
        rep = check_dpp(GaussianDensity(3), BALL3, 1, 60, 300, StreamHandle(9))
        assert rep.passed
        assert rep.margin > 3 or math.isinf(rep.margin)

    def test_cube_strict_inequality(self):
        # the cube sits only ~1.3% below the bound, so the margin is positive
        # but not many SE units wide
        rep = check_dpp(LebesgueDensity(3), CUBE3, 1, 120, 400, StreamHandle(10))
        assert rep.passed and rep.margin > 0

    def test_sup_recorded(self):
        rep = check_dpp(GaussianDensity(3), CUBE3, 1, 50, 300, StreamHandle(11))
        assert rep.inputs["sup_on_body"] == pytest.approx(1.0)
        assert rep.inputs["sup_is_exact"]


class TestLogconcaveIdentity:
    def test_uniform_reduces_to_bp(self):
        rep = check_logconcave_identity(LebesgueDensity(3), BALL3, 1, 200, 300,
                                        StreamHandle(12), sphere_samples=300)
        assert rep.passed

    def test_gaussian_ball(self):
        rep = check_logconcave_identity(GaussianDensity(3), BALL3, 1, 300, 300,
                                        StreamHandle(13), sphere_samples=400)
        assert rep.passed
        mu = 3.1302041562817155
        assert rep.lhs.to_linear().value == pytest.approx(mu ** 2, rel=1e-6)

    def test_requires_symmetry_and_flags(self):
        from sectlab.bodies import centered_simplex
        with pytest.raises(ValueError, match="symmetric"):
            check_logconcave_identity(GaussianDensity(3), centered_simplex(3), 1,
                                      10, 100, StreamHandle(14))

        class Odd(GaussianDensity):
            def __init__(self):
                super().__init__(3)
                self.even = False

        with pytest.raises(ValueError, match="log-concave"):
            check_logconcave_identity(Odd(), CUBE3, 1, 10, 100, StreamHandle(15))


class TestGrinberg:
    def test_two_part_reports(self):
        reports = check_grinberg(CUBE3, 1, 2, 700, 1000, StreamHandle(16))
        names = [r.check_name for r in reports]
        assert names == ["grinberg_invariance", "grinberg_maximality"]
        assert all(r.passed for r in reports)
        assert len(reports[0].inputs["all_values"]) == 3

    def test_ball_equality_case(self):
        reports = check_grinberg(BALL3, 1, 1, 100, 300, StreamHandle(17))
        max_rep = reports[1]
        assert max_rep.passed
        assert max_rep.lhs.value == pytest.approx(1.2089939655123523, rel=1e-6)

    def test_maximality_l1_ball(self):
        # the cross-polytope value sits within half a percent of the ball's
        reports = check_grinberg(LpBall(4, 1.0), 2, 0, 250, 600, StreamHandle(18))
        assert reports[1].passed


class TestBusemannPetty:
    def test_cube_in_circumscribed_ball(self):
        rep = check_busemann_petty_volume(CUBE3, LpBall(3, 2.0, math.sqrt(3)), 1,
                                          200, 500, StreamHandle(19))
        assert rep.passed
        assert rep.inputs["dominance_violations"] == 0

    def test_ball_in_double_ball(self):
        rep = check_busemann_petty_volume(BALL3, LpBall(3, 2.0, 2.0), 1, 100, 300,
                                          StreamHandle(20))
        assert rep.passed

    def test_equal_bodies_equality(self):
        rep = check_busemann_petty_volume(CUBE3, cube(3), 1, 100, 300, StreamHandle(21))
        assert rep.passed
        assert rep.inputs["phi_ratio"] == pytest.approx(1.0, abs=1e-12)

    def test_hypothesis_failure_is_reported_not_raised(self):
        # K = 2 ball dominates D = ball on every frame, so dominance fails
        rep = check_busemann_petty_volume(LpBall(3, 2.0, 2.0), BALL3, 1, 40, 300,
                                          StreamHandle(22))
        assert not rep.passed
        assert "hypothesis fails" in rep.note
        assert rep.inputs["dominance_violations"] == 40


class TestAlphaBeta:
    def test_ball_gives_unit_radius(self):
        rep = check_alpha_beta_construction(BALL3, 1, 60, 300, StreamHandle(23))
        assert rep.passed
        assert rep.inputs["r"] == pytest.approx(1.0, rel=1e-9)

    def test_square_diagonal(self):
        rep = check_alpha_beta_construction(cube(2), 1, 2000, 200, StreamHandle(24))
        assert rep.passed
        assert rep.inputs["r"] == pytest.approx(math.sqrt(2), rel=2e-3)

    def test_l1_ball_by_construction(self):
        rep = check_alpha_beta_construction(LpBall(3, 1.0), 1, 100, 300, StreamHandle(25))
        assert rep.passed
        assert rep.inputs["implied_beta_power_k"] > 0

    def test_rejects_asymmetric(self):
        from sectlab.bodies import centered_simplex
        with pytest.raises(ValueError, match="symmetric"):
            check_alpha_beta_construction(centered_simplex(2), 1, 10, 100, StreamHandle(26))


class TestSuite:
    def test_empty_grid_passes(self):
        res = run_suite(SuiteConfig(seed=0, grid=[]))
        assert res.status == "pass" and res.reports == [] and res.exit_code == 0

    def test_small_grid_deterministic(self):
        grid = [
            ("dpp_bound", {"density": LebesgueDensity(3), "body": BALL3, "k": 1,
                           "frames": 30, "sphere_samples": 200}, "ball"),
            ("slicing_chain", {"density": GaussianDensity(3), "body": CUBE3, "k": 1,
                               "frames": 30, "sphere_samples": 200}, "cube"),
        ]
        a = run_suite(SuiteConfig(seed=5, grid=grid))
        b = run_suite(SuiteConfig(seed=5, grid=grid))
        assert a.status == "pass"
        assert a.as_dict() == b.as_dict()

    def test_negative_control_forces_fail(self):
        res = run_suite(SuiteConfig(seed=0, grid=[], include_negative_control=True))
        assert res.status == "fail" and res.exit_code == 1
        assert res.reports[-1].check_name == "negative_control"

    def test_error_status_is_distinct(self):
        grid = [("bp_identity", {"body": CUBE3, "k": 5, "frames": 10,
                                 "points_per_frame": 100}, "bad-k")]
        res = run_suite(SuiteConfig(seed=0, grid=grid))
        assert res.status == "error" and res.exit_code == 2
        assert res.errors and "bad-k" in res.errors[0]


def test_negative_control_fails_decisively():
    rep = negative_control(CUBE3, 1, 100, 400, StreamHandle(27))
    assert not rep.passed
    assert rep.margin < -3
