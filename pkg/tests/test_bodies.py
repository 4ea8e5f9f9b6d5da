import json
import math

import numpy as np
import pytest

from sectlab.bodies import (Ellipsoid, HPolytope, LpBall, UnboundedBodyError,
                            body_from_json, body_from_spec, center_of_mass,
                            centered_simplex, cube, linear_image, section,
                            translate, volume)
from sectlab.grassmann import Frame, sample_haar
from sectlab.sampler import StreamHandle, uniform_in_body

AXIS_FRAME_E1E2 = Frame(np.eye(3)[:, :2])
AXIS_FRAME_E1E3 = Frame(np.eye(3)[:, [0, 2]])


def all_kinds():
    return [
        LpBall(3, 2.0),
        LpBall(3, 1.0),
        LpBall(2, 3.0, 1.4),
        cube(3),
        Ellipsoid(np.diag([1.0, 1.0, 4.0])),
        centered_simplex(3),
        HPolytope(np.vstack([np.eye(2), -np.eye(2), [[1.0, 1.0]]]),
                  np.array([1.0, 1.0, 1.0, 1.0, 1.5])),
        linear_image(cube(2), np.array([[2.0, 0.3], [0.0, 0.5]])),
        translate(LpBall(2, 2.0), np.array([0.25, -0.1])),
        section(cube(3), AXIS_FRAME_E1E2),
    ]


class TestRadial:
    def test_cube_axis_and_diagonal(self):
        c = cube(3)
        assert c.radial(np.array([1.0, 0, 0])[None]) == pytest.approx(1.0)
        diag = np.ones((1, 3)) / math.sqrt(3)
        assert c.radial(diag)[0] == pytest.approx(math.sqrt(3), rel=1e-12)

    def test_l1_ball_diagonal(self):
        b = LpBall(2, 1.0)
        d = np.array([[1.0, 1.0]]) / math.sqrt(2)
        assert b.radial(d)[0] == pytest.approx(1 / math.sqrt(2), rel=1e-12)

    def test_ellipsoid(self):
        e = Ellipsoid(np.diag([1.0, 4.0]))
        assert e.radial(np.array([[1.0, 0.0]]))[0] == pytest.approx(1.0)
        assert e.radial(np.array([[0.0, 1.0]]))[0] == pytest.approx(2.0)

    def test_hpolytope_matches_cube(self):
        hp = HPolytope(np.vstack([np.eye(3), -np.eye(3)]), np.ones(6))
        dirs = StreamHandle(0).generator().standard_normal((200, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        assert np.allclose(hp.radial(dirs), cube(3).radial(dirs), rtol=1e-12)
        assert hp.symmetric

    @pytest.mark.parametrize("body", all_kinds())
    def test_radial_membership_consistency(self, body):
        gen = StreamHandle(17).generator()
        dirs = gen.standard_normal((10_000, body.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        rho = body.radial(dirs)
        assert np.all(rho > 0)
        inside = dirs * (0.999 * rho)[:, None]
        outside = dirs * (1.001 * rho)[:, None]
        assert bool(np.all(body.contains(inside)))
        assert not np.any(body.contains(outside))

    @pytest.mark.parametrize("body", all_kinds())
    def test_bounding_radius_dominates(self, body):
        gen = StreamHandle(23).generator()
        dirs = gen.standard_normal((2000, body.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        assert body.radial(dirs).max() <= body.bounding_radius() * (1 + 1e-12)

    def test_symmetric_radial_is_even(self):
        for body in all_kinds():
            if not body.symmetric:
                continue
            gen = StreamHandle(29).generator()
            dirs = gen.standard_normal((500, body.dim))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            assert np.allclose(body.radial(dirs), body.radial(-dirs), rtol=1e-12)


class TestSection:
    def test_ball_section_is_disc(self):
        b = LpBall(3, 2.0)
        f = sample_haar(3, 2, StreamHandle(3))
        s = section(b, f)
        dirs = StreamHandle(4).generator().standard_normal((100, 2))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        assert np.allclose(s.radial(dirs), 1.0, rtol=1e-12)

    def test_axis_cube_section_is_square(self):
        s = section(cube(3), AXIS_FRAME_E1E2)
        assert s.radial(np.array([[1.0, 0.0]]))[0] == pytest.approx(1.0)
        d = np.array([[1.0, 1.0]]) / math.sqrt(2)
        assert s.radial(d)[0] == pytest.approx(math.sqrt(2), rel=1e-12)

    def test_ellipsoid_section_semiaxes(self):
        e = Ellipsoid(np.diag([1.0, 1.0, 4.0]))
        s = section(e, AXIS_FRAME_E1E3)
        assert s.radial(np.array([[1.0, 0.0]]))[0] == pytest.approx(1.0)
        assert s.radial(np.array([[0.0, 1.0]]))[0] == pytest.approx(2.0)

    def test_radial_delegates_exactly(self):
        body = LpBall(3, 1.0)
        f = sample_haar(3, 2, StreamHandle(5))
        s = section(body, f)
        u = StreamHandle(6).generator().standard_normal((50, 2))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        assert np.array_equal(s.radial(u), body.radial(f.embed(u)))

    def test_rejects_full_dimension(self):
        with pytest.raises(ValueError):
            section(cube(2), Frame(np.eye(2)))


class TestLinearImage:
    def test_identity_is_noop(self):
        body = LpBall(2, 1.0)
        img = linear_image(body, np.eye(2))
        dirs = StreamHandle(7).generator().standard_normal((100, 2))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        assert np.allclose(img.radial(dirs), body.radial(dirs), rtol=1e-12)

    def test_homothety(self):
        img = linear_image(LpBall(2, 2.0), 2.0 * np.eye(2))
        dirs = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert np.allclose(img.radial(dirs), 2.0)
        assert img.exact_volume == pytest.approx(4 * math.pi)

    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_homogeneity(self, lam):
        body = centered_simplex(3)
        img = linear_image(body, lam * np.eye(3))
        dirs = StreamHandle(8).generator().standard_normal((200, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        assert np.allclose(img.radial(dirs), lam * body.radial(dirs), rtol=1e-10)

    def test_det_one_preserves_area(self):
        img = linear_image(LpBall(2, 2.0), np.diag([2.0, 0.5]))
        assert img.exact_volume == pytest.approx(math.pi, rel=1e-12)
        est = volume(img, 40_000, StreamHandle(9))
        assert abs(est.value - math.pi) <= 3 * est.std_error

    def test_rejects_singular(self):
        with pytest.raises(ValueError, match="singular"):
            linear_image(cube(2), np.array([[1.0, 1.0], [1.0, 1.0]]))


class TestTranslate:
    def test_membership_is_shifted(self):
        t = translate(LpBall(2, 2.0), np.array([0.3, 0.0]))
        assert bool(t.contains(np.array([1.2, 0.0])))
        assert not bool(t.contains(np.array([-0.8, 0.0])))

    def test_radial_by_bisection(self):
        t = translate(LpBall(2, 2.0), np.array([0.3, 0.0]))
        dirs = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        rho = t.radial(dirs)
        assert rho[0] == pytest.approx(1.3, abs=1e-9)
        assert rho[1] == pytest.approx(0.7, abs=1e-9)
        assert rho[2] == pytest.approx(math.sqrt(1 - 0.09), abs=1e-9)

    def test_origin_must_stay_interior(self):
        with pytest.raises(ValueError, match="origin not interior"):
            translate(LpBall(2, 2.0), np.array([1.0, 0.0]))
        with pytest.raises(ValueError, match="origin not interior"):
            translate(centered_simplex(2), np.array([0.5, 0.5]))


class TestVolume:
    def test_ball_zero_variance(self):
        est = volume(LpBall(3, 2.0), 500, StreamHandle(10))
        assert est.value == pytest.approx(4 * math.pi / 3, rel=1e-12)
        assert est.std_error < 1e-12

    def test_cube(self):
        est = volume(cube(3), 100_000, StreamHandle(11))
        assert abs(est.value - 8.0) <= 3 * est.std_error

    def test_cross_polytope(self):
        est = volume(LpBall(3, 1.0), 100_000, StreamHandle(12))
        assert abs(est.value - 4 / 3) <= 3 * est.std_error

    def test_exact_volumes(self):
        assert LpBall(3, 1.0).exact_volume == pytest.approx(4 / 3)
        assert cube(3).exact_volume == pytest.approx(8.0)
        assert LpBall(4, 2.0).exact_volume == pytest.approx(math.pi ** 2 / 2)
        assert centered_simplex(3, 2.0).exact_volume == pytest.approx(8 / 6)
        assert Ellipsoid(np.diag([4.0, 1.0])).exact_volume == pytest.approx(2 * math.pi)

    def test_requires_samples(self):
        with pytest.raises(ValueError):
            volume(cube(2), 10, StreamHandle(0))


class TestCenterOfMass:
    def test_cube_centered(self):
        mean, est = center_of_mass(cube(3), 50_000, StreamHandle(13))
        assert np.all(np.abs(mean) <= 3 * est.std_error)

    def test_translated_disc(self):
        body = translate(LpBall(2, 2.0), np.array([0.3, 0.0]))
        mean, est = center_of_mass(body, 50_000, StreamHandle(14))
        assert abs(mean[0] - 0.3) <= 3 * est.std_error
        assert abs(mean[1]) <= 3 * est.std_error

    def test_shifted_simplex_recenters(self):
        # nudging the centered simplex keeps 0 interior; its mass center moves with it
        shift = np.array([0.05, 0.02])
        body = translate(centered_simplex(2), shift)
        mean, est = center_of_mass(body, 60_000, StreamHandle(15))
        assert np.all(np.abs(mean - shift) <= 3 * est.std_error + 1e-3)


class TestHPolytopeValidation:
    def test_nonpositive_offset_rejected(self):
        with pytest.raises(ValueError, match="offsets"):
            HPolytope(np.eye(2), np.array([1.0, 0.0]))

    def test_unbounded_rejected_at_construction(self):
        with pytest.raises(UnboundedBodyError):
            HPolytope(np.array([[1.0, 0.0]]), np.array([1.0]))

    def test_simplex_volume_formula(self):
        s = centered_simplex(4)
        assert s.exact_volume == pytest.approx(1 / 24)


class TestBodySpecs:
    def test_roundtrip_kinds(self):
        specs = [
            {"kind": "lp_ball", "dim": 4, "p": 1.0, "radius": 1.0},
            {"kind": "lp_ball", "dim": 2, "p": "inf", "radius": 2.0},
            {"kind": "cube", "dim": 3, "halfwidth": 0.5},
            {"kind": "ellipsoid", "matrix": [[2.0, 0.0], [0.0, 1.0]]},
            {"kind": "simplex", "dim": 3, "scale": 1.0},
            {"kind": "h_polytope", "normals": [[1, 0], [-1, 0], [0, 1], [0, -1]],
             "offsets": [1, 1, 1, 1]},
            {"kind": "linear_image", "transform": [[2.0, 0.0], [0.0, 0.5]],
             "base": {"kind": "lp_ball", "dim": 2, "p": 2.0}},
            {"kind": "translate", "shift": [0.1, 0.0],
             "base": {"kind": "cube", "dim": 2}},
        ]
        for spec in specs:
            body = body_from_spec(spec)
            assert body.dim == len(spec.get("shift", [0] * body.dim))  or body.dim >= 1

    def test_json_literal_and_unknown_kind(self):
        body = body_from_json('{"kind":"lp_ball","dim":3,"p":2.0,"radius":1.0}')
        assert isinstance(body, LpBall)
        with pytest.raises(ValueError, match="unknown body kind"):
            body_from_spec({"kind": "torus"})

    def test_json_file(self, tmp_path):
        path = tmp_path / "body.json"
        path.write_text(json.dumps({"kind": "cube", "dim": 2}))
        assert body_from_json(str(path)).dim == 2
