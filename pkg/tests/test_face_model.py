import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facetok.face_model import (
    FaceMesh,
    MotionFrame,
    MotionSequence,
    PoseAngles,
    decode_mesh,
    decode_mesh_batch,
    make_synthetic_model,
    mesh_l1,
    rotation_matrix,
)


@pytest.fixture(scope="module")
def model():
    return make_synthetic_model(7, 512, 16)


class TestRotation:
    def test_yaw_quarter_turn_sends_x_to_minus_z(self):
        r = rotation_matrix(PoseAngles(yaw=np.pi / 2))
        np.testing.assert_allclose(r @ np.array([1.0, 0, 0]), [0, 0, -1], atol=1e-12)

    def test_pitch_quarter_turn_sends_y_to_z(self):
        r = rotation_matrix(PoseAngles(pitch=np.pi / 2))
        np.testing.assert_allclose(r @ np.array([0, 1.0, 0]), [0, 0, 1], atol=1e-12)

    def test_roll_quarter_turn_sends_x_to_y(self):
        r = rotation_matrix(PoseAngles(roll=np.pi / 2))
        np.testing.assert_allclose(r @ np.array([1.0, 0, 0]), [0, 1, 0], atol=1e-12)

    def test_zero_pose_is_identity(self):
        np.testing.assert_allclose(rotation_matrix(PoseAngles()), np.eye(3), atol=1e-15)

    @given(
        yaw=st.floats(-np.pi, np.pi),
        pitch=st.floats(-np.pi, np.pi),
        roll=st.floats(-np.pi, np.pi),
    )
    @settings(max_examples=50, deadline=None)
    def test_always_a_proper_rotation(self, yaw, pitch, roll):
        r = rotation_matrix(PoseAngles(yaw, pitch, roll))
        np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)

    def test_composition_order_roll_pitch_yaw(self):
        pose = PoseAngles(0.3, -0.2, 0.5)
        expected = (
            rotation_matrix(PoseAngles(roll=pose.roll))
            @ rotation_matrix(PoseAngles(pitch=pose.pitch))
            @ rotation_matrix(PoseAngles(yaw=pose.yaw))
        )
        np.testing.assert_allclose(rotation_matrix(pose), expected, atol=1e-14)


class TestSyntheticModel:
    def test_deterministic_given_seed(self, model):
        again = make_synthetic_model(7, 512, 16)
        np.testing.assert_array_equal(model.template, again.template)
        np.testing.assert_array_equal(model.expr_basis, again.expr_basis)

    def test_different_seed_changes_basis(self, model):
        other = make_synthetic_model(8, 512, 16)
        assert not np.array_equal(model.expr_basis, other.expr_basis)
        np.testing.assert_array_equal(model.template, other.template)  # template is seed-free

    def test_basis_rows_orthonormal(self, model):
        g = model.basis_flat @ model.basis_flat.T
        np.testing.assert_allclose(g, np.eye(16), atol=1e-10)

    def test_template_longest_axis_length_two(self, model):
        spans = model.template.max(0) - model.template.min(0)
        assert spans.max() == pytest.approx(2.0, abs=0.01)
        # anisotropic: the three spans are distinct
        assert spans[0] < spans[2] < spans[1]

    def test_shapes(self, model):
        assert model.template.shape == (512, 3)
        assert model.expr_basis.shape == (16, 512, 3)
        assert model.basis_flat.shape == (16, 1536)

    def test_rejects_bad_dimensions(self):
        with pytest.raises(ValueError):
            make_synthetic_model(0, 4, 16)  # expr_dim > 3*vertex... actually 16>12
        with pytest.raises(ValueError):
            make_synthetic_model(0, 8, 0)

    def test_template_read_only(self, model):
        with pytest.raises(ValueError):
            model.template[0, 0] = 99.0


class TestDecode:
    def test_zero_expression_zero_pose_is_template(self, model):
        mesh = decode_mesh(model, MotionFrame(expr=np.zeros(16)))
        np.testing.assert_allclose(mesh.vertices, model.template, atol=1e-15)

    def test_linear_in_coefficients(self, model):
        e1 = np.zeros(16)
        e1[3] = 1.0
        base = decode_mesh(model, MotionFrame(expr=np.zeros(16))).vertices
        one = decode_mesh(model, MotionFrame(expr=e1)).vertices
        two = decode_mesh(model, MotionFrame(expr=2 * e1)).vertices
        np.testing.assert_allclose(two - base, 2 * (one - base), atol=1e-12)

    def test_unit_coefficient_displacement_norm_is_one(self, model):
        # basis rows are unit vectors in flattened mesh space
        e = np.zeros(16)
        e[5] = 1.0
        d = decode_mesh(model, MotionFrame(expr=e)).vertices - model.template
        assert np.linalg.norm(d) == pytest.approx(1.0, abs=1e-10)

    def test_pose_rotates_whole_mesh(self, model):
        pose = PoseAngles(0.4, -0.1, 0.2)
        mesh = decode_mesh(model, MotionFrame(expr=np.zeros(16), pose=pose))
        r = rotation_matrix(pose)
        np.testing.assert_allclose(mesh.vertices, model.template @ r.T, atol=1e-12)

    def test_batch_matches_single(self, model):
        rng = np.random.default_rng(0)
        expr = rng.standard_normal((5, 16))
        pose = rng.uniform(-1, 1, (5, 3))
        batch = decode_mesh_batch(model, expr, pose)
        for t in range(5):
            single = decode_mesh(model, MotionFrame(expr=expr[t], pose=PoseAngles(*pose[t])))
            np.testing.assert_allclose(batch[t], single.vertices, atol=1e-12)

    def test_wrong_expr_dim_rejected(self, model):
        with pytest.raises(ValueError, match="expects"):
            decode_mesh(model, MotionFrame(expr=np.zeros(5)))


class TestMeshL1:
    def test_zero_for_identical(self, model):
        mesh = decode_mesh(model, MotionFrame(expr=np.zeros(16)))
        assert mesh_l1(mesh, mesh) == 0.0

    def test_known_offset(self):
        a = FaceMesh(vertices=np.zeros((4, 3)))
        b = FaceMesh(vertices=np.full((4, 3), 0.5))
        assert mesh_l1(a, b) == pytest.approx(0.5)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            mesh_l1(FaceMesh(np.zeros((4, 3))), FaceMesh(np.zeros((5, 3))))


class TestMotionSequence:
    def test_fps_must_be_25(self):
        with pytest.raises(ValueError, match="25"):
            MotionSequence(frames=[MotionFrame(expr=np.zeros(16))], fps=30)

    def test_length_bounds(self):
        with pytest.raises(ValueError):
            MotionSequence(frames=[])
        with pytest.raises(ValueError):
            MotionSequence(frames=[MotionFrame(expr=np.zeros(16))] * 1025)

    def test_from_arrays_round_trip(self):
        rng = np.random.default_rng(1)
        expr = rng.standard_normal((10, 16))
        pose = rng.standard_normal((10, 3))
        seq = MotionSequence.from_arrays(expr, pose)
        np.testing.assert_allclose(seq.expr_matrix(), expr)
        np.testing.assert_allclose(seq.pose_matrix(), pose)
