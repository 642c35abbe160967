"""Linear blendshape face model: template + expression basis + rigid head pose.

A stand-in for a licensed 3DMM: the template is a deterministic ellipsoid
point lattice and the expression basis is an orthonormalized set of seeded
Gaussian displacement fields, so every model is a pure function of
(seed, vertex_count, expr_dim).
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PoseAngles:
    """Head rotation in radians: yaw about +Y, pitch about +X, roll about +Z."""

    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def as_array(self):
        return np.array([self.yaw, self.pitch, self.roll], dtype=np.float64)


@dataclass(frozen=True)
class MotionFrame:
    expr: np.ndarray  # (E,) expression coefficients, |expr_i| <= 4
    pose: PoseAngles = field(default_factory=PoseAngles)


@dataclass
class MotionSequence:
    """Ordered frames at a fixed 25 fps."""

    frames: list  # list[MotionFrame]
    fps: int = 25

    def __post_init__(self):
        if self.fps != 25:
            raise ValueError("fps must be exactly 25")
        if not 1 <= len(self.frames) <= 1024:
            raise ValueError(f"sequence length {len(self.frames)} out of [1, 1024]")

    def __len__(self):
        return len(self.frames)

    def expr_matrix(self):
        return np.stack([f.expr for f in self.frames]).astype(np.float64)

    def pose_matrix(self):
        return np.stack([f.pose.as_array() for f in self.frames])

    @staticmethod
    def from_arrays(expr, pose, fps=25):
        expr = np.asarray(expr, dtype=np.float64)
        pose = np.asarray(pose, dtype=np.float64)
        frames = [
            MotionFrame(expr=expr[t].copy(), pose=PoseAngles(*pose[t]))
            for t in range(expr.shape[0])
        ]
        return MotionSequence(frames=frames, fps=fps)


@dataclass(frozen=True)
class FaceMesh:
    vertices: np.ndarray  # (V, 3)


class FaceModel:
    """Immutable template mesh plus linear expression basis.

    template: (V, 3); expr_basis: (E, V, 3). The flattened basis rows are
    pairwise orthonormal for synthetic models.
    """

    def __init__(self, template, expr_basis, seed=0):
        template = np.asarray(template, dtype=np.float64)
        expr_basis = np.asarray(expr_basis, dtype=np.float64)
        if template.ndim != 2 or template.shape[1] != 3:
            raise ValueError("template must be (V, 3)")
        if expr_basis.ndim != 3 or expr_basis.shape[1:] != template.shape:
            raise ValueError("expr_basis must be (E, V, 3) matching template")
        if not (np.isfinite(template).all() and np.isfinite(expr_basis).all()):
            raise ValueError("face model contains non-finite values")
        self.template = template
        self.expr_basis = expr_basis
        self.seed = seed
        self.vertex_count = template.shape[0]
        self.expr_dim = expr_basis.shape[0]
        # (E, 3V) flattened view used by the mesh loss
        self.basis_flat = expr_basis.reshape(self.expr_dim, -1).copy()
        self.template_flat = template.reshape(-1).copy()
        self.template.setflags(write=False)
        self.expr_basis.setflags(write=False)


def make_synthetic_model(seed, vertex_count=512, expr_dim=16):
    """Deterministic synthetic face model.

    Template: ellipsoid point lattice (Fibonacci sphere scaled to semi-axes
    0.7 x 1.0 x 0.8, longest axis length 2.0). Basis: Gram-Schmidt
    orthonormalized seeded Gaussian draws.
    """
    if not vertex_count >= expr_dim >= 1:
        raise ValueError("need vertex_count >= expr_dim >= 1")
    if expr_dim > 3 * vertex_count:
        raise ValueError("expr_dim > 3*vertex_count: basis cannot be orthonormal")

    v = vertex_count
    # Fibonacci lattice on the unit sphere, then anisotropic scaling
    i = np.arange(v, dtype=np.float64)
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    z = 1.0 - 2.0 * (i + 0.5) / v
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    theta = 2.0 * np.pi * i / golden
    template = np.stack([0.7 * r * np.cos(theta), 1.0 * z, 0.8 * r * np.sin(theta)], axis=1)

    rng = np.random.default_rng(np.uint64(seed))
    draws = rng.standard_normal((expr_dim, 3 * v))
    basis = _gram_schmidt(draws)
    return FaceModel(template=template, expr_basis=basis.reshape(expr_dim, v, 3), seed=seed)


def _gram_schmidt(rows):
    """Classical Gram-Schmidt with re-orthogonalization, row by row."""
    out = np.zeros_like(rows)
    for i in range(rows.shape[0]):
        v = rows[i].copy()
        for _ in range(2):  # second pass kills residual overlap
            for j in range(i):
                v -= np.dot(out[j], v) * out[j]
        n = np.linalg.norm(v)
        if n < 1e-12:
            raise ValueError(f"degenerate basis draw at row {i}")
        out[i] = v / n
    return out


def rotation_matrix(pose):
    """R = R_roll(+Z) @ R_pitch(+X) @ R_yaw(+Y), right-handed."""
    cy, sy = np.cos(pose.yaw), np.sin(pose.yaw)
    cp, sp = np.cos(pose.pitch), np.sin(pose.pitch)
    cr, sr = np.cos(pose.roll), np.sin(pose.roll)
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cp, -sp], [0.0, sp, cp]])
    rz = np.array([[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]])
    return rz @ rx @ ry


def decode_mesh(model, frame):
    """Vertices = R(pose) applied row-wise to (template + sum_i expr_i * B_i)."""
    expr = np.asarray(frame.expr, dtype=np.float64)
    if expr.shape != (model.expr_dim,):
        raise ValueError(
            f"expr has shape {expr.shape}, model expects ({model.expr_dim},)"
        )
    shaped = model.template + np.tensordot(expr, model.expr_basis, axes=(0, 0))
    r = rotation_matrix(frame.pose)
    return FaceMesh(vertices=shaped @ r.T)


def decode_mesh_batch(model, expr, pose=None):
    """Vectorized decode for (T, E) expression rows; pose (T, 3) optional."""
    expr = np.asarray(expr, dtype=np.float64)
    shaped = expr @ model.basis_flat + model.template_flat
    shaped = shaped.reshape(expr.shape[0], model.vertex_count, 3)
    if pose is not None:
        for t in range(shaped.shape[0]):
            r = rotation_matrix(PoseAngles(*pose[t]))
            shaped[t] = shaped[t] @ r.T
    return shaped


def mesh_l1(a, b):
    """Mean absolute coordinate difference between two same-shape meshes."""
    va, vb = a.vertices, b.vertices
    if va.shape != vb.shape:
        raise ValueError(f"mesh shape mismatch: {va.shape} vs {vb.shape}")
    return float(np.mean(np.abs(va - vb)))
