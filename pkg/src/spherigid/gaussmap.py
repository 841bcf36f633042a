"""The transported Gauss map of a hypersurface and its mapping degree.

Given a basepoint p0 whose antipode misses the surface, every normal
vector can be carried to the tangent space at p0 along minimizing
geodesics.  The resulting map into the unit n-sphere of that tangent
space has a closed form

    gamma(p) = eta(p) - c(p) (p + p0),      c(p) = <eta(p), p0> / (1 + <p, p0>)

and its differential, pulled back to p, is -(A + c I) where A is the
shape operator.  The mapping degree is computed by quadrature of the
signed Jacobian density against the mesh weights; the sign bookkeeping
uses the frame convention of :mod:`spherigid.immersion` and is
normalized so that a small inward-oriented distance sphere about p0 has
degree +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AntipodalPoints, BadDimension, NonIntegerDegree, SingularGaussMap
from .immersion import HypersurfaceMesh, SurfaceSample, _normal_raw, _tangent_data
from .sphere import SpherePoint, TangentVector, TOL_ANTIPODAL

SINGULAR_DET_TOL = 1e-8
DEGREE_RESIDUAL_LIMIT = 0.05
H_RELATIONSHIP = 1e-4


def sphere_volume(n: int) -> float:
    """Riemannian volume of the unit n-sphere."""
    if n < 1:
        raise BadDimension("sphere volume needs n >= 1")
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


@dataclass
class GaussMapContext:
    """A basepoint plus a mesh, with the antipode-avoidance margin checked once.

    Batched per-sample quantities (transport denominators, coefficients,
    map values) are precomputed on construction.
    """

    basepoint: SpherePoint
    mesh: HypersurfaceMesh
    tol_antipodal: float = TOL_ANTIPODAL
    denominators: np.ndarray = field(init=False, repr=False)
    coefficients: np.ndarray = field(init=False, repr=False)
    gammas: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not isinstance(self.basepoint, SpherePoint):
            self.basepoint = SpherePoint(np.asarray(self.basepoint, dtype=float))
        if self.basepoint.ambient_dim != self.mesh.ambient_dim:
            raise BadDimension("basepoint dimension does not match the mesh")
        p0 = self.basepoint.coords
        points = self.mesh.point_matrix()
        normals = self.mesh.normal_matrix()
        denom = 1.0 + points @ p0
        worst = float(np.min(denom))
        if worst <= self.tol_antipodal:
            raise AntipodalPoints(
                f"the antipode of the basepoint touches the mesh (min 1 + <p, p0> = {worst:.3e})"
            )
        self.denominators = denom
        self.coefficients = (normals @ p0) / denom
        self.gammas = normals - self.coefficients[:, None] * (points + p0[None, :])

    @property
    def hypersurface_dim(self) -> int:
        return self.mesh.param_dim

    def sample_index(self, sample: SurfaceSample) -> int:
        for i, s in enumerate(self.mesh.samples):
            if s is sample:
                return i
        raise ValueError("sample does not belong to this context's mesh")


def _gamma_from_parts(p: np.ndarray, eta: np.ndarray, p0: np.ndarray) -> np.ndarray:
    c = float(np.dot(eta, p0) / (1.0 + np.dot(p, p0)))
    return eta - c * (p + p0)


def gauss_map(ctx: GaussMapContext, sample: SurfaceSample) -> TangentVector:
    """Transported normal at the basepoint: a unit vector orthogonal to it."""
    p0 = ctx.basepoint.coords
    out = _gamma_from_parts(sample.point.coords, sample.normal.vec, p0)
    return TangentVector(ctx.basepoint, out)


def transport_coefficient(ctx: GaussMapContext, sample: SurfaceSample) -> float:
    """The scalar c(p) = <eta, p0> / (1 + <p, p0>), bounded by tan(d(p, p0)/2)."""
    p0 = ctx.basepoint.coords
    return float(
        np.dot(sample.normal.vec, p0) / (1.0 + np.dot(sample.point.coords, p0))
    )


def invariant_shape(ctx: GaussMapContext, sample: SurfaceSample) -> np.ndarray:
    """Shape operator of the transported-normal field: c(p) times the identity."""
    n = ctx.hypersurface_dim
    return transport_coefficient(ctx, sample) * np.eye(n)


def invariant_shape_fd_residual(
    ctx: GaussMapContext, sample: SurfaceSample, h: float = H_RELATIONSHIP
) -> float:
    """Finite-difference verification that the transported-normal field bends as c(p) Id.

    Spreads the sample's transported normal back over neighbouring chart
    points, differentiates along each parameter direction, projects to
    the sphere's tangent space, and compares with c(p) times the chart
    velocity.  Returns the largest absolute component mismatch.
    """
    chart = ctx.mesh.chart
    p0 = ctx.basepoint.coords
    u = sample.u
    p = sample.point.coords
    w = _gamma_from_parts(p, sample.normal.vec, p0)
    c = transport_coefficient(ctx, sample)
    jac = chart.jacobian(u)
    worst = 0.0
    for a in range(chart.param_dim):
        e = np.zeros(chart.param_dim)
        e[a] = h
        q_plus = chart.point(u + e)
        q_minus = chart.point(u - e)
        v_plus = w - (np.dot(w, q_plus) / (1.0 + np.dot(q_plus, p0))) * (q_plus + p0)
        v_minus = w - (np.dot(w, q_minus) / (1.0 + np.dot(q_minus, p0))) * (q_minus + p0)
        deriv = (v_plus - v_minus) / (2.0 * h)
        deriv = deriv - np.dot(deriv, p) * p  # covariant part along the sphere
        worst = max(worst, float(np.max(np.abs(deriv - c * jac[:, a]))))
    return worst


def relationship_residual(
    ctx: GaussMapContext, sample: SurfaceSample, h: float = H_RELATIONSHIP
) -> float:
    """Largest entry of (pullback of d(gauss map)) + (A + c I) at the sample.

    The differential is taken by central differences of the map along
    each parameter direction, carried back to the sample point by
    parallel transport and expressed in the sample's orthonormal tangent
    frame; the identity says the sum with A + c I vanishes.
    """
    chart = ctx.mesh.chart
    p0 = ctx.basepoint.coords
    u = sample.u
    p = sample.point.coords
    n = chart.param_dim
    _, chol, frame = _tangent_data(chart, u)
    denom = 1.0 + float(np.dot(p, p0))

    dgamma = np.empty((chart.ambient_dim, n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        q_p = chart.point(u + e)
        q_m = chart.point(u - e)
        g_p = _gamma_from_parts(q_p, _normal_raw(chart, u + e), p0)
        g_m = _gamma_from_parts(q_m, _normal_raw(chart, u - e), p0)
        dgamma[:, a] = (g_p - g_m) / (2.0 * h)
    # Transport each column from the basepoint back to the sample point.
    pulled = dgamma - np.outer(p + p0, (dgamma.T @ p) / denom).reshape(
        chart.ambient_dim, n
    )
    lhs = frame.T @ pulled @ np.linalg.inv(chol).T
    c = transport_coefficient(ctx, sample)
    total = lhs + sample.shape + c * np.eye(n)
    return float(np.max(np.abs(total)))


def _signed_jacobians(ctx: GaussMapContext, indices: Optional[Sequence[int]] = None) -> np.ndarray:
    """Signed Jacobian density of the transported Gauss map at each sample.

    det(A + c I) times the +-1 factor that encodes the orientation of
    the surface frame against the reference orientation at the
    basepoint; calibrated so an inward small sphere about the basepoint
    integrates to +1.
    """
    mesh = ctx.mesh
    n = mesh.param_dim
    d = mesh.ambient_dim
    p0 = ctx.basepoint.coords
    if indices is None:
        sel = np.arange(len(mesh))
    else:
        sel = np.asarray(indices, dtype=int)
    points = mesh.point_matrix()[sel]
    normals = mesh.normal_matrix()[sel]
    frames = mesh.frame_stack()[sel]
    shapes = mesh.shape_stack()[sel]
    denom = ctx.denominators[sel]
    coeff = ctx.coefficients[sel]
    gammas = ctx.gammas[sel]
    m = sel.size

    det_shape = np.linalg.det(shapes + coeff[:, None, None] * np.eye(n)[None, :, :])

    # Transport the frame columns to the basepoint.
    proj = np.einsum("mdk,d->mk", frames, p0) / denom[:, None]
    moved = frames - (points + p0[None, :])[:, :, None] * proj[:, None, :]

    mat_base = np.empty((m, d, d))
    mat_base[:, :, 0] = p0[None, :]
    mat_base[:, :, 1] = gammas
    mat_base[:, :, 2:] = moved
    det_base = np.linalg.det(mat_base)

    mat_surf = np.empty((m, d, d))
    mat_surf[:, :, 0] = points
    mat_surf[:, :, 1 : n + 1] = frames
    mat_surf[:, :, n + 1] = normals
    det_surf = np.linalg.det(mat_surf)

    sign = (-1.0) ** n
    return sign * det_shape * det_base * det_surf, det_shape


def jacobian_determinant(ctx: GaussMapContext, sample: SurfaceSample) -> float:
    """Signed Jacobian density of the map at one sample."""
    idx = ctx.sample_index(sample)
    jacs, _ = _signed_jacobians(ctx, [idx])
    return float(jacs[0])


@dataclass(frozen=True)
class DegreeResult:
    """Quadrature degree of the transported Gauss map."""

    value: int
    residual: float
    raw: float
    min_abs_det: float
    samples_used: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "residual": self.residual,
            "raw": self.raw,
            "min_abs_det": self.min_abs_det,
            "samples_used": self.samples_used,
        }


def degree(ctx: GaussMapContext, indices: Optional[Sequence[int]] = None) -> DegreeResult:
    """Mapping degree by quadrature of the signed Jacobian density.

    Raises SingularGaussMap when some sample's det(A + c I) falls under
    ``SINGULAR_DET_TOL`` and NonIntegerDegree when the quadrature misses
    every integer by at least ``DEGREE_RESIDUAL_LIMIT``.
    """
    mesh = ctx.mesh
    if mesh.param_dim < 1:
        raise BadDimension("degree needs a hypersurface of dimension >= 1")
    jacs, det_shape = _signed_jacobians(ctx, indices)
    min_abs = float(np.min(np.abs(det_shape)))
    if min_abs < SINGULAR_DET_TOL:
        raise SingularGaussMap(
            f"differential of the map is singular on the mesh (min |det| = {min_abs:.3e})"
        )
    if indices is None:
        weights = mesh.weights()
    else:
        weights = mesh.weights()[np.asarray(indices, dtype=int)]
    raw = float(np.sum(weights * jacs) / sphere_volume(mesh.param_dim))
    value = int(round(raw))
    residual = abs(raw - value)
    if residual >= DEGREE_RESIDUAL_LIMIT:
        raise NonIntegerDegree(
            f"quadrature degree {raw:.6f} is not within {DEGREE_RESIDUAL_LIMIT} of an integer"
        )
    return DegreeResult(
        value=value,
        residual=residual,
        raw=raw,
        min_abs_det=min_abs,
        samples_used=int(jacs.size),
    )
