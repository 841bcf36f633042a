"""Parametrized hypersurfaces of the sphere and their curvature data.

A chart maps a rectangular parameter box (some axes periodic) into the
unit sphere of R^{n+2}.  From the chart we extract, pointwise:

* a unit normal, fixed by the frame convention that
  det[point | d_1 f | ... | d_n f | normal] has the sign of
  ``orientation_sign``;
* the shape operator in an orthonormalized tangent basis, computed from
  an exact second derivative when the chart supplies one and from
  central differences of the normal field otherwise;
* principal curvatures (ascending eigenvalues of the symmetrized shape
  matrix).

Meshes are midpoint-rule grids over the parameter box carrying
quadrature weights sqrt(det G) times the parameter cell volume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BadDimension, ConfigError, DegenerateImmersion, EmptyInput
from .sphere import SpherePoint, TangentVector

RANK_TOL = 1e-7
H_NORMAL = 1e-5
SHAPE_ASYMMETRY_LIMIT = 1e-4
SEAM_TOL = 1e-8
POINT_NORM_TOL = 1e-9
MIN_RESOLUTION = 8


@dataclass(frozen=True)
class ParameterDomain:
    """Rectangular parameter box with per-axis periodicity flags."""

    lows: tuple[float, ...]
    highs: tuple[float, ...]
    periodic: tuple[bool, ...]

    def __post_init__(self) -> None:
        if not (len(self.lows) == len(self.highs) == len(self.periodic)):
            raise BadDimension("lows, highs, periodic must have equal length")
        for lo, hi in zip(self.lows, self.highs):
            if not hi > lo:
                raise BadDimension("domain axis with high <= low")

    @property
    def dim(self) -> int:
        return len(self.lows)

    def lengths(self) -> np.ndarray:
        return np.asarray(self.highs) - np.asarray(self.lows)


@dataclass
class ImmersionChart:
    """A smooth parametrization of a hypersurface patch in the sphere.

    ``eval_fn`` maps a parameter vector (length ``param_dim``) to ambient
    coordinates (length ``ambient_dim``, a unit vector).  ``jacobian_fn``
    and ``hessian_fn`` are optional exact derivatives with shapes
    (ambient_dim, param_dim) and (ambient_dim, param_dim, param_dim);
    missing ones fall back to central differences.
    """

    name: str
    eval_fn: Callable[[np.ndarray], np.ndarray]
    domain: ParameterDomain
    ambient_dim: int
    jacobian_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    orientation_sign: int = 1
    analytic_curvatures: Optional[tuple[float, ...]] = None
    default_resolution: Optional[tuple[int, ...]] = None
    params: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.orientation_sign not in (-1, 1):
            raise ConfigError("orientation_sign must be +1 or -1")
        if self.param_dim + 2 != self.ambient_dim:
            raise BadDimension(
                f"chart {self.name!r}: hypersurface needs ambient_dim = param_dim + 2, "
                f"got {self.param_dim} -> {self.ambient_dim}"
            )

    @property
    def param_dim(self) -> int:
        return self.domain.dim

    def point(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        p = np.asarray(self.eval_fn(u), dtype=float)
        if p.shape != (self.ambient_dim,):
            raise BadDimension(f"chart {self.name!r} returned shape {p.shape}")
        if abs(np.linalg.norm(p) - 1.0) > POINT_NORM_TOL:
            raise DegenerateImmersion(
                f"chart {self.name!r} left the unit sphere at u = {u.tolist()}"
            )
        return p

    def _fd_step(self) -> float:
        scale = float(np.max(self.domain.lengths()))
        return (np.finfo(float).eps ** (1.0 / 3.0)) * scale

    def jacobian(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.jacobian_fn is not None:
            jac = np.asarray(self.jacobian_fn(u), dtype=float)
        else:
            h = self._fd_step()
            cols = []
            for a in range(self.param_dim):
                e = np.zeros(self.param_dim)
                e[a] = h
                cols.append((self.point(u + e) - self.point(u - e)) / (2 * h))
            jac = np.stack(cols, axis=1)
        if jac.shape != (self.ambient_dim, self.param_dim):
            raise BadDimension(f"chart {self.name!r} jacobian has shape {jac.shape}")
        return jac

    def hessian(self, u) -> Optional[np.ndarray]:
        """Exact second derivative when available, else None."""
        if self.hessian_fn is None:
            return None
        u = np.asarray(u, dtype=float)
        hess = np.asarray(self.hessian_fn(u), dtype=float)
        expected = (self.ambient_dim, self.param_dim, self.param_dim)
        if hess.shape != expected:
            raise BadDimension(f"chart {self.name!r} hessian has shape {hess.shape}")
        return hess

    def with_orientation(self, sign: int) -> "ImmersionChart":
        out = ImmersionChart(
            name=self.name,
            eval_fn=self.eval_fn,
            domain=self.domain,
            ambient_dim=self.ambient_dim,
            jacobian_fn=self.jacobian_fn,
            hessian_fn=self.hessian_fn,
            orientation_sign=sign,
            analytic_curvatures=self.analytic_curvatures,
            default_resolution=self.default_resolution,
            params=dict(self.params),
            metadata=dict(self.metadata),
        )
        return out


def _tangent_data(chart: ImmersionChart, u) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jacobian F, Cholesky factor L of the first fundamental form, orthonormal frame E."""
    jac = chart.jacobian(u)
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv[-1] < RANK_TOL:
        raise DegenerateImmersion(
            f"chart {chart.name!r} is rank-deficient at u = {np.asarray(u).tolist()} "
            f"(smallest singular value {sv[-1]:.3e})"
        )
    gram = jac.T @ jac
    chol = np.linalg.cholesky(gram)
    frame = np.linalg.solve(chol, jac.T).T  # columns F L^{-T}, orthonormal
    return jac, chol, frame


def _normal_from_parts(chart: ImmersionChart, p: np.ndarray, jac: np.ndarray) -> np.ndarray:
    basis = np.column_stack([p, jac])
    # Orthogonal complement of span{point, tangents} is one-dimensional.
    full_u, _, _ = np.linalg.svd(basis)
    normal = full_u[:, -1]
    det = np.linalg.det(np.column_stack([basis, normal]))
    if chart.orientation_sign * det < 0:
        normal = -normal
    return normal


def unit_normal(chart: ImmersionChart, u) -> TangentVector:
    """Unit normal at chart parameter ``u``, oriented by the determinant convention."""
    u = np.asarray(u, dtype=float)
    p = chart.point(u)
    jac, _, _ = _tangent_data(chart, u)
    return TangentVector(SpherePoint(p), _normal_from_parts(chart, p, jac))


def _normal_raw(chart: ImmersionChart, u) -> np.ndarray:
    p = chart.point(u)
    jac, _, _ = _tangent_data(chart, u)
    return _normal_from_parts(chart, p, jac)


def _shape_from_parts(
    chart: ImmersionChart,
    u: np.ndarray,
    normal: np.ndarray,
    chol: np.ndarray,
    frame: np.ndarray,
    h_normal: float,
    use_hessian: Optional[bool],
) -> tuple[np.ndarray, float]:
    n = chart.param_dim
    hess = chart.hessian(u) if use_hessian in (None, True) else None
    if use_hessian is True and hess is None:
        raise ConfigError(f"chart {chart.name!r} has no exact second derivative")
    if hess is not None:
        two_form = np.einsum("x,xab->ab", normal, hess)
        inv_l = np.linalg.inv(chol)
        raw = inv_l @ two_form @ inv_l.T
    else:
        deta = np.empty((chart.ambient_dim, n))
        for a in range(n):
            e = np.zeros(n)
            e[a] = h_normal
            deta[:, a] = (_normal_raw(chart, u + e) - _normal_raw(chart, u - e)) / (2 * h_normal)
        raw = -(frame.T @ deta) @ np.linalg.inv(chol).T
    asym = float(np.max(np.abs(raw - raw.T)))
    if asym > SHAPE_ASYMMETRY_LIMIT:
        raise DegenerateImmersion(
            f"chart {chart.name!r}: shape matrix asymmetry {asym:.3e} at u = {u.tolist()}"
        )
    return 0.5 * (raw + raw.T), asym


def shape_operator(
    chart: ImmersionChart,
    u,
    h_normal: float = H_NORMAL,
    use_hessian: Optional[bool] = None,
    return_asymmetry: bool = False,
):
    """Shape operator matrix in the orthonormalized tangent basis at ``u``.

    The matrix of -(tangential derivative of the normal), symmetrized as
    (S + S^T)/2.  ``use_hessian=None`` picks the exact path when the
    chart supplies a second derivative; True forces it, False forces the
    finite-difference path.  An asymmetry of the raw matrix above
    ``SHAPE_ASYMMETRY_LIMIT`` raises DegenerateImmersion.
    """
    u = np.asarray(u, dtype=float)
    p = chart.point(u)
    jac, chol, frame = _tangent_data(chart, u)
    normal = _normal_from_parts(chart, p, jac)
    sym, asym = _shape_from_parts(chart, u, normal, chol, frame, h_normal, use_hessian)
    if return_asymmetry:
        return sym, asym
    return sym


def principal_curvatures(chart: ImmersionChart, u, **kwargs) -> np.ndarray:
    """Ascending eigenvalues of the shape operator at ``u``."""
    return np.linalg.eigvalsh(shape_operator(chart, u, **kwargs))


def gauss_kronecker(chart: ImmersionChart, u, **kwargs) -> float:
    """Product of the principal curvatures (determinant of the shape operator)."""
    return float(np.linalg.det(shape_operator(chart, u, **kwargs)))


@dataclass(frozen=True)
class SurfaceSample:
    """One quadrature node of a hypersurface mesh."""

    u: np.ndarray
    point: SpherePoint
    normal: TangentVector
    frame: np.ndarray
    shape: np.ndarray
    principal_curvatures: np.ndarray
    weight: float


@dataclass
class HypersurfaceMesh:
    """Quadrature mesh over a chart: samples plus the generating data."""

    samples: list[SurfaceSample]
    chart: ImmersionChart
    resolution: tuple[int, ...]
    total_area: float

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def param_dim(self) -> int:
        return self.chart.param_dim

    @property
    def ambient_dim(self) -> int:
        return self.chart.ambient_dim

    def point_matrix(self) -> np.ndarray:
        return np.array([s.point.coords for s in self.samples])

    def normal_matrix(self) -> np.ndarray:
        return np.array([s.normal.vec for s in self.samples])

    def frame_stack(self) -> np.ndarray:
        return np.array([s.frame for s in self.samples])

    def shape_stack(self) -> np.ndarray:
        return np.array([s.shape for s in self.samples])

    def curvature_matrix(self) -> np.ndarray:
        return np.array([s.principal_curvatures for s in self.samples])

    def weights(self) -> np.ndarray:
        return np.array([s.weight for s in self.samples])

    def parameter_matrix(self) -> np.ndarray:
        return np.array([s.u for s in self.samples])

    def min_abs_curvature(self) -> float:
        return float(np.min(np.abs(self.curvature_matrix())))

    def to_csv(self, path) -> None:
        export_csv(self, path)


def _resolution_tuple(chart: ImmersionChart, resolution) -> tuple[int, ...]:
    if resolution is None:
        resolution = chart.default_resolution
    if resolution is None:
        resolution = 64 if chart.param_dim <= 2 else 24
    if np.isscalar(resolution):
        resolution = (int(resolution),) * chart.param_dim
    resolution = tuple(int(r) for r in resolution)
    if len(resolution) != chart.param_dim:
        raise ConfigError(
            f"resolution needs {chart.param_dim} entries, got {len(resolution)}"
        )
    if min(resolution) < MIN_RESOLUTION:
        raise ConfigError(f"resolution must be at least {MIN_RESOLUTION} per axis")
    return resolution


def _check_seams(chart: ImmersionChart, probes_per_axis: int = 4) -> None:
    dom = chart.domain
    rng = np.random.default_rng(0)
    for axis, per in enumerate(dom.periodic):
        if not per:
            continue
        for _ in range(probes_per_axis):
            u = np.array(
                [
                    rng.uniform(lo, hi)
                    for lo, hi in zip(dom.lows, dom.highs)
                ]
            )
            u_lo = u.copy()
            u_hi = u.copy()
            u_lo[axis] = dom.lows[axis]
            u_hi[axis] = dom.highs[axis]
            gap = np.linalg.norm(chart.point(u_lo) - chart.point(u_hi))
            if gap > SEAM_TOL:
                raise DegenerateImmersion(
                    f"chart {chart.name!r}: seam mismatch {gap:.3e} on periodic axis {axis}"
                )


def sample_mesh(
    chart: ImmersionChart,
    resolution=None,
    h_normal: float = H_NORMAL,
    use_hessian: Optional[bool] = None,
) -> HypersurfaceMesh:
    """Midpoint-rule quadrature mesh over the chart's parameter box.

    Every axis is sampled at cell centers, which keeps the nodes clear of
    coordinate singularities at non-periodic ends and loses nothing on
    periodic axes.  The weight of a node is sqrt(det G) times the
    parameter cell volume.
    """
    res = _resolution_tuple(chart, resolution)
    _check_seams(chart)
    dom = chart.domain
    axes = [
        dom.lows[a] + (np.arange(res[a]) + 0.5) * (dom.highs[a] - dom.lows[a]) / res[a]
        for a in range(chart.param_dim)
    ]
    cell_volume = float(np.prod(dom.lengths() / np.asarray(res)))
    grids = np.meshgrid(*axes, indexing="ij")
    flat_u = np.stack([g.reshape(-1) for g in grids], axis=1)

    samples: list[SurfaceSample] = []
    total_area = 0.0
    for u in flat_u:
        p = chart.point(u)
        jac, chol, frame = _tangent_data(chart, u)
        normal = _normal_from_parts(chart, p, jac)
        shape, _ = _shape_from_parts(chart, u, normal, chol, frame, h_normal, use_hessian)
        curvs = np.linalg.eigvalsh(shape)
        weight = float(np.prod(np.diag(chol))) * cell_volume  # sqrt(det G) * cell
        total_area += weight
        point = SpherePoint(p)
        samples.append(
            SurfaceSample(
                u=u.copy(),
                point=point,
                normal=TangentVector(point, normal),
                frame=frame,
                shape=shape,
                principal_curvatures=curvs,
                weight=weight,
            )
        )
    if not samples:
        raise EmptyInput("mesh came out empty")
    return HypersurfaceMesh(samples=samples, chart=chart, resolution=res, total_area=total_area)


CSV_DIGITS = 17


def export_csv(mesh: HypersurfaceMesh, path) -> None:
    """Write the mesh table: parameters, point, normal, curvatures, weight.

    Columns: u_0..u_{n-1}, x_0..x_{n+1}, normal_0..normal_{n+1},
    kappa_0..kappa_{n-1} (ascending), weight.  Values carry 17
    significant digits so the file round-trips doubles exactly.
    """
    n = mesh.param_dim
    d = mesh.ambient_dim
    header = (
        [f"u_{i}" for i in range(n)]
        + [f"x_{i}" for i in range(d)]
        + [f"normal_{i}" for i in range(d)]
        + [f"kappa_{i}" for i in range(n)]
        + ["weight"]
    )
    fmt = f"%.{CSV_DIGITS}g"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for s in mesh.samples:
            row = np.concatenate(
                [s.u, s.point.coords, s.normal.vec, s.principal_curvatures, [s.weight]]
            )
            fh.write(",".join(fmt % x for x in row) + "\n")


def mesh_digest_bytes(mesh: HypersurfaceMesh) -> bytes:
    """Canonical byte string of the mesh used for report digests."""
    head = f"{mesh.chart.name}|{sorted(mesh.chart.params.items())}|{mesh.resolution}".encode()
    return head + mesh.point_matrix().tobytes() + mesh.weights().tobytes()


def transformed_chart(chart: ImmersionChart, matrix: np.ndarray, label: str = "") -> ImmersionChart:
    """Compose a chart with an ambient orthogonal matrix.

    Used to build group-invariant meshes: the image chart's samples are
    exactly the matrix times the base chart's samples.  A reflection
    (negative determinant) flips the determinant-convention normal, so
    attached analytic curvatures are negated in that case.
    """
    q = np.asarray(matrix, dtype=float)
    if q.shape != (chart.ambient_dim, chart.ambient_dim):
        raise BadDimension("transform matrix does not match the chart's ambient dimension")
    if np.max(np.abs(q.T @ q - np.eye(chart.ambient_dim))) > 1e-10:
        raise BadDimension("transform matrix is not orthogonal")
    det_sign = 1.0 if np.linalg.det(q) > 0 else -1.0

    base_eval = chart.eval_fn
    base_jac = chart.jacobian_fn
    base_hess = chart.hessian_fn

    eval_fn = lambda u: q @ base_eval(u)  # noqa: E731
    jac_fn = None if base_jac is None else (lambda u: q @ base_jac(u))
    hess_fn = None if base_hess is None else (lambda u: np.einsum("xy,yab->xab", q, base_hess(u)))

    curvs = chart.analytic_curvatures
    if curvs is not None and det_sign < 0:
        curvs = tuple(sorted(-c for c in curvs))
    meta = dict(chart.metadata)
    meta["transformed"] = True
    return ImmersionChart(
        name=chart.name + (f"|{label}" if label else "|moved"),
        eval_fn=eval_fn,
        domain=chart.domain,
        ambient_dim=chart.ambient_dim,
        jacobian_fn=jac_fn,
        hessian_fn=hess_fn,
        orientation_sign=chart.orientation_sign,
        analytic_curvatures=curvs,
        default_resolution=chart.default_resolution,
        params=dict(chart.params),
        metadata=meta,
    )
