"""Built-in hypersurface charts with attached analytic curvature data.

Three families:

* ``clifford_torus``: products S^j(r) x S^k(s) with r^2 + s^2 = 1,
  principal curvatures -s/r (multiplicity j) and r/s (multiplicity k);
* ``geodesic_sphere``: distance spheres of radius rho about a center,
  inward-oriented, curvature cot(rho);
* ``cartan_hypersurface``: the one-parameter family of homogeneous
  hypersurfaces of S^4 realized in the space of traceless symmetric
  3x3 matrices, with three distinct constant curvatures
  cot(theta - pi/3), cot(theta), cot(theta + pi/3).

Every chart ships exact first and second derivatives, so the curvature
pipeline runs without finite differences on these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadDimension, ConfigError, ThetaOutOfRange
from .immersion import ImmersionChart, ParameterDomain, principal_curvatures

_PROBE_TOL = 1e-6


# ---------------------------------------------------------------------------
# Spherical coordinates on S^m as products of sines and cosines.
# Coordinate i is a product of univariate factors, which makes exact
# first and second derivatives a bookkeeping exercise.
# ---------------------------------------------------------------------------


def _factor_lists(m: int) -> list[list[tuple[int, bool]]]:
    """Per ambient coordinate of S^m, the list of (angle index, is_cos) factors."""
    out = []
    for i in range(m):
        out.append([(l, False) for l in range(i)] + [(i, True)])
    out.append([(l, False) for l in range(m)])
    return out


def _trig(angle: float, is_cos: bool, order: int) -> float:
    # order-th derivative of cos/sin
    shift = order * (math.pi / 2.0)
    return math.cos(angle + shift) if is_cos else math.sin(angle + shift)


def _product_value(factors, angles, orders) -> float:
    val = 1.0
    for axis, is_cos in factors:
        val *= _trig(angles[axis], is_cos, orders.get(axis, 0))
    return val


def sphere_coords(angles: np.ndarray) -> np.ndarray:
    """Point of S^m in R^{m+1} from m spherical angles (last one azimuthal)."""
    m = len(angles)
    return np.array([_product_value(f, angles, {}) for f in _factor_lists(m)])


def sphere_coords_jacobian(angles: np.ndarray) -> np.ndarray:
    m = len(angles)
    facs = _factor_lists(m)
    jac = np.zeros((m + 1, m))
    for i, f in enumerate(facs):
        axes = [a for a, _ in f]
        for j in axes:
            jac[i, j] = _product_value(f, angles, {j: 1})
    return jac


def sphere_coords_hessian(angles: np.ndarray) -> np.ndarray:
    m = len(angles)
    facs = _factor_lists(m)
    hess = np.zeros((m + 1, m, m))
    for i, f in enumerate(facs):
        axes = [a for a, _ in f]
        for j in axes:
            hess[i, j, j] = _product_value(f, angles, {j: 2})
            for k in axes:
                if k > j:
                    val = _product_value(f, angles, {j: 1, k: 1})
                    hess[i, j, k] = val
                    hess[i, k, j] = val
    return hess


def _sphere_domain(m: int) -> tuple[list[float], list[float], list[bool]]:
    lows = [0.0] * m
    highs = [math.pi] * (m - 1) + [2.0 * math.pi]
    periodic = [False] * (m - 1) + [True]
    return lows, highs, periodic


def _orient_to_match(chart: ImmersionChart, probe_u: np.ndarray) -> ImmersionChart:
    """Pick the orientation sign whose curvatures match the attached analytic list."""
    target = np.asarray(sorted(chart.analytic_curvatures))
    for sign in (1, -1):
        cand = chart if sign == 1 else chart.with_orientation(-1)
        curvs = principal_curvatures(cand, probe_u)
        if np.max(np.abs(curvs - target)) < _PROBE_TOL:
            return cand
    raise BadDimension(
        f"chart {chart.name!r}: neither orientation reproduces the analytic curvatures"
    )


# ---------------------------------------------------------------------------
# Clifford tori
# ---------------------------------------------------------------------------


def clifford_torus(r: float, j: int = 1, k: int = 1) -> ImmersionChart:
    """Product torus S^j(r) x S^k(s), s = sqrt(1 - r^2), in S^{j+k+1}.

    Principal curvatures are -s/r with multiplicity j and r/s with
    multiplicity k; the orientation is fixed so those signs hold.
    """
    if not 0.0 < r < 1.0:
        raise ConfigError(f"torus radius must lie in (0, 1), got {r}")
    if j < 1 or k < 1:
        raise ConfigError("factor dimensions must be at least 1")
    s = math.sqrt(1.0 - r * r)
    n = j + k
    ambient = n + 2

    def eval_fn(u: np.ndarray) -> np.ndarray:
        return np.concatenate([r * sphere_coords(u[:j]), s * sphere_coords(u[j:])])

    def jac_fn(u: np.ndarray) -> np.ndarray:
        out = np.zeros((ambient, n))
        out[: j + 1, :j] = r * sphere_coords_jacobian(u[:j])
        out[j + 1 :, j:] = s * sphere_coords_jacobian(u[j:])
        return out

    def hess_fn(u: np.ndarray) -> np.ndarray:
        out = np.zeros((ambient, n, n))
        out[: j + 1, :j, :j] = r * sphere_coords_hessian(u[:j])
        out[j + 1 :, j:, j:] = s * sphere_coords_hessian(u[j:])
        return out

    lo1, hi1, per1 = _sphere_domain(j)
    lo2, hi2, per2 = _sphere_domain(k)
    domain = ParameterDomain(tuple(lo1 + lo2), tuple(hi1 + hi2), tuple(per1 + per2))
    curvs = tuple(sorted([-s / r] * j + [r / s] * k))
    if n == 2:
        default_res: tuple[int, ...] = (64, 64)
    else:
        default_res = tuple(16 if not p else 32 for p in domain.periodic)
    chart = ImmersionChart(
        name=f"clifford:r={r:g},j={j},k={k}",
        eval_fn=eval_fn,
        domain=domain,
        ambient_dim=ambient,
        jacobian_fn=jac_fn,
        hessian_fn=hess_fn,
        analytic_curvatures=curvs,
        default_resolution=default_res,
        params={"r": r, "j": j, "k": k},
        metadata={"family": "clifford", "s": s},
    )
    probe = np.asarray(domain.lows) + 0.5 * domain.lengths()
    return _orient_to_match(chart, probe)


def clifford_patch(
    r: float, beta_lo: float = 0.35, beta_hi: float = math.pi - 0.35
) -> ImmersionChart:
    """Open patch of the j = k = 1 torus kept inside the upper hemisphere.

    The second circle angle is restricted to (beta_lo, beta_hi) inside
    (0, pi), so the last coordinate s*sin(beta) stays positive.  Not a
    closed hypersurface; meant for deformation studies.
    """
    if not 0.0 < beta_lo < beta_hi < math.pi:
        raise ConfigError("patch needs 0 < beta_lo < beta_hi < pi")
    base = clifford_torus(r, 1, 1)
    domain = ParameterDomain(
        (0.0, beta_lo), (2.0 * math.pi, beta_hi), (True, False)
    )
    return ImmersionChart(
        name=f"clifford-patch:r={r:g}",
        eval_fn=base.eval_fn,
        domain=domain,
        ambient_dim=base.ambient_dim,
        jacobian_fn=base.jacobian_fn,
        hessian_fn=base.hessian_fn,
        orientation_sign=base.orientation_sign,
        analytic_curvatures=base.analytic_curvatures,
        default_resolution=(64, 32),
        params={"r": r, "beta_lo": beta_lo, "beta_hi": beta_hi},
        metadata={"family": "clifford-patch", "closed": False},
    )


# ---------------------------------------------------------------------------
# Geodesic spheres
# ---------------------------------------------------------------------------


def _orthonormal_complement(center: np.ndarray) -> np.ndarray:
    """Columns spanning center^perp, via the Householder map sending e_0 to center."""
    d = center.size
    v = center - np.eye(d)[0]
    vv = float(np.dot(v, v))
    if vv < 1e-12:
        return np.eye(d)[:, 1:]
    house = np.eye(d) - (2.0 / vv) * np.outer(v, v)
    return house[:, 1:]


def geodesic_sphere(center, rho: float, n: int = 2) -> ImmersionChart:
    """Distance sphere of radius rho about ``center`` in S^{n+1}, inward-oriented.

    Inward means the normal makes a positive inner product with the
    center; the principal curvatures are then cot(rho), positive for
    rho < pi/2 and negative beyond the equator.
    """
    if not 0.0 < rho < math.pi:
        raise ConfigError(f"radius must lie in (0, pi), got {rho}")
    if n < 1:
        raise BadDimension("sphere dimension must be at least 1")
    c = np.asarray(center, dtype=float)
    c = c / np.linalg.norm(c)
    d = c.size
    if d != n + 2:
        raise BadDimension(f"center has dimension {d}, expected {n + 2}")
    basis = _orthonormal_complement(c)
    cr, sr = math.cos(rho), math.sin(rho)

    def eval_fn(u: np.ndarray) -> np.ndarray:
        return cr * c + sr * (basis @ sphere_coords(u))

    def jac_fn(u: np.ndarray) -> np.ndarray:
        return sr * (basis @ sphere_coords_jacobian(u))

    def hess_fn(u: np.ndarray) -> np.ndarray:
        return sr * np.einsum("xy,yab->xab", basis, sphere_coords_hessian(u))

    lows, highs, periodic = _sphere_domain(n)
    domain = ParameterDomain(tuple(lows), tuple(highs), tuple(periodic))
    chart = ImmersionChart(
        name=f"sphere:rho={rho:g},n={n}",
        eval_fn=eval_fn,
        domain=domain,
        ambient_dim=d,
        jacobian_fn=jac_fn,
        hessian_fn=hess_fn,
        analytic_curvatures=(1.0 / math.tan(rho),) * n,
        default_resolution=(64,) * n if n <= 2 else (24,) * n,
        params={"rho": rho, "n": n},
        metadata={"family": "sphere", "center": c.copy(), "radius": rho},
    )
    # Inward orientation: normal leaning toward the center.
    probe = np.asarray(domain.lows) + 0.5 * domain.lengths()
    from .immersion import unit_normal

    if float(np.dot(unit_normal(chart, probe).vec, c)) < 0.0:
        chart = chart.with_orientation(-1)
    return chart


# ---------------------------------------------------------------------------
# Traceless symmetric 3x3 matrices and the isoparametric family in S^4
# ---------------------------------------------------------------------------


def _build_sym3_basis() -> np.ndarray:
    root3 = math.sqrt(3.0)
    b1 = np.diag([2.0, -1.0, -1.0])
    b2 = root3 * np.diag([0.0, 1.0, -1.0])
    b3 = np.zeros((3, 3))
    b3[0, 1] = b3[1, 0] = root3
    b4 = np.zeros((3, 3))
    b4[0, 2] = b4[2, 0] = root3
    b5 = np.zeros((3, 3))
    b5[1, 2] = b5[2, 1] = root3
    return np.stack([b1, b2, b3, b4, b5])


SYM3_BASIS = _build_sym3_basis()


@dataclass(frozen=True)
class TracelessSym3:
    """Traceless symmetric 3x3 matrix in orthonormal coordinates.

    The inner product is <m1, m2> = tr(m1 m2)/6, and ``SYM3_BASIS`` is
    orthonormal for it, so the coordinate 5-vector has Euclidean norm
    sqrt(tr(m^2)/6); the unit sphere of this model is S^4.
    """

    coords: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (5,):
            raise BadDimension("TracelessSym3 needs 5 coordinates")
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_matrix(cls, m) -> "TracelessSym3":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise BadDimension("expected a 3x3 matrix")
        if np.max(np.abs(m - m.T)) > 1e-10 or abs(np.trace(m)) > 1e-10:
            raise BadDimension("matrix is not symmetric traceless")
        return cls(np.einsum("kij,ij->k", SYM3_BASIS, m) / 6.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.coords, SYM3_BASIS)


def _as_sym3_matrix(m) -> np.ndarray:
    if isinstance(m, TracelessSym3):
        return m.matrix
    m = np.asarray(m, dtype=float)
    if m.shape == (5,):
        return TracelessSym3(m).matrix
    if m.shape == (3, 3):
        return m
    raise BadDimension("expected a 3x3 matrix, a TracelessSym3, or 5 coordinates")


def cartan_invariants(m) -> tuple[float, float]:
    """The quadratic and cubic invariants (tr(m^2)/6, det(m)/2)."""
    mat = _as_sym3_matrix(m)
    q = float(np.trace(mat @ mat)) / 6.0
    c = float(np.linalg.det(mat)) / 2.0
    return q, c


def _rot_z(t: float, order: int = 0) -> np.ndarray:
    c, s = math.cos(t + order * math.pi / 2), math.sin(t + order * math.pi / 2)
    keep = 1.0 if order == 0 else 0.0
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, keep]])


def _rot_y(t: float, order: int = 0) -> np.ndarray:
    c, s = math.cos(t + order * math.pi / 2), math.sin(t + order * math.pi / 2)
    keep = 1.0 if order == 0 else 0.0
    return np.array([[c, 0.0, s], [0.0, keep, 0.0], [-s, 0.0, c]])


CARTAN_EULER_MARGIN = 1e-3


def cartan_hypersurface(theta: float) -> ImmersionChart:
    """Isoparametric hypersurface of S^4 at family parameter theta in (0, pi/6).

    The orbit of diag(2cos(theta), 2cos(theta + 2pi/3), 2cos(theta - 2pi/3))
    under conjugation by rotations, written in the orthonormal coordinates
    of the traceless symmetric model.  The rotation group covers the orbit
    four-to-one (the stabilizer is the diagonal Klein group), which is
    recorded in the metadata; quadrature weights therefore integrate four
    copies of the orbit and the mesh is used for pointwise checks, not
    degree counts.

    The Euler-angle chart degenerates at beta in {0, pi}; the declared
    domain is shrunk by a fixed margin and meshes sample cell midpoints,
    staying clear of both ends.
    """
    if not 0.0 < theta < math.pi / 6.0:
        raise ThetaOutOfRange(f"family parameter must lie in (0, pi/6), got {theta}")
    diag = 2.0 * np.array(
        [
            math.cos(theta),
            math.cos(theta + 2.0 * math.pi / 3.0),
            math.cos(theta - 2.0 * math.pi / 3.0),
        ]
    )
    dmat = np.diag(diag)

    def rotation(u: np.ndarray, orders: tuple[int, int, int]) -> np.ndarray:
        return _rot_z(u[0], orders[0]) @ _rot_y(u[1], orders[1]) @ _rot_z(u[2], orders[2])

    def coords_of(m: np.ndarray) -> np.ndarray:
        return np.einsum("kij,ij->k", SYM3_BASIS, m) / 6.0

    def eval_fn(u: np.ndarray) -> np.ndarray:
        a = rotation(u, (0, 0, 0))
        return coords_of(a @ dmat @ a.T)

    def _first(u: np.ndarray, axis: int) -> np.ndarray:
        orders = [0, 0, 0]
        orders[axis] = 1
        da = rotation(u, tuple(orders))
        a = rotation(u, (0, 0, 0))
        m = da @ dmat @ a.T
        return m + m.T

    def jac_fn(u: np.ndarray) -> np.ndarray:
        return np.stack([coords_of(_first(u, a)) for a in range(3)], axis=1)

    def hess_fn(u: np.ndarray) -> np.ndarray:
        a0 = rotation(u, (0, 0, 0))
        firsts = []
        for axis in range(3):
            orders = [0, 0, 0]
            orders[axis] = 1
            firsts.append(rotation(u, tuple(orders)))
        out = np.zeros((5, 3, 3))
        for a in range(3):
            for b in range(a, 3):
                orders = [0, 0, 0]
                orders[a] += 1
                orders[b] += 1
                dab = rotation(u, tuple(orders))
                m = dab @ dmat @ a0.T + firsts[a] @ dmat @ firsts[b].T
                m = m + m.T
                y = coords_of(m)
                out[:, a, b] = y
                out[:, b, a] = y
        return out

    margin = CARTAN_EULER_MARGIN
    domain = ParameterDomain(
        (0.0, margin, 0.0),
        (2.0 * math.pi, math.pi - margin, 2.0 * math.pi),
        (True, False, True),
    )
    third = math.pi / 3.0
    curvs = tuple(
        sorted(
            [
                1.0 / math.tan(theta - third),
                1.0 / math.tan(theta),
                1.0 / math.tan(theta + third),
            ]
        )
    )
    chart = ImmersionChart(
        name=f"cartan:theta={theta:g}",
        eval_fn=eval_fn,
        domain=domain,
        ambient_dim=5,
        jacobian_fn=jac_fn,
        hessian_fn=hess_fn,
        analytic_curvatures=curvs,
        default_resolution=(24, 24, 24),
        params={"theta": theta},
        metadata={"family": "cartan", "parameter_redundancy": 4, "degree_supported": False},
    )
    probe = np.array([0.9, 1.1, 0.7])
    return _orient_to_match(chart, probe)
