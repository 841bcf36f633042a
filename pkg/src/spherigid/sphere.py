"""Geometry of the round unit sphere embedded in Euclidean space.

Points live on S^{n+1} as unit vectors in R^{n+2}.  Parallel transport
between non-antipodal points has a closed form along the connecting
minimizing geodesic:

    transport(p -> q)(v) = v - (<v, q> / (1 + <q, p>)) (q + p)

which is an isometry of tangent spaces and reduces to the identity at
p = q.  A fourth-order ODE integrator for the transport equation is kept
alongside as an independent reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AntipodalPoints, BadDimension

TOL_ANTIPODAL = 1e-9


@dataclass(frozen=True)
class SpherePoint:
    """A point of the unit sphere, renormalized on construction.

    Parameters
    ----------
    coords : array_like
        Ambient coordinates; anything with nonzero norm is accepted and
        scaled to unit length.
    """

    coords: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise BadDimension("a sphere point needs a 1-d coordinate vector of length >= 2")
        norm = np.linalg.norm(c)
        if norm == 0.0 or not np.isfinite(norm):
            raise BadDimension("cannot normalize a zero or non-finite vector onto the sphere")
        object.__setattr__(self, "coords", c / norm)

    @property
    def ambient_dim(self) -> int:
        return self.coords.size

    def __array__(self, dtype=None) -> np.ndarray:
        return np.asarray(self.coords, dtype=dtype)


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector at a base point, kept orthogonal to it.

    The component along the base point is projected out on construction;
    for vectors produced by the functions in this module that correction
    is at rounding level.
    """

    base: SpherePoint
    vec: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vec, dtype=float)
        if v.shape != self.base.coords.shape:
            raise BadDimension("tangent vector and base point have mismatched shapes")
        v = v - np.dot(v, self.base.coords) * self.base.coords
        object.__setattr__(self, "vec", v)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def __array__(self, dtype=None) -> np.ndarray:
        return np.asarray(self.vec, dtype=dtype)


def _as_coords(p) -> np.ndarray:
    if isinstance(p, SpherePoint):
        return p.coords
    return np.asarray(p, dtype=float)


def geodesic_distance(p, q) -> float:
    """Angle between two sphere points, in [0, pi]."""
    inner = float(np.clip(np.dot(_as_coords(p), _as_coords(q)), -1.0, 1.0))
    return float(np.arccos(inner))


def transport_coeff_denominator(p, q) -> float:
    """1 + <p, q>, the quantity that must stay positive for transport."""
    return 1.0 + float(np.dot(_as_coords(p), _as_coords(q)))


def parallel_transport(p, q, v: TangentVector, tol_antipodal: float = TOL_ANTIPODAL) -> TangentVector:
    """Transport ``v`` from ``p`` to ``q`` along the minimizing geodesic.

    Raises
    ------
    AntipodalPoints
        If 1 + <p, q> <= tol_antipodal, where no minimizing geodesic is
        unique and the closed form blows up.
    """
    pc, qc = _as_coords(p), _as_coords(q)
    denom = 1.0 + float(np.dot(pc, qc))
    if denom <= tol_antipodal:
        raise AntipodalPoints(
            f"cannot transport between near-antipodal points (1 + <p,q> = {denom:.3e})"
        )
    vv = np.asarray(v, dtype=float)
    out = vv - (np.dot(vv, qc) / denom) * (qc + pc)
    return TangentVector(SpherePoint(qc), out)


def exp_map(p, v) -> SpherePoint:
    """Riemannian exponential: follow the geodesic from ``p`` with initial velocity ``v``."""
    pc = _as_coords(p)
    vv = np.asarray(v, dtype=float)
    norm = np.linalg.norm(vv)
    if norm < 1e-300:
        return SpherePoint(pc)
    return SpherePoint(np.cos(norm) * pc + np.sin(norm) * (vv / norm))


def log_map(p, q, tol_antipodal: float = TOL_ANTIPODAL) -> TangentVector:
    """Inverse of :func:`exp_map`: the initial velocity of the geodesic from ``p`` to ``q``.

    The returned vector has norm geodesic_distance(p, q).  Raises
    AntipodalPoints when ``q`` is (nearly) the antipode of ``p``.
    """
    pc, qc = _as_coords(p), _as_coords(q)
    inner = float(np.clip(np.dot(pc, qc), -1.0, 1.0))
    if 1.0 + inner <= tol_antipodal:
        raise AntipodalPoints("log map undefined at the antipode")
    w = qc - inner * pc
    wn = np.linalg.norm(w)
    if wn < 1e-15:
        return TangentVector(SpherePoint(pc), np.zeros_like(pc))
    return TangentVector(SpherePoint(pc), np.arccos(inner) * (w / wn))


def tilde_field(p, v: TangentVector, p0, q) -> TangentVector:
    """Two-leg transport p -> p0 -> q used to spread a tangent vector over the sphere.

    Raises AntipodalPoints naming the failing leg.
    """
    try:
        at_base = parallel_transport(p, p0, v)
    except AntipodalPoints as exc:
        raise AntipodalPoints(f"first leg (p -> p0) failed: {exc}") from exc
    try:
        return parallel_transport(p0, q, at_base)
    except AntipodalPoints as exc:
        raise AntipodalPoints(f"second leg (p0 -> q) failed: {exc}") from exc


def distance_to_great_sphere(x, p0) -> float:
    """Distance from ``x`` to the great sphere orthogonal to ``p0``: arcsin|<x, p0>|."""
    inner = float(np.clip(np.dot(_as_coords(x), _as_coords(p0)), -1.0, 1.0))
    return float(np.arcsin(abs(inner)))


def transport_ode_batch(
    p: np.ndarray, q: np.ndarray, v: np.ndarray, steps: int = 256
) -> np.ndarray:
    """Integrate the parallel-transport equation along minimizing geodesics.

    Reference implementation, independent of the closed form: solves
    V'(t) = -<V, c'(t)> c(t) with a classical fourth-order Runge-Kutta
    scheme along c(t) = cos(t) p + sin(t) u.

    Parameters
    ----------
    p, q : ndarray, shape (m, d)
        Start and end points (unit rows, not antipodal).
    v : ndarray, shape (m, d)
        Tangent vectors at the rows of ``p``.
    steps : int
        Number of RK4 steps; the global error is O(steps^-4).

    Returns
    -------
    ndarray, shape (m, d)
        The transported vectors at ``q``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    inner = np.clip(np.sum(p * q, axis=1), -1.0, 1.0)
    if np.any(1.0 + inner <= TOL_ANTIPODAL):
        raise AntipodalPoints("ODE transport hit a near-antipodal pair")
    dist = np.arccos(inner)
    w = q - inner[:, None] * p
    wn = np.linalg.norm(w, axis=1)
    # Unit tangent toward q; rows with q = p get a zero direction and a zero path.
    u = np.zeros_like(w)
    ok = wn > 1e-15
    u[ok] = w[ok] / wn[ok, None]

    def derivative(t: np.ndarray, vel: np.ndarray) -> np.ndarray:
        ct = np.cos(t)[:, None] * p + np.sin(t)[:, None] * u
        cdot = -np.sin(t)[:, None] * p + np.cos(t)[:, None] * u
        cdot = cdot * dist[:, None]
        return -np.sum(vel * cdot, axis=1)[:, None] * ct

    # Reparametrize every row to s in [0, 1]; c'(s) carries the length factor.
    h = 1.0 / steps
    vel = v.copy()
    s = np.zeros(p.shape[0])
    for _ in range(steps):
        t1 = s * dist
        k1 = derivative(t1, vel)
        k2 = derivative((s + h / 2) * dist, vel + (h / 2) * k1)
        k3 = derivative((s + h / 2) * dist, vel + (h / 2) * k2)
        k4 = derivative((s + h) * dist, vel + h * k3)
        vel = vel + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        s = s + h
    return vel


def transport_ode(p, q, v: TangentVector, steps: int = 256) -> TangentVector:
    """Single-pair wrapper around :func:`transport_ode_batch`."""
    out = transport_ode_batch(
        _as_coords(p)[None, :], _as_coords(q)[None, :], np.asarray(v, dtype=float)[None, :], steps
    )
    return TangentVector(SpherePoint(_as_coords(q)), out[0])


def random_point(rng: np.random.Generator, ambient_dim: int) -> SpherePoint:
    """Uniform random point, for tests and multistarts."""
    g = rng.standard_normal(ambient_dim)
    return SpherePoint(g)


def random_tangent(rng: np.random.Generator, p: SpherePoint) -> TangentVector:
    g = rng.standard_normal(p.ambient_dim)
    return TangentVector(p, g)
