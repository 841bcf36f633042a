"""Smallest enclosing and largest empty geodesic balls for finite point sets.

Both problems are minimax programs over the sphere: minimize the
farthest distance, or maximize the nearest one.  The solver is a
projected subgradient method with a diminishing step (scale / k),
averaging unit directions toward the tied extremal points, restarted
from several seeds plus a handful of informed centers.  A brute-force
grid oracle (quasi-uniform candidates plus local refinement passes) is
available as an independent check in ambient dimension up to five.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DegenerateEnclosure, DimensionTooLarge, EmptyInput
from .sphere import SpherePoint

ENCLOSING_DEGENERATE_TOL = 1e-6


@dataclass(frozen=True)
class BallConfig:
    multistarts: int = 16
    seed: int = 0
    max_iters: int = 2000
    step_scale: float = math.pi / 4.0
    tie_tol: float = 1e-6
    movement_tol: float = 1e-10
    stall_window: int = 200
    stall_improvement: float = 1e-12
    oracle: bool = False
    oracle_density: int = 200_000
    refine_passes: int = 2

    def with_updates(self, **kwargs) -> "BallConfig":
        return replace(self, **kwargs)


DEFAULT_BALL_CONFIG = BallConfig()


@dataclass(frozen=True)
class BallResult:
    center: SpherePoint
    radius: float
    achiever_indices: np.ndarray
    iterations: int
    certified_gap: Optional[float] = None


def as_point_matrix(points) -> np.ndarray:
    """Rows of unit vectors from a mesh, an array, or a list of points."""
    if hasattr(points, "point_matrix"):
        mat = points.point_matrix()
    else:
        try:
            mat = np.array([np.asarray(p, dtype=float) for p in points])
        except (TypeError, ValueError) as exc:
            raise EmptyInput(f"cannot interpret the point set: {exc}") from exc
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise EmptyInput("the point set is empty")
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms < 1e-12):
        raise EmptyInput("the point set contains a zero vector")
    return mat / norms[:, None]


def _descend(
    points: np.ndarray, start: np.ndarray, cfg: BallConfig, enclosing: bool
) -> tuple[np.ndarray, float, int]:
    """Run the subgradient iteration from one start; return (center, value, iters)."""
    c = start / np.linalg.norm(start)
    d = c.size
    best_c = c.copy()
    best_val = math.inf if enclosing else -math.inf
    last_improve = 0
    iters = 0
    for k in range(1, cfg.max_iters + 1):
        iters = k
        inner = points @ c
        dist = np.arccos(np.clip(inner, -1.0, 1.0))
        if enclosing:
            val = float(dist.max())
            improved = val < best_val - cfg.stall_improvement
            better = val < best_val
            ties = dist >= val - cfg.tie_tol
        else:
            val = float(dist.min())
            improved = val > best_val + cfg.stall_improvement
            better = val > best_val
            ties = dist <= val + cfg.tie_tol
        if better:
            best_val = val
            best_c = c.copy()
        if improved:
            last_improve = k
        elif k - last_improve >= cfg.stall_window:
            break
        if not enclosing and val > math.pi - 1e-9:
            break  # nearest point is antipodal: nothing left to gain
        w = points[ties] - inner[ties][:, None] * c[None, :]
        norms = np.linalg.norm(w, axis=1)
        good = norms > 1e-15
        if not np.any(good):
            if not enclosing and val < cfg.tie_tol:
                # Center sits on a sample; leave along a fixed tangent direction.
                probe = np.zeros(d)
                probe[int(np.argmin(np.abs(c)))] = 1.0
                mean_dir = probe - np.dot(probe, c) * c
                mean_dir /= np.linalg.norm(mean_dir)
            else:
                break
        else:
            mean_dir = (w[good] / norms[good, None]).mean(axis=0)
        step = cfg.step_scale / k
        move = step * float(np.linalg.norm(mean_dir))
        if move < cfg.movement_tol:
            break
        velocity = step * mean_dir if enclosing else -step * mean_dir
        angle = np.linalg.norm(velocity)
        c = math.cos(angle) * c + math.sin(angle) * (velocity / angle)
        c /= np.linalg.norm(c)
    return best_c, best_val, iters


def _solve(points, cfg: BallConfig, enclosing: bool) -> BallResult:
    mat = as_point_matrix(points)
    m, d = mat.shape
    rng = np.random.default_rng(cfg.seed)
    starts: list[np.ndarray] = []
    if enclosing:
        mean = mat.mean(axis=0)
        if np.linalg.norm(mean) > 1e-12:
            starts.append(mean / np.linalg.norm(mean))
        else:
            starts.append(mat[0].copy())
    else:
        eye = np.eye(d)
        for i in range(d):
            starts.append(eye[i].copy())
            starts.append(-eye[i].copy())
    for _ in range(cfg.multistarts):
        g = rng.standard_normal(d)
        starts.append(g / np.linalg.norm(g))

    best: Optional[tuple[np.ndarray, float, int]] = None
    for start in starts:
        c, val, iters = _descend(mat, start, cfg, enclosing)
        if best is None or (val < best[1] if enclosing else val > best[1]):
            best = (c, val, iters)
    assert best is not None
    center, _, iterations = best

    dist = np.arccos(np.clip(mat @ center, -1.0, 1.0))
    if enclosing:
        radius = float(dist.max())
        if radius >= math.pi - ENCLOSING_DEGENERATE_TOL:
            raise DegenerateEnclosure(
                "no proper enclosing ball: every candidate center sees an antipodal point"
            )
        achievers = np.flatnonzero(dist >= radius - cfg.tie_tol)
    else:
        radius = float(dist.min())
        achievers = np.flatnonzero(dist <= radius + cfg.tie_tol)

    gap = None
    if cfg.oracle:
        _, oracle_val = brute_force_ball_oracle(
            mat,
            objective="enclosing" if enclosing else "empty",
            grid_density=cfg.oracle_density,
            refine_passes=cfg.refine_passes,
        )
        gap = radius - oracle_val if enclosing else oracle_val - radius
    return BallResult(
        center=SpherePoint(center),
        radius=radius,
        achiever_indices=achievers,
        iterations=iterations,
        certified_gap=gap,
    )


def smallest_enclosing_ball(points, cfg: Optional[BallConfig] = None) -> BallResult:
    """Center and radius of the smallest geodesic ball containing the points."""
    return _solve(points, cfg or DEFAULT_BALL_CONFIG, enclosing=True)


def largest_empty_ball(points, cfg: Optional[BallConfig] = None) -> BallResult:
    """Center and radius of the largest geodesic ball avoiding the points."""
    return _solve(points, cfg or DEFAULT_BALL_CONFIG, enclosing=False)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

_CHUNK_ELEMENTS = 4_000_000
_REFINE_POINTS = 11
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def _angles_to_points(angles: np.ndarray) -> np.ndarray:
    """Vectorized spherical coordinates: rows of angles to rows of unit vectors."""
    s = np.sin(angles)
    c = np.cos(angles)
    cum = np.cumprod(s, axis=1)
    n = angles.shape[1]
    out = np.empty((angles.shape[0], n + 1))
    out[:, 0] = c[:, 0]
    for i in range(1, n):
        out[:, i] = c[:, i] * cum[:, i - 1]
    out[:, n] = cum[:, n - 1]
    return out


def _candidate_grid(d: int, density: int) -> np.ndarray:
    if d == 2:
        t = np.linspace(0.0, 2.0 * math.pi, num=max(8, density), endpoint=False)
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if d == 3:
        n = max(16, density)
        i = np.arange(n)
        z = 1.0 - (2.0 * i + 1.0) / n
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        phi = i * _GOLDEN_ANGLE
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    # Product-angle grids for S^3 and S^4; the azimuthal axis gets twice
    # the count because its range is twice as long.
    n_angles = d - 1
    base = max(6, int(round((density / 2.0) ** (1.0 / n_angles))))
    counts = [base] * (n_angles - 1) + [2 * base]
    axes = [np.linspace(0.0, math.pi, num=counts[a], endpoint=False) + math.pi / (2 * counts[a]) for a in range(n_angles - 1)]
    axes.append(np.linspace(0.0, 2.0 * math.pi, num=counts[-1], endpoint=False))
    grids = np.meshgrid(*axes, indexing="ij")
    angles = np.stack([g.reshape(-1) for g in grids], axis=1)
    return _angles_to_points(angles)


def _grid_spacing(d: int, density: int) -> float:
    if d == 2:
        return 2.0 * math.pi / max(8, density)
    if d == 3:
        return 2.0 * math.sqrt(math.pi / max(16, density))
    base = max(6, int(round((density / 2.0) ** (1.0 / (d - 1)))))
    return math.pi / base


def _score_candidates(candidates: np.ndarray, points: np.ndarray, enclosing: bool) -> np.ndarray:
    """Per-candidate worst inner product (max over points for empty, min for enclosing)."""
    m = points.shape[0]
    chunk = max(1, _CHUNK_ELEMENTS // m)
    out = np.empty(candidates.shape[0])
    for lo in range(0, candidates.shape[0], chunk):
        hi = min(lo + chunk, candidates.shape[0])
        inner = candidates[lo:hi] @ points.T
        out[lo:hi] = inner.min(axis=1) if enclosing else inner.max(axis=1)
    return out


def _tangent_basis(c: np.ndarray) -> np.ndarray:
    d = c.size
    v = c - np.eye(d)[0]
    vv = float(np.dot(v, v))
    if vv < 1e-12:
        return np.eye(d)[:, 1:]
    house = np.eye(d) - (2.0 / vv) * np.outer(v, v)
    return house[:, 1:]


def brute_force_ball_oracle(
    points,
    objective: str = "enclosing",
    grid_density: int = 1_000_000,
    refine_passes: int = 2,
) -> tuple[SpherePoint, float]:
    """Grid search for the minimax ball, independent of the subgradient solver.

    Enumerates a quasi-uniform candidate set of the requested density,
    then zooms with ``refine_passes`` local tangent-plane grids around
    the best candidate.  Only ambient dimensions up to five are
    supported; beyond that the grid sizes are hopeless.
    """
    if objective not in ("enclosing", "empty"):
        raise ValueError(f"unknown objective {objective!r}")
    enclosing = objective == "enclosing"
    mat = as_point_matrix(points)
    d = mat.shape[1]
    if d > 5:
        raise DimensionTooLarge(f"oracle supports ambient dimension <= 5, got {d}")

    candidates = _candidate_grid(d, grid_density)
    scores = _score_candidates(candidates, mat, enclosing)
    # Enclosing wants the largest min-inner (smallest max-distance).
    best_idx = int(np.argmax(scores)) if enclosing else int(np.argmin(scores))
    center = candidates[best_idx]
    spacing = _grid_spacing(d, grid_density)

    halfwidth = 1.2 * spacing
    for _ in range(max(0, refine_passes)):
        basis = _tangent_basis(center)
        axes = [np.linspace(-halfwidth, halfwidth, num=_REFINE_POINTS)] * (d - 1)
        grids = np.meshgrid(*axes, indexing="ij")
        offsets = np.stack([g.reshape(-1) for g in grids], axis=1)
        vel = offsets @ basis.T
        angles = np.linalg.norm(vel, axis=1)
        local = np.where(
            angles[:, None] > 1e-15,
            np.cos(angles)[:, None] * center[None, :]
            + np.sin(angles)[:, None] * vel / np.maximum(angles, 1e-300)[:, None],
            center[None, :],
        )
        local /= np.linalg.norm(local, axis=1)[:, None]
        local_scores = _score_candidates(local, mat, enclosing)
        idx = int(np.argmax(local_scores)) if enclosing else int(np.argmin(local_scores))
        center = local[idx]
        halfwidth = 1.2 * (2.0 * halfwidth / (_REFINE_POINTS - 1))

    dist = np.arccos(np.clip(mat @ center, -1.0, 1.0))
    value = float(dist.max()) if enclosing else float(dist.min())
    return SpherePoint(center), value
