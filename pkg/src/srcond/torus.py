"""Node sets on the periodic unit cube.

Construction and wrap-around separation of finite point sets, plus the
generators used by the experiments: random well-separated sets, uniform
grids, and hexagonal lattices.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InfeasibleError

_REJECTION_LIMIT = 1_000_000
_CANDIDATE_BATCH = 512  # fixed: changing it changes the random stream


@dataclass
class NodeSet:
    """A finite point set on the torus [0,1)^d.

    ``cached_separation`` is filled in lazily by :func:`separation`; when
    present it equals the wrap-around separation of ``points``.
    """

    dim: int
    points: np.ndarray
    cached_separation: float | None = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DomainError(f"points must have shape (count, {self.dim})")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points must be finite")
        if np.any(pts < 0.0) or np.any(pts >= 1.0):
            raise DomainError("coordinates must lie in [0, 1)")
        if self.validate and len(pts) > 1:
            if len(np.unique(pts, axis=0)) != len(pts):
                raise DomainError("points must be pairwise distinct")
        self.points = pts

    def __len__(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"dim": self.dim, "points": self.points.tolist()}

    @classmethod
    def from_json(cls, doc) -> "NodeSet":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(dim=int(doc["dim"]), points=np.asarray(doc["points"], dtype=float))


def wrap_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise wrap-around Euclidean distances between rows of a and b."""
    diff = np.abs(a[:, None, :] - b[None, :, :])
    diff = np.minimum(diff, 1.0 - diff)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def separation(Y: NodeSet) -> float:
    """Minimal pairwise wrap-around distance of the node set.

    Coordinate differences lie in (-1, 1), so taking min(|u|, 1-|u|) per
    axis is exactly the minimum over integer shifts in {-1, 0, 1}^d, and
    larger shifts can never win.
    """
    if len(Y) < 2:
        raise DomainError("separation needs at least two points")
    if Y.cached_separation is not None:
        return Y.cached_separation
    dist = wrap_distances(Y.points, Y.points)
    np.fill_diagonal(dist, np.inf)
    sep = float(dist.min())
    Y.cached_separation = sep
    return sep


def gen_random_separated(d: int, q: float, count: int, seed: int) -> NodeSet:
    """Rejection-sample `count` points on [0,1)^d with separation >= q.

    Deterministic given ``seed``.  Gives up after 10^6 consecutive
    rejected candidates, which signals an infeasible (q, count) pair,
    e.g. two points on the circle can never be more than 0.5 apart.
    """
    if q <= 0:
        raise DomainError("q must be positive")
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    rejections = 0
    q2 = q * q
    while len(accepted) < count:
        batch = rng.random((_CANDIDATE_BATCH, d))
        for cand in batch:
            if accepted:
                diff = np.abs(np.asarray(accepted) - cand)
                diff = np.minimum(diff, 1.0 - diff)
                if np.min(np.sum(diff * diff, axis=1)) < q2:
                    rejections += 1
                    if rejections >= _REJECTION_LIMIT:
                        raise InfeasibleError(
                            f"no admissible point after {rejections} consecutive "
                            f"rejections (d={d}, q={q}, count={count})"
                        )
                    continue
            accepted.append(cand)
            rejections = 0
            if len(accepted) == count:
                break
    return NodeSet(dim=d, points=np.asarray(accepted))


def gen_hex_lattice(spacing: float, max_points: int) -> NodeSet:
    """Hexagonal lattice points on the 2-torus.

    The lattice is generated by (spacing, 0) and (spacing/2, spacing*sqrt(3)/2)
    with offset (0.25, 0.25).  Points are taken in spiral order from the
    offset and greedily kept while their wrap-around distance to every
    point already kept stays >= spacing*(1 - 1e-9); wrapping makes distant
    plane points collide with earlier ones, which bounds how many fit.
    """
    if spacing <= 0:
        raise DomainError("spacing must be positive")
    if spacing > 0.5:
        raise InfeasibleError(
            f"spacing {spacing} exceeds the torus half-diameter; no two lattice "
            "points can keep that wrap-around distance"
        )
    if max_points < 1:
        raise DomainError("max_points must be >= 1")
    window = min(int(math.ceil(2.5 / spacing)), 600)
    i, j = np.meshgrid(np.arange(-window, window + 1), np.arange(-window, window + 1), indexing="ij")
    i = i.ravel()
    j = j.ravel()
    x = spacing * (i + 0.5 * j)
    y = spacing * (math.sqrt(3.0) / 2.0) * j
    r2 = x * x + y * y
    ang = np.arctan2(y, x)
    order = np.lexsort((j, i, ang, np.round(r2, 12)))
    cand = np.stack([(0.25 + x[order]) % 1.0, (0.25 + y[order]) % 1.0], axis=1)

    min_dist = spacing * (1.0 - 1e-9)
    kept: list[np.ndarray] = []
    for p in cand:
        if kept:
            diff = np.abs(np.asarray(kept) - p)
            diff = np.minimum(diff, 1.0 - diff)
            if np.min(np.sqrt(np.sum(diff * diff, axis=1))) < min_dist:
                continue
        kept.append(p)
        if len(kept) == max_points:
            break
    if len(kept) < max_points:
        raise InfeasibleError(
            f"only {len(kept)} lattice points with spacing {spacing} fit on the "
            f"torus; {max_points} requested"
        )
    return NodeSet(dim=2, points=np.asarray(kept))


def gen_grid(d: int, per_axis: int) -> NodeSet:
    """Uniform grid {0, 1/per_axis, ...}^d; separation is 1/per_axis."""
    if per_axis < 1:
        raise DomainError("per_axis must be >= 1")
    axes = [np.arange(per_axis) / per_axis] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    cached = 1.0 / per_axis if per_axis >= 2 else None
    return NodeSet(dim=d, points=pts, cached_separation=cached)
