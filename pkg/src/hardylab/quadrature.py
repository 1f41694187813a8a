"""Deterministic quadrature: L^p norms, averages, and the Gagliardo seminorm.

Everything is a midpoint rule on axis-aligned cells.  Uniform tensor grids
come from a ``GridSpec``; unions of boxes (dyadic layers, geometrically
graded meshes toward a boundary) and masked boxes (annuli, epigraph clips)
produce the same ``Grid`` value, so every functional below works on any of
them.

Determinism contract: cell traversal order is fixed by construction,
single sums are compensated (Kahan), and the double sum over cell pairs is
split into fixed-size row blocks whose partial sums are combined in block
order.  Worker threads only compute block partials, so results are
bit-identical for any thread count.

The Gagliardo seminorm

    [u]_{W^{s,p}}^p = int int |u(x)-u(y)|^p / |x-y|^{d+sp} dx dy

is singular on the diagonal.  Distinct cell pairs use plain midpoints; the
same-cell contribution uses a per-cell Lipschitz estimate L and integrates
L^p |x-y|^{p-d-sp} in the radial variable over the equivalent-volume ball,
which keeps the diagonal mass instead of dropping it (dropping it biases
the seminorm low exactly in the critical regime).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from .errors import EvaluationError, ParameterError
from .geometry import Box

__all__ = [
    "FracParams",
    "GridSpec",
    "Grid",
    "TestFunction",
    "TensorBump",
    "LogSpike",
    "AxisPolynomial",
    "Constant",
    "uniform_grid",
    "masked_grid",
    "union_grid",
    "domain_grid",
    "as_grid",
    "integrate",
    "lp_norm",
    "average",
    "gagliardo_seminorm",
    "set_num_threads",
    "get_num_threads",
    "kahan_sum",
]


# ---------------------------------------------------------------------------
# fractional parameters


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if x != int(x):
            raise ParameterError(
                f"exponent {x!r} must be given exactly (int, Fraction or 'num/den' string)"
            )
        return Fraction(int(x))
    raise ParameterError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class FracParams:
    """Parameters (d, p, s, tau) of the fractional functional.

    p, s, tau are exact rationals so the critical loci sp = 1 and sp = d
    are decided without float tolerance.
    """

    d: int
    p: Fraction
    s: Fraction
    tau: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", _as_fraction(self.p))
        object.__setattr__(self, "s", _as_fraction(self.s))
        object.__setattr__(self, "tau", _as_fraction(self.tau))
        if self.d < 1:
            raise ParameterError("dimension must be >= 1")
        if self.p <= 1:
            raise ParameterError("p must exceed 1")
        if not 0 < self.s < 1:
            raise ParameterError("s must lie in (0, 1)")
        if self.tau < 1:
            raise ParameterError("tau must be >= 1")

    @property
    def sp(self) -> Fraction:
        return self.s * self.p

    @property
    def criticality(self) -> str:
        """One of sp_eq_1, sp_eq_d, subcritical (sp = 1 takes precedence)."""
        if self.sp == 1:
            return "sp_eq_1"
        if self.sp == self.d:
            return "sp_eq_d"
        return "subcritical"

    @property
    def p_star(self) -> Fraction:
        """Critical Sobolev exponent d p / (d - sp); defined only for sp < d."""
        if self.sp >= self.d:
            raise ParameterError("p* requires sp < d")
        return self.d * self.p / (self.d - self.sp)


# ---------------------------------------------------------------------------
# grids


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor midpoint grid: ``resolution`` cells per axis on a box."""

    resolution: int
    support_box: Box

    def __post_init__(self):
        if self.resolution < 8 or not _is_power_of_two(self.resolution):
            raise ParameterError("resolution must be a power of two >= 8")

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.resolution * factor, self.support_box)


@dataclass(frozen=True)
class Grid:
    """Concrete quadrature mesh: midpoint nodes with per-cell sides/weights.

    Node order is the construction order and is part of the value; all
    summation contracts reference it.
    """

    centers: np.ndarray  # (M, d)
    sides: np.ndarray  # (M, d)
    weights: np.ndarray  # (M,)

    def __post_init__(self):
        if len(self.centers) == 0:
            raise ParameterError("grid has no cells")

    @property
    def d(self) -> int:
        return self.centers.shape[1]

    @property
    def ncells(self) -> int:
        return self.centers.shape[0]

    @property
    def total_weight(self) -> float:
        return kahan_sum(self.weights)


def _box_mesh(box: Box, cells_per_axis: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    axes = []
    steps = []
    for lo, hi, n in zip(box.lo, box.hi, cells_per_axis):
        h = (hi - lo) / n
        axes.append(lo + h * (np.arange(n) + 0.5))
        steps.append(h)
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=-1)
    sides = np.broadcast_to(np.asarray(steps), centers.shape).copy()
    return centers, sides


def uniform_grid(spec: GridSpec) -> Grid:
    centers, sides = _box_mesh(spec.support_box, [spec.resolution] * spec.support_box.d)
    return Grid(centers, sides, np.prod(sides, axis=-1))


def masked_grid(spec: GridSpec, keep: Callable[[np.ndarray], np.ndarray]) -> Grid:
    """Uniform grid restricted to cells whose centers satisfy ``keep``."""
    centers, sides = _box_mesh(spec.support_box, [spec.resolution] * spec.support_box.d)
    mask = np.asarray(keep(centers), dtype=bool)
    if not np.any(mask):
        raise ParameterError("mask removed every cell of the grid")
    centers, sides = centers[mask], sides[mask]
    return Grid(centers, sides, np.prod(sides, axis=-1))


def union_grid(boxes: Sequence[Box], cells_per_axis: int) -> Grid:
    """Concatenated per-box uniform grids, in the given box order.

    The boxes are assumed disjoint; each gets ``cells_per_axis`` cells per
    axis, so geometrically graded meshes refine toward small boxes.
    """
    if not boxes:
        raise ParameterError("need at least one box")
    parts = [_box_mesh(b, [cells_per_axis] * b.d) for b in boxes]
    centers = np.concatenate([c for c, _ in parts], axis=0)
    sides = np.concatenate([s for _, s in parts], axis=0)
    return Grid(centers, sides, np.prod(sides, axis=-1))


def domain_grid(domain: geo.Domain, spec: GridSpec) -> Grid:
    """Grid for integration over (domain intersect support box).

    Box-like domains clip the support box exactly; curved or graph
    boundaries keep the cells whose centers lie inside the domain.
    """
    if isinstance(domain, (geo.Slab, geo.BoxDomain)):
        clipped = spec.support_box.intersect(domain.box)
        if clipped is None:
            raise ParameterError("support box does not meet the domain")
        return uniform_grid(GridSpec(spec.resolution, clipped))
    return masked_grid(spec, domain.contains)


def as_grid(grid, domain: geo.Domain | None = None) -> Grid:
    if isinstance(grid, Grid):
        return grid
    if isinstance(grid, GridSpec):
        return domain_grid(domain, grid) if domain is not None else uniform_grid(grid)
    raise ParameterError(f"expected GridSpec or Grid, got {type(grid).__name__}")


# ---------------------------------------------------------------------------
# summation helpers


def kahan_sum(values: np.ndarray) -> float:
    """Compensated sum in array order."""
    s = 0.0
    c = 0.0
    for v in np.asarray(values, dtype=float).ravel():
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


_NUM_THREADS = 1

#: row-block size of the pair loop; fixed so partial sums are independent
#: of the thread count
_PAIR_BLOCK = 128


def set_num_threads(n: int) -> None:
    """Worker threads for the cell-pair double sum (results are unchanged)."""
    global _NUM_THREADS
    if n < 1:
        raise ParameterError("thread count must be >= 1")
    _NUM_THREADS = int(n)


def get_num_threads() -> int:
    return _NUM_THREADS


# ---------------------------------------------------------------------------
# test functions


class TestFunction:
    """Compactly supported evaluation rule with a declared support box."""

    support: Box

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def d(self) -> int:
        return self.support.d

    def scaled_by(self, c: float) -> "TestFunction":
        return _Scaled(self, c)

    def dilated(self, lam: float) -> "TestFunction":
        """x -> u(x / lam) supported on the lam-dilated box."""
        return _Dilated(self, lam)


@dataclass(frozen=True)
class _Scaled(TestFunction):
    base: TestFunction
    factor: float

    @property
    def support(self) -> Box:  # type: ignore[override]
        return self.base.support

    def __call__(self, pts):
        return self.factor * self.base(pts)


@dataclass(frozen=True)
class _Dilated(TestFunction):
    base: TestFunction
    lam: float

    @property
    def support(self) -> Box:  # type: ignore[override]
        return self.base.support.scaled(self.lam)

    def __call__(self, pts):
        return self.base(np.asarray(pts, dtype=float) / self.lam)


def _bump_profile(t: np.ndarray) -> np.ndarray:
    """cos^2 bump on |t| < 1; C^1 with vanishing slope at the edges."""
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.cos(0.5 * math.pi * t[inside]) ** 2
    return out


@dataclass(frozen=True)
class TensorBump(TestFunction):
    """Product of per-axis cos^2 bumps centered at ``center`` with ``radius``."""

    center: tuple[float, ...]
    radius: tuple[float, ...]

    def __post_init__(self):
        if len(self.center) != len(self.radius):
            raise ParameterError("center and radius dimensions differ")
        if any(r <= 0 for r in self.radius):
            raise ParameterError("radii must be positive")

    @property
    def support(self) -> Box:  # type: ignore[override]
        return Box(
            tuple(c - r for c, r in zip(self.center, self.radius)),
            tuple(c + r for c, r in zip(self.center, self.radius)),
        )

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        t = (pts - np.asarray(self.center)) / np.asarray(self.radius)
        vals = np.ones(len(pts))
        for a in range(pts.shape[1]):
            vals *= _bump_profile(t[:, a])
        return vals


@dataclass(frozen=True)
class LogSpike(TestFunction):
    """Concentrating profile, piecewise linear in t = log2(2 / x_d).

    Rises over t in [t0, t0 + depth], sits at 1 over [t0 + depth,
    t0 + 2 depth], falls back to 0 over [t0 + 2 depth, t0 + 3 depth]; both
    ramps are logarithmic in x_d, so the transition cost of each ramp in a
    critical seminorm shrinks like 1/depth while the unit plateau spans
    ``depth`` dyadic levels.  Transverse axes (if any) carry a cos^2 bump
    over ``transverse``.
    """

    depth: float
    t0: float = 1.5
    transverse: Box | None = None  # support box in the first d-1 axes

    def __post_init__(self):
        if self.depth < 1:
            raise ParameterError("depth must be >= 1")

    @property
    def d(self) -> int:
        return 1 if self.transverse is None else self.transverse.d + 1

    @property
    def support(self) -> Box:  # type: ignore[override]
        lo_d = 2.0 ** (1.0 - self.t0 - 3.0 * self.depth)
        hi_d = 2.0 ** (1.0 - self.t0)
        if self.transverse is None:
            return Box((lo_d,), (hi_d,))
        return Box(self.transverse.lo + (lo_d,), self.transverse.hi + (hi_d,))

    def axis_profile(self, xd: np.ndarray) -> np.ndarray:
        xd = np.asarray(xd, dtype=float)
        vals = np.zeros_like(xd)
        pos = xd > 0
        t = np.empty_like(xd)
        t[pos] = np.log2(2.0 / xd[pos])
        t[~pos] = np.inf
        D = self.depth
        up = (t > self.t0) & (t < self.t0 + D)
        flat = (t >= self.t0 + D) & (t <= self.t0 + 2 * D)
        down = (t > self.t0 + 2 * D) & (t < self.t0 + 3 * D)
        vals[up] = (t[up] - self.t0) / D
        vals[flat] = 1.0
        vals[down] = (self.t0 + 3 * D - t[down]) / D
        return vals

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        vals = self.axis_profile(pts[:, -1])
        if self.transverse is not None:
            c = np.asarray(self.transverse.center)
            r = 0.5 * np.asarray(self.transverse.sides())
            t = (pts[:, :-1] - c) / r
            for a in range(t.shape[1]):
                vals = vals * _bump_profile(t[:, a])
        return vals


@dataclass(frozen=True)
class AxisPolynomial(TestFunction):
    """Polynomial in one coordinate, truncated at the support box.

    Not continuous at the support edge in general; meant for exact-value
    checks where the support equals the whole integration region.
    """

    coeffs: tuple[float, ...]
    support: Box
    axis: int = 0

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x = pts[:, self.axis]
        vals = np.polynomial.polynomial.polyval(x, np.asarray(self.coeffs))
        vals = np.where(self.support.contains(pts), vals, 0.0)
        return vals


@dataclass(frozen=True)
class Constant(TestFunction):
    """Constant value on its support box, truncated outside."""

    value: float
    support: Box

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.where(self.support.contains(pts), self.value, 0.0)


# ---------------------------------------------------------------------------
# integrals


def _evaluate(f: Callable[[np.ndarray], np.ndarray], grid: Grid) -> np.ndarray:
    vals = np.asarray(f(grid.centers), dtype=float)
    if vals.shape != (grid.ncells,):
        raise EvaluationError(
            f"integrand returned shape {vals.shape}, expected ({grid.ncells},)"
        )
    bad = ~np.isfinite(vals)
    if np.any(bad):
        node = grid.centers[np.argmax(bad)]
        raise EvaluationError(f"integrand is not finite at node {tuple(node)}", node=node)
    return vals


def integrate(f, grid, domain: geo.Domain | None = None) -> float:
    """Midpoint-rule integral of f over the grid, compensated summation.

    ``f`` is any vectorized callable on (M, d) arrays; ``grid`` may be a
    GridSpec (optionally clipped to ``domain``) or a prebuilt Grid.
    """
    g = as_grid(grid, domain)
    vals = _evaluate(f, g)
    return kahan_sum(vals * g.weights)


def lp_norm(u, domain: geo.Domain | None, p, grid) -> float:
    """(integral of |u|^p over the domain)^(1/p)."""
    p = float(p)
    if p < 1:
        raise ParameterError("p must be >= 1")
    g = as_grid(grid, domain)
    vals = np.abs(_evaluate(u, g))
    return kahan_sum(vals**p * g.weights) ** (1.0 / p)


def _region_grid(region, resolution_or_cells) -> Grid:
    if isinstance(region, Grid):
        return region
    if isinstance(region, Box):
        return union_grid([region], resolution_or_cells)
    if isinstance(region, geo.Annulus):
        spec = GridSpec(resolution_or_cells, region.bounding_box())
        return masked_grid(spec, region.contains)
    if isinstance(region, (list, tuple)):
        return union_grid(list(region), resolution_or_cells)
    raise ParameterError(f"unsupported region type {type(region).__name__}")


def average(u, region, cells_per_axis: int = 16) -> float:
    """Mean value of u over a box, union of boxes, annulus, or prebuilt grid."""
    g = _region_grid(region, cells_per_axis)
    total = g.total_weight
    if total <= 0:
        raise ParameterError("region has zero measure")
    vals = _evaluate(u, g)
    return kahan_sum(vals * g.weights) / total


# ---------------------------------------------------------------------------
# Gagliardo seminorm


def _local_lipschitz(u, grid: Grid) -> np.ndarray:
    """Per-cell slope estimate |grad u| at cell centers (central differences)."""
    grads = np.zeros(grid.ncells)
    for a in range(grid.d):
        h = grid.sides[:, a] * 0.25
        plus = grid.centers.copy()
        plus[:, a] += h
        minus = grid.centers.copy()
        minus[:, a] -= h
        ga = (np.asarray(u(plus), dtype=float) - np.asarray(u(minus), dtype=float)) / (2 * h)
        grads += ga * ga
    return np.sqrt(grads)


def _diagonal_patch(grid: Grid, lips: np.ndarray, p: float, sp: float) -> float:
    """Same-cell seminorm mass: L^p * int int |x-y|^{p-d-sp} over the cell.

    The inner integral is evaluated in closed form over the ball of the
    same volume as the cell, giving vol * d w_d r^{p-sp} / (p - sp) with
    r = (vol / w_d)^{1/d}; exact for d = 1 and first-order accurate above.
    """
    d = grid.d
    if p - sp <= 0:
        raise ParameterError("diagonal patch requires sp < p")
    wd = geo.unit_ball_volume(d)
    vol = grid.weights
    r_eq = (vol / wd) ** (1.0 / d)
    radial = d * wd * r_eq ** (p - sp) / (p - sp)
    return kahan_sum(lips**p * vol * radial)


def _pair_block_sums(vals, centers, weights, p, kernel_expo, swap_args):
    """Partial sums over ordered pairs (i < j), one entry per row block."""
    M = len(vals)
    blocks = range(0, M, _PAIR_BLOCK)
    idx = np.arange(M)

    def one_block(i0: int) -> float:
        i1 = min(i0 + _PAIR_BLOCK, M)
        ci = centers[i0:i1]
        diff = ci[:, None, :] - centers[None, i0:, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        if swap_args:
            du = np.abs(vals[None, i0:] - vals[i0:i1, None])
        else:
            du = np.abs(vals[i0:i1, None] - vals[None, i0:])
        mask = idx[None, i0:] > idx[i0:i1, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            contrib = np.where(
                mask,
                du**p / d2 ** (0.5 * kernel_expo) * (weights[i0:i1, None] * weights[None, i0:]),
                0.0,
            )
        return float(np.sum(contrib))

    starts = list(blocks)
    if _NUM_THREADS > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=_NUM_THREADS) as ex:
            partials = list(ex.map(one_block, starts))
    else:
        partials = [one_block(i0) for i0 in starts]
    return partials


def gagliardo_seminorm(
    u,
    domain: geo.Domain | None,
    fp: FracParams,
    grid,
    *,
    swap_args: bool = False,
) -> float:
    """[u]_{W^{s,p}} over (domain x domain), truncated to the grid's region.

    For compactly supported u on unbounded domains the grid's box is the
    far-field truncation; widen it to capture more of the tail.
    ``swap_args`` evaluates |u(y) - u(x)| instead of |u(x) - u(y)| over the
    identical pair traversal (the kernel symmetry the tests pin down).
    """
    g = as_grid(grid, domain)
    if g.d != fp.d:
        raise ParameterError(f"grid dimension {g.d} != parameter dimension {fp.d}")
    p = float(fp.p)
    sp = float(fp.sp)
    vals = _evaluate(u, g)
    kernel_expo = fp.d + sp
    partials = _pair_block_sums(vals, g.centers, g.weights, p, kernel_expo, swap_args)
    off_diag = 2.0 * kahan_sum(np.asarray(partials))
    lips = _local_lipschitz(u, g)
    diag = _diagonal_patch(g, lips, p, sp)
    return (off_diag + diag) ** (1.0 / p)
