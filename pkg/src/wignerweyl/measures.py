"""Invariant-measure quadrature grids for CP^(N-1), SU(N), and the HW plane.

Grids are tensor products of one-dimensional rules:

* periodic angle directions get uniform rules, exact for every trigonometric
  frequency the kernels can produce;
* aperiodic directions (colatitudes with their measure factors, half-range or
  irrational-length angles) get Gauss-Legendre nodes with a least-norm moment
  correction that integrates the finite frequency span of the representation
  exactly while keeping all weights positive.

The per-direction frequency sets are computed from the eigenvalue differences
of the generator attached to that direction ("pairs" level: entries of one
kernel) or from pairwise sums of those differences ("quads" level: products
of two kernel entries, as needed by self-conjugacy and star products).

Compact-manifold grids are volume-normalized so that the weights sum to the
representation dimension.  HW grids integrate d^2alpha / pi over a square of
given radius and carry no such sum rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import HW, SUN, Composite, SystemDescriptor, dimension
from .points import CompositePoint, CPPoint, EulerPoint, HWPoint, PhasePoint
from .rotations import _gen_eig, euler_factor_sequence

MAX_NODES = 20_000_000

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    nodes: np.ndarray
    weights: np.ndarray
    generator_k: int | None = None
    kind: str = "gauss"

    def __post_init__(self):
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False


@dataclass(eq=False)
class QuadratureGrid:
    """Tensor-product quadrature over a phase-space manifold.

    ``normalization`` multiplies the product of per-axis weights to give the
    final node weight; ``raw_volume`` is the unnormalized measure total.
    Instances hash by identity; treat them as immutable.
    """

    system: SystemDescriptor
    manifold: str  # "CP" | "SUN" | "HW_PLANE" | "PRODUCT"
    axes: tuple[Axis, ...]
    normalization: float
    raw_volume: float
    exactness: str
    factors: tuple["QuadratureGrid", ...] | None = None
    _weights: np.ndarray | None = field(default=None, repr=False)
    _coords: np.ndarray | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ax.nodes) for ax in self.axes)

    @property
    def n_nodes(self) -> int:
        n = 1
        for ax in self.axes:
            n *= len(ax.nodes)
        return n

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(ax.name for ax in self.axes)

    def _check_materializable(self) -> None:
        # grids are cheap descriptions; only the flattened tensor is bounded
        if self.n_nodes > MAX_NODES:
            raise OverflowError(
                f"grid holds {self.n_nodes} nodes (limit {MAX_NODES}); "
                "lower the resolution or use slice evaluation"
            )

    def weights(self) -> np.ndarray:
        """Flat node weights in C order over the axis tensor product."""
        if self._weights is None:
            self._check_materializable()
            w = np.asarray([self.normalization])
            for ax in self.axes:
                w = np.multiply.outer(w, ax.weights)
            w = w.reshape(-1)
            w.flags.writeable = False
            self._weights = w
        return self._weights

    def coords(self) -> np.ndarray:
        """(n_nodes, n_axes) array of node coordinates, C order."""
        if self._coords is None:
            self._check_materializable()
            mesh = np.meshgrid(*(ax.nodes for ax in self.axes), indexing="ij")
            c = np.stack([m.reshape(-1) for m in mesh], axis=1)
            c.flags.writeable = False
            self._coords = c
        return self._coords

    def point(self, i: int) -> PhasePoint:
        """The i-th node as a typed phase-space point."""
        row = self.coords()[i]
        return _point_from_row(self, row)

    def to_csv(self, path) -> None:
        """One row per node: angle columns then weight, 17 significant digits."""
        from .serialize import write_csv

        coords = self.coords()
        w = self.weights()
        rows = np.concatenate([coords, w[:, None]], axis=1)
        write_csv(path, list(self.column_names) + ["weight"], rows)


def _point_from_row(grid: QuadratureGrid, row: np.ndarray) -> PhasePoint:
    if grid.manifold == "HW_PLANE":
        return HWPoint(complex(row[0], row[1]))
    if grid.manifold == "CP":
        n = len(grid.axes) // 2
        return CPPoint(phi=tuple(row[0::2][:n]), theta=tuple(row[1::2][:n]))
    if grid.manifold == "SUN":
        n_pairs = (len(grid.axes) - (grid.system.N - 1)) // 2
        pair_part = row[: 2 * n_pairs]
        return EulerPoint(
            phi=tuple(pair_part[0::2]),
            theta=tuple(pair_part[1::2]),
            Phi=tuple(row[2 * n_pairs:]),
        )
    if grid.manifold == "PRODUCT":
        pts = []
        at = 0
        for sub in grid.factors:
            n_ax = len(sub.axes)
            pts.append(_point_from_row(sub, row[at: at + n_ax]))
            at += n_ax
        return CompositePoint(tuple(pts))
    raise ValueError(f"unknown manifold {grid.manifold!r}")


# ---------------------------------------------------------------------------
# one-dimensional rules


def _gauss_base(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _trig_basis(x: np.ndarray, pos_freqs) -> np.ndarray:
    rows = [np.ones_like(x)]
    for nu in pos_freqs:
        rows.append(np.cos(nu * x))
        rows.append(np.sin(nu * x))
    return np.asarray(rows)


def _uniform_axis(name, lo, hi, freqs, n_floor, gen_k) -> Axis:
    """Uniform rule on a full period of every frequency in the set."""
    L = hi - lo
    indices = []
    for nu in freqs:
        k = nu * L / _TWO_PI
        if abs(k - round(k)) > 1e-9:
            raise ValueError(f"frequency {nu} is not periodic over range {L}")
        indices.append(abs(round(k)))
    n = max(n_floor, (max(indices) + 1) if indices else 1, 2)
    nodes = lo + L * np.arange(n) / n
    weights = np.full(n, L / n)
    return Axis(name, lo, hi, nodes, weights, gen_k, kind="uniform")


def _corrected_axis(name, lo, hi, freqs, weight_fn, n_floor, gen_k) -> Axis:
    """Gauss-Legendre rule moment-corrected to be exact on the trig span."""
    pos = sorted({float(f) for f in freqs if f > 1e-12})
    L = hi - lo
    numax = pos[-1] if pos else 0.0
    # one node of headroom over the moment-constraint count; the retry loop
    # below grows the rule whenever positivity or exactness fails
    n = max(n_floor, 2 * len(pos) + 2, math.ceil(numax * L / 6.0) + 2)
    # high-resolution reference for the true moments
    xr, wr = _gauss_base(lo, hi, 4 * n + 120)
    fr = weight_fn(xr) if weight_fn is not None else np.ones_like(xr)
    moments = _trig_basis(xr, pos) @ (wr * fr)
    for _ in range(6):
        x, w = _gauss_base(lo, hi, n)
        base = w * (weight_fn(x) if weight_fn is not None else 1.0)
        A = _trig_basis(x, pos)
        resid = moments - A @ base
        delta = A.T @ np.linalg.solve(A @ A.T, resid)
        wts = base + delta
        if wts.min() >= 0.0 and np.max(np.abs(A @ wts - moments)) < 1e-12:
            return Axis(name, lo, hi, x, wts, gen_k, kind="gauss")
        n = n + max(2, n // 2)
    raise RuntimeError(f"could not build a positive exact rule for axis {name}")


# ---------------------------------------------------------------------------
# frequency sets from the generators


def _diff_freqs(N: int, M: int, k: int) -> tuple[float, ...]:
    """Nonnegative pairwise eigenvalue differences of J(k) in representation (N, M)."""
    w, _ = _gen_eig(N, M, k)
    diffs = np.abs(w[:, None] - w[None, :]).reshape(-1)
    return _dedup(diffs)


def _dedup(vals) -> tuple[float, ...]:
    out: list[float] = []
    for v in sorted(float(x) for x in vals):
        if not out or v - out[-1] > 1e-9:
            out.append(v)
    return tuple(out)


def _level_freqs(N: int, M: int, k: int, level: str) -> tuple[float, ...]:
    diffs = _diff_freqs(N, M, k)
    if level == "pairs":
        return diffs
    if level == "quads":
        sums = [a + b for a in diffs for b in diffs] + [abs(a - b) for a in diffs for b in diffs]
        return _dedup(sums)
    raise ValueError(f"unknown exactness level {level!r}")


# ---------------------------------------------------------------------------
# measure factors (colatitude weights)


def _cp_theta_weight(N: int, j: int):
    """Weight for theta_j in the CP^(N-1) measure, j = 1 .. N-1 (k = j + 1)."""
    k = j + 1
    if k == 2:
        return lambda t: np.sin(2.0 * t)
    if k < N:
        return lambda t: np.cos(t) ** (2 * k - 3) * np.sin(t)
    return lambda t: np.cos(t) * np.sin(t) ** (2 * N - 3)


def _sun_theta_weight(p: int, q: int):
    """Weight attached to the theta of factor (p, q) in the full SU(N) measure."""
    if p == 2:
        return lambda t: np.sin(2.0 * t)
    if p < q:
        return lambda t: np.cos(t) ** (2 * p - 3) * np.sin(t)
    return lambda t: np.cos(t) * np.sin(t) ** (2 * q - 3)


# ---------------------------------------------------------------------------
# grid constructors


def _check_resolution(desc: SUN, resolution: int | None) -> int:
    floor = max(desc.M + 1, 2)
    if resolution is None:
        return floor
    if resolution < floor:
        raise ValueError(f"resolution {resolution} below minimum {floor} for {desc}")
    return resolution


def cp_grid(desc: SUN, resolution: int | None = None) -> QuadratureGrid:
    """Volume-normalized grid over CP^(N-1), the Wigner-side manifold.

    Exact (to rounding) for products of two Wigner-kernel matrix elements,
    which covers kernel normalization, self-conjugacy, and star-product
    quadrature.
    """
    if not isinstance(desc, SUN):
        raise TypeError("cp_grid needs a SUN descriptor")
    floor = _check_resolution(desc, resolution)
    N, M = desc.N, desc.M
    axes = []
    for j in range(1, N):
        phi_freqs = _level_freqs(N, M, 3, "quads")
        axes.append(_uniform_axis(f"phi{j}", 0.0, _TWO_PI, phi_freqs, floor, 3))
        k_theta = j * j + 1
        th_freqs = _level_freqs(N, M, k_theta, "quads")
        axes.append(
            _corrected_axis(
                f"theta{j}", 0.0, 0.5 * math.pi, th_freqs, _cp_theta_weight(N, j), floor, k_theta
            )
        )
    return _finalize(desc, "CP", axes, "quads")


# Euler angle ranges for the phi directions, per group.  theta is always
# [0, pi/2]; Phi_c spans [0, pi sqrt(2(c+1)/c)].
_SUN_PHI_RANGES = {
    2: [_TWO_PI],
    # phi_1 and phi_3 extended to a uniform double cover (shift by pi is a
    # left/right translation by diag(-1,-1,1)), so every phi is a full period.
    3: [_TWO_PI, _TWO_PI, _TWO_PI],
    4: [math.pi, _TWO_PI, _TWO_PI, math.pi, _TWO_PI, math.pi],
}


def sun_grid(
    desc: SUN, resolution: int | None = None, exactness: str | None = None
) -> QuadratureGrid:
    """Volume-normalized grid over the full SU(N) group manifold (Weyl side).

    Defaults to "quads" exactness for N = 2 and "pairs" for N = 3 (the
    8-dimensional tensor grid at quads level is out of desk scale; pairs
    level is exact for reconstruction and overlap integrals).  N outside
    {2, 3, 4} is rejected.
    """
    if not isinstance(desc, SUN):
        raise TypeError("sun_grid needs a SUN descriptor")
    N, M = desc.N, desc.M
    if N not in (2, 3, 4):
        raise ValueError(f"sun_grid supports N in {{2, 3, 4}}, got N={N}")
    if exactness is None:
        exactness = "quads" if N == 2 else "pairs"
    floor = _check_resolution(desc, resolution)
    phi_ranges = _SUN_PHI_RANGES[N]
    axes = []
    for t, k_theta in euler_factor_sequence(N):
        hi = phi_ranges[t - 1]
        phi_freqs = _level_freqs(N, M, 3, exactness)
        if abs(hi - _TWO_PI) < 1e-12:
            axes.append(_uniform_axis(f"phi{t}", 0.0, hi, phi_freqs, floor, 3))
        else:
            axes.append(_corrected_axis(f"phi{t}", 0.0, hi, phi_freqs, None, floor, 3))
        p, q = _factor_pq(N, t)
        th_freqs = _level_freqs(N, M, k_theta, exactness)
        axes.append(
            _corrected_axis(
                f"theta{t}", 0.0, 0.5 * math.pi, th_freqs, _sun_theta_weight(p, q), floor, k_theta
            )
        )
    for c in range(1, N):
        k = (c + 1) ** 2 - 1
        hi = math.pi * math.sqrt(2.0 * (c + 1) / c)
        freqs = _level_freqs(N, M, k, exactness)
        periodic = all(
            abs(nu * hi / _TWO_PI - round(nu * hi / _TWO_PI)) < 1e-9 for nu in freqs
        )
        if periodic:
            axes.append(_uniform_axis(f"Phi{c}", 0.0, hi, freqs, floor, k))
        else:
            axes.append(_corrected_axis(f"Phi{c}", 0.0, hi, freqs, None, floor, k))
    return _finalize(desc, "SUN", axes, exactness)


def _factor_pq(N: int, t: int) -> tuple[int, int]:
    """(p, q) block coordinates of the t-th (phi, theta) factor."""
    i = 0
    for q in range(N, 1, -1):
        for p in range(2, q + 1):
            i += 1
            if i == t:
                return p, q
    raise ValueError(f"factor index {t} out of range")


def hw_grid(desc: HW, radius: float, resolution: int) -> QuadratureGrid:
    """Gauss-Legendre grid over the square |Re alpha|, |Im alpha| <= radius.

    Weights integrate d^2alpha / pi.  Choose radius >= sqrt(n_max) so the
    truncated space is covered; the identity-trace check in the tests is the
    practical coverage metric.
    """
    if not isinstance(desc, HW):
        raise TypeError("hw_grid needs an HW descriptor")
    if radius <= 0 or resolution < 2:
        raise ValueError("need radius > 0 and resolution >= 2")
    axes = []
    for name in ("re", "im"):
        x, w = _gauss_base(-radius, radius, resolution)
        axes.append(Axis(name, -radius, radius, x, w, None, kind="gauss"))
    raw = (2.0 * radius) ** 2
    return QuadratureGrid(desc, "HW_PLANE", tuple(axes), 1.0 / math.pi, raw, "hw")


def product_grid(grids) -> QuadratureGrid:
    """Tensor product of factor grids for a composite system."""
    grids = tuple(grids)
    if len(grids) < 2:
        raise ValueError("product_grid needs at least two factors")
    axes = []
    for i, g in enumerate(grids, start=1):
        for ax in g.axes:
            axes.append(
                Axis(f"f{i}_{ax.name}", ax.lo, ax.hi, ax.nodes, ax.weights, ax.generator_k, ax.kind)
            )
    system = Composite(tuple(g.system for g in grids))
    norm = 1.0
    raw = 1.0
    for g in grids:
        norm *= g.normalization
        raw *= g.raw_volume
    exact = ",".join(g.exactness for g in grids)
    return QuadratureGrid(system, "PRODUCT", tuple(axes), norm, raw, exact, factors=grids)


def _finalize(desc: SUN, manifold: str, axes, exactness: str) -> QuadratureGrid:
    raw = 1.0
    for ax in axes:
        raw *= float(np.sum(ax.weights))
    d = dimension(desc)
    return QuadratureGrid(desc, manifold, tuple(axes), d / raw, raw, exactness)
