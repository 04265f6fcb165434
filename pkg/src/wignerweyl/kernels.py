"""Wigner and Weyl phase-space kernels.

The Weyl kernel at a point is the displacement-type group element itself
(SU(N) Euler rotation, or the block-restricted HW displacement).  The
Wigner kernel is the rotated parity, U Pi U^dagger, where Pi is the
generalized parity operator: a Clebsch-Gordan multipole sum for SUN(2, M),
a closed diagonal form for SUN(N, 1), and twice the Fock-space parity
for HW.

Kernel stacks over full grids are evaluated in vectorized form (one batched
matrix product per tensor axis) and cached per (grid, kernel spec).
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from scipy.special import eval_genlaguerre, gammaln, xlogy

from .algebra import HW, SUN, Composite, SystemDescriptor, basis_labels, dimension
from .measures import QuadratureGrid
from .points import CompositePoint, CPPoint, EulerPoint, HWPoint, PhasePoint
from .rotations import (
    _gen_eig,
    arecchi_rotation,
    euler_factor_sequence,
    euler_rotation,
)

WIGNER = "wigner"
WEYL = "weyl"


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel family to evaluate: side, system, and rotation variant.

    ``rotation="arecchi"`` selects the two-angle coherence-group rotation as
    the Weyl-side kernel (SUN(2, M) only); it deliberately lacks the Cartan
    average and fails completeness, serving as a negative control.
    """

    side: str
    system: SystemDescriptor
    rotation: str = "euler"

    def __post_init__(self):
        if self.side not in (WIGNER, WEYL):
            raise ValueError(f"side must be '{WIGNER}' or '{WEYL}', got {self.side!r}")
        if self.rotation not in ("euler", "arecchi"):
            raise ValueError(f"unknown rotation variant {self.rotation!r}")
        if self.rotation == "arecchi":
            if self.side != WEYL or not (
                isinstance(self.system, SUN) and self.system.N == 2
            ):
                raise ValueError("arecchi rotation is a Weyl-side SUN(2, M) variant")


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients


def _as_two(x: float, what: str) -> int:
    two = 2.0 * x
    if abs(two - round(two)) > 1e-9:
        raise ValueError(f"{what} must be integer or half-integer, got {x}")
    return int(round(two))


@lru_cache(maxsize=None)
def _cg_cached(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> float:
    # all arguments are doubled to keep them integral
    if tm1 + tm2 != tM:
        return 0.0
    if tJ < abs(tj1 - tj2) or tJ > tj1 + tj2:
        return 0.0
    if (tj1 + tj2 + tJ) % 2 != 0:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tJ + tM) % 2:
        return 0.0

    def lf(two_x: int) -> float:
        # log((two_x / 2)!) for an even doubled argument
        if two_x % 2:
            raise ValueError("factorial of non-integer")
        if two_x < 0:
            return math.inf
        return math.lgamma(two_x // 2 + 1)

    log_pref = 0.5 * (
        math.log(tJ + 1.0)
        + lf(tj1 + tj2 - tJ)
        + lf(tj1 - tj2 + tJ)
        + lf(-tj1 + tj2 + tJ)
        - lf(tj1 + tj2 + tJ + 2)
        + lf(tj1 + tm1)
        + lf(tj1 - tm1)
        + lf(tj2 + tm2)
        + lf(tj2 - tm2)
        + lf(tJ + tM)
        + lf(tJ - tM)
    )
    total = 0.0
    k_lo = max(0, (tj2 - tJ - tm1) // 2, (tj1 + tm2 - tJ) // 2)
    k_hi = min((tj1 + tj2 - tJ) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    for k in range(k_lo, k_hi + 1):
        tk = 2 * k
        log_den = (
            lf(tk)
            + lf(tj1 + tj2 - tJ - tk)
            + lf(tj1 - tm1 - tk)
            + lf(tj2 + tm2 - tk)
            + lf(tJ - tj2 + tm1 + tk)
            + lf(tJ - tj1 - tm2 + tk)
        )
        total += (-1.0) ** k * math.exp(log_pref - log_den)
    return total


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float, J: float, M: float) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley convention.

    Evaluated from the closed factorial sum with log-factorial
    stabilization.  Selection-rule violations return 0; non-(half)integer
    arguments raise.
    """
    args = [
        _as_two(j1, "j1"), _as_two(m1, "m1"), _as_two(j2, "j2"),
        _as_two(m2, "m2"), _as_two(J, "J"), _as_two(M, "M"),
    ]
    for tj, tm, name in ((args[0], args[1], "m1"), (args[2], args[3], "m2"), (args[4], args[5], "M")):
        if (tj + tm) % 2:
            raise ValueError(f"{name} must differ from its j by an integer")
    return _cg_cached(*args)


# ---------------------------------------------------------------------------
# parity operators


def parity(desc: SystemDescriptor) -> np.ndarray:
    """Generalized parity: the Wigner kernel at the phase-space origin.

    SUN(2, M): the multipole sum over l = 0..M of
    (2l+1)/(M+1) <j,-n; l,0 | j,-n> on the weight-n basis state (j = M/2),
    oriented so the lowest-weight state carries the largest entry.
    SUN(N, 1): (1/N) (1 - sqrt((N-1)N(N+1)/2) J(N^2-1)).
    HW: twice the Fock parity, diag(2 (-1)^n).
    Other SUN(N >= 3, M >= 2) parities are not supported.
    """
    if isinstance(desc, HW):
        return np.diag(2.0 * (-1.0) ** np.arange(desc.n_max)).astype(np.complex128)
    if not isinstance(desc, SUN):
        raise TypeError("parity takes a single HW or SUN factor")
    N, M = desc.N, desc.M
    if N == 2:
        j = 0.5 * M
        labels = basis_labels(2, M)
        diag = []
        for m1, m2 in labels:
            n = 0.5 * (m1 - m2)
            p = 0.0
            for l in range(M + 1):
                p += (2 * l + 1) / (M + 1) * clebsch_gordan(j, -n, l, 0, j, -n)
            diag.append(p)
        return np.diag(np.asarray(diag, dtype=np.complex128))
    if M == 1:
        from .algebra import generator

        coef = math.sqrt((N - 1) * N * (N + 1) / 2.0)
        return (np.eye(N) - coef * generator(N, 1, N * N - 1)) / N
    raise ValueError(f"parity unsupported for SUN(N={N}, M={M}) with N >= 3, M >= 2")


def parity_cartan_weights(desc: SUN) -> np.ndarray:
    """Coefficients beta_l of the parity in the Cartan basis (l = 0 .. N-1).

    Recovered a posteriori by projection: beta_0 = Tr[Pi]/d and
    beta_l = Tr[Pi J] / Tr[J^2] for each diagonal generator J.
    """
    from .algebra import diagonal_generator

    Pi = parity(desc)
    d = dimension(desc)
    out = [np.trace(Pi).real / d]
    for l in range(1, desc.N):
        J = diagonal_generator(desc.N, desc.M, l)
        out.append(float(np.trace(Pi @ J).real / np.trace(J @ J).real))
    return np.asarray(out)


# ---------------------------------------------------------------------------
# HW displacement matrix elements
#
# The kernel layer uses the matrix elements of the untruncated displacement
# operator restricted to the n_max-dimensional block,
#   <m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2} L_n^{(m-n)}(|alpha|^2),
# not the exponential of the truncated ladder operators.  The truncated
# exponential is unitary, so beyond |alpha| ~ sqrt(n_max) it reflects
# amplitude off the cutoff instead of letting the elements decay; that
# wrecks every phase-space integral over a finite plane window.  The
# restricted elements decay, and they form an orthonormal function family
# over d^2alpha/pi, so reconstruction on the truncated space is exact up to
# the domain tail.  (The unitary truncated exponential remains available as
# hw_displacement in the rotations layer, together with its defect metric.)


def _displacement_elements(n_max: int, alphas: np.ndarray) -> np.ndarray:
    """Block-restricted displacement matrices for an array of alphas.

    Returns shape alphas.shape + (n_max, n_max).  Stable in log space up to
    the overflow envelope of the generalized Laguerre values (desk-scale
    radii and truncations are far inside it).
    """
    alphas = np.asarray(alphas, dtype=np.complex128)
    r = np.abs(alphas)[..., None, None]
    psi = np.angle(alphas)[..., None, None]
    m = np.arange(n_max)
    mi, ni = m[:, None], m[None, :]
    lo = np.minimum(mi, ni)
    k = np.abs(mi - ni)
    log_ratio = 0.5 * (gammaln(lo + 1.0) - gammaln(np.maximum(mi, ni) + 1.0))
    x = r * r
    lag = eval_genlaguerre(lo, k, x)
    radial = np.exp(xlogy(k, r) + log_ratio - 0.5 * x) * lag
    sign = np.where(ni > mi, (-1.0) ** (ni - mi), 1.0)
    return radial * sign * np.exp(1j * (mi - ni) * psi)


def hw_wigner_kernel(n_max: int, alphas: np.ndarray) -> np.ndarray:
    """Displaced-parity kernels 2 D(alpha) P D(alpha)^dagger = 2 D(2 alpha) P."""
    par = 2.0 * (-1.0) ** np.arange(n_max)
    return _displacement_elements(n_max, 2.0 * np.asarray(alphas)) * par


def hw_weyl_kernel(n_max: int, alphas: np.ndarray) -> np.ndarray:
    """Displacement kernels D(alpha) on the truncated block."""
    return _displacement_elements(n_max, alphas)


# ---------------------------------------------------------------------------
# kernels at a single point


def _cp_block_rotation(desc: SUN, point: CPPoint) -> np.ndarray:
    """The coset-block rotation carrying the lowest-weight state over CP^(N-1)."""
    N, M = desc.N, desc.M
    if len(point.phi) != N - 1:
        raise ValueError(f"CP^{N-1} point needs {N - 1} (phi, theta) pairs")
    from .rotations import _expi_gen

    U = np.eye(dimension(desc), dtype=np.complex128)
    for p in range(2, N + 1):
        U = U @ _expi_gen(N, M, 3, point.phi[p - 2])
        U = U @ _expi_gen(N, M, (p - 1) ** 2 + 1, point.theta[p - 2])
    return U


def wigner_kernel_at(desc: SystemDescriptor, point: PhasePoint) -> np.ndarray:
    """Rotated-parity (Wigner) kernel at one phase-space point."""
    if isinstance(desc, HW):
        if not isinstance(point, HWPoint):
            raise TypeError("HW Wigner kernel needs an HWPoint")
        return hw_wigner_kernel(desc.n_max, point.alpha)
    if isinstance(desc, SUN):
        if not isinstance(point, CPPoint):
            raise TypeError("SUN Wigner kernel needs a CPPoint")
        U = _cp_block_rotation(desc, point)
        par = np.diag(parity(desc)).copy()
        return (U * par[None, :]) @ U.conj().T
    if isinstance(desc, Composite):
        if not isinstance(point, CompositePoint) or len(point.points) != len(desc.factors):
            raise TypeError("composite kernel needs a matching CompositePoint")
        out = None
        for f, p in zip(desc.factors, point.points):
            k = wigner_kernel_at(f, p)
            out = k if out is None else np.kron(out, k)
        return out
    raise TypeError(f"not a system descriptor: {desc!r}")


def weyl_kernel_at(desc: SystemDescriptor, point: PhasePoint) -> np.ndarray:
    """Displacement-type (Weyl) kernel at one phase-space point."""
    if isinstance(desc, HW):
        if not isinstance(point, HWPoint):
            raise TypeError("HW Weyl kernel needs an HWPoint")
        return hw_weyl_kernel(desc.n_max, point.alpha)
    if isinstance(desc, SUN):
        if not isinstance(point, EulerPoint):
            raise TypeError("SUN Weyl kernel needs an EulerPoint")
        return euler_rotation(desc, point)
    if isinstance(desc, Composite):
        if not isinstance(point, CompositePoint) or len(point.points) != len(desc.factors):
            raise TypeError("composite kernel needs a matching CompositePoint")
        out = None
        for f, p in zip(desc.factors, point.points):
            k = weyl_kernel_at(f, p)
            out = k if out is None else np.kron(out, k)
        return out
    raise TypeError(f"not a system descriptor: {desc!r}")


def composite_kernel_at(desc: Composite, side: str, point: CompositePoint) -> np.ndarray:
    """Tensor-product kernel over explicit factor points."""
    if side == WIGNER:
        return wigner_kernel_at(desc, point)
    return weyl_kernel_at(desc, point)


def kernel_at(spec: KernelSpec, point: PhasePoint) -> np.ndarray:
    """Kernel of the given spec at one point."""
    if spec.rotation == "arecchi":
        if not isinstance(point, CPPoint):
            raise TypeError("arecchi kernel needs a CPPoint")
        return arecchi_rotation(spec.system, point.phi[0], point.theta[0])
    if spec.side == WIGNER:
        return wigner_kernel_at(spec.system, point)
    return weyl_kernel_at(spec.system, point)


# ---------------------------------------------------------------------------
# vectorized kernel stacks over grids, cached per (grid, spec)

_STACK_CACHE: "weakref.WeakKeyDictionary[QuadratureGrid, dict]" = weakref.WeakKeyDictionary()

MAX_STACK_BYTES = 1_500_000_000


def _axis_factor_stack(N: int, M: int, k: int, nodes: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """Stack of exp(i J(k) x) over the axis nodes: (n, d, d)."""
    w, V = _gen_eig(N, M, k)
    phases = np.exp(1j * sign * np.outer(nodes, w))
    return (V[None, :, :] * phases[:, None, :]) @ V.conj().T


def _indices(grid: QuadratureGrid) -> tuple[np.ndarray, ...]:
    return np.unravel_index(np.arange(grid.n_nodes), grid.shape)


def _sun_weyl_stack(desc: SUN, grid: QuadratureGrid) -> np.ndarray:
    N, M = desc.N, desc.M
    idx = _indices(grid)
    U = None
    for ax_i, ax in enumerate(grid.axes):
        F = _axis_factor_stack(N, M, ax.generator_k, ax.nodes)
        gathered = F[idx[ax_i]]
        U = gathered if U is None else U @ gathered
    return U


def _sun_wigner_stack(desc: SUN, grid: QuadratureGrid) -> np.ndarray:
    N, M = desc.N, desc.M
    idx = _indices(grid)
    U = None
    for ax_i, ax in enumerate(grid.axes):
        F = _axis_factor_stack(N, M, ax.generator_k, ax.nodes)
        gathered = F[idx[ax_i]]
        U = gathered if U is None else U @ gathered
    par = np.diag(parity(desc)).copy()
    return (U * par[None, None, :]) @ np.conj(np.swapaxes(U, 1, 2))


def _arecchi_stack(desc: SUN, grid: QuadratureGrid) -> np.ndarray:
    # R(phi, theta) = e^{i J3 phi} e^{i J2 theta} e^{-i J3 phi}
    N, M = desc.N, desc.M
    idx = _indices(grid)
    phi_ax, theta_ax = grid.axes[0], grid.axes[1]
    F_phi = _axis_factor_stack(N, M, 3, phi_ax.nodes)
    F_phi_inv = _axis_factor_stack(N, M, 3, phi_ax.nodes, sign=-1.0)
    F_th = _axis_factor_stack(N, M, 2, theta_ax.nodes)
    return F_phi[idx[0]] @ F_th[idx[1]] @ F_phi_inv[idx[0]]


def _hw_stack(desc: HW, grid: QuadratureGrid, side: str) -> np.ndarray:
    coords = grid.coords()
    alphas = coords[:, 0] + 1j * coords[:, 1]
    if side == WEYL:
        return hw_weyl_kernel(desc.n_max, alphas)
    return hw_wigner_kernel(desc.n_max, alphas)


def _product_stack(spec: KernelSpec, grid: QuadratureGrid) -> np.ndarray:
    desc: Composite = spec.system
    subs = []
    for f_desc, f_grid in zip(desc.factors, grid.factors):
        subs.append(kernel_stack(KernelSpec(spec.side, f_desc, spec.rotation), f_grid))
    out = subs[0]
    for nxt in subs[1:]:
        na, da = out.shape[0], out.shape[1]
        nb, db = nxt.shape[0], nxt.shape[1]
        out = np.einsum("aij,bkl->abikjl", out, nxt).reshape(na * nb, da * db, da * db)
    return out


def kernel_stack(spec: KernelSpec, grid: QuadratureGrid) -> np.ndarray:
    """All kernels on a grid as a read-only (n_nodes, d, d) array, cached.

    The cache is keyed by grid identity and kernel spec; entries are
    write-once, so concurrent readers are safe.
    """
    if spec.system != grid.system:
        raise ValueError(f"kernel system {spec.system} does not match grid system {grid.system}")
    per_grid = _STACK_CACHE.setdefault(grid, {})
    if spec in per_grid:
        return per_grid[spec]
    d = dimension(spec.system)
    need = grid.n_nodes * d * d * 16
    if need > MAX_STACK_BYTES:
        raise OverflowError(
            f"kernel stack would need {need / 1e9:.1f} GB; use slice evaluation instead"
        )
    if isinstance(spec.system, Composite):
        if grid.manifold != "PRODUCT":
            raise ValueError("composite systems need a product grid")
        stack = _product_stack(spec, grid)
    elif isinstance(spec.system, HW):
        if grid.manifold != "HW_PLANE":
            raise ValueError("HW systems need an hw_grid")
        stack = _hw_stack(spec.system, grid, spec.side)
    elif spec.rotation == "arecchi":
        if grid.manifold != "CP":
            raise ValueError("arecchi kernels live on the two-angle (CP) grid")
        stack = _arecchi_stack(spec.system, grid)
    elif spec.side == WEYL:
        if grid.manifold != "SUN":
            raise ValueError("SUN Weyl kernels need a sun_grid")
        stack = _sun_weyl_stack(spec.system, grid)
    else:
        if grid.manifold != "CP":
            raise ValueError("SUN Wigner kernels need a cp_grid")
        stack = _sun_wigner_stack(spec.system, grid)
    stack.flags.writeable = False
    per_grid[spec] = stack
    return stack
