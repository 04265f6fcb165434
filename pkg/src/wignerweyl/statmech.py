"""Quantum-statistical layer: partition functions, thermal means, moments,
autocorrelations, and phase-space cross-correlations.

Everything here is computed through phase-space quadrature; Hilbert-space
eigen-oracles live in the tests and in the CLI residual printout, not in
these code paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import HW, SUN, SystemDescriptor, dimension, is_hermitian
from .kernels import WEYL, WIGNER, KernelSpec
from .measures import Axis, QuadratureGrid
from .points import CompositePoint, EulerPoint, HWPoint, PhasePoint
from .rotations import euler_angle_count
from .transforms import PhaseFunction, overlap, phase_function, reconstruct, symbol_at


@dataclass(frozen=True)
class ThermalSpec:
    """A Hamiltonian with an inverse temperature."""

    hamiltonian: np.ndarray
    beta: float

    def __post_init__(self):
        H = np.asarray(self.hamiltonian, dtype=np.complex128)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("Hamiltonian must be square")
        if not is_hermitian(H):
            raise ValueError("Hamiltonian must be Hermitian")
        if not (self.beta >= 0):
            raise ValueError("beta must be >= 0")
        H = H.copy()
        H.flags.writeable = False
        object.__setattr__(self, "hamiltonian", H)


def gibbs_operator(tspec: ThermalSpec) -> np.ndarray:
    """Unnormalized exp(-beta H) through the eigendecomposition."""
    w, V = np.linalg.eigh(tspec.hamiltonian)
    return (V * np.exp(-tspec.beta * w)[None, :]) @ V.conj().T


def partition_oracle(tspec: ThermalSpec) -> float:
    """Eigenvalue-sum partition function (Hilbert-space reference)."""
    w = np.linalg.eigvalsh(tspec.hamiltonian)
    return float(np.sum(np.exp(-tspec.beta * w)))


def partition_function(tspec: ThermalSpec, grid: QuadratureGrid) -> float:
    """Z(beta) as the phase-space integral of the Wigner symbol of exp(-beta H)."""
    spec = KernelSpec(WIGNER, grid.system)
    f = phase_function(gibbs_operator(tspec), spec, grid)
    return float(f.integral().real)


def partition_series(tspec: ThermalSpec, grid: QuadratureGrid, order: int = 2) -> float:
    """High-temperature expansion of Z using symbol integrals of W_H.

    Z ~ d - beta Int[W_H] + beta^2/2 Int[W_H^2]; order <= 2.
    """
    if not 0 <= order <= 2:
        raise ValueError("series order must be 0, 1, or 2")
    spec = KernelSpec(WIGNER, grid.system)
    fH = phase_function(np.asarray(tspec.hamiltonian), spec, grid)
    total = float(dimension(grid.system))
    if order >= 1:
        total -= tspec.beta * fH.integral().real
    if order >= 2:
        total += 0.5 * tspec.beta**2 * overlap(fH, fH).real
    return total


def thermal_mean(A: np.ndarray, tspec: ThermalSpec, grid: QuadratureGrid) -> float:
    """<A> in the thermal state, via the symbol-overlap (traciality) form."""
    spec = KernelSpec(WIGNER, grid.system)
    fA = phase_function(np.asarray(A, dtype=np.complex128), spec, grid)
    frho = phase_function(gibbs_operator(tspec), spec, grid)
    Z = frho.integral().real
    return float(overlap(fA, frho).real / Z)


def free_energy(tspec: ThermalSpec, grid: QuadratureGrid) -> float:
    """F = -ln Z / beta (beta > 0)."""
    if tspec.beta <= 0:
        raise ValueError("free energy needs beta > 0")
    return -math.log(partition_function(tspec, grid)) / tspec.beta


# ---------------------------------------------------------------------------
# Weyl-symbol moment generation by finite differences

# 4th-order-accurate central stencils for derivative orders 1-4
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
    3: ((-3, -2, -1, 1, 2, 3), (-1 / 8, 1.0, -13 / 8, 13 / 8, -1.0, 1 / 8)),
    4: ((-3, -2, -1, 0, 1, 2, 3), (-1 / 6, 2.0, -13 / 2, 28 / 3, -13 / 2, 2.0, -1 / 6)),
}


def weyl_axes(desc: SystemDescriptor) -> tuple[str, ...]:
    """Differentiation axes of the Weyl symbol, in canonical order."""
    if isinstance(desc, HW):
        return ("alpha", "alpha_star")
    if isinstance(desc, SUN):
        n_pairs, n_cartan = euler_angle_count(desc.N)
        names = []
        for t in range(1, n_pairs + 1):
            names.extend([f"phi{t}", f"theta{t}"])
        names.extend(f"Phi{c}" for c in range(1, n_cartan + 1))
        return tuple(names)
    raise TypeError("moment axes are defined for single HW or SUN factors")


def _sun_point(desc: SUN, coords: np.ndarray) -> EulerPoint:
    n_pairs, _ = euler_angle_count(desc.N)
    pair = coords[: 2 * n_pairs]
    return EulerPoint(tuple(pair[0::2]), tuple(pair[1::2]), tuple(coords[2 * n_pairs:]))


def _nested_stencil(f, orders: tuple[int, ...], h: float) -> complex:
    """Mixed partial derivative at the origin by composed central stencils."""
    axes = [i for i, m in enumerate(orders) if m > 0]
    if not axes:
        return f(np.zeros(len(orders)))
    total = 0.0 + 0.0j

    def recurse(i: int, coords: np.ndarray, coef: float):
        nonlocal total
        if i == len(axes):
            total += coef * f(coords)
            return
        ax = axes[i]
        offs, cs = _STENCILS[orders[ax]]
        for o, c in zip(offs, cs):
            nxt = coords.copy()
            nxt[ax] = o * h
            recurse(i + 1, nxt, coef * c / h ** orders[ax])

    recurse(0, np.zeros(len(orders)), 1.0)
    return total


def weyl_moments(
    rho: np.ndarray,
    desc: SystemDescriptor,
    multi_index: tuple[int, ...],
    step: float = 1e-3,
    eta: dict[str, complex] | None = None,
) -> complex:
    """Operator moments from derivatives of the Weyl symbol at the origin.

    ``multi_index`` lists derivative orders per axis (see ``weyl_axes``),
    total order <= 4, evaluated with 4th-order central stencils of the given
    step.  Each derivative carries a conventional factor eta: -1j for SU(N)
    angles, and for HW the pair (alpha -> -1, alpha_star -> +1), where the
    "alpha" axis is the Wirtinger derivative with respect to alpha-bar (its
    natural holomorphic pairing).  With these defaults the SU(N) Phi_1
    moment of order m is <J(3)^m> and the HW index (p, q) yields the
    symmetric-ordered <S(a^p a_dagger^q)>.
    """
    axes = weyl_axes(desc)
    if len(multi_index) != len(axes):
        raise ValueError(f"multi_index must have {len(axes)} entries for {desc}")
    if any(m < 0 for m in multi_index) or sum(multi_index) > 4:
        raise ValueError("derivative orders must be >= 0 with total <= 4")
    if max(multi_index, default=0) > 4:
        raise ValueError("per-axis order must be <= 4")
    rho = np.asarray(rho, dtype=np.complex128)
    spec = KernelSpec(WEYL, desc)

    if isinstance(desc, SUN):
        etas = {name: -1j for name in axes} if eta is None else eta

        def f(coords: np.ndarray) -> complex:
            return symbol_at(rho, spec, _sun_point(desc, coords))

        val = _nested_stencil(f, tuple(multi_index), step)
        fac = 1.0 + 0.0j
        for name, m in zip(axes, multi_index):
            fac *= etas[name] ** m
        return complex(fac * val)

    if isinstance(desc, HW):
        etas = {"alpha": -1.0, "alpha_star": 1.0} if eta is None else eta
        p, q = multi_index

        # (d/d alpha-bar)^p (d/d alpha)^q through real (x, y) stencils:
        # d/da = (dx - i dy)/2, d/da-bar = (dx + i dy)/2.
        total = 0.0 + 0.0j
        for i in range(p + 1):
            for j in range(q + 1):
                cx = math.comb(p, i) * math.comb(q, j)
                phase = (1j) ** (p - i) * (-1j) ** (q - j)
                orders = (i + j, (p - i) + (q - j))

                def f(coords: np.ndarray) -> complex:
                    return symbol_at(rho, spec, HWPoint(complex(coords[0], coords[1])))

                total += cx * phase * _nested_stencil(f, orders, step)
        total /= 2.0 ** (p + q)
        return complex((etas["alpha"] ** p) * (etas["alpha_star"] ** q) * total)

    raise TypeError("moments are defined for single HW or SUN factors")


# ---------------------------------------------------------------------------
# autocorrelations and cross-correlations


def autocorrelation(
    rho: np.ndarray, desc: SystemDescriptor, axis: str, samples
) -> np.ndarray:
    """Weyl symbol of rho along a single parameter axis.

    SUN axes are the Euler angles (``phi1``, ``theta1``, ..., ``Phi1``, ...);
    HW axes are ``q`` and ``p`` (alpha = (chi_q + i chi_p)/sqrt(2)).
    """
    rho = np.asarray(rho, dtype=np.complex128)
    spec = KernelSpec(WEYL, desc)
    samples = np.asarray(samples, dtype=np.float64)
    out = np.empty(samples.shape, dtype=np.complex128)
    if isinstance(desc, HW):
        if axis not in ("q", "p"):
            raise ValueError("HW autocorrelation axis must be 'q' or 'p'")
        for i, s in enumerate(samples):
            a = s / math.sqrt(2.0) if axis == "q" else 1j * s / math.sqrt(2.0)
            out[i] = symbol_at(rho, spec, HWPoint(a))
        return out
    if isinstance(desc, SUN):
        axes = weyl_axes(desc)
        if axis not in axes:
            raise ValueError(f"axis {axis!r} not in {axes}")
        k = axes.index(axis)
        coords = np.zeros(len(axes))
        for i, s in enumerate(samples):
            coords[k] = s
            out[i] = symbol_at(rho, spec, _sun_point(desc, coords))
        return out
    raise TypeError("autocorrelation is defined for single HW or SUN factors")


@dataclass
class CrossCorrelation:
    value: complex
    raw_value: complex
    volume: float


def _shift_for_axis(ax: Axis, shift: PhasePoint, manifold: str, offset: int) -> float:
    if manifold == "HW_PLANE":
        a = shift.alpha
        return a.real if ax.name.endswith("re") else a.imag
    name = ax.name.split("_")[-1]
    if name.startswith("phi"):
        return shift.phi[int(name[3:]) - 1]
    if name.startswith("theta"):
        return shift.theta[int(name[5:]) - 1]
    if name.startswith("Phi"):
        return shift.Phi[int(name[3:]) - 1]
    raise ValueError(f"cannot shift axis {ax.name}")


def _shifted_grid(grid: QuadratureGrid, shift: PhasePoint) -> QuadratureGrid:
    """Same nodes and weights, coordinates offset by the shift (angles wrapped)."""
    def axis_shift(sub: QuadratureGrid, s: PhasePoint) -> list[Axis]:
        out = []
        for ax in sub.axes:
            delta = _shift_for_axis(ax, s, sub.manifold, 0)
            nodes = ax.nodes + delta
            if ax.kind == "uniform":
                span = ax.hi - ax.lo
                nodes = ax.lo + np.mod(nodes - ax.lo, span)
            out.append(Axis(ax.name, ax.lo, ax.hi, nodes, ax.weights, ax.generator_k, ax.kind))
        return out

    if grid.manifold == "PRODUCT":
        if not isinstance(shift, CompositePoint):
            raise TypeError("product grids shift by CompositePoint")
        new_axes = []
        new_factors = []
        for sub, s in zip(grid.factors, shift.points):
            sub_axes = axis_shift(sub, s)
            shifted_sub = QuadratureGrid(
                sub.system, sub.manifold, tuple(sub_axes), sub.normalization,
                sub.raw_volume, sub.exactness,
            )
            new_factors.append(shifted_sub)
            for ax in sub_axes:
                new_axes.append(
                    Axis(grid.axes[len(new_axes)].name, ax.lo, ax.hi, ax.nodes,
                         ax.weights, ax.generator_k, ax.kind)
                )
        return QuadratureGrid(
            grid.system, "PRODUCT", tuple(new_axes), grid.normalization,
            grid.raw_volume, grid.exactness, factors=tuple(new_factors),
        )
    axes = axis_shift(grid, shift)
    return QuadratureGrid(
        grid.system, grid.manifold, tuple(axes), grid.normalization,
        grid.raw_volume, grid.exactness,
    )


def phase_cross_correlation(f: PhaseFunction, shift: PhasePoint | None) -> CrossCorrelation:
    """(1/V) Int f(Omega + shift) f(Omega) dOmega, V = total normalized measure.

    The shifted values are evaluated exactly through the reconstructed
    operator on a coordinate-shifted copy of the grid (periodic angles
    wrapped into range).  The Weyl side conjugates the unshifted factor.
    ``shift=None`` means zero shift; there the Wigner value is
    purity / dimension for a density operator.  ``raw_value`` is the
    unnormalized integral.
    """
    if shift is None:
        f_shift = f
    else:
        A = reconstruct(f)
        shifted = _shifted_grid(f.grid, shift)
        f_shift = phase_function(
            A, KernelSpec(f.spec.side, f.spec.system, f.spec.rotation), shifted
        )
    w = f.grid.weights()
    second = f.values if f.spec.side == WIGNER else np.conj(f.values)
    raw = complex(np.sum(w * f_shift.values * second))
    V = float(np.sum(w))
    return CrossCorrelation(raw / V, raw, V)
