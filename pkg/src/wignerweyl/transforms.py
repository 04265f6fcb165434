"""Invertible phase-space transforms, star products, and dynamics.

The forward map sends an operator to its symbol on a grid; reconstruction
inverts it through the dual kernel (the kernel itself on the Wigner side,
the adjoint displacement on the Weyl side).  On grids whose quadrature is
exact for the relevant representation frequencies, forward-then-back is
exact to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import HW, SUN, Composite, SystemDescriptor, dimension, format_system
from .kernels import WEYL, WIGNER, KernelSpec, kernel_at, kernel_stack, wigner_kernel_at
from .measures import QuadratureGrid, cp_grid, hw_grid, product_grid, sun_grid
from .points import CompositePoint, CPPoint, EulerPoint, HWPoint, PhasePoint
from .rotations import euler_angle_count, euler_rotation


@dataclass
class PhaseFunction:
    """Symbol values of an operator on the nodes of a quadrature grid."""

    spec: KernelSpec
    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid with "
                f"{self.grid.n_nodes} nodes"
            )

    def integral(self) -> complex:
        """The measure integral of the symbol (trace of the operator)."""
        return complex(np.dot(self.grid.weights(), self.values))


def phase_function(A: np.ndarray, spec: KernelSpec, grid: QuadratureGrid) -> PhaseFunction:
    """Forward transform: values Tr[A K(node)] on every grid node."""
    A = np.asarray(A, dtype=np.complex128)
    d = dimension(spec.system)
    if A.shape != (d, d):
        raise ValueError(f"operator must be {d}x{d} for {spec.system}, got {A.shape}")
    K = kernel_stack(spec, grid)
    vals = np.einsum("nij,ji->n", K, A, optimize=True)
    return PhaseFunction(spec, grid, vals)


def symbol_at(A: np.ndarray, spec: KernelSpec, point: PhasePoint) -> complex:
    """Forward transform at a single explicit point (no grid)."""
    return complex(np.trace(np.asarray(A, dtype=np.complex128) @ kernel_at(spec, point)))


def reconstruct(f: PhaseFunction) -> np.ndarray:
    """Inverse transform: operator from its symbol by dual-kernel quadrature."""
    K = kernel_stack(f.spec, f.grid)
    wv = f.grid.weights() * f.values
    if f.spec.side == WIGNER:
        return np.einsum("n,nij->ij", wv, K, optimize=True)
    # Weyl side reconstructs through the adjoint displacement
    return np.einsum("n,nji->ij", wv, np.conj(K), optimize=True)


def grid_roundtrip_residual(spec: KernelSpec, grid: QuadratureGrid, seed: int = 0) -> float:
    """Forward-then-back error on a seeded random Hermitian probe.

    A large value flags an under-resolved grid for this kernel family.
    """
    d = dimension(spec.system)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    probe = (g + g.conj().T) / 2.0
    back = reconstruct(phase_function(probe, spec, grid))
    return float(np.max(np.abs(back - probe)))


def generalized_fourier(
    f: PhaseFunction, target_spec: KernelSpec, target_grid: QuadratureGrid
) -> PhaseFunction:
    """Bridge between symbol families of the same system.

    Target values are sum_s w_s f_s Tr[K_target(t) K_source^dagger(s)];
    evaluated in the factorized form Tr[K_target(t) . reconstruct(f)], which
    is the same double sum reassociated.
    """
    if target_spec.system != f.spec.system:
        raise ValueError("generalized_fourier bridges symbol families of one system")
    A = reconstruct(f)
    return phase_function(A, target_spec, target_grid)


def overlap(fA: PhaseFunction, fB: PhaseFunction) -> complex:
    """Trace pairing from symbols on a shared grid.

    Wigner side: sum w a b = Tr[AB] (self-dual kernel).  Weyl side the dual
    enters through conjugation: sum w a conj(b) = Tr[A B^dagger].
    """
    _require_same_frame(fA, fB)
    w = fA.grid.weights()
    if fA.spec.side == WIGNER:
        return complex(np.sum(w * fA.values * fB.values))
    return complex(np.sum(w * fA.values * np.conj(fB.values)))


def _require_same_frame(fA: PhaseFunction, fB: PhaseFunction) -> None:
    if fA.grid is not fB.grid or fA.spec != fB.spec:
        raise ValueError("phase functions must share one grid and kernel spec")


MAX_LITERAL_NODES = 2000


def star_product(fA: PhaseFunction, fB: PhaseFunction, method: str = "fast") -> PhaseFunction:
    """Symbol of the operator product.

    ``method="fast"`` reconstructs both operators, multiplies, and transforms
    back.  ``method="literal"`` evaluates the triple-kernel quadrature
    sum_{s,r} w_s w_r fA(s) fB(r) Tr[K(t) K(s)^dagger K(r)^dagger] node by
    node as an independent cross-check (small grids only); the two must agree
    to the grid's exactness.
    """
    _require_same_frame(fA, fB)
    if method == "fast":
        A = reconstruct(fA)
        B = reconstruct(fB)
        return phase_function(A @ B, fA.spec, fA.grid)
    if method != "literal":
        raise ValueError(f"unknown star-product method {method!r}")
    grid = fA.grid
    n = grid.n_nodes
    if n > MAX_LITERAL_NODES:
        raise OverflowError(
            f"literal star product on {n} nodes is out of desk scale; use method='fast'"
        )
    K = kernel_stack(fA.spec, grid)
    w = grid.weights()
    if fA.spec.side == WIGNER:
        dual = K
    else:
        dual = np.conj(np.swapaxes(K, 1, 2))
    a = w * fA.values
    b = w * fB.values
    # literal triple trace, pair products first: (s, r) -> K_s^dual K_r^dual
    pair = np.einsum("sij,rjk->srik", dual, dual, optimize=True)
    vals = np.einsum("tij,srji,s,r->t", K, pair, a, b, optimize=True)
    return PhaseFunction(fA.spec, grid, vals)


def moyal_bracket(fA: PhaseFunction, fB: PhaseFunction, method: str = "fast") -> PhaseFunction:
    """Symbol of the commutator: fA * fB - fB * fA."""
    ab = star_product(fA, fB, method)
    ba = star_product(fB, fA, method)
    return PhaseFunction(fA.spec, fA.grid, ab.values - ba.values)


@dataclass
class EvolveResult:
    times: np.ndarray
    frames: list[np.ndarray]
    final: PhaseFunction
    trace_drift: float
    purity_drift: float


def evolve(
    f_rho: PhaseFunction,
    f_H: PhaseFunction,
    t_final: float,
    dt: float,
    n_frames: int = 0,
    drift_tol: float = 1e-6,
) -> EvolveResult:
    """Fixed-step RK4 integration of d(values)/dt = -i {{W_H, W_rho}}.

    The bracket is evaluated through the reconstructed operators (hbar = 1).
    Trace drift beyond ``drift_tol`` aborts with a step-size diagnostic.
    """
    _require_same_frame(f_rho, f_H)
    if dt <= 0 or t_final < 0:
        raise ValueError("need dt > 0 and t_final >= 0")
    spec, grid = f_rho.spec, f_rho.grid
    w = grid.weights()
    Hop = reconstruct(f_H)
    K = kernel_stack(spec, grid)
    dual_side = spec.side == WIGNER

    def rhs(vals: np.ndarray) -> np.ndarray:
        wv = w * vals
        if dual_side:
            R = np.einsum("n,nij->ij", wv, K, optimize=True)
        else:
            R = np.einsum("n,nji->ij", wv, np.conj(K), optimize=True)
        C = -1j * (Hop @ R - R @ Hop)
        return np.einsum("nij,ji->n", K, C, optimize=True)

    n_steps = int(round(t_final / dt))
    if abs(n_steps * dt - t_final) > 1e-12 * max(1.0, t_final):
        n_steps = int(math.ceil(t_final / dt))
    v = f_rho.values.copy()
    trace0 = complex(np.dot(w, v))
    purity0 = complex(np.sum(w * v * (v if dual_side else np.conj(v))))
    frame_every = max(1, n_steps // n_frames) if n_frames else n_steps + 1
    times = [0.0]
    frames = [v.copy()]
    for s in range(1, n_steps + 1):
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * dt * k1)
        k3 = rhs(v + 0.5 * dt * k2)
        k4 = rhs(v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(complex(np.dot(w, v)) - trace0)
        if drift > drift_tol:
            raise RuntimeError(
                f"trace drift {drift:.3e} at step {s} exceeds {drift_tol:.1e}; reduce dt"
            )
        if s % frame_every == 0 or s == n_steps:
            times.append(s * dt)
            frames.append(v.copy())
    purity1 = complex(np.sum(w * v * (v if dual_side else np.conj(v))))
    trace_drift = abs(complex(np.dot(w, v)) - trace0)
    purity_drift = abs(purity1 - purity0)
    return EvolveResult(
        np.asarray(times), frames, PhaseFunction(spec, grid, v), trace_drift, purity_drift
    )


# ---------------------------------------------------------------------------
# Stratonovich-Weyl verification


@dataclass
class ConditionReport:
    name: str
    residual: float
    tolerance: float

    def __post_init__(self):
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tolerance)


@dataclass
class VerifyReport:
    system: SystemDescriptor
    side: str
    rotation: str
    conditions: list[ConditionReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def as_dict(self) -> dict:
        return {
            "system": format_system(self.system),
            "side": self.side,
            "rotation": self.rotation,
            "passed": self.passed,
            "conditions": [
                {
                    "name": c.name,
                    "residual": c.residual,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                }
                for c in self.conditions
            ],
        }


def default_grid(desc: SystemDescriptor, side: str, resolution: int | None = None,
                 radius: float | None = None) -> QuadratureGrid:
    """The natural grid for a kernel family at default exactness."""
    if isinstance(desc, HW):
        # Kernel elements oscillate at up to 2 sqrt(n_max) rad/unit on the
        # Weyl side and twice that on the Wigner side (the displaced parity
        # lives on 2 alpha), and extend out to 2 sqrt(n_max) / sqrt(n_max)
        # respectively.  Quadrature integrands are products of two such
        # elements, doubling the band; node counts carry a 2.1x margin over
        # nu L / pi on that doubled band (the empirical convergence knee
        # sits near 1.9x).  The Gaussian envelope contributes an n-independent
        # band on top (about 22 / 11 nodes per unit radius), which dominates
        # below n_max ~ 16; without that floor small systems stall near 1e-7.
        root = math.sqrt(desc.n_max)
        if side == WIGNER:
            r = radius if radius is not None else root + 3.0
            res = resolution if resolution is not None else max(
                60, int(math.ceil(max(5.35 * root, 22.0) * r))
            )
        else:
            r = radius if radius is not None else 2.0 * root + 3.0
            res = resolution if resolution is not None else max(
                60, int(math.ceil(max(2.68 * root, 11.0) * r))
            )
        return hw_grid(desc, r, res)
    if isinstance(desc, SUN):
        if side == WIGNER:
            return cp_grid(desc, resolution)
        return sun_grid(desc, resolution)
    return product_grid(tuple(default_grid(f, side, resolution, radius) for f in desc.factors))


def _random_hermitian(d: int, rng) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2.0


def _compose_cp_point(desc: SUN, v: EulerPoint, omega: CPPoint) -> CPPoint:
    """CP coordinates of U(v) U(omega) acting on the lowest-weight state.

    Works through the defining representation: the coherent-state orbit
    coordinates are read off from the rotated last basis column.
    """
    fund = SUN(desc.N, 1)
    n_pairs, _ = euler_angle_count(desc.N)
    omega_full = EulerPoint(
        tuple(omega.phi) + (0.0,) * (n_pairs - len(omega.phi)),
        tuple(omega.theta) + (0.0,) * (n_pairs - len(omega.theta)),
        (0.0,) * (desc.N - 1),
    )
    G = euler_rotation(fund, v) @ euler_rotation(fund, omega_full)
    psi = G[:, -1]
    if desc.N == 2:
        theta = math.atan2(abs(psi[0]), abs(psi[1]))
        phi = 0.5 * (math.atan2(psi[0].imag, psi[0].real) - math.atan2(psi[1].imag, psi[1].real))
        return CPPoint((phi,), (theta,))
    if desc.N == 3:
        chi = psi * np.exp(-1j * np.angle(psi[2]))
        theta2 = math.atan2(math.hypot(abs(chi[0]), abs(chi[1])), chi[2].real)
        theta1 = math.atan2(abs(chi[1]), abs(chi[0]))
        a1 = np.angle(chi[0])
        a2 = np.angle(-chi[1])
        return CPPoint((0.5 * (a1 - a2), 0.5 * (a1 + a2)), (theta1, theta2))
    raise NotImplementedError("covariance composition implemented for N = 2, 3")


def verify_stratonovich(
    desc: SystemDescriptor,
    side: str,
    grid: QuadratureGrid | None = None,
    rotation: str = "euler",
    seed: int = 0,
    tolerance: float | None = None,
) -> VerifyReport:
    """Residuals for the Stratonovich-Weyl conditions of a kernel family.

    Wigner side: linear invertibility, reality, standardization (kernel
    normalization and symbol integral), traciality, and covariance (SUN with
    N <= 3 and HW).  Weyl side: completeness round trip and the value of the
    symbol at the origin.  Compact systems default to tolerance 1e-10; HW
    carries truncation error and defaults to 1e-4.
    """
    spec = KernelSpec(side, desc, rotation)
    if grid is None:
        # the arecchi family is parameterized by the two sphere angles, so
        # its natural measure is the CP grid, not the full group manifold
        grid = cp_grid(desc) if rotation == "arecchi" else default_grid(desc, side)
    has_hw = isinstance(desc, HW) or (
        isinstance(desc, Composite) and any(isinstance(f, HW) for f in desc.factors)
    )
    tol = tolerance if tolerance is not None else (1e-4 if has_hw else 1e-10)
    rng = np.random.default_rng(seed)
    d = dimension(desc)
    report = VerifyReport(desc, side, rotation)
    K = kernel_stack(spec, grid)
    w = grid.weights()

    probes = [_random_hermitian(d, rng) for _ in range(2)]

    # invertibility / completeness
    err = 0.0
    for A in probes:
        back = reconstruct(phase_function(A, spec, grid))
        err = max(err, float(np.max(np.abs(back - A))))
    name = "completeness" if side == WEYL else "linear_invertibility"
    report.conditions.append(ConditionReport(name, err, tol))

    if side == WIGNER:
        # reality of Hermitian symbols
        err = max(float(np.max(np.abs(phase_function(A, spec, grid).values.imag))) for A in probes)
        report.conditions.append(ConditionReport("reality", err, tol))
        # standardization: kernel normalization and symbol integral
        ksum = np.einsum("n,nij->ij", w, K, optimize=True)
        err = float(np.max(np.abs(ksum - np.eye(d))))
        report.conditions.append(ConditionReport("kernel_normalization", err, tol))
        err = max(
            abs(phase_function(A, spec, grid).integral() - np.trace(A)) for A in probes
        )
        report.conditions.append(ConditionReport("standardization", err, tol))
        # traciality
        fA = phase_function(probes[0], spec, grid)
        fB = phase_function(probes[1], spec, grid)
        err = abs(overlap(fA, fB) - np.trace(probes[0] @ probes[1]))
        report.conditions.append(ConditionReport("traciality", err, tol))
        # covariance
        cov = _covariance_residual(desc, spec, rng)
        if cov is not None:
            report.conditions.append(ConditionReport("covariance", cov, tol))
    else:
        # standardization at the origin
        if rotation == "arecchi":
            origin = CPPoint((0.0,) * (desc.N - 1), (0.0,) * (desc.N - 1))
        else:
            origin = _origin_point(desc)
        err = 0.0
        for A in probes:
            err = max(err, abs(symbol_at(A, spec, origin) - np.trace(A)))
        report.conditions.append(ConditionReport("origin_trace", err, tol))
    return report


def _origin_point(desc: SystemDescriptor) -> PhasePoint:
    if isinstance(desc, HW):
        return HWPoint(0.0 + 0.0j)
    if isinstance(desc, SUN):
        n_pairs, n_cartan = euler_angle_count(desc.N)
        return EulerPoint((0.0,) * n_pairs, (0.0,) * n_pairs, (0.0,) * n_cartan)
    return CompositePoint(tuple(_origin_point(f) for f in desc.factors))


def _covariance_residual(desc: SystemDescriptor, spec: KernelSpec, rng) -> float | None:
    """max |V K(Omega) V^dagger - K(Omega')| over random rotations, or None."""
    if isinstance(desc, HW):
        # Kernel-level covariance cannot hold entrywise near the Fock cutoff
        # (the group action leaks out of the truncated block), so the check
        # is made at the symbol level: W_{V rho V^dag}(a) = W_rho(a - b) for
        # probes concentrated well below the cutoff and modest shifts b.
        from .kernels import hw_weyl_kernel

        q = max(2, desc.n_max // 4)
        low = np.zeros((desc.n_max, desc.n_max), dtype=np.complex128)
        low[:q, :q] = _random_hermitian(q, rng)
        err = 0.0
        for _ in range(3):
            a = complex(*(0.8 * rng.standard_normal(2)))
            b = complex(*rng.uniform(0.2, 0.6, 2))
            V = hw_weyl_kernel(desc.n_max, b)
            lhs = symbol_at(V @ low @ V.conj().T, spec, HWPoint(a))
            rhs = symbol_at(low, spec, HWPoint(a - b))
            err = max(err, abs(lhs - rhs))
        return err
    if isinstance(desc, SUN) and (desc.N == 2 or (desc.N == 3 and spec.rotation == "euler")):
        if desc.N == 3 and desc.M > 1:
            return None
        n_pairs, n_cartan = euler_angle_count(desc.N)
        err = 0.0
        for _ in range(3):
            v = EulerPoint(
                tuple(rng.uniform(0, 2 * math.pi, n_pairs)),
                tuple(rng.uniform(0, 0.5 * math.pi, n_pairs)),
                tuple(rng.uniform(0, 2 * math.pi, n_cartan)),
            )
            omega = CPPoint(
                tuple(rng.uniform(0, 2 * math.pi, desc.N - 1)),
                tuple(rng.uniform(0.1, 0.5 * math.pi - 0.1, desc.N - 1)),
            )
            V = euler_rotation(desc, v)
            K1 = V @ wigner_kernel_at(desc, omega) @ V.conj().T
            K2 = wigner_kernel_at(desc, _compose_cp_point(desc, v, omega))
            err = max(err, float(np.max(np.abs(K1 - K2))))
        return err
    return None
