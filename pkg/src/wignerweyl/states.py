"""Reference state constructors for the supported systems."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import HW, SUN, Composite, SystemDescriptor, dimension, is_hermitian
from .rotations import arecchi_rotation


@dataclass(frozen=True)
class Fock:
    n: int


@dataclass(frozen=True)
class Coherent:
    alpha: complex


@dataclass(frozen=True)
class HWCat:
    """Equal-weight superposition of coherent components."""

    components: tuple[complex, ...]

    def __init__(self, components):
        object.__setattr__(self, "components", tuple(complex(c) for c in components))


@dataclass(frozen=True)
class SpinCoherent:
    phi: float
    theta: float


@dataclass(frozen=True)
class SpinCat:
    """Equal-weight superposition of spin-coherent components."""

    orientations: tuple[tuple[float, float], ...]

    def __init__(self, orientations):
        object.__setattr__(
            self, "orientations", tuple((float(p), float(t)) for p, t in orientations)
        )


@dataclass(frozen=True)
class GHZ:
    pass


@dataclass(frozen=True)
class Thermal:
    hamiltonian: np.ndarray
    beta: float

    def __post_init__(self):
        H = np.asarray(self.hamiltonian, dtype=np.complex128)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or not is_hermitian(H):
            raise ValueError("thermal state needs a square Hermitian Hamiltonian")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        object.__setattr__(self, "hamiltonian", H)


@dataclass(frozen=True)
class RandomDensity:
    seed: int


StateSpec = Fock | Coherent | HWCat | SpinCoherent | SpinCat | GHZ | Thermal | RandomDensity


def coherent_vector(n_max: int, alpha: complex) -> np.ndarray:
    """Closed-form truncated coherent amplitudes, renormalized on the cutoff."""
    alpha = complex(alpha)
    if alpha == 0:
        v = np.zeros(n_max, dtype=np.complex128)
        v[0] = 1.0
        return v
    n = np.arange(n_max)
    log_fact = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, n_max)))])
    amp = np.exp(n * math.log(abs(alpha)) - 0.5 * log_fact - 0.5 * abs(alpha) ** 2)
    v = amp * np.exp(1j * n * np.angle(alpha))
    return v / np.linalg.norm(v)


def state_vector(spec: StateSpec, desc: SystemDescriptor) -> np.ndarray:
    """Pure-state amplitudes for vector-valued specs."""
    if isinstance(spec, Fock):
        if not isinstance(desc, HW):
            raise TypeError("Fock states need an HW system")
        if not 0 <= spec.n < desc.n_max:
            raise ValueError(f"Fock level {spec.n} outside 0..{desc.n_max - 1}")
        v = np.zeros(desc.n_max, dtype=np.complex128)
        v[spec.n] = 1.0
        return v
    if isinstance(spec, Coherent):
        if not isinstance(desc, HW):
            raise TypeError("coherent states need an HW system")
        return coherent_vector(desc.n_max, spec.alpha)
    if isinstance(spec, HWCat):
        if not isinstance(desc, HW):
            raise TypeError("HW cats need an HW system")
        v = np.zeros(desc.n_max, dtype=np.complex128)
        for c in spec.components:
            v += coherent_vector(desc.n_max, c)
        return v / np.linalg.norm(v)
    if isinstance(spec, SpinCoherent):
        if not (isinstance(desc, SUN) and desc.N == 2):
            raise TypeError("spin-coherent states need a SUN(2, M) system")
        low = np.zeros(dimension(desc), dtype=np.complex128)
        low[-1] = 1.0
        return arecchi_rotation(desc, spec.phi, spec.theta) @ low
    if isinstance(spec, SpinCat):
        if not (isinstance(desc, SUN) and desc.N == 2):
            raise TypeError("spin cats need a SUN(2, M) system")
        low = np.zeros(dimension(desc), dtype=np.complex128)
        low[-1] = 1.0
        v = np.zeros_like(low)
        for p, t in spec.orientations:
            v += arecchi_rotation(desc, p, t) @ low
        return v / np.linalg.norm(v)
    if isinstance(spec, GHZ):
        if isinstance(desc, Composite) and all(
            isinstance(f, SUN) and f.N == 2 and f.M == 1 for f in desc.factors
        ):
            d = dimension(desc)
            v = np.zeros(d, dtype=np.complex128)
            v[0] = v[-1] = 1.0 / math.sqrt(2.0)
            return v
        if isinstance(desc, SUN) and desc.N == 2:
            # Dicke-space twin: (|j, j> + |j, -j>) / sqrt(2)
            d = dimension(desc)
            v = np.zeros(d, dtype=np.complex128)
            v[0] = v[-1] = 1.0 / math.sqrt(2.0)
            return v
        raise TypeError("GHZ states need qubit composites or a SUN(2, M) system")
    raise TypeError(f"{type(spec).__name__} has no pure-state vector")


def build_state(spec: StateSpec, desc: SystemDescriptor) -> np.ndarray:
    """Density matrix of the specified state on the described system."""
    if isinstance(spec, Thermal):
        d = dimension(desc)
        H = spec.hamiltonian
        if H.shape != (d, d):
            raise ValueError(f"Hamiltonian must be {d}x{d}")
        w, V = np.linalg.eigh(H)
        g = np.exp(-spec.beta * (w - w.min()))
        rho = (V * g[None, :]) @ V.conj().T
        return rho / np.trace(rho).real
    if isinstance(spec, RandomDensity):
        d = dimension(desc)
        rng = np.random.default_rng(spec.seed)
        G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        rho = G @ G.conj().T
        return rho / np.trace(rho).real
    v = state_vector(spec, desc)
    return np.outer(v, v.conj())


def parse_state(text: str, desc: SystemDescriptor) -> StateSpec:
    """Parse the CLI state grammar.

    ``fock:<n>``, ``coherent:<c>``, ``hwcat:<c1>|<c2>|...``,
    ``spincoherent:<phi>,<theta>``, ``spincat:<phi1>,<theta1>|...``,
    ``ghz``, ``random:<seed>``.  Complex numbers use Python literal syntax
    (e.g. ``-3``, ``1+2j``).
    """
    head, _, rest = text.strip().partition(":")
    try:
        if head == "fock":
            return Fock(int(rest))
        if head == "coherent":
            return Coherent(complex(rest))
        if head == "hwcat":
            return HWCat(tuple(complex(c) for c in rest.split("|")))
        if head == "spincoherent":
            p, t = rest.split(",")
            return SpinCoherent(float(p), float(t))
        if head == "spincat":
            pairs = []
            for item in rest.split("|"):
                p, t = item.split(",")
                pairs.append((float(p), float(t)))
            return SpinCat(tuple(pairs))
        if head == "ghz":
            return GHZ()
        if head == "random":
            return RandomDensity(int(rest) if rest else 0)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad state string {text!r}: {exc}") from None
    raise ValueError(f"unknown state kind {head!r}")
