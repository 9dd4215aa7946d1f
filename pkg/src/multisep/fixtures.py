"""Canonical states and seeded random generators.

Random draws use ``numpy.random.PCG64`` seeded through ``SeedSequence(seed)``.
Independent substreams are obtained with ``SeedSequence(seed, spawn_key=(j,))``.
The stream is stable for a given numpy release line; tests only depend on it
through tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadSpec
from .numerics import svd
from .states import DensityMatrix, PureState, basis_state

FIXTURE_NAMES = ("epr", "ghz", "ncat", "w", "basis", "tiles", "random_pure", "random_gsd")


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(stream))))


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    n: int | None = None
    dims: tuple[int, ...] | None = None
    k: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.name not in FIXTURE_NAMES:
            raise BadSpec(f"unknown fixture {self.name!r}; choose from {', '.join(FIXTURE_NAMES)}")
        if self.dims is not None:
            object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
            if not self.dims or any(d < 1 for d in self.dims):
                raise BadSpec(f"invalid dims {self.dims}")
        if self.n is not None and self.n < 1:
            raise BadSpec(f"invalid party count {self.n}")


def epr() -> PureState:
    """Singlet (|01> - |10>)/sqrt(2)."""
    return PureState((2, 2), np.array([0, 1, -1, 0]) / math.sqrt(2))


def ncat(n: int) -> PureState:
    """(|0...0> + |1...1>)/sqrt(2) on ``n`` qubits."""
    if n < 1:
        raise BadSpec("n-cat needs n >= 1")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return PureState((2,) * n, amps)


def ghz() -> PureState:
    return ncat(3)


def w_state(n: int = 3) -> PureState:
    if n < 2:
        raise BadSpec("W state needs n >= 2")
    amps = np.zeros(2**n, dtype=complex)
    for k in range(n):
        amps[1 << k] = 1 / math.sqrt(n)
    return PureState((2,) * n, amps)


def tiles_vectors() -> list[np.ndarray]:
    """The five product vectors of the 3x3 'tiles' unextendible product basis."""
    e = np.eye(3)
    r2 = math.sqrt(2)
    return [
        np.kron(e[0], (e[0] - e[1]) / r2),
        np.kron((e[0] - e[1]) / r2, e[2]),
        np.kron(e[2], (e[1] - e[2]) / r2),
        np.kron((e[1] - e[2]) / r2, e[0]),
        np.kron(e.sum(0), e.sum(0)) / 3,
    ]


def tiles() -> DensityMatrix:
    """Bound entangled state (I - sum_k |u_k><u_k|)/4 on 3x3."""
    proj = sum(np.outer(u, u.conj()) for u in tiles_vectors())
    return DensityMatrix((3, 3), (np.eye(9) - proj) / 4)


def random_pure(dims: Sequence[int], seed: int = 0) -> PureState:
    rng = rng_for(seed)
    d = math.prod(dims)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState.from_vector(v, dims)


def random_orthonormal(rng: np.random.Generator, d: int, k: int) -> np.ndarray:
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    return svd(g)[0][:, :k]


def random_gsd_terms(dims: Sequence[int], k: int | None = None, seed: int = 0) -> tuple[np.ndarray, list[np.ndarray]]:
    """Coefficients and per-party orthonormal vectors of a random Schmidt-decomposable state.

    Squared coefficients are Dirichlet(1, ..., 1); party vectors are the left
    singular vectors of seeded complex-Gaussian matrices.
    """
    dims = tuple(dims)
    kmax = min(dims)
    k = kmax if k is None else k
    if not 1 <= k <= kmax:
        raise BadSpec(f"k={k} must lie in [1, {kmax}] for dims {dims}")
    rng = rng_for(seed)
    p = rng.dirichlet(np.ones(k))
    coeffs = np.sort(np.sqrt(p))[::-1]
    bases = [random_orthonormal(rng, d, k) for d in dims]
    return coeffs, bases


def random_gsd(dims: Sequence[int], k: int | None = None, seed: int = 0) -> PureState:
    coeffs, bases = random_gsd_terms(dims, k, seed)
    amps = np.zeros(math.prod(dims), dtype=complex)
    for i, a in enumerate(coeffs):
        v = np.array([a], dtype=complex)
        for b in bases:
            v = np.kron(v, b[:, i])
        amps += v
    return PureState.from_vector(amps, dims)


def make_fixture(spec: FixtureSpec | str, **params) -> PureState | DensityMatrix:
    """Build a named fixture, e.g. ``make_fixture("ncat", n=4)``."""
    if isinstance(spec, str):
        spec = FixtureSpec(spec, **params)
    name, n, dims = spec.name, spec.n, spec.dims
    if name == "epr":
        return epr()
    if name == "ghz":
        return ghz()
    if name == "ncat":
        return ncat(n if n is not None else 3)
    if name == "w":
        return w_state(n if n is not None else 3)
    if name == "tiles":
        return tiles()
    dims = dims if dims is not None else (2,) * (n if n is not None else 3)
    if n is not None and len(dims) != n:
        raise BadSpec(f"dims {dims} do not have n={n} entries")
    if name == "basis":
        return basis_state(dims, (0,) * len(dims))
    if name == "random_pure":
        return random_pure(dims, spec.seed)
    return random_gsd(dims, spec.k, spec.seed)
