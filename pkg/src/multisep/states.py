"""Multipartite pure states and density operators.

Index convention: a joint basis index is row-major over the parties with party
A (index 0) slowest-varying, i.e. ``amps.reshape(dims)[a, b, c, ...]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BadSubset, DimMismatch, DimOverflow, InvalidState, NotIsometry
from .numerics import DEFAULT_TOL, Tolerance, as_tol, check_finite, herm_eig, svd

MAX_DIM = 2**20


def check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise InvalidState("a state needs at least one party")
    if any(d < 1 for d in dims):
        raise InvalidState(f"party dimensions must be >= 1, got {dims}")
    if math.prod(dims) > MAX_DIM:
        raise DimOverflow(f"joint dimension {math.prod(dims)} exceeds {MAX_DIM}")
    return dims


def party_letter(i: int) -> str:
    return chr(ord("A") + i) if i < 26 else f"P{i}"


def party_index(token: str | int, n: int) -> int:
    """Accept ``'B'``, ``'b'`` or ``1`` for the second party."""
    if isinstance(token, str):
        t = token.strip()
        if t.isdigit():
            idx = int(t)
        elif len(t) == 1 and t.isalpha():
            idx = ord(t.upper()) - ord("A")
        else:
            raise BadSubset(f"cannot parse party {token!r}")
    else:
        idx = int(token)
    if not 0 <= idx < n:
        raise BadSubset(f"party {token!r} out of range for {n} parties")
    return idx


def _subset(parties: Iterable[int | str], n: int, proper: bool = True) -> tuple[int, ...]:
    s = tuple(sorted({party_index(p, n) for p in parties}))
    if not s:
        raise BadSubset("party subset must be nonempty")
    if proper and len(s) == n:
        raise BadSubset("party subset must be a proper subset")
    return s


@dataclass(frozen=True)
class Bipartition:
    """A cut of ``n`` parties into ``left | right``."""

    left: tuple[int, ...]
    n: int

    def __post_init__(self):
        left = _subset(self.left, self.n)
        object.__setattr__(self, "left", left)

    @property
    def right(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.left)

    @classmethod
    def parse(cls, text: str, n: int) -> "Bipartition":
        """Parse ``"A|BC"`` (letters) or ``"0|1,2"`` (indices)."""
        if "|" not in text:
            raise BadSubset(f"cut {text!r} must look like 'A|BC'")
        lhs, rhs = text.split("|", 1)

        def tokens(side: str) -> list[str]:
            side = side.strip()
            if "," in side or side.isdigit():
                return [t for t in side.split(",") if t.strip()]
            return list(side)

        left = {party_index(t, n) for t in tokens(lhs)}
        right = {party_index(t, n) for t in tokens(rhs)}
        if left & right or len(left | right) != n:
            raise BadSubset(f"cut {text!r} must split all {n} parties into two disjoint groups")
        return cls(tuple(sorted(left)), n)

    def label(self) -> str:
        return "".join(map(party_letter, self.left)) + "|" + "".join(map(party_letter, self.right))

    def __str__(self) -> str:
        return self.label()


def all_bipartitions(n: int) -> list[Bipartition]:
    """Nontrivial cuts up to complement: the left side always contains party A."""
    cuts = []
    for mask in range(1, 2**n - 1):
        if mask & 1:
            cuts.append(Bipartition(tuple(i for i in range(n) if mask >> i & 1), n))
    return cuts


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over ``dims`` (party A slowest)."""

    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        dims = check_dims(self.dims)
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != math.prod(dims):
            raise DimMismatch(f"{amps.size} amplitudes do not match dims {dims}")
        check_finite(amps, "amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > DEFAULT_TOL.eps:
            raise InvalidState(f"state norm {norm!r} differs from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_vector(cls, vec, dims: Sequence[int], normalize: bool = True) -> "PureState":
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if normalize:
            nrm = np.linalg.norm(vec)
            if nrm == 0.0:
                raise InvalidState("cannot normalize the zero vector")
            vec = vec / nrm
        return cls(tuple(dims), vec)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    @property
    def dim(self) -> int:
        return self.amps.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amps, self.amps.conj()), validate=False)

    def __repr__(self) -> str:
        return f"PureState(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator over ``dims``."""

    dims: tuple[int, ...]
    mat: np.ndarray
    validate: bool = True

    def __post_init__(self):
        dims = check_dims(self.dims)
        d = math.prod(dims)
        mat = np.array(self.mat, dtype=complex)
        if mat.shape != (d, d):
            raise DimMismatch(f"matrix shape {mat.shape} does not match dims {dims}")
        check_finite(mat, "density matrix")
        eps = DEFAULT_TOL.eps
        if self.validate:
            if np.abs(mat - mat.conj().T).max() > eps * max(1.0, np.linalg.norm(mat)):
                raise InvalidState("density matrix is not Hermitian")
            tr = np.trace(mat).real
            if abs(tr - 1.0) > eps:
                raise InvalidState(f"density matrix trace {tr!r} differs from 1")
            lam = herm_eig(mat)[0]
            if lam[0] < -eps:
                raise InvalidState(f"density matrix has eigenvalue {lam[0]:.3e} < 0")
        mat.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", mat)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims})"


State = PureState | DensityMatrix


def basis_state(dims: Sequence[int], index: Sequence[int]) -> PureState:
    t = np.zeros(tuple(dims), dtype=complex)
    t[tuple(index)] = 1.0
    return PureState(tuple(dims), t.reshape(-1))


def tensor_product(states: Sequence[PureState]) -> PureState:
    """Kronecker product of pure states; party lists are concatenated."""
    if not states:
        raise InvalidState("tensor_product needs at least one state")
    dims = check_dims(d for s in states for d in s.dims)
    amps = states[0].amps
    for s in states[1:]:
        amps = np.kron(amps, s.amps)
    return PureState.from_vector(amps, dims)


def density_tensor_product(rhos: Sequence[DensityMatrix]) -> DensityMatrix:
    dims = check_dims(d for r in rhos for d in r.dims)
    mat = rhos[0].mat
    for r in rhos[1:]:
        mat = np.kron(mat, r.mat)
    return DensityMatrix(dims, mat, validate=False)


def partial_trace(state: State, drop: Iterable[int | str]) -> DensityMatrix:
    """Trace out the parties in ``drop``; kept parties stay in their original order.

    Pure inputs are contracted directly on the amplitudes.
    """
    n = state.n
    drop = _subset(drop, n)
    keep = tuple(i for i in range(n) if i not in drop)
    kdims = tuple(state.dims[i] for i in keep)
    dk = math.prod(kdims)
    if isinstance(state, PureState):
        t = np.transpose(state.tensor, keep + drop).reshape(dk, -1)
        rho = t @ t.conj().T
    else:
        t = state.mat.reshape(state.dims + state.dims)
        m = n
        for p in sorted(drop, reverse=True):
            t = np.trace(t, axis1=p, axis2=p + m)
            m -= 1
        rho = t.reshape(dk, dk)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(kdims, rho, validate=False)


def transpose_parties(mat: np.ndarray, dims: Sequence[int], subset: Iterable[int]) -> np.ndarray:
    """Swap row/column indices of the parties in ``subset`` (no arithmetic, so exact)."""
    n = len(dims)
    t = np.asarray(mat).reshape(tuple(dims) * 2)
    axes = list(range(2 * n))
    for p in subset:
        axes[p], axes[p + n] = axes[p + n], axes[p]
    d = math.prod(dims)
    return np.ascontiguousarray(np.transpose(t, axes)).reshape(d, d)


def partial_transpose(rho: DensityMatrix, subset: Iterable[int | str]) -> np.ndarray:
    """Partial transpose on ``subset``:
    ``<i j| rho^{T_B} |k l> = <i l| rho |k j>`` for ``subset = {B}``.

    Returns a plain Hermitian matrix, which need not be positive.
    """
    s = _subset(subset, rho.n)
    return transpose_parties(rho.mat, rho.dims, s)


def regroup(state: State, groups: Sequence[Sequence[int]]) -> State:
    """Reorder and merge parties: ``groups=[[0, 2], [1]]`` gives a two-party
    state whose first party is A⊗C. Every party must appear exactly once."""
    order = [p for g in groups for p in g]
    if sorted(order) != list(range(state.n)):
        raise BadSubset(f"groups {groups} must partition parties 0..{state.n - 1}")
    new_dims = tuple(math.prod(state.dims[p] for p in g) for g in groups)
    if isinstance(state, PureState):
        amps = np.transpose(state.tensor, order).reshape(-1)
        return PureState(new_dims, amps)
    n = state.n
    t = state.mat.reshape(state.dims * 2)
    t = np.transpose(t, order + [p + n for p in order])
    d = state.dim
    return DensityMatrix(new_dims, t.reshape(d, d), validate=False)


def apply_local(psi: PureState, party: int | str, u: np.ndarray, tol: Tolerance | float | None = None) -> PureState:
    """Apply a unitary, or an isometry ``d' x d`` with orthonormal columns, to one party.

    An isometry enlarges that party's dimension to ``d'`` (ancilla append).
    """
    tol = as_tol(tol)
    k = party_index(party, psi.n)
    u = np.asarray(u, dtype=complex)
    d = psi.dims[k]
    if u.ndim != 2 or u.shape[1] != d or u.shape[0] < d:
        raise NotIsometry(f"operator of shape {u.shape} cannot act on a party of dimension {d}")
    check_finite(u, "local operator")
    dev = np.abs(u.conj().T @ u - np.eye(d)).max()
    if dev > tol.eps:
        raise NotIsometry(f"max |U^dag U - I| = {dev:.3e}")
    t = np.tensordot(u, psi.tensor, axes=([1], [k]))
    t = np.moveaxis(t, 0, k)
    dims = psi.dims[:k] + (u.shape[0],) + psi.dims[k + 1:]
    return PureState.from_vector(t.reshape(-1), dims)


def fidelity(rho: DensityMatrix, psi: PureState) -> float:
    """``<psi| rho |psi>``, clipped to [0, 1]."""
    if rho.dims != psi.dims:
        raise DimMismatch(f"dims {rho.dims} vs {psi.dims}")
    f = np.vdot(psi.amps, rho.mat @ psi.amps)
    return float(min(1.0, max(0.0, f.real)))


def state_fidelity(a: PureState, b: PureState) -> float:
    """``|<a|b>|^2`` for two pure states."""
    if a.dims != b.dims:
        raise DimMismatch(f"dims {a.dims} vs {b.dims}")
    return float(min(1.0, abs(np.vdot(a.amps, b.amps)) ** 2))


def shannon_entropy(probs: Iterable[float], eps: float = DEFAULT_TOL.eps) -> float:
    """Shannon entropy in bits, ignoring entries <= eps."""
    return float(-sum(p * math.log2(p) for p in probs if p > eps))


def von_neumann_entropy(rho: DensityMatrix, tol: Tolerance | float | None = None) -> float:
    """Entropy of the spectrum in bits. Eigenvalues in [-eps, 0) are treated as 0."""
    tol = as_tol(tol)
    lam = herm_eig(rho.mat, tol)[0]
    if lam[0] < -tol.eps:
        raise InvalidState(f"eigenvalue {lam[0]:.3e} below -eps")
    return max(0.0, shannon_entropy(lam, tol.eps))


def partial_entropy(
    psi: PureState, cut: Bipartition | str | Iterable[int | str], tol: Tolerance | float | None = None
) -> float:
    """Entanglement entropy ``S(Tr_right |psi><psi|)`` across ``cut`` in bits.

    ``cut`` is a :class:`Bipartition`, a label such as ``"A|BC"`` or the left parties."""
    if isinstance(cut, str) and "|" in cut:
        cut = Bipartition.parse(cut, psi.n)
    elif not isinstance(cut, Bipartition):
        cut = Bipartition(tuple(party_index(p, psi.n) for p in cut), psi.n)
    return von_neumann_entropy(partial_trace(psi, cut.right), tol)


def random_unit_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    """Complex-Gaussian vector normalized to 1 (unitarily invariant)."""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def is_product_vector(vec: np.ndarray, dims: Sequence[int], eps: float) -> bool:
    """True if ``vec`` has Schmidt rank 1 across every single-party cut."""
    t = np.asarray(vec).reshape(tuple(dims))
    nrm = np.linalg.norm(t)
    if nrm == 0.0:
        return False
    for k, d in enumerate(dims):
        m = np.moveaxis(t, k, 0).reshape(d, -1) / nrm
        s = svd(m)[1]
        if len(s) > 1 and s[1] > eps:
            return False
    return True


def product_factors(vec: np.ndarray, dims: Sequence[int]) -> list[np.ndarray]:
    """Best rank-1 factors (unit vectors) of ``vec``; the overall phase is put on the first factor."""
    t = np.asarray(vec, dtype=complex).reshape(tuple(dims))
    factors = []
    for k, d in enumerate(dims):
        m = np.moveaxis(t, k, 0).reshape(d, -1)
        factors.append(svd(m)[0][:, 0])
    prod = factors[0]
    for f in factors[1:]:
        prod = np.kron(prod, f)
    c = np.vdot(prod, t.reshape(-1))
    if abs(c) > 0:
        factors[0] = factors[0] * (c / abs(c))
    return factors
