"""Bipartite and n-party (generalized) Schmidt decompositions.

A state is Schmidt decomposable when it can be written as
``sum_i a_i |i_A>|i_B>...|i_N>`` with every party's ``|i_k>`` orthonormal.
:func:`gsd_detect` recognizes that form numerically; :func:`gsd_reconstruct`
and :func:`ghz_coefficient` consume a positive result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotDecomposable
from .numerics import Tolerance, as_tol, svd
from .states import Bipartition, PureState, party_index, product_factors, random_unit_vector, shannon_entropy

# minimum relative gap between contracted singular values before trusting the basis
SEPARATION = 1e-6


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """``psi = sum_i coeffs[i] |left_basis[:, i]> |right_basis[:, i]>`` across ``cut``."""

    cut: Bipartition
    dims: tuple[int, ...]
    coeffs: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def reconstruct(self) -> PureState:
        m = (self.left_basis * self.coeffs[None, :]) @ self.right_basis.T
        left, right = self.cut.left, self.cut.right
        t = m.reshape(tuple(self.dims[p] for p in left + right))
        t = np.transpose(t, np.argsort(left + right))
        return PureState.from_vector(t.reshape(-1), self.dims)


def _matricize(psi: PureState, left: Sequence[int]) -> np.ndarray:
    right = [p for p in range(psi.n) if p not in left]
    dl = math.prod(psi.dims[p] for p in left)
    return np.transpose(psi.tensor, list(left) + right).reshape(dl, -1)


def schmidt_decompose(psi: PureState, cut: Bipartition | str, tol: Tolerance | float | None = None) -> SchmidtForm:
    """Schmidt decomposition of ``psi`` across ``cut``.

    Coefficients are real, descending and larger than ``tol.eps``.
    """
    tol = as_tol(tol)
    if isinstance(cut, str):
        cut = Bipartition.parse(cut, psi.n)
    u, s, v = svd(_matricize(psi, cut.left))
    keep = s > tol.eps
    # psi = sum_k s_k u_k (x) conj(v_k)
    return SchmidtForm(cut, psi.dims, s[keep], u[:, keep], v[:, keep].conj())


@dataclass(frozen=True, eq=False)
class GSDResult:
    """Outcome of an n-party Schmidt decomposition attempt.

    When ``decomposable`` is true, ``bases[k][:, i]`` is party ``k``'s vector for
    term ``i`` and ``coeffs`` is descending. Otherwise ``evidence`` names the
    check that failed.
    """

    decomposable: bool
    dims: tuple[int, ...]
    coeffs: np.ndarray
    bases: tuple[np.ndarray, ...]
    residual: float
    attempts_used: int = 1
    evidence: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.dims)

    def to_record(self) -> dict:
        rec = {
            "decomposable": self.decomposable,
            "dims": list(self.dims),
            "coeffs": [float(c) for c in self.coeffs],
            "residual": float(self.residual) if math.isfinite(self.residual) else None,
            "attempts_used": self.attempts_used,
        }
        if self.evidence:
            rec["evidence"] = self.evidence
        return rec


def negative_result(dims: Sequence[int], attempts: int, evidence: dict) -> GSDResult:
    return GSDResult(False, tuple(dims), np.zeros(0), (), math.inf, attempts, evidence)


def _tensor_terms(coeffs: np.ndarray, bases: Sequence[np.ndarray]) -> np.ndarray:
    k = len(coeffs)
    out = np.zeros(math.prod(b.shape[0] for b in bases), dtype=complex)
    for i in range(k):
        v = np.array([coeffs[i]], dtype=complex)
        for b in bases:
            v = np.kron(v, b[:, i])
        out += v
    return out


def _orthonormalize(b: np.ndarray) -> np.ndarray:
    # closest matrix with orthonormal columns (polar factor), keeps column order
    w, _, vh = np.linalg.svd(b, full_matrices=False)
    return w @ vh


def fit_gsd(
    psi: PureState,
    bases: Sequence[np.ndarray],
    tol: Tolerance | float | None = None,
    attempts: int = 1,
    orthonormalize: bool = True,
) -> GSDResult:
    """Fit coefficients for candidate per-party vectors and measure the residual.

    Each term's coefficient is the projection ``<b_0 (x) ... (x) b_{n-1}|psi>``;
    its phase is absorbed into party A's vector, which is the least-squares
    per-index phase gauge. ``decomposable`` is set when the residual is at most
    ``10 * eps`` and every party's vectors are orthonormal within 1e-9.
    """
    tol = as_tol(tol)
    bases = [np.array(b, dtype=complex) for b in bases]
    if orthonormalize:
        bases = [_orthonormalize(b) for b in bases]
    k = bases[0].shape[1]
    coeffs = np.zeros(k)
    for i in range(k):
        v = np.ones(1, dtype=complex)
        for b in bases:
            v = np.kron(v, b[:, i])
        c = np.vdot(v, psi.amps)
        coeffs[i] = abs(c)
        if abs(c) > 0:
            bases[0][:, i] *= c / abs(c)
    keep = coeffs > tol.eps
    order = np.argsort(-coeffs[keep], kind="stable")
    coeffs = coeffs[keep][order]
    bases = [b[:, keep][:, order] for b in bases]
    residual = float(np.linalg.norm(psi.amps - _tensor_terms(coeffs, bases)))
    ortho = max((float(np.abs(b.conj().T @ b - np.eye(b.shape[1])).max()) for b in bases), default=0.0)
    ok = residual <= 10 * tol.eps and ortho <= 1e-9 and len(coeffs) > 0
    evidence = {} if ok else {"check": "residual", "residual": residual, "orthonormality": ortho}
    return GSDResult(ok, psi.dims, coeffs, tuple(bases), residual, attempts, evidence)


def _attempt(psi: PureState, rank: int, rng: np.random.Generator, tol: Tolerance) -> tuple[GSDResult | None, dict]:
    check = 1e3 * tol.eps
    t = psi.tensor
    # contract parties 3..n with random bras -> matrix on parties (1, 2)
    m = t
    for k in range(psi.n - 1, 1, -1):
        r = random_unit_vector(rng, psi.dims[k])
        m = np.tensordot(m, r.conj(), axes=([k], [0]))
    u, s, _ = svd(m)
    if len(s) < rank or s[rank - 1] <= SEPARATION * s[0]:
        return None, {"check": "degenerate-contraction", "singular_values": [float(x) for x in s]}
    gaps = s[: rank - 1] - s[1:rank]
    if rank > 1 and gaps.min() < SEPARATION * s[0]:
        return None, {"check": "degenerate-contraction", "min_gap": float(gaps.min() / s[0])}
    ub = u[:, :rank]
    rotated = np.tensordot(ub.conj().T, t, axes=([1], [0]))
    outside = math.sqrt(max(0.0, 1.0 - float(np.linalg.norm(rotated)) ** 2))
    if outside > check:
        return None, {"check": "diagonal-support", "weight_outside": outside}

    sub_dims = psi.dims[1:]
    factors = []
    for i in range(rank):
        phi = rotated[i]
        nrm = float(np.linalg.norm(phi))
        if nrm <= tol.eps:
            return None, {"check": "diagonal-support", "index": i, "norm": nrm}
        phi = phi / nrm
        for k in range(len(sub_dims)):
            sv = svd(np.moveaxis(phi, k, 0).reshape(sub_dims[k], -1))[1]
            if len(sv) > 1 and sv[1] > check:
                return None, {
                    "check": "conditional-factorization",
                    "index": i,
                    "party": k + 1,
                    "second_singular_value": float(sv[1]),
                }
        factors.append(product_factors(phi, sub_dims))

    flat = rotated.reshape(rank, -1)
    gram = flat.conj() @ flat.T
    off = float(np.abs(gram - np.diag(np.diag(gram))).max()) if rank > 1 else 0.0
    if off > check:
        return None, {"check": "cross-orthogonality", "max_overlap": off}
    bases = [ub]
    for k in range(len(sub_dims)):
        b = np.stack([factors[i][k] for i in range(rank)], axis=1)
        g = b.conj().T @ b
        dev = float(np.abs(g - np.eye(rank)).max())
        if dev > check:
            return None, {"check": "cross-orthogonality", "party": k + 1, "max_overlap": dev}
        bases.append(b)
    return fit_gsd(psi, bases, tol), {}


def gsd_detect(
    psi: PureState,
    tol: Tolerance | float | None = None,
    retries: int = 3,
    seed: int = 0,
) -> GSDResult:
    """Decide whether ``psi`` has an n-party Schmidt decomposition.

    For three or more parties, parties 3..n are contracted with random unit
    vectors; the left singular vectors of the resulting matrix give a candidate
    basis for party A that splits degenerate Schmidt coefficients (GHZ) with
    probability one. Conditional states of the other parties must then be
    products with mutually orthonormal factors. Failed attempts are retried with
    fresh random vectors ``retries`` times.

    Attempt ``j`` draws from ``numpy.random.PCG64`` seeded by
    ``SeedSequence(seed, spawn_key=(j,))``, so a fixed seed gives identical results.
    A negative answer carries ``evidence["check"]``, one of
    ``"conditional-factorization"``, ``"cross-orthogonality"``,
    ``"diagonal-support"``, ``"degenerate-contraction"`` or ``"residual"``.
    """
    tol = as_tol(tol)
    if psi.n == 1:
        return fit_gsd(psi, [psi.amps.reshape(-1, 1)], tol)
    if psi.n == 2:
        sf = schmidt_decompose(psi, Bipartition((0,), 2), tol)
        return fit_gsd(psi, [sf.left_basis, sf.right_basis], tol)

    a_coeffs = svd(_matricize(psi, [0]))[1]
    rank = int(np.sum(a_coeffs > tol.eps))
    history = []
    for attempt in range(1 + max(0, retries)):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(attempt,))))
        res, why = _attempt(psi, rank, rng, tol)
        if res is not None and res.decomposable:
            return GSDResult(True, res.dims, res.coeffs, res.bases, res.residual, attempt + 1, {})
        history.append(why if res is None else res.evidence)
    last = dict(history[-1])
    last["history"] = [h["check"] for h in history]
    return negative_result(psi.dims, len(history), last)


def gsd_reconstruct(g: GSDResult) -> PureState:
    """Rebuild the state ``sum_i a_i |i_A>...|i_N>`` from a positive result."""
    if not g.decomposable:
        raise NotDecomposable("cannot reconstruct from a non-decomposable result")
    return PureState.from_vector(_tensor_terms(g.coeffs, g.bases), g.dims)


def ghz_coefficient(g: GSDResult) -> float:
    """Number of GHZ states the decomposable state is asymptotically worth:
    the Shannon entropy (bits) of the squared Schmidt coefficients."""
    if not g.decomposable:
        raise NotDecomposable("GHZ coefficient is only defined for Schmidt-decomposable states")
    p = np.asarray(g.coeffs) ** 2
    return shannon_entropy(p / p.sum(), 0.0)


def one_party_entropies(psi: PureState, tol: Tolerance | float | None = None) -> list[float]:
    """Entropy of each single party's reduced state, in bits."""
    out = []
    for k in range(psi.n):
        s = svd(_matricize(psi, [party_index(k, psi.n)]))[1]
        out.append(shannon_entropy(s**2, as_tol(tol).eps))
    return out
