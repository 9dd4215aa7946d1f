"""Executable two-dimensional projection argument.

Given a three-party pure state and a product ensemble ``{p_i, |psi_i^B phi_i^C>}``
for its BC marginal, Alice can steer to

    |Psi~> = sum_i sqrt(p_i) |i_A> |psi_i^B> |phi_i^C>.

Projecting Alice onto ``span{|i>, |j>}`` leaves a two-term state whose AB
partial transpose has the principal minor ``-|q_i q_j gamma beta|^2``. PPT of
the AB marginal forces ``gamma = 0`` (C factors orthogonal) or ``beta = 0``
(B factors equal); repeating with B and C exchanged and using linear
independence of the members leaves mutual orthogonality on both sides, i.e.
an n-party Schmidt decomposition. This module computes every quantity in that
chain and turns the outcome into a certificate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadSubset, EnsembleMismatch, InvariantFailure, ZeroBranch
from .numerics import Tolerance, as_tol, herm_eig, null_space, svd
from .purification import Ensemble, ensemble_mismatch, ensemble_reduce, hjw_steering
from .schmidt import GSDResult, fit_gsd, negative_result
from .separability import eigen_product_ensemble, ppt_report
from .states import DensityMatrix, PureState, apply_local, partial_trace, product_factors, regroup, transpose_parties

# below this distance two B (or C) factors are treated as identical
PARALLEL_EPS = 1e-10


def lift_ensemble(psi: PureState, e: Ensemble, tol: Tolerance | float | None = None) -> PureState:
    """Steer party A of ``psi`` so the state reads ``sum_i sqrt(p_i) |i> |e_i>``.

    ``e`` must realize ``Tr_A |psi><psi|`` within 1e-8. Party A of the result
    has dimension ``len(e)``.
    """
    tol = as_tol(tol)
    if psi.n < 2:
        raise BadSubset("lifting needs at least two parties")
    iso = hjw_steering(psi, e, purifier=0, tol=tol)
    lifted = apply_local(psi, 0, iso, tol=1e-8)
    m = len(e)
    t = lifted.tensor
    if t.shape[0] > m:
        spill = float(np.linalg.norm(t[m:]))
        if spill > 1e-9:
            raise EnsembleMismatch(f"steered state leaks {spill:.3e} outside the ensemble index range")
        t = t[:m]
    out = PureState.from_vector(t.reshape(-1), (m,) + psi.dims[1:])
    dev = float(np.abs(partial_trace(out, [0]).mat - partial_trace(psi, [0]).mat).max())
    if dev > 1e-9:
        raise EnsembleMismatch(f"lifted state changes the BC marginal by {dev:.3e}")
    return out


@dataclass(frozen=True, eq=False)
class PairState:
    """Two-term state ``q_i |i psi_i phi_i> + q_j |j> (alpha|i_B> + beta|j_B>)(gamma|i_C> + delta|j_C>)``."""

    i: int
    j: int
    prob: float
    state: PureState
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    q_i: float
    q_j: float


def _split(vec: np.ndarray, db: int, dc: int, check: float, idx: int) -> tuple[np.ndarray, np.ndarray]:
    u, s, v = svd(vec.reshape(db, dc))
    if len(s) > 1 and s[1] > check * s[0]:
        raise InvariantFailure(f"conditional state {idx} is not a product vector (sigma_2 = {s[1]:.3e})")
    return u[:, 0], v[:, 0].conj()


def _two_basis(first: np.ndarray, second: np.ndarray) -> tuple[complex, complex, np.ndarray]:
    """Coordinates ``(a, b)`` of ``second`` in ``{first, e}`` with ``e`` the Gram-Schmidt partner."""
    a = complex(np.vdot(first, second))
    rem = second - a * first
    b = float(np.linalg.norm(rem))
    if b <= PARALLEL_EPS:
        a = a / abs(a)
        comp = null_space(first.reshape(-1, 1), len(first))
        partner = comp[:, 0] if comp.shape[1] else np.zeros_like(first)
        return a, 0.0, partner
    return a, b, rem / b


def project_pair(psi_tilde: PureState, i: int, j: int, tol: Tolerance | float | None = None) -> PairState:
    """Project Alice onto ``span{|i>, |j>}`` and express the result in the
    two-dimensional bases built from the members' B and C factors.

    Raises
    ------
    ZeroBranch
        If either member has (near) zero weight.
    InvariantFailure
        If a conditional state on BC is not a product vector.
    """
    tol = as_tol(tol)
    if psi_tilde.n != 3:
        raise BadSubset(f"pair projection needs three parties, got {psi_tilde.n}")
    m, db, dc = psi_tilde.dims
    if i == j or not (0 <= i < m and 0 <= j < m):
        raise BadSubset(f"invalid pair ({i}, {j}) for an index party of dimension {m}")
    t = psi_tilde.tensor
    vi, vj = t[i].reshape(-1), t[j].reshape(-1)
    pi, pj = float(np.vdot(vi, vi).real), float(np.vdot(vj, vj).real)
    if pi <= tol.eps or pj <= tol.eps:
        raise ZeroBranch(f"pair ({i}, {j}) has weights {pi:.3e}, {pj:.3e}")
    check = 1e3 * tol.eps
    bi, ci = _split(vi / math.sqrt(pi), db, dc, check, i)
    bj, cj = _split(vj / math.sqrt(pj), db, dc, check, j)
    alpha, beta, _ = _two_basis(bi, bj)
    gamma, delta, _ = _two_basis(ci, cj)
    prob = pi + pj
    qi, qj = math.sqrt(pi / prob), math.sqrt(pj / prob)
    amps = np.concatenate([qi * np.kron(bi, ci), qj * np.kron(bj, cj)])
    state = PureState.from_vector(amps, (2, db, dc))
    return PairState(i, j, prob, state, alpha, complex(beta), gamma, complex(delta), qi, qj)


def pair_partial_transpose(p: PairState) -> np.ndarray:
    """``(rho_ij^AB)^{T_B}`` in the basis ``|i_A i_B>, |i_A j_B>, |j_A i_B>, |j_A j_B>``."""
    t = np.zeros((2, 2, 2), dtype=complex)
    t[0, 0, 0] = p.q_i
    t[1] = p.q_j * np.outer([p.alpha, p.beta], [p.gamma, p.delta])
    m = t.reshape(4, 2)
    return transpose_parties(m @ m.conj().T, (2, 2), [1])


class Branch(str, enum.Enum):
    C_ORTHOGONAL = "C_ORTHOGONAL"
    B_EQUAL = "B_EQUAL"
    BOTH = "BOTH"
    VIOLATION = "VIOLATION"


@dataclass(frozen=True)
class BranchLabel:
    """Outcome of the minor test for one pair.

    ``BOTH`` means the pair is mutually orthogonal on B and on C;
    ``C_ORTHOGONAL`` only on C; ``B_EQUAL`` means the B factors coincide.
    """

    kind: Branch
    minor_value: float

    def __str__(self) -> str:
        return self.kind.value


def pair_pt_condition(p: PairState, tol: Tolerance | float | None = None) -> BranchLabel:
    """Evaluate the 2x2 principal minor ``det[[0, q_i q_j g* b*], [q_i q_j g b, q_j^2 |a|^2]]``
    of the pair's partial transpose and name the branch that satisfies it."""
    tol = as_tol(tol)
    pt = pair_partial_transpose(p)
    minor = float((pt[1, 1] * pt[2, 2] - pt[1, 2] * pt[2, 1]).real)
    if minor < -tol.eps:
        return BranchLabel(Branch.VIOLATION, minor)
    if abs(p.beta) <= abs(p.gamma):
        return BranchLabel(Branch.B_EQUAL, minor)
    if abs(p.alpha) <= tol.eps:
        return BranchLabel(Branch.BOTH, minor)
    return BranchLabel(Branch.C_ORTHOGONAL, minor)


def branch_matrix(psi_tilde: PureState, tol: Tolerance | float | None = None) -> list[list[BranchLabel | None]]:
    """Branch label for every pair ``i < j`` (``None`` on and below the diagonal)."""
    m = psi_tilde.dims[0]
    out: list[list[BranchLabel | None]] = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            out[i][j] = pair_pt_condition(project_pair(psi_tilde, i, j, tol), tol)
    return out


def _labels(mat: Sequence[Sequence[BranchLabel | None]]) -> list[list[str | None]]:
    return [[None if x is None else x.kind.value for x in row] for row in mat]


def _minors(mat: Sequence[Sequence[BranchLabel | None]]) -> list[list[float | None]]:
    return [[None if x is None else x.minor_value for x in row] for row in mat]


@dataclass(frozen=True, eq=False)
class TripartiteCertificate:
    certified: bool
    gsd: GSDResult
    branches_ab: list = field(default_factory=list)
    branches_ac: list = field(default_factory=list)
    offending_pair: tuple[int, int] | None = None
    reason: str = ""
    detail: str = ""
    ppt_ab_min: float = math.nan
    ppt_ac_min: float = math.nan
    ensemble_size: int = 0

    def to_record(self) -> dict:
        return {
            "certified": self.certified,
            "reason": self.reason,
            "detail": self.detail,
            "ensemble_size": self.ensemble_size,
            "branches_ab": _labels(self.branches_ab),
            "branches_ac": _labels(self.branches_ac),
            "minors_ab": _minors(self.branches_ab),
            "minors_ac": _minors(self.branches_ac),
            "offending_pair": list(self.offending_pair) if self.offending_pair else None,
            "ppt_min_eigenvalue": {"AB": self.ppt_ab_min, "AC": self.ppt_ac_min},
            "gsd": self.gsd.to_record(),
        }


def _contracted_a_vectors(psi: PureState, e: Ensemble) -> np.ndarray:
    vecs = e.vectors()
    mat = psi.amps.reshape(psi.dims[0], -1)
    a = mat @ vecs.conj()
    return a / np.linalg.norm(a, axis=0, keepdims=True)


def _eigen_ensemble(rho: DensityMatrix, tol: Tolerance) -> Ensemble:
    # spectral ensemble on the joint space, used when no product ensemble exists
    lam, v = herm_eig(rho.mat, tol)
    keep = np.flatnonzero(lam > tol.eps)[::-1]
    probs = lam[keep] / lam[keep].sum()
    return Ensemble.from_terms((rho.dim,), probs, [[v[:, k]] for k in keep])


def _member_factors(e: Ensemble, db: int, dc: int) -> list[tuple[np.ndarray, np.ndarray]]:
    if e.n == 2:
        return [(m.factors[0], m.factors[1]) for m in e.members]
    return [tuple(product_factors(m.vector, (db, dc))) for m in e.members]


def orthogonality_certificate(
    psi: PureState,
    e: Ensemble | None = None,
    tol: Tolerance | float | None = None,
    seed: int = 0,
) -> TripartiteCertificate:
    """Certify an n-party Schmidt decomposition of a three-party state.

    ``e`` realizes the BC marginal, either as a product ensemble
    (``dims == (d_B, d_C)``) or with joint members (``dims == (d_B * d_C,)``).
    Every pair of (reduced) members is projected and tested in the AB roles
    and, with B and C exchanged, in the AC roles. The state is certified when
    all pairs come out ``BOTH`` in both roles; the decomposition is then
    assembled from the ensemble factors. A member that is not a product vector
    is reported as a violation as well.

    Without an ensemble, a product eigen-ensemble of the BC marginal is
    searched for, falling back to the plain spectral ensemble. Degenerate
    marginals can defeat that search; ``gsd_detect`` handles those.

    Raises
    ------
    EnsembleMismatch
        If ``e`` does not realize the BC marginal within 1e-8.
    """
    tol = as_tol(tol)
    if psi.n != 3:
        raise BadSubset(f"expected three parties, got {psi.n}")
    _, db, dc = psi.dims
    rho_bc = partial_trace(psi, [0])
    ppt_ab = ppt_report(partial_trace(psi, [2]), tol).min_eigenvalue
    ppt_ac = ppt_report(partial_trace(psi, [1]), tol).min_eigenvalue

    def fail(reason: str, **kw) -> TripartiteCertificate:
        evidence = {"check": reason}
        if kw.get("detail"):
            evidence["detail"] = kw["detail"]
        return TripartiteCertificate(
            False, negative_result(psi.dims, 1, evidence), reason=reason, ppt_ab_min=ppt_ab, ppt_ac_min=ppt_ac, **kw
        )

    if e is None:
        e = eigen_product_ensemble(rho_bc, seed=seed, tol=tol) or _eigen_ensemble(rho_bc, tol)
    if e.dims not in (psi.dims[1:], (db * dc,)):
        raise EnsembleMismatch(f"ensemble dims {e.dims} do not match BC dims {psi.dims[1:]}")
    dev = ensemble_mismatch(e, rho_bc.mat)
    if dev > 1e-8:
        raise EnsembleMismatch(f"ensemble average deviates from rho_BC by {dev:.3e}")
    e = ensemble_reduce(e, tol)
    m = len(e)
    flat = PureState(psi.dims[:1] + e.dims, psi.amps)
    lifted = lift_ensemble(flat, e, tol)
    lifted = PureState((m, db, dc), lifted.amps)
    try:
        ab = branch_matrix(lifted, tol)
        ac = branch_matrix(regroup(lifted, [[0], [2], [1]]), tol)
    except InvariantFailure as exc:
        return fail("violation", detail=str(exc), ensemble_size=m)
    for i in range(m):
        for j in range(i + 1, m):
            for mat in (ab, ac):
                if mat[i][j].kind is not Branch.BOTH:
                    reason = "violation" if mat[i][j].kind is Branch.VIOLATION else "inconsistent-branches"
                    return fail(reason, branches_ab=ab, branches_ac=ac, offending_pair=(i, j), ensemble_size=m)
    factors = _member_factors(e, db, dc)
    bases = [
        _contracted_a_vectors(psi, e),
        np.stack([f[0] for f in factors], axis=1),
        np.stack([f[1] for f in factors], axis=1),
    ]
    gsd = fit_gsd(psi, bases, tol)
    if not gsd.decomposable:
        return fail("residual", branches_ab=ab, branches_ac=ac, ensemble_size=m)
    return TripartiteCertificate(True, gsd, ab, ac, None, "", "", ppt_ab, ppt_ac, m)


@dataclass(frozen=True, eq=False)
class GSDCertificate:
    certified: bool
    gsd: GSDResult
    steps: tuple[TripartiteCertificate, ...]
    reason: str = ""

    def to_record(self) -> dict:
        return {
            "certified": self.certified,
            "reason": self.reason,
            "gsd": self.gsd.to_record(),
            "steps": [s.to_record() for s in self.steps],
        }


def certify_gsd(
    psi: PureState,
    ensemble: Ensemble | None = None,
    tol: Tolerance | float | None = None,
    seed: int = 0,
) -> GSDCertificate:
    """Run the tripartite certificate along the induction chain.

    ``ensemble`` is a product ensemble over parties B, C, ... (all but A)
    realizing their joint marginal. Step ``t`` groups the parties as
    ``(A..) | t | (t+1..)`` and reuses the same members, grouped accordingly:
    first A | B | CD.., then AB | C | D.., and so on.
    """
    tol = as_tol(tol)
    n = psi.n
    if n < 3:
        raise BadSubset("certificates need at least three parties")
    if ensemble is None:
        ensemble = eigen_product_ensemble(partial_trace(psi, [0]), seed=seed, tol=tol)
        if ensemble is None:
            # no product ensemble for the full marginal: report the first step's findings
            step = orthogonality_certificate(regroup(psi, [[0], [1], list(range(2, n))]), None, tol, seed)
            reason = step.reason or "no-product-eigen-ensemble"
            neg = negative_result(psi.dims, 1, {"check": reason})
            return GSDCertificate(False, neg, (step,), f"step 1: {reason}")
    if ensemble.dims != psi.dims[1:]:
        raise EnsembleMismatch(f"ensemble dims {ensemble.dims} do not match {psi.dims[1:]}")
    ensemble = ensemble_reduce(ensemble, tol)
    steps = []
    for t in range(1, n - 1):
        grouped = regroup(psi, [list(range(t)), [t], list(range(t + 1, n))])
        sub = ensemble.group([[t - 1], list(range(t, n - 1))])
        step = orthogonality_certificate(grouped, sub, tol, seed)
        steps.append(step)
        if not step.certified:
            return GSDCertificate(False, step.gsd, tuple(steps), f"step {t}: {step.reason}")
    bases = [_contracted_a_vectors(psi, ensemble)]
    bases += [np.stack([mem.factors[k] for mem in ensemble.members], axis=1) for k in range(n - 1)]
    gsd = fit_gsd(psi, bases, tol)
    return GSDCertificate(gsd.decomposable, gsd, tuple(steps), "" if gsd.decomposable else "residual")


def induction_step(
    psi: PureState,
    ensemble: Ensemble | None = None,
    tol: Tolerance | float | None = None,
    seed: int = 0,
) -> GSDResult:
    """n-party decomposition obtained by chaining tripartite certificates."""
    return certify_gsd(psi, ensemble, tol, seed).gsd
