"""PPT reports, one-sided separability/entanglement certificates and the
three-party "triangle" classification of a pure state's two-party marginals.

Certificates are one-sided: a state is only called separable when the PPT
test is known to be sufficient (2x2, 2x3) or an explicit product ensemble
reproduces it, and only called PPT-entangled when the realignment criterion or
the product-vector range search proves it. Everything else is ``UNDETERMINED``.
Distillable and NPT-bound states are never told apart.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadSubset, InvalidState
from .fixtures import rng_for
from .numerics import Tolerance, as_tol, eigen_clusters, fro_norm, herm_eig, null_space, svd
from .purification import Ensemble, ensemble_mismatch
from .schmidt import GSDResult, gsd_detect
from .states import (
    Bipartition,
    DensityMatrix,
    PureState,
    all_bipartitions,
    is_product_vector,
    partial_trace,
    party_letter,
    product_factors,
    random_unit_vector,
    regroup,
    transpose_parties,
)

SEESAW_RESTARTS = 32
SEESAW_ITERS = 200
SEESAW_STOP = 1e-12
# a range search below this overlap certifies "no product vector in the range"
RANGE_GAP = 1e-3
# witness ensembles must reproduce the state entrywise within this
WITNESS_TOL = 1e-9


# --------------------------------------------------------------------- PPT


@dataclass(frozen=True)
class PPTEntry:
    cut: Bipartition
    label: str
    min_eigenvalue: float
    eigenvalues: tuple[float, ...]
    verdict: str  # "PPT" | "NPT"


@dataclass(frozen=True)
class PPTReport:
    dims: tuple[int, ...]
    entries: tuple[PPTEntry, ...]
    eps: float

    @property
    def is_ppt(self) -> bool:
        return all(e.verdict == "PPT" for e in self.entries)

    @property
    def min_eigenvalue(self) -> float:
        return min(e.min_eigenvalue for e in self.entries)

    def to_record(self) -> dict:
        return {
            "dims": list(self.dims),
            "eps": self.eps,
            "ppt": self.is_ppt,
            "cuts": [
                {
                    "cut": e.label,
                    "verdict": e.verdict,
                    "min_eigenvalue": e.min_eigenvalue,
                    "eigenvalues": list(e.eigenvalues),
                }
                for e in self.entries
            ],
        }


def ppt_report(
    rho: DensityMatrix,
    tol: Tolerance | float | None = None,
    names: Sequence[str] | None = None,
) -> PPTReport:
    """Partial-transpose spectrum for every cut (up to complement).

    The right-hand side of each cut is transposed. ``names`` relabels parties in
    the report (e.g. ``["B", "C"]`` for a marginal on Bob and Charlie).
    """
    tol = as_tol(tol)
    if rho.n < 2:
        raise BadSubset("a PPT report needs at least two parties")
    names = list(names) if names is not None else [party_letter(i) for i in range(rho.n)]
    entries = []
    for cut in all_bipartitions(rho.n):
        lam = herm_eig(transpose_parties(rho.mat, rho.dims, cut.right), tol)[0]
        label = "".join(names[i] for i in cut.left) + "|" + "".join(names[i] for i in cut.right)
        verdict = "NPT" if lam[0] < -tol.eps else "PPT"
        entries.append(PPTEntry(cut, label, float(lam[0]), tuple(float(x) for x in lam), verdict))
    return PPTReport(rho.dims, tuple(entries), tol.eps)


def _bipartite(rho: DensityMatrix) -> tuple[int, int]:
    if rho.n != 2:
        raise BadSubset(f"expected a bipartite state, got {rho.n} parties")
    return rho.dims


# ------------------------------------------------------------ realignment


def realignment_value(rho: DensityMatrix) -> float:
    """Trace norm of the realigned matrix ``R[(i,k),(j,l)] = rho[(i,j),(k,l)]``.

    Values above 1 certify entanglement.
    """
    da, db = _bipartite(rho)
    r = rho.mat.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    return float(np.sum(svd(r)[1]))


# ----------------------------------------------------------------- seesaw


@dataclass(frozen=True, eq=False)
class SeesawResult:
    best_overlap: float
    factors: tuple[np.ndarray, ...]
    history: tuple[float, ...]  # per-iteration values of the winning restart

    @property
    def vector(self) -> np.ndarray:
        out = np.ones(1, dtype=complex)
        for f in self.factors:
            out = np.kron(out, f)
        return out


def _embed(factors: Sequence[np.ndarray], k: int) -> np.ndarray:
    """``f_0 (x) .. (x) I_k (x) .. (x) f_{n-1}`` as a ``D x d_k`` matrix."""
    out = np.ones((1, 1), dtype=complex)
    for j, f in enumerate(factors):
        out = np.kron(out, np.eye(len(f)) if j == k else f.reshape(-1, 1))
    return out


def product_seesaw(
    proj: np.ndarray,
    dims: Sequence[int],
    restarts: int = SEESAW_RESTARTS,
    iters: int = SEESAW_ITERS,
    seed: int = 0,
    stop: float = SEESAW_STOP,
) -> SeesawResult:
    """Maximize ``<x|P|x>`` over product unit vectors ``x`` by alternating updates.

    With every factor but one fixed, the optimal remaining factor is the top
    eigenvector of the contracted operator, so each restart's value is
    nondecreasing. Restart ``r`` is seeded from ``SeedSequence(seed, spawn_key=(r,))``.
    """
    dims = tuple(dims)
    proj = np.asarray(proj, dtype=complex)
    best: SeesawResult | None = None
    for r in range(restarts):
        rng = rng_for(seed, r)
        factors = [random_unit_vector(rng, d) for d in dims]
        history: list[float] = []
        for _ in range(iters):
            for k in range(len(dims)):
                x = _embed(factors, k)
                op = x.conj().T @ proj @ x
                op = 0.5 * (op + op.conj().T)
                w, v = np.linalg.eigh(op)
                factors[k] = v[:, -1]
                val = float(w[-1])
            improved = not history or val - history[-1] >= stop
            history.append(val)
            if not improved:
                break
        res = SeesawResult(history[-1], tuple(factors), tuple(history))
        if best is None or res.best_overlap > best.best_overlap:
            best = res
        if best.best_overlap >= 1 - stop:
            break
    return best


def range_projector(rho: DensityMatrix, tol: Tolerance | float | None = None) -> np.ndarray:
    tol = as_tol(tol)
    lam, v = herm_eig(rho.mat, tol)
    vr = v[:, lam > tol.eps]
    return vr @ vr.conj().T


def range_product_search(
    rho: DensityMatrix,
    restarts: int = SEESAW_RESTARTS,
    iters: int = SEESAW_ITERS,
    seed: int = 0,
    tol: Tolerance | float | None = None,
) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Largest overlap of a product vector with the range of ``rho``.

    Returns ``(best_overlap, (phi, chi))``. An overlap of one means the range
    contains the product vector ``phi (x) chi``.
    """
    dims = _bipartite(rho)
    res = product_seesaw(range_projector(rho, tol), dims, restarts, iters, seed)
    return res.best_overlap, res.factors


# ----------------------------------------------------- product eigenbases


class EigenSeparability(str, enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDETERMINED = "undetermined-by-degeneracy"


def _product_basis_in(
    basis: np.ndarray,
    dims: Sequence[int],
    restarts: int,
    iters: int,
    seed: int,
) -> list[np.ndarray] | None:
    """Greedy search for an orthonormal product basis of span(basis columns)."""
    found = []
    w = basis
    step = 0
    while w.shape[1] > 0:
        res = product_seesaw(w @ w.conj().T, dims, restarts, iters, seed=seed * 1000 + step)
        step += 1
        if res.best_overlap < 1 - 1e-9:
            return None
        x = res.vector
        found.append(x)
        coords = w.conj().T @ x
        w = w @ null_space(coords.reshape(-1, 1), w.shape[1])
    return found


def product_eigenbasis(
    rho: DensityMatrix,
    include_kernel: bool = True,
    seed: int = 0,
    restarts: int = SEESAW_RESTARTS,
    iters: int = SEESAW_ITERS,
    tol: Tolerance | float | None = None,
) -> tuple[EigenSeparability, list[tuple[float, np.ndarray]], dict]:
    """Look for an orthonormal eigenbasis of product vectors (product across all parties).

    Nondegenerate eigenvectors are tested directly (second singular value of
    every single-party cut at most ``1e3 * eps``); degenerate clusters are
    searched greedily with :func:`product_seesaw`. Returns the status, the
    ``(eigenvalue, vector)`` pairs found, and diagnostic details.
    """
    tol = as_tol(tol)
    lam, v = herm_eig(rho.mat, tol)
    ids = eigen_clusters(lam, fro_norm(rho.mat))
    clusters = [np.flatnonzero(ids == c) for c in range(ids.max() + 1)]
    if not include_kernel:
        clusters = [c for c in clusters if lam[c].max() > tol.eps]
    clusters.sort(key=lambda c: (len(c) > 1, -lam[c].max()))
    pt = 1e3 * tol.eps
    pairs: list[tuple[float, np.ndarray]] = []
    for ci, c in enumerate(clusters):
        if len(c) == 1:
            vec = v[:, c[0]]
            if not is_product_vector(vec, rho.dims, pt):
                return EigenSeparability.FALSE, pairs, {"entangled_eigenvalue": float(lam[c[0]])}
            pairs.append((float(lam[c[0]]), vec))
            continue
        found = _product_basis_in(v[:, c], rho.dims, restarts, iters, seed * 7919 + ci)
        if found is None:
            return EigenSeparability.UNDETERMINED, pairs, {"unresolved_cluster": [float(x) for x in lam[c]]}
        mean = float(np.mean(lam[c]))
        pairs.extend((mean, x) for x in found)
    return EigenSeparability.TRUE, pairs, {}


def eigenseparable_check(rho: DensityMatrix, seed: int = 0, tol: Tolerance | float | None = None) -> EigenSeparability:
    """Whether ``rho`` has an orthogonal eigenbasis of product vectors.

    ``UNDETERMINED`` is returned when a degenerate eigenspace could not be
    resolved into product vectors by the seesaw search.
    """
    return product_eigenbasis(rho, include_kernel=True, seed=seed, tol=tol)[0]


def eigen_product_ensemble(rho: DensityMatrix, seed: int = 0, tol: Tolerance | float | None = None) -> Ensemble | None:
    """Product ensemble built from a product eigenbasis of the range of ``rho``,
    or ``None`` when none was found. The ensemble is checked to reproduce ``rho``."""
    tol = as_tol(tol)
    status, pairs, _ = product_eigenbasis(rho, include_kernel=False, seed=seed, tol=tol)
    if status is not EigenSeparability.TRUE or not pairs:
        return None
    probs = np.array([p for p, _ in pairs])
    probs = probs / probs.sum()
    e = Ensemble.from_terms(rho.dims, probs, [product_factors(x, rho.dims) for _, x in pairs])
    if ensemble_mismatch(e, rho.mat) > WITNESS_TOL:
        return None
    return e


# ---------------------------------------------------------- classification


class Verdict(str, enum.Enum):
    SEPARABLE = "SeparableCertified"
    PPT_ENTANGLED = "PPTEntangledCertified"
    NPT = "NPT"
    UNDETERMINED = "Undetermined"

    @property
    def short(self) -> str:
        return {"SeparableCertified": "S", "PPTEntangledCertified": "B+", "NPT": "NPT", "Undetermined": "?"}[self.value]


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    criterion: str
    value: float
    details: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {"verdict": self.verdict.value, "criterion": self.criterion, "value": self.value, **self.details}


def classify_bipartite(
    rho: DensityMatrix,
    witness: Ensemble | None = None,
    tol: Tolerance | float | None = None,
    restarts: int = SEESAW_RESTARTS,
    iters: int = SEESAW_ITERS,
    seed: int = 0,
) -> Classification:
    """Decision tree for a two-party state.

    1. NPT -> ``NPT`` (distillable vs NPT-bound is not decided).
    2. PPT and a trivial (dimension one) party, or dims 2x2 / 2x3 -> separable.
    3. PPT and an explicit product ensemble ``witness`` reproducing ``rho`` -> separable.
    4. PPT and realignment value > 1 + eps, or range overlap < 1 - 1e-3 -> PPT entangled.
    5. PPT and a product eigenbasis of the range (an eigen-ensemble witness) -> separable.
    6. Otherwise ``UNDETERMINED``.
    """
    tol = as_tol(tol)
    dims = _bipartite(rho)
    entry = ppt_report(rho, tol).entries[0]
    lmin = entry.min_eigenvalue
    if entry.verdict == "NPT":
        return Classification(Verdict.NPT, "ppt-min-eigenvalue", lmin)
    if min(dims) == 1:
        return Classification(Verdict.SEPARABLE, "trivial-party", lmin)
    if tuple(sorted(dims)) in {(2, 2), (2, 3)}:
        return Classification(Verdict.SEPARABLE, "ppt-low-dimension", lmin)
    if witness is not None:
        if witness.dims != rho.dims:
            raise InvalidState(f"witness dims {witness.dims} do not match {rho.dims}")
        dev = ensemble_mismatch(witness, rho.mat)
        if dev <= WITNESS_TOL:
            return Classification(Verdict.SEPARABLE, "product-ensemble-witness", dev, {"ppt_min_eigenvalue": lmin})
    rv = realignment_value(rho)
    if rv > 1 + tol.eps:
        return Classification(Verdict.PPT_ENTANGLED, "realignment", rv, {"ppt_min_eigenvalue": lmin})
    eig_witness = eigen_product_ensemble(rho, seed=seed, tol=tol)
    if eig_witness is not None:
        dev = ensemble_mismatch(eig_witness, rho.mat)
        return Classification(
            Verdict.SEPARABLE, "eigen-product-witness", dev, {"ppt_min_eigenvalue": lmin, "realignment": rv}
        )
    ov = range_product_search(rho, restarts, iters, seed, tol)[0]
    details = {"ppt_min_eigenvalue": lmin, "realignment": rv}
    if ov < 1 - RANGE_GAP:
        return Classification(Verdict.PPT_ENTANGLED, "range-product-overlap", ov, details)
    return Classification(Verdict.UNDETERMINED, "range-product-overlap", ov, details)


def classify_cut(rho: DensityMatrix, cut: Bipartition, **kw) -> Classification:
    """Classify a multi-party state across ``cut`` by grouping each side into one party."""
    return classify_bipartite(regroup(rho, [list(cut.left), list(cut.right)]), **kw)


# ------------------------------------------------------- multiseparability


@dataclass(frozen=True)
class MarginalReport:
    dropped: int
    parties: tuple[int, ...]
    ppt: PPTReport
    classifications: tuple[tuple[str, Classification], ...]

    def to_record(self) -> dict:
        return {
            "dropped": party_letter(self.dropped),
            "parties": "".join(party_letter(p) for p in self.parties),
            "ppt": self.ppt.to_record(),
            "classifications": {label: c.to_record() for label, c in self.classifications},
        }


def multiseparability_report(
    psi: PureState,
    tol: Tolerance | float | None = None,
    seed: int = 0,
    restarts: int = SEESAW_RESTARTS,
    iters: int = SEESAW_ITERS,
) -> list[MarginalReport]:
    """PPT report and cut-wise classification of every marginal obtained by
    tracing out one party."""
    tol = as_tol(tol)
    if psi.n < 3:
        raise BadSubset("multiseparability needs at least three parties")
    out = []
    for d in range(psi.n):
        parties = tuple(p for p in range(psi.n) if p != d)
        names = [party_letter(p) for p in parties]
        rho = partial_trace(psi, [d])
        rep = ppt_report(rho, tol, names)
        cls = []
        for entry in rep.entries:
            c = classify_cut(rho, entry.cut, tol=tol, seed=seed, restarts=restarts, iters=iters)
            cls.append((entry.label, c))
        out.append(MarginalReport(d, parties, rep, tuple(cls)))
    return out


def is_multiseparable_ppt(reports: Sequence[MarginalReport]) -> bool:
    return all(r.ppt.is_ppt for r in reports)


# --------------------------------------------------------------- triangle

SIDES = (("AB", 2), ("BC", 0), ("AC", 1))


@dataclass(frozen=True, eq=False)
class TriangleReport:
    sides: dict  # side label -> Classification
    ppt: dict  # side label -> min eigenvalue of the partial transpose
    gsd: GSDResult
    exclusion_flags: tuple[str, ...]

    def to_record(self) -> dict:
        return {
            "sides": {k: v.to_record() for k, v in self.sides.items()},
            "ppt_min_eigenvalue": dict(self.ppt),
            "gsd_decomposable": self.gsd.decomposable,
            "exclusion_flags": list(self.exclusion_flags),
        }


def triangle_classify(
    psi: PureState,
    tol: Tolerance | float | None = None,
    seed: int = 0,
    restarts: int = SEESAW_RESTARTS,
    iters: int = SEESAW_ITERS,
) -> TriangleReport:
    """Classify rho_AB, rho_BC and rho_AC of a three-party pure state.

    Exclusion flags mark combinations no pure state can produce, so a flag
    means an internal inconsistency rather than a physical finding:

    * ``no-bplus-s``: a PPT-entangled side next to a separable side;
    * ``sep-ppt-ppt-not-decomposable``: one side separable, the other two PPT,
      yet no n-party Schmidt decomposition was found;
    * ``triseparable-not-decomposable``: all three sides separable, yet no
      decomposition was found.
    """
    tol = as_tol(tol)
    if psi.n != 3:
        raise BadSubset(f"triangle classification needs exactly three parties, got {psi.n}")
    sides, ppt = {}, {}
    for label, drop in SIDES:
        rho = partial_trace(psi, [drop])
        sides[label] = classify_bipartite(rho, tol=tol, seed=seed, restarts=restarts, iters=iters)
        ppt[label] = ppt_report(rho, tol).min_eigenvalue
    gsd = gsd_detect(psi, tol, seed=seed)
    verdicts = [c.verdict for c in sides.values()]
    flags = []
    if Verdict.PPT_ENTANGLED in verdicts and Verdict.SEPARABLE in verdicts:
        flags.append("no-bplus-s")
    if not gsd.decomposable:
        if all(v is Verdict.SEPARABLE for v in verdicts):
            flags.append("triseparable-not-decomposable")
        for label, _ in SIDES:
            others = [lab for lab, _ in SIDES if lab != label]
            if sides[label].verdict is Verdict.SEPARABLE and all(ppt[o] >= -tol.eps for o in others):
                flags.append("sep-ppt-ppt-not-decomposable")
                break
    return TriangleReport(sides, ppt, gsd, tuple(flags))


__all__ = [
    "PPTEntry",
    "PPTReport",
    "ppt_report",
    "realignment_value",
    "SeesawResult",
    "product_seesaw",
    "range_projector",
    "range_product_search",
    "EigenSeparability",
    "product_eigenbasis",
    "eigenseparable_check",
    "eigen_product_ensemble",
    "Verdict",
    "Classification",
    "classify_bipartite",
    "classify_cut",
    "MarginalReport",
    "multiseparability_report",
    "is_multiseparable_ppt",
    "TriangleReport",
    "triangle_classify",
]
