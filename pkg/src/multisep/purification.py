"""Purifications, ensembles of product states and ensemble steering.

An :class:`Ensemble` is a finite mixture ``sum_i p_i |e_i><e_i|`` whose members
are product vectors ``|e_i> = |f_i^1> (x) ... (x) |f_i^n>``. A single-party
ensemble (``dims=(d,)``) carries arbitrary vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BranchViolation, EnsembleMismatch, InvalidState, InvariantFailure
from .numerics import DEFAULT_TOL, Tolerance, as_tol, check_finite, herm_eig, null_space, svd
from .states import DensityMatrix, PureState, apply_local, check_dims, party_index

# overlap modulus above which two product vectors count as parallel
PARALLEL = 1 - 1e-10


def _kron_all(vs: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vs:
        out = np.kron(out, v)
    return out


@dataclass(frozen=True, eq=False)
class EnsembleMember:
    p: float
    factors: tuple[np.ndarray, ...]

    @property
    def vector(self) -> np.ndarray:
        return _kron_all(self.factors)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Probabilities and per-party unit factors; probabilities sum to one."""

    dims: tuple[int, ...]
    members: tuple[EnsembleMember, ...]

    def __post_init__(self):
        dims = check_dims(self.dims)
        members = []
        for m in self.members:
            if len(m.factors) != len(dims):
                raise InvalidState(f"member has {len(m.factors)} factors for {len(dims)} parties")
            factors = []
            for f, d in zip(m.factors, dims):
                f = np.array(f, dtype=complex).reshape(-1)
                check_finite(f, "ensemble factor")
                nrm = np.linalg.norm(f)
                if f.size != d or nrm == 0.0:
                    raise InvalidState(f"bad factor of size {f.size} for party dimension {d}")
                factors.append(f / nrm)
            if not math.isfinite(m.p) or m.p < 0:
                raise InvalidState(f"member probability {m.p!r} must be >= 0")
            members.append(EnsembleMember(float(m.p), tuple(factors)))
        if not members:
            raise InvalidState("an ensemble needs at least one member")
        total = sum(m.p for m in members)
        if abs(total - 1.0) > DEFAULT_TOL.eps:
            raise InvalidState(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "members", tuple(members))

    @classmethod
    def from_terms(cls, dims: Sequence[int], probs: Sequence[float], factors: Sequence[Sequence[np.ndarray]]) -> "Ensemble":
        return cls(tuple(dims), tuple(EnsembleMember(float(p), tuple(f)) for p, f in zip(probs, factors)))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def probs(self) -> np.ndarray:
        return np.array([m.p for m in self.members])

    def vectors(self) -> np.ndarray:
        """Member vectors as columns."""
        return np.stack([m.vector for m in self.members], axis=1)

    def density(self) -> DensityMatrix:
        v = self.vectors()
        return DensityMatrix(self.dims, (v * self.probs[None, :]) @ v.conj().T, validate=False)

    def group(self, groups: Sequence[Sequence[int]]) -> "Ensemble":
        """Merge parties, e.g. ``[[0], [1, 2]]`` turns a B,C,D ensemble into B | CD."""
        dims = tuple(math.prod(self.dims[p] for p in g) for g in groups)
        members = tuple(
            EnsembleMember(m.p, tuple(_kron_all([m.factors[p] for p in g]) for g in groups)) for m in self.members
        )
        return Ensemble(dims, members)

    def __repr__(self) -> str:
        return f"Ensemble(dims={self.dims}, members={len(self.members)})"


def ensemble_mismatch(e: Ensemble, rho: np.ndarray) -> float:
    """Largest entrywise deviation between the ensemble average and ``rho``."""
    return float(np.abs(e.density().mat - rho).max())


def purify(rho: DensityMatrix, tol: Tolerance | float | None = None) -> PureState:
    """Canonical purification ``sum_k sqrt(lam_k) |v_k> (x) |k>``.

    One party of dimension ``rank(rho)`` is appended; eigenvalues <= eps are dropped.
    """
    tol = as_tol(tol)
    lam, v = herm_eig(rho.mat, tol)
    keep = np.flatnonzero(lam > tol.eps)[::-1]
    amps = v[:, keep] * np.sqrt(lam[keep])[None, :]
    return PureState.from_vector(amps.reshape(-1), rho.dims + (len(keep),))


def hjw_steering(
    psi: PureState,
    ensemble: Ensemble,
    purifier: int | str | None = None,
    tol: Tolerance | float | None = None,
) -> np.ndarray:
    """Isometry on the purifying party that steers ``psi`` onto ``ensemble``.

    ``psi`` purifies ``rho`` on the remaining parties (kept in order), and
    ``ensemble`` must average to ``rho`` within 1e-8. The returned ``M`` has
    orthonormal columns and ``apply_local(psi, purifier, M)`` equals
    ``sum_i sqrt(p_i) |e_i> (x) |i>`` with the purifier in its original slot.
    The output dimension is ``max(len(ensemble), d_purifier)``; when the
    purifier is larger than the ensemble the extra levels carry zero amplitude.

    Raises
    ------
    EnsembleMismatch
        If the ensemble does not realize the reduced state of ``psi``.
    """
    tol = as_tol(tol)
    r_idx = psi.n - 1 if purifier is None else party_index(purifier, psi.n)
    others = [k for k in range(psi.n) if k != r_idx]
    odims = tuple(psi.dims[k] for k in others)
    if ensemble.dims != odims:
        raise EnsembleMismatch(f"ensemble dims {ensemble.dims} do not match parties {odims}")
    dr = psi.dims[r_idx]
    mat = np.transpose(psi.tensor, others + [r_idx]).reshape(-1, dr)
    dev = ensemble_mismatch(ensemble, mat @ mat.conj().T)
    if dev > 1e-8:
        raise EnsembleMismatch(f"ensemble average deviates from the reduced state by {dev:.3e}")

    # psi = sum_k s_k |u_k>|w_k>,  w_k = row k of V^dag
    u, s, v = svd(mat)
    keep = s**2 > tol.eps
    u, s, w = u[:, keep], s[keep], v[:, keep].conj()
    r = len(s)
    m = len(ensemble)
    e = ensemble.vectors() * np.sqrt(ensemble.probs)[None, :]
    coef = (u.conj().T @ e) / s[:, None]  # r x m, orthonormal rows
    resid = float(np.abs(u @ (coef * s[:, None]) - e).max())
    if resid > 1e-8:
        raise EnsembleMismatch(f"ensemble members leave the support of the reduced state (residual {resid:.3e})")

    dout = max(m, dr)
    t = np.zeros((dout, r), dtype=complex)
    t[:m, :] = coef.T
    iso = t @ w.conj().T
    if dr > r:
        w_perp = null_space(w, dr)
        t_perp = null_space(t, dout)[:, : dr - r]
        iso = iso + t_perp @ w_perp.conj().T
    return iso


def steered_state(psi: PureState, iso: np.ndarray, purifier: int | str | None = None) -> PureState:
    r_idx = psi.n - 1 if purifier is None else party_index(purifier, psi.n)
    return apply_local(psi, r_idx, iso, tol=1e-8)


def ensemble_lift(ensemble: Ensemble, dim: int | None = None, position: int | None = None) -> PureState:
    """``sum_i sqrt(p_i) |e_i> (x) |i>`` with the index party inserted at ``position`` (default last)."""
    m = len(ensemble)
    dim = m if dim is None else dim
    e = ensemble.vectors() * np.sqrt(ensemble.probs)[None, :]
    t = np.zeros((e.shape[0], dim), dtype=complex)
    t[:, :m] = e
    dims = ensemble.dims + (dim,)
    t = t.reshape(dims)
    pos = len(ensemble.dims) if position is None else position
    t = np.moveaxis(t, -1, pos)
    new_dims = ensemble.dims[:pos] + (dim,) + ensemble.dims[pos:]
    return PureState.from_vector(t.reshape(-1), new_dims)


def _parallel(a: EnsembleMember, b: EnsembleMember) -> bool:
    return all(abs(np.vdot(x, y)) >= PARALLEL for x, y in zip(a.factors, b.factors))


def ensemble_reduce(e: Ensemble, tol: Tolerance | float | None = None) -> Ensemble:
    """Drop members with p <= eps and merge parallel members (probabilities add).

    The result has pairwise linearly independent member vectors.
    """
    tol = as_tol(tol)
    kept: list[EnsembleMember] = []
    for m in e.members:
        if m.p <= tol.eps:
            continue
        for idx, k in enumerate(kept):
            if _parallel(k, m):
                kept[idx] = EnsembleMember(k.p + m.p, k.factors)
                break
        else:
            kept.append(m)
    total = sum(m.p for m in kept)
    return Ensemble(e.dims, tuple(EnsembleMember(m.p / total, m.factors) for m in kept))


@dataclass(frozen=True, eq=False)
class Layer:
    mu: np.ndarray
    items: tuple[tuple[float, np.ndarray, np.ndarray], ...]  # (p_ij, chi on A, nu on C)

    @property
    def q(self) -> float:
        return sum(p for p, _, _ in self.items)


@dataclass(frozen=True, eq=False)
class LayeredEnsemble:
    """Members grouped by their B factor.

    The lifted state is ``sum_i |mu_i> (x) sum_j sqrt(p_ij) |chi_ij>_A |nu_ij>_C``
    with the ``chi`` orthonormal overall and the ``nu`` orthogonal across layers.
    """

    layers: tuple[Layer, ...]
    dims: tuple[int, int, int]  # (A, B, C)

    @property
    def s(self) -> int:
        return len(self.layers)

    @property
    def t(self) -> tuple[int, ...]:
        return tuple(len(layer.items) for layer in self.layers)

    def lifted_state(self) -> PureState:
        amps = np.zeros(math.prod(self.dims), dtype=complex)
        for layer in self.layers:
            for p, chi, nu in layer.items:
                amps += math.sqrt(p) * np.kron(np.kron(chi, layer.mu), nu)
        return PureState.from_vector(amps, self.dims)

    def separable_witness(self) -> Ensemble:
        """Explicit product ensemble for rho_AB = sum_i q_i Tr_C|chi_i^AC><chi_i^AC| (x) |mu_i><mu_i|."""
        da, db, dc = self.dims
        probs, factors = [], []
        for layer in self.layers:
            chi_ac = sum(math.sqrt(p) * np.kron(chi, nu) for p, chi, nu in layer.items)
            m = chi_ac.reshape(da, dc)
            lam, vec = herm_eig(m @ m.conj().T)
            for k in np.flatnonzero(lam > 1e-14)[::-1]:
                probs.append(float(lam[k]))
                factors.append((vec[:, k], layer.mu))
        total = sum(probs)
        return Ensemble.from_terms((da, db), [p / total for p in probs], factors)

    def check_invariants(self, eps: float = DEFAULT_TOL.eps) -> list[str]:
        problems = []
        mus = [layer.mu for layer in self.layers]
        for i in range(len(mus)):
            for j in range(i + 1, len(mus)):
                if abs(np.vdot(mus[i], mus[j])) >= PARALLEL:
                    problems.append(f"mu_{i} parallel to mu_{j}")
        chis = np.stack([chi for layer in self.layers for _, chi, _ in layer.items], axis=1)
        dev = float(np.abs(chis.conj().T @ chis - np.eye(chis.shape[1])).max())
        if dev > eps:
            problems.append(f"chi vectors not orthonormal ({dev:.3e})")
        for i, li in enumerate(self.layers):
            for j, lj in enumerate(self.layers):
                if j <= i:
                    continue
                for _, _, a in li.items:
                    for _, _, b in lj.items:
                        if abs(np.vdot(a, b)) > eps:
                            problems.append(f"nu vectors of layers {i} and {j} overlap")
        total = sum(layer.q for layer in self.layers)
        if abs(total - 1) > eps:
            problems.append(f"probabilities sum to {total!r}")
        return problems


def nobs_normal_form(
    e: Ensemble,
    pair_branches: Sequence[Sequence[str | None]] | None = None,
    tol: Tolerance | float | None = None,
) -> LayeredEnsemble:
    """Group a B,C product ensemble into layers sharing a B factor.

    ``pair_branches[i][j]`` is the branch label of members ``i, j`` (as produced
    by ``proofcheck.branch_matrix``); any ``"VIOLATION"`` entry is rejected.
    Member ``r`` joins the layer whose ``mu`` it is parallel to, in which case its
    C factor must be orthogonal to every other layer; otherwise it must be
    orthogonal to all C factors so far and opens a new layer. The A vectors are
    the computational basis of the lifted index party, carrying each member's
    relative phase.

    Raises
    ------
    BranchViolation
        If a pair violates the minor condition.
    InvariantFailure
        If a member fits neither case within ``eps``.
    """
    tol = as_tol(tol)
    if e.n != 2:
        raise InvariantFailure(f"expected a two-party (B, C) ensemble, got {e.n} parties")
    if pair_branches is not None:
        for i, row in enumerate(pair_branches):
            for j, lab in enumerate(row):
                if lab is not None and str(lab).upper().endswith("VIOLATION"):
                    raise BranchViolation(f"members {i} and {j} violate the partial-transpose minor condition")
    m = len(e)
    db, dc = e.dims
    mus: list[np.ndarray] = []
    groups: list[list[tuple[float, np.ndarray, np.ndarray]]] = []
    for r, mem in enumerate(e.members):
        psi_b, phi_c = mem.factors
        chi = np.zeros(m, dtype=complex)
        chi[r] = 1.0
        home = None
        for k, mu in enumerate(mus):
            ov = np.vdot(mu, psi_b)
            if abs(ov) >= PARALLEL:
                home = k
                chi = chi * (ov / abs(ov))
                break
        clash = [
            k
            for k, items in enumerate(groups)
            if k != home and any(abs(np.vdot(nu, phi_c)) > tol.eps for _, _, nu in items)
        ]
        if clash:
            raise InvariantFailure(
                f"member {r}: C factor overlaps layer(s) {clash} while its B factor "
                + ("matches layer %d" % home if home is not None else "is new")
            )
        if home is None:
            mus.append(psi_b)
            groups.append([])
            home = len(mus) - 1
        groups[home].append((mem.p, chi, phi_c))
    layers = tuple(Layer(mu, tuple(items)) for mu, items in zip(mus, groups))
    out = LayeredEnsemble(layers, (m, db, dc))
    problems = out.check_invariants(tol.eps)
    if problems:
        raise InvariantFailure("; ".join(problems))
    return out
