import math

import numpy as np
import pytest

from multisep.errors import BranchViolation, EnsembleMismatch, InvalidState
from multisep.fixtures import random_orthonormal, random_pure, rng_for, tiles
from multisep.numerics import herm_eig
from multisep.proofcheck import branch_matrix, lift_ensemble
from multisep.purification import (
    Ensemble,
    EnsembleMember,
    ensemble_lift,
    ensemble_reduce,
    hjw_steering,
    nobs_normal_form,
    purify,
    steered_state,
)
from multisep.separability import Verdict, classify_bipartite
from multisep.states import DensityMatrix, PureState, apply_local, partial_entropy, partial_trace, regroup

from conftest import random_density
from helpers import random_layered


def test_ensemble_validation():
    with pytest.raises(InvalidState):
        Ensemble.from_terms((2,), [0.5, 0.4], [[np.array([1, 0])], [np.array([0, 1])]])
    with pytest.raises(InvalidState):
        Ensemble.from_terms((2,), [1.0], [[np.array([1, 0, 0])]])


def test_purify_examples():
    psi = purify(DensityMatrix((2,), np.eye(2) / 2))
    assert psi.dims == (2, 2) and math.isclose(partial_entropy(psi, "A|B"), 1, abs_tol=1e-12)
    phi = random_pure((3,), 4)
    out = purify(phi.density())
    assert out.dims == (3, 1)
    assert abs(abs(np.vdot(out.amps, phi.amps)) - 1) < 1e-12
    t = tiles()
    pt = purify(t)
    assert pt.dims == (3, 3, 4)
    assert int(np.sum(herm_eig(t.mat)[0] > 1e-9)) == 4
    assert np.abs(partial_trace(pt, [2]).mat - t.mat).max() <= 1e-10


def test_purify_round_trip_random():
    rng = rng_for(30)
    for dims in [(2, 2), (2, 3), (3, 3), (2, 2, 2)]:
        rho = DensityMatrix(dims, random_density(rng, dims, rank=3))
        psi = purify(rho)
        assert psi.dims[-1] == 3
        assert np.abs(partial_trace(psi, [len(dims)]).mat - rho.mat).max() <= 1e-10


def eigen_ensemble(rho):
    lam, v = herm_eig(rho.mat)
    keep = np.flatnonzero(lam > 1e-9)[::-1]
    return Ensemble.from_terms((rho.dim,), lam[keep], [[v[:, k]] for k in keep])


def test_hjw_eigen_ensemble_is_identity():
    rho = DensityMatrix((4,), random_density(rng_for(1), (4,)))
    psi = purify(rho)
    iso = hjw_steering(psi, eigen_ensemble(rho))
    assert np.allclose(iso, np.eye(4), atol=1e-10)


def test_hjw_hadamard():
    psi = purify(DensityMatrix((2,), np.eye(2) / 2))
    plus, minus = np.array([1, 1]) / math.sqrt(2), np.array([1, -1]) / math.sqrt(2)
    e = Ensemble.from_terms((2,), [0.5, 0.5], [[plus], [minus]])
    iso = hjw_steering(psi, e)
    assert np.abs(iso.conj().T @ iso - np.eye(2)).max() <= 1e-10
    assert np.allclose(np.abs(iso), np.full((2, 2), 1 / math.sqrt(2)), atol=1e-12)
    out = steered_state(psi, iso)
    assert np.abs(out.amps - ensemble_lift(e).amps).max() <= 1e-9


def random_ensemble_for(rho, m, rng):
    # members sqrt(p_i)|e_i> = sum_k W[i,k] sqrt(lam_k)|v_k> for a random isometry W
    lam, v = herm_eig(rho.mat)
    keep = np.flatnonzero(lam > 1e-12)
    w = random_orthonormal(rng, m, len(keep))
    vecs = (v[:, keep] * np.sqrt(lam[keep])[None, :]) @ w.T
    probs = np.sum(np.abs(vecs) ** 2, axis=0)
    return Ensemble.from_terms((rho.dim,), probs / probs.sum(), [[vecs[:, i]] for i in range(m)])


def test_hjw_random_rank3_five_members():
    rng = rng_for(31)
    rho = DensityMatrix((6,), random_density(rng, (6,), rank=3))
    psi = purify(rho)
    e = random_ensemble_for(rho, 5, rng)
    iso = hjw_steering(psi, e)
    assert iso.shape == (5, 3)
    assert np.abs(iso.conj().T @ iso - np.eye(3)).max() <= 1e-10
    assert np.abs(steered_state(psi, iso).amps - ensemble_lift(e).amps).max() <= 1e-9


def test_hjw_rejects_wrong_ensemble():
    rho = DensityMatrix((2,), np.diag([0.7, 0.3]))
    e = Ensemble.from_terms((2,), [0.5, 0.5], [[np.array([1, 0])], [np.array([0, 1])]])
    with pytest.raises(EnsembleMismatch):
        hjw_steering(purify(rho), e)


def test_purifications_related_by_isometry():
    rng = rng_for(32)
    rho = DensityMatrix((2, 2), random_density(rng, (2, 2), rank=3))
    p1 = purify(rho)
    perm = np.eye(3)[[2, 0, 1]]
    p2 = apply_local(p1, 2, perm)
    flat1, flat2 = regroup(p1, [[0, 1], [2]]), regroup(p2, [[0, 1], [2]])
    cols = flat1.tensor
    probs = np.sum(np.abs(cols) ** 2, axis=0)
    e = Ensemble.from_terms((4,), probs, [[cols[:, k]] for k in range(3)])
    iso = hjw_steering(flat2, e)
    assert np.abs(steered_state(flat2, iso).amps - flat1.amps).max() <= 1e-9


def test_ensemble_reduce_cases():
    a, b = np.array([1, 0]), np.array([0, 1])
    dup = Ensemble.from_terms((2, 2), [0.25, 0.25, 0.5], [[a, a], [a * 1j, a], [b, b]])
    red = ensemble_reduce(dup)
    assert len(red) == 2 and np.allclose(sorted(red.probs), [0.5, 0.5])
    zero = Ensemble.from_terms((2, 2), [0.0, 1.0], [[a, b], [b, a]])
    assert len(ensemble_reduce(zero)) == 1
    clean = Ensemble.from_terms((2, 2), [0.3, 0.7], [[a, b], [b, a]])
    out = ensemble_reduce(clean)
    assert np.array_equal(out.probs, clean.probs)
    assert all(np.array_equal(x.vector, y.vector) for x, y in zip(out.members, clean.members))


def test_nobs_diagonal_and_same_b():
    e3 = np.eye(3)
    diag = Ensemble.from_terms((3, 3), [0.5, 0.3, 0.2], [[e3[i], e3[i]] for i in range(3)])
    lay = nobs_normal_form(diag)
    assert lay.s == 3 and lay.t == (1, 1, 1)
    assert lay.check_invariants() == []
    bvec = np.array([0.6, 0.8])
    same = Ensemble.from_terms((2, 2), [0.5, 0.5], [[bvec, np.array([1, 0])], [bvec, np.array([0, 1])]])
    lay = nobs_normal_form(same)
    assert lay.s == 1 and lay.t == (2,)


def test_nobs_rejects_violation():
    e = Ensemble.from_terms((2, 2), [0.5, 0.5], [[np.array([1, 0]), np.array([1, 0])], [np.array([0, 1]), np.array([0, 1])]])
    with pytest.raises(BranchViolation):
        nobs_normal_form(e, [[None, "VIOLATION"], [None, None]])


@pytest.mark.parametrize("seed", range(5))
def test_nobs_end_to_end(seed):
    psi, e = random_layered(seed)
    lifted = lift_ensemble(psi, e)
    branches = branch_matrix(lifted)
    lay = nobs_normal_form(e, branches)
    assert lay.s == 2 and lay.t == (2, 1)
    assert lay.check_invariants() == []
    rho_ab = partial_trace(lay.lifted_state(), [2])
    assert np.abs(rho_ab.mat - partial_trace(lifted, [2]).mat).max() <= 1e-9
    witness = lay.separable_witness()
    assert np.abs(witness.density().mat - rho_ab.mat).max() <= 1e-9
    c = classify_bipartite(rho_ab, witness=witness)
    assert c.verdict is Verdict.SEPARABLE
