import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multisep.fixtures import epr, ghz, random_gsd, random_pure, rng_for, tiles, w_state
from multisep.numerics import jacobi_eigh
from multisep.purification import Ensemble, purify
from multisep.separability import (
    EigenSeparability,
    Verdict,
    classify_bipartite,
    eigenseparable_check,
    multiseparability_report,
    ppt_report,
    product_seesaw,
    range_product_search,
    range_projector,
    realignment_value,
    triangle_classify,
)
from multisep.states import DensityMatrix, basis_state, partial_trace

from conftest import random_unitary


def random_separable(rng, dims, m):
    factors = []
    for _ in range(m):
        fs = []
        for d in dims:
            v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            fs.append(v)
        factors.append(fs)
    p = rng.dirichlet(np.ones(m))
    return Ensemble.from_terms(dims, p, factors)


def w_ab_oracle():
    # rho_AB of W written out by hand: (|00><00| + 2|psi+><psi+|)/3
    rho = np.zeros((4, 4))
    rho[0, 0] = 1 / 3
    rho[1, 1] = rho[2, 2] = rho[1, 2] = rho[2, 1] = 1 / 3
    pt = rho.copy()
    pt[1, 2] = pt[2, 1] = 0
    pt[0, 3] = pt[3, 0] = 1 / 3
    return rho, pt


def test_ppt_examples():
    rep = ppt_report(partial_trace(ghz(), [2]))
    assert rep.is_ppt and abs(rep.min_eigenvalue) < 1e-12
    rho, pt = w_ab_oracle()
    assert np.allclose(partial_trace(w_state(), [2]).mat, rho)
    oracle = jacobi_eigh(pt)[0].min()
    assert abs(oracle - (1 - math.sqrt(5)) / 6) < 1e-12
    rep = ppt_report(partial_trace(w_state(), [2]))
    assert not rep.is_ppt and abs(rep.min_eigenvalue - oracle) < 1e-9
    assert ppt_report(tiles()).min_eigenvalue >= -1e-12


def test_realignment_examples():
    assert math.isclose(realignment_value(basis_state((2, 2), (0, 0)).density()), 1.0, abs_tol=1e-12)
    assert math.isclose(realignment_value(epr().density()), 2.0, abs_tol=1e-12)
    assert math.isclose(realignment_value(DensityMatrix((2, 2), np.eye(4) / 4)), 0.5, abs_tol=1e-12)


def test_realignment_separable_bound():
    rng = rng_for(77)
    for k in range(100):
        dims = [(2, 2), (2, 3), (3, 3)][k % 3]
        e = random_separable(rng, dims, 1 + k % 5)
        assert realignment_value(e.density()) <= 1 + 1e-9
        assert ppt_report(e.density()).min_eigenvalue >= -1e-10


def grid_oracle_epr():
    # brute force over a Bloch-sphere grid for both qubits (poles and equator included)
    theta = np.linspace(0, np.pi, 13)
    phase = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    t, f = np.meshgrid(theta, phase)
    qubits = np.stack([np.cos(t / 2).ravel(), (np.exp(1j * f) * np.sin(t / 2)).ravel()], axis=1)
    amps = np.einsum("ia,jb,ab->ij", qubits.conj(), qubits.conj(), epr().amps.reshape(2, 2))
    return float(np.max(np.abs(amps) ** 2))


def test_range_search_examples():
    prod = basis_state((2, 3), (1, 2))
    ov, (phi, chi) = range_product_search(prod.density())
    assert ov > 1 - 1e-9
    assert abs(abs(np.vdot(np.kron(phi, chi), prod.amps)) - 1) < 1e-6
    ov, _ = range_product_search(epr().density())
    assert abs(grid_oracle_epr() - 0.5) < 1e-12
    assert abs(ov - 0.5) < 1e-9
    ov, _ = range_product_search(tiles(), restarts=32)
    assert ov < 1 - 1e-3


def test_range_search_finds_planted_product():
    rng = rng_for(5)
    for _ in range(10):
        e = random_separable(rng, (3, 3), 3)
        assert range_product_search(e.density())[0] >= 1 - 1e-9


def test_seesaw_monotone():
    rho = DensityMatrix((3, 3), tiles().mat)
    res = product_seesaw(range_projector(rho), (3, 3), restarts=4, iters=50, seed=1)
    h = np.array(res.history)
    assert np.all(np.diff(h) >= -1e-12)


def test_eigenseparability_examples():
    rho = DensityMatrix((2, 2), np.diag([0.5, 0, 0, 0.5]))
    assert eigenseparable_check(rho) is EigenSeparability.TRUE
    mix = 0.6 * epr().density().mat + 0.4 * np.eye(4) / 4
    assert eigenseparable_check(DensityMatrix((2, 2), mix)) is EigenSeparability.FALSE
    diag = DensityMatrix((2, 3), np.diag([0.3, 0.25, 0.2, 0.15, 0.07, 0.03]))
    assert eigenseparable_check(diag) is EigenSeparability.TRUE


def test_classify_examples():
    c = classify_bipartite(partial_trace(ghz(), [2]))
    assert c.verdict is Verdict.SEPARABLE and c.criterion == "ppt-low-dimension"
    c = classify_bipartite(epr().density())
    assert c.verdict is Verdict.NPT and abs(c.value + 0.5) < 1e-12
    assert classify_bipartite(tiles()).verdict is Verdict.PPT_ENTANGLED


def test_classify_with_witness():
    e = random_separable(rng_for(9), (3, 3), 12)
    c = classify_bipartite(e.density(), witness=e)
    assert c.verdict is Verdict.SEPARABLE and c.criterion == "product-ensemble-witness"


def test_classify_never_overclaims_full_rank_separable():
    # a generic full-rank separable 3x3 state has no certificate without a witness
    e = random_separable(rng_for(10), (3, 3), 12)
    c = classify_bipartite(e.density(), restarts=4, iters=50)
    assert c.verdict in (Verdict.SEPARABLE, Verdict.UNDETERMINED)


def test_classify_local_unitary_invariance():
    rng = rng_for(12)
    states = [tiles(), epr().density(), partial_trace(random_gsd((3, 3, 3), 3, 1), [0])]
    for rho in states:
        da, db = rho.dims
        u = np.kron(random_unitary(rng, da), random_unitary(rng, db))
        moved = DensityMatrix(rho.dims, u @ rho.mat @ u.conj().T)
        a, b = classify_bipartite(rho), classify_bipartite(moved)
        assert a.verdict is b.verdict
        if a.criterion == b.criterion and a.criterion not in ("eigen-product-witness",):
            assert abs(a.value - b.value) < 1e-8


def test_multiseparability_report():
    for rep in multiseparability_report(ghz()):
        assert rep.ppt.is_ppt
        assert all(c.verdict is Verdict.SEPARABLE for _, c in rep.classifications)
    for rep in multiseparability_report(w_state()):
        assert not rep.ppt.is_ppt
    for rep in multiseparability_report(random_gsd((2, 3, 2, 2), 2, 4)):
        assert rep.ppt.is_ppt


def test_triangle_examples():
    t = triangle_classify(ghz())
    assert all(c.verdict is Verdict.SEPARABLE for c in t.sides.values())
    assert t.gsd.decomposable and not t.exclusion_flags
    t = triangle_classify(w_state())
    assert all(c.verdict is Verdict.NPT for c in t.sides.values()) and not t.exclusion_flags
    t = triangle_classify(purify(tiles()))
    assert t.sides["AB"].verdict is Verdict.PPT_ENTANGLED
    assert t.sides["BC"].verdict is not Verdict.SEPARABLE
    assert t.sides["AC"].verdict is not Verdict.SEPARABLE
    assert not t.exclusion_flags and not t.gsd.decomposable


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), kind=st.sampled_from(["gsd", "pure"]))
def test_triangle_never_flags(seed, kind):
    psi = random_gsd((3, 3, 3), None, seed) if kind == "gsd" else random_pure((2, 2, 3), seed)
    assert triangle_classify(psi, restarts=8, iters=100).exclusion_flags == ()
