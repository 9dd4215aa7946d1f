"""Shared constructions for the purification and proofcheck tests."""

import numpy as np

from multisep.fixtures import random_orthonormal, rng_for
from multisep.purification import Ensemble
from multisep.states import PureState


def random_layered(seed, db=2, dc=3, layer_sizes=(2, 1)):
    """A B,C product ensemble grouped into layers sharing a B factor, with C
    factors orthogonal across layers, plus a state realizing it.

    Returns ``(psi, ensemble)`` where ``psi`` has A of dimension ``m`` and its
    A vectors are random orthonormal, so ``Tr_A psi`` equals the ensemble average.
    """
    rng = rng_for(seed)
    m = sum(layer_sizes)
    # split C into orthogonal blocks, one per layer
    cbasis = random_orthonormal(rng, dc, dc)
    blocks = np.array_split(np.arange(dc), len(layer_sizes))
    probs = rng.dirichlet(np.ones(m))
    factors = []
    for size, block in zip(layer_sizes, blocks):
        mu = rng.standard_normal(db) + 1j * rng.standard_normal(db)
        for _ in range(size):
            coeff = rng.standard_normal(len(block)) + 1j * rng.standard_normal(len(block))
            factors.append((mu, cbasis[:, block] @ coeff))
    e = Ensemble.from_terms((db, dc), probs, factors)
    chi = random_orthonormal(rng, m, m)
    amps = sum(np.sqrt(mem.p) * np.kron(chi[:, i], mem.vector) for i, mem in enumerate(e.members))
    return PureState.from_vector(amps, (m, db, dc)), e
