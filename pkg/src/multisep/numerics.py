"""Dense complex linear algebra with a fixed tolerance and phase policy.

``herm_eig`` and ``svd`` are thin, validated wrappers around LAPACK (via numpy)
that add the reproducibility conventions the rest of the package relies on:

* eigenvalues ascending, singular values descending, ties kept in input order;
* every eigen/singular vector is rephased so that its first component of largest
  modulus is real and non-negative.

``jacobi_eigh`` is an independent cyclic-Jacobi eigensolver. It is slower and is
used as a cross-check oracle in the test-suite and for small matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NotHermitian


@dataclass(frozen=True)
class Tolerance:
    """Global numerical tolerances.

    ``eps`` decides equalities such as PPT/NPT and orthogonality;
    ``reconstruction_eps`` bounds factorisation residuals.
    """

    eps: float = 1e-9
    reconstruction_eps: float = 1e-10

    def __post_init__(self):
        if not (0.0 < self.eps < 1e-3):
            raise ValueError(f"eps must satisfy 0 < eps < 1e-3, got {self.eps!r}")
        if not (0.0 < self.reconstruction_eps < 1e-3):
            raise ValueError(
                f"reconstruction_eps must satisfy 0 < eps < 1e-3, got {self.reconstruction_eps!r}"
            )


DEFAULT_TOL = Tolerance()

# relative eigenvalue gap below which eigenvectors are reported as one cluster
CLUSTER_GAP = 1e-8


def as_tol(tol: Tolerance | float | None) -> Tolerance:
    if tol is None:
        return DEFAULT_TOL
    if isinstance(tol, Tolerance):
        return tol
    return Tolerance(eps=float(tol))


def check_finite(a: np.ndarray, what: str = "input") -> None:
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{what} contains NaN or Inf")


def fro_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def canonical_phase(vectors: np.ndarray) -> np.ndarray:
    """Return the phases that make each column's leading entry real and >= 0.

    The leading entry is the first component whose modulus equals the column's
    largest modulus (up to a relative 1e-10, so numerical noise does not flip
    the choice between equal-modulus entries).
    """
    mod = np.abs(vectors)
    phases = np.ones(vectors.shape[1], dtype=complex)
    for k in range(vectors.shape[1]):
        col = mod[:, k]
        top = col.max()
        if top == 0.0:
            continue
        idx = int(np.flatnonzero(col >= top * (1.0 - 1e-10))[0])
        z = vectors[idx, k]
        phases[k] = np.conj(z) / abs(z)
    return phases


def _hermitian_check(h: np.ndarray, tol: Tolerance) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {h.shape}")
    check_finite(h, "matrix")
    dev = np.abs(h - h.conj().T).max() if h.size else 0.0
    if dev > tol.eps * max(1.0, fro_norm(h)):
        raise NotHermitian(f"max |H - H^dag| = {dev:.3e} exceeds tolerance")
    return h


def herm_eig(h: np.ndarray, tol: Tolerance | float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(values, V)`` with ``values`` ascending and ``H = V diag(values) V^dag``.
    Columns of ``V`` follow the package phase convention.

    Raises
    ------
    NotHermitian
        If ``max|H - H^dag|`` exceeds ``eps * max(1, ||H||_F)``.
    NonFinite
        On NaN/Inf entries.
    """
    tol = as_tol(tol)
    h = _hermitian_check(h, tol)
    hs = 0.5 * (h + h.conj().T)
    values, vecs = np.linalg.eigh(hs)
    order = np.argsort(values, kind="stable")
    values = values[order]
    vecs = vecs[:, order]
    vecs = vecs * canonical_phase(vecs)[None, :]
    return values, vecs


def eigen_clusters(values: np.ndarray, scale: float, rel_gap: float = CLUSTER_GAP) -> np.ndarray:
    """Label sorted eigenvalues with cluster ids; neighbours closer than
    ``rel_gap * max(scale, 1e-300)`` share an id."""
    ids = np.zeros(len(values), dtype=int)
    gap = rel_gap * max(scale, 1e-300)
    for k in range(1, len(values)):
        ids[k] = ids[k - 1] + (0 if abs(values[k] - values[k - 1]) < gap else 1)
    return ids


def svd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin singular value decomposition ``M = U diag(sigma) V^dag``.

    ``sigma`` is descending; the phase convention is applied to the columns of
    ``U`` and compensated on ``V`` so the product is unchanged.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    check_finite(m, "matrix")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    order = np.argsort(-s, kind="stable")
    u, s, vh = u[:, order], s[order], vh[order, :]
    ph = canonical_phase(u)
    u = u * ph[None, :]
    v = (vh.conj().T) * ph[None, :]
    return u, s, v


def null_space(vectors: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of span(vectors) in C^dim."""
    if vectors.size == 0 or vectors.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    q, _ = np.linalg.qr(vectors, mode="complete")
    rank = vectors.shape[1]
    comp = q[:, rank:]
    return comp * canonical_phase(comp)[None, :] if comp.shape[1] else comp


def jacobi_eigh(h: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Each rotation diagonalises the 2x2 block ``[[a, b], [b*, d]]`` exactly with
    ``tan(2 theta) = 2|b| / (a - d)``. Sweeps stop once the off-diagonal
    Frobenius norm drops below ``tol * ||H||_F``.
    """
    a = np.array(h, dtype=complex)
    check_finite(a, "matrix")
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(fro_norm(a), 1e-300)
    for _ in range(max_sweeps):
        off = fro_norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                if abs(b) <= 1e-300:
                    continue
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * math.atan2(2.0 * abs(b), app - aqq)
                c, s = math.cos(theta), math.sin(theta)
                ph = b / abs(b)
                j = np.array([[c, -ph * s], [np.conj(ph) * s, c]], dtype=complex)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ j
    values = np.real(np.diag(a))
    order = np.argsort(values, kind="stable")
    v = v[:, order]
    return values[order], v * canonical_phase(v)[None, :]
