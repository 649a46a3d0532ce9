"""Generalized Pauli (Weyl-Heisenberg) algebra for a single qutrit.

The nine displacement operators ``S_k = X^k1 Z^k2`` with ``k = (k1, k2)``
ranging over Z3 x Z3 form an orthogonal basis of the 3x3 complex matrices
(``tr(S_k^dag S_l) = 3 delta_kl``) and, applied to all three parties at
once, the full local symmetry group of the generic three-qutrit seed
states.  All phase relations between the operators (conjugation phases,
composition phases, adjoint phases) are computed numerically from the
matrices at import time and checked against their defining identities;
nothing is hard-coded.
"""

from __future__ import annotations

import numpy as np

from .config import resolve_tol

OMEGA = np.exp(2j * np.pi / 3)

#: Canonical enumeration of Z3 x Z3 used for every 9-component object in the
#: package (probability vectors, depolarization spectra, vertex labels).
#: The zero index comes first; the remaining eight positions keep negation
#: partners adjacent: positions (1,2), (3,4), (5,6), (7,8) are the pairs
#: {k, -k} for k = (1,0), (0,1), (1,1), (2,1) respectively.
INDEX_ORDER: tuple[tuple[int, int], ...] = (
    (0, 0),
    (1, 0), (2, 0),
    (0, 1), (0, 2),
    (1, 1), (2, 2),
    (2, 1), (1, 2),
)

#: The eight nonzero indices, in the order used for coordinate vectors.
COORD_ORDER: tuple[tuple[int, int], ...] = INDEX_ORDER[1:]

INDEX_POS = {k: i for i, k in enumerate(INDEX_ORDER)}
COORD_POS = {k: i for i, k in enumerate(COORD_ORDER)}

#: One representative per negation pair {k, -k} of the nonzero indices.
PAIR_REPS: tuple[tuple[int, int], ...] = ((1, 0), (0, 1), (1, 1), (1, 2))


def idx_add(k: tuple[int, int], l: tuple[int, int]) -> tuple[int, int]:
    """Add two group indices modulo 3."""
    return ((k[0] + l[0]) % 3, (k[1] + l[1]) % 3)


def idx_neg(k: tuple[int, int]) -> tuple[int, int]:
    """Negate a group index modulo 3."""
    return ((-k[0]) % 3, (-k[1]) % 3)


def pair_rep(k: tuple[int, int]) -> tuple[int, int]:
    """Canonical representative of the negation pair {k, -k} (k nonzero)."""
    if k == (0, 0):
        raise ValueError("the zero index has no negation pair")
    return k if k in PAIR_REPS else idx_neg(k)


# The two generators.  X is the cyclic shift with X|j> = |j-1 mod 3>,
# Z multiplies |j> by omega^j.
X = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex)
Z = np.diag([1.0 + 0j, OMEGA, OMEGA**2])


def pauli_matrix(k: tuple[int, int]) -> np.ndarray:
    """The displacement operator ``X^k1 Z^k2`` as a fresh 3x3 array."""
    m = np.linalg.matrix_power(X, k[0] % 3) @ np.linalg.matrix_power(Z, k[1] % 3)
    return np.ascontiguousarray(m)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


#: Cache of all nine operators, keyed by index.  Read-only arrays.
PAULIS: dict[tuple[int, int], np.ndarray] = {
    k: _frozen(pauli_matrix(k)) for k in INDEX_ORDER
}


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def frob(m: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def _build_phase_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compute the conjugation, adjoint and composition phase tables.

    conj[k, l]    : phase c with  S_l^dag S_k S_l = c S_k
    adj[k]        : phase c with  S_k^dag = c S_{-k}
    comp[l, m]    : phase c with  S_l S_m = c S_{l+m}
    """
    conj = np.zeros((9, 9), dtype=complex)
    adj = np.zeros(9, dtype=complex)
    comp = np.zeros((9, 9), dtype=complex)
    for i, k in enumerate(INDEX_ORDER):
        sk = PAULIS[k]
        adj[i] = np.trace(dagger(PAULIS[idx_neg(k)]) @ dagger(sk)) / 3.0
        for j, l in enumerate(INDEX_ORDER):
            sl = PAULIS[l]
            conj[i, j] = np.trace(dagger(sk) @ dagger(sl) @ sk @ sl) / 3.0
            comp[i, j] = np.trace(dagger(PAULIS[idx_add(k, l)]) @ sk @ sl) / 3.0
    return conj, adj, comp


_CONJ_TABLE, _ADJ_TABLE, _COMP_TABLE = _build_phase_tables()


def conj_phase(k: tuple[int, int], l: tuple[int, int]) -> complex:
    """Phase ``c`` such that ``S_l^dag S_k S_l = c S_k``.

    Always a cube root of unity; conjugation permutes no operators, it only
    dresses them with phases.
    """
    return complex(_CONJ_TABLE[INDEX_POS[k], INDEX_POS[l]])


def dagger_phase(k: tuple[int, int]) -> complex:
    """Phase ``c`` such that ``S_k^dag = c S_{-k}``."""
    return complex(_ADJ_TABLE[INDEX_POS[k]])


def group_compose(l: tuple[int, int], m: tuple[int, int]) -> tuple[tuple[int, int], complex]:
    """Product index and phase: ``S_l S_m = c S_{l+m}``."""
    return idx_add(l, m), complex(_COMP_TABLE[INDEX_POS[l], INDEX_POS[m]])


def _check_tables() -> None:
    """Assert the defining identities of the phase tables (import-time)."""
    for i, k in enumerate(INDEX_ORDER):
        sk = PAULIS[k]
        r = np.linalg.norm(dagger(sk) - _ADJ_TABLE[i] * PAULIS[idx_neg(k)])
        if r > 1e-12:
            raise RuntimeError(f"adjoint phase identity failed for {k}: {r}")
        for j, l in enumerate(INDEX_ORDER):
            sl = PAULIS[l]
            r = np.linalg.norm(dagger(sl) @ sk @ sl - _CONJ_TABLE[i, j] * sk)
            if r > 1e-12:
                raise RuntimeError(f"conjugation phase identity failed for {k},{l}: {r}")
            kl = idx_add(k, l)
            r = np.linalg.norm(sk @ sl - _COMP_TABLE[i, j] * PAULIS[kl])
            if r > 1e-12:
                raise RuntimeError(f"composition phase identity failed for {k},{l}: {r}")
            # orthogonality of the basis
            g = np.trace(dagger(sk) @ sl) / 3.0
            want = 1.0 if i == j else 0.0
            if abs(g - want) > 1e-12:
                raise RuntimeError(f"orthogonality failed for {k},{l}: {g}")


_check_tables()


# ---------------------------------------------------------------------------
# Matrix predicates
# ---------------------------------------------------------------------------

def is_hermitian(m: np.ndarray, tol: float | None = None) -> bool:
    """Whether ``m`` is Hermitian relative to its Frobenius norm."""
    t = resolve_tol(tol)
    scale = max(frob(m), 1e-300)
    return frob(m - dagger(m)) <= t * scale


def is_positive_definite(m: np.ndarray, tol: float | None = None) -> bool:
    """Whether Hermitian ``m`` has strictly positive spectrum."""
    if not is_hermitian(m, tol):
        return False
    w = np.linalg.eigvalsh((m + dagger(m)) / 2.0)
    return bool(w[0] > 0.0)


def is_invertible(m: np.ndarray, tol: float | None = None) -> bool:
    """Whether ``|det m|`` clears the zero tolerance at the matrix's scale."""
    t = resolve_tol(tol)
    scale = max(frob(m) / np.sqrt(3.0), 1e-300)
    return bool(abs(np.linalg.det(m)) > t * scale**3)


# ---------------------------------------------------------------------------
# Coordinates in the displacement basis
# ---------------------------------------------------------------------------

def pauli_coords(m: np.ndarray) -> tuple[complex, np.ndarray]:
    """Expand a 3x3 matrix in the displacement basis.

    Returns ``(g0, g)`` with ``g0 = tr(m)/3`` and ``g`` the eight
    coefficients ``tr(S_k^dag m)/3`` for nonzero ``k`` in coordinate order,
    so that ``m = g0 I + sum_k g[k] S_k``.
    """
    g0 = complex(np.trace(m) / 3.0)
    g = np.array([np.trace(dagger(PAULIS[k]) @ m) / 3.0 for k in COORD_ORDER])
    return g0, g


def from_coords(g0: complex, g: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pauli_coords`."""
    m = g0 * np.eye(3, dtype=complex)
    for i, k in enumerate(COORD_ORDER):
        m = m + g[i] * PAULIS[k]
    return m


# ---------------------------------------------------------------------------
# Three-party helpers
# ---------------------------------------------------------------------------

def kron3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Kronecker product of three 3x3 matrices (27x27)."""
    return np.kron(np.kron(a, b), c)


def apply3(a: np.ndarray, b: np.ndarray, c: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply ``a (x) b (x) c`` to a 27-component vector without forming kron3."""
    t = v.reshape(3, 3, 3)
    out = np.einsum("ai,bj,ck,ijk->abc", a, b, c, t)
    return out.reshape(27)


def partial_gram(v: np.ndarray, party: int) -> np.ndarray:
    """Single-party reduced density matrix of a 27-component vector.

    ``party`` is 0-based.  The trace equals the squared norm of ``v``.
    """
    t = v.reshape(3, 3, 3)
    if party == 0:
        return np.einsum("ijk,ljk->il", t, t.conj())
    if party == 1:
        return np.einsum("ijk,imk->jm", t, t.conj())
    if party == 2:
        return np.einsum("ijk,ijm->km", t, t.conj())
    raise ValueError(f"party must be 0, 1 or 2, got {party}")
