"""States in a generic SLOCC class and their local-unitary standard form.

A state is stored in factored form: a seed plus one invertible 3x3 factor
per party.  All local-unitary information sits in the three Gram matrices
``G_i = g_i^dag g_i`` (trace-normalized), and the residual discrete freedom
of conjugating all three Grams by one of the nine symmetry operators is
fixed by a deterministic phase-window rule on the Gram coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import resolve_tol
from .pauli import (
    COORD_ORDER,
    INDEX_ORDER,
    PAULIS,
    apply3,
    conj_phase,
    dagger,
    frob,
    idx_neg,
    is_hermitian,
    is_invertible,
    pauli_coords,
)
from .seeds import GenericityReport, SeedParams, build_seed, check_generic

#: Absolute threshold below which a trace-normalized Gram coordinate is
#: treated as vanishing when choosing gauge-fixing entries.
STD_SUPPORT_TOL = 1e-10

#: The phase window assigning a coordinate's argument to a unique residue
#: class is [-snap, 2*pi/3 - snap); the snap keeps real-positive entries
#: (argument 0, which floats may render as -1e-16) inside one window.
STD_WINDOW_SNAP = 1e-7

#: Comparison tolerance between standard-form coordinate tables.
STD_COMPARE_ATOL = 1e-9


class SeedMismatchError(ValueError):
    """Raised when two states' canonical seed parameters differ.

    Equivalence is only decided within a single SLOCC class; relating
    states across different seeds is out of scope.
    """


@dataclass(frozen=True)
class GenericState:
    """A seed plus one invertible factor per party.

    The represented 27-component vector is ``(g1 (x) g2 (x) g3)|seed>``.
    Construction validates that the seed is generic and every factor
    invertible; the stored arrays are frozen copies.
    """

    seed: SeedParams
    factors: tuple[np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self) -> None:
        report = check_generic(self.seed)
        if not report.generic:
            names = ", ".join(name for name, _ in report.violations)
            raise ValueError(f"seed is not generic (violated: {names})")
        mats = []
        for i, g in enumerate(self.factors):
            g = np.asarray(g, dtype=complex)
            if g.shape != (3, 3):
                raise ValueError(f"factor {i} must be 3x3, got {g.shape}")
            if not is_invertible(g):
                raise ValueError(f"factor {i} is numerically singular")
            g = g.copy()
            g.setflags(write=False)
            mats.append(g)
        object.__setattr__(self, "factors", tuple(mats))

    def genericity(self) -> GenericityReport:
        return check_generic(self.seed)


def assemble(state: GenericState) -> np.ndarray:
    """The represented 27-component vector (not normalized)."""
    g1, g2, g3 = state.factors
    return apply3(g1, g2, g3, build_seed(state.seed))


@dataclass(frozen=True)
class GramTriple:
    """Trace-normalized Gram matrices of the three factors, with their
    coordinates in the displacement basis (shape (3, 8), coordinate order).

    The identity component of each Gram is exactly 1/3 and is left
    implicit; Hermiticity ties coordinates at k and -k together, so they
    vanish only in pairs.
    """

    mats: tuple[np.ndarray, np.ndarray, np.ndarray]
    coords: np.ndarray

    def __post_init__(self) -> None:
        mats = []
        for i, m in enumerate(self.mats):
            m = np.asarray(m, dtype=complex)
            if not is_hermitian(m, 1e-9):
                raise ValueError(f"Gram {i} is not Hermitian")
            tr = np.trace(m).real
            if abs(tr - 1.0) > 1e-9:
                raise ValueError(f"Gram {i} is not trace-normalized (trace {tr})")
            m = m.copy()
            m.setflags(write=False)
            mats.append(m)
        object.__setattr__(self, "mats", tuple(mats))
        c = np.asarray(self.coords, dtype=complex).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)


def gram_triple(m1: np.ndarray, m2: np.ndarray, m3: np.ndarray) -> GramTriple:
    """Build a :class:`GramTriple` from three positive matrices,
    normalizing each to unit trace."""
    mats = []
    coords = np.empty((3, 8), dtype=complex)
    for i, m in enumerate((m1, m2, m3)):
        m = np.asarray(m, dtype=complex)
        tr = np.trace(m).real
        if tr <= 0:
            raise ValueError(f"Gram {i} has non-positive trace")
        m = m / tr
        _, coords[i] = pauli_coords(m)
        mats.append(m)
    return GramTriple(tuple(mats), coords)


def gram(state: GenericState) -> GramTriple:
    """Gram triple ``g_i^dag g_i`` of a state's factors, trace-normalized."""
    return gram_triple(*(dagger(g) @ g for g in state.factors))


def seed_gram() -> GramTriple:
    """The Gram triple of a bare seed (identity factors): I/3 throughout."""
    third = np.eye(3, dtype=complex) / 3.0
    return gram_triple(third, third, third)


# ---------------------------------------------------------------------------
# Factoring Gram matrices
# ---------------------------------------------------------------------------

def positive_factor(g: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Positive square root of a positive-definite matrix.

    The unique positive factor of a Gram matrix; all other factors with the
    same Gram are unitary dressings of it.
    """
    g = np.asarray(g, dtype=complex)
    if not is_hermitian(g, 1e-9):
        raise ValueError("matrix is not Hermitian")
    w, u = np.linalg.eigh((g + dagger(g)) / 2.0)
    if w[0] <= resolve_tol(tol) * max(abs(w[-1]), 1e-300):
        raise ValueError(f"matrix is not positive-definite (min eigenvalue {w[0]:.3e})")
    return (u * np.sqrt(w)) @ dagger(u)


def span_factor(m: np.ndarray, w: tuple[int, int], tol: float | None = None) -> np.ndarray:
    """Positive factor of a matrix confined to ``span{I, S_w, S_{-w}}``.

    The three spanning operators commute, so they diagonalize in a common
    orthonormal basis; the factor is the entrywise square root there.  The
    result is again confined to the span and commutes with ``S_{+-w}``.
    """
    if w == (0, 0):
        raise ValueError("the span direction must be a nonzero index")
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, 1e-9):
        raise ValueError("matrix is not Hermitian")
    t = resolve_tol(tol)
    s = PAULIS[w]
    cube = s @ s @ s
    if np.linalg.norm(cube - cube[0, 0] * np.eye(3)) > 1e-12:
        raise RuntimeError("displacement operator cube is not scalar")
    # Hermitian combination with guaranteed nondegenerate spectrum: the
    # eigenphases of S_w are cube roots of cube[0,0], equally spaced, so
    # offsetting by pi/9 keeps the three cosines distinct.
    theta = np.angle(cube[0, 0]) / 3.0 + np.pi / 9.0
    herm = np.exp(-1j * theta) * s + np.exp(1j * theta) * dagger(s)
    _, u = np.linalg.eigh(herm)
    d = dagger(u) @ m @ u
    diag = np.diag(d)
    off = float(np.linalg.norm(d - np.diag(diag)))
    if off > max(t * max(frob(m), 1e-300), 1e-12):
        raise ValueError(f"matrix is not confined to the span (off-diagonal {off:.3e})")
    vals = diag.real
    if vals.min() <= t * max(abs(vals).max(), 1e-300):
        raise ValueError(f"matrix is not positive-definite on the span (min {vals.min():.3e})")
    return (u * np.sqrt(vals)) @ dagger(u)


# ---------------------------------------------------------------------------
# Standard form under the residual symmetry gauge
# ---------------------------------------------------------------------------

def _gauge_table() -> np.ndarray:
    """tab[pos, li]: phase of coordinate COORD_ORDER[pos] under gauge li."""
    tab = np.empty((8, 9), dtype=complex)
    for pos, k in enumerate(COORD_ORDER):
        for li, l in enumerate(INDEX_ORDER):
            tab[pos, li] = conj_phase(k, l)
    return tab


_GAUGE_TABLE = _gauge_table()


def _in_window(theta: float) -> bool:
    """Whether an argument lies in the canonical window [-snap, 2pi/3 - snap)."""
    t = (theta + STD_WINDOW_SNAP) % (2.0 * np.pi)
    return bool(t < 2.0 * np.pi / 3.0)


def _same_line(k1: tuple[int, int], k2: tuple[int, int]) -> bool:
    return k2 == k1 or k2 == idx_neg(k1)


def _lex_key(coords: np.ndarray) -> tuple:
    # Quantized so float noise cannot drive the tie-break: gauges that
    # differ anywhere above the snap are separated by the key, and gauges
    # that agree to the snap everywhere give coordinate tables equal far
    # below the comparison tolerance, so the choice among them is moot.
    flat = coords.ravel()
    return tuple(np.round(np.stack([flat.real, flat.imag], axis=-1).ravel(), 12).tolist())


def standardize_coords(coords: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """Pick the canonical gauge among the nine symmetry conjugations.

    Scanning parties then coordinates, the first entry above the support
    threshold must have its argument inside the canonical window, which
    selects three of the nine gauges; the next thresholded entry whose
    index is independent of the first selects one of those three.  Any
    residual tie (possible only when the support is degenerate, where the
    surviving coordinate tables agree) is broken lexicographically.
    """
    coords = np.asarray(coords, dtype=complex)
    variants = coords[None, :, :] * _GAUGE_TABLE.T[:, None, :]  # (9, 3, 8)

    fixers: list[tuple[int, int, tuple[int, int]]] = []
    for party in range(3):
        for pos in range(8):
            if abs(coords[party, pos]) > STD_SUPPORT_TOL:
                k = COORD_ORDER[pos]
                if not fixers:
                    fixers.append((party, pos, k))
                elif len(fixers) == 1 and not _same_line(fixers[0][2], k):
                    fixers.append((party, pos, k))

    candidates = list(range(9))
    for party, pos, _ in fixers[:2]:
        candidates = [
            li for li in candidates if _in_window(float(np.angle(variants[li, party, pos])))
        ]
    best = min(candidates, key=lambda li: _lex_key(variants[li]))
    return variants[best], INDEX_ORDER[best]


@dataclass(frozen=True)
class StandardForm:
    """Gauge-fixed Gram coordinates: the complete local-unitary invariant
    of a state within its seed's SLOCC class."""

    seed: SeedParams
    coords: np.ndarray
    gauge: tuple[int, int]

    def __post_init__(self) -> None:
        c = np.asarray(self.coords, dtype=complex).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def close_to(self, other: "StandardForm", atol: float = STD_COMPARE_ATOL) -> bool:
        if not self.seed.close_to(other.seed, atol):
            raise SeedMismatchError("standard forms belong to different seeds")
        return bool(np.allclose(self.coords, other.coords, rtol=0.0, atol=atol))


def standard_form_of_gram(seed: SeedParams, gt: GramTriple) -> StandardForm:
    """Standard form of a Gram triple within the class of ``seed``."""
    if not seed.is_canonical():
        raise ValueError("seed parameters must be in canonical gauge")
    coords, gauge = standardize_coords(gt.coords)
    return StandardForm(seed=seed, coords=coords, gauge=gauge)


def standard_form(state: GenericState) -> StandardForm:
    """Standard form of a state (unitary factor dressings drop out)."""
    return standard_form_of_gram(state.seed, gram(state))


def lu_equivalent(s1: GenericState, s2: GenericState, atol: float = STD_COMPARE_ATOL) -> bool:
    """Whether two states of the same seed are local-unitary equivalent.

    Raises :class:`SeedMismatchError` when the canonical seed parameters
    differ; cross-seed comparisons are not supported.
    """
    if not s1.seed.close_to(s2.seed, atol):
        raise SeedMismatchError(
            "states have different canonical seed parameters; "
            "cross-seed equivalence is not decided"
        )
    return standard_form(s1).close_to(standard_form(s2), atol)


# ---------------------------------------------------------------------------
# Party relabeling
# ---------------------------------------------------------------------------

def _parity(perm: tuple[int, int, int]) -> int:
    inv = sum(
        1
        for i in range(3)
        for j in range(i + 1, 3)
        if perm[i] > perm[j]
    )
    return inv % 2


def permute_state(state: GenericState, perm: tuple[int, int, int]) -> GenericState:
    """Relabel parties: new party ``i`` holds old party ``perm[i]``.

    Cyclic relabelings leave the seed untouched; transpositions swap the
    roles of the b and c amplitude families, so the seed becomes
    ``(a, c, b)``.  The represented vector is the party-permuted original.
    """
    if sorted(perm) != [0, 1, 2]:
        raise ValueError(f"not a permutation of (0, 1, 2): {perm}")
    seed = state.seed
    if _parity(perm) == 1:
        seed = SeedParams(seed.a, seed.c, seed.b)
    factors = tuple(state.factors[p] for p in perm)
    return GenericState(seed=seed, factors=factors)  # type: ignore[arg-type]


def permute_vector(v: np.ndarray, perm: tuple[int, int, int]) -> np.ndarray:
    """Apply a party relabeling to a 27-component vector."""
    t = v.reshape(3, 3, 3)
    return np.transpose(t, perm).reshape(27)


def ray_distance(v1: np.ndarray, v2: np.ndarray) -> float:
    """Distance between the rays of two vectors: ``min_phase ||v1' - e^{i t} v2'||``
    over normalized representatives.  Zero iff the vectors are proportional.

    Computed as an explicit phase-aligned difference; the closed form
    ``sqrt(2 - 2|<v1, v2>|)`` loses half the significant digits to
    cancellation precisely in the near-match regime that matters here.
    """
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if n1 == 0 or n2 == 0:
        raise ValueError("ray distance of a zero vector is undefined")
    u1, u2 = v1 / n1, v2 / n2
    overlap = np.vdot(u2, u1)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u1 - phase * u2))
