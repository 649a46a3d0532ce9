"""Slow, independent cross-checks for the fast decision engines.

Two oracles live here.  ``brute_force_sep`` re-decides a separable
conversion instance by globally minimizing the mixing residual over the
probability simplex — exhaustive stationary-point enumeration over all
511 faces plus a vectorized projected-gradient sweep — without touching
the polytope machinery it is meant to audit.  ``numeric_symmetry_search``
hunts for product operators fixing a seed state by alternating least
squares from random starts, recovering the symmetry group numerically
instead of algebraically.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .pauli import INDEX_ORDER, PAULIS, dagger, kron3
from .seeds import SeedParams, build_seed
from .sep import SepInstance

#: A candidate distribution with residual at or below this certifies
#: feasibility outright.
WITNESS_TOL = 1e-9

#: Residuals above this from *both* search strategies certify
#: infeasibility; the band between the two thresholds is inconclusive.
REJECT_TOL = 1e-7

Pair = tuple[int, int]


@dataclass(frozen=True)
class OracleBudget:
    """Effort knobs for the randomized part of an oracle run."""

    starts: int = 10_000
    iters: int = 1_000
    rng_seed: int = 0


@dataclass(frozen=True)
class OracleVerdict:
    """Outcome of a brute-force feasibility decision.

    ``feasible`` is ``None`` when the best residual found lands between
    the witness and rejection thresholds.
    """

    feasible: bool | None
    best_residual: float
    sample_count: int
    witness: np.ndarray | None


@dataclass(frozen=True)
class SymmetrySearchReport:
    """What an alternating-least-squares sweep recovered."""

    found: tuple[Pair, ...]
    extras: int
    starts: int
    converged: int
    max_match_error: float


# ---------------------------------------------------------------------------
# Brute-force separable feasibility
# ---------------------------------------------------------------------------

def _mixing_system(instance: SepInstance) -> tuple[np.ndarray, np.ndarray]:
    """Real least-squares data (A, b) for ``A p = b`` over the simplex."""
    h = instance.target_gram.mats
    g = instance.source_gram.mats
    cols = []
    for k in INDEX_ORDER:
        s = PAULIS[k]
        sd = dagger(s)
        cols.append(kron3(sd @ h[0] @ s, sd @ h[1] @ s, sd @ h[2] @ s).ravel())
    d = np.array(cols).T
    target = kron3(*g).ravel()
    a = np.vstack([d.real, d.imag])
    b = np.concatenate([target.real, target.imag])
    return a, b


def _project_simplex(points: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    u = -np.sort(-points, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(1, points.shape[1] + 1)
    rho = np.count_nonzero(u - css / ind > 0, axis=1)
    theta = css[np.arange(len(points)), rho - 1] / rho
    return np.maximum(points - theta[:, None], 0.0)


def _face_minima(q: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, float]:
    """Global minimum of ``p^T q p - 2 c^T p`` over the simplex.

    The minimum lies in the relative interior of some face, where it is a
    stationary point of the face's equality-constrained problem; all 511
    face systems are solved and the feasible candidates compared.
    """
    n = q.shape[0]
    best_val = np.inf
    best_p = None
    for size in range(1, n + 1):
        for face in combinations(range(n), size):
            idx = list(face)
            kkt = np.zeros((size + 1, size + 1))
            kkt[:size, :size] = 2.0 * q[np.ix_(idx, idx)]
            kkt[:size, size] = 1.0
            kkt[size, :size] = 1.0
            rhs = np.concatenate([2.0 * c[idx], [1.0]])
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            p_face = sol[:size]
            if p_face.min() < -1e-10:
                continue
            p = np.zeros(n)
            p[idx] = np.clip(p_face, 0.0, None)
            total = p.sum()
            if total <= 0:
                continue
            p /= total
            val = p @ q @ p - 2.0 * c @ p
            if val < best_val:
                best_val = val
                best_p = p
    return best_p, best_val


def _projected_gradient(
    q: np.ndarray, c: np.ndarray, budget: OracleBudget
) -> tuple[np.ndarray, float]:
    """Vectorized multi-start projected gradient descent on the simplex."""
    rng = np.random.default_rng(budget.rng_seed)
    points = rng.dirichlet(np.ones(q.shape[0]), size=budget.starts)
    lam_max = float(np.linalg.eigvalsh(q)[-1])
    step = 1.0 / (2.0 * lam_max) if lam_max > 0 else 1.0
    for _ in range(budget.iters):
        grad = 2.0 * (points @ q - c)
        points = _project_simplex(points - step * grad)
    values = np.einsum("ij,jk,ik->i", points, q, points) - 2.0 * points @ c
    best = int(np.argmin(values))
    return points[best], float(values[best])


def brute_force_sep(
    instance: SepInstance, budget: OracleBudget | None = None
) -> OracleVerdict:
    """Decide separable convertibility by global residual minimization.

    Feasible iff some simplex point mixes the conjugated target Grams to
    the source Grams exactly; the verdict compares the smallest residual
    found against :data:`WITNESS_TOL` and :data:`REJECT_TOL` and abstains
    in between.
    """
    if budget is None:
        budget = OracleBudget()
    a, b = _mixing_system(instance)
    q = a.T @ a
    c = a.T @ b

    # Candidates are ranked by the quadratic form, but the winners are
    # re-evaluated as ||A p - b|| directly: near a solution the quadratic
    # evaluation cancels down to sqrt(machine epsilon).
    p_face, _ = _face_minima(q, c)
    p_grad, _ = _projected_gradient(q, c, budget)

    res_face = float(np.linalg.norm(a @ p_face - b))
    res_grad = float(np.linalg.norm(a @ p_grad - b))
    sample_count = 2**9 - 1 + budget.starts

    if res_face <= res_grad:
        best_p, best_res = p_face, res_face
    else:
        best_p, best_res = p_grad, res_grad

    if best_res <= WITNESS_TOL:
        return OracleVerdict(True, best_res, sample_count, best_p)
    if min(res_face, res_grad) > REJECT_TOL:
        return OracleVerdict(False, best_res, sample_count, None)
    return OracleVerdict(None, best_res, sample_count, best_p)


# ---------------------------------------------------------------------------
# Numeric symmetry search
# ---------------------------------------------------------------------------

def _als_sweep(
    tensor: np.ndarray, batch: int, iters: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Batched alternating least squares for product fixers of a tensor.

    Each axis update solves ``A @ unfold(partial) = unfold(tensor)``
    exactly in the least-squares sense via the pseudoinverse.
    """
    shape = (batch, 3, 3)
    ops = [
        (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
        for _ in range(3)
    ]
    t0 = tensor.reshape(3, 9)
    t1 = tensor.transpose(1, 0, 2).reshape(3, 9)
    t2 = tensor.transpose(2, 0, 1).reshape(3, 9)

    for _ in range(iters):
        m = np.einsum("nbj,nck,ijk->nibc", ops[1], ops[2], tensor).reshape(-1, 3, 9)
        ops[0] = t0 @ np.linalg.pinv(m)
        m = np.einsum("nai,nck,ijk->njac", ops[0], ops[2], tensor).reshape(-1, 3, 9)
        ops[1] = t1 @ np.linalg.pinv(m)
        m = np.einsum("nai,nbj,ijk->nkab", ops[0], ops[1], tensor).reshape(-1, 3, 9)
        ops[2] = t2 @ np.linalg.pinv(m)

    out = np.einsum("nai,nbj,nck,ijk->nabc", *ops, tensor)
    res = np.linalg.norm((out - tensor).reshape(batch, -1), axis=1)
    return ops[0], ops[1], ops[2], res / np.linalg.norm(tensor)


def numeric_symmetry_search(
    params: SeedParams, budget: OracleBudget | None = None
) -> SymmetrySearchReport:
    """Recover the seed's product symmetries from random starts.

    Converged alternating-least-squares runs are clustered projectively
    by their full product operator and matched against the symmetry
    triples; anything that converges but matches none of them counts as
    an extra (generic seeds should produce zero).
    """
    if budget is None:
        budget = OracleBudget(starts=240, iters=1500)
    rng = np.random.default_rng(budget.rng_seed)
    tensor = build_seed(params).reshape(3, 3, 3)

    a, b, c, res = _als_sweep(tensor, budget.starts, budget.iters, rng)
    good = res <= 1e-8
    converged = int(np.count_nonzero(good))

    products = np.einsum(
        "nai,nbj,nck->nabcijk", a[good], b[good], c[good]
    ).reshape(-1, 27, 27)
    norms = np.linalg.norm(products.reshape(-1, 729), axis=1)
    products = products / norms[:, None, None]

    reps: list[np.ndarray] = []
    for p in products:
        if all(
            np.sqrt(max(2.0 - 2.0 * abs(np.vdot(r, p)), 0.0)) > 1e-6 for r in reps
        ):
            reps.append(p)

    refs = {
        k: kron3(PAULIS[k], PAULIS[k], PAULIS[k]) / np.sqrt(27.0) for k in INDEX_ORDER
    }
    found = []
    extras = 0
    worst = 0.0
    for p in reps:
        overlaps = {k: abs(np.vdot(ref, p)) for k, ref in refs.items()}
        k_best = max(overlaps, key=overlaps.get)
        err = np.sqrt(max(2.0 - 2.0 * overlaps[k_best], 0.0))
        if err <= 1e-6:
            found.append(k_best)
            worst = max(worst, err)
        else:
            extras += 1
    found = tuple(k for k in INDEX_ORDER if k in found)
    return SymmetrySearchReport(
        found=found,
        extras=extras,
        starts=budget.starts,
        converged=converged,
        max_match_error=float(worst),
    )
