import numpy as np
import pytest

from qutritlocc.oracle import (
    REJECT_TOL,
    WITNESS_TOL,
    OracleBudget,
    brute_force_sep,
    numeric_symmetry_search,
)
from qutritlocc.pauli import INDEX_ORDER, PAULIS, dagger, idx_neg
from qutritlocc.sep import candidate_initial_grams, gram_instance, sep_feasible
from qutritlocc.states import (
    GenericState,
    gram,
    positive_factor,
    seed_gram,
    span_factor,
)

# Small but sufficient search effort for the well-separated instances
# used here; the defaults are sized for adversarial batches.
BUDGET = OracleBudget(starts=200, iters=200, rng_seed=11)


def pair_mat(w, z=0.08):
    return np.eye(3) / 3 + z * (PAULIS[w] + dagger(PAULIS[w]))


def two_pair_mat(w1, w2, z=0.05):
    return (
        np.eye(3) / 3
        + z * (PAULIS[w1] + dagger(PAULIS[w1]))
        + z * (PAULIS[w2] + dagger(PAULIS[w2]))
    )


def dense_factor(rng):
    return rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) + 3 * np.eye(3)


def test_seed_to_seed_is_feasible(params):
    verdict = brute_force_sep(gram_instance(params, seed_gram(), seed_gram()), BUDGET)
    assert verdict.feasible is True
    assert verdict.best_residual <= WITNESS_TOL
    assert verdict.witness.min() >= 0
    assert verdict.witness.sum() == pytest.approx(1.0, abs=1e-12)
    assert verdict.sample_count == 511 + BUDGET.starts


def test_tiling_witness_is_uniform(params):
    """The tiling polytope is a single point, so the oracle's global
    minimizer must land on the same uniform distribution the engine finds."""
    target = gram(
        GenericState(
            params,
            (
                positive_factor(two_pair_mat((1, 0), (0, 1))),
                positive_factor(two_pair_mat((1, 1), (1, 2))),
                np.eye(3),
            ),
        )
    )
    instance = gram_instance(params, seed_gram(), target)
    decision = sep_feasible(instance)
    verdict = brute_force_sep(instance, BUDGET)
    assert decision.feasible and verdict.feasible
    np.testing.assert_allclose(verdict.witness, np.full(9, 1 / 9), atol=1e-8)
    np.testing.assert_allclose(verdict.witness, decision.witness, atol=1e-8)


def test_dense_target_is_rejected(params, rng):
    target = gram(GenericState(params, tuple(dense_factor(rng) for _ in range(3))))
    verdict = brute_force_sep(gram_instance(params, seed_gram(), target), BUDGET)
    assert verdict.feasible is False
    assert verdict.witness is None
    assert verdict.best_residual > REJECT_TOL


def test_confined_target_unreachable_from_seed(params, rng):
    w = (1, 1)
    target = gram(
        GenericState(
            params,
            (dense_factor(rng), span_factor(pair_mat(w), w), span_factor(pair_mat(w, 0.04), w)),
        )
    )
    verdict = brute_force_sep(gram_instance(params, seed_gram(), target), BUDGET)
    assert verdict.feasible is False


def test_confined_target_feasible_from_induced_initial(params, rng):
    w = (1, 1)
    target = gram(
        GenericState(
            params,
            (dense_factor(rng), span_factor(pair_mat(w), w), span_factor(pair_mat(w, 0.04), w)),
        )
    )
    init = dict(candidate_initial_grams(target))[f"confined-{w}"]
    verdict = brute_force_sep(gram_instance(params, init, target), BUDGET)
    assert verdict.feasible is True
    # the witness lives on the triple {identity, w, -w}
    triple = {INDEX_ORDER.index(k) for k in ((0, 0), w, idx_neg(w))}
    for pos, weight in enumerate(verdict.witness):
        if pos not in triple:
            assert weight <= 1e-8


def test_oracle_agrees_with_engine_on_mixed_batch(params, rng):
    instances = [gram_instance(params, seed_gram(), seed_gram())]
    for w1, w2 in (((1, 0), (0, 1)), ((1, 1), (2, 1))):
        target = gram(
            GenericState(
                params,
                (
                    positive_factor(pair_mat(w1)),
                    positive_factor(pair_mat(w2, 0.06)),
                    np.eye(3),
                ),
            )
        )
        instances.append(gram_instance(params, seed_gram(), target))
    for _ in range(2):
        target = gram(GenericState(params, tuple(dense_factor(rng) for _ in range(3))))
        instances.append(gram_instance(params, seed_gram(), target))
    for instance in instances:
        decision = sep_feasible(instance)
        verdict = brute_force_sep(instance, BUDGET)
        assert verdict.feasible is not None
        assert verdict.feasible == decision.feasible


def test_symmetry_search_recovers_full_group(params):
    report = numeric_symmetry_search(params)
    assert report.found == INDEX_ORDER
    assert report.extras == 0
    assert report.converged > 0
    assert report.max_match_error <= 1e-6


def test_symmetry_search_small_budget_is_partial_but_clean(params):
    report = numeric_symmetry_search(params, OracleBudget(starts=6, iters=60, rng_seed=3))
    assert set(report.found) <= set(INDEX_ORDER)
    assert report.extras == 0
    assert report.starts == 6
