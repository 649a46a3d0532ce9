"""Constructive separable maps and local protocols between class states.

Every construction here outputs explicit measurement operators together
with the initial and target states they relate, so that completeness and
branch correctness can be verified by direct simulation rather than
trusted.  The workhorse identity is that the nine symmetry triples act
trivially on the seed: a branch operator of the form
``(h1 S_k (x) h2 S_k (x) h3 S_k)`` applied to the seed equals
``(h1 (x) h2 (x) h3)`` applied to it, for every label k.

Unitary dressings of target factors are handled uniformly: the correction
applied at a non-measuring party with current factor f and desired factor
h after outcome k is ``h S_k f^{-1}``, which is unitary in every situation
these constructions produce (and is verified to be).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import convert_witnesses, detect_locc_cases, support_pattern
from .pauli import (
    COORD_ORDER,
    INDEX_ORDER,
    INDEX_POS,
    PAIR_REPS,
    PAULIS,
    apply3,
    dagger,
    from_coords,
    idx_neg,
    kron3,
    pauli_coords,
)
from .sep import depolarize
from .states import (
    GenericState,
    assemble,
    gram,
    lu_equivalent,
    positive_factor,
    ray_distance,
    span_factor,
)

#: Completeness residual bound for measurement operator sets.
POVM_TOL = 1e-10

#: Ray-distance bound for a branch to count as reaching the target.
BRANCH_MATCH_TOL = 1e-8

#: Branch probabilities below this are reported as vacuous.
VACUOUS_PROB = 1e-14

#: Positivity margin (smallest eigenvalue of the trace-normalized target
#: Gram) required when choosing a conversion step size.
POS_MARGIN = 1e-6

#: Smallest step size tried before giving up on a conversion step.
EPS_MIN = 1e-8

Pair = tuple[int, int]


class ProtocolError(RuntimeError):
    """A construction's validity check failed; carries the residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class KrausElement:
    """One branch operator in factored form (label, three 3x3 factors)."""

    label: Pair
    factors: tuple[np.ndarray, np.ndarray, np.ndarray]

    def operator(self) -> np.ndarray:
        return kron3(*self.factors)


@dataclass(frozen=True)
class KrausSet:
    """A complete separable measurement with declared initial and target.

    Applied to the initial state, every branch lands on the target ray.
    """

    elements: tuple[KrausElement, ...]
    initial: GenericState
    target: GenericState
    construction: str
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class LoccRound:
    """One measurement round: a party, its operators, and the outcome-
    conditioned correction unitaries at the other two parties."""

    party: int
    povm: tuple[tuple[Pair, np.ndarray], ...]
    corrections: tuple[tuple[tuple[int, np.ndarray], ...], ...]


@dataclass(frozen=True)
class LoccProtocol:
    """A finite-round local protocol with declared initial and target."""

    initial: GenericState
    rounds: tuple[LoccRound, ...]
    target: GenericState
    construction: str
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class BranchRecord:
    labels: tuple[Pair, ...]
    probability: float
    residual: float
    vacuous: bool
    matched: bool


@dataclass(frozen=True)
class BranchReport:
    """Direct simulation of every branch against the declared target."""

    branches: tuple[BranchRecord, ...]
    probability_sum: float
    max_residual: float
    all_matched: bool


# ---------------------------------------------------------------------------
# Validation and simulation
# ---------------------------------------------------------------------------

def validate_povm(obj: KrausSet | LoccRound | LoccProtocol) -> float:
    """Completeness residual: Frobenius distance of sum M^dag M from the
    identity (27-dim for Kraus sets, 3-dim per round for protocols)."""
    if isinstance(obj, KrausSet):
        total = np.zeros((27, 27), dtype=complex)
        for el in obj.elements:
            total += kron3(*(dagger(f) @ f for f in el.factors))
        return float(np.linalg.norm(total - np.eye(27)))
    if isinstance(obj, LoccRound):
        total3 = sum(dagger(m) @ m for _, m in obj.povm)
        return float(np.linalg.norm(total3 - np.eye(3)))
    if isinstance(obj, LoccProtocol):
        return max(validate_povm(r) for r in obj.rounds)
    raise TypeError(f"cannot validate {type(obj).__name__}")


def _branch_vectors(obj: KrausSet | LoccProtocol, v0: np.ndarray):
    eye = np.eye(3, dtype=complex)
    if isinstance(obj, KrausSet):
        return [((el.label,), apply3(*el.factors, v0)) for el in obj.elements]
    branches = [((), v0)]
    for rnd in obj.rounds:
        nxt = []
        for labels, v in branches:
            for (label, m), corr in zip(rnd.povm, rnd.corrections):
                ops = [eye, eye, eye]
                ops[rnd.party] = m
                for party, u in corr:
                    ops[party] = u
                nxt.append((labels + (label,), apply3(*ops, v)))
        branches = nxt
    return branches


def simulate_branches(
    obj: KrausSet | LoccProtocol,
    input_vec: np.ndarray | None = None,
    match_tol: float = BRANCH_MATCH_TOL,
) -> BranchReport:
    """Run every branch on the (normalized) input and compare to the target.

    Zero-probability branches are reported, marked vacuous, and do not
    count against the match verdict.
    """
    if input_vec is None:
        input_vec = assemble(obj.initial)
    v0 = np.asarray(input_vec, dtype=complex)
    n0 = np.linalg.norm(v0)
    if n0 == 0:
        raise ValueError("input state must be nonzero")
    v0 = v0 / n0
    target_vec = assemble(obj.target)

    records = []
    total = 0.0
    worst = 0.0
    for labels, v in _branch_vectors(obj, v0):
        prob = float(np.vdot(v, v).real)
        total += prob
        vacuous = prob <= VACUOUS_PROB
        if vacuous:
            residual = 0.0
        else:
            residual = ray_distance(v, target_vec)
            worst = max(worst, residual)
        records.append(
            BranchRecord(
                labels=labels,
                probability=prob,
                residual=residual,
                vacuous=vacuous,
                matched=vacuous or residual <= match_tol,
            )
        )
    return BranchReport(
        branches=tuple(records),
        probability_sum=total,
        max_residual=worst,
        all_matched=all(r.matched for r in records),
    )


# ---------------------------------------------------------------------------
# Construction helpers
# ---------------------------------------------------------------------------

def _correction(current: np.ndarray, desired: np.ndarray, k: Pair) -> np.ndarray:
    """Correction unitary turning current factor into the desired one."""
    u = desired @ PAULIS[k] @ np.linalg.inv(current)
    if np.linalg.norm(dagger(u) @ u - np.eye(3)) > 1e-8:
        raise ProtocolError(
            "correction operator is not unitary; the requested factors do not "
            "fit this construction"
        )
    return u


def _triple(w: Pair) -> tuple[Pair, Pair, Pair]:
    return ((0, 0), w, idx_neg(w))


def _triple_depolarized(h: np.ndarray, w: Pair) -> np.ndarray:
    p = np.zeros(9)
    for k in _triple(w):
        p[INDEX_POS[k]] = 1.0 / 3.0
    return depolarize(h, p)


def _check_complete(obj: KrausSet | LoccProtocol, what: str) -> None:
    residual = validate_povm(obj)
    if residual > POVM_TOL:
        raise ProtocolError(
            f"{what}: completeness fails (residual {residual:.3e})", residual
        )


def _scale_to_trace3(h: np.ndarray) -> tuple[np.ndarray, float]:
    tr = float(np.trace(dagger(h) @ h).real)
    lam = np.sqrt(3.0 / tr)
    return lam * h, lam


# ---------------------------------------------------------------------------
# Separable maps
# ---------------------------------------------------------------------------

def sep_map_disjoint(h1: np.ndarray, h2: np.ndarray, seed) -> KrausSet:
    """Separable map from the bare seed onto ``h1 (x) h2 (x) I``.

    Nine equally weighted branches, one per symmetry label.  Completeness
    requires the two factors' Gram coordinate supports to be disjoint;
    overlap is reported through the completeness residual.  Both factors
    are rescaled to Gram trace 3 (a ray-preserving normalization).
    """
    h1, lam1 = _scale_to_trace3(np.asarray(h1, dtype=complex))
    h2, lam2 = _scale_to_trace3(np.asarray(h2, dtype=complex))
    eye = np.eye(3, dtype=complex)
    elements = tuple(
        KrausElement(
            label=k,
            factors=(
                (h1 @ PAULIS[k]) / 3.0,
                h2 @ PAULIS[k],
                np.asarray(PAULIS[k]),
            ),
        )
        for k in INDEX_ORDER
    )
    initial = GenericState(seed=seed, factors=(eye, eye, eye))
    target = GenericState(seed=seed, factors=(h1, h2, eye))
    kraus = KrausSet(
        elements=elements,
        initial=initial,
        target=target,
        construction="sep-disjoint",
        notes=(f"factor rescales to Gram trace 3: {lam1:.6g}, {lam2:.6g}",),
    )
    _check_complete(kraus, "disjoint-support separable map")
    return kraus


def sep_map_confined(
    h1: np.ndarray,
    w: Pair,
    seed,
    h2: np.ndarray | None = None,
    h3: np.ndarray | None = None,
) -> KrausSet:
    """Separable map onto ``h1 (x) h2 (x) h3`` with parties 2 and 3
    confined to the pair ``{w, -w}``.

    Three branches labeled by the pair's symmetry triple.  The initial
    state carries the first party's Gram depolarized over the triple (its
    positive confined factor), with the confined factors riding along.
    Completeness is exact for any scaling of ``h1``.
    """
    h1 = np.asarray(h1, dtype=complex)
    eye = np.eye(3, dtype=complex)
    h2 = eye if h2 is None else np.asarray(h2, dtype=complex)
    h3 = eye if h3 is None else np.asarray(h3, dtype=complex)

    g1w = span_factor(_triple_depolarized(dagger(h1) @ h1, w), w)
    ginv = np.linalg.inv(g1w)
    # At parties 2 and 3 the branch operator h S_k h^{-1} is unitary exactly
    # because the factor's Gram lives in the pair's commuting span.
    elements = [
        KrausElement(
            label=k,
            factors=(
                (h1 @ PAULIS[k] @ ginv) / np.sqrt(3.0),
                _correction(h2, h2, k),
                _correction(h3, h3, k),
            ),
        )
        for k in _triple(w)
    ]
    initial = GenericState(seed=seed, factors=(g1w, h2, h3))
    target = GenericState(seed=seed, factors=(h1, h2, h3))
    notes = []
    try:
        if lu_equivalent(initial, target):
            notes.append("trivial conversion: initial and target are LU-equivalent")
    except ValueError:
        pass
    kraus = KrausSet(
        elements=tuple(elements),
        initial=initial,
        target=target,
        construction="sep-confined",
        notes=tuple(notes),
    )
    _check_complete(kraus, "confined-pair separable map")
    return kraus


def sep_map_from_witness(
    source: GenericState, target: GenericState, p: np.ndarray
) -> KrausSet:
    """General separable map realizing a feasibility witness.

    Given a distribution solving the conversion instance, the branch for
    label k applies ``sqrt(p_k) h_i S_k g_i^{-1}`` at each party.  The
    target factors are rescaled so the Gram traces match the source's
    (ray-preserving); completeness then follows from the witness equation.
    """
    p = np.asarray(p, dtype=float)
    tr_g = np.prod([np.trace(dagger(g) @ g).real for g in source.factors])
    tr_h = np.prod([np.trace(dagger(h) @ h).real for h in target.factors])
    scale = (tr_g / tr_h) ** (1.0 / 6.0)
    hs = [scale * h for h in target.factors]
    ginvs = [np.linalg.inv(g) for g in source.factors]
    elements = []
    for weight, k in zip(p, INDEX_ORDER):
        root = np.sqrt(max(weight, 0.0))
        elements.append(
            KrausElement(
                label=k,
                factors=(
                    root * (hs[0] @ PAULIS[k] @ ginvs[0]),
                    hs[1] @ PAULIS[k] @ ginvs[1],
                    hs[2] @ PAULIS[k] @ ginvs[2],
                ),
            )
        )
    kraus = KrausSet(
        elements=tuple(elements),
        initial=source,
        target=GenericState(seed=target.seed, factors=tuple(hs)),
        construction="sep-witness",
        notes=(f"target rescale {scale:.6g}",),
    )
    _check_complete(kraus, "witness separable map")
    return kraus


# ---------------------------------------------------------------------------
# Local protocols
# ---------------------------------------------------------------------------

def locc_reach_protocol(target: GenericState, tol: float | None = None) -> LoccProtocol:
    """Local protocol reaching a locally reachable target.

    The construction is chosen from the target's support pattern: a
    one-round three-outcome protocol when a confined pair is genuinely
    occupied, a one-round nine-outcome protocol from the bare seed when
    both confined parties are trivial, and a two-stage composition from
    the bare seed in the mixed case with disjoint free-party support.
    """
    gt = gram(target)
    pattern = support_pattern(gt, tol)
    matches = detect_locc_cases(pattern)
    if not matches:
        raise ValueError("target is not locally reachable from any LU-inequivalent state")
    match = matches[0]
    f, c1, c2 = match.parties
    w = match.pair
    assert w is not None
    s_f, s_c1, s_c2 = pattern.pairs[f], pattern.pairs[c1], pattern.pairs[c2]
    if not s_c1 and not s_c2:
        return _nine_outcome_protocol(target, f, c1, c2)
    if s_c1 and s_c2:
        return _one_round_protocol(target, f, c1, c2, w)
    if w in s_f:
        return _one_round_protocol(target, f, c1, c2, w)
    occupied, trivial = (c1, c2) if s_c1 else (c2, c1)
    return _two_stage_protocol(target, f, occupied, trivial, w)


def _one_round_protocol(
    target: GenericState, f: int, c1: int, c2: int, w: Pair
) -> LoccProtocol:
    """Party f measures three outcomes; confined parties apply dressed
    symmetry corrections.  Initial: f's Gram depolarized over the pair's
    triple, other factors as in the target."""
    h = list(target.factors)
    g_fw = span_factor(_triple_depolarized(dagger(h[f]) @ h[f], w), w)
    ginv = np.linalg.inv(g_fw)
    povm = []
    corrections = []
    for k in _triple(w):
        povm.append((k, (h[f] @ PAULIS[k] @ ginv) / np.sqrt(3.0)))
        corrections.append(
            tuple((c, _correction(h[c], h[c], k)) for c in (c1, c2))
        )
    initial_factors = list(h)
    initial_factors[f] = g_fw
    initial = GenericState(seed=target.seed, factors=tuple(initial_factors))
    protocol = LoccProtocol(
        initial=initial,
        rounds=(LoccRound(party=f, povm=tuple(povm), corrections=tuple(corrections)),),
        target=target,
        construction="locc-one-round",
    )
    _check_complete(protocol, "one-round local protocol")
    return protocol


def _nine_outcome_protocol(target: GenericState, f: int, c1: int, c2: int) -> LoccProtocol:
    """From the bare seed: party f measures all nine symmetry labels; the
    other parties (trivial Grams) apply their dressing unitaries times the
    matching symmetry."""
    h = list(target.factors)
    hf, lam = _scale_to_trace3(h[f])
    eye = np.eye(3, dtype=complex)
    unitized = {}
    for c in (c1, c2):
        r = positive_factor(dagger(h[c]) @ h[c])
        unitized[c] = h[c] @ np.linalg.inv(r)
    povm = []
    corrections = []
    for k in INDEX_ORDER:
        povm.append((k, (hf @ PAULIS[k]) / 3.0))
        corrections.append(
            tuple((c, _correction(eye, unitized[c], k)) for c in (c1, c2))
        )
    declared = [None, None, None]
    declared[f] = hf
    declared[c1] = unitized[c1]
    declared[c2] = unitized[c2]
    initial = GenericState(seed=target.seed, factors=(eye, eye, eye))
    protocol = LoccProtocol(
        initial=initial,
        rounds=(LoccRound(party=f, povm=tuple(povm), corrections=tuple(corrections)),),
        target=GenericState(seed=target.seed, factors=tuple(declared)),
        construction="locc-nine-outcome",
        notes=(f"measuring factor rescaled by {lam:.6g}; trivial factors unitized",),
    )
    _check_complete(protocol, "nine-outcome local protocol")
    return protocol


def _two_stage_protocol(
    target: GenericState, f: int, cn: int, ct: int, w: Pair
) -> LoccProtocol:
    """From the bare seed, for targets with one occupied confined party
    and free-party support disjoint from the pair: first the confined
    party measures nine outcomes, then the free party measures the pair's
    triple."""
    h = list(target.factors)
    hcn, lam_n = _scale_to_trace3(h[cn])
    hf, lam_f = _scale_to_trace3(h[f])
    r_ct = positive_factor(dagger(h[ct]) @ h[ct])
    u_ct = h[ct] @ np.linalg.inv(r_ct)
    eye = np.eye(3, dtype=complex)

    povm1 = []
    corr1 = []
    for k in INDEX_ORDER:
        povm1.append((k, (hcn @ PAULIS[k]) / 3.0))
        corr1.append(tuple((c, _correction(eye, eye, k)) for c in (f, ct)))

    povm2 = []
    corr2 = []
    for j in _triple(w):
        povm2.append((j, (hf @ PAULIS[j]) / np.sqrt(3.0)))
        corr2.append(
            (
                (cn, _correction(hcn, hcn, j)),
                (ct, _correction(eye, u_ct, j)),
            )
        )

    declared = [None, None, None]
    declared[f] = hf
    declared[cn] = hcn
    declared[ct] = u_ct
    initial = GenericState(seed=target.seed, factors=(eye, eye, eye))
    protocol = LoccProtocol(
        initial=initial,
        rounds=(
            LoccRound(party=cn, povm=tuple(povm1), corrections=tuple(corr1)),
            LoccRound(party=f, povm=tuple(povm2), corrections=tuple(corr2)),
        ),
        target=GenericState(seed=target.seed, factors=tuple(declared)),
        construction="locc-two-stage",
        notes=(
            f"measuring factors rescaled by {lam_n:.6g}, {lam_f:.6g}; "
            "trivial factor unitized",
        ),
    )
    _check_complete(protocol, "two-stage local protocol")
    return protocol


def locc_convert_step(
    source: GenericState,
    pair: Pair | None = None,
    eps: float | None = None,
    tol: float | None = None,
) -> LoccProtocol:
    """One conversion step away from a locally convertible state.

    The unconfined party measures the three labels of the confined pair's
    triple with weights ``(1 - 2 eps/3, eps/3, eps/3)``; the target divides
    that party's off-triple Gram coordinates by ``1 - eps``.  When the
    measuring party is itself confined (so the rule would be trivial) the
    triple is measured uniformly and the target instead acquires a fresh
    coordinate pair outside the triple.  Step sizes are halved from 1/2
    (perturbations from 1/10) until the target Gram keeps a positive
    margin; explicit ``eps`` values are validated instead.
    """
    gt = gram(source)
    pattern = support_pattern(gt, tol)
    witnesses = convert_witnesses(pattern)
    if not witnesses:
        raise ValueError("source is not locally one-step convertible")
    if pair is not None:
        witnesses = tuple(m for m in witnesses if m.pair == pair)
        if not witnesses:
            raise ValueError(f"no conversion witness with pair {pair}")
    match = witnesses[0]
    m_party, c1, c2 = match.parties
    w = match.pair
    assert w is not None

    g_m = source.factors[m_party]
    g_gram = dagger(g_m) @ g_m
    trace = float(np.trace(g_gram).real)
    ghat = g_gram / trace
    _, gc = pauli_coords(ghat)
    confined = pattern.pairs[m_party] <= {w}
    triple = _triple(w)
    notes = []

    if not confined:
        off_positions = [
            pos for pos, k in enumerate(COORD_ORDER) if k not in (w, idx_neg(w))
        ]

        def build(e: float) -> np.ndarray:
            hc = gc.copy()
            hc[off_positions] = gc[off_positions] / (1.0 - e)
            return from_coords(1.0 / 3.0, hc)

        if eps is None:
            eps = 0.5
            while eps >= EPS_MIN:
                hhat = build(eps)
                if np.linalg.eigvalsh(hhat)[0] >= POS_MARGIN:
                    break
                eps /= 2.0
            else:
                raise ProtocolError(
                    f"no step size above {EPS_MIN} keeps the target Gram positive"
                )
        else:
            if not 0.0 <= eps < 1.0:
                raise ValueError(f"step size must lie in [0, 1), got {eps}")
            hhat = build(eps)
            if eps > 0 and np.linalg.eigvalsh(hhat)[0] < POS_MARGIN:
                raise ProtocolError(
                    f"step size {eps} drives the target Gram below the "
                    f"positivity margin {POS_MARGIN}"
                )
        p = np.zeros(9)
        p[INDEX_POS[(0, 0)]] = 1.0 - 2.0 * eps / 3.0
        p[INDEX_POS[w]] = eps / 3.0
        p[INDEX_POS[idx_neg(w)]] = eps / 3.0
        notes.append(f"step size {eps:.6g} on pair {w}")
    else:
        u_star = next(u for u in PAIR_REPS if u != w)
        bump = PAULIS[u_star] + dagger(PAULIS[u_star])
        delta = 0.1
        while delta >= EPS_MIN:
            hhat = ghat + delta * bump
            if np.linalg.eigvalsh(hhat)[0] >= POS_MARGIN:
                break
            delta /= 2.0
        else:
            raise ProtocolError(
                f"no perturbation above {EPS_MIN} keeps the target Gram positive"
            )
        p = np.zeros(9)
        for k in triple:
            p[INDEX_POS[k]] = 1.0 / 3.0
        notes.append(
            f"measuring party confined to {w}: uniform triple weights with a "
            f"fresh coordinate pair at {u_star} (size {delta:.6g})"
        )

    h_new = positive_factor(hhat * trace)
    ginv = np.linalg.inv(g_m)
    povm = []
    corrections = []
    for k in triple:
        weight = np.sqrt(p[INDEX_POS[k]])
        povm.append((k, weight * (h_new @ PAULIS[k] @ ginv)))
        corrections.append(
            tuple((c, _correction(source.factors[c], source.factors[c], k)) for c in (c1, c2))
        )
    target_factors = list(source.factors)
    target_factors[m_party] = h_new
    target = GenericState(seed=source.seed, factors=tuple(target_factors))
    try:
        if lu_equivalent(source, target):
            notes.append("trivial step: source and target are LU-equivalent")
    except ValueError:
        pass
    protocol = LoccProtocol(
        initial=source,
        rounds=(
            LoccRound(party=m_party, povm=tuple(povm), corrections=tuple(corrections)),
        ),
        target=target,
        construction="locc-convert-step",
        notes=tuple(notes),
    )
    _check_complete(protocol, "conversion step")
    return protocol
