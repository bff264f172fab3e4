"""Exact inference over the (state, visit-vector) lattice.

Per-sequence operations (forward, backward, visit_distribution,
expected_visits, viterbi_decode) are straightforward numpy implementations
that materialize full log-space tables.  Dataset-scale operations
(e_step_stats, joint_objective) run on the batched kernels in `_engine`,
which the tests cross-check against the per-sequence path.

When the flattened visit lattice exceeds `lattice_budget`, exact joint
inference over visit vectors is refused; expected visits remain available
through independent per-counted-state lattices, and dataset operations fall
back to that route (recording that they did so).
"""

import logging
from dataclasses import dataclass

import numpy as np

from ._engine import LatticeEngine
from .errors import DecodeFailureError, InvalidInputError, LatticeBudgetError
from .model import VisitCaps, path_to_counts

log = logging.getLogger(__name__)

DEFAULT_LATTICE_BUDGET = 4096


@dataclass
class VisitLattice:
    """Log-space forward/backward tables over (position, state, visit index).

    Entries are log probabilities (finite or -inf).  The visit index wraps
    the mixed-radix flattening of the visit vector defined by the caps.
    """

    caps: VisitCaps
    log_forward: np.ndarray | None = None
    log_backward: np.ndarray | None = None
    log_sequence_likelihood: float | None = None


@dataclass
class VisitDistribution:
    """Distribution over visit vectors for one sequence.

    `support` maps every visit vector within the caps to its probability.
    `normalizer` is the response-evidence constant sum_v P(v|x) p(y|v) when
    the distribution is response-conditioned, else None.
    """

    caps: VisitCaps
    probs: np.ndarray
    normalizer: float | None = None

    @property
    def support(self):
        return {v: float(p) for v, p in zip(self.caps.all_vectors(), self.probs)}

    def mean(self):
        """First moment: expected visit count per counted state."""
        n = len(self.caps.caps)
        out = np.zeros(n)
        for u, v in enumerate(self.caps.all_vectors()):
            out += self.probs[u] * np.asarray(v, dtype=float)
        return out


@dataclass
class SufficientStats:
    """Response-conditioned expected counts for one EM E-step."""

    transition_counts: np.ndarray
    emission_counts: np.ndarray
    visit_posteriors: list
    expected_visits: np.ndarray
    log_objective: float
    fallback: bool = False

    def merge(self, other):
        """Combine stats from disjoint example subsets."""
        return SufficientStats(
            transition_counts=self.transition_counts + other.transition_counts,
            emission_counts=self.emission_counts + other.emission_counts,
            visit_posteriors=self.visit_posteriors + other.visit_posteriors,
            expected_visits=np.concatenate([self.expected_visits, other.expected_visits]),
            log_objective=self.log_objective + other.log_objective,
            fallback=self.fallback or other.fallback,
        )


def _unpack_response(response):
    if response is None:
        return None, None
    y, regression = response
    return float(y), regression


def _encode(params, x):
    xs = params.topology.alphabet.encode(x)
    if xs.size == 0:
        raise InvalidInputError("input sequence must be non-empty")
    return xs


def forward(params, caps, x):
    """Forward half of the lattice.

    log_forward[i, s, u] = log P(x_1..i, S_i = s, V_i = u); the sequence
    likelihood is the total mass at the last position.
    """
    engine = LatticeEngine(params, caps)
    xs = _encode(params, x)
    A, scale = engine.forward_tables(xs[None, :])
    with np.errstate(divide="ignore"):
        logf = np.log(A[0]) + scale[0][:, None, None]
    ll = float(scale[0, -1])
    return VisitLattice(caps=caps, log_forward=logf, log_sequence_likelihood=ll)


def backward(params, caps, x, response=None):
    """Backward half of the lattice, position-L base case included.

    Without a response the base case is 1 for every (state, visit) cell;
    with `response=(y, regression)` the base case is the unnormalized
    density p(y | v), which makes forward*backward products proportional to
    path posteriors given both the sequence and its response.
    """
    engine = LatticeEngine(params, caps)
    xs = _encode(params, x)
    y, regression = _unpack_response(response)
    L, S, V = len(xs), engine.S, engine.V
    inc, cmask = engine.inc, engine.counted_mask

    if regression is None:
        beta = np.ones((S, V))
        shift = 0.0
    else:
        base, logshift = engine.response_weights(np.array([y]), regression)
        beta = np.tile(base[0], (S, 1))
        shift = float(logshift[0])

    logb = np.empty((L, S, V))
    with np.errstate(divide="ignore"):
        logb[L - 1] = np.log(beta) + shift
        cum = shift
        T = params.transition
        E = params.emission
        for i in range(L - 2, -1, -1):
            nxt = beta * E[:, xs[i + 1]][:, None]
            for s in range(S):
                k = cmask[s]
                if k >= 0:
                    nxt[s] = nxt[s][inc[k]]
            beta = T @ nxt
            z = beta.max()
            if z <= 0.0:
                beta[:] = 0.0
                logb[i] = -np.inf
                cum = -np.inf
                continue
            beta /= z
            cum += np.log(z)
            logb[i] = np.log(beta) + cum
    return VisitLattice(caps=caps, log_backward=logb)


def visit_distribution(params, caps, x, response=None,
                       lattice_budget=DEFAULT_LATTICE_BUDGET):
    """Exact P(v | x), or the response posterior P(v | x, y).

    Refuses to run when the flattened lattice exceeds `lattice_budget`.
    """
    if caps.lattice_size > lattice_budget:
        raise LatticeBudgetError(
            f"lattice size {caps.lattice_size} exceeds budget {lattice_budget}"
        )
    engine = LatticeEngine(params, caps)
    xs = _encode(params, x)
    A, scale = engine.forward_tables(xs[None, :])
    if not np.isfinite(scale[0, -1]):
        raise InvalidInputError("sequence has zero probability under the model")
    mass = A[0, -1].sum(axis=0)
    y, regression = _unpack_response(response)
    if regression is None:
        probs = mass / mass.sum()
        return VisitDistribution(caps=caps, probs=probs)
    base, _ = engine.response_weights(np.array([y]), regression)
    weighted = mass * base[0]
    total = weighted.sum()
    if total <= 0.0:
        raise InvalidInputError("response density vanished for every visit vector")
    # Z of the response posterior: sum_v P(v|x) p(y|v), in unshifted units.
    means = engine.digits.T @ regression.coefficients
    if regression.intercept is not None:
        means = means + regression.intercept
    dens = np.exp(
        -0.5 * ((y - means) / regression.sigma) ** 2
    ) / (regression.sigma * np.sqrt(2.0 * np.pi))
    normalizer = float(np.dot(mass / mass.sum(), dens))
    return VisitDistribution(caps=caps, probs=weighted / total, normalizer=normalizer)


def expected_visits(params, caps, x, response=None,
                    lattice_budget=DEFAULT_LATTICE_BUDGET):
    """Expected visit count per counted state, v_hat.

    Within budget this is the first moment of visit_distribution.  Beyond
    budget the response-free expectation is still exact via one small
    lattice per counted state; the response-conditioned version has no
    cheap factorization and is refused.
    """
    if caps.lattice_size <= lattice_budget:
        return visit_distribution(params, caps, x, response, lattice_budget).mean()
    if response is not None:
        raise LatticeBudgetError(
            "response-conditioned expected visits need the full lattice "
            f"({caps.lattice_size} > budget {lattice_budget})"
        )
    return _expected_visits_marginal(params, caps, x)


def _expected_visits_marginal(params, caps, x):
    """Per-counted-state expectation via independent single-state lattices."""
    topo = params.topology
    out = np.zeros(topo.counted_count)
    for k, c in enumerate(topo.counted_states):
        sub = _single_counted_view(params, c)
        dist = visit_distribution(sub, VisitCaps((caps.caps[k],)), x,
                                  lattice_budget=np.inf)
        out[k] = dist.mean()[0]
    return out


def _single_counted_view(params, counted_state):
    """A params view whose only counted state is `counted_state`."""
    from dataclasses import replace

    topo = params.topology
    sub_topo = replace(topo, counted_states=(counted_state,))
    return replace(params, topology=sub_topo)


def viterbi_decode(params, caps, x):
    """Most probable state path, its visit vector, and its log probability.

    Ties resolve to the smallest state index at every decision point.
    """
    engine = LatticeEngine(params, caps)
    xs = _encode(params, x)
    paths, logps, ok = engine.viterbi(xs[None, :])
    if not ok[0]:
        raise DecodeFailureError("no positive-probability path for sequence")
    path = paths[0]
    v = path_to_counts(path, params.topology, caps)
    return path, v, float(logps[0])


def joint_objective(params, caps, regression, dataset,
                    lattice_budget=DEFAULT_LATTICE_BUDGET):
    """Total log p(x, y) over a dataset under HMM + response model.

    Beyond the lattice budget, p(y | x) is approximated by p(y | v_hat)
    (expected-visits route) and a warning records the switch.  Returns -inf
    (with a diagnostic) if any example has zero evidence.
    """
    if len(dataset) == 0:
        raise InvalidInputError("dataset must be non-empty")
    if caps.lattice_size > lattice_budget:
        return _joint_objective_fallback(params, caps, regression, dataset)
    total = 0.0
    engine = LatticeEngine(params, caps)
    for group in _length_groups(dataset):
        xs = engine.encode_batch([dataset[i].sequence for i in group])
        ys = np.array([dataset[i].response for i in group])
        le = engine.log_evidence(xs, ys, regression)
        if not np.all(np.isfinite(le)):
            bad = group[int(np.flatnonzero(~np.isfinite(le))[0])]
            log.warning("joint objective is -inf: example %d has zero evidence", bad)
            return -np.inf
        total += float(le.sum())
    return total


def _joint_objective_fallback(params, caps, regression, dataset):
    from .regression import predict_density

    log.warning(
        "lattice size %d over budget; joint objective uses the expected-visits route",
        caps.lattice_size,
    )
    total = 0.0
    for i, ex in enumerate(dataset):
        lat = _loglik_only(params, ex.sequence)
        if not np.isfinite(lat):
            log.warning("joint objective is -inf: example %d has zero evidence", i)
            return -np.inf
        vhat = _expected_visits_marginal(params, caps, ex.sequence)
        dens = predict_density(regression, vhat, ex.response)
        if dens <= 0.0:
            return -np.inf
        total += lat + float(np.log(dens))
    return total


def _loglik_only(params, x):
    engine = LatticeEngine(_plain_view(params), VisitCaps(()))
    xs = _encode(params, x)
    _, scale = engine.forward_tables(xs[None, :])
    return float(scale[0, -1])


def _plain_view(params):
    """A params view with no counted states, collapsing the lattice to V=1."""
    from dataclasses import replace

    topo = replace(params.topology, counted_states=())
    return replace(params, topology=topo)


def _length_groups(dataset):
    """Indices grouped by sequence length, order-stable within groups."""
    groups = {}
    for i, ex in enumerate(dataset):
        groups.setdefault(len(ex.sequence), []).append(i)
    return [groups[k] for k in sorted(groups)]


def e_step_stats(params, caps, dataset, regression,
                 lattice_budget=DEFAULT_LATTICE_BUDGET, max_batch=64):
    """Expected transition/emission counts and visit posteriors for EM.

    The backward base case carries p(y | v), so all posteriors condition on
    the response as well as the sequence; pass regression=None for standard
    response-free statistics.  Over the lattice budget the counts are
    computed response-free and only expected visits are retained (the
    fallback flag is set and visit_posteriors holds None entries).
    """
    if len(dataset) == 0:
        raise InvalidInputError("dataset must be non-empty")
    topo = params.topology
    S, A, N = topo.state_count, topo.alphabet.size, topo.counted_count
    fallback = caps.lattice_size > lattice_budget
    if fallback:
        log.warning(
            "lattice size %d over budget %d; E-step switches to the "
            "expected-visits route", caps.lattice_size, lattice_budget,
        )
        return _e_step_fallback(params, caps, dataset, max_batch)

    trans = np.zeros((S, S))
    emis = np.zeros((S, A))
    posteriors = [None] * len(dataset)
    vhat = np.zeros((len(dataset), N))
    objective = 0.0
    engine = LatticeEngine(params, caps)
    for group in _length_groups(dataset):
        for lo in range(0, len(group), max_batch):
            chunk = group[lo : lo + max_batch]
            xs = engine.encode_batch([dataset[i].sequence for i in chunk])
            if regression is None:
                out = engine.stats(xs)
            else:
                ys = np.array([dataset[i].response for i in chunk])
                out = engine.stats(xs, ys, regression)
            if not np.all(out["ok"]):
                bad = chunk[int(np.flatnonzero(~out["ok"])[0])]
                raise InvalidInputError(f"example {bad}: zero evidence under model")
            trans += out["transition_counts"].sum(axis=0)
            emis += out["emission_counts"].sum(axis=0)
            objective += float(out["log_evidence"].sum())
            for j, i in enumerate(chunk):
                probs = out["visit_posteriors"][j]
                norm = None
                if regression is not None:
                    norm = float(np.exp(out["log_evidence"][j] - out["log_likelihood"][j]))
                dist = VisitDistribution(caps=caps, probs=probs, normalizer=norm)
                posteriors[i] = dist
                vhat[i] = dist.mean()
    return SufficientStats(
        transition_counts=trans,
        emission_counts=emis,
        visit_posteriors=posteriors,
        expected_visits=vhat,
        log_objective=objective,
        fallback=False,
    )


def _e_step_fallback(params, caps, dataset, max_batch):
    """Response-free counts on the plain state lattice + exact marginal
    expected visits per counted state."""
    topo = params.topology
    S, A, N = topo.state_count, topo.alphabet.size, topo.counted_count
    plain = _plain_view(params)
    trans = np.zeros((S, S))
    emis = np.zeros((S, A))
    vhat = np.zeros((len(dataset), N))
    loglik = 0.0
    engine = LatticeEngine(plain, VisitCaps(()))
    for group in _length_groups(dataset):
        for lo in range(0, len(group), max_batch):
            chunk = group[lo : lo + max_batch]
            xs = engine.encode_batch([dataset[i].sequence for i in chunk])
            out = engine.stats(xs)
            if not np.all(out["ok"]):
                bad = chunk[int(np.flatnonzero(~out["ok"])[0])]
                raise InvalidInputError(f"example {bad}: zero evidence under model")
            trans += out["transition_counts"].sum(axis=0)
            emis += out["emission_counts"].sum(axis=0)
            loglik += float(out["log_likelihood"].sum())
    for k, c in enumerate(topo.counted_states):
        sub = _single_counted_view(params, c)
        sub_caps = VisitCaps((caps.caps[k],))
        sub_engine = LatticeEngine(sub, sub_caps)
        digit = np.arange(caps.caps[k] + 1, dtype=float)
        for group in _length_groups(dataset):
            for lo in range(0, len(group), max_batch):
                chunk = group[lo : lo + max_batch]
                xs = sub_engine.encode_batch([dataset[i].sequence for i in chunk])
                out = sub_engine.stats(xs)
                for j, i in enumerate(chunk):
                    vhat[i, k] = float(out["visit_posteriors"][j] @ digit)
    return SufficientStats(
        transition_counts=trans,
        emission_counts=emis,
        visit_posteriors=[None] * len(dataset),
        expected_visits=vhat,
        log_objective=loglik,
        fallback=True,
    )
