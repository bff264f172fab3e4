"""HMM topology, parameters, counted states, and the path -> visit-count map.

Two topology templates are provided.  The occurrence template has a single
self-looping background state plus one left-to-right chain per motif; the
final state of each chain is counted, so the visit vector holds per-motif
occurrence totals.  The arrangement template has one branch per ordered
combination of motifs; each branch opens with a counted marker state that is
structurally visited at most once, so the visit vector is a 0/1 indicator of
which combination a path followed.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError

# Additive smoothing for initialized probability rows (sampled one-hot
# emissions); keeps starting points away from absorbing zeros.
PSEUDOCOUNT = 0.01

PROB_TOL = 1e-12


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of sequence characters."""

    symbols: tuple

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) == 0:
            raise InvalidConfigError("alphabet must be non-empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise InvalidConfigError("alphabet symbols must be distinct")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.symbols)})

    @property
    def size(self):
        return len(self.symbols)

    def index(self, symbol):
        try:
            return self._index[symbol]
        except KeyError:
            raise InvalidInputError(f"symbol {symbol!r} not in alphabet") from None

    def encode(self, sequence):
        """Map a character sequence to an int array of symbol indices."""
        from .errors import AlphabetError

        try:
            return np.array([self._index[c] for c in sequence], dtype=np.int64)
        except KeyError as e:
            raise AlphabetError(f"symbol {e.args[0]!r} not in alphabet") from None

    def decode(self, indices):
        return "".join(self.symbols[i] for i in indices)


DNA = Alphabet(("a", "c", "g", "t"))


@dataclass(frozen=True)
class HmmTopology:
    """State space, start distribution, allowed transitions, counted states.

    state_labels are role tags: "background", "motif:<m>:<pos>", or
    "marker:<combination>" for arrangement branch markers.
    """

    alphabet: Alphabet
    state_count: int
    start_distribution: np.ndarray
    allowed_transitions: frozenset
    counted_states: tuple
    state_labels: tuple

    def __post_init__(self):
        object.__setattr__(
            self,
            "allowed_transitions",
            frozenset((int(f), int(t)) for f, t in self.allowed_transitions),
        )
        object.__setattr__(self, "counted_states", tuple(int(c) for c in self.counted_states))
        object.__setattr__(self, "state_labels", tuple(self.state_labels))
        start = _freeze(np.asarray(self.start_distribution, dtype=float))
        object.__setattr__(self, "start_distribution", start)
        if start.shape != (self.state_count,):
            raise InvalidConfigError("start distribution length != state count")
        if abs(start.sum() - 1.0) > PROB_TOL:
            raise InvalidConfigError("start distribution must sum to 1")
        if np.any(start < 0.0):
            raise InvalidConfigError("start probabilities must be nonnegative")
        if len(self.state_labels) != self.state_count:
            raise InvalidConfigError("state_labels length != state count")
        if len(set(self.counted_states)) != len(self.counted_states):
            raise InvalidConfigError("counted states must be distinct")
        for s in self.counted_states:
            if not 0 <= s < self.state_count:
                raise InvalidConfigError(f"counted state {s} out of range")
        for f, t in self.allowed_transitions:
            if not (0 <= f < self.state_count and 0 <= t < self.state_count):
                raise InvalidConfigError(f"transition ({f},{t}) out of range")
        self._check_reachability()

    def _check_reachability(self):
        reached = set(np.flatnonzero(self.start_distribution > 0.0).tolist())
        frontier = list(reached)
        succ = {}
        for f, t in self.allowed_transitions:
            succ.setdefault(f, []).append(t)
        while frontier:
            s = frontier.pop()
            for t in succ.get(s, ()):
                if t not in reached:
                    reached.add(t)
                    frontier.append(t)
        missing = set(range(self.state_count)) - reached
        if missing:
            raise InvalidConfigError(f"states unreachable from start: {sorted(missing)}")

    @property
    def counted_count(self):
        return len(self.counted_states)

    def transition_mask(self):
        """Boolean (S, S) matrix of allowed transitions."""
        mask = np.zeros((self.state_count, self.state_count), dtype=bool)
        for f, t in self.allowed_transitions:
            mask[f, t] = True
        return mask

    def successors(self, state):
        return sorted(t for f, t in self.allowed_transitions if f == state)

    def revisitable_states(self):
        """States that lie on a directed cycle (can be visited more than once)."""
        mask = self.transition_mask()
        reach = mask.copy()
        for _ in range(self.state_count):
            reach = reach | (reach @ mask)
        return set(np.flatnonzero(np.diag(reach)).tolist())


@dataclass(frozen=True)
class HmmParams:
    """Transition and emission probabilities over a fixed topology."""

    topology: HmmTopology
    transition: np.ndarray
    emission: np.ndarray

    def __post_init__(self):
        S = self.topology.state_count
        A = self.topology.alphabet.size
        trans = _freeze(np.asarray(self.transition, dtype=float))
        emis = _freeze(np.asarray(self.emission, dtype=float))
        object.__setattr__(self, "transition", trans)
        object.__setattr__(self, "emission", emis)
        if trans.shape != (S, S):
            raise InvalidConfigError("transition matrix shape mismatch")
        if emis.shape != (S, A):
            raise InvalidConfigError("emission matrix shape mismatch")
        if np.any(trans < 0.0) or np.any(trans > 1.0):
            raise InvalidConfigError("transition probabilities outside [0, 1]")
        if np.any(emis < 0.0) or np.any(emis > 1.0):
            raise InvalidConfigError("emission probabilities outside [0, 1]")
        mask = self.topology.transition_mask()
        if np.any(trans[~mask] != 0.0):
            raise InvalidConfigError("transition mass on a disallowed edge")
        if np.any(np.abs(trans.sum(axis=1) - 1.0) > PROB_TOL):
            raise InvalidConfigError("transition rows must sum to 1")
        if np.any(np.abs(emis.sum(axis=1) - 1.0) > PROB_TOL):
            raise InvalidConfigError("emission rows must sum to 1")


@dataclass(frozen=True)
class VisitCaps:
    """Per-counted-state visit ceilings; counts saturate at the cap."""

    caps: tuple

    def __post_init__(self):
        caps = tuple(int(h) for h in self.caps)
        object.__setattr__(self, "caps", caps)
        if any(h < 1 for h in caps):
            raise InvalidConfigError("every visit cap must be >= 1")

    @property
    def lattice_size(self):
        size = 1
        for h in self.caps:
            size *= h + 1
        return size

    def strides(self):
        """Mixed-radix strides; the first counted state is most significant."""
        strides = np.empty(len(self.caps), dtype=np.int64)
        acc = 1
        for k in range(len(self.caps) - 1, -1, -1):
            strides[k] = acc
            acc *= self.caps[k] + 1
        return strides

    def vector_to_index(self, v):
        return int(np.dot(self.strides(), np.minimum(v, self.caps)))

    def index_to_vector(self, u):
        strides = self.strides()
        return tuple(int((u // strides[k]) % (self.caps[k] + 1)) for k in range(len(self.caps)))

    def all_vectors(self):
        return [self.index_to_vector(u) for u in range(self.lattice_size)]


def default_caps(topology, cap=4):
    """Visit caps for a topology: `cap` per counted state, 1 where the counted
    state is structurally visit-once (not on any cycle)."""
    if cap < 1:
        raise InvalidConfigError("visit cap must be >= 1")
    revisitable = topology.revisitable_states()
    return VisitCaps(tuple(cap if c in revisitable else 1 for c in topology.counted_states))


def validate_path(path, topology):
    """Check a state path against the topology; raises on violation."""
    path = np.asarray(path, dtype=np.int64)
    if path.ndim != 1 or len(path) == 0:
        raise InvalidInputError("state path must be a non-empty 1-d sequence")
    if np.any(path < 0) or np.any(path >= topology.state_count):
        raise InvalidInputError("state index out of range")
    if topology.start_distribution[path[0]] <= 0.0:
        raise InvalidInputError(f"path starts in zero-probability state {path[0]}")
    allowed = topology.allowed_transitions
    for i in range(len(path) - 1):
        if (int(path[i]), int(path[i + 1])) not in allowed:
            raise InvalidInputError(f"transition {path[i]}->{path[i + 1]} not allowed")
    return path


def path_to_counts(path, topology, caps):
    """Visit vector of a state path: per counted state, the number of positions
    spent in it, saturated at the cap."""
    path = validate_path(path, topology)
    v = np.zeros(topology.counted_count, dtype=np.int64)
    for k, c in enumerate(topology.counted_states):
        v[k] = min(int(np.count_nonzero(path == c)), caps.caps[k])
    return v


# ---------------------------------------------------------------------------
# topology templates
# ---------------------------------------------------------------------------

def build_occurrence_topology(motif_count, motif_width, alphabet):
    """Background + one chain per motif; chain ends are counted.

    State 0 is the background with a self-transition.  Motif m occupies the
    contiguous block of `motif_width` states starting at 1 + m * motif_width;
    the background feeds each chain head and each chain tail returns to the
    background.
    """
    if motif_count < 1 or motif_width < 1:
        raise InvalidConfigError("motif_count and motif_width must be >= 1")
    S = 1 + motif_count * motif_width
    labels = ["background"]
    edges = {(0, 0)}
    counted = []
    for m in range(motif_count):
        head = 1 + m * motif_width
        tail = head + motif_width - 1
        labels.extend(f"motif:{m}:{j}" for j in range(motif_width))
        edges.add((0, head))
        for s in range(head, tail):
            edges.add((s, s + 1))
        edges.add((tail, 0))
        counted.append(tail)
    start = np.zeros(S)
    start[0] = 1.0
    return HmmTopology(
        alphabet=alphabet,
        state_count=S,
        start_distribution=start,
        allowed_transitions=frozenset(edges),
        counted_states=tuple(counted),
        state_labels=tuple(labels),
    )


def motif_arrangements(motif_count):
    """All ordered combinations of distinct motifs, shortest first; the empty
    arrangement is always present."""
    combos = [()]
    for size in range(1, motif_count + 1):
        combos.extend(itertools.permutations(range(motif_count), size))
    return combos


def _combo_tag(combo):
    return "none" if not combo else ">".join(f"m{m}" for m in combo)


def build_arrangement_topology(motif_count, motif_width, alphabet):
    """One branch per ordered motif combination, opened by a counted marker.

    Each branch starts with a marker state (counted, reachable only from the
    start, hence visited at most once), followed by background states that
    flank and separate that branch's private copies of the motif chains.  The
    final background of a branch self-loops.  The start distribution is
    uniform over the markers, so every path commits to exactly one
    combination at its first position.
    """
    if motif_count not in (1, 2):
        raise InvalidConfigError("arrangement template supports 1 or 2 motifs")
    if motif_width < 1:
        raise InvalidConfigError("motif_width must be >= 1")

    combos = motif_arrangements(motif_count)
    labels = []
    edges = set()
    counted = []

    def new_state(label):
        labels.append(label)
        return len(labels) - 1

    for combo in combos:
        marker = new_state(f"marker:{_combo_tag(combo)}")
        counted.append(marker)
        bg = new_state("background")
        edges.add((marker, bg))
        for m in combo:
            head = new_state(f"motif:{m}:0")
            edges.add((bg, bg))
            edges.add((bg, head))
            prev = head
            for j in range(1, motif_width):
                nxt = new_state(f"motif:{m}:{j}")
                edges.add((prev, nxt))
                prev = nxt
            bg = new_state("background")
            edges.add((prev, bg))
        edges.add((bg, bg))

    S = len(labels)
    start = np.zeros(S)
    start[counted] = 1.0 / len(counted)
    return HmmTopology(
        alphabet=alphabet,
        state_count=S,
        start_distribution=start,
        allowed_transitions=frozenset(edges),
        counted_states=tuple(counted),
        state_labels=tuple(labels),
    )


def motif_chains(topology):
    """Contiguous motif chains as lists of state indices, in state order."""
    chains = []
    current = []
    for s, label in enumerate(topology.state_labels):
        if label.startswith("motif:"):
            pos = int(label.rsplit(":", 1)[1])
            if pos == 0 and current:
                chains.append(current)
                current = []
            current.append(s)
        elif current:
            chains.append(current)
            current = []
    if current:
        chains.append(current)
    return chains


def topology_motif_count(topology):
    """Number of distinct motifs encoded in the state labels."""
    ids = {
        int(label.split(":")[1])
        for label in topology.state_labels
        if label.startswith("motif:")
    }
    return len(ids)


# ---------------------------------------------------------------------------
# parameter initialization
# ---------------------------------------------------------------------------

def _uniform_rows(topology):
    S = topology.state_count
    mask = topology.transition_mask()
    trans = mask / mask.sum(axis=1, keepdims=True)
    emis = np.full((S, topology.alphabet.size), 1.0 / topology.alphabet.size)
    return trans, emis


def _smoothed_onehot(size, hot):
    row = np.full(size, PSEUDOCOUNT)
    row[hot] += 1.0
    return row / row.sum()


def init_params(topology, kind="uniform", seed=None, dataset=None):
    """Build starting HmmParams.

    kind:
      "uniform"  - rows uniform over allowed successors / symbols.
      "random"   - rows drawn Dirichlet(1) with the given seed.
      "sample"   - uniform everywhere except motif chains, whose emissions are
                   smoothed one-hot encodings of a training subsequence drawn
                   uniformly at random (one draw per chain).
    """
    if kind == "uniform":
        trans, emis = _uniform_rows(topology)
        return HmmParams(topology, trans, emis)

    if kind == "random":
        rng = np.random.default_rng(seed)
        mask = topology.transition_mask()
        S = topology.state_count
        trans = np.zeros((S, S))
        for s in range(S):
            succ = np.flatnonzero(mask[s])
            trans[s, succ] = rng.dirichlet(np.ones(len(succ)))
        emis = rng.dirichlet(np.ones(topology.alphabet.size), size=S)
        return HmmParams(topology, trans, emis)

    if kind == "sample":
        if dataset is None or len(dataset) == 0:
            raise InvalidInputError("sampling initialization needs a non-empty dataset")
        rng = np.random.default_rng(seed)
        trans, emis = _uniform_rows(topology)
        sequences = [ex.sequence for ex in dataset]
        for chain in motif_chains(topology):
            width = len(chain)
            usable = [s for s in sequences if len(s) >= width]
            if not usable:
                raise InvalidInputError(
                    f"no training sequence is at least {width} characters long"
                )
            seq = usable[rng.integers(len(usable))]
            offset = rng.integers(len(seq) - width + 1)
            window = topology.alphabet.encode(seq[offset : offset + width])
            for state, symbol in zip(chain, window):
                emis[state] = _smoothed_onehot(topology.alphabet.size, symbol)
        return HmmParams(topology, trans, emis)

    raise InvalidConfigError(f"unknown initialization kind {kind!r}")
