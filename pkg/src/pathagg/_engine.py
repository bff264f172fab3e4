"""Batched lattice kernels.

The dynamic program runs over pairs (state, visit-index) where the visit
index is a mixed-radix flattening of the per-counted-state visit vector.
Internally each position's table is renormalized to unit mass and the log of
the running normalizer is carried separately, so quantities are exact in log
space without intermediate underflow; public tables are reconstructed as
log(value) + cumulative log scale.

Kernels are batched over same-length sequences and parallelized per
sequence, so results are bit-deterministic regardless of thread count.
"""

import warnings

import numpy as np
from numba import njit, prange

from .errors import InvalidInputError

# numba probes TBB while picking its threading layer; the version probe is
# noisy on older TBB installs and the fallback layer works fine
warnings.filterwarnings("ignore", message=".*TBB threading layer requires.*")


@njit(cache=True, parallel=True)
def _forward_kernel(start, ef, et, ep, E, xs, inc, cmask, A, scale):
    Bn, L = xs.shape
    S = E.shape[0]
    V = A.shape[3]
    nE = ef.shape[0]
    for b in prange(Bn):
        Ab = A[b]
        for s in range(S):
            for u in range(V):
                Ab[0, s, u] = 0.0
        for s in range(S):
            p = start[s] * E[s, xs[b, 0]]
            if p != 0.0:
                k = cmask[s]
                if k >= 0:
                    Ab[0, s, inc[k, 0]] = p
                else:
                    Ab[0, s, 0] = p
        dead = False
        z = 0.0
        for s in range(S):
            for u in range(V):
                z += Ab[0, s, u]
        if z <= 0.0:
            dead = True
            scale[b, 0] = -np.inf
        else:
            inv = 1.0 / z
            for s in range(S):
                for u in range(V):
                    Ab[0, s, u] *= inv
            scale[b, 0] = np.log(z)
        for i in range(1, L):
            if dead:
                scale[b, i] = -np.inf
                for s in range(S):
                    for u in range(V):
                        Ab[i, s, u] = 0.0
                continue
            for s in range(S):
                for u in range(V):
                    Ab[i, s, u] = 0.0
            for e in range(nE):
                f = ef[e]
                t = et[e]
                p = ep[e]
                k = cmask[t]
                if k >= 0:
                    for u in range(V):
                        Ab[i, t, inc[k, u]] += Ab[i - 1, f, u] * p
                else:
                    for u in range(V):
                        Ab[i, t, u] += Ab[i - 1, f, u] * p
            z = 0.0
            for s in range(S):
                em = E[s, xs[b, i]]
                for u in range(V):
                    Ab[i, s, u] *= em
                    z += Ab[i, s, u]
            if z <= 0.0:
                dead = True
                scale[b, i] = -np.inf
            else:
                inv = 1.0 / z
                for s in range(S):
                    for u in range(V):
                        Ab[i, s, u] *= inv
                scale[b, i] = scale[b, i - 1] + np.log(z)


@njit(cache=True, parallel=True)
def _stats_kernel(ef, et, ep, E, xs, inc, cmask, A, base,
                  trans_out, emis_out, vpost_out, lastz_out, ok):
    Bn, L = xs.shape
    S = E.shape[0]
    V = base.shape[1]
    nE = ef.shape[0]
    for b in prange(Bn):
        Ab = A[b]
        beta = np.empty((S, V))
        beta_new = np.empty((S, V))
        nxt = np.empty((S, V))
        edge_acc = np.empty(nE)
        for s in range(S):
            for u in range(V):
                beta[s, u] = base[b, u]
        # posterior at the last position: visit distribution and gamma
        zg = 0.0
        for s in range(S):
            for u in range(V):
                zg += Ab[L - 1, s, u] * beta[s, u]
        lastz_out[b] = zg
        if zg <= 0.0:
            ok[b] = 0
            continue
        for s in range(S):
            g = 0.0
            for u in range(V):
                g += Ab[L - 1, s, u] * beta[s, u]
            emis_out[b, s, xs[b, L - 1]] += g / zg
        for u in range(V):
            w = 0.0
            for s in range(S):
                w += Ab[L - 1, s, u] * beta[s, u]
            vpost_out[b, u] = w / zg
        for i in range(L - 2, -1, -1):
            # nxt[t, u] = E[t, x_{i+1}] * beta_{i+1}[t, inc_t(u)]
            for t in range(S):
                em = E[t, xs[b, i + 1]]
                k = cmask[t]
                if k >= 0:
                    for u in range(V):
                        nxt[t, u] = em * beta[t, inc[k, u]]
                else:
                    for u in range(V):
                        nxt[t, u] = em * beta[t, u]
            # single edge sweep: transition posteriors and the new beta slab
            for s in range(S):
                for u in range(V):
                    beta_new[s, u] = 0.0
            zx = 0.0
            for e in range(nE):
                f = ef[e]
                t = et[e]
                p = ep[e]
                acc = 0.0
                for u in range(V):
                    pn = p * nxt[t, u]
                    beta_new[f, u] += pn
                    acc += Ab[i, f, u] * pn
                edge_acc[e] = acc
                zx += acc
            if zx <= 0.0:
                ok[b] = 0
                break
            for e in range(nE):
                trans_out[b, ef[e], et[e]] += edge_acc[e] / zx
            zb = 0.0
            for s in range(S):
                for u in range(V):
                    zb += beta_new[s, u]
            invb = 1.0 / zb
            for s in range(S):
                for u in range(V):
                    beta[s, u] = beta_new[s, u] * invb
            # gamma_i for emission counts
            zg = 0.0
            for s in range(S):
                for u in range(V):
                    zg += Ab[i, s, u] * beta[s, u]
            if zg <= 0.0:
                ok[b] = 0
                break
            for s in range(S):
                g = 0.0
                for u in range(V):
                    g += Ab[i, s, u] * beta[s, u]
                emis_out[b, s, xs[b, i]] += g / zg


@njit(cache=True, parallel=True)
def _viterbi_kernel(logstart, vef, vet, vlogp, logE, xs, paths, logps, ok):
    Bn, L = xs.shape
    S = logE.shape[0]
    nE = vef.shape[0]
    NEG = -np.inf
    for b in prange(Bn):
        delta = np.empty((L, S))
        bp = np.zeros((L, S), dtype=np.int64)
        for s in range(S):
            delta[0, s] = logstart[s] + logE[s, xs[b, 0]]
        for i in range(1, L):
            for s in range(S):
                delta[i, s] = NEG
            # edges are sorted by (to, from); strict > keeps the smallest
            # predecessor on ties
            for e in range(nE):
                f = vef[e]
                t = vet[e]
                c = delta[i - 1, f] + vlogp[e]
                if c > delta[i, t]:
                    delta[i, t] = c
                    bp[i, t] = f
            for s in range(S):
                delta[i, s] += logE[s, xs[b, i]]
        best = NEG
        arg = -1
        for s in range(S):
            if delta[L - 1, s] > best:
                best = delta[L - 1, s]
                arg = s
        if arg < 0 or best == NEG:
            ok[b] = 0
            continue
        logps[b] = best
        paths[b, L - 1] = arg
        for i in range(L - 1, 0, -1):
            arg = bp[i, arg]
            paths[b, i - 1] = arg


class LatticeEngine:
    """Precomputed kernel inputs for one (HmmParams, VisitCaps) pair."""

    def __init__(self, params, caps):
        topo = params.topology
        self.params = params
        self.caps = caps
        self.S = topo.state_count
        self.N = topo.counted_count
        self.V = caps.lattice_size
        if len(caps.caps) != self.N:
            raise InvalidInputError("visit caps length != counted state count")

        edges = sorted(topo.allowed_transitions)
        self.edge_from = np.array([f for f, _ in edges], dtype=np.int64)
        self.edge_to = np.array([t for _, t in edges], dtype=np.int64)
        self.edge_prob = np.array([params.transition[f, t] for f, t in edges])

        vedges = sorted(topo.allowed_transitions, key=lambda e: (e[1], e[0]))
        self.vedge_from = np.array([f for f, _ in vedges], dtype=np.int64)
        self.vedge_to = np.array([t for _, t in vedges], dtype=np.int64)
        with np.errstate(divide="ignore"):
            self.vedge_logp = np.log(
                np.array([params.transition[f, t] for f, t in vedges])
            )
            self.log_start = np.log(topo.start_distribution)
            self.log_emission = np.log(params.emission)

        self.counted_mask = np.full(self.S, -1, dtype=np.int64)
        for k, c in enumerate(topo.counted_states):
            self.counted_mask[c] = k

        strides = caps.strides()
        u = np.arange(self.V, dtype=np.int64)
        self.digits = np.empty((self.N, self.V), dtype=np.int64)
        self.inc = np.tile(u, (max(self.N, 1), 1))
        for k in range(self.N):
            digit = (u // strides[k]) % (caps.caps[k] + 1)
            self.digits[k] = digit
            self.inc[k] = np.where(digit < caps.caps[k], u + strides[k], u)

    def encode_batch(self, sequences):
        """Encode same-length sequences into one (B, L) index array."""
        alphabet = self.params.topology.alphabet
        return np.stack([alphabet.encode(x) for x in sequences])

    def forward_tables(self, xs):
        """Scaled forward tables for a (B, L) symbol batch.

        Returns (A, scale): A[b, i] sums to 1 over (state, visit index) and
        scale[b, i] = log P(x_1..i); scale is -inf past a zero-evidence
        position.
        """
        Bn, L = xs.shape
        A = np.empty((Bn, L, self.S, self.V))
        scale = np.empty((Bn, L))
        _forward_kernel(
            self.params.topology.start_distribution,
            self.edge_from, self.edge_to, self.edge_prob,
            self.params.emission, xs, self.inc, self.counted_mask, A, scale,
        )
        return A, scale

    def response_weights(self, ys, regression):
        """Backward seeds p(y | v) per sequence, max-normalized.

        Returns (base, logshift) with true weight = base * exp(logshift).
        """
        means = self.digits.T @ regression.coefficients
        if regression.intercept is not None:
            means = means + regression.intercept
        resid = (np.asarray(ys)[:, None] - means[None, :]) / regression.sigma
        logw = -0.5 * resid * resid - np.log(regression.sigma) - 0.5 * np.log(2.0 * np.pi)
        shift = logw.max(axis=1)
        return np.exp(logw - shift[:, None]), shift

    def stats(self, xs, ys=None, regression=None):
        """Forward/backward pass with per-position posterior accumulation.

        Returns a dict with per-batch transition/emission expected counts,
        per-sequence visit posteriors (response-conditioned when a regression
        and responses are given), log P(x), log evidence (log p(x, y) when
        conditioning, else log P(x)), and an `ok` flag per sequence that is 0
        where the evidence vanished.
        """
        Bn, L = xs.shape
        A, scale = self.forward_tables(xs)
        if regression is not None and ys is not None:
            base, shift = self.response_weights(ys, regression)
        else:
            base = np.ones((Bn, self.V))
            shift = np.zeros(Bn)
        trans = np.zeros((Bn, self.S, self.S))
        emis = np.zeros((Bn, self.S, self.params.topology.alphabet.size))
        vpost = np.zeros((Bn, self.V))
        lastz = np.zeros(Bn)
        ok = np.ones(Bn, dtype=np.int64)
        _stats_kernel(
            self.edge_from, self.edge_to, self.edge_prob,
            self.params.emission, xs, self.inc, self.counted_mask,
            A, base, trans, emis, vpost, lastz, ok,
        )
        loglik = scale[:, L - 1]
        ok = (ok != 0) & np.isfinite(loglik)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_evidence = loglik + shift + np.log(lastz)
        return {
            "transition_counts": trans,
            "emission_counts": emis,
            "visit_posteriors": vpost,
            "log_likelihood": loglik,
            "log_evidence": log_evidence,
            "ok": ok,
        }

    def log_evidence(self, xs, ys=None, regression=None):
        """log P(x) per sequence, or log p(x, y) when response-conditioned.

        Zero-evidence sequences yield -inf entries rather than an error.
        """
        Bn, L = xs.shape
        A, scale = self.forward_tables(xs)
        last = A[:, L - 1]
        loglik = scale[:, L - 1]
        if regression is None or ys is None:
            return loglik
        base, shift = self.response_weights(ys, regression)
        mass = np.einsum("bsv,bv->b", last, base)
        with np.errstate(divide="ignore"):
            return loglik + shift + np.log(mass)

    def viterbi(self, xs):
        """Most probable state paths for a (B, L) batch.

        Returns (paths, logps, ok); ok[b] == 0 marks sequences with no
        positive-probability path.
        """
        Bn, L = xs.shape
        paths = np.zeros((Bn, L), dtype=np.int64)
        logps = np.full(Bn, -np.inf)
        ok = np.ones(Bn, dtype=np.int64)
        _viterbi_kernel(
            self.log_start, self.vedge_from, self.vedge_to, self.vedge_logp,
            self.log_emission, xs, paths, logps, ok,
        )
        return paths, logps, ok
