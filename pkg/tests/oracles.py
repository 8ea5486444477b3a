"""Brute-force references used only by the tests.

Everything here walks explicit game trees or enumerates action sequences,
sharing no code with the vectorized solvers it checks.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache


def _acts(spec, s):
    return range(len(spec.transitions[s])), range(len(spec.transitions[s][0]))


def minimax_total(spec, s, n, lower=True):
    """Sum of the first ``n`` payoffs under optimal play; the maximizer moves first iff ``lower``."""

    @lru_cache(maxsize=None)
    def go(s, n):
        if n == 0:
            return 0.0
        A, B = _acts(spec, s)
        g = spec.payoff[s]
        if lower:
            return max(min(g + go(spec.transitions[s][a][b], n - 1) for b in B) for a in A)
        return min(max(g + go(spec.transitions[s][a][b], n - 1) for a in A) for b in B)

    return go(s, n)


def minimax_tree(spec, s, n, lower=True):
    """Same as ``minimax_total`` but without memoization: an honest tree walk."""
    if n == 0:
        return 0.0
    A, B = _acts(spec, s)
    g = spec.payoff[s]
    nxt = spec.transitions[s]
    if lower:
        return max(min(g + minimax_tree(spec, nxt[a][b], n - 1, lower) for b in B) for a in A)
    return min(max(g + minimax_tree(spec, nxt[a][b], n - 1, lower) for a in A) for b in B)


def discounted_minimax(spec, s, mu, depth, lower=True):
    """Depth-truncated discounted value; the truncation error is at most ``(1-mu)^depth``."""

    @lru_cache(maxsize=None)
    def go(s, d):
        if d == 0:
            return 0.0
        A, B = _acts(spec, s)
        g = mu * spec.payoff[s]
        q = 1.0 - mu
        if lower:
            return max(min(g + q * go(spec.transitions[s][a][b], d - 1) for b in B) for a in A)
        return min(max(g + q * go(spec.transitions[s][a][b], d - 1) for a in A) for b in B)

    return go(s, depth)


def enumerate_response(spec, s0, published, weights, terminal_weight=0.0, terminal=None,
                       publisher_is_max=True):
    """Responder's optimum by enumerating every open-loop action sequence.

    Against a fixed feedback schedule in a deterministic game an open-loop
    sequence is as good as any closed-loop response.
    """
    n = len(weights)
    n_resp = max(len(spec.transitions[s][0]) if publisher_is_max else len(spec.transitions[s])
                 for s in range(len(spec.payoff)))
    best = None
    for seq in itertools.product(range(n_resp), repeat=n):
        try:
            states = _legal_play(spec, s0, published, seq, publisher_is_max)
        except IndexError:
            continue
        val = math.fsum(w * spec.payoff[x] for w, x in zip(weights, states))
        if terminal is not None:
            val += terminal_weight * terminal[states[n]]
        if best is None or (val < best if publisher_is_max else val > best):
            best = val
    return best


def _legal_play(spec, s0, published, seq, publisher_is_max):
    states = [s0]
    s = s0
    for t, r in enumerate(seq):
        p = published.active(t).actions[s]
        a, b = (p, r) if publisher_is_max else (r, p)
        if a >= len(spec.transitions[s]) or b >= len(spec.transitions[s][0]):
            raise IndexError
        s = spec.transitions[s][a][b]
        states.append(s)
    return states


def bolza_tree(spec, s, weights, terminal_weight, terminal, lower=True, t=0):
    """Lower/upper value of ``sum_t weights[t] g(y_t) + terminal_weight * terminal(y_h)``."""
    if t == len(weights):
        return terminal_weight * terminal[s]
    A, B = _acts(spec, s)
    g = weights[t] * spec.payoff[s]
    nxt = spec.transitions[s]

    def rec(x):
        return bolza_tree(spec, x, weights, terminal_weight, terminal, lower, t + 1)

    if lower:
        return max(min(g + rec(nxt[a][b]) for b in B) for a in A)
    return min(max(g + rec(nxt[a][b]) for a in A) for b in B)
