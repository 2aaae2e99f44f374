"""Runlength-limited (RLL) constraint automata and combinatorial capacity.

A (d,k)-RLL constraint admits binary sequences in which any two successive
1s are separated by at least d and at most k 0s.  k may be infinite, which
drops the upper limit.  The automaton state counts the number of 0s seen
since the last 1 (saturating at d when k is infinite), so bit 1 is legal
exactly when the state is at least d, and bit 0 is legal while the state is
below k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

Bits = "str | Sequence[int]"


@dataclass(frozen=True)
class ConstraintSpec:
    """Parameters (d, k) of an RLL constraint; k = math.inf means unbounded."""

    d: int
    k: float = math.inf

    def __post_init__(self) -> None:
        if not isinstance(self.d, int) or self.d < 0:
            raise ValueError(f"d must be a non-negative integer, got {self.d!r}")
        if self.k != math.inf:
            if not isinstance(self.k, int) or self.k <= 0:
                raise ValueError(f"k must be a positive integer or inf, got {self.k!r}")
        if self.d > self.k:
            raise ValueError(f"need d <= k, got d={self.d}, k={self.k}")

    @property
    def unbounded(self) -> bool:
        return self.k == math.inf

    @property
    def num_states(self) -> int:
        # States 0..d for (d, inf), 0..k for finite k.
        return self.d + 1 if self.unbounded else int(self.k) + 1


@dataclass(frozen=True)
class ConstraintAutomaton:
    """Deterministic labelled state graph of an RLL constraint.

    State s counts trailing 0s (saturated at d when k is infinite).  The
    start state is the most permissive legal one, s0 = d, so a leading 1
    is always accepted.
    """

    spec: ConstraintSpec
    states: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]  # (from_state, bit, to_state)
    start: int

    def step(self, state: int, bit: int) -> int | None:
        """Follow one labelled edge; None if the bit is illegal at `state`."""
        spec = self.spec
        if bit == 1:
            return 0 if state >= spec.d else None
        if spec.unbounded:
            return min(state + 1, spec.d)
        return state + 1 if state < spec.k else None

    def adjacency(self) -> list[list[int]]:
        n = len(self.states)
        a = [[0] * n for _ in range(n)]
        for frm, _bit, to in self.edges:
            a[frm][to] += 1
        return a


def build_rll_automaton(spec: ConstraintSpec) -> ConstraintAutomaton:
    """Construct the canonical (d,k) automaton with states 0..min(k, d)."""
    n = spec.num_states
    states = tuple(range(n))
    edges = []
    for s in states:
        if s >= spec.d:
            edges.append((s, 1, 0))
        if spec.unbounded:
            edges.append((s, 0, min(s + 1, spec.d)))
        elif s < spec.k:
            edges.append((s, 0, s + 1))
    return ConstraintAutomaton(spec=spec, states=states, edges=tuple(edges), start=spec.d)


def _as_bits(bits: Bits) -> Iterable[int]:
    if isinstance(bits, str):
        for ch in bits:
            if ch not in "01":
                raise ValueError(f"bit string may contain only 0/1, got {ch!r}")
            yield ord(ch) - 48
    else:
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"bits must be 0/1, got {b!r}")
            yield b


def check_sequence(spec: ConstraintSpec, bits: Bits) -> bool:
    """True iff `bits` is accepted by the automaton started at s0 = d."""
    auto = build_rll_automaton(spec)
    state = auto.start
    for b in _as_bits(bits):
        nxt = auto.step(state, b)
        if nxt is None:
            return False
        state = nxt
    return True


def check_word(spec: ConstraintSpec, word: int, n: int) -> bool:
    """check_sequence for a length-n word packed into an int (bit j = symbol j).

    Fast path used by exhaustive codeword sweeps; agrees with check_sequence
    (property-tested).
    """
    if word < 0 or word >> n:
        raise ValueError("word does not fit in n bits")
    d, k = spec.d, spec.k
    for j in range(1, d + 1):
        if j >= n:
            break
        if word & (word >> j):
            return False  # two 1s closer than d+1 positions
    if k == math.inf:
        return True
    # Finite k: every run of 0s is capped at k; the leading run starts from
    # state d, so it is capped at k - d.
    kk = int(k)
    run, x = d, word
    for _ in range(n):
        if x & 1:
            run = 0
        else:
            run += 1
            if run > kk:
                return False
        x >>= 1
    return True


def count_sequences(spec: ConstraintSpec, n: int) -> int:
    """Exact number of accepted length-n strings (transfer-matrix DP)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    auto = build_rll_automaton(spec)
    dp = [0] * len(auto.states)
    dp[auto.start] = 1
    for _ in range(n):
        nxt = [0] * len(dp)
        for frm, _bit, to in auto.edges:
            nxt[to] += dp[frm]
        dp = nxt
    return sum(dp)


def noiseless_capacity(spec: ConstraintSpec) -> float:
    """log2 of the spectral radius of the constraint automaton's adjacency.

    Power iteration on A + I (primitive for irreducible A) from the all-ones
    vector, run to residual < 1e-12.
    """
    a = build_rll_automaton(spec).adjacency()
    n = len(a)
    v = [1.0] * n
    theta = 0.0
    for _ in range(100_000):
        w = [sum(a[i][j] * v[j] for j in range(n)) + v[i] for i in range(n)]
        theta = max(w)
        if theta == 0.0:
            return -math.inf
        w = [x / theta for x in w]
        resid = max(
            abs(sum(a[i][j] * w[j] for j in range(n)) + w[i] - theta * w[i])
            for i in range(n)
        )
        v = w
        if resid < 1e-12:
            break
    return math.log2(theta - 1.0)
