"""Zero-error feedback coding over the (d,inf)-constrained BEC.

The message is a point of [0,1); the decoder maintains an uncertainty
region (a finite union of dyadic intervals) that provably always contains
it.  Each transmission round partitions the region into cells A_0..A_d of
relative masses delta_0..delta_d plus a remainder.  At round slot a the
encoder sends 1 exactly when the message lies in cell A_{a mod (d+1)}: a
delivered 1 shrinks the region to that cell (followed by d forced zeros),
a delivered 0 removes the cell, and an erasure just advances the attempt,
so retransmissions of a cell are d+1 slots apart and the run-length
constraint is kept even across erased 1s.  Points that sent an erased 1
shortly before a round starts carry a cooldown and are only assigned to
late-enough cells; when that is infeasible the round is preceded by idle
zeros.

All interval arithmetic is exact: endpoints are integers at scale 2^-B,
and B grows by 53 bits per round so that cell widths (region width times
the 53-bit dyadic cell fractions) stay integral.  Encoder and decoder run
the same state machine off the shared output feedback, which is what makes
the scheme zero-error.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

from .capacity import SplitVector, binary_entropy, rate_R

FRACTION_BITS = 53

_ROUND, _FORCED, _IDLE = 0, 1, 2


def dyadic_masses(delta: "SplitVector | Sequence[float]") -> tuple[int, ...]:
    """Cell fractions as 53-bit dyadic numerators (floor; sum stays <= 2^53)."""
    vec = delta.delta if isinstance(delta, SplitVector) else tuple(delta)
    if any(not 0.0 <= x <= 1.0 for x in vec) or sum(vec) > 1.0 + 1e-12:
        raise ValueError("delta must lie in the simplex")
    masses = [min(1 << FRACTION_BITS, math.floor(x * (1 << FRACTION_BITS))) for x in vec]
    # Simplex slack of ~1e-12 can round to a few ulps above the scale; shave
    # them off the largest entries so the cell fractions stay a partition.
    excess = sum(masses) - (1 << FRACTION_BITS)
    while excess > 0:
        top = masses.index(max(masses))
        cut = min(excess, masses[top])
        masses[top] -= cut
        excess -= cut
    return tuple(masses)


def analytic_rate(delta: "SplitVector | Sequence[float]", eps: float, d: int) -> float:
    """Renewal rate of the scheme: expected bits per expected slot of a cycle.

    Summed directly over the slot-by-slot cycle law (attempt t is reached
    iff the first t outputs were erasures; a non-erasure at attempt t
    resolves cell t mod (d+1), earning its entropy and, when it resolved to
    a 1, costing d extra forced zeros).  Truncated once the survival
    probability drops below 1e-22.
    """
    vec = delta.delta if isinstance(delta, SplitVector) else tuple(delta)
    if len(vec) != d + 1:
        raise ValueError("delta must have length d+1")
    if not (0.0 <= eps <= 1.0):
        raise ValueError("eps must lie in [0,1]")
    if eps >= 1.0:
        return 0.0
    h = [binary_entropy(x) for x in vec]
    info = 0.0
    slots = 0.0
    p_one = 0.0
    p_t = 1.0 - eps  # probability the round resolves exactly at slot t
    t = 0
    while p_t > 1e-22 and t < 10_000_000:
        i = t % (d + 1)
        info += p_t * h[i]
        slots += p_t * (t + 1)
        p_one += p_t * vec[i]
        p_t *= eps
        t += 1
    duration = slots + d * p_one
    return info / duration if duration > 0.0 else 0.0


class SchemeState:
    """Decoder-visible state machine; the encoder holds an identical copy.

    Fragments are [lo, hi, last1] triples: integer endpoints at scale 2^-B
    and the slot of the fragment's most recent transmitted 1 (None if that
    1 is older than the constraint horizon).
    """

    __slots__ = (
        "d", "masses", "msg_bits", "scale", "t", "mode", "countdown",
        "attempt", "round_start", "round_id", "frags", "cells", "remainder",
    )

    def __init__(self, masses: tuple[int, ...], d: int, msg_bits: int, scale: int):
        if len(masses) != d + 1:
            raise ValueError("need d+1 cell masses")
        self.d = d
        self.masses = masses
        self.msg_bits = msg_bits
        self.scale = scale
        self.t = 0
        self.mode = _IDLE
        self.countdown = 0
        self.attempt = 0
        self.round_start = 0
        self.round_id = 0
        self.frags: list[list] = [[0, 1 << scale, None]]
        self.cells: list[list[list]] = []
        self.remainder: list[list] = []
        self._prepare()

    # -- round construction -------------------------------------------------

    def _cooldown(self, last1) -> int:
        if last1 is None:
            return 0
        return max(0, last1 + self.d + 1 - self.t)

    def _prepare(self) -> None:
        """Start a round at the current slot if the cooldown masses allow it."""
        d = self.d
        merged: list[list] = []
        for lo, hi, last1 in self.frags:
            c = self._cooldown(last1)
            if c == 0:
                last1 = None
            if merged and merged[-1][1] == lo and merged[-1][2] == last1:
                merged[-1][1] = hi
            else:
                merged.append([lo, hi, last1])
        self.frags = merged
        cool = [self._cooldown(last1) for _lo, _hi, last1 in self.frags]
        width = sum(hi - lo for lo, hi, _ in self.frags)
        # Feasibility: mass of cooldown <= c must cover cells A_0..A_c.
        need = 0
        feasible = True
        for c in range(d + 1):
            need += self.masses[c] * width
            have = sum(
                hi - lo for (lo, hi, _), cc in zip(self.frags, cool) if cc <= c
            ) << FRACTION_BITS
            if need > have:
                feasible = False
                break
        if not feasible:
            self.mode = _IDLE
            return

        # Rescale so cell widths are exact, then sweep-assign by cooldown.
        self.scale += FRACTION_BITS
        avail = [[lo << FRACTION_BITS, hi << FRACTION_BITS, last1] for lo, hi, last1 in self.frags]
        cool = [self._cooldown(last1) for _lo, _hi, last1 in avail]
        cells: list[list[list]] = []
        for j in range(d + 1):
            target = self.masses[j] * width
            cell: list[list] = []
            for piece, c in zip(avail, cool):
                if target == 0:
                    break
                if c > j or piece[0] >= piece[1]:
                    continue
                take = min(piece[1] - piece[0], target)
                cell.append([piece[0], piece[0] + take, piece[2]])
                piece[0] += take
                target -= take
            if target != 0:
                raise AssertionError("cell assignment failed despite feasibility")
            cells.append(cell)
        self.cells = cells
        self.remainder = [p for p in avail if p[0] < p[1]]
        self.frags = sorted(
            (p for cell in cells for p in cell), key=lambda p: p[0]
        ) + self.remainder
        self.frags.sort(key=lambda p: p[0])
        self.mode = _ROUND
        self.attempt = 0
        self.round_start = self.t
        self.round_id += 1

    # -- one channel use ----------------------------------------------------

    def sends_one(self, cell_index: "int | None") -> bool:
        """Would a point living in `cell_index` transmit a 1 this slot?"""
        return (
            self.mode == _ROUND
            and cell_index is not None
            and cell_index == self.attempt % (self.d + 1)
        )

    def advance(self, y: str) -> None:
        d = self.d
        if self.mode == _ROUND:
            if y == "?":
                self.attempt += 1
                self.t += 1
                return
            c = self.attempt % (d + 1)
            if y == "1":
                if not self.cells[c]:
                    raise AssertionError("output 1 observed from an empty cell")
                self.frags = [[lo, hi, self.t] for lo, hi, _ in self.cells[c]]
                self.t += 1
                if d > 0:
                    self.mode = _FORCED
                    self.countdown = d
                else:
                    self._prepare()
                return
            # y == "0": drop the active cell, mark survivors' last real 1.
            rho = self.attempt
            t0 = self.round_start
            survivors: list[list] = []
            for i, cell in enumerate(self.cells):
                if i == c:
                    continue
                if rho - 1 >= i:
                    last_tx = t0 + i + (d + 1) * ((rho - 1 - i) // (d + 1))
                    survivors.extend([lo, hi, last_tx] for lo, hi, _ in cell)
                else:
                    survivors.extend([lo, hi, l1] for lo, hi, l1 in cell)
            survivors.extend([lo, hi, l1] for lo, hi, l1 in self.remainder)
            if not survivors:
                raise AssertionError("uncertainty region vanished; scheme contract broken")
            survivors.sort(key=lambda p: p[0])
            self.frags = survivors
            self.t += 1
            self._prepare()
            return
        if self.mode == _FORCED:
            self.countdown -= 1
            self.t += 1
            if self.countdown == 0:
                self._prepare()
            return
        # Idle slot forced by cooldown infeasibility.
        self.t += 1
        self._prepare()

    # -- observers -----------------------------------------------------------

    def region_width(self) -> int:
        return sum(hi - lo for lo, hi, _ in self.frags)

    def resolved_prefix(self) -> int:
        """Number of leading message bits pinned down by the region."""
        lo = self.frags[0][0]
        hi = self.frags[-1][1] - 1
        diff = lo ^ hi
        common = self.scale - diff.bit_length()
        return max(0, min(self.msg_bits, common))

    def decoded_message(self) -> "int | None":
        """The message integer once the region fits inside one dyadic bin."""
        if self.resolved_prefix() < self.msg_bits:
            return None
        return self.frags[0][0] >> (self.scale - self.msg_bits)

    def contains(self, point0: int, scale0: int) -> bool:
        p = point0 << (self.scale - scale0)
        return any(lo <= p < hi for lo, hi, _ in self.frags)

    def serialize(self) -> bytes:
        payload = (
            self.d, self.masses, self.msg_bits, self.scale, self.t, self.mode,
            self.countdown, self.attempt, self.round_start, self.round_id,
            [tuple(f) for f in self.frags],
            [[tuple(p) for p in cell] for cell in self.cells],
            [tuple(p) for p in self.remainder],
        )
        return repr(payload).encode()


class Encoder:
    """SchemeState plus knowledge of the message point."""

    def __init__(self, state: SchemeState, point: int, point_scale: int):
        self.state = state
        self.point0 = point
        self.scale0 = point_scale
        self._cell_round = -1
        self._cell: "int | None" = None

    def _locate(self) -> None:
        st = self.state
        p = self.point0 << (st.scale - self.scale0)
        self._cell = None
        for j, cell in enumerate(st.cells):
            if any(lo <= p < hi for lo, hi, _ in cell):
                self._cell = j
                break
        self._cell_round = st.round_id

    def next_input(self) -> int:
        st = self.state
        if st.mode != _ROUND:
            return 0
        if self._cell_round != st.round_id:
            self._locate()
        return 1 if st.sends_one(self._cell) else 0


@dataclass(frozen=True)
class SimulationReport:
    channel_uses: int
    resolved_bits: int
    empirical_rate: float
    analytic_rate: float
    errors: int
    constraint_ok: bool
    seed: int
    decoded: "str | None" = None
    synchronized: "bool | None" = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "channel_uses": self.channel_uses,
                "resolved_bits": self.resolved_bits,
                "empirical_rate": self.empirical_rate,
                "analytic_rate": self.analytic_rate,
                "errors": self.errors,
                "constraint_ok": self.constraint_ok,
                "seed": self.seed,
            }
        )


def simulate(
    message_bits: str,
    eps: float,
    delta: "SplitVector | Sequence[float]",
    d: int,
    seed: int,
    max_uses: "int | None" = None,
    dual_state: bool = True,
    sync_every_step: bool = False,
) -> SimulationReport:
    """Run one zero-error session until the message is fully resolved.

    Deterministic given the seed (one erasure draw per channel use).  With
    dual_state the encoder and decoder evolve separate state machines off
    the shared feedback; sync_every_step additionally compares their
    serialized bytes after every slot.
    """
    if any(ch not in "01" for ch in message_bits):
        raise ValueError("message must be a 0/1 string")
    if not message_bits:
        raise ValueError("message must be nonempty")
    if not (0.0 <= eps <= 1.0):
        raise ValueError("eps must lie in [0,1]")
    vec = delta.delta if isinstance(delta, SplitVector) else tuple(delta)
    masses = dyadic_masses(vec)
    L = len(message_bits)
    msg = int(message_bits, 2)
    scale0 = L + 1
    point = (msg << 1) | 1  # bin midpoint at scale L+1

    dec = SchemeState(masses, d, L, scale0)
    enc_state = SchemeState(masses, d, L, scale0) if dual_state else dec
    enc = Encoder(enc_state, point, scale0)
    rng = random.Random(seed)

    uses = 0
    last_one = -(d + 1)
    constraint_ok = True
    synchronized = True if dual_state else None
    budget = max_uses if max_uses is not None else _default_budget(L, vec, eps, d)
    region_tag = None
    while uses < budget:
        if dec.frags is not region_tag:  # region changed; re-test completion
            region_tag = dec.frags
            if dec.decoded_message() is not None:
                break
        x = enc.next_input()
        y = "?" if rng.random() < eps else ("1" if x else "0")
        if x == 1:
            if uses - last_one <= d:
                constraint_ok = False
            last_one = uses
        enc_state.advance(y)
        if dual_state:
            dec.advance(y)
            if sync_every_step and enc_state.serialize() != dec.serialize():
                synchronized = False
        uses += 1
    if dual_state and enc_state.serialize() != dec.serialize():
        synchronized = False
    if not dec.contains(point, scale0):
        raise AssertionError("true message point left the uncertainty region")

    decoded = dec.decoded_message()
    resolved = dec.resolved_prefix()
    errors = 0
    decoded_str = None
    if decoded is not None:
        decoded_str = format(decoded, f"0{L}b")
        errors = 0 if decoded == msg else 1
    rate = resolved / uses if uses else 0.0
    return SimulationReport(
        channel_uses=uses,
        resolved_bits=resolved,
        empirical_rate=rate,
        analytic_rate=analytic_rate(vec, eps, d),
        errors=errors,
        constraint_ok=constraint_ok,
        seed=seed,
        decoded=decoded_str,
        synchronized=synchronized,
    )


def _default_budget(L: int, vec: Sequence[float], eps: float, d: int) -> int:
    r = analytic_rate(vec, eps, d)
    if r <= 0.0:
        return 50 * L + 1000
    return int(5 * L / r) + 2000


def random_message(length: int, seed: int) -> str:
    rng = random.Random(seed)
    return "".join("1" if rng.random() < 0.5 else "0" for _ in range(length))


def measure_empirical_rate(
    d: int,
    eps: float,
    delta: "SplitVector | Sequence[float]",
    total_uses: int,
    message_len: int = 256,
    seed: int = 1,
) -> dict:
    """Aggregate rate over back-to-back sessions totalling >= total_uses."""
    uses = 0
    bits = 0
    sessions = 0
    while uses < total_uses:
        msg = random_message(message_len, seed * 1_000_003 + sessions)
        rep = simulate(msg, eps, delta, d, seed + sessions, dual_state=False)
        if rep.errors or not rep.constraint_ok:
            raise AssertionError("zero-error contract violated in bulk run")
        uses += rep.channel_uses
        bits += rep.resolved_bits
        sessions += 1
    return {
        "channel_uses": uses,
        "resolved_bits": bits,
        "empirical_rate": bits / uses,
        "sessions": sessions,
    }
