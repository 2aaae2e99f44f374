"""Reed-Muller code algebra over GF(2) and RLL-constrained subcodes.

Evaluation vectors are packed into Python ints: bit j of the int is the
codeword symbol at evaluation-point index j, where the point (y_1,...,y_m)
has index sum_i y_i 2^(m-i).  Variable x_1 is thus the most significant
coordinate and x_m toggles between consecutive indices, which is what makes
the product of the last z variables a runlength-friendly codeword: its
support sits on indices 2^z-1 mod 2^z, spaced 2^z - 1 zeros apart.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .capacity import q_inverse
from .constraint import ConstraintSpec, check_word

_ENUM_DIM_CAP = 22  # exhaustive sweeps stay under ~4M codewords

Monomial = frozenset


# ---------------------------------------------------------------------------
# Boolean polynomials in algebraic normal form


@dataclass(frozen=True)
class BooleanPoly:
    """Multilinear polynomial over GF(2): a set of monomials on x_1..x_m."""

    m: int
    monomials: frozenset

    def __post_init__(self) -> None:
        for s in self.monomials:
            if any(not 1 <= v <= self.m for v in s):
                raise ValueError(f"monomial {set(s)} uses variables outside 1..{self.m}")

    @staticmethod
    def zero(m: int) -> "BooleanPoly":
        return BooleanPoly(m, frozenset())

    @staticmethod
    def one(m: int) -> "BooleanPoly":
        return BooleanPoly(m, frozenset({Monomial()}))

    @staticmethod
    def variable(m: int, i: int) -> "BooleanPoly":
        return BooleanPoly(m, frozenset({Monomial({i})}))

    @staticmethod
    def from_terms(m: int, terms: Iterable[Iterable[int]]) -> "BooleanPoly":
        mono: set = set()
        for t in terms:
            mono ^= {Monomial(t)}
        return BooleanPoly(m, frozenset(mono))

    @property
    def degree(self) -> int:
        return max((len(s) for s in self.monomials), default=0)

    def __add__(self, other: "BooleanPoly") -> "BooleanPoly":
        if self.m != other.m:
            raise ValueError("mixed variable counts")
        return BooleanPoly(self.m, self.monomials ^ other.monomials)

    def __mul__(self, other: "BooleanPoly") -> "BooleanPoly":
        if self.m != other.m:
            raise ValueError("mixed variable counts")
        acc: set = set()
        for a in self.monomials:
            for b in other.monomials:
                acc ^= {a | b}
        return BooleanPoly(self.m, frozenset(acc))


@dataclass(frozen=True)
class EvalVector:
    """Length-2^m binary evaluation vector, packed LSB-first by point index."""

    m: int
    bits: int

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >> (1 << self.m):
            raise ValueError("bits do not fit in 2^m positions")

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def support(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n) if (self.bits >> j) & 1)

    def to01(self) -> str:
        return "".join("1" if (self.bits >> j) & 1 else "0" for j in range(self.n))

    @staticmethod
    def from01(s: str) -> "EvalVector":
        m = (len(s) - 1).bit_length()
        if len(s) != 1 << m:
            raise ValueError("length must be a power of two")
        bits = 0
        for j, ch in enumerate(s):
            if ch == "1":
                bits |= 1 << j
        return EvalVector(m, bits)


def variable_mask(m: int, i: int) -> int:
    """Packed Eval(x_i): bit j set iff coordinate i of point j is 1."""
    if not 1 <= i <= m:
        raise ValueError(f"variable index {i} outside 1..{m}")
    half = 1 << (m - i)  # run length of equal values
    chunk = ((1 << half) - 1) << half  # one period: half 0s then half 1s
    width = 2 * half
    mask = chunk
    while width < (1 << m):
        mask |= mask << width
        width *= 2
    return mask


def monomial_mask(m: int, s: Iterable[int]) -> int:
    mask = (1 << (1 << m)) - 1
    for i in s:
        mask &= variable_mask(m, i)
    return mask


def evaluate(poly: BooleanPoly) -> EvalVector:
    """Pointwise GF(2) evaluation; linear in the polynomial."""
    if poly.m > 24:
        raise ValueError("m > 24 would materialize vectors beyond 16M bits")
    bits = 0
    for s in poly.monomials:
        bits ^= monomial_mask(poly.m, s)
    return EvalVector(poly.m, bits)


# ---------------------------------------------------------------------------
# Generator matrices and GF(2) linear algebra


def rm_dimension(m: int, r: int) -> int:
    """(m choose <= r) = sum_{i<=r} C(m, i)."""
    return sum(math.comb(m, i) for i in range(min(r, m) + 1))


@dataclass(frozen=True)
class RMCode:
    m: int
    r: int
    rows: tuple[int, ...]  # packed generator rows, ordered by (degree, lex)

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def dimension(self) -> int:
        return len(self.rows)


def rm_generator(m: int, r: int) -> RMCode:
    if not 0 <= r <= m:
        raise ValueError(f"need 0 <= r <= m, got r={r}, m={m}")
    rows = []
    for deg in range(r + 1):
        for s in itertools.combinations(range(1, m + 1), deg):
            rows.append(monomial_mask(m, s))
    code = RMCode(m=m, r=r, rows=tuple(rows))
    if gf2_rank(rows) != len(rows):
        raise AssertionError("generator rows must be linearly independent")
    if len(rows) != rm_dimension(m, r):
        raise AssertionError("dimension mismatch against the binomial formula")
    return code


def gf2_rank(rows: Sequence[int]) -> int:
    """Rank of packed GF(2) row vectors by elimination on leading bits."""
    pivots: dict[int, int] = {}  # leading bit -> reduced row
    for row in rows:
        cur = row
        while cur:
            lead = cur.bit_length() - 1
            if lead in pivots:
                cur ^= pivots[lead]
            else:
                pivots[lead] = cur
                break
    return len(pivots)


def codewords(rows: Sequence[int]) -> Iterator[int]:
    """All 2^k codewords spanned by `rows`, in Gray-code order."""
    if len(rows) > _ENUM_DIM_CAP:
        raise ValueError(f"refusing to enumerate 2^{len(rows)} codewords")
    c = 0
    yield c
    for k in range(1, 1 << len(rows)):
        c ^= rows[(k & -k).bit_length() - 1]
        yield c


def choose_rm_degree(m: int, rate: float) -> int:
    """Order r_m = max(floor(m/2 + sqrt(m)/2 * Qinv(1-rate)), 0), clamped to m."""
    if not (0.0 < rate < 1.0):
        raise ValueError("rate must lie in (0,1)")
    r = math.floor(m / 2 + math.sqrt(m) / 2 * q_inverse(1.0 - rate))
    return max(0, min(r, m))


# ---------------------------------------------------------------------------
# Constrained subcode constructions


@dataclass(frozen=True)
class LinearSubcode:
    """Linear subcode given by packed generator rows inside RM(m, r)."""

    m: int
    r: int
    rows: tuple[int, ...]
    trivial: bool = False  # set when the construction degenerates to {0}

    @property
    def dimension(self) -> int:
        return len(self.rows)


def build_dinf_subcode(m: int, r: int, d: int) -> LinearSubcode:
    """(d,inf)-respecting linear subcode of RM(m, r).

    Spanned by the products of all of the last z = ceil(log2(d+1)) variables
    with monomials of degree <= r - z on the remaining ones; the common
    factor pins the support to indices spaced 2^z - 1 >= d zeros apart.
    """
    if d < 0:
        raise ValueError("d must be >= 0")
    z = math.ceil(math.log2(d + 1)) if d > 0 else 0
    if r < z:
        return LinearSubcode(m=m, r=r, rows=(), trivial=True)
    anchor = tuple(range(m - z + 1, m + 1))
    rows = []
    for deg in range(r - z + 1):
        for s in itertools.combinations(range(1, m - z + 1), deg):
            rows.append(monomial_mask(m, anchor + s))
    sub = LinearSubcode(m=m, r=r, rows=tuple(rows))
    if sub.dimension != rm_dimension(m - z, r - z):
        raise AssertionError("subcode dimension mismatch")
    return sub


def dinf_subcode_rate(m: int, rate: float, d: int) -> float:
    """Finite-m rate (m-z choose <= r_m - z) / 2^m of the (d,inf) subcode."""
    z = math.ceil(math.log2(d + 1)) if d > 0 else 0
    r_m = choose_rm_degree(m, rate)
    if r_m < z:
        return 0.0
    return float(Fraction(rm_dimension(m - z, r_m - z), 1 << m))


def dinf_rate_asymptote(d: int, rate: float) -> float:
    """Large-m limit 2^-z * rate of the (d,inf) subcode rate."""
    z = math.ceil(math.log2(d + 1)) if d > 0 else 0
    return rate / (1 << z)


def build_0k_subcode(m: int, r: int, k: int) -> dict:
    """(0,k)-respecting codeword family inside RM(m, r).

    Union over nonempty subsets S of the last t = floor(log2(k+1)) variables
    of the affine families 1 + (1 + x_S) g with deg g <= r - |S|; a union of
    affine sets rather than a linear code.  Returns the deduplicated words
    plus the counting bookkeeping (2^t - 1 subsets; the all-ones word is
    shared by every S at g = 0).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    t = math.floor(math.log2(k + 1))
    if not 1 <= t <= r:
        raise ValueError(f"need r >= t >= 1, got r={r}, t={t}")
    free = list(range(1, m - t + 1))
    ones = (1 << (1 << m)) - 1
    words: set[int] = set()
    for size in range(1, t + 1):
        for s in itertools.combinations(range(m - t + 1, m + 1), size):
            xs = monomial_mask(m, s)
            g_rows = [
                monomial_mask(m, term)
                for deg in range(r - size + 1)
                for term in itertools.combinations(free, deg)
            ]
            if len(g_rows) > _ENUM_DIM_CAP:
                raise ValueError("g-family too large to enumerate")
            for g in codewords(g_rows):
                words.add(ones ^ ((ones ^ xs) & g))  # 1 + (1 + x_S) g
    lower_bound = ((1 << t) - 1) * (1 << rm_dimension(m - t, r - t))
    return {
        "m": m,
        "r": r,
        "k": k,
        "t": t,
        "words": sorted(words),
        "count": len(words),
        "step_a_lower_bound": lower_bound,
    }


# ---------------------------------------------------------------------------
# Last-variable decomposition and the combinatorial bound ingredients


def decompose_by_last_variable(f: BooleanPoly) -> tuple[BooleanPoly, BooleanPoly]:
    """Unique ANF split f = g + x_m * h with g, h on x_1..x_{m-1}."""
    if f.m < 1:
        raise ValueError("need at least one variable")
    g_terms: set = set()
    h_terms: set = set()
    for s in f.monomials:
        if f.m in s:
            h_terms.add(Monomial(s - {f.m}))
        else:
            g_terms.add(s)
    return (
        BooleanPoly(f.m - 1, frozenset(g_terms)),
        BooleanPoly(f.m - 1, frozenset(h_terms)),
    )


def eval_split_last(vec: EvalVector) -> tuple[EvalVector, EvalVector]:
    """Eval(g), Eval(h) of the last-variable split, read off the vector.

    Consecutive indices (2j, 2j+1) are the points z0, z1, so g(z) is the
    even entry and h(z) the XOR of the pair.
    """
    if vec.m < 1:
        raise ValueError("need at least one variable")
    half = 1 << (vec.m - 1)
    g = h = 0
    for j in range(half):
        pair = (vec.bits >> (2 * j)) & 3
        if pair & 1:
            g |= 1 << j
        if (pair & 1) ^ (pair >> 1):
            h |= 1 << j
    return EvalVector(vec.m - 1, g), EvalVector(vec.m - 1, h)


def verify_necessary_condition(m: int, r: int) -> dict:
    """Check supp(Eval(g)) subseteq supp(Eval(h)) over all (1,inf) codewords.

    Exhausts RM(m, r) (dimension capped), filters to words meeting the
    (1,inf) constraint, and reports any split violating the containment
    (there must be none).
    """
    code = rm_generator(m, r)
    even = variable_mask(m, m) >> 1  # bits at even indices
    checked = in_constraint = violations = 0
    spec = ConstraintSpec(1)
    for c in codewords(code.rows):
        checked += 1
        if not check_word(spec, c, code.n):
            continue
        in_constraint += 1
        g_at = c & even
        h_at = g_at ^ ((c >> 1) & even)
        if g_at & ~h_at:
            violations += 1
    return {
        "m": m,
        "r": r,
        "checked": checked,
        "in_constraint": in_constraint,
        "violations": violations,
    }


def count_covering_codewords(m: int, r: int, g: "EvalVector | int") -> dict:
    """Exact N_w: codewords of RM(m-1, r) equal to 1 on supp(Eval(g)).

    Asserts the shortening bound N_w <= 2^((m-1 choose <= r) - (m-1-u choose <= r))
    at the tightest u with wt(g) >= 2^(m-1-u).
    """
    g_bits = g.bits if isinstance(g, EvalVector) else g
    sub = rm_generator(m - 1, r)
    count = sum(1 for c in codewords(sub.rows) if c & g_bits == g_bits)
    w = g_bits.bit_count()
    out = {"m": m, "r": r, "weight": w, "count": count, "u": None, "bound": None, "holds": True}
    if w >= 1:
        u = (m - 1) - (w.bit_length() - 1)  # smallest u with w >= 2^(m-1-u)
        bound = 1 << (rm_dimension(m - 1, r) - rm_dimension(m - 1 - u, r))
        out.update(u=u, bound=bound, holds=count <= bound)
    return out


def weight_distribution(m: int, r: int) -> dict[int, int]:
    """Exact weight enumerator of RM(m, r); validates the symmetry A(w) = A(2^m - w)
    and the half-space cap sum_{w > 2^(m-1)} A(w) <= 2^(dim-1)."""
    code = rm_generator(m, r)
    table: dict[int, int] = {}
    for c in codewords(code.rows):
        w = c.bit_count()
        table[w] = table.get(w, 0) + 1
    n = code.n
    for w, cnt in table.items():
        if table.get(n - w, 0) != cnt:
            raise AssertionError(f"weight symmetry broken at w={w}")
    upper = sum(cnt for w, cnt in table.items() if w > n // 2)
    if upper > (1 << code.dimension) // 2:
        raise AssertionError("upper half-space exceeds half the code")
    return dict(sorted(table.items()))


def shortened_rank_check(m: int, r: int, v: Iterable[int]) -> bool:
    """Column-rank bound: rank(G(m,r)[V]) >= (m-u choose <= r) for |V| >= 2^(m-u).

    The bound is tight (equality at flat-shaped V), hence non-strict; it is
    the rank-nullity ingredient behind the covering-count ceiling.
    """
    idx = set(v)
    if not idx:
        raise ValueError("V must be nonempty")
    if any(not 0 <= j < (1 << m) for j in idx):
        raise ValueError("V contains out-of-range indices")
    mask = 0
    for j in idx:
        mask |= 1 << j
    code = rm_generator(m, r)
    rank = gf2_rank([row & mask for row in code.rows])
    u = m - (len(idx).bit_length() - 1)  # smallest u with |V| >= 2^(m-u)
    return rank >= rm_dimension(m - u, r)


def enumerate_largest_constrained_subcode(m: int, r: int, spec: ConstraintSpec) -> int:
    """Brute-force oracle: how many RM(m, r) codewords satisfy the constraint."""
    code = rm_generator(m, r)
    return sum(1 for c in codewords(code.rows) if check_word(spec, c, code.n))


# ---------------------------------------------------------------------------
# The closed-form rate ceiling for (1,inf) subcodes of capacity-achieving RM


def rm_upper_bound_raw(rate: float) -> float:
    """3R/8 + (1/2) ln(1/(1-R)), the analytic ceiling before the trivial cap."""
    if not (0.0 < rate < 1.0):
        raise ValueError("rate must lie in (0,1)")
    return 3.0 * rate / 8.0 + 0.5 * math.log(1.0 / (1.0 - rate))


def rm_upper_bound_curve(rate: float) -> float:
    """The ceiling capped by the trivial bound R itself."""
    return min(rm_upper_bound_raw(rate), rate)


def rstar() -> float:
    """Rate below which the analytic ceiling is nontrivial: the root of
    ln(1/(1-R)) = 1.25 R in (0,1), about 0.3715 (and below 0.5)."""
    f = lambda x: math.log(1.0 / (1.0 - x)) - 1.25 * x
    lo, hi = 1e-6, 1.0 - 1e-12
    if f(lo) >= 0.0:
        raise AssertionError("no sign change at the left bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    return 0.5 * (lo + hi)
