"""Moments of product-channel outputs: the exact permutation sums over
S_{2p} x S_{2p}, the pinched sums over choice functions, their leading-order
predictions in every growth regime, and the exponent-minimization problems
(S, S1, S2) whose solution tables drive those predictions.

The exact sums group the (2p)!^2 terms by the joint statistic
(cycle type of alpha beta^{-1}, #alpha, #(alpha gamma^{-1}), #(beta delta)),
a small integer census computed once per order; evaluation at any dimensions
(n, k, m) is then an exact rational combination of census counts and
Weingarten values at the composite dimension nk.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .perm import (
    DEFAULT_ENUMERATION_CAP,
    CycleType,
    Permutation,
    all_permutations,
    identity,
    is_geodesic,
    make_gamma_delta,
)
from .weingarten import WgTable, wg_exact

#: Exact double sums run at p <= this by default; p = 4 walks S_8^2 and is
#: gated behind allow_heavy.
DEFAULT_EXACT_ORDER = 3
#: Pair searches (S and the pinched variant) enumerate S_{2p}^2.
DEFAULT_PAIR_ORDER = 3


# ---------------------------------------------------------------------------
# regime description


@dataclass(frozen=True)
class RegimeParams:
    """Growth-regime parameters: m/n -> b, ancilla k ~ c n^d, and the
    fixed-ancilla Bell fraction t (meaningful only when d = 0)."""

    c: Fraction | float
    d: Fraction | float = Fraction(1)
    b: Fraction | float = Fraction(1)
    t: Fraction | float | None = None

    def __post_init__(self):
        if self.b <= 0 or self.c <= 0:
            raise ValueError("b and c must be positive")
        if self.d < 0:
            raise ValueError("d must be >= 0")
        if self.t is not None and not 0 < self.t <= 1:
            raise ValueError("t must lie in (0, 1]")


def as_fraction(value) -> Fraction:
    """Exact conversion; pass a Fraction or string like '4/3' for values that
    must land exactly on a case boundary."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    return Fraction(value)  # exact binary value of a float


# ---------------------------------------------------------------------------
# choice functions (pinched sums)


@dataclass(frozen=True)
class ChoiceFunction:
    """Assignment of Identity or Bell to each of the p slots of the expanded
    pinched trace, encoded as a string of 'I'/'E' picks."""

    picks: tuple[str, ...]

    def __post_init__(self):
        if not self.picks:
            raise ValueError("choice function needs p >= 1 slots")
        if any(ch not in ("I", "E") for ch in self.picks):
            raise ValueError(f"picks must be 'I' or 'E': {self.picks!r}")

    @classmethod
    def from_string(cls, text: str) -> "ChoiceFunction":
        return cls(tuple(text))

    @property
    def p(self) -> int:
        return len(self.picks)

    @property
    def bell_count(self) -> int:
        return sum(1 for ch in self.picks if ch == "E")

    def __str__(self) -> str:
        return "".join(self.picks)


def choice_functions(p: int):
    """All 2^p choice functions, deterministic order."""
    for picks in itertools.product("IE", repeat=p):
        yield ChoiceFunction(picks)


def choice_to_permutation(f: ChoiceFunction) -> Permutation:
    """The permutation f_hat wiring the pinched trace: on top labels,
    i^T -> (i-1)^T for an Identity pick and i^T -> i^B for a Bell pick; on
    bottom labels, i^B -> (i+1)^B when the *next* pick is Identity and
    i^B -> i^T when it is Bell (index arithmetic modulo p).

    For f identically 'I' this is gamma; otherwise its cycle count equals the
    number of Bell picks.
    """
    p = f.p
    images = [0] * (2 * p)

    def tpos(i):
        return p + i - 1

    def bpos(i):
        return p - i

    for i in range(1, p + 1):
        if f.picks[i - 1] == "I":
            images[tpos(i)] = tpos(i - 1 if i > 1 else p)
        else:
            images[tpos(i)] = bpos(i)
        nxt = f.picks[i % p]
        if nxt == "I":
            images[bpos(i)] = bpos(i + 1 if i < p else 1)
        else:
            images[bpos(i)] = tpos(i)
    return Permutation(tuple(images))


# ---------------------------------------------------------------------------
# cached group structure on S_{2p}


@dataclass
class _Group:
    m: int
    perms: np.ndarray  # (N, m) uint8, lexicographic
    inverse: np.ndarray  # (N,) int32
    ncycles: np.ndarray  # (N,) int64
    ct_index: np.ndarray  # (N,) int64
    types: list[CycleType]
    radix: np.ndarray  # (m,) int64
    index_of_rank: np.ndarray  # (m**m,) int32


def _count_cycles_images(images) -> int:
    seen = [False] * len(images)
    count = 0
    for start in range(len(images)):
        if seen[start]:
            continue
        count += 1
        x = start
        while not seen[x]:
            seen[x] = True
            x = images[x]
    return count


@lru_cache(maxsize=4)
def _group(m: int) -> _Group:
    if m > DEFAULT_ENUMERATION_CAP:
        raise ValueError(f"group degree {m} exceeds the enumeration cap {DEFAULT_ENUMERATION_CAP}")
    perms_list = list(itertools.permutations(range(m)))
    n_elems = len(perms_list)
    perms = np.array(perms_list, dtype=np.uint8)
    radix = (m ** np.arange(m)).astype(np.int64)
    ranks = perms.astype(np.int64) @ radix
    index_of_rank = np.full(m**m, -1, dtype=np.int32)
    index_of_rank[ranks] = np.arange(n_elems, dtype=np.int32)

    inverse = np.empty(n_elems, dtype=np.int32)
    ncycles = np.empty(n_elems, dtype=np.int64)
    type_index: dict[tuple[int, ...], int] = {}
    types: list[CycleType] = []
    ct_index = np.empty(n_elems, dtype=np.int64)
    for idx, images in enumerate(perms_list):
        inv = [0] * m
        lens = []
        seen = [False] * m
        for start in range(m):
            inv[images[start]] = start
            if seen[start]:
                continue
            d = 0
            x = start
            while not seen[x]:
                seen[x] = True
                x = images[x]
                d += 1
            lens.append(d)
        inverse[idx] = index_of_rank[int(np.dot(inv, radix))]
        ncycles[idx] = len(lens)
        key = tuple(sorted(lens, reverse=True))
        if key not in type_index:
            type_index[key] = len(types)
            types.append(CycleType(key))
        ct_index[idx] = type_index[key]
    return _Group(m, perms, inverse, ncycles, ct_index, types, radix, index_of_rank)


def _index_of(g: _Group, rows: np.ndarray) -> np.ndarray:
    return g.index_of_rank[rows.astype(np.int64) @ g.radix]


def _cycles_after(g: _Group, right_images: tuple[int, ...]) -> np.ndarray:
    """#(beta . right) for every beta, where right acts first."""
    rows = g.perms[:, list(right_images)]
    return g.ncycles[_index_of(g, rows)]


@lru_cache(maxsize=64)
def _pair_census(p: int, rf_images: tuple[int, ...]) -> np.ndarray:
    """Joint census over (alpha, beta) in S_{2p}^2 of
    (type(alpha beta^{-1}), #alpha, #(alpha rf^{-1}), #(beta delta)),
    returned as an integer array [ct, a, b, c]."""
    m = 2 * p
    g = _group(m)
    _, delta, _ = make_gamma_delta(p)
    rf_inv = Permutation(rf_images).inverse()

    n_a = g.ncycles
    n_b = g.ncycles[_index_of(g, g.perms[:, list(rf_inv.images)])]
    n_c = g.ncycles[_index_of(g, g.perms[:, list(delta.images)])]

    n_elems = g.perms.shape[0]
    n_ct = len(g.types)
    base = m + 1
    counts = np.zeros(n_ct * base**3, dtype=np.int64)
    inv_all = g.perms[g.inverse]  # (N, m): images of beta^{-1}

    chunk = max(1, int(4_000_000 // max(n_elems * m, 1)))
    for start in range(0, n_elems, chunk):
        stop = min(start + chunk, n_elems)
        composed = g.perms[start:stop][:, inv_all]  # (c, N, m): alpha(beta^{-1}(x))
        ct = g.ct_index[_index_of(g, composed.reshape(-1, m))].reshape(stop - start, n_elems)
        key = ((ct * base + n_a[start:stop, None]) * base + n_b[start:stop, None]) * base + n_c[None, :]
        counts += np.bincount(key.ravel(), minlength=counts.size)
    return counts.reshape(n_ct, base, base, base)


def _census_sum(census: np.ndarray, types: list[CycleType], weights, wg: WgTable) -> Fraction:
    """sum over census cells of count * weights(a, b, c) * Wg(cycle type)."""
    total = Fraction(0)
    for ct_idx in range(census.shape[0]):
        block = census[ct_idx]
        if not block.any():
            continue
        coeff = 0
        for a, b, c in zip(*np.nonzero(block)):
            coeff += int(block[a, b, c]) * weights(int(a), int(b), int(c))
        total += coeff * wg.of_type(types[ct_idx])
    return total


def _validate_exact_args(p: int, n: int, k: int, m: int, max_order: int, allow_heavy: bool):
    if p < 1:
        raise ValueError("p must be >= 1")
    cap = max_order if not allow_heavy else DEFAULT_ENUMERATION_CAP // 2
    if p > cap:
        raise ValueError(
            f"p={p} exceeds the exact-sum cap {cap}"
            + ("" if allow_heavy else " (pass allow_heavy=True to opt in up to p=4)")
        )
    if n * k < 2 * p:
        raise ValueError(f"need n*k >= 2p for an invertible Weingarten table, got {n * k} < {2 * p}")
    if (n * k) % m != 0:
        raise ValueError(f"m={m} must divide n*k={n * k} (integer complement dimension)")


def _wg_for(n: int, k: int, p: int, wg: WgTable | None) -> WgTable:
    if wg is None:
        return wg_exact(n * k, 2 * p, max_order=max(2 * p, 7))
    if wg.n != n * k or wg.p != 2 * p:
        raise ValueError(f"Weingarten table is for (n={wg.n}, p={wg.p}), need ({n * k}, {2 * p})")
    return wg


def exact_moment_conjugate(
    p: int,
    n: int,
    k: int,
    m: int | None = None,
    wg: WgTable | None = None,
    max_order: int = DEFAULT_EXACT_ORDER,
    allow_heavy: bool = False,
) -> Fraction:
    """Exact E[tr(Z^p)] for the conjugate product channel at finite (n, k, m):

        sum_{alpha, beta in S_{2p}}
            k^{#alpha} n^{#(alpha gamma^{-1})} m^{#(beta delta) - p}
            Wg(nk, alpha beta^{-1})

    evaluated in rational arithmetic.
    """
    m = n if m is None else m
    _validate_exact_args(p, n, k, m, max_order, allow_heavy)
    table = _wg_for(n, k, p, wg)
    gamma, _, _ = make_gamma_delta(p)
    census = _pair_census(p, gamma.images)
    types = _group(2 * p).types
    total = _census_sum(census, types, lambda a, b, c: k**a * n**b * m**c, table)
    return total / Fraction(m) ** p


def exact_moment_pinched(
    p: int,
    n: int,
    k: int,
    wg: WgTable | None = None,
    max_order: int = DEFAULT_EXACT_ORDER,
    allow_heavy: bool = False,
) -> Fraction:
    """Exact E[tr((QZQ)^p)] at m = n, summed over all 2^p choice functions:
    each term carries sign (-1)^{#Bell picks}, Bell normalization n^{-#Bell},
    and the permutation sum with gamma replaced by f_hat."""
    _validate_exact_args(p, n, k, n, max_order, allow_heavy)
    table = _wg_for(n, k, p, wg)
    types = _group(2 * p).types
    total = Fraction(0)
    for f in choice_functions(p):
        f_hat = choice_to_permutation(f)
        census = _pair_census(p, f_hat.images)
        inner = _census_sum(census, types, lambda a, b, c: k**a * n ** (b + c), table)
        e = f.bell_count
        total += (-1) ** e * inner / Fraction(n) ** (p + e)
    return total


def vanishing_cancellation_check(p: int, alpha: Permutation, max_order: int = DEFAULT_PAIR_ORDER) -> bool:
    """For alpha in V = {sigma : sigma delta has a fixed point}, test that
        sum_f (-1)^{#Bell} x^{#Bell + |alpha f_hat^{-1}|}
    vanishes identically as a polynomial in x = 1/n.  Raises for alpha
    outside V, where the sum genuinely contributes."""
    if p > max_order:
        raise ValueError(f"p={p} exceeds the cap {max_order}")
    if alpha.degree != 2 * p:
        raise ValueError(f"alpha must live in S_{2 * p}")
    _, delta, _ = make_gamma_delta(p)
    if not _in_vanishing_set(alpha, delta):
        raise ValueError("alpha is not in V (alpha delta has no fixed point)")
    coeffs: Counter[int] = Counter()
    for f in choice_functions(p):
        f_hat = choice_to_permutation(f)
        exponent = f.bell_count + (alpha * f_hat.inverse()).length()
        coeffs[exponent] += (-1) ** f.bell_count
    return all(v == 0 for v in coeffs.values())


def _in_vanishing_set(alpha: Permutation, delta: Permutation) -> bool:
    composed = alpha * delta
    return any(composed(x) == x for x in range(alpha.degree))


# ---------------------------------------------------------------------------
# exponent minimization


@dataclass(frozen=True)
class ExponentReport:
    """Result of an exhaustive exponent minimization: the problem name, the
    attained minimum, and every minimizer (permutations, pairs, or
    (choice, alpha, beta) triples depending on the problem)."""

    problem: str
    p: int
    d: Fraction
    minimum: Fraction
    minimizers: tuple

    def minimizer_set(self) -> frozenset:
        return frozenset(self.minimizers)


def _length_table(p: int) -> np.ndarray:
    g = _group(2 * p)
    return (2 * p - g.ncycles).astype(np.int64)


def _length_after(p: int, right: Permutation) -> np.ndarray:
    g = _group(2 * p)
    rows = g.perms[:, list(right.images)]
    return (2 * p - g.ncycles[_index_of(g, rows)]).astype(np.int64)


@lru_cache(maxsize=4)
def _pair_length_matrix(p: int) -> np.ndarray:
    """|alpha beta^{-1}| for all pairs, as an (N, N) int16 matrix."""
    g = _group(2 * p)
    n_elems = g.perms.shape[0]
    inv_all = g.perms[g.inverse]
    out = np.empty((n_elems, n_elems), dtype=np.int16)
    chunk = max(1, int(4_000_000 // max(n_elems * 2 * p, 1)))
    for start in range(0, n_elems, chunk):
        stop = min(start + chunk, n_elems)
        composed = g.perms[start:stop][:, inv_all]
        ncyc = g.ncycles[_index_of(g, composed.reshape(-1, 2 * p))]
        out[start:stop] = (2 * p - ncyc).reshape(stop - start, n_elems).astype(np.int16)
    return out


def _perm_at(p: int, idx: int) -> Permutation:
    g = _group(2 * p)
    return Permutation(tuple(int(x) for x in g.perms[idx]))


def _minimize_single(problem: str, p: int, d, target: Permutation) -> ExponentReport:
    d = as_fraction(d)
    num, den = d.numerator, d.denominator
    _, delta, _ = make_gamma_delta(p)
    lengths = _length_table(p)
    len_target = _length_after(p, target.inverse())
    len_delta = _length_after(p, delta)
    scaled = num * lengths + den * (len_target + len_delta) - den * p
    best = int(scaled.min())
    idxs = np.nonzero(scaled == best)[0]
    return ExponentReport(
        problem=problem,
        p=p,
        d=d,
        minimum=Fraction(best, den),
        minimizers=tuple(_perm_at(p, int(i)) for i in idxs),
    )


def minimize_S2(p: int, d, max_order: int = 4) -> ExponentReport:
    """Exhaustive minimization of S2(beta) = d|beta| + |beta gtilde^{-1}|
    + |beta delta| - p over S_{2p}."""
    if p > max_order:
        raise ValueError(f"p={p} exceeds the cap {max_order}")
    _, _, gtilde = make_gamma_delta(p)
    return _minimize_single("S2", p, d, gtilde)


def minimize_S1(p: int, d, max_order: int = 4) -> ExponentReport:
    """Exhaustive minimization of S1(beta) = d|beta| + |beta gamma^{-1}|
    + |beta delta| - p over S_{2p}."""
    if p > max_order:
        raise ValueError(f"p={p} exceeds the cap {max_order}")
    gamma, _, _ = make_gamma_delta(p)
    return _minimize_single("S1", p, d, gamma)


def minimize_S(p: int, d, max_order: int = DEFAULT_PAIR_ORDER) -> ExponentReport:
    """Exhaustive minimization over pairs of
    S(alpha, beta) = d|alpha| + |alpha gamma^{-1}| + |beta delta|
    + (d+1)|alpha beta^{-1}| - p.

    At d = 1 this is the exponent of the generalized linear model, so the
    same search answers both regimes.
    """
    if p > max_order:
        raise ValueError(f"p={p} exceeds the pair-search cap {max_order}")
    d = as_fraction(d)
    num, den = d.numerator, d.denominator
    gamma, delta, _ = make_gamma_delta(p)
    lengths = _length_table(p)
    len_gamma = _length_after(p, gamma.inverse())
    len_delta = _length_after(p, delta)
    pair_len = _pair_length_matrix(p).astype(np.int64)
    scaled = (
        num * lengths[:, None]
        + den * len_gamma[:, None]
        + den * len_delta[None, :]
        + (num + den) * pair_len
        - den * p
    )
    best = int(scaled.min())
    rows, cols = np.nonzero(scaled == best)
    minimizers = tuple((_perm_at(p, int(a)), _perm_at(p, int(b))) for a, b in zip(rows, cols))
    return ExponentReport(problem="S", p=p, d=d, minimum=Fraction(best, den), minimizers=minimizers)


def minimize_S_pinched(p: int, d, max_order: int = DEFAULT_PAIR_ORDER) -> ExponentReport:
    """Exhaustive minimization of the pinched exponent
    S(alpha, beta, f) = |beta delta| + d|alpha| + (d+1)|alpha beta^{-1}|
    + #Bell + |alpha f_hat^{-1}| + const(d, p)
    over choice functions and pairs with alpha outside the cancellation set V.

    The constant is -p(2d+1) + 2d for d in (0,1) and -3p + 2 for d in (1,2);
    in both regimes the minimum is 0.
    """
    if p > max_order:
        raise ValueError(f"p={p} exceeds the pair-search cap {max_order}")
    d = as_fraction(d)
    if not (0 < d < 1 or 1 < d < 2):
        raise ValueError("the pinched exponent is defined for d in (0,1) or (1,2)")
    num, den = d.numerator, d.denominator
    _, delta, _ = make_gamma_delta(p)
    g = _group(2 * p)
    lengths = _length_table(p)
    len_delta = _length_after(p, delta)
    pair_len = _pair_length_matrix(p).astype(np.int64)

    fixed = g.perms[:, list(delta.images)] == np.arange(2 * p, dtype=np.uint8)[None, :]
    outside_v = ~fixed.any(axis=1)
    keep = np.nonzero(outside_v)[0]

    if 0 < d < 1:
        const = -p * (2 * num + den) + 2 * num
    else:
        const = (-3 * p + 2) * den

    best: int | None = None
    hits: list[tuple[ChoiceFunction, int, int]] = []
    for f in choice_functions(p):
        f_hat = choice_to_permutation(f)
        len_fhat = _length_after(p, f_hat.inverse())
        row_part = num * lengths[keep] + den * (f.bell_count + len_fhat[keep])
        scaled = (
            row_part[:, None]
            + den * len_delta[None, :]
            + (num + den) * pair_len[keep, :]
            + const
        )
        local = int(scaled.min())
        if best is None or local < best:
            best = local
            hits = []
        if local == best:
            rows, cols = np.nonzero(scaled == best)
            hits.extend((f, int(keep[a]), int(b)) for a, b in zip(rows, cols))
    minimizers = tuple((f, _perm_at(p, a), _perm_at(p, b)) for f, a, b in hits)
    return ExponentReport(
        problem="S_pinched", p=p, d=d, minimum=Fraction(best, den), minimizers=minimizers
    )


# ---------------------------------------------------------------------------
# reference tables (the closed-form answers the searches must reproduce)


@lru_cache(maxsize=16)
def _geodesic_set(p: int, which: str) -> frozenset[Permutation]:
    gamma, delta, gtilde = make_gamma_delta(p)
    ends = {
        "delta->gtilde": (delta, gtilde),
        "delta->gamma": (delta, gamma),
        "id->delta": (identity(2 * p), delta),
    }[which]
    return frozenset(b for b in all_permutations(2 * p) if is_geodesic(ends[0], b, ends[1]))


def reference_S2(p: int, d) -> tuple[Fraction, frozenset[Permutation]]:
    """Closed-form solution table for the S2 problem."""
    d = as_fraction(d)
    _, delta, _ = make_gamma_delta(p)
    if d == 0:
        return Fraction(-1), _geodesic_set(p, "delta->gtilde")
    if d < 2:
        return d * p - 1, frozenset({delta})
    if d == 2:
        return Fraction(2 * p - 1), _geodesic_set(p, "id->delta")
    return Fraction(2 * p - 1), frozenset({identity(2 * p)})


def reference_S1(p: int, d) -> tuple[Fraction, frozenset[Permutation]]:
    """Closed-form solution table for the S1 problem, including the p = 2
    special rows and the interface case p = 2/(2-d)."""
    d = as_fraction(d)
    gamma, delta, _ = make_gamma_delta(p)
    ident = identity(2 * p)
    if d == 0:
        return Fraction(0), _geodesic_set(p, "delta->gamma")
    if p == 2 and 0 < d < 1:
        return 2 * d, frozenset({delta, gamma})
    if p == 2 and d == 1:
        return Fraction(2), frozenset({ident, delta, gamma})
    if p >= 3 and 0 < d <= 1:
        return d * p, frozenset({delta})
    if 1 < d < 2:
        interface = Fraction(2, 1) / (2 - d)
        if p < interface:
            return Fraction(2 * p - 2), frozenset({ident})
        if p == interface:
            return Fraction(2 * p - 2), frozenset({ident, delta})
        return d * p, frozenset({delta})
    return Fraction(2 * p - 2), frozenset({ident})


# ---------------------------------------------------------------------------
# asymptotic predictions


@dataclass(frozen=True)
class MomentPrediction:
    """Leading-order prediction for E tr(Z^p): value ~ coefficient *
    n^n_power * k^k_power.  `terms` carries the per-minimizer contributions
    of the rescaled moment when the regime resolves them."""

    p: int
    coefficient: float
    n_power: Fraction
    k_power: Fraction
    label: str
    terms: tuple[tuple[str, float], ...] | None = None

    def value(self, n: int, k: int | None = None) -> float:
        out = self.coefficient * float(n) ** float(self.n_power)
        if self.k_power != 0:
            if k is None:
                raise ValueError("prediction scales with k; pass the ancilla dimension")
            out *= float(k) ** float(self.k_power)
        return out


def asymptotic_moment_conjugate(p: int, regime: RegimeParams) -> MomentPrediction:
    """Leading-order E tr(Z^p) in the regime described by `regime`.

    d = 1 answers the generalized linear model (input ratio b allowed);
    every other d requires b = 1 and follows the five-case classification:
    d = 0 (fixed ancilla, two-level spectrum), d in (0,1), d = 1, d in (1,2)
    split at p = 2/(2-d), and d >= 2.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    d = as_fraction(regime.d)
    b = float(regime.b)
    c = float(regime.c)
    if p == 1:
        return MomentPrediction(p, 1.0, Fraction(0), Fraction(0), "1 (exact)")

    if d == 1:
        if p == 2:
            terms = (("id", c * c / (b * b)), ("delta", 1.0), ("gamma", 1.0 / (b * b)))
            coeff = (b * b + 1.0 + c * c) / (c * c)
            return MomentPrediction(p, coeff, Fraction(-2), Fraction(0), "(1 + 1/b^2 + c^2/b^2) (b/(cn))^2", terms)
        return MomentPrediction(p, (b / c) ** p, Fraction(-p), Fraction(0), "(b/(cn))^p")

    if regime.b != 1:
        raise ValueError("only the d = 1 regime supports an input ratio b != 1")

    if d == 0:
        k_fixed = int(c)
        if k_fixed != c:
            raise ValueError("the d = 0 regime needs an integer ancilla dimension c = k")
        t = regime.t if regime.t is not None else Fraction(1, k_fixed)
        top = float(t) + (1.0 - float(t)) / k_fixed**2
        low = (1.0 - float(t)) / k_fixed**2
        coeff = top**p + (k_fixed**2 - 1) * low**p
        return MomentPrediction(p, coeff, Fraction(0), Fraction(0), "two-level spectrum, constant in n")

    if d < 1:
        if p == 2:
            return MomentPrediction(p, 2.0, Fraction(0), Fraction(-2), "2 k^-2")
        return MomentPrediction(p, 1.0, Fraction(0), Fraction(-p), "k^-p")

    if d < 2:
        interface = Fraction(2, 1) / (2 - d)
        if p < interface:
            return MomentPrediction(p, 1.0, Fraction(-(2 * p - 2)), Fraction(0), "n^-(2p-2)")
        if p == interface:
            return MomentPrediction(p, 1.0 + c ** (-p), Fraction(-d * p), Fraction(0), "(1 + c^-p) n^-dp")
        return MomentPrediction(p, 1.0, Fraction(0), Fraction(-p), "k^-p")

    return MomentPrediction(p, 1.0, Fraction(-(2 * p - 2)), Fraction(0), "n^-(2p-2)")
