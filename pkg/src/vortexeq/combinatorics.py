"""Integer capacity problems behind the admissible blow-up counts.

Given source strengths ``alpha_i`` the capacities are ``a_i = 1 + [alpha_i]^-``
with ``[x]^- = max{n integer : n < x}``.  The central problem is

    maximize  N_0 + ... + N_{ell-1}
    subject to N_i integer >= 0 and  N_i + sum_{r in J_i} N_r <= a_i,

for a coupling ``J_0..J_{ell-1}`` (a partition of the indices with
``i not in J_i``).  The consecutive coupling ``J_i = {i-1}`` turns the
constraints into ``N_i + N_{i+1} <= a_{i+1}`` cyclically.

Everything here is 0-based.  Quantities stated with 1-based subscripts
(the ``c, d, f, g`` sequences and the closed forms) are evaluated through
``_A(a, m) = a[(m - 1) % ell]`` so that their formulas read as written.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

IntArray = NDArray[np.int64]
ENUMERATION_LIMIT = 10**8
_CHUNK = 1 << 20


# ---------------------------------------------------------------------------
# capacities


def lower_integer_part(alpha: float) -> int:
    """Largest integer strictly below ``alpha``."""
    return int(math.ceil(alpha)) - 1


@dataclass(frozen=True)
class CapacityVector:
    """Integer capacities ``a_i >= 1``."""

    a: tuple[int, ...]

    def __post_init__(self) -> None:
        a = tuple(int(v) for v in self.a)
        if any(v < 1 for v in a):
            raise ValueError("capacities must be positive integers")
        object.__setattr__(self, "a", a)

    @property
    def ell(self) -> int:
        return len(self.a)

    def array(self) -> IntArray:
        return np.asarray(self.a, dtype=np.int64)


def capacity(alpha: Iterable[float] | float) -> CapacityVector:
    """Capacities ``1 + [alpha_i]^-`` of the given source strengths."""
    alphas = [alpha] if np.isscalar(alpha) else list(alpha)  # type: ignore[list-item]
    if any(not (x > 0) for x in alphas):
        raise ValueError("source strengths must be positive")
    return CapacityVector(tuple(1 + lower_integer_part(float(x)) for x in alphas))


def _as_capacity(a: CapacityVector | Sequence[int]) -> CapacityVector:
    return a if isinstance(a, CapacityVector) else CapacityVector(tuple(a))


# ---------------------------------------------------------------------------
# couplings


@dataclass(frozen=True)
class CouplingSpec:
    """Partition ``J_0..J_{ell-1}`` of ``{0..ell-1}`` with ``i not in J_i``.

    ``r(x)`` is the unique ``i`` with ``x in J_i``.  Blocks are the minimal
    index sets closed under ``i -> J_i`` and ``i -> r(i)``, i.e. the
    connected components of the graph with edges ``{i, r(i)}``.
    """

    J: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        J = tuple(frozenset(int(x) for x in s) for s in self.J)
        object.__setattr__(self, "J", J)
        ell = len(J)
        if ell < 2:
            raise ValueError("a coupling needs at least two sources")
        seen: set[int] = set()
        for i, s in enumerate(J):
            if i in s:
                raise ValueError(f"J[{i}] contains its own index")
            if any(x < 0 or x >= ell for x in s):
                raise ValueError(f"J[{i}] has an index out of range")
            if seen & s:
                raise ValueError(f"J[{i}] overlaps an earlier set")
            seen |= s
        if seen != set(range(ell)):
            missing = sorted(set(range(ell)) - seen)
            raise ValueError(f"the sets J do not cover indices {missing}")

    @property
    def ell(self) -> int:
        return len(self.J)

    @property
    def r(self) -> tuple[int, ...]:
        out = [0] * self.ell
        for i, s in enumerate(self.J):
            for x in s:
                out[x] = i
        return tuple(out)

    @classmethod
    def from_r(cls, r: Sequence[int]) -> "CouplingSpec":
        """Coupling whose partner map is ``r`` (``r[i] != i``)."""
        ell = len(r)
        J: list[set[int]] = [set() for _ in range(ell)]
        for x, i in enumerate(r):
            J[int(i)].add(x)
        return cls(tuple(frozenset(s) for s in J))

    @classmethod
    def consecutive(cls, ell: int) -> "CouplingSpec":
        """``J_i = {i-1}`` cyclically, so ``r(i) = i+1``."""
        return cls.from_r([(i + 1) % ell for i in range(ell)])

    def is_consecutive(self) -> bool:
        return self.r == tuple((i + 1) % self.ell for i in range(self.ell))

    def is_single_cycle(self) -> bool:
        """True when every ``J_i`` is a singleton and ``r`` is one ``ell``-cycle."""
        if any(len(s) != 1 for s in self.J):
            return False
        r, x, n = self.r, 0, 0
        while True:
            x, n = r[x], n + 1
            if x == 0:
                return n == self.ell

    def blocks(self) -> list[list[int]]:
        parent = list(range(self.ell))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for x, i in enumerate(self.r):
            parent[find(x)] = find(i)
        groups: dict[int, list[int]] = {}
        for x in range(self.ell):
            groups.setdefault(find(x), []).append(x)
        return sorted(groups.values(), key=min)

    def constraint_matrix(self) -> IntArray:
        """``M`` with ``(M @ N)_i = N_i + sum_{r in J_i} N_r``."""
        m = np.eye(self.ell, dtype=np.int64)
        for i, s in enumerate(self.J):
            for x in s:
                m[i, x] = 1
        return m

    def relabel(self, order: Sequence[int]) -> "CouplingSpec":
        """Coupling seen through new labels, ``order[new] = old``."""
        new_of = {old: new for new, old in enumerate(order)}
        J = [frozenset()] * self.ell
        for new, old in enumerate(order):
            J[new] = frozenset(new_of[x] for x in self.J[old])
        return CouplingSpec(tuple(J))


def all_couplings(ell: int) -> Iterable[CouplingSpec]:
    """Every valid coupling on ``ell`` indices (one per fixed-point-free map ``r``)."""
    choices = [[x for x in range(ell) if x != i] for i in range(ell)]
    for r in itertools.product(*choices):
        yield CouplingSpec.from_r(r)


# ---------------------------------------------------------------------------
# exact maximization


@dataclass(frozen=True)
class MaxNResult:
    """Exact integer optimum, the real-valued closed form and a witness."""

    a: tuple[int, ...]
    mode: str
    n_exact: int
    n_formula: float | None
    witness: tuple[int, ...]
    method: str

    @property
    def ell(self) -> int:
        return len(self.a)

    @property
    def agreement(self) -> bool | None:
        if self.n_formula is None:
            return None
        return self.n_exact == math.floor(self.n_formula + 1e-9)

    def as_dict(self) -> dict:
        return {
            "ell": self.ell,
            "a": list(self.a),
            "mode": self.mode,
            "n_exact": self.n_exact,
            "n_formula": self.n_formula,
            "witness": list(self.witness),
            "agreement": self.agreement,
        }


def _box_search(bounds: IntArray, matrix: IntArray, cap: IntArray) -> tuple[int, tuple[int, ...]]:
    """Max of ``sum N`` over ``0 <= N <= bounds`` with ``matrix @ N <= cap``.

    Points are visited in C order, which is lexicographic, so taking the
    first maximizer yields the lexicographically smallest witness.
    """
    shape = tuple(int(b) + 1 for b in bounds)
    total = int(np.prod(shape, dtype=np.int64))
    if total > ENUMERATION_LIMIT:
        raise OverflowError(f"enumeration box has {total} points (limit {ENUMERATION_LIMIT})")
    best, arg = -1, ()
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        pts = np.stack(np.unravel_index(flat, shape), axis=1)
        ok = np.all(pts @ matrix.T <= cap, axis=1)
        if not ok.any():
            continue
        sums = np.where(ok, pts.sum(axis=1), -1)
        i = int(np.argmax(sums))
        if sums[i] > best:
            best, arg = int(sums[i]), tuple(int(v) for v in pts[i])
    return best, arg


def max_n_enumerate(a: CapacityVector | Sequence[int], coupling: CouplingSpec | None = None) -> tuple[int, tuple[int, ...]]:
    """Exhaustive search; consecutive coupling unless ``coupling`` is given."""
    cap = _as_capacity(a)
    ell = cap.ell
    coupling = coupling if coupling is not None else CouplingSpec.consecutive(ell)
    if coupling.ell != ell:
        raise ValueError("coupling size does not match capacities")
    av = cap.array()
    r = np.asarray(coupling.r)
    bounds = np.minimum(av, av[r])
    return _box_search(bounds, coupling.constraint_matrix(), av)


def max_n_dp(a: CapacityVector | Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Consecutive-coupling optimum by a chain dynamic program.

    The first count is fixed, which cuts the cycle into a path; a suffix
    table ``best[i][v]`` (largest ``N_i + ... + N_{ell-1}`` with ``N_i = v``)
    is filled backwards, the closing constraint ``N_{ell-1} + N_0 <= a_0``
    being enforced on the last entry.  The witness is read off greedily,
    smallest value first, which gives the lexicographically smallest one.
    """
    av = [int(v) for v in _as_capacity(a).a]
    ell = len(av)
    vmax = max(av)
    vals = np.arange(vmax + 1)
    neg = -(10**18)
    best_total, best_witness = -1, ()
    for n0 in range(min(av[0], av[1 % ell]) + 1):
        tables: list[NDArray[np.int64]] = [np.empty(0, dtype=np.int64)] * ell
        last = np.where(vals + n0 <= av[0], vals, neg)
        tables[ell - 1] = last
        for i in range(ell - 2, 0, -1):
            nxt = np.maximum.accumulate(tables[i + 1])
            room = av[i + 1] - vals
            tables[i] = np.where(room >= 0, vals + nxt[np.clip(room, 0, vmax)], neg)
        room0 = av[1] - n0
        if room0 < 0:
            continue
        head = tables[1][: room0 + 1]
        total = n0 + int(head.max())
        if total > best_total:
            best_total = total
            witness = [n0]
            need = total - n0
            prev = n0
            for i in range(1, ell):
                limit = av[i] - prev
                for v in range(limit + 1):
                    if tables[i][v] == need:
                        witness.append(v)
                        need -= v
                        prev = v
                        break
            best_witness = tuple(witness)
    return best_total, best_witness


def max_n_exact(
    a: CapacityVector | Sequence[int], mode: str | CouplingSpec = "consecutive"
) -> MaxNResult:
    """Exact maximal total count with one witness assignment.

    ``mode="consecutive"`` uses enumeration when the search box has at most
    ``1e8`` points and the chain dynamic program otherwise, and attaches the
    real-valued closed form.  Passing a :class:`CouplingSpec` solves the
    general coupled constraints by enumeration (no closed form).
    """
    cap = _as_capacity(a)
    if cap.ell < 2:
        raise ValueError("need at least two sources")
    if isinstance(mode, CouplingSpec):
        n, w = max_n_enumerate(cap, mode)
        return MaxNResult(cap.a, "general_coupling", n, None, w, "enumeration")
    if mode != "consecutive":
        raise ValueError(f"unknown mode {mode!r}")
    av = cap.array()
    box = int(np.prod(np.minimum(av, np.roll(av, -1)) + 1, dtype=np.float64))
    if box <= ENUMERATION_LIMIT:
        n, w = max_n_enumerate(cap)
        method = "enumeration"
    else:
        n, w = max_n_dp(cap)
        method = "dp"
    return MaxNResult(cap.a, "consecutive", n, max_n_formula(cap), w, method)


# ---------------------------------------------------------------------------
# piecewise-linear maximum


def clipped_min_sum_max(alpha: float, beta: float, gamma: float, delta: float, T: float) -> float:
    """Maximum over ``0 <= t <= T`` of ``min(alpha, beta - t) + t + min(gamma - t, delta)``.

    Equals ``min(alpha + gamma, beta + gamma, alpha + delta + T, beta + delta)``.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    return min(alpha + gamma, beta + gamma, alpha + delta + T, beta + delta)


lemma_f_max = clipped_min_sum_max


# ---------------------------------------------------------------------------
# c, d, f, g sequences


class CDFG(NamedTuple):
    c: float
    d: float
    f: float
    g: float


def _A(a: Sequence[int], m: int) -> int:
    return int(a[(m - 1) % len(a)])


def _s(a: Sequence[int], k: int, J: frozenset[int]) -> int:
    total = 0
    for j in range(2, k + 1):
        if j in J:
            total += _A(a, 2 * j)
        else:
            total += _A(a, 2 * j + 1)
            if j - 1 in J:
                total += min(_A(a, 2 * j - 1), _A(a, 2 * j))
    return total


def _check_k(ell: int, k: int) -> None:
    if not 1 <= k or 2 * k > max(ell, 2):
        raise ValueError(f"k={k} out of range 1..{ell // 2} for ell={ell}")


def cdfg_definition(a: CapacityVector | Sequence[int], k: int) -> CDFG:
    """``c_k, d_k, f_k, g_k`` as minima of ``s_k(J)`` over ``J in {1..k}``."""
    av = _as_capacity(a).a
    _check_k(len(av), k)
    inf = math.inf
    c = d = f = g = inf
    for bits in range(1 << k):
        J = frozenset(j + 1 for j in range(k) if bits >> j & 1)
        s = _s(av, k, J)
        one, last = 1 in J, k in J
        if one and last:
            c = min(c, _A(av, 2) + s)
        elif not one and last:
            d = min(d, _A(av, 3) + s)
        elif one and not last:
            f = min(f, _A(av, 2) + s)
        else:
            g = min(g, _A(av, 3) + s)
    return CDFG(c, d, f, g)


def cdfg_recursive(a: CapacityVector | Sequence[int], k: int) -> CDFG:
    """Same numbers from the first-order recursions seeded at ``k = 1``."""
    av = _as_capacity(a).a
    _check_k(len(av), k)
    c, d, f, g = float(_A(av, 2)), math.inf, math.inf, float(_A(av, 3))
    for m in range(1, k):
        even, odd, nxt = _A(av, 2 * m + 2), _A(av, 2 * m + 1), _A(av, 2 * m + 3)
        mid = min(odd, even)
        c, d, f, g = (
            min(c + even, f + even),
            min(d + even, g + even),
            min(c + mid + nxt, f + nxt),
            min(d + mid + nxt, g + nxt),
        )
    return CDFG(c, d, f, g)


def cdfg_sequences(a: CapacityVector | Sequence[int], k: int, method: str = "recursion") -> CDFG:
    """``(c_k, d_k, f_k, g_k)`` by ``method`` in ``{"recursion", "definition"}``."""
    if method == "recursion":
        return cdfg_recursive(a, k)
    if method == "definition":
        return cdfg_definition(a, k)
    raise ValueError(f"unknown method {method!r}")


def increasing_cdfg(b: Sequence[int], k: int) -> CDFG:
    """Closed forms of ``c_k, d_k, f_k, g_k`` for sorted capacities (``k >= 2``)."""
    if list(b) != sorted(b):
        raise ValueError("capacities must be sorted increasingly")
    if k < 2:
        raise ValueError("closed forms start at k = 2")
    _check_k(len(b), k)
    even = sum(_A(b, 2 * j) for j in range(1, k + 1))
    odd = sum(_A(b, 2 * j + 1) for j in range(1, k + 1))
    return CDFG(even, _A(b, 3) + even - _A(b, 2), _A(b, 2) + odd, odd)


def max_n_formula(a: CapacityVector | Sequence[int]) -> float:
    """Real-valued maximal total count for the consecutive coupling.

    Even ``ell``: ``min(c_m, g_m)`` with ``m = ell/2``.  Odd ``ell``: with
    ``m = (ell-1)/2`` and ``ah = min(a_1, min(a_1,a_2) + min(a_1,a_ell))``,
    the maximum over real ``x`` in ``[ah - min(a_1,a_ell), min(a_1,a_2)]`` of
    ``min(c_m + ah - x, d_m + ah, f_m, g_m + x)``.
    """
    av = _as_capacity(a).a
    ell = len(av)
    if ell < 2:
        raise ValueError("need at least two sources")
    if ell % 2 == 0:
        s = cdfg_recursive(av, ell // 2)
        return float(min(s.c, s.g))
    m = (ell - 1) // 2
    s = cdfg_recursive(av, m)
    a1, a2, al = av[0], av[1], av[-1]
    ah = min(a1, min(a1, a2) + min(a1, al))
    lo, hi = ah - min(a1, al), min(a1, a2)
    up, down = s.c + ah, s.g  # min(up - x, down + x) peaks at x = (up - down)/2
    x = min(max((up - down) / 2.0, lo), hi)
    return float(min(up - x, s.d + ah, s.f, down + x))


def max_n_identity(a: CapacityVector | Sequence[int]) -> int:
    """Optimum through the one- or two-variable reduction in terms of ``c, d, f, g``.

    Even ``ell`` (``m = ell/2``): the maximum over integer ``N_1`` in
    ``[0, min(a_1, a_2)]`` of ``min(c_m, d_m + N_1, f_m - N_1, g_m)``.  Odd
    ``ell`` (``m = (ell-1)/2``): the maximum over ``N_1``, ``N_ell`` in their
    boxes with ``N_1 + N_ell <= a_1`` of
    ``min(c_m + N_ell, d_m + N_1 + N_ell, f_m, g_m + N_1)``.  Unlike
    :func:`max_n_formula` this keeps the ``f`` term, and it is exact.
    """
    av = _as_capacity(a).a
    ell = len(av)
    if ell < 4:
        raise ValueError("the reduction is stated for ell >= 4")
    a1, a2, al = av[0], av[1], av[-1]
    if ell % 2 == 0:
        s = cdfg_recursive(av, ell // 2)
        return int(max(min(s.c, s.d + n1, s.f - n1, s.g) for n1 in range(min(a1, a2) + 1)))
    s = cdfg_recursive(av, (ell - 1) // 2)
    return int(
        max(
            min(s.c + nl, s.d + n1 + nl, s.f, s.g + n1)
            for n1 in range(min(a1, a2) + 1)
            for nl in range(min(al, a1) + 1)
            if n1 + nl <= a1
        )
    )


def increasing_formula(b: Sequence[int]) -> float:
    """Closed form of the maximal count for increasingly sorted capacities."""
    b = [int(v) for v in b]
    if b != sorted(b):
        raise ValueError("capacities must be sorted increasingly")
    ell = len(b)
    if ell % 2 == 0:
        return float(sum(b[0::2]))
    return float(min(b[0] + sum(b[1::2]), sum(b) / 2.0))


# ---------------------------------------------------------------------------
# coupling feasibility and search


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    load: IntArray
    slack: IntArray

    def __bool__(self) -> bool:
        return self.feasible


def coupling_feasible(
    alpha: Sequence[float], counts: Sequence[int], coupling: CouplingSpec
) -> FeasibilityResult:
    """Evaluate ``N_i + sum_{r in J_i} N_r <= 1 + [alpha_i]^-`` for every ``i``."""
    cap = capacity(alpha).array()
    n = np.asarray(counts, dtype=np.int64)
    if n.shape != (coupling.ell,) or cap.shape != n.shape:
        raise ValueError("counts, strengths and coupling must have the same length")
    if np.any(n < 0):
        raise ValueError("counts must be nonnegative")
    load = coupling.constraint_matrix() @ n
    slack = cap - load
    return FeasibilityResult(bool(np.all(slack >= 0)), load, slack)


@dataclass(frozen=True)
class CouplingSearchResult:
    best: MaxNResult
    best_coupling: CouplingSpec
    best_single_cycle: MaxNResult
    best_single_cycle_coupling: CouplingSpec
    n_couplings: int

    @property
    def non_consecutive_strictly_better(self) -> bool:
        return self.best.n_exact > self.best_single_cycle.n_exact


MAX_SEARCH_ELL = 6


def best_coupling_search(alpha: Sequence[float]) -> CouplingSearchResult:
    """Exhaustive search over every coupling for ``ell <= 6`` sources.

    Consecutive couplings (up to relabeling) are those whose partner map is
    a single cycle through all indices; the result reports the best of
    those separately so the gain from non-consecutive couplings is visible.
    Ties are broken by the order in which :func:`all_couplings` lists them.
    """
    cap = capacity(alpha)
    ell = cap.ell
    if ell < 2 or ell > MAX_SEARCH_ELL:
        raise ValueError(f"coupling search supports 2 <= ell <= {MAX_SEARCH_ELL}")
    best = best_cycle = None
    best_c = best_cycle_c = None
    count = 0
    for cpl in all_couplings(ell):
        count += 1
        res = max_n_exact(cap, cpl)
        if best is None or res.n_exact > best.n_exact:
            best, best_c = res, cpl
        if cpl.is_single_cycle() and (best_cycle is None or res.n_exact > best_cycle.n_exact):
            best_cycle, best_cycle_c = res, cpl
    assert best is not None and best_cycle is not None
    return CouplingSearchResult(best, best_c, best_cycle, best_cycle_c, count)  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# block ordering


@dataclass(frozen=True)
class BlockOrder:
    """Relabeling that makes blocks contiguous and orders each block.

    ``order[new] = old``; ``blocks`` lists new labels; ``coupling`` is the
    relabeled coupling.  ``satisfied`` is False when some block admits no
    order reachable by the construction that passes the nesting predicate;
    ``violations`` then lists the offending new-label pairs.
    """

    order: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]
    coupling: CouplingSpec = field(repr=False)
    satisfied: bool = True
    violations: tuple[tuple[int, int], ...] = ()

    @property
    def new_label(self) -> tuple[int, ...]:
        inv = [0] * len(self.order)
        for new, old in enumerate(self.order):
            inv[old] = new
        return tuple(inv)


def _sequence_ok(seq: list[int], J: dict[int, set[int]]) -> bool:
    """Nesting predicate on a block listed in ``seq`` (positions are labels)."""
    pos = {x: k for k, x in enumerate(seq)}
    top = seq[-1]
    star = {pos[x]: {pos[y] for y in J[x] if y != top} for x in seq}
    for i, j in itertools.combinations(range(len(seq)), 2):
        si, sj = star[i], star[j]
        first = _set_less(si, {i}) and _set_less(sj, {j}) and (not sj or i <= min(sj))
        second = _set_less(sj, si) and _set_less(si, {i})
        if not (first or second):
            return False
    return True


def _order_block(
    elements: list[int], J: dict[int, set[int]], r: dict[int, int], prune: bool
) -> Iterator[list[int]]:
    """Orders produced by the peel-and-reinsert construction.

    Candidates are yielded in a fixed preference order: smallest peeled
    index first, then smallest cycle start.  With ``prune`` set, partial
    orders that already fail the predicate are dropped; adding indices to a
    block only enlarges the sets being compared, so such a failure persists.
    """
    if len(elements) == 2:
        candidates: Iterable[list[int]] = (sorted(elements), sorted(elements, reverse=True))
    else:
        leaves = sorted(x for x in elements if not J[x])
        if not leaves:
            candidates = (_cycle_from(start, r) for start in sorted(elements))
        else:
            candidates = (
                seq for e in leaves for seq in _reinsert(e, elements, J, r, prune)
            )
    for seq in candidates:
        if not prune or _sequence_ok(seq, J):
            yield seq


def _cycle_from(start: int, r: dict[int, int]) -> list[int]:
    seq, x = [start], r[start]
    while x != start:
        seq.append(x)
        x = r[x]
    return seq


def _reinsert(
    e: int, elements: list[int], J: dict[int, set[int]], r: dict[int, int], prune: bool
) -> Iterator[list[int]]:
    partner = r[e]
    sub_J = {x: set(J[x]) for x in elements if x != e}
    sub_J[partner].discard(e)
    for sub in _order_block([x for x in elements if x != e], sub_J, r, prune):
        k = sub.index(partner)
        yield sub[:k] + [e] + sub[k:]


def order_blocks(coupling: CouplingSpec) -> BlockOrder:
    """Relabel indices so blocks are contiguous and each block is well ordered.

    Within each block the order is built recursively: a pure cycle is
    listed along ``r``; otherwise an index ``e`` with empty ``J_e`` is set
    aside, the rest is ordered, and ``e`` is reinserted just before its
    partner ``r(e)``.  The choices of ``e``, of the cycle start and of the
    orientation of a two-element block are searched with backtracking
    until the predicate of :func:`block_order_violations` holds.  Some
    couplings admit no such order at all (for instance ``r = (4, 3, 5, 5,
    5, 2)``); the first construction order is then returned with
    ``satisfied=False``.
    """
    r_all = coupling.r
    order: list[int] = []
    for blk in coupling.blocks():
        J = {x: set(coupling.J[x]) for x in blk}
        r = {x: r_all[x] for x in blk}
        found = next(_order_block(list(blk), J, r, prune=True), None)
        if found is None:
            found = next(_order_block(list(blk), J, r, prune=False))
        order.extend(found)
    relabeled = coupling.relabel(order)
    new_blocks = tuple(tuple(sorted(b)) for b in relabeled.blocks())
    bad = tuple(block_order_violations(relabeled))
    return BlockOrder(tuple(order), new_blocks, relabeled, not bad, bad)


def order_exists_bruteforce(coupling: CouplingSpec) -> bool:
    """Whether any relabeling of every block passes the predicate (small blocks)."""
    for blk in coupling.blocks():
        if len(blk) > 8:
            raise OverflowError("brute force limited to blocks of size <= 8")
        J = {x: set(coupling.J[x]) for x in blk}
        if not any(_sequence_ok(list(p), J) for p in itertools.permutations(blk)):
            return False
    return True


def _set_less(a: frozenset[int] | set[int], b: frozenset[int] | set[int]) -> bool:
    return not a or not b or max(a) < min(b)


def block_order_violations(coupling: CouplingSpec) -> list[tuple[int, int]]:
    """Pairs ``i < j`` (same block) violating the nesting predicate.

    With ``l`` the largest index of the block and ``J*_i = J_i - {l}`` the
    predicate reads: ``J*_i < i <= J*_j < j`` or ``J*_j < J*_i < i < j``,
    where ``A < B`` compares ``max A < min B`` and is true when either side
    is empty.  An empty list means the labeling satisfies it; blocks must
    be contiguous ranges of labels for the result to be meaningful.
    """
    bad: list[tuple[int, int]] = []
    for blk in coupling.blocks():
        top = max(blk)
        star = {i: set(coupling.J[i]) - {top} for i in blk}
        for i, j in itertools.combinations(sorted(blk), 2):
            si, sj = star[i], star[j]
            first = _set_less(si, {i}) and _set_less(sj, {j}) and (not sj or i <= min(sj))
            second = _set_less(sj, si) and _set_less(si, {i})
            if not (first or second):
                bad.append((i, j))
    return bad


def blocks_are_contiguous(coupling: CouplingSpec) -> bool:
    blocks = coupling.blocks()
    return all(b == list(range(min(b), max(b) + 1)) for b in blocks)
