"""Structure-aware k-limited-access schemes for small n and k.

Every algorithm here works in coefficient space: ``D`` is an n x T matrix of
distinct client vectors d_i with rank T, and the output rows form P.

Node ids of a :class:`BipartiteModel`: sources (the independent nodes U and
every intermediate branch node) share one id space, U first. Dependent nodes
V are indexed separately by position.
"""

from __future__ import annotations

import itertools
import time
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .errors import InputError
from .gf2 import BitMatrix, find_circuit, independent_indices, solve_row, support, vec_to_str
from .universal import AccessAssignment, lower_bound_Tk


@dataclass(frozen=True)
class SchemeResult:
    """Rows of P plus, for each client, the rows it XORs together."""

    P: BitMatrix
    rows: tuple[tuple[int, ...], ...]
    k: int
    exact: bool = True
    info: dict = field(default_factory=dict, compare=False)

    @property
    def size(self) -> int:
        return self.P.nrows

    @property
    def T_k(self) -> int:
        return self.P.nrows

    def assignment(self) -> AccessAssignment:
        return AccessAssignment(self.rows, tuple(range(self.size)))

    def check(self, D: BitMatrix) -> None:
        """Raise AssertionError unless every client XORs <= k rows to its vector."""
        assert len(self.rows) == D.nrows, "one row set per client expected"
        for i, (d, rs) in enumerate(zip(D.rows, self.rows)):
            assert len(rs) <= self.k, f"client {i + 1} uses {len(rs)} > {self.k} rows"
            acc = 0
            for r in rs:
                acc ^= self.P.rows[r]
            assert acc == d, f"client {i + 1} reconstructs {vec_to_str(acc, D.ncols)}"


def min_representations(vectors: Sequence[int], targets: Sequence[int], k: int) -> dict[int, tuple[int, ...]] | None:
    """For each target, a minimum-size set of <= k indices into vectors XORing to it.

    Breadth-first over reachable vectors; None if some target needs more than k.
    """
    want = set(targets)
    found: dict[int, tuple[int, ...]] = {}
    frontier = {0: ()}
    seen = {0}
    for _ in range(k):
        if want <= found.keys():
            break
        nxt: dict[int, tuple[int, ...]] = {}
        for v, rep in frontier.items():
            for idx, x in enumerate(vectors):
                if idx in rep:
                    continue
                u = v ^ x
                if u not in seen:
                    seen.add(u)
                    nxt[u] = tuple(sorted(rep + (idx,)))
        found.update((u, r) for u, r in nxt.items() if u in want)
        frontier = nxt
    if not want <= found.keys():
        return None
    return {t: found[t] for t in want}


def scheme_from_vectors(vectors: Sequence[int], D: BitMatrix, k: int, exact: bool = True, info: dict | None = None) -> SchemeResult:
    reps = min_representations(vectors, D.rows, k)
    if reps is None:
        raise InputError(f"rows do not cover every client within {k} additions")
    return SchemeResult(BitMatrix(tuple(vectors), D.ncols), tuple(reps[d] for d in D.rows), k, exact, info or {})


def _check_instance(D: BitMatrix) -> None:
    if len(set(D.rows)) != D.nrows or 0 in D.rows:
        raise InputError("client vectors must be distinct and nonzero")


# bipartite representation -------------------------------------------------

@dataclass
class BipartiteModel:
    T: int
    vectors: list[int]
    u_clients: list[int]
    v_clients: list[int]
    v_vectors: list[int]
    inbound: list[list[int]]
    parents: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def intermediates(self) -> list[int]:
        return list(range(self.T, len(self.vectors)))

    def outbound(self, s: int) -> list[int]:
        return [j for j, ins in enumerate(self.inbound) if s in ins]

    def source_degrees(self) -> Counter:
        return Counter(s for ins in self.inbound for s in ins)

    def dependent_degrees(self) -> list[int]:
        return [len(ins) for ins in self.inbound]

    def check(self) -> None:
        for j, ins in enumerate(self.inbound):
            acc = 0
            for s in ins:
                acc ^= self.vectors[s]
            assert acc == self.v_vectors[j], f"inbound set of v{j + 1} does not XOR to its vector"
        for s, (a, b) in self.parents.items():
            assert self.vectors[s] == self.vectors[a] ^ self.vectors[b]


def build_bipartite(D: BitMatrix) -> BipartiteModel:
    """Basis rows (first-seen order) become U; the rest become V with their expansions."""
    _check_instance(D)
    T = D.ncols
    basis_idx = independent_indices(D.rows)
    if len(basis_idx) != T:
        raise InputError(f"rank {len(basis_idx)} < T={T}; reduce T first")
    basis = D.select(basis_idx)
    in_basis = set(basis_idx)
    v_clients = [i for i in range(D.nrows) if i not in in_basis]
    inbound = []
    for i in v_clients:
        combo = solve_row(basis, D.rows[i])
        inbound.append(support(combo, T))
    return BipartiteModel(
        T=T,
        vectors=list(basis.rows),
        u_clients=basis_idx,
        v_clients=v_clients,
        v_vectors=[D.rows[i] for i in v_clients],
        inbound=inbound,
    )


def make_branch(model: BipartiteModel, nodes: Sequence[int]) -> list[int]:
    """Add the |nodes| - 1 prefix-XOR intermediates of a branch; return their ids."""
    if len(nodes) < 2:
        raise InputError("a branch needs at least two nodes")
    for s in nodes:
        if not 0 <= s < len(model.vectors):
            raise InputError(f"unknown node {s}")
    new, prev = [], nodes[0]
    for s in nodes[1:]:
        nid = len(model.vectors)
        model.vectors.append(model.vectors[prev] ^ model.vectors[s])
        model.parents[nid] = (prev, s)
        new.append(nid)
        prev = nid
    return new


def nested_scheme(D: BitMatrix) -> SchemeResult | None:
    """T-row scheme with <= 2 rows per client when outbound sets form a chain.

    Nodes with empty outbound sets are left out of the branch and sent as is.
    """
    model = build_bipartite(D)
    T = model.T
    outb = [set(model.outbound(u)) for u in range(T)]
    order = sorted(range(T), key=lambda u: (-len(outb[u]), u))
    for a, b in zip(order, order[1:]):
        if not outb[b] <= outb[a]:
            return None
    chain = [u for u in order if outb[u]]
    rest = [u for u in order if not outb[u]]
    rows, acc = [], 0
    for u in chain:
        acc ^= model.vectors[u]
        rows.append(acc)
    rows.extend(model.vectors[u] for u in rest)
    per_client: dict[int, tuple[int, ...]] = {}
    for t, u in enumerate(chain):
        per_client[model.u_clients[u]] = (t,) if t == 0 else (t - 1, t)
    for t, u in enumerate(rest, start=len(chain)):
        per_client[model.u_clients[u]] = (t,)
    for j, client in enumerate(model.v_clients):
        depth = max(t for t, u in enumerate(chain) if j in outb[u])
        per_client[client] = (depth,)
    return SchemeResult(BitMatrix(tuple(rows), T), tuple(per_client[i] for i in range(D.nrows)), 2)


# successive circuit removing ---------------------------------------------

def _scr_pass(vectors: list[int], T: int, trace: list | None = None, level: int = 1):
    out: list[int] = []
    where: dict[int, int] = {}

    def emit(v: int) -> int:
        if v not in where:
            where[v] = len(out)
            out.append(v)
        return where[v]

    reps: list[tuple[int, ...]] = [()] * len(vectors)
    remaining = list(range(len(vectors)))
    circuits = 0
    while True:
        hit = find_circuit(BitMatrix(tuple(vectors[i] for i in remaining), T))
        if hit is None:
            break
        members = [remaining[p] for p in sorted(hit)]
        if trace is not None:
            trace.append({"pass": level, "circuit": members})
        circuits += 1
        chain, acc = [], 0
        for i in members[:-1]:
            acc ^= vectors[i]
            chain.append(emit(acc))
        reps[members[0]] = (chain[0],)
        for t in range(1, len(chain)):
            reps[members[t]] = (chain[t - 1], chain[t])
        reps[members[-1]] = (chain[-1],)
        gone = set(members)
        remaining = [i for i in remaining if i not in gone]
    for i in remaining:
        reps[i] = (emit(vectors[i]),)
    return out, reps, circuits


def scr(D: BitMatrix, q: int = 1, k: int | None = None, trace: list | None = None) -> SchemeResult:
    """Successive circuit removing applied q times, giving k = 2^q."""
    if k is not None:
        if k < 2 or k & (k - 1):
            raise InputError(f"SCR needs k to be a power of two >= 2, got {k}")
        q = k.bit_length() - 1
    if q < 1:
        raise InputError("SCR needs q >= 1")
    _check_instance(D)
    T = D.ncols
    if len(independent_indices(D.rows)) != T:
        raise InputError(f"rank of D is below T={T}")
    current = list(D.rows)
    client_sets = [frozenset([i]) for i in range(D.nrows)]
    sizes, circuits = [], []
    for level in range(1, q + 1):
        out, reps, c = _scr_pass(current, T, trace, level)
        client_sets = [_xor_sets(reps[i] for i in s) for s in client_sets]
        current = out
        sizes.append(len(out))
        circuits.append(c)
    rows = tuple(tuple(sorted(s)) for s in client_sets)
    return SchemeResult(BitMatrix(tuple(current), T), rows, 1 << q, True,
                        {"pass_sizes": sizes, "circuits": circuits})


def _xor_sets(groups) -> frozenset[int]:
    acc: set[int] = set()
    for g in groups:
        acc.symmetric_difference_update(g)
    return frozenset(acc)


def scr_worst(n: int, T: int) -> int:
    return T * (n // (T + 1) + 1)


def scr_best(n: int) -> int:
    return 2 * (n // 3)


# branch -------------------------------------------------------------------

@dataclass
class BranchResult:
    model: BipartiteModel
    R: list[int]
    iterations: int
    trace: list[dict]

    @property
    def intermediate_count(self) -> int:
        return len(self.model.vectors) - self.model.T

    def natural_solution(self) -> list[int]:
        """U plus every source still wired to a dependent node (a valid A_k)."""
        used = set(range(self.model.T))
        for ins in self.model.inbound:
            used.update(ins)
        seen, out = set(), []
        for s in sorted(used):
            v = self.model.vectors[s]
            if v and v not in seen:
                seen.add(v)
                out.append(v)
        return out


def branch_pass(D: BitMatrix, k: int) -> BranchResult:
    """Grow branches until every dependent node has degree <= k.

    Ties pick the lowest-index dependent node; inbound sets are sorted by
    descending source degree, ties by lowest node id.
    """
    if k < 2:
        raise InputError("branch needs k >= 2")
    model = build_bipartite(D)
    trace, iterations = [], 0
    while True:
        degs = model.dependent_degrees()
        target, best = None, k
        for j, d in enumerate(degs):
            if d > best:
                target, best = j, d
        if target is None:
            break
        iterations += 1
        src_deg = model.source_degrees()
        order = sorted(model.inbound[target], key=lambda s: (-src_deg[s], s))
        star = [order[0]] + make_branch(model, order)
        pos = {s: p for p, s in enumerate(order)}
        for j, ins in enumerate(model.inbound):
            if len(ins) < k:
                continue
            common = [s for s in ins if s in pos]
            ell = len(common)
            if ell < 2 or max(pos[s] for s in common) != ell - 1:
                continue
            model.inbound[j] = sorted([s for s in ins if s not in pos] + [star[ell - 1]])
        trace.append({"iteration": iterations, "dependent": target, "order": order})
    seen, R = set(), []
    for v in model.vectors:
        if v and v not in seen:
            seen.add(v)
            R.append(v)
    return BranchResult(model, R, iterations, trace)


# search -------------------------------------------------------------------

@lru_cache(maxsize=None)
def _half_masks(T: int) -> tuple[int, ...]:
    """For each bit b, the mask of positions v (0 <= v < 2^T) with bit b clear."""
    out = []
    for b in range(T):
        m = 0
        for v in range(1 << T):
            if not (v >> b) & 1:
                m |= 1 << v
        out.append(m)
    return tuple(out)


def _shift(mask: int, x: int, halves: tuple[int, ...]) -> int:
    """Map the set {v} encoded by mask to {v ^ x}."""
    b = 0
    while x:
        if x & 1:
            step = 1 << b
            h = halves[b]
            mask = ((mask & h) << step) | ((mask >> step) & h)
        x >>= 1
        b += 1
    return mask


def _reach_levels(vectors: Sequence[int], k: int, halves) -> list[int]:
    """levels[j] = set of XORs of <= j distinct vectors, as a bitmask (bit 0 = zero vector)."""
    levels = [1] * (k + 1)
    for x in vectors:
        for j in range(k, 0, -1):
            levels[j] |= _shift(levels[j - 1], x, halves)
    return levels


def _covers(vectors: Sequence[int], target_mask: int, k: int, halves) -> bool:
    return _reach_levels(vectors, k, halves)[k] & target_mask == target_mask


def _prune_greedy(vectors: list[int], target_mask: int, k: int, halves) -> list[int]:
    keep = list(vectors)
    for x in reversed(vectors):
        trial = [v for v in keep if v != x]
        if _covers(trial, target_mask, k, halves):
            keep = trial
    return keep


@lru_cache(maxsize=None)
def _capacity(size: int, k: int) -> int:
    """Upper bound on how many vectors one new member can newly reach."""
    return sum(comb(size, i) for i in range(k))


class _Budget(Exception):
    pass


def search_min_subset(
    R: Sequence[int],
    D: BitMatrix,
    k: int,
    size_cap: int | None = None,
    node_budget: int | None = None,
    time_budget: float | None = None,
    incumbent: Sequence[int] | None = None,
) -> SchemeResult | None:
    """Smallest subset of R through which every client XORs <= k members.

    Depth-first branch and bound: take the uncovered client with the fewest
    candidate members, try each candidate (best coverage gain first), and
    exclude it from later siblings. A feasible ``incumbent`` seeds the upper
    bound. When a budget runs out the best subset found so far is returned
    with ``exact=False``. None when nothing within ``size_cap`` is feasible.
    """
    _check_instance(D)
    T = D.ncols
    R = [v for v in dict.fromkeys(R) if v]
    halves = _half_masks(T)
    target_mask = 0
    for d in D.rows:
        target_mask |= 1 << d
    cap = len(R) if size_cap is None else size_cap
    floor = lower_bound_Tk(T, D.nrows, min(k, T)) if k <= T else T

    if not _covers(R, target_mask, k, halves):
        return None
    best: list[int] | None = None
    if incumbent is not None:
        inc = [v for v in dict.fromkeys(incumbent) if v]
        if not _covers(inc, target_mask, k, halves):
            raise InputError("incumbent is not feasible")
        inc = _prune_greedy(inc, target_mask, k, halves)
        if len(inc) <= cap:
            best = inc
    limit = (len(best) if best is not None else cap + 1)

    index = {v: i for i, v in enumerate(R)}
    full_mask = 0
    for v in R:
        full_mask |= 1 << v
    nodes = 0
    deadline = None if time_budget is None else time.monotonic() + time_budget
    exhausted = False
    state = {"best": best, "limit": limit}

    def bound(size: int, uncovered: int, levels: list[int]) -> int:
        # additions needed if each new member covers as many targets as possible
        need = uncovered.bit_count()
        extra, covered = 0, 0
        cap_now = levels[k - 1].bit_count()
        while covered < need:
            covered += cap_now
            extra += 1
            cap_now = _capacity(size + extra, k)
        return extra

    def candidates_for(d: int, chosen_mask: int, avail_mask: int, levels: list[int]) -> int:
        if k == 1:
            return avail_mask & (1 << d)
        if k == 2:
            pool = chosen_mask | avail_mask | 1
        else:
            pool_levels = list(levels)
            a = avail_mask
            while a:
                low = a & -a
                x = low.bit_length() - 1
                for j in range(k - 1, 0, -1):
                    pool_levels[j] |= _shift(pool_levels[j - 1], x, halves)
                a ^= low
            pool = pool_levels[k - 1]
        return avail_mask & _shift(pool, d, halves)

    def dfs(chosen: list[int], chosen_mask: int, avail_mask: int, levels: list[int]) -> None:
        nonlocal nodes
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            raise _Budget
        if deadline is not None and (nodes & 63) == 0 and time.monotonic() > deadline:
            raise _Budget
        uncovered = target_mask & ~levels[k]
        size = len(chosen)
        if not uncovered:
            if size < state["limit"]:
                state["best"] = list(chosen)
                state["limit"] = size
            return
        if max(size + bound(size, uncovered, levels), floor) >= state["limit"]:
            return
        pick, pick_cands, pick_count = None, 0, None
        u = uncovered
        while u:
            low = u & -u
            d = low.bit_length() - 1
            cands = candidates_for(d, chosen_mask, avail_mask, levels)
            c = cands.bit_count()
            if c == 0:
                return
            if pick_count is None or c < pick_count:
                pick, pick_cands, pick_count = d, cands, c
                if c == 1:
                    break
            u ^= low
        scored = []
        c = pick_cands
        while c:
            low = c & -c
            x = low.bit_length() - 1
            new_levels = list(levels)
            for j in range(k, 0, -1):
                new_levels[j] |= _shift(new_levels[j - 1], x, halves)
            gain = (new_levels[k] & uncovered).bit_count()
            scored.append((-gain, index[x], x, new_levels))
            c ^= low
        scored.sort(key=lambda t: (t[0], t[1]))
        for _, _, x, new_levels in scored:
            avail_mask &= ~(1 << x)
            chosen.append(x)
            dfs(chosen, chosen_mask | (1 << x), avail_mask, new_levels)
            chosen.pop()
            if state["limit"] <= floor:
                return

    if state["best"] is None or len(state["best"]) > floor:
        try:
            dfs([], 0, full_mask, [1] * (k + 1))
        except _Budget:
            exhausted = True
    best = state["best"]
    if best is None:
        return None
    best = sorted(best, key=index.__getitem__)
    return scheme_from_vectors(best, D, k, exact=not exhausted,
                               info={"nodes": nodes, "pool": len(R)})


def branch_search(
    D: BitMatrix,
    k: int,
    size_cap: int | None = None,
    node_budget: int | None = None,
    time_budget: float | None = None,
) -> SchemeResult:
    """Branch followed by Search, seeded with Branch's own wiring as incumbent."""
    br = branch_pass(D, k)
    natural = br.natural_solution()
    res = search_min_subset(br.R, D, k, size_cap, node_budget, time_budget, incumbent=natural)
    if res is None:
        res = scheme_from_vectors(natural, D, k, exact=False)
    res.info.update({"R": len(br.R), "iterations": br.iterations, "intermediates": br.intermediate_count})
    return res


# exhaustive oracle --------------------------------------------------------

ORACLE_MAX_T = 4
ORACLE_MAX_N = 15


@lru_cache(maxsize=None)
def _oracle_table(T: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Reach mask and size of every subset of the nonzero vectors of F_2^T."""
    N = (1 << T) - 1
    halves = _half_masks(T)
    levels = [[1] * (1 << N)]
    for _ in range(k):
        levels.append([1] * (1 << N))
    for mask in range(1, 1 << N):
        low = mask & -mask
        x = low.bit_length()  # bit e stands for vector e + 1
        prev = mask ^ low
        for j in range(1, k + 1):
            levels[j][mask] = levels[j][prev] | _shift(levels[j - 1][prev], x, halves)
    reach = np.array(levels[k], dtype=np.int64)
    sizes = np.array([bin(s).count("1") for s in range(1 << N)], dtype=np.int64)
    return reach, sizes


def oracle_min_Tk(D: BitMatrix, k: int) -> int:
    """Exact minimum T_k by exhaustive search over subsets of F_2^T minus zero."""
    _check_instance(D)
    T = D.ncols
    if T > ORACLE_MAX_T or D.nrows > ORACLE_MAX_N:
        raise InputError(f"oracle limited to T <= {ORACLE_MAX_T} and n <= {ORACLE_MAX_N}")
    if k < 1:
        raise InputError("k must be positive")
    reach, sizes = _oracle_table(T, min(k, T))
    want = 0
    for d in D.rows:
        want |= 1 << d
    ok = (reach & want) == want
    for size in range(1, (1 << T)):
        if np.any(ok & (sizes == size)):
            return size
    raise AssertionError("the full space always covers")


def enumerate_instances(T: int, n_max: int):
    """Every set of distinct nonzero vectors of F_2^T with rank T and T <= n <= n_max."""
    space = range(1, 1 << T)
    for n in range(T, min(n_max, (1 << T) - 1) + 1):
        for combo in itertools.combinations(space, n):
            if len(independent_indices(combo)) == T:
                yield BitMatrix(combo, T)
