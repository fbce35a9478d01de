"""Index coding instances, fitting matrices and coding setups.

Message and client indices are 0-based here; the text format is 1-based.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .errors import CompletionRejected, InputError
from .gf2 import BitMatrix, from_support, rank, row_basis, solve_row, support


@dataclass(frozen=True)
class IndexCodingInstance:
    m: int
    n: int
    requests: tuple[int, ...]
    side_info: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(self.requests))
        object.__setattr__(self, "side_info", tuple(frozenset(s) for s in self.side_info))
        if self.n < 1:
            raise InputError("an instance needs at least one client")
        if self.m < self.n:
            raise InputError(f"need m >= n, got m={self.m}, n={self.n}")
        if len(self.requests) != self.n or len(self.side_info) != self.n:
            raise InputError("requests and side_info must have one entry per client")
        for i, (q, s) in enumerate(zip(self.requests, self.side_info)):
            if not 0 <= q < self.m or any(not 0 <= j < self.m for j in s):
                raise InputError(f"client {i + 1}: message index out of range")
            if q in s:
                raise InputError(f"client {i + 1} already holds its request")


@dataclass(frozen=True)
class FittingMatrix:
    known: BitMatrix
    star_mask: BitMatrix


@dataclass(frozen=True)
class CodingSetup:
    G: BitMatrix
    A: BitMatrix

    @property
    def T(self) -> int:
        return self.A.nrows

    def coefficients(self) -> BitMatrix:
        """Decoding vectors d_i with ``d_i @ A == g_i`` as an n x T matrix."""
        rows = []
        for g in self.G.rows:
            d = solve_row(self.A, g)
            if d is None:
                raise InputError("row of G outside the row space of A")
            rows.append(d)
        return BitMatrix(tuple(rows), self.T)


def build_fitting_matrix(inst: IndexCodingInstance) -> FittingMatrix:
    known, stars = [], []
    for q, s in zip(inst.requests, inst.side_info):
        known.append(from_support([q], inst.m))
        stars.append(from_support(s, inst.m))
    return FittingMatrix(BitMatrix(tuple(known), inst.m), BitMatrix(tuple(stars), inst.m))


def complete(fm: FittingMatrix, policy: str = "zeros", G: BitMatrix | None = None) -> CodingSetup:
    """Fill the free entries of ``fm`` and derive a full-rank coding matrix.

    ``policy="zeros"`` sets every free entry to 0. ``policy="external"``
    checks a caller-supplied completion ``G`` against the free-entry pattern.
    """
    if policy == "zeros":
        G = fm.known
    elif policy == "external":
        if G is None:
            raise InputError("external completion requires a matrix")
        if G.shape != fm.known.shape:
            raise InputError(f"completed G has shape {G.shape}, expected {fm.known.shape}")
        for i, (g, k, s) in enumerate(zip(G.rows, fm.known.rows, fm.star_mask.rows)):
            if g & ~s != k:
                raise InputError(f"row {i + 1} of G conflicts with the fitting pattern")
    else:
        raise InputError(f"unknown completion policy {policy!r}")
    seen: dict[int, int] = {}
    for i, g in enumerate(G.rows):
        if g in seen:
            raise CompletionRejected(f"rows {seen[g] + 1} and {i + 1} of G coincide")
        seen[g] = i
    return CodingSetup(G, row_basis(G))


def parse_instance(text: str) -> IndexCodingInstance:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InputError("empty instance file")
    try:
        m, n = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise InputError(f"bad header line {lines[0]!r}") from exc
    if len(lines) - 1 != n:
        raise InputError(f"expected {n} client lines, found {len(lines) - 1}")
    requests, side = [], []
    for ln in lines[1:]:
        if ":" not in ln:
            raise InputError(f"missing ':' in {ln!r}")
        head, tail = ln.split(":", 1)
        try:
            requests.append(int(head) - 1)
            side.append(frozenset(int(x) - 1 for x in tail.split()))
        except ValueError as exc:
            raise InputError(f"bad client line {ln!r}") from exc
    return IndexCodingInstance(m, n, tuple(requests), tuple(side))


def format_instance(inst: IndexCodingInstance) -> str:
    out = [f"{inst.m} {inst.n}"]
    for q, s in zip(inst.requests, inst.side_info):
        tail = " ".join(str(j + 1) for j in sorted(s))
        out.append(f"{q + 1} : {tail}".rstrip())
    return "\n".join(out) + "\n"


def random_coefficient_instance(T: int, n: int, seed: int) -> BitMatrix:
    """n distinct nonzero vectors of F_2^T drawn uniformly without replacement."""
    if T < 1 or not 1 <= n <= (1 << T) - 1:
        raise InputError(f"need 1 <= n <= 2^T - 1, got T={T}, n={n}")
    rng = random.Random(seed)
    return BitMatrix(tuple(rng.sample(range(1, 1 << T), n)), T)


def random_spanning_coefficients(T: int, n: int, rng: random.Random, max_tries: int = 1000) -> BitMatrix:
    """Like :func:`random_coefficient_instance` but conditioned on rank T."""
    if not T <= n <= (1 << T) - 1:
        raise InputError(f"need T <= n <= 2^T - 1, got T={T}, n={n}")
    for _ in range(max_tries):
        D = BitMatrix(tuple(rng.sample(range(1, 1 << T), n)), T)
        if rank(D) == T:
            return D
    raise InputError(f"could not draw a rank-{T} sample of {n} vectors")


def random_setup(T: int, n: int, m: int, rng: random.Random,
                 D: BitMatrix | None = None) -> tuple[IndexCodingInstance, CodingSetup]:
    """A random full-rank code A (T x m) and an instance it satisfies.

    Each client's row is g_i = d_i @ A; the request is a random position in
    the support of g_i and the side information is the rest of that support.
    """
    if m < max(n, T):
        raise InputError("need m >= max(n, T)")
    if D is None:
        D = random_spanning_coefficients(T, n, rng)
    A = _random_full_rank(T, m, rng)
    G = BitMatrix(tuple(_combine_bits(d, A, T) for d in D.rows), m)
    requests, side = [], []
    for g in G.rows:
        supp = support(g, m)
        q = rng.choice(supp)
        requests.append(q)
        side.append(frozenset(supp) - {q})
    inst = IndexCodingInstance(m, len(D), tuple(requests), tuple(side))
    return inst, complete(build_fitting_matrix(inst), "external", G)


def _combine_bits(d: int, A: BitMatrix, T: int) -> int:
    acc = 0
    for j in support(d, T):
        acc ^= A.rows[j]
    return acc


def _random_full_rank(T: int, m: int, rng: random.Random) -> BitMatrix:
    while True:
        A = BitMatrix(tuple(rng.getrandbits(m) for _ in range(T)), m)
        if rank(A) == T:
            return A


def instance_from_rows(requests: Sequence[int], side_info: Sequence[Sequence[int]], m: int) -> IndexCodingInstance:
    """Convenience constructor taking 1-based indices, as written in the text format."""
    return IndexCodingInstance(
        m, len(requests), tuple(q - 1 for q in requests), tuple(frozenset(j - 1 for j in s) for s in side_info)
    )
