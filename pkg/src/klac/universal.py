"""Universal k-limited-access constructions.

A scheme is a matrix P (T_k x T) applied to any full-rank coding matrix A.
Client i holds a coefficient vector d_i with g_i = d_i @ A and is served by
a set of at most k rows of P whose XOR equals d_i.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

from .errors import InputError
from .gf2 import BitMatrix, support, vec_to_str, weight


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class LimitedAccessScheme:
    k: int
    T: int
    P: BitMatrix
    mode: str  # "identity" | "case1" | "case2" | "uncoded"

    @property
    def T_k(self) -> int:
        return self.P.nrows

    def reconstruct(self, d: int) -> tuple[int, ...]:
        """0-based rows of P whose XOR is d, using at most k rows."""
        if self.mode == "identity":
            return tuple(support(d, self.T))
        if self.mode == "case1":
            return reconstruct_case1(d, self.T)
        if self.mode == "case2":
            return reconstruct_case2(d, self.T, self.k)
        if self.mode == "uncoded":
            if d == 0:
                return ()
            try:
                return (self.P.rows.index(d),)
            except ValueError:
                raise InputError(f"{vec_to_str(d, self.T)} is not a client vector of this uncoded scheme") from None
        raise InputError(f"unknown scheme mode {self.mode!r}")


@dataclass(frozen=True)
class AccessAssignment:
    """Per-client row sets into A_k (0-based), combined with all-ones coefficients."""

    rows: tuple[tuple[int, ...], ...]
    kept: tuple[int, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.rows)

    def coefficients(self, client: int) -> int:
        return (1 << len(self.rows[client])) - 1

    def max_rows(self) -> int:
        return max((len(r) for r in self.rows), default=0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["client_id", "row_count", "rows"])
        for i, rows in enumerate(self.rows):
            w.writerow([i + 1, len(rows), ",".join(str(r + 1) for r in rows)])
        return buf.getvalue()


def lower_bound_Tk(T: int, n: int, k: int) -> int:
    """max(T, smallest t with sum_{i=1..k} C(t, i) >= n)."""
    if not 1 <= k <= T or n < 1:
        raise InputError(f"need 1 <= k <= T and n >= 1, got T={T}, n={n}, k={k}")

    def reach(t: int) -> int:
        return sum(comb(t, i) for i in range(1, k + 1))

    # reach is increasing in t and reach(n) >= n, so bisect on [1, n]
    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi) // 2
        if reach(mid) >= n:
            hi = mid
        else:
            lo = mid + 1
    return max(T, lo)


def build_identity(T: int) -> LimitedAccessScheme:
    return LimitedAccessScheme(T, T, BitMatrix.identity(T), "identity")


def build_case1(T: int) -> LimitedAccessScheme:
    if T < 2:
        raise InputError("case I needs T >= 2")
    P = BitMatrix.identity(T).vstack(BitMatrix(((1 << T) - 1,), T))
    return LimitedAccessScheme(ceil_div(T, 2), T, P, "case1")


def reconstruct_case1(d: int, T: int) -> tuple[int, ...]:
    if weight(d) <= ceil_div(T, 2):
        return tuple(support(d, T))
    comp = d ^ ((1 << T) - 1)
    return tuple(support(comp, T)) + (T,)


def case2_layout(T: int, k: int) -> tuple[int, int, int]:
    """(block width w, full block count Q, remainder width) for case II."""
    w = ceil_div(T, k)
    Q = T // w
    return w, Q, T - Q * w


def case2_size(T: int, k: int) -> int:
    w, Q, rem = case2_layout(T, k)
    return Q * ((1 << w) - 1) + (1 << rem) - 1


def build_case2(T: int, k: int) -> LimitedAccessScheme:
    # build_scheme only picks this for k < ceil(T/2), but the blocks are valid for any k <= T
    if not 1 <= k <= T:
        raise InputError(f"case II needs 1 <= k <= T, got T={T}, k={k}")
    w, Q, rem = case2_layout(T, k)
    rows = []
    for width, shift in _case2_blocks(T, w, Q, rem):
        # all nonzero patterns in increasing binary value, placed at the block's columns
        rows.extend(pattern << shift for pattern in range(1, 1 << width))
    return LimitedAccessScheme(k, T, BitMatrix(tuple(rows), T), "case2")


def _case2_blocks(T: int, w: int, Q: int, rem: int) -> list[tuple[int, int]]:
    blocks = [(w, T - (i + 1) * w) for i in range(Q)]
    if rem:
        blocks.append((rem, 0))
    return blocks


def reconstruct_case2(d: int, T: int, k: int) -> tuple[int, ...]:
    w, Q, rem = case2_layout(T, k)
    out, offset = [], 0
    for width, shift in _case2_blocks(T, w, Q, rem):
        chunk = (d >> shift) & ((1 << width) - 1)
        if chunk:
            out.append(offset + chunk - 1)
        offset += (1 << width) - 1
    return tuple(out)


def coded_size(T: int, k: int) -> int:
    """T_k of the coded (non-uncoded) universal scheme for this regime."""
    if not 1 <= k <= T:
        raise InputError(f"need 1 <= k <= T, got T={T}, k={k}")
    if k == T:
        return T
    if k >= ceil_div(T, 2):
        return T + 1
    return case2_size(T, k)


def scheme_mode(T: int, n: int, k: int) -> str:
    """Mode picked by :func:`build_scheme`; uncoded only when strictly smaller."""
    size = coded_size(T, k)
    if n < size:
        return "uncoded"
    if k == T:
        return "identity"
    return "case1" if k >= ceil_div(T, 2) else "case2"


def scheme_size(T: int, n: int, k: int) -> int:
    return min(n, coded_size(T, k))


def build_scheme(T: int, n: int, k: int, vectors: BitMatrix | None = None) -> LimitedAccessScheme:
    """Smallest universal scheme for (T, n, k).

    The uncoded mode sends each client's vector directly, so it needs the n
    client coefficient vectors in ``vectors``.
    """
    mode = scheme_mode(T, n, k)
    if mode == "identity":
        return build_identity(T)
    if mode == "case1":
        s = build_case1(T)
        return LimitedAccessScheme(k, T, s.P, "case1")
    if mode == "case2":
        return build_case2(T, k)
    if vectors is None:
        raise InputError("uncoded scheme needs the client coefficient vectors")
    if vectors.ncols != T or vectors.nrows != n:
        raise InputError(f"expected {n} client vectors of width {T}")
    if len(set(vectors.rows)) != n or 0 in vectors.rows:
        raise InputError("client vectors must be distinct and nonzero")
    return LimitedAccessScheme(1, T, vectors, "uncoded")


def prune_used_rows(scheme: LimitedAccessScheme, D: BitMatrix | Sequence[int]) -> tuple[int, AccessAssignment]:
    """Keep only rows some client reconstructs from; reindex the assignment.

    ``assignment.kept`` lists the retained rows of ``scheme.P`` in order.
    """
    vectors = D.rows if isinstance(D, BitMatrix) else tuple(D)
    per_client = [scheme.reconstruct(d) for d in vectors]
    kept = sorted({r for rows in per_client for r in rows})
    new_index = {old: new for new, old in enumerate(kept)}
    rows = tuple(tuple(new_index[r] for r in rs) for rs in per_client)
    return len(kept), AccessAssignment(rows, tuple(kept))


def full_assignment(scheme: LimitedAccessScheme, D: BitMatrix | Sequence[int]) -> AccessAssignment:
    """Assignment against the unpruned P (row indices into all T_k rows)."""
    vectors = D.rows if isinstance(D, BitMatrix) else tuple(D)
    return AccessAssignment(tuple(scheme.reconstruct(d) for d in vectors), tuple(range(scheme.T_k)))
