"""Simulation of the limited-access transmission protocol.

Payloads Y_k = A_k B go out on the broadcast channel; each client privately
receives only the coding rows of A_k it needs, then decodes by XORing those
payloads and stripping its side-information messages.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import random
from dataclasses import dataclass
from math import comb

from .errors import InputError, SimulationFailure
from .gf2 import BitMatrix, matmul, support, vec_to_str
from .instance import CodingSetup, IndexCodingInstance
from .universal import AccessAssignment

MAX_ENUMERATION = 50_000


@dataclass(frozen=True)
class MessageStore:
    F: int
    messages: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.messages)

    @classmethod
    def random(cls, m: int, F: int, rng: random.Random) -> "MessageStore":
        return cls(F, tuple(rng.getrandbits(F) for _ in range(m)))


@dataclass(frozen=True)
class ClientHeader:
    """What the server sends privately to one client."""

    client: int
    row_indices: tuple[int, ...]
    rows: tuple[int, ...]


@dataclass(frozen=True)
class ClientView:
    """Everything one client observes: its coding rows and all broadcast payloads."""

    client: int
    m: int
    F: int
    T_k: int
    rows: tuple[tuple[int, int], ...]
    payloads: tuple[int, ...]

    def to_json(self) -> str:
        return json.dumps({
            "client": self.client + 1,
            "T_k": self.T_k,
            "coding_rows": [{"index": i + 1, "row": vec_to_str(r, self.m)} for i, r in self.rows],
            "payloads": [format(y, f"0{(self.F + 3) // 4}x") for y in self.payloads],
        })


@dataclass(frozen=True)
class TransmissionLog:
    n: int
    m: int
    F: int
    T: int
    k: int
    A_k: BitMatrix
    payloads: tuple[int, ...]
    headers: tuple[ClientHeader, ...]
    recovered: tuple[int | None, ...]
    decoded: tuple[bool, ...]

    @property
    def T_k(self) -> int:
        return self.A_k.nrows

    @property
    def broadcast_bits(self) -> int:
        return self.T_k * self.F

    @property
    def private_bits(self) -> int:
        # dense m-bit coefficient rows per header entry
        return sum(len(h.row_indices) for h in self.headers) * self.m

    @property
    def C_k(self) -> int:
        return self.broadcast_bits + self.private_bits

    @property
    def C(self) -> int:
        return self.T * (self.F + self.m)

    def curious_view(self, client: int) -> ClientView:
        if not 0 <= client < self.n:
            raise InputError(f"no client {client + 1}")
        h = self.headers[client]
        return ClientView(client, self.m, self.F, self.T_k, tuple(zip(h.row_indices, h.rows)), self.payloads)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["client_id", "rows_used", "decode_ok"])
        for i, (h, ok) in enumerate(zip(self.headers, self.decoded)):
            w.writerow([i + 1, len(h.row_indices), int(ok)])
        w.writerow(["totals", f"C_k={self.C_k}", f"C={self.C}", f"T={self.T}", f"T_k={self.T_k}", f"k={self.k}"])
        return buf.getvalue()


def access_options(P: BitMatrix, d: int, k: int, limit: int = MAX_ENUMERATION) -> list[tuple[int, ...]] | None:
    """All minimum-size row sets of P (at most k rows) whose XOR is d.

    None when enumerating would exceed ``limit`` combinations.
    """
    if d == 0:
        return [()]
    where = {}
    for i, r in enumerate(P.rows):
        where.setdefault(r, i)
    idx = range(P.nrows)
    for size in range(1, k + 1):
        if comb(P.nrows, size - 1) > limit:
            return None
        found = []
        for head in itertools.combinations(idx, size - 1):
            acc = d
            for i in head:
                acc ^= P.rows[i]
            last = where.get(acc)
            if last is not None and (not head or last > head[-1]):
                found.append(head + (last,))
        if found:
            return found
    return []


def sample_assignment(scheme, D: BitMatrix, rng: random.Random) -> AccessAssignment:
    """Pick uniformly among the minimum-size access sets of each client."""
    rows = []
    for i, d in enumerate(D.rows):
        opts = access_options(scheme.P, d, scheme.k)
        if opts is None:
            if not hasattr(scheme, "reconstruct"):
                raise SimulationFailure(i, "too many candidate row sets to enumerate")
            rows.append(tuple(scheme.reconstruct(d)))
        elif not opts:
            raise SimulationFailure(i, f"no set of <= {scheme.k} rows reconstructs its vector")
        else:
            rows.append(rng.choice(opts))
    return AccessAssignment(tuple(rows), tuple(range(scheme.P.nrows)))


def run_protocol(
    inst: IndexCodingInstance,
    setup: CodingSetup,
    scheme,
    assignment: AccessAssignment | None = None,
    store: MessageStore | None = None,
    F: int = 64,
    seed: int = 0,
    strict: bool = True,
) -> TransmissionLog:
    """Broadcast Y_k = (P A) B, hand each client its rows, and decode.

    ``scheme`` is anything with a coefficient-space matrix ``P`` and a
    locality ``k``. Without an explicit ``assignment`` the access sets are
    sampled uniformly among the minimum-size options using ``seed``.
    """
    rng = random.Random(seed)
    if store is None:
        store = MessageStore.random(inst.m, F, rng)
    if store.m != inst.m:
        raise InputError(f"store holds {store.m} messages, instance has {inst.m}")
    if scheme.P.ncols != setup.T:
        raise InputError(f"P has {scheme.P.ncols} columns, code has T={setup.T}")
    A_k = matmul(scheme.P, setup.A)
    payloads = tuple(_payload(row, store, inst.m) for row in A_k.rows)
    if assignment is None:
        assignment = sample_assignment(scheme, setup.coefficients(), rng)
    if assignment.n != inst.n:
        raise InputError("assignment does not cover every client")

    headers, recovered, decoded = [], [], []
    for i in range(inst.n):
        idx = tuple(assignment.rows[i])
        if len(idx) > scheme.k:
            raise SimulationFailure(i, f"assigned {len(idx)} rows, limit is {scheme.k}")
        header = ClientHeader(i, idx, tuple(A_k.rows[r] for r in idx))
        headers.append(header)
        value = _decode(header, [payloads[r] for r in idx], inst.requests[i], inst.side_info[i], store, inst.m)
        recovered.append(value)
        ok = value is not None and value == store.messages[inst.requests[i]]
        decoded.append(ok)
        if strict and not ok:
            raise SimulationFailure(i, "decoded message does not match its request")
    return TransmissionLog(inst.n, inst.m, store.F, setup.T, scheme.k, A_k, payloads,
                           tuple(headers), tuple(recovered), tuple(decoded))


def _payload(row: int, store: MessageStore, m: int) -> int:
    acc = 0
    for j in support(row, m):
        acc ^= store.messages[j]
    return acc


def _decode(header: ClientHeader, payloads, q: int, side: frozenset[int], store: MessageStore, m: int) -> int | None:
    coeff, value = 0, 0
    for row, y in zip(header.rows, payloads):
        coeff ^= row
        value ^= y
    used = support(coeff, m)
    if q not in used or any(j != q and j not in side for j in used):
        return None
    for j in used:
        if j != q:
            value ^= store.messages[j]
    return value
