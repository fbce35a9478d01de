"""Bit-packed linear algebra over GF(2).

Rows are stored as Python ints. Column 0 is the most significant bit of a
row, so ``int("1100", 2)`` is the row ``1100`` and sorting rows by integer
value sorts them by their binary reading.

Coefficient vectors returned by :func:`solve_row` use the same convention
with one bit per row of the matrix: row 0 owns the leftmost bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import InputError


def vec_from_str(text: str) -> int:
    text = text.strip()
    if text and set(text) - {"0", "1"}:
        raise InputError(f"not a 0/1 string: {text!r}")
    return int(text, 2) if text else 0


def vec_to_str(v: int, width: int) -> str:
    return format(v, f"0{width}b") if width else ""


def weight(v: int) -> int:
    return bin(v).count("1")


def support(v: int, width: int) -> list[int]:
    """Positions (0 = leftmost) of the nonzero entries of ``v``."""
    return [j for j in range(width) if (v >> (width - 1 - j)) & 1]


def from_support(positions: Iterable[int], width: int) -> int:
    v = 0
    for j in positions:
        v |= 1 << (width - 1 - j)
    return v


def get_bit(v: int, j: int, width: int) -> int:
    return (v >> (width - 1 - j)) & 1


@dataclass(frozen=True)
class BitMatrix:
    """Dense GF(2) matrix; ``rows`` holds one packed int per row."""

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise InputError(f"row value {r} does not fit in {self.ncols} columns")

    @classmethod
    def from_strings(cls, lines: Sequence[str], ncols: int | None = None) -> "BitMatrix":
        lines = [ln.strip() for ln in lines]
        widths = {len(ln) for ln in lines}
        if len(widths) > 1:
            raise InputError(f"rows have unequal lengths {sorted(widths)}")
        if ncols is None:
            ncols = widths.pop() if widths else 0
        elif widths and widths.pop() != ncols:
            raise InputError("row length does not match ncols")
        return cls(tuple(vec_from_str(ln) for ln in lines), ncols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(tuple(1 << (n - 1 - i) for i in range(n)), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls((0,) * nrows, ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.ncols)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[int]:
        return iter(self.rows)

    def __getitem__(self, i: int) -> int:
        return self.rows[i]

    def entry(self, i: int, j: int) -> int:
        return get_bit(self.rows[i], j, self.ncols)

    def to_strings(self) -> list[str]:
        return [vec_to_str(r, self.ncols) for r in self.rows]

    def select(self, indices: Iterable[int]) -> "BitMatrix":
        return BitMatrix(tuple(self.rows[i] for i in indices), self.ncols)

    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if other.ncols != self.ncols:
            raise InputError("column count mismatch in vstack")
        return BitMatrix(self.rows + other.rows, self.ncols)

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        return matmul(self, other)


def matmul(P: BitMatrix, A: BitMatrix) -> BitMatrix:
    """GF(2) product ``P @ A``: row i is the XOR of the rows of A selected by P[i]."""
    if P.ncols != A.nrows:
        raise InputError(f"cannot multiply {P.shape} by {A.shape}")
    out = []
    for p in P.rows:
        acc = 0
        for j in support(p, P.ncols):
            acc ^= A.rows[j]
        out.append(acc)
    return BitMatrix(tuple(out), A.ncols)


def combine(coeffs: int, M: BitMatrix) -> int:
    """Row vector ``coeffs @ M`` (coeffs has one bit per row of M)."""
    acc = 0
    for i in support(coeffs, M.nrows):
        acc ^= M.rows[i]
    return acc


def xor_rows(rows: Iterable[int]) -> int:
    acc = 0
    for r in rows:
        acc ^= r
    return acc


class _Eliminator:
    """Incremental forward elimination keyed on leading bits.

    Each stored pivot row carries the set of original row indices (as a
    bitmask over insertion order) whose XOR produced it.
    """

    __slots__ = ("pivots",)

    def __init__(self):
        self.pivots: dict[int, tuple[int, int]] = {}

    def reduce(self, v: int, combo: int = 0) -> tuple[int, int]:
        pivots = self.pivots
        while v:
            lead = v.bit_length() - 1
            hit = pivots.get(lead)
            if hit is None:
                break
            v ^= hit[0]
            combo ^= hit[1]
        return v, combo

    def reduce_fully(self, v: int, combo: int = 0) -> tuple[int, int]:
        # pivot rows are not back-substituted, so walk every bit high to low
        pivots = self.pivots
        bit = v.bit_length() - 1
        while bit >= 0:
            if (v >> bit) & 1:
                hit = pivots.get(bit)
                if hit is not None:
                    v ^= hit[0]
                    combo ^= hit[1]
            bit -= 1
        return v, combo

    def insert(self, v: int, combo: int) -> None:
        self.pivots[v.bit_length() - 1] = (v, combo)


def rank(M: BitMatrix) -> int:
    elim = _Eliminator()
    r = 0
    for row in M.rows:
        v, _ = elim.reduce(row)
        if v:
            elim.insert(v, 0)
            r += 1
    return r


def independent_indices(rows: Sequence[int]) -> list[int]:
    """Indices of rows that are independent of all earlier rows."""
    elim = _Eliminator()
    keep = []
    for i, row in enumerate(rows):
        v, _ = elim.reduce(row)
        if v:
            elim.insert(v, 0)
            keep.append(i)
    return keep


def row_basis(M: BitMatrix) -> BitMatrix:
    return M.select(independent_indices(M.rows))


def solve_row(M: BitMatrix, target: int, width: int | None = None) -> int | None:
    """Coefficients d (one bit per row of M) with ``d @ M == target``.

    Dependent rows of M act as free variables and get coefficient 0, so the
    answer is unique and reproducible. Returns None when target is outside
    the row space.
    """
    if width is not None and width != M.ncols:
        raise InputError(f"target width {width} != matrix width {M.ncols}")
    if target < 0 or target >= (1 << M.ncols):
        raise InputError(f"target does not fit in {M.ncols} columns")
    n = M.nrows
    elim = _Eliminator()
    for i, row in enumerate(M.rows):
        v, combo = elim.reduce(row, 1 << (n - 1 - i))
        if v:
            elim.insert(v, combo)
    rest, combo = elim.reduce_fully(target)
    if rest:
        return None
    return combo


def find_circuit(M: BitMatrix) -> frozenset[int] | None:
    """Support of the first dependency met while scanning rows in order.

    The returned set is a circuit: its rows XOR to zero and every proper
    subset is independent. None when all rows are independent.
    """
    elim = _Eliminator()
    for i, row in enumerate(M.rows):
        v, combo = elim.reduce(row, 1 << i)
        if v == 0:
            return frozenset(j for j in range(i + 1) if (combo >> j) & 1)
        elim.insert(v, combo)
    return None


def parse_matrix(text: str) -> BitMatrix:
    """Read the shared matrix text format (one 0/1 row per line)."""
    lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lines.append(line)
    return BitMatrix.from_strings(lines)


def format_matrix(M: BitMatrix) -> str:
    return "".join(s + "\n" for s in M.to_strings())
