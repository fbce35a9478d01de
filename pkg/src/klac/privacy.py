"""Privacy metrics for limited-access schemes, in bits.

The entropy metric counts the T-dimensional subspaces of F_2^m that contain
the k-dimensional subspace a curious client observes. The MIL functions
evaluate closed-form upper/lower bounds on the maximal information leakage
with and without limited access.

Every log-domain term has the form log2(2^a - 2^b) with a > b, evaluated as
``a + log2(1 - 2^(b - a))`` so that m in the thousands stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError

EXACT_PATH_MAX_M = 64


def log2_pow_diff(a: int, b: int) -> float:
    """log2(2^a - 2^b) for integers a > b."""
    if a <= b:
        raise InputError(f"log2(2^{a} - 2^{b}) is undefined")
    return a + math.log1p(-(2.0 ** (b - a))) / math.log(2)


def _log2_sum(terms: list[float]) -> float:
    top = max(terms)
    return top + math.log2(sum(2.0 ** (t - top) for t in terms))


def superspace_count(m: int, T: int, k: int) -> int:
    """Exact number of T-dim subspaces of F_2^m containing a fixed k-dim one."""
    _check_dims(m, T, k)
    num = den = 1
    for ell in range(T - k):
        num *= (1 << m) - (1 << (k + ell))
        den *= (1 << T) - (1 << (k + ell))
    q, r = divmod(num, den)
    assert r == 0
    return q


def count_superspaces_log2(m: int, T: int, k: int) -> float:
    _check_dims(m, T, k)
    return math.fsum(log2_pow_diff(m, k + ell) - log2_pow_diff(T, k + ell) for ell in range(T - k))


def count_superspaces_log2_exact(m: int, T: int, k: int) -> float:
    """Same value through exact big-integer arithmetic (cross-check path)."""
    if m > EXACT_PATH_MAX_M:
        raise InputError(f"exact path limited to m <= {EXACT_PATH_MAX_M}")
    return math.log2(superspace_count(m, T, k))


def _check_dims(m: int, T: int, k: int) -> None:
    if not 0 <= k <= T <= m:
        raise InputError(f"need 0 <= k <= T <= m, got m={m}, T={T}, k={k}")


def entropy_metric(m: int, t: int, k: int) -> tuple[float, float]:
    """(exact conditional entropy, large-m approximation m(t - k))."""
    return count_superspaces_log2(m, t, k), float(m * (t - k))


def mil_upper_exact(m: int, k: int, s: int) -> float:
    """log2(2^s * sum_{r=1..k} prod_{j=0..r-2} (2^m - 2^(j+1))).

    Counts candidate r-row access matrices (r <= k) able to reconstruct a
    row compatible with a client's request and s side-information messages.
    """
    if k < 1 or s < 0 or m < 2:
        raise InputError(f"need k >= 1, s >= 0, m >= 2, got m={m}, k={k}, s={s}")
    terms, acc = [], 0.0
    for r in range(1, k + 1):
        if r >= 2:
            j = r - 2
            if j + 1 >= m:
                # 2^m - 2^m kills this and every later product
                break
            acc += log2_pow_diff(m, j + 1)
        terms.append(acc)
    return s + _log2_sum(terms)


def mil_upper_relaxed(m: int, k: int, s: int) -> float:
    """s + log2(k) + (k - 1) log2(2^m - 2), the order-level relaxation."""
    if k < 1 or s < 0 or m < 2:
        raise InputError(f"need k >= 1, s >= 0, m >= 2, got m={m}, k={k}, s={s}")
    return s + math.log2(k) + (k - 1) * log2_pow_diff(m, 1)


def mil_conventional_lower(m: int, T: int) -> float:
    """sum_{j=1..T-1} log2((2^m - 2^j) / (2^T - 2^j)); zero for T = 1 or m = T."""
    if T < 1 or m < T:
        raise InputError(f"need 1 <= T <= m, got m={m}, T={T}")
    return math.fsum(log2_pow_diff(m, j) - log2_pow_diff(T, j) for j in range(1, T))


@dataclass(frozen=True)
class PrivacyReport:
    m: int
    T: int
    k: int
    side_info_size: int
    entropy_exact: float
    entropy_approx: float
    mil_upper_exact: float
    mil_upper_asymptotic: float
    mil_conventional_lower: float

    FIELDS = (
        "m", "T", "k", "side_info_size", "entropy_exact", "entropy_approx",
        "mil_upper_exact", "mil_upper_asymptotic", "mil_conventional_lower",
    )

    def as_row(self) -> list:
        return [getattr(self, f) for f in self.FIELDS]


def privacy_report(m: int, T: int, k: int, s: int) -> PrivacyReport:
    exact, approx = entropy_metric(m, T, k)
    return PrivacyReport(
        m, T, k, s, exact, approx,
        mil_upper_exact(m, k, s), mil_upper_relaxed(m, k, s), mil_conventional_lower(m, T),
    )


# brute-force oracle -------------------------------------------------------

BRUTE_FORCE_MAX_M = 5


def _rref(vectors) -> tuple[int, ...]:
    """Canonical reduced row echelon basis of span(vectors), as a sorted tuple."""
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis = [min(b, b ^ v) for b in basis]
            basis.append(v)
    return tuple(sorted(basis))


def brute_force_superspace_count(m: int, T: int, k: int) -> int:
    """Enumerate T-dim subspaces of F_2^m containing span(e_1..e_k)."""
    if m > BRUTE_FORCE_MAX_M:
        raise InputError(f"brute force limited to m <= {BRUTE_FORCE_MAX_M}")
    _check_dims(m, T, k)
    start = _rref(1 << (m - 1 - i) for i in range(k))
    level = {start}
    for _ in range(T - k):
        nxt = set()
        for basis in level:
            span = _span(basis)
            for v in range(1, 1 << m):
                if v not in span:
                    nxt.add(_rref(basis + (v,)))
        level = nxt
    return len(level)


def _span(basis: tuple[int, ...]) -> set[int]:
    out = {0}
    for b in basis:
        out |= {x ^ b for x in out}
    return out

