"""Experiment sweeps producing long-format CSV.

Every row is ``experiment,T,k,n,scheme,stat,value,seed,instances``. Sampled
experiments draw ``instances`` coefficient matrices per (k, n) point, with a
per-point seed derived from the sweep seed, so output is bit-reproducible no
matter how points are scheduled across worker processes.
"""

from __future__ import annotations

import csv
import io
import os
import random
import statistics
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .errors import InputError
from .gf2 import BitMatrix
from .graph import branch_search, scr, scr_best, scr_worst
from .instance import random_coefficient_instance, random_spanning_coefficients
from .universal import build_scheme, lower_bound_Tk, prune_used_rows, scheme_size

CSV_FIELDS = ("experiment", "T", "k", "n", "scheme", "stat", "value", "seed", "instances")
EXPERIMENTS = ("fig4", "fig6", "fig9", "custom")
SCHEMES = ("scheme1", "scr", "branch-search", "lb", "ub-uncoded", "scr-best", "scr-worst")
N_EXPRESSIONS = {
    "2^T-1": lambda T: (1 << T) - 1,
    "T^4": lambda T: T ** 4,
    "T^2": lambda T: T ** 2,
}

# Branch-Search is exponential; sweeps refuse points beyond these sizes.
BS_MAX_T = 8
BS_MAX_N = 128
# A node budget (not wall time) keeps sampled sweeps deterministic.
DEFAULT_NODE_BUDGET = 500
DEFAULT_TIME_BUDGET = 10.0


@dataclass(frozen=True)
class SweepSpec:
    experiment: str
    T: int
    ks: tuple[int, ...]
    ns: tuple[int, ...]
    instances: int = 1
    seed: int = 0
    schemes: tuple[str, ...] = ("scheme1", "lb", "ub-uncoded")
    size_cap: int | None = None
    node_budget: int | None = DEFAULT_NODE_BUDGET
    time_budget: float | None = DEFAULT_TIME_BUDGET
    n_expr: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InputError(f"unknown experiment {self.experiment!r}")
        if self.T < 1:
            raise InputError("T must be positive")
        if not self.ks or not self.ns:
            raise InputError("k and n ranges must be non-empty")
        if self.instances < 1:
            raise InputError("instance count must be at least 1")
        for k in self.ks:
            if not 1 <= k <= self.T:
                raise InputError(f"k={k} outside [1, T={self.T}]")
        for n in self.ns:
            if n < 1:
                raise InputError(f"n={n} must be positive")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise InputError(f"unknown schemes {bad}; choose from {', '.join(SCHEMES)}")

    @property
    def analytic(self) -> bool:
        return self.experiment == "fig4"

    def points(self) -> list[tuple[int, int]]:
        return [(k, n) for k in self.ks for n in self.ns]


def eval_n_expr(expr: str, T: int) -> int:
    try:
        return N_EXPRESSIONS[expr.replace(" ", "")](T)
    except KeyError:
        raise InputError(f"unknown n expression {expr!r}; use one of {', '.join(N_EXPRESSIONS)}") from None


def parse_int_list(text: str) -> tuple[int, ...]:
    """'5', '1,3,7' or the inclusive range '7:63'."""
    try:
        if ":" in text:
            a, b = (int(x) for x in text.split(":"))
            return tuple(range(a, b + 1))
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"cannot parse integer list {text!r}") from None


def preset(experiment: str, T: int | None = None, **overrides) -> SweepSpec:
    """Default specs for the three figures; keyword overrides win."""
    if experiment == "fig4":
        T = 20 if T is None else T
        base = dict(ks=tuple(range(1, T + 1)), ns=((1 << T) - 1,), instances=1,
                    schemes=("scheme1", "lb", "ub-uncoded"), n_expr="2^T-1")
    elif experiment == "fig6":
        # the original setup is T=20 with 1000 instances; T=10 keeps CI fast
        T = 10 if T is None else T
        ns = tuple(sorted({T} | {1 << j for j in range(1, T) if 1 << j > T} | {(1 << T) - 1}))
        base = dict(ks=(2, 5) if T >= 5 else (2,), ns=ns, instances=100,
                    schemes=("scheme1", "lb", "ub-uncoded"))
    elif experiment == "fig9":
        T = 6 if T is None else T
        base = dict(ks=(2,), ns=tuple(range(T + 1, (1 << T))), instances=1000,
                    schemes=("scr", "branch-search", "lb", "ub-uncoded"))
    elif experiment == "custom":
        if T is None:
            raise InputError("custom sweeps need --T")
        base = dict(ks=(2,), ns=(T + 1,), instances=10, schemes=("scheme1", "lb", "ub-uncoded"))
    else:
        raise InputError(f"unknown experiment {experiment!r}")
    base.update({k: v for k, v in overrides.items() if v is not None})
    return SweepSpec(experiment=experiment, T=T, **base)


def point_seed(seed: int, spec: SweepSpec, k: int, n: int) -> int:
    return seed ^ zlib.crc32(f"{spec.experiment}|{spec.T}|{k}|{n}".encode())


# per-scheme evaluation ----------------------------------------------------

def _check_rows(P_rows, rows, D: BitMatrix, k: int, scheme: str) -> None:
    for i, (d, rs) in enumerate(zip(D.rows, rows)):
        acc = 0
        for r in rs:
            acc ^= P_rows[r]
        if len(rs) > k or acc != d:
            raise AssertionError(f"{scheme}: client {i + 1} is not served within {k} rows")


def _scheme1_size(D: BitMatrix, k: int) -> int:
    scheme = build_scheme(D.ncols, D.nrows, k, vectors=D)
    kept, assignment = prune_used_rows(scheme, D)
    P_rows = [scheme.P.rows[r] for r in assignment.kept]
    _check_rows(P_rows, assignment.rows, D, k, "scheme1")
    return kept


def _scr_size(D: BitMatrix, k: int) -> int:
    res = scr(D, k=k)
    res.check(D)
    return res.size


def _bs_size(D: BitMatrix, k: int, spec: SweepSpec) -> int:
    res = branch_search(D, k, spec.size_cap, spec.node_budget, spec.time_budget)
    res.check(D)
    return res.size


def _skip_reason(scheme: str, T: int, n: int, k: int) -> str | None:
    if scheme in ("scr", "scr-best", "scr-worst") and (k < 2 or k & (k - 1)):
        return "k is not a power of two >= 2"
    if scheme in ("scr", "branch-search") and n < T:
        return "rank T needs n >= T"
    if scheme == "branch-search":
        if k < 2:
            return "k < 2"
        if T > BS_MAX_T or n > BS_MAX_N:
            return "beyond branch-search caps"
    if n > (1 << T) - 1 and scheme in ("scheme1", "scr", "branch-search"):
        return "n exceeds 2^T - 1 distinct vectors"
    return None


def run_point(spec: SweepSpec, k: int, n: int) -> list[list]:
    """All CSV rows for one (k, n) point."""
    T = spec.T
    seed = point_seed(spec.seed, spec, k, n)
    base = [spec.experiment, T, k, n]
    tail = [spec.seed, spec.instances]
    out: list[list] = []

    def fixed(scheme: str, value) -> None:
        out.append(base + [scheme, "value", value] + tail)

    sampled = [s for s in spec.schemes if s in ("scheme1", "scr", "branch-search")]
    if spec.analytic:
        for s in spec.schemes:
            reason = _skip_reason(s, T, n, k) if s in ("scr-best", "scr-worst") else None
            if reason:
                out.append(base + [s, "skipped", reason] + tail)
            elif s == "scheme1":
                fixed(s, scheme_size(T, n, k))
            elif s == "lb":
                fixed(s, lower_bound_Tk(T, n, k))
            elif s == "ub-uncoded":
                fixed(s, n)
            elif s == "scr-best":
                fixed(s, scr_best(n))
            elif s == "scr-worst":
                fixed(s, scr_worst(n, T))
            else:
                out.append(base + [s, "skipped", "not analytic"] + tail)
        return out

    runnable = []
    for s in sampled:
        reason = _skip_reason(s, T, n, k)
        if reason:
            out.append(base + [s, "skipped", reason] + tail)
        else:
            runnable.append(s)
    sizes: dict[str, list[int]] = {s: [] for s in runnable}
    if runnable:
        rng = random.Random(seed)
        spanning = any(s in ("scr", "branch-search") for s in runnable)
        for _ in range(spec.instances):
            if spanning:
                D = random_spanning_coefficients(T, n, rng)
            else:
                D = random_coefficient_instance(T, n, rng.getrandbits(64))
            for s in runnable:
                if s == "scheme1":
                    sizes[s].append(_scheme1_size(D, k))
                elif s == "scr":
                    sizes[s].append(_scr_size(D, k))
                else:
                    sizes[s].append(_bs_size(D, k, spec))
    for s in spec.schemes:
        if s in sizes:
            vals = sizes[s]
            for stat, value in (
                ("mean", statistics.fmean(vals)),
                ("std", statistics.pstdev(vals)),
                ("min", min(vals)),
                ("max", max(vals)),
            ):
                out.append(base + [s, stat, value] + tail)
        elif s == "lb":
            fixed(s, lower_bound_Tk(T, n, k))
        elif s == "ub-uncoded":
            fixed(s, n)
        elif s in ("scr-best", "scr-worst"):
            reason = _skip_reason(s, T, n, k)
            if reason:
                out.append(base + [s, "skipped", reason] + tail)
            else:
                fixed(s, scr_best(n) if s == "scr-best" else scr_worst(n, T))
    return out


def _run_point_args(args):
    return run_point(*args)


def worker_count() -> int:
    env = os.environ.get("KLAC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"KLAC_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[list]:
    points = spec.points()
    workers = min(workers or worker_count(), len(points))
    jobs = [(spec, k, n) for k, n in points]
    if workers <= 1:
        chunks = [_run_point_args(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_point_args, jobs))  # map keeps input order
    return [row for chunk in chunks for row in chunk]


def to_csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    w.writerows(rows)
    return buf.getvalue()


def with_seed(spec: SweepSpec, seed: int) -> SweepSpec:
    return replace(spec, seed=seed)
