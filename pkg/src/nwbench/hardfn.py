"""GIP and the RW function (GIP composed with parities), their parameters, and
what survives of RW under a restriction.

Variable layout is row-major: GIP bit ``x[i*(k+1) + j]``, RW bit
``x[(i*(k+1) + j)*r + t]``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .boolcore import Cell, Restriction, TruthTable, all_inputs, apply_restriction, as_bits, compose
from .errors import CapError, DimensionError, ParamError

MAX_TABLE_VARS = 24


@dataclass(frozen=True)
class GIPParams:
    m: int
    k_plus_1: int

    def __post_init__(self):
        if self.m < 1 or self.k_plus_1 < 1:
            raise ParamError("GIP needs m >= 1 and k+1 >= 1")

    @property
    def n(self):
        return self.m * self.k_plus_1


@dataclass(frozen=True)
class RWParams:
    m: int
    k: int
    r: int

    def __post_init__(self):
        if self.m < 1 or self.k < 0 or self.r < 1:
            raise ParamError("RW needs m >= 1, k >= 0, r >= 1")

    @property
    def n(self):
        return self.m * (self.k + 1) * self.r

    def block(self, i, j):
        start = (i * (self.k + 1) + j) * self.r
        return np.arange(start, start + self.r)

    def __str__(self):
        return f"{self.m} {self.k} {self.r}"

    @classmethod
    def parse(cls, text):
        """Read the ``m k r`` triple (spaces or commas)."""
        parts = text.replace(",", " ").split()
        if len(parts) != 3:
            raise ParamError(f"expected 'm k r', got {text!r}")
        return cls(*(int(p) for p in parts))


def eval_gip(params, x):
    bits = as_bits(x, params.n)
    acc = 0
    for i in range(params.m):
        row = 1
        for j in range(params.k_plus_1):
            row &= int(bits[i * params.k_plus_1 + j])
        acc ^= row
    return acc


def eval_rw(params, x):
    bits = as_bits(x, params.n)
    k1, r = params.k + 1, params.r
    acc = 0
    for i in range(params.m):
        row = 1
        for j in range(k1):
            par = 0
            for t in range(r):
                par ^= int(bits[(i * k1 + j) * r + t])
            row &= par
        acc ^= row
    return acc


def gip_table(params):
    if params.n > MAX_TABLE_VARS:
        raise CapError(f"GIP tables are capped at {MAX_TABLE_VARS} inputs")
    x = all_inputs(params.n)
    acc = np.zeros_like(x)
    for i in range(params.m):
        row = np.ones_like(x)
        for j in range(params.k_plus_1):
            row &= x >> (i * params.k_plus_1 + j)
        acc ^= row & 1
    return TruthTable(params.n, acc)


def rw_table(params):
    if params.n > MAX_TABLE_VARS:
        raise CapError(f"RW tables are capped at {MAX_TABLE_VARS} inputs")
    x = all_inputs(params.n)
    acc = np.zeros_like(x)
    for i in range(params.m):
        row = np.ones_like(x)
        for j in range(params.k + 1):
            par = np.zeros_like(x)
            for pos in params.block(i, j):
                par ^= x >> int(pos)
            row &= par
        acc ^= row & 1
    return TruthTable(params.n, acc)


def rw_params_from_n(n, k_override=None):
    """Square RW layout m = r = floor(sqrt(n/(k+1))) fitting inside n inputs.

    Without an override k is the fixed point of k = max(1, round(0.0005 log2 m)),
    iterated from k = 1.
    """
    if n < 4:
        raise ParamError(f"n must be at least 4, got {n}")
    if k_override is not None:
        if k_override < 0:
            raise ParamError("k must be non-negative")
        k = int(k_override)
        m = math.isqrt(n // (k + 1))
    else:
        k = 1
        for _ in range(64):
            m = math.isqrt(n // (k + 1))
            k_next = max(1, round(0.0005 * math.log2(max(m, 1))))
            if k_next == k:
                break
            k = k_next
        m = math.isqrt(n // (k + 1))
    if m < 1:
        raise ParamError(f"n={n} is too small for a layout with k={k}")
    return RWParams(m, k, m)


@dataclass
class StructureReport:
    """What a restriction leaves of RW.

    ``extension`` is the restriction (rho plus the extra fixings kappa) under
    which RW becomes exactly ``b XOR RW_{m'',k,r''}`` with the copy's inputs
    negated by ``b_ij``; the copy's variables are the stars of ``extension``
    in increasing order, which is also the copy's own row-major layout.
    """
    params: RWParams
    alive_rows: tuple
    min_free_per_parity: int
    copy_params: tuple
    b: int
    b_ij: dict
    free_counts: np.ndarray = field(repr=False)
    extension: Restriction = field(repr=False)

    @property
    def m2(self):
        return self.copy_params[0]

    @property
    def r2(self):
        return self.copy_params[2]

    def to_json(self):
        return {
            "alive_rows": list(self.alive_rows),
            "min_free_per_parity": self.min_free_per_parity,
            "copy_params": list(self.copy_params),
            "constants_folded": {"b": self.b, "b_ij": [[i, j, v] for (i, j), v in sorted(self.b_ij.items())]},
            "extension": str(self.extension),
        }


def structure_under_restriction(params, rho):
    if rho.n != params.n:
        raise DimensionError(f"restriction length {rho.n} != RW arity {params.n}")
    m, k1, r = params.m, params.k + 1, params.r
    cells = rho.array.reshape(m, k1, r)
    star = cells == Cell.STAR
    free = star.sum(axis=2)
    fixed_par = (np.where(star, 0, cells).sum(axis=2) & 1).astype(int)

    alive = tuple(int(i) for i in range(m) if (free[i] > 0).all())
    r2 = int(min(free[i].min() for i in alive)) if alive else 0
    ext = rho.array.reshape(m, k1, r).copy()
    b = 0
    b_ij = {}
    for i in range(m):
        if i in alive:
            for j in range(k1):
                b_ij[(i, j)] = int(fixed_par[i, j])
                free_pos = np.flatnonzero(star[i, j])
                ext[i, j, free_pos[r2:]] = 0
            continue
        if not star[i].any():
            b ^= int(fixed_par[i].all())
            continue
        # a row with a dead parity and free variables elsewhere: zero one free
        # parity so the row contributes 0, then fix the leftovers
        j = int(np.flatnonzero(free[i] > 0)[0])
        row = ext[i]
        row[star[i]] = 0
        first = np.flatnonzero(star[i, j])[0]
        row[j, first] = fixed_par[i, j]
    return StructureReport(
        params=params,
        alive_rows=alive,
        min_free_per_parity=r2,
        copy_params=(len(alive), params.k, r2),
        b=b,
        b_ij=b_ij,
        free_counts=free,
        extension=Restriction(ext.reshape(-1)),
    )


def copy_table(report):
    """``b XOR XOR_i AND_j (b_ij XOR parity of r'' fresh inputs)`` as a table."""
    m2, k, r2 = report.copy_params
    if m2 == 0:
        return TruthTable.constant(0, report.b)
    copy = RWParams(m2, k, r2)
    if copy.n > MAX_TABLE_VARS:
        raise CapError("copy too large to tabulate")
    x = all_inputs(copy.n)
    acc = np.full_like(x, report.b)
    for ii, i in enumerate(report.alive_rows):
        row = np.ones_like(x)
        for j in range(k + 1):
            par = np.full_like(x, report.b_ij[(i, j)])
            for pos in copy.block(ii, j):
                par ^= x >> int(pos)
            row &= par
        acc ^= row & 1
    return TruthTable(copy.n, acc)


def verify_perfect_copy(params, report, table=None):
    """True when RW restricted by the report's extension equals the reported copy."""
    table = table if table is not None else rw_table(params)
    return apply_restriction(table, report.extension) == copy_table(report)


def gip_copy_check(report, target_m):
    """Does the restricted RW still hold GIP on target_m rows (needs r'' >= 1)?"""
    return report.m2 >= target_m and report.r2 >= 1


def chernoff_block_bound(params, p):
    """Union bound m(k+1) exp(-pr/8) on some parity block keeping < pr/2 stars.

    Multiplicative Chernoff lower tail Pr[X < (1 - d) mu] <= exp(-d^2 mu / 2)
    with d = 1/2 and mu = p r.
    """
    return min(1.0, params.m * (params.k + 1) * math.exp(-p * params.r / 8))


def gip_as_rw(params):
    """GIP_{m,k+1} is RW with r = 1."""
    return RWParams(params.m, params.k_plus_1 - 1, 1)


def restrict_to_gip(report):
    """Extension of the report's restriction leaving one free input per parity.

    Under it RW becomes ``b XOR GIP_{m'',k+1}`` on inputs negated by ``b_ij``.
    Returns None when the copy is empty or r'' = 0.
    """
    if report.m2 == 0 or report.r2 < 1:
        return None
    params = report.params
    cells = report.extension.array.reshape(params.m, params.k + 1, params.r).copy()
    for i in report.alive_rows:
        for j in range(params.k + 1):
            free_pos = np.flatnonzero(cells[i, j] == Cell.STAR)
            cells[i, j, free_pos[1:]] = 0
    return compose(report.extension, Restriction(cells.reshape(-1)))
