"""(m, r, l, s) combinatorial designs and the NW parameter calculator."""
import math
from dataclasses import dataclass
from itertools import combinations, islice

import mpmath
import numpy as np

from .errors import ConstructionError, ParamError

# m = ceil(DESIGN_CONSTANT * r^2 / l) in nw_params
DESIGN_CONSTANT = 2
GREEDY_RETRIES = 20000
MAX_UNIVERSE = 1 << 22


@dataclass(frozen=True)
class Design:
    universe_m: int
    set_size_r: int
    overlap_l: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(v) for v in b)) for b in self.blocks)
        for b in blocks:
            if len(b) != self.set_size_r or len(set(b)) != len(b):
                raise ParamError(f"block {b} does not have {self.set_size_r} distinct elements")
            if b and (b[0] < 0 or b[-1] >= self.universe_m):
                raise ParamError(f"block {b} leaves the universe [0, {self.universe_m})")
        object.__setattr__(self, "blocks", blocks)

    @property
    def s(self):
        return len(self.blocks)

    def block_array(self):
        return np.array(self.blocks, dtype=np.int64).reshape(self.s, self.set_size_r)

    def incidence(self):
        inc = np.zeros((self.s, self.universe_m), dtype=np.int32)
        for i, b in enumerate(self.blocks):
            inc[i, list(b)] = 1
        return inc

    def truncate(self, s):
        return Design(self.universe_m, self.set_size_r, self.overlap_l, self.blocks[:s])

    def to_text(self):
        lines = [f"{self.universe_m} {self.set_size_r} {self.overlap_l} {self.s}"]
        lines += [" ".join(map(str, b)) for b in self.blocks]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParamError("empty design file")
        m, r, l, s = (int(t) for t in lines[0].split())
        blocks = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
        if len(blocks) != s:
            raise ParamError(f"design header promises {s} blocks, file has {len(blocks)}")
        if r == 0:
            blocks = [()] * s
        return cls(m, r, l, tuple(blocks))


def read_design(path):
    with open(path) as fh:
        return Design.from_text(fh.read())


def write_design(path, design):
    with open(path, "w") as fh:
        fh.write(design.to_text())


def is_prime(q):
    if q < 2:
        return False
    if q < 4:
        return True
    if q % 2 == 0:
        return False
    return all(q % f for f in range(3, math.isqrt(q) + 1, 2))


def next_prime(q):
    q = max(q, 2)
    while not is_prime(q):
        q += 1
    return q


def _poly_blocks(q, degree, rows, count):
    """Graphs {(a, p(a)) : a < rows} of the first ``count`` polynomials of degree < ``degree``.

    Point (a, v) is element a*q + v. Polynomial z has base-q digits of z as
    coefficients, constant term first.
    """
    a = np.arange(rows, dtype=np.int64)
    for z in range(count):
        coeffs = []
        for _ in range(degree):
            coeffs.append(z % q)
            z //= q
        vals = np.zeros(rows, dtype=np.int64)
        for c in reversed(coeffs):
            vals = (vals * a + c) % q
        yield tuple(int(v) for v in a * q + vals)


def build_design_polynomial(r_field, degree_d):
    """All degree < d polynomial graphs over F_r: r^d blocks of size r in [r^2]."""
    if not is_prime(r_field):
        raise ParamError(f"field size {r_field} is not prime")
    if degree_d < 1:
        raise ParamError("degree must be at least 1")
    q = r_field
    blocks = tuple(_poly_blocks(q, degree_d, q, q ** degree_d))
    return Design(q * q, q, degree_d - 1, blocks)


def _least_degree(q, s):
    d = 1
    while q ** d < s:
        d += 1
    return d


def _greedy(s, r, l, rng, retries):
    m = max(r + 1, math.ceil(8 * r * r / max(l, 1)))
    while m <= MAX_UNIVERSE:
        blocks, inc, fails = [], [], 0
        while len(blocks) < s and fails < retries:
            cand = np.sort(rng.choice(m, size=r, replace=False))
            row = np.zeros(m, dtype=np.int32)
            row[cand] = 1
            if inc and (np.array(inc) @ row).max() > l:
                fails += 1
                continue
            blocks.append(tuple(int(v) for v in cand))
            inc.append(row)
        if len(blocks) == s:
            return Design(m, r, l, tuple(blocks))
        m *= 2
        if m * s > (1 << 26):
            break
    return None


def build_design_for(s, r, l, rng=None):
    """An (m, r, l, s)-design, trying constructions from cheapest to most robust.

    1. Graphs of degree < d polynomials over the least prime q >= r, with the
       least d such that q^d >= s, kept only if d - 1 <= l; blocks use the
       first r evaluation points, so m = r*q.
    2. l = 0: consecutive disjoint blocks; r <= l: any distinct r-subsets.
    3. Greedy random blocks with rejection.
    4. Polynomial graphs of degree <= l over the least prime q >= r with
       q^(l+1) >= s.
    """
    if s < 1 or r < 1 or l < 0:
        raise ParamError("need s >= 1, r >= 1, l >= 0")
    rng = rng if rng is not None else np.random.default_rng(0)
    if s == 1:
        return Design(r, r, l, (tuple(range(r)),))

    q = next_prime(r)
    d = _least_degree(q, s)
    if d - 1 <= l and d <= r:
        return Design(r * q, r, l, tuple(_poly_blocks(q, d, r, s)))

    if l == 0:
        return Design(s * r, r, 0, tuple(tuple(range(i * r, (i + 1) * r)) for i in range(s)))
    if r <= l:
        m = r
        while math.comb(m, r) < s:
            m += 1
        return Design(m, r, l, tuple(islice(combinations(range(m), r), s)))

    found = _greedy(s, r, l, rng, GREEDY_RETRIES)
    if found is not None:
        return found

    q = next_prime(max(r, math.ceil(s ** (1 / (l + 1)))))
    while q ** (l + 1) < s:
        q = next_prime(q + 1)
    if r * q > MAX_UNIVERSE:
        raise ConstructionError(f"no ({r}, {l}, {s}) design within a universe of {MAX_UNIVERSE}")
    return Design(r * q, r, l, tuple(_poly_blocks(q, l + 1, r, s)))


@dataclass
class DesignReport:
    ok: bool
    max_overlap: int
    m_over_r2_by_l: float
    problems: list

    def to_json(self):
        return {"ok": self.ok, "max_overlap": self.max_overlap,
                "m_over_r2_by_l": self.m_over_r2_by_l, "problems": self.problems}


def verify_design(design, chunk=2048):
    """Exhaustive pairwise-intersection check via the incidence Gram matrix."""
    problems = []
    for i, b in enumerate(design.blocks):
        if len(b) != design.set_size_r or len(set(b)) != len(b):
            problems.append(f"block {i} has wrong size or repeats")
        if any(v < 0 or v >= design.universe_m for v in b):
            problems.append(f"block {i} leaves the universe")
    max_overlap = 0
    if design.s > 1:
        # float Gram product goes through BLAS and is exact at these sizes
        inc = design.incidence().astype(np.float64)
        for lo in range(0, design.s, chunk):
            gram = (inc[lo:lo + chunk] @ inc.T).astype(np.int64)
            rows = np.arange(lo, min(lo + chunk, design.s))
            gram[rows - lo, rows] = -1
            max_overlap = max(max_overlap, int(gram.max()))
    if max_overlap > design.overlap_l:
        problems.append(f"max overlap {max_overlap} exceeds l={design.overlap_l}")
    r, l = design.set_size_r, design.overlap_l
    ratio = design.universe_m / (r * r / l) if l > 0 and r > 0 else float("inf")
    return DesignReport(not problems, max_overlap, ratio, problems)


# ---------------------------------------------------------------- NW parameters

PROFILES = ("viola", "ls11_sym", "ls11_thr", "main", "many_gates")


@dataclass
class NWParams:
    profile: str
    s: int
    eps: float
    tau: float
    c_d: float
    ell: int
    r: int
    m: int
    hardness_size: int
    hardness_corr: float
    desk_scale: bool = False

    def to_json(self):
        return {k: (str(v) if isinstance(v, int) and v.bit_length() > 53 else v)
                for k, v in self.__dict__.items()}


def _nint(x):
    return int(mpmath.nint(x))


def _pow2(exponent, prec):
    with mpmath.workprec(max(prec, int(exponent) + 128)):
        return _nint(mpmath.power(2, exponent))


def nw_params(profile, s, eps, tau=None, c_d=None, desk_cap=None):
    """Block size, overlap and seed length for each instantiation of the NW generator.

    Exact integers; every real-valued term is rounded to the nearest integer
    on its own. In the LS11 formulas the o(1) exponents are dropped (exponent
    1 for SYM, 2 for THR) and log log s is clamped below at 1.
    """
    if profile not in PROFILES:
        raise ParamError(f"unknown profile {profile!r}; choose from {PROFILES}")
    if s < 2:
        raise ParamError("s must be at least 2")
    if not 0 < eps < 1:
        raise ParamError("eps must lie in (0, 1)")
    needs = {"viola": ("c_d",), "ls11_sym": ("c_d",), "ls11_thr": ("c_d",),
             "main": ("tau",), "many_gates": ("tau",)}[profile]
    for name, value in (("tau", tau), ("c_d", c_d)):
        if name in needs and (value is None or value <= 0):
            raise ParamError(f"profile {profile} needs a positive {name}")

    ell = (int(s) - 1).bit_length()  # ceil(log2 s)

    def formula(prec):
        with mpmath.workprec(prec):
            log_s = mpmath.log(s, 2)
            log_s_eps = mpmath.log(mpmath.mpf(s) / mpmath.mpf(eps), 2)
            if profile == "viola":
                return _pow2(10 * mpmath.sqrt(log_s_eps / c_d), prec)
            if profile in ("ls11_sym", "ls11_thr"):
                loglog = max(mpmath.mpf(1), mpmath.log(log_s, 2))
                extra = 1 if profile == "ls11_sym" else 2
                return _pow2((10 / mpmath.mpf(c_d)) * log_s / loglog, prec) + _nint(log_s_eps ** extra)
            return (_pow2(10 * mpmath.sqrt(2 / mpmath.mpf(tau) * log_s), prec)
                    + _nint(log_s_eps ** mpmath.mpf("2.005")))

    # second pass carries enough bits for the integer part to be exact
    r = formula(formula(64).bit_length() + 128)
    desk = desk_cap is not None
    if desk:
        r = max(min(r, int(desk_cap)), ell)
    m = max(r, -(-DESIGN_CONSTANT * r * r // ell))
    return NWParams(profile, int(s), float(eps), tau, c_d, ell, r, m,
                    hardness_size=int(s) << ell, hardness_corr=eps / s, desk_scale=desk)
