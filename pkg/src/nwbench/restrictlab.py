"""Exact decision-tree depth, switching-lemma experiments, and the three-step
fair restriction sampler (R_p, then a walk down a common partial restriction
tree, then a trim).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from ._trials import map_trials
from .boolcore import Cell, Restriction, TruthTable, apply_restriction, sample_rp, sample_subset
from .circuits import (
    SYM, THR, AndGate, CircuitSpec, DecisionTree, Leaf, Node, child_table, circuit_table, fold_dt_layer,
    restrict_circuit,
)
from .errors import CapError, SpecError

MAX_DT_VARS = 16
MAX_RT_VARS = 12
MAX_FAMILY = 8
MAX_PIPELINE_VARS = 16


# ---------------------------------------------------------------- exact depth

def _full_cube(n):
    return 3 ** n - 1


def _digits(code, n):
    out = []
    for _ in range(n):
        code, d = divmod(code, 3)
        out.append(d)
    return out


def subcube_depths(f):
    """(values, depths) for every subcube of f's domain; see ``_accel``."""
    if f.n > MAX_DT_VARS:
        raise CapError(f"exact decision-tree depth is capped at n = {MAX_DT_VARS}")
    vals = _accel.subcube_values(f.bits, f.n)
    return vals, _accel.tree_depths(vals != _accel.MIXED, f.n)


def min_dt_depth(f):
    """Exact least depth of a decision tree computing f."""
    if f.n > MAX_DT_VARS:
        raise CapError(f"exact decision-tree depth is capped at n = {MAX_DT_VARS}")
    if f.is_constant():
        return 0
    return int(subcube_depths(f)[1][_full_cube(f.n)])


def _extract(depths, n, code, leaf_label):
    """Tree realizing ``depths[code]``, branching on the lowest optimal variable."""
    if depths[code] == 0:
        return Leaf(leaf_label(code))
    target = int(depths[code]) - 1
    for i, d in enumerate(_digits(code, n)):
        if d != 2:
            continue
        lo, hi = code - 2 * 3 ** i, code - 3 ** i
        if max(int(depths[lo]), int(depths[hi])) == target:
            return Node(i, _extract(depths, n, lo, leaf_label), _extract(depths, n, hi, leaf_label))
    raise AssertionError("inconsistent depth table")


def min_depth_tree(f, code=None):
    """A minimum-depth decision tree for f (or for f on the subcube ``code``)."""
    vals, depths = subcube_depths(f)
    code = _full_cube(f.n) if code is None else code
    return DecisionTree(_extract(depths, f.n, code, lambda c: int(vals[c])))


def _family_good(family, ell):
    n = family[0].n
    good = np.ones(3 ** n, dtype=np.bool_)
    per_member = []
    for g in family:
        vals, depths = subcube_depths(g)
        per_member.append((vals, depths))
        good &= depths <= ell
    return good, per_member


def _check_family(family, cap_family=True):
    if not family:
        raise SpecError("family must be nonempty")
    n = family[0].n
    if any(g.n != n for g in family):
        raise SpecError("family members must share an arity")
    if n > MAX_RT_VARS:
        raise CapError(f"common partial restriction trees are capped at n = {MAX_RT_VARS}")
    if cap_family and len(family) > MAX_FAMILY:
        raise CapError(f"families are capped at {MAX_FAMILY} members")
    return n


def common_partial_rt_depth(family, ell):
    """Least depth of a restriction tree after which every member has DT depth <= ell."""
    n = _check_family(family)
    good, _ = _family_good(family, ell)
    return int(_accel.tree_depths(good, n)[_full_cube(n)])


def common_partial_rt(family, ell, cap_family=True):
    """(tree, rt depth array, per-member (values, depths)) for a family."""
    n = _check_family(family, cap_family)
    good, per_member = _family_good(family, ell)
    rt = _accel.tree_depths(good, n)
    tree = DecisionTree(_extract(rt, n, _full_cube(n), lambda c: None))
    return tree, rt, per_member


# ---------------------------------------------------------------- experiments

def switching_bound(p, w, t):
    return (5 * p * w) ** t


def multi_switching_bound(s, p, w, t):
    return s * (24 * p * w) ** t


@dataclass
class SwitchExperimentConfig:
    family: list
    p: float
    t: int
    ell: int = None
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise SpecError("trials must be at least 1")
        if not self.family:
            raise SpecError("family must contain at least one DNF")
        if any(f.n > MAX_DT_VARS for f in self.family):
            raise CapError(f"switching experiments are capped at n = {MAX_DT_VARS}")

    @property
    def n(self):
        return self.family[0].n

    @property
    def width(self):
        return max(f.width for f in self.family)


@dataclass
class SwitchReport:
    mode: str
    empirical_failure: float
    failures: int
    trials: int
    bound: float
    raw_bound: float
    vacuous: bool
    histogram: dict
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def sigma(self):
        """Binomial standard deviation of the failure rate at the bound."""
        b = min(self.bound, 1.0)
        return math.sqrt(b * (1 - b) / self.trials)

    def within_bound(self, n_sigma=3.0):
        return self.empirical_failure <= self.bound + n_sigma * self.sigma

    def to_json(self):
        return {
            "schema": 1, "mode": self.mode, "empirical": self.empirical_failure,
            "failures": self.failures, "bound": self.bound, "raw_bound": self.raw_bound,
            "vacuous": self.vacuous, "trials": self.trials, "seed": self.seed,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "params": self.params,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["mode"], obj["empirical"], obj["failures"], obj["trials"], obj["bound"],
                   obj["raw_bound"], obj["vacuous"], {int(k): v for k, v in obj["histogram"].items()},
                   obj["seed"], obj.get("params", {}))


def _clamp(raw):
    return min(1.0, raw), raw >= 1.0


def _histogram(values):
    hist = {}
    for v in values:
        hist[v] = hist.get(v, 0) + 1
    return hist


def _single_trial(payload, rng):
    table, n, p = payload
    rho = sample_rp(n, p, rng)
    return min_dt_depth(apply_restriction(table, rho))


def single_switch_experiment(cfg, workers=None):
    """Rate at which a random restriction leaves one DNF deeper than t."""
    if len(cfg.family) != 1:
        raise SpecError("single-switch experiments take exactly one DNF")
    table = circuit_table(cfg.family[0])
    depths = map_trials(_single_trial, (table, cfg.n, cfg.p), cfg.seed, cfg.trials, workers)
    failures = sum(d > cfg.t for d in depths)
    raw = switching_bound(cfg.p, cfg.width, cfg.t)
    bound, vacuous = _clamp(raw)
    return SwitchReport("single", failures / cfg.trials, failures, cfg.trials, bound, raw, vacuous,
                        _histogram(depths), cfg.seed,
                        {"n": cfg.n, "p": cfg.p, "t": cfg.t, "w": cfg.width})


def _multi_trial(payload, rng):
    tables, n, p, ell = payload
    rho = sample_rp(n, p, rng)
    restricted = [apply_restriction(t, rho) for t in tables]
    return common_partial_rt_depth(restricted, ell)


def multi_switch_experiment(cfg, workers=None):
    """Rate at which a family has no common ell-partial RT of depth <= t after R_p."""
    s = len(cfg.family)
    ell = cfg.ell if cfg.ell is not None else max(1, math.ceil(math.log2(s)))
    if cfg.n > MAX_RT_VARS:
        raise CapError(f"multi-switch experiments are capped at n = {MAX_RT_VARS}")
    if s > MAX_FAMILY:
        raise CapError(f"families are capped at {MAX_FAMILY} members")
    tables = [circuit_table(f) for f in cfg.family]
    depths = map_trials(_multi_trial, (tables, cfg.n, cfg.p, ell), cfg.seed, cfg.trials, workers)
    failures = sum(d > cfg.t for d in depths)
    raw = multi_switching_bound(s, cfg.p, cfg.width, cfg.t)
    bound, vacuous = _clamp(raw)
    return SwitchReport("multi", failures / cfg.trials, failures, cfg.trials, bound, raw, vacuous,
                        _histogram(depths), cfg.seed,
                        {"n": cfg.n, "p": cfg.p, "t": cfg.t, "w": cfg.width, "s": s, "ell": ell})


def trim_bound(count, w, k, q):
    return count * math.comb(w, k) * q ** k


def trim_check(blocks, q, k, trials, seed=0, n=None):
    """Monte-Carlo rate of some block meeting a q-biased subset in more than k points."""
    blocks = [sorted(set(int(v) for v in b)) for b in blocks]
    n = n if n is not None else max((max(b) + 1 for b in blocks if b), default=0)
    w = max((len(b) for b in blocks), default=0)
    inc = np.zeros((len(blocks), n), dtype=np.int32)
    for i, b in enumerate(blocks):
        inc[i, b] = 1
    rng = np.random.default_rng(seed)
    failures = 0
    for lo in range(0, trials, 4096):
        batch = min(4096, trials - lo)
        L = (rng.random((batch, n)) < q).astype(np.int32)
        failures += int(((L @ inc.T) > k).any(axis=1).sum())
    raw = trim_bound(len(blocks), w, k, q) if k <= w else 0.0
    bound, vacuous = _clamp(raw)
    return SwitchReport("trim", failures / trials, failures, trials, bound, raw, vacuous, {}, seed,
                        {"n": n, "q": q, "k": k, "w": w, "blocks": len(blocks)})


# ---------------------------------------------------------------- fair sampler

def _walk(rt, n, rng):
    """Random root-to-leaf walk; returns the leaf cube and the queried (var, bit) pairs."""
    code = _full_cube(n)
    steps = []
    while rt[code] != 0:
        target = int(rt[code]) - 1
        for i, d in enumerate(_digits(code, n)):
            if d != 2:
                continue
            lo, hi = code - 2 * 3 ** i, code - 3 ** i
            if max(int(rt[lo]), int(rt[hi])) == target:
                bit = int(rng.integers(0, 2))
                steps.append((i, bit))
                code = hi if bit else lo
                break
    return code, steps


def fair_pipeline_sample(F, p, q, rng, k=1, ell=None, retry_budget=64, accept_L=None):
    """Draw one restriction from the three-step fair distribution for F.

    (a) rho' <- R_p; (b) a uniform walk down the deterministic common
    ell-partial restriction tree of F's bottom gates under rho'; (c) when some
    folded term still has more than k free inputs, keep a q-biased set L of
    the free inputs (rejection-sampled until no term meets L in more than k
    points, and ``accept_L`` agrees) and fix the rest uniformly.

    Every fixed value is a fresh uniform bit chosen independently of which
    coordinates get fixed, so completing the stars uniformly is uniform.
    Returns ``(rho, diagnostics)``; ``diagnostics["circuit"]`` is F restricted
    by rho written as a {SYM,THR} over AND circuit on rho's stars.
    """
    if F.top.kind not in (SYM, THR):
        raise SpecError("the fair sampler needs a SYM or THR top")
    if not all(isinstance(ch, AndGate) for ch in F.children):
        raise SpecError("the fair sampler needs AND children")
    if F.n > MAX_PIPELINE_VARS:
        raise CapError(f"the fair sampler is capped at n = {MAX_PIPELINE_VARS}")
    if retry_budget < 1:
        raise SpecError("retry_budget must be at least 1")
    n = F.n
    ell = ell if ell is not None else max(1, math.ceil(math.log2(max(F.fanin, 2))))

    rho1 = sample_rp(n, p, rng)
    stars1 = rho1.stars()
    n1 = len(stars1)
    if n1 > MAX_RT_VARS:
        raise CapError(f"{n1} stars after R_p exceeds the restriction-tree cap {MAX_RT_VARS}")
    C1 = restrict_circuit(F, rho1)

    # (b) walk the common partial RT of the surviving bottom gates
    family = [TruthTable(n1, child_table(ch, n1)) for ch in C1.children]
    if family:
        good, per_member = _family_good(family, ell)
        rt = _accel.tree_depths(good, n1)
        leaf, walk = _walk(rt, n1, rng)
        rt_depth = int(rt[_full_cube(n1)])
    else:
        per_member, leaf, walk, rt_depth = [], _full_cube(n1), [], 0
    trees = [DecisionTree(_extract(d, n1, leaf, lambda c, v=v: int(v[c]))) for v, d in per_member]
    folded = fold_dt_layer(CircuitSpec(n1, C1.top, tuple(trees)))

    cells = np.full(n1, Cell.STAR, dtype=np.int8)
    for var, bit in walk:
        cells[var] = bit
    free = np.flatnonzero(cells == Cell.STAR)

    # (c) trim
    terms = [{v for v, _ in ch.lits} for ch in folded.children]
    need_trim = any(len(t) > k for t in terms)
    attempts, good_L = 0, True
    if need_trim:
        good_L = False
        while attempts < retry_budget:
            attempts += 1
            keep = set(int(v) for v in free[sample_subset(len(free), q, rng)])
            if all(len(t & keep) <= k for t in terms) and (
                    accept_L is None or accept_L(stars1[sorted(keep)])):
                good_L = True
                break
        trim = np.array([v for v in free if v not in keep], dtype=np.int64)
        cells[trim] = rng.integers(0, 2, size=len(trim))
    else:
        trim = np.zeros(0, dtype=np.int64)

    sub = Restriction(cells)
    collapsed = restrict_circuit(folded, sub)
    final = rho1.array.copy()
    final[stars1] = cells
    rho = Restriction(final)
    diagnostics = {
        "collapsed_to_width_k": collapsed.width <= k,
        "circuit": collapsed,
        "steps": {
            "rho_prime": str(rho1),
            "stars_after_rp": n1,
            "ell": ell,
            "rt_depth": rt_depth,
            "walk": [(int(stars1[v]), b) for v, b in walk],
            "trim_needed": need_trim,
            "trim_attempts": attempts,
            "good_L": good_L,
            "trim_fixed": int(len(trim)),
            "stars_final": rho.star_count(),
        },
    }
    return rho, diagnostics
