"""Independent brute-force oracles shared by the tests."""
from functools import lru_cache

import numpy as np

from nwbench.boolcore import TruthTable, bits_to_index


def random_table(rng, n):
    return TruthTable(n, rng.integers(0, 2, size=1 << n))


def brute_restrict(f, rho):
    """Table of f restricted by rho by enumerating completions one by one."""
    stars = list(rho.stars())
    out = []
    for y in range(1 << len(stars)):
        x = rho.array.astype(np.uint8).copy()
        for j, v in enumerate(stars):
            x[v] = (y >> j) & 1
        out.append(int(f.bits[bits_to_index(x)]))
    return TruthTable(len(stars), out)


def _fix(bits, n, var, value):
    """Sub-table with variable ``var`` fixed, remaining variables renumbered in order."""
    return tuple(bits[x] for x in range(1 << n) if (x >> var) & 1 == value)


@lru_cache(maxsize=None)
def brute_dt_depth(bits, n):
    """Textbook recursion on tuples; no sharing with the ternary DP."""
    if len(set(bits)) <= 1:
        return 0
    return 1 + min(max(brute_dt_depth(_fix(bits, n, i, 0), n - 1),
                       brute_dt_depth(_fix(bits, n, i, 1), n - 1)) for i in range(n))


def brute_rt_depth(family, n, ell, limit=4):
    """Least depth <= limit of a common ell-partial restriction tree, else limit + 1."""
    @lru_cache(maxsize=None)
    def rec(fam, n, budget):
        if all(brute_dt_depth(f, n) <= ell for f in fam):
            return 0
        if budget == 0:
            return limit + 1
        best = limit + 1
        for i in range(n):
            lo = tuple(_fix(f, n, i, 0) for f in fam)
            hi = tuple(_fix(f, n, i, 1) for f in fam)
            best = min(best, 1 + max(rec(lo, n - 1, budget - 1), rec(hi, n - 1, budget - 1)))
        return min(best, limit + 1)
    return rec(tuple(tuple(int(b) for b in f.bits) for f in family), n, limit)


def naive_circuit_value(circuit, x):
    """Direct definitional evaluation written independently of the package."""
    from nwbench.circuits import AndGate, CircuitSpec, DecisionTree, Leaf, OrGate

    def child(ch):
        if isinstance(ch, AndGate):
            return int(all((x[v] == 1) == pos for v, pos in ch.lits))
        if isinstance(ch, OrGate):
            return int(any((x[v] == 1) == pos for v, pos in ch.lits))
        if isinstance(ch, DecisionTree):
            node = ch.root
            while not isinstance(node, Leaf):
                node = node.hi if x[node.var] else node.lo
            return node.value
        assert isinstance(ch, CircuitSpec)
        return naive_circuit_value(ch, x)

    vals = [child(ch) for ch in circuit.children]
    top = circuit.top
    if top.kind == "SYM":
        return top.predicate[sum(vals)]
    if top.kind == "THR":
        return int(sum(w * v for w, v in zip(top.weights, vals)) >= top.threshold)
    return int(top.table.bits[sum(v << i for i, v in enumerate(vals))])


def naive_bias(target_fn, n, out_fn, m):
    """Double loop over seeds and inputs."""
    seed_side = sum(target_fn(out_fn([(z >> i) & 1 for i in range(m)])[:n]) for z in range(1 << m))
    uniform = sum(target_fn([(x >> i) & 1 for i in range(n)]) for x in range(1 << n))
    return abs(seed_side / (1 << m) - uniform / (1 << n))
