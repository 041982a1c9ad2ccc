"""Desk-scale approximator circuits: sparse F2 polynomials, {SYM,THR,ANY}-topped
circuits over AND / OR / decision-tree children, and decision trees.

Literals are ``(var, positive)`` pairs. In JSON they are DIMACS-style signed
integers: ``v+1`` for x_v and ``-(v+1)`` for its negation.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .boolcore import Cell, Restriction, TruthTable, as_bits
from .errors import CapError, DimensionError, SpecError

MAX_TABLE_VARS = 24
MAX_SAMPLE_GATES = 1 << 16
MAX_ANY_FANIN = 20
MAX_WEIGHT = 1 << 31

SYM, THR, ANY = "SYM", "THR", "ANY"


def _norm_lits(lits):
    out = sorted({(int(v), bool(pos)) for v, pos in lits})
    return tuple(out)


def lit_to_int(lit):
    v, pos = lit
    return v + 1 if pos else -(v + 1)


def lit_from_int(code):
    code = int(code)
    if code == 0:
        raise SpecError("literal code 0 is invalid")
    return (abs(code) - 1, code > 0)


def _term_masks(lits, n):
    """(care, val) with x satisfying the conjunction iff x & care == val."""
    care = val = 0
    for v, pos in lits:
        bit = 1 << v
        if care & bit and bool(val & bit) != pos:
            return care, val | (1 << n)  # x and not-x: never satisfied
        care |= bit
        if pos:
            val |= bit
    return care, val


# ---------------------------------------------------------------- gates

@dataclass(frozen=True)
class AndGate:
    lits: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lits", _norm_lits(self.lits))

    @property
    def width(self):
        return len(self.lits)

    def size(self):
        return 1 + len(self.lits)

    def evaluate(self, x):
        return int(all(x[v] == pos for v, pos in self.lits))

    def variables(self):
        return {v for v, _ in self.lits}


@dataclass(frozen=True)
class OrGate:
    lits: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lits", _norm_lits(self.lits))

    @property
    def width(self):
        return len(self.lits)

    def size(self):
        return 1 + len(self.lits)

    def evaluate(self, x):
        return int(any(x[v] == pos for v, pos in self.lits))

    def variables(self):
        return {v for v, _ in self.lits}


TRUE_GATE = AndGate(())
FALSE_GATE = OrGate(())


# ---------------------------------------------------------------- decision trees

@dataclass(frozen=True)
class Leaf:
    value: object = None  # 0, 1, or None for restriction-tree leaves


@dataclass(frozen=True)
class Node:
    var: int
    lo: object
    hi: object


@dataclass(frozen=True)
class DecisionTree:
    root: object

    @classmethod
    def leaf(cls, value):
        return cls(Leaf(value))

    @property
    def depth(self):
        def rec(node):
            if isinstance(node, Leaf):
                return 0
            return 1 + max(rec(node.lo), rec(node.hi))
        return rec(self.root)

    width = depth

    def size(self):
        def rec(node):
            if isinstance(node, Leaf):
                return 1
            return 1 + rec(node.lo) + rec(node.hi)
        return rec(self.root)

    def validate(self, n=None):
        def rec(node, seen):
            if isinstance(node, Leaf):
                if node.value not in (0, 1, None):
                    raise SpecError(f"leaf label must be 0, 1 or unlabeled, got {node.value!r}")
                return
            if node.var in seen:
                raise SpecError(f"variable {node.var} repeats on a root-to-leaf path")
            if node.var < 0 or (n is not None and node.var >= n):
                raise SpecError(f"tree variable {node.var} out of range")
            rec(node.lo, seen | {node.var})
            rec(node.hi, seen | {node.var})
        rec(self.root, frozenset())

    def evaluate(self, x):
        node = self.root
        while isinstance(node, Node):
            node = node.hi if x[node.var] else node.lo
        if node.value is None:
            raise SpecError("cannot evaluate an unlabeled restriction tree")
        return int(node.value)

    def paths(self):
        """All (literals, leaf value) pairs, left (0-branch) first."""
        out = []

        def rec(node, lits):
            if isinstance(node, Leaf):
                out.append((tuple(lits), node.value))
                return
            rec(node.lo, lits + [(node.var, False)])
            rec(node.hi, lits + [(node.var, True)])
        rec(self.root, [])
        return out

    def one_paths(self):
        return [lits for lits, value in self.paths() if value == 1]

    def variables(self):
        return {v for lits, _ in self.paths() for v, _ in lits}

    def restrict(self, fixed, rename):
        """Follow fixed variables, rename the rest; ``fixed`` maps var -> bit."""
        def rec(node):
            if isinstance(node, Leaf):
                return node
            if node.var in fixed:
                return rec(node.hi if fixed[node.var] else node.lo)
            return Node(rename[node.var], rec(node.lo), rec(node.hi))
        return DecisionTree(rec(self.root))

    def to_json(self):
        def rec(node):
            if isinstance(node, Leaf):
                return {"leaf": node.value}
            return {"var": node.var, "lo": rec(node.lo), "hi": rec(node.hi)}
        return rec(self.root)

    @classmethod
    def from_json(cls, obj):
        def rec(o):
            if "leaf" in o:
                return Leaf(o["leaf"])
            return Node(int(o["var"]), rec(o["lo"]), rec(o["hi"]))
        try:
            return cls(rec(obj))
        except (KeyError, TypeError) as exc:
            raise SpecError(f"malformed decision tree: {exc}") from None


def tree_table(tree, n):
    """Truth table of a labeled tree; 1-paths are disjoint so their indicators add."""
    terms = [_term_masks(lits, n) for lits in tree.one_paths()]
    if not terms:
        return np.zeros(1 << n, np.uint8)
    care, val = zip(*terms)
    return _accel.weighted_term_sum(care, val, np.ones(len(care)), n).astype(np.uint8)


# ---------------------------------------------------------------- polynomials

@dataclass(frozen=True, order=True)
class Monomial:
    vars: tuple = ()

    def __post_init__(self):
        vs = tuple(sorted(int(v) for v in self.vars))
        if len(set(vs)) != len(vs):
            raise SpecError(f"monomial repeats a variable: {vs}")
        object.__setattr__(self, "vars", vs)


@dataclass(frozen=True)
class SparseF2Poly:
    n: int
    monomials: tuple = ()
    constant: int = 0

    def __post_init__(self):
        # x + x = 0 over F2, and the empty monomial is the constant 1
        parity = {}
        const = int(self.constant) & 1
        for mono in self.monomials:
            mono = mono if isinstance(mono, Monomial) else Monomial(tuple(mono))
            if any(v < 0 or v >= self.n for v in mono.vars):
                raise DimensionError(f"monomial {mono.vars} out of range for n={self.n}")
            if not mono.vars:
                const ^= 1
                continue
            parity[mono] = parity.get(mono, 0) ^ 1
        object.__setattr__(self, "monomials", tuple(sorted(m for m, b in parity.items() if b)))
        object.__setattr__(self, "constant", const)

    @property
    def sparsity(self):
        return len(self.monomials)

    @property
    def degree(self):
        return max((len(m.vars) for m in self.monomials), default=0)


def eval_poly(poly, x):
    bits = as_bits(x, poly.n)
    acc = poly.constant
    for mono in poly.monomials:
        acc ^= int(all(bits[v] for v in mono.vars))
    return acc


def poly_table(poly):
    if poly.n > MAX_TABLE_VARS:
        raise CapError(f"exhaustive tables are capped at {MAX_TABLE_VARS} variables")
    if not poly.monomials:
        return TruthTable.constant(poly.n, poly.constant)
    care = [sum(1 << v for v in m.vars) for m in poly.monomials]
    counts = _accel.weighted_term_sum(care, care, np.ones(len(care)), poly.n)
    return TruthTable(poly.n, (counts & 1) ^ poly.constant)


def poly_as_circuit(poly):
    """The same function as a SYM(parity) gate over AND children."""
    children = [AndGate(tuple((v, True) for v in m.vars)) for m in poly.monomials]
    if poly.constant:
        children.append(TRUE_GATE)
    return CircuitSpec(poly.n, TopGate.parity(len(children)), tuple(children))


def read_poly(path):
    n = None
    constant = 0
    monos = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, value = tok.partition("=")
                    if key == "n":
                        n = int(value)
                    elif key == "constant":
                        constant = int(value)
                continue
            if line:
                monos.append(Monomial(tuple(int(t) for t in line.split())))
    if n is None:
        raise SpecError(f"{path}: missing '# n=... constant=...' header")
    return SparseF2Poly(n, tuple(monos), constant)


def write_poly(path, poly):
    with open(path, "w") as fh:
        fh.write(f"# n={poly.n} constant={poly.constant}\n")
        for mono in poly.monomials:
            fh.write(" ".join(map(str, mono.vars)) + "\n")


# ---------------------------------------------------------------- circuits

@dataclass(frozen=True)
class TopGate:
    kind: str
    predicate: tuple = None
    weights: tuple = None
    threshold: int = None
    table: TruthTable = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in (SYM, THR, ANY):
            raise SpecError(f"unknown top gate kind {self.kind!r}")
        payloads = {SYM: self.predicate is not None,
                    THR: self.weights is not None or self.threshold is not None,
                    ANY: self.table is not None}
        if not payloads[self.kind] or sum(payloads.values()) != 1:
            raise SpecError(f"{self.kind} gate needs exactly its own payload")
        if self.kind == SYM:
            pred = tuple(int(b) for b in self.predicate)
            if any(b not in (0, 1) for b in pred):
                raise SpecError("SYM predicate must be a bit vector")
            object.__setattr__(self, "predicate", pred)
        elif self.kind == THR:
            if self.weights is None or self.threshold is None:
                raise SpecError("THR gate needs weights and a threshold")
            w = tuple(int(v) for v in self.weights)
            if any(abs(v) > MAX_WEIGHT for v in w) or abs(int(self.threshold)) > MAX_WEIGHT * max(1, len(w)):
                raise SpecError("THR weights must be bounded by 2^31")
            object.__setattr__(self, "weights", w)
            object.__setattr__(self, "threshold", int(self.threshold))
        else:
            if self.table.n > MAX_ANY_FANIN:
                raise CapError(f"ANY fan-in capped at {MAX_ANY_FANIN}")

    def __eq__(self, other):
        if not isinstance(other, TopGate):
            return NotImplemented
        return (self.kind, self.predicate, self.weights, self.threshold, self.table) == \
            (other.kind, other.predicate, other.weights, other.threshold, other.table)

    def __hash__(self):
        return hash((self.kind, self.predicate, self.weights, self.threshold))

    @classmethod
    def sym(cls, predicate):
        return cls(SYM, predicate=tuple(predicate))

    @classmethod
    def parity(cls, fanin):
        return cls.sym(c & 1 for c in range(fanin + 1))

    @classmethod
    def or_(cls, fanin):
        return cls.sym(int(c > 0) for c in range(fanin + 1))

    @classmethod
    def thr(cls, weights, threshold):
        return cls(THR, weights=tuple(weights), threshold=threshold)

    @classmethod
    def any_(cls, table):
        return cls(ANY, table=table)

    @property
    def fanin(self):
        if self.kind == SYM:
            return len(self.predicate) - 1
        if self.kind == THR:
            return len(self.weights)
        return self.table.n

    def apply(self, child_bits):
        child_bits = [int(b) for b in child_bits]
        if self.kind == SYM:
            return self.predicate[sum(child_bits)]
        if self.kind == THR:
            return int(sum(w * b for w, b in zip(self.weights, child_bits)) >= self.threshold)
        idx = sum(b << i for i, b in enumerate(child_bits))
        return int(self.table.bits[idx])

    def to_json(self):
        if self.kind == SYM:
            return {"kind": SYM, "predicate": list(self.predicate)}
        if self.kind == THR:
            return {"kind": THR, "weights": list(self.weights), "threshold": self.threshold}
        return {"kind": ANY, "table": "".join(map(str, self.table.bits))}

    @classmethod
    def from_json(cls, obj):
        kind = obj.get("kind")
        if kind == SYM:
            return cls.sym(obj["predicate"])
        if kind == THR:
            return cls.thr(obj["weights"], obj["threshold"])
        if kind == ANY:
            bits = [int(ch) for ch in obj["table"]]
            u = max(len(bits).bit_length() - 1, 0)
            return cls.any_(TruthTable(u, bits))
        raise SpecError(f"unknown top gate kind {kind!r}")


@dataclass(frozen=True)
class CircuitSpec:
    n: int
    top: TopGate
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        self.validate()

    def validate(self):
        if self.n < 0:
            raise SpecError("negative input count")
        if self.top.fanin != len(self.children):
            raise SpecError(f"{self.top.kind} gate fan-in {self.top.fanin} != {len(self.children)} children")
        for ch in self.children:
            if isinstance(ch, (AndGate, OrGate)):
                if any(v < 0 or v >= self.n for v, _ in ch.lits):
                    raise SpecError(f"literal index out of range for n={self.n}")
            elif isinstance(ch, DecisionTree):
                ch.validate(self.n)
                if any(isinstance(leaf, Leaf) and leaf.value is None for leaf in _leaves(ch.root)):
                    raise SpecError("circuit decision trees need labeled leaves")
            elif isinstance(ch, CircuitSpec):
                if self.top.kind != ANY:
                    raise SpecError("nested circuits are only allowed under an ANY top")
                if ch.top.kind == ANY:
                    raise SpecError("nested circuits must have a SYM or THR top")
                if ch.n != self.n:
                    raise SpecError("nested circuit arity mismatch")
            else:
                raise SpecError(f"unsupported child {type(ch).__name__}")

    @property
    def width(self):
        return max((ch.width for ch in self.children), default=0)

    @property
    def depth(self):
        return 1 + max((ch.depth if isinstance(ch, CircuitSpec) else 1 for ch in self.children), default=0)

    @property
    def size(self):
        """Gate count with literals included."""
        return 1 + sum(ch.size() if not isinstance(ch, CircuitSpec) else ch.size for ch in self.children)

    @property
    def fanin(self):
        return len(self.children)

    def to_json(self):
        return {"n": self.n, "top": self.top.to_json(), "children": [_child_to_json(ch) for ch in self.children]}

    @classmethod
    def from_json(cls, obj):
        try:
            n = int(obj["n"])
            top = TopGate.from_json(obj["top"])
            children = tuple(_child_from_json(ch, n) for ch in obj["children"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"malformed circuit: {exc}") from None
        return cls(n, top, children)


def _leaves(node):
    if isinstance(node, Leaf):
        yield node
    else:
        yield from _leaves(node.lo)
        yield from _leaves(node.hi)


def _child_to_json(ch):
    if isinstance(ch, AndGate):
        return {"type": "and", "lits": [lit_to_int(l) for l in ch.lits]}
    if isinstance(ch, OrGate):
        return {"type": "or", "lits": [lit_to_int(l) for l in ch.lits]}
    if isinstance(ch, DecisionTree):
        return {"type": "dt", "tree": ch.to_json()}
    return {"type": "circuit", **ch.to_json()}


def _child_from_json(obj, n):
    kind = obj.get("type")
    if kind == "and":
        return AndGate(tuple(lit_from_int(c) for c in obj["lits"]))
    if kind == "or":
        return OrGate(tuple(lit_from_int(c) for c in obj["lits"]))
    if kind == "dt":
        return DecisionTree.from_json(obj["tree"])
    if kind == "circuit":
        return CircuitSpec.from_json(obj)
    raise SpecError(f"unknown child type {kind!r}")


def read_circuit(path):
    with open(path) as fh:
        return CircuitSpec.from_json(json.load(fh))


def write_circuit(path, circuit):
    with open(path, "w") as fh:
        json.dump(circuit.to_json(), fh, indent=1)


def dnf(n, terms):
    """OR of AND terms, expressed as a SYM gate accepting every nonzero count."""
    children = tuple(AndGate(t) for t in terms)
    return CircuitSpec(n, TopGate.or_(len(children)), children)


# ---------------------------------------------------------------- evaluation

def eval_child(ch, x):
    if isinstance(ch, CircuitSpec):
        return eval_circuit(ch, x)
    return ch.evaluate(x)


def eval_circuit(circuit, x):
    """Bottom-up definitional evaluation on one input."""
    bits = as_bits(x, circuit.n)
    return circuit.top.apply(eval_child(ch, bits) for ch in circuit.children)


def _child_terms(ch, weight, n):
    """Weighted AND terms plus a constant summing to ``weight * ch(x)``."""
    if isinstance(ch, AndGate):
        return [(*_term_masks(ch.lits, n), weight)], 0
    if isinstance(ch, OrGate):
        # OR(lits) = 1 - AND(negated lits)
        neg = [(v, not pos) for v, pos in ch.lits]
        return [(*_term_masks(neg, n), -weight)], weight
    if isinstance(ch, DecisionTree):
        return [(*_term_masks(lits, n), weight) for lits in ch.one_paths()], 0
    raise SpecError("nested circuit where a bottom gate was expected")


def child_table(ch, n):
    if isinstance(ch, CircuitSpec):
        return circuit_table(ch).bits
    terms, const = _child_terms(ch, 1, n)
    return _weighted_sum(terms, n) + const


def _weighted_sum(terms, n):
    if not terms:
        return np.zeros(1 << n, np.int64)
    care, val, w = zip(*terms)
    return _accel.weighted_term_sum(care, val, w, n)


def circuit_table(circuit):
    """Exhaustive truth table, vectorized over all 2^n inputs."""
    n = circuit.n
    if n > MAX_TABLE_VARS:
        raise CapError(f"exhaustive tables are capped at {MAX_TABLE_VARS} variables")
    top = circuit.top
    if top.kind == ANY:
        idx = np.zeros(1 << n, np.int64)
        for i, ch in enumerate(circuit.children):
            idx |= child_table(ch, n).astype(np.int64) << i
        return TruthTable(n, top.table.bits[idx])
    weights = [1] * circuit.fanin if top.kind == SYM else top.weights
    terms, const = [], 0
    for ch, w in zip(circuit.children, weights):
        t, c = _child_terms(ch, w, n)
        terms += t
        const += c
    total = _weighted_sum(terms, n) + const
    if top.kind == SYM:
        return TruthTable(n, np.asarray(top.predicate, np.uint8)[total])
    return TruthTable(n, (total >= top.threshold).astype(np.uint8))


# ---------------------------------------------------------------- restriction

def _restrict_lits(lits, fixed, rename, conj):
    """Restrict a literal list; returns a constant 0/1 or the renamed remainder."""
    out = []
    for v, pos in lits:
        if v in fixed:
            if (fixed[v] == 1) == pos:
                if not conj:
                    return 1
            elif conj:
                return 0
        else:
            out.append((rename[v], pos))
    if not out:
        return 1 if conj else 0
    return tuple(out)


def _restrict_child(ch, rho, fixed, rename):
    """Restricted child, or an int 0/1 when it is forced constant."""
    if isinstance(ch, AndGate):
        r = _restrict_lits(ch.lits, fixed, rename, conj=True)
        return r if isinstance(r, int) else AndGate(r)
    if isinstance(ch, OrGate):
        r = _restrict_lits(ch.lits, fixed, rename, conj=False)
        return r if isinstance(r, int) else OrGate(r)
    if isinstance(ch, DecisionTree):
        t = ch.restrict(fixed, rename)
        return int(t.root.value) if isinstance(t.root, Leaf) else t
    return restrict_circuit(ch, rho)


def restrict_circuit(circuit, rho):
    """Structural restriction; the result lives on rho's stars, renumbered in order."""
    if rho.n != circuit.n:
        raise DimensionError(f"restriction length {rho.n} != circuit arity {circuit.n}")
    cells = rho.array
    fixed = {int(i): int(cells[i]) for i in np.flatnonzero(cells != Cell.STAR)}
    rename = {int(v): j for j, v in enumerate(rho.stars())}
    n2 = len(rename)
    restricted = [_restrict_child(ch, rho, fixed, rename) for ch in circuit.children]
    top = circuit.top

    if top.kind == ANY:
        kids = []
        for r in restricted:
            if isinstance(r, int):
                r = TRUE_GATE if r else FALSE_GATE
            kids.append(r)
        return CircuitSpec(n2, top, tuple(kids))

    weights = [1] * circuit.fanin if top.kind == SYM else list(top.weights)
    kids, kept_w, forced_true, forced_weight = [], [], 0, 0
    for r, w in zip(restricted, weights):
        if isinstance(r, int):
            if r:
                forced_true += 1
                forced_weight += w
            continue
        kids.append(r)
        kept_w.append(w)
    if top.kind == SYM:
        pred = top.predicate[forced_true:forced_true + len(kids) + 1]
        return CircuitSpec(n2, TopGate.sym(pred), tuple(kids))
    return CircuitSpec(n2, TopGate.thr(kept_w, top.threshold - forced_weight), tuple(kids))


# ---------------------------------------------------------------- folding

def fold_dt_layer(circuit):
    """Replace each decision-tree child by the AND terms of its 1-paths.

    At most one 1-path of a tree fires on any input, so the count of true
    terms equals the count of true trees (SYM keeps its predicate, THR copies
    each tree's weight onto its terms).
    """
    top = circuit.top
    if top.kind not in (SYM, THR):
        raise SpecError("fold_dt_layer needs a SYM or THR top")
    if not all(isinstance(ch, DecisionTree) for ch in circuit.children):
        raise SpecError("fold_dt_layer needs decision-tree children only")
    weights = [1] * circuit.fanin if top.kind == SYM else top.weights
    terms, term_w = [], []
    for tree, w in zip(circuit.children, weights):
        for lits in tree.one_paths():
            terms.append(AndGate(lits))
            term_w.append(w)
    if top.kind == SYM:
        pred = list(top.predicate[:len(terms) + 1])
        pred += [0] * (len(terms) + 1 - len(pred))  # counts above the tree count never occur
        new_top = TopGate.sym(pred)
    else:
        new_top = TopGate.thr(term_w, top.threshold)
    return CircuitSpec(circuit.n, new_top, tuple(terms))


# ---------------------------------------------------------------- sampling

@dataclass(frozen=True)
class ClassDescriptor:
    """Shape of a random circuit: top gate, bottom-gate count s, width k, depth d.

    ``child`` picks the bottom layer ("and", "or" or "dt"). An ANY top has d=3
    and combines ``u`` subcircuits with top ``inner``.
    """
    top: str = SYM
    s: int = 4
    k: int = 2
    d: int = 2
    child: str = "and"
    u: int = 2
    inner: str = SYM
    weight_bound: int = 8


def _random_lits(n, k, rng):
    vs = rng.choice(n, size=min(k, n), replace=False)
    pols = rng.integers(0, 2, size=len(vs))
    return tuple((int(v), bool(p)) for v, p in zip(vs, pols))


def _random_tree(n, depth, rng):
    def rec(avail, d):
        if d == 0 or not avail:
            return Leaf(int(rng.integers(0, 2)))
        v = int(rng.choice(sorted(avail)))
        return Node(v, rec(avail - {v}, d - 1), rec(avail - {v}, d - 1))
    return DecisionTree(rec(frozenset(range(n)), depth))


def _random_top(kind, s, rng, weight_bound):
    if kind == SYM:
        return TopGate.sym(rng.integers(0, 2, size=s + 1))
    if kind == THR:
        w = rng.integers(-weight_bound, weight_bound + 1, size=s)
        total = int(np.abs(w).sum())
        return TopGate.thr(w, int(rng.integers(-total, total + 2)))
    raise SpecError(f"cannot sample a {kind} gate here")


def sample_circuit(desc, n, rng):
    if n > MAX_TABLE_VARS or desc.s > MAX_SAMPLE_GATES or desc.u > MAX_ANY_FANIN:
        raise CapError("descriptor exceeds desk caps (n <= 24, s <= 2^16, u <= 20)")
    if desc.s < 0 or desc.k < 0:
        raise SpecError("s and k must be non-negative")
    if desc.top == ANY:
        if desc.d != 3:
            raise SpecError("an ANY top sits over SYM/THR subcircuits, so d must be 3")
        inner = ClassDescriptor(top=desc.inner, s=desc.s, k=desc.k, d=2, child=desc.child,
                                weight_bound=desc.weight_bound)
        subs = tuple(sample_circuit(inner, n, rng) for _ in range(desc.u))
        table = TruthTable(desc.u, rng.integers(0, 2, size=1 << desc.u))
        return CircuitSpec(n, TopGate.any_(table), subs)
    if desc.d != 2:
        raise SpecError("SYM/THR tops are sampled over a single bottom layer (d = 2)")
    if desc.child == "and":
        kids = tuple(AndGate(_random_lits(n, desc.k, rng)) for _ in range(desc.s))
    elif desc.child == "or":
        kids = tuple(OrGate(_random_lits(n, desc.k, rng)) for _ in range(desc.s))
    elif desc.child == "dt":
        kids = tuple(_random_tree(n, desc.k, rng) for _ in range(desc.s))
    else:
        raise SpecError(f"unknown child kind {desc.child!r}")
    return CircuitSpec(n, _random_top(desc.top, desc.s, rng, desc.weight_bound), kids)


def sample_poly(n, sparsity, max_degree, rng):
    """Random polynomial with ``sparsity`` distinct monomials of degree 1..max_degree."""
    monos = set()
    while len(monos) < sparsity:
        d = int(rng.integers(1, max_degree + 1))
        monos.add(Monomial(tuple(int(v) for v in rng.choice(n, size=min(d, n), replace=False))))
        if len(monos) >= sum(math.comb(n, j) for j in range(1, max_degree + 1)):
            break
    return SparseF2Poly(n, tuple(monos), int(rng.integers(0, 2)))
