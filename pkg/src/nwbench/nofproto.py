"""Number-on-forehead simulation of the deterministic SYM o AND_k protocol.

Player i sees every input block except its own. Each AND gate goes to the
lowest player whose block the gate avoids; every player then broadcasts how
many of its gates are satisfied, and the SYM predicate of the total is the
output.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .boolcore import TruthTable, as_bits
from .circuits import ANY, SYM, AndGate, CircuitSpec, TopGate, child_table, circuit_table
from .errors import CapError, DimensionError, SpecError, WidthError
from .hardfn import GIPParams, gip_table

MAX_SCAN_VARS = 20
MAX_TABLE_VARS = 20
HIDDEN = 255


@dataclass(frozen=True)
class NOFPartition:
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(v) for v in b)) for b in self.blocks)
        if len(blocks) < 1:
            raise SpecError("a partition needs at least one block")
        if any(not b for b in blocks):
            raise SpecError("partition blocks must be nonempty")
        flat = [v for b in blocks for v in b]
        if sorted(flat) != list(range(len(flat))):
            raise SpecError("partition blocks must be disjoint and cover 0..n-1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self):
        return sum(len(b) for b in self.blocks)

    @property
    def players(self):
        return len(self.blocks)

    def owner(self):
        out = np.empty(self.n, dtype=np.int64)
        for i, b in enumerate(self.blocks):
            out[list(b)] = i
        return out

    @classmethod
    def contiguous(cls, n, players):
        if not 1 <= players <= n:
            raise SpecError(f"cannot split {n} inputs into {players} nonempty blocks")
        return cls(tuple(tuple(int(v) for v in part) for part in np.array_split(np.arange(n), players)))

    @classmethod
    def gip_rows(cls, m, k_plus_1):
        """Row i of GIP_{m,k+1} goes to player i mod (k+1); each row gate avoids some block."""
        if m < k_plus_1:
            raise SpecError("the row partition needs at least k+1 rows")
        blocks = [[] for _ in range(k_plus_1)]
        for i in range(m):
            blocks[i % k_plus_1].extend(range(i * k_plus_1, (i + 1) * k_plus_1))
        return cls(tuple(tuple(b) for b in blocks))

    @classmethod
    def gip_columns(cls, m, k_plus_1):
        """Player j holds the j-th bit of every row, the hard partition for GIP."""
        return cls(tuple(tuple(i * k_plus_1 + j for i in range(m)) for j in range(k_plus_1)))

    def to_text(self):
        return "".join(" ".join(map(str, b)) + "\n" for b in self.blocks)

    @classmethod
    def from_text(cls, text):
        return cls(tuple(tuple(int(t) for t in ln.split()) for ln in text.splitlines() if ln.strip()))


def read_partition(path):
    with open(path) as fh:
        return NOFPartition.from_text(fh.read())


def write_partition(path, partition):
    with open(path, "w") as fh:
        fh.write(partition.to_text())


@dataclass
class Transcript:
    messages: list = field(default_factory=list)
    output: int = 0

    @property
    def total_bits(self):
        return sum(len(bits) for _, bits in self.messages)

    def to_json(self):
        return {"schema": 1, "messages": [[p, bits] for p, bits in self.messages],
                "total_bits": self.total_bits, "output": self.output}

    @classmethod
    def from_json(cls, obj):
        msgs = [(p if isinstance(p, int) else tuple(p), bits) for p, bits in obj["messages"]]
        return cls(msgs, int(obj["output"]))


def _check_sym_and(C, P):
    if C.top.kind != SYM:
        raise SpecError("the protocol handles SYM tops only")
    if not all(isinstance(ch, AndGate) for ch in C.children):
        raise SpecError("the protocol needs AND bottom gates")
    if P.n != C.n:
        raise DimensionError(f"partition covers {P.n} inputs, circuit has {C.n}")


def assign_gates(C, P):
    """Gate index -> lowest player whose own block is disjoint from the gate."""
    _check_sym_and(C, P)
    owner = P.owner()
    out = {}
    for g, gate in enumerate(C.children):
        touched = {int(owner[v]) for v, _ in gate.lits}
        player = next((i for i in range(P.players) if i not in touched), None)
        if player is None:
            raise WidthError(f"gate {g} touches all {P.players} blocks; no player sees it")
        out[g] = player
    return out


def message_width(s):
    """Bits per player: enough for any count 0..s."""
    return math.ceil(math.log2(s + 1))


def _view(bits, P, player):
    view = bits.copy()
    view[list(P.blocks[player])] = HIDDEN
    return view


def _gate_on_view(gate, view):
    acc = 1
    for v, pos in gate.lits:
        b = int(view[v])
        if b == HIDDEN:
            raise AssertionError("player read its own forehead")
        acc &= b if pos else 1 - b
    return acc


def run_hg_protocol(C, P, x, assignment=None):
    assignment = assign_gates(C, P) if assignment is None else assignment
    bits = as_bits(x, C.n)
    width = message_width(C.fanin)
    total, messages = 0, []
    for player in range(P.players):
        view = _view(bits, P, player)
        count = sum(_gate_on_view(C.children[g], view) for g, p in assignment.items() if p == player)
        msg = format(count, f"0{width}b") if width else ""
        messages.append((player, msg))
        total += int(msg, 2) if msg else 0
    return Transcript(messages, int(C.top.predicate[total]))


def hg_protocol_table(C, P):
    """Protocol output on every input, summing each player's counts separately."""
    assignment = assign_gates(C, P)
    if C.n > MAX_TABLE_VARS:
        raise CapError(f"exhaustive protocol runs are capped at n = {MAX_TABLE_VARS}")
    total = np.zeros(1 << C.n, dtype=np.int64)
    for player in range(P.players):
        mine = [C.children[g] for g, p in assignment.items() if p == player]
        for gate in mine:
            total += child_table(gate, C.n)
    return TruthTable(C.n, np.asarray(C.top.predicate, np.uint8)[total])


def run_any_protocol(C, P, x):
    """One protocol run per SYM o AND subcircuit of an ANY_u top, then the top table."""
    if C.top.kind != ANY:
        raise SpecError("expected an ANY top")
    messages, outs = [], []
    for u, sub in enumerate(C.children):
        t = run_hg_protocol(sub, P, x)
        messages += [((u, p), bits) for p, bits in t.messages]
        outs.append(t.output)
    return Transcript(messages, C.top.apply(outs))


def any_bits_bound(C, players):
    return sum(players * message_width(sub.fanin) for sub in C.children)


# ---------------------------------------------------------------- correlation

@dataclass
class GIPScanReport:
    m: int
    k_plus_1: int
    gamma_comm: float
    budget: float
    agreements: list
    correlations: list

    def to_json(self):
        return {"schema": 1, "m": self.m, "k_plus_1": self.k_plus_1, "gamma_comm": self.gamma_comm,
                "budget": self.budget, "agreements": self.agreements, "correlations": self.correlations}


def bns_budget(m, k_plus_1, gamma_comm):
    return (m / 4 ** k_plus_1 - math.log2(1 / gamma_comm)) / 10


def gip_correlation_scan(m, k_plus_1, against, gamma_comm=0.25):
    """Exact Pr[f = GIP_{m,k+1}] - 1/2 for each f (CircuitSpec or TruthTable)."""
    n = m * k_plus_1
    if n > MAX_SCAN_VARS:
        raise CapError(f"correlation scans are capped at m(k+1) = {MAX_SCAN_VARS}")
    gip = gip_table(GIPParams(m, k_plus_1))
    agreements = []
    for f in against:
        table = circuit_table(f) if isinstance(f, CircuitSpec) else f
        if table.n != n:
            raise DimensionError(f"function has {table.n} inputs, GIP has {n}")
        agreements.append(float(np.mean(table.bits == gip.bits)))
    return GIPScanReport(m, k_plus_1, gamma_comm, bns_budget(m, k_plus_1, gamma_comm),
                         agreements, [a - 0.5 for a in agreements])


def gip_circuit(m, k_plus_1):
    """GIP_{m,k+1} as a parity-predicate SYM over the m row ANDs."""
    rows = tuple(AndGate(tuple((i * k_plus_1 + j, True) for j in range(k_plus_1))) for i in range(m))
    return CircuitSpec(m * k_plus_1, TopGate.parity(m), rows)
