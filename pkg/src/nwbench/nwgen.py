"""The Nisan-Wigderson generator over an explicit design and hard function.

Seeds are m-bit strings; seed integer ``z`` stands for the string whose bit
``i`` is ``(z >> i) & 1``, and enumeration runs over ``z = 0 .. 2^m - 1``.
Output bit ``i`` is the hard function applied to the seed bits indexed by
block ``T_i`` in increasing index order.
"""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _accel
from .boolcore import TruthTable, as_bits, bits_to_index
from .circuits import CircuitSpec, SparseF2Poly, circuit_table, poly_table
from .designs import Design
from .errors import CapError, DimensionError, SpecError
from .hardfn import GIPParams, RWParams, eval_gip, eval_rw, gip_table, rw_table

MAX_SEED_BITS = 24
MAX_TABLE_ARITY = 24
CHUNK = 1 << 20


class HardFunctionHandle:
    """A hard function f: {0,1}^r -> {0,1} with a definitional evaluator and a table."""

    def __init__(self, kind, arity, params=None, table=None):
        self.kind = kind
        self.arity = int(arity)
        self.params = params
        self._table = table
        if kind == "rw" and params.n != arity:
            raise DimensionError("RW arity mismatch")
        if kind == "gip" and params.n != arity:
            raise DimensionError("GIP arity mismatch")
        if kind == "table" and table.n != arity:
            raise DimensionError("table arity mismatch")

    @classmethod
    def rw(cls, params):
        return cls("rw", params.n, params=params)

    @classmethod
    def gip(cls, params):
        return cls("gip", params.n, params=params)

    @classmethod
    def parity(cls, r):
        return cls("parity", r)

    @classmethod
    def constant(cls, r, value=0):
        return cls("constant", r, params=int(value) & 1)

    @classmethod
    def from_table(cls, table):
        return cls("table", table.n, table=table)

    @classmethod
    def parse(cls, text):
        """``rw:m,k,r`` | ``gip:m,k`` (GIP_{m,k+1}) | ``parity:r`` | ``const:b,r`` | ``table:FILE``."""
        kind, _, arg = text.partition(":")
        try:
            if kind == "rw":
                return cls.rw(RWParams.parse(arg))
            if kind == "gip":
                m, k = (int(v) for v in arg.split(","))
                return cls.gip(GIPParams(m, k + 1))
            if kind == "parity":
                return cls.parity(int(arg))
            if kind == "const":
                b, r = (int(v) for v in arg.split(","))
                return cls.constant(r, b)
            if kind == "table":
                return cls.from_table(read_table(arg))
        except ValueError as exc:
            raise SpecError(f"bad hard-function spec {text!r}: {exc}") from None
        raise SpecError(f"unknown hard-function kind in {text!r}")

    def __repr__(self):
        return f"HardFunctionHandle({self.kind}, arity={self.arity})"

    def evaluate(self, x):
        bits = as_bits(x, self.arity)
        if self.kind == "rw":
            return eval_rw(self.params, bits)
        if self.kind == "gip":
            return eval_gip(self.params, bits)
        if self.kind == "parity":
            return int(bits.sum() & 1)
        if self.kind == "constant":
            return self.params
        return int(self._table.bits[bits_to_index(bits)])

    def table(self):
        if self._table is None:
            if self.arity > MAX_TABLE_ARITY:
                raise CapError(f"hard-function tables are capped at {MAX_TABLE_ARITY} inputs")
            if self.kind == "rw":
                self._table = rw_table(self.params)
            elif self.kind == "gip":
                self._table = gip_table(self.params)
            elif self.kind == "parity":
                self._table = TruthTable.parity(self.arity)
            else:
                self._table = TruthTable.constant(self.arity, self.params)
        return self._table


def read_table(path):
    with open(path) as fh:
        text = "".join(fh.read().split())
    n = max(len(text).bit_length() - 1, 0)
    return TruthTable(n, [int(ch) for ch in text])


def write_table(path, table):
    with open(path, "w") as fh:
        fh.write("".join(map(str, table.bits)) + "\n")


@dataclass(frozen=True)
class NWGenerator:
    design: Design
    hard: HardFunctionHandle
    output_len: int = None

    def __post_init__(self):
        if self.design.set_size_r != self.hard.arity:
            raise DimensionError(f"block size {self.design.set_size_r} != hard-function arity {self.hard.arity}")
        out = self.design.s if self.output_len is None else int(self.output_len)
        if not 0 <= out <= self.design.s:
            raise DimensionError(f"output length {out} exceeds the {self.design.s} design blocks")
        object.__setattr__(self, "output_len", out)

    @property
    def seed_len(self):
        return self.design.universe_m

    def blocks(self, count=None):
        count = self.output_len if count is None else count
        return self.design.block_array()[:count]


def parse_seed(text, m):
    """Hex seed (``0x`` optional) as an m-bit seed integer."""
    z = int(text, 16)
    if z >> m:
        raise DimensionError(f"seed {text} does not fit in {m} bits")
    return z


def generate(gen, seed):
    """Output bits for one seed (bit sequence, bit string, or seed integer)."""
    seed_bits = as_bits(seed, gen.seed_len)
    out = np.empty(gen.output_len, dtype=np.uint8)
    use_table = gen.hard.arity <= MAX_TABLE_ARITY
    table = gen.hard.table().bits if use_table else None
    for i, block in enumerate(gen.design.blocks[:gen.output_len]):
        sub = seed_bits[list(block)]
        out[i] = table[bits_to_index(sub)] if use_table else gen.hard.evaluate(sub)
    return out


def _check_enumerable(gen):
    if gen.seed_len > MAX_SEED_BITS:
        raise CapError(f"seed enumeration is capped at m = {MAX_SEED_BITS}, got {gen.seed_len}")


def iter_output_chunks(gen, chunk=CHUNK):
    """Yield ``(first_seed, bits)`` where ``bits[z - first_seed]`` is the output for seed z."""
    _check_enumerable(gen)
    table = gen.hard.table().bits
    blocks = gen.blocks()
    total = 1 << gen.seed_len
    for lo in range(0, total, chunk):
        yield lo, _accel.nw_bits(lo, min(total, lo + chunk), blocks, table)


def enumerate_outputs(gen):
    """Stream every output string, one per seed, in seed-integer order."""
    for _, bits in iter_output_chunks(gen):
        yield from bits


def output_multiset(gen):
    """Counts of each output string (as a bit string) over all seeds."""
    counts = {}
    for row in enumerate_outputs(gen):
        key = "".join(map(str, row))
        counts[key] = counts.get(key, 0) + 1
    return counts


def packed_outputs(gen, nbits, chunk=CHUNK):
    """For every seed, the first ``nbits`` output bits packed as an integer (bit i = output i)."""
    _check_enumerable(gen)
    if nbits > min(62, gen.output_len):
        raise DimensionError(f"cannot pack {nbits} of {gen.output_len} output bits")
    table = gen.hard.table().bits
    blocks = gen.blocks(nbits)
    total = 1 << gen.seed_len
    parts = [_accel.nw_packed(lo, min(total, lo + chunk), blocks, table) for lo in range(0, total, chunk)]
    return np.concatenate(parts)


def target_table(target):
    if isinstance(target, TruthTable):
        return target
    if isinstance(target, SparseF2Poly):
        return poly_table(target)
    if isinstance(target, CircuitSpec):
        return circuit_table(target)
    raise SpecError(f"unsupported target {type(target).__name__}")


def seed_count(target, gen):
    """Exact number of seeds whose (truncated) output the target accepts."""
    table = target_table(target)
    if table.n > gen.output_len:
        raise DimensionError(f"target reads {table.n} bits but the generator emits {gen.output_len}")
    packed = packed_outputs(gen, table.n)
    return int(table.bits[packed].sum(dtype=np.int64))


def approx_count(target, gen):
    """Fraction of seeds whose output satisfies the target: a deterministic density estimate."""
    return float(Fraction(seed_count(target, gen), 1 << gen.seed_len))
