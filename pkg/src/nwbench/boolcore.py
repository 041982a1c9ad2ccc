"""Truth tables, restrictions and restriction distributions.

Bit convention used everywhere: an assignment ``x`` of n bits maps to the
table index ``sum(x[i] << i)``, so variable ``i`` is bit ``i`` of the index.
Bit strings are written with character ``i`` holding variable ``i``.
"""
from enum import IntEnum

import numpy as np

from .errors import CapError, DimensionError, ParamError

MAX_VARS = 28


class Cell(IntEnum):
    ZERO = 0
    ONE = 1
    STAR = 2


_CHARS = "01*"


def as_bits(x, n=None):
    """Coerce an assignment (int index, bit string or bit sequence) to a uint8 array."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        if n is None:
            raise DimensionError("integer assignment needs an explicit arity")
        if x < 0 or x >= (1 << n):
            raise DimensionError(f"index {x} out of range for n={n}")
        return ((int(x) >> np.arange(n)) & 1).astype(np.uint8)
    if isinstance(x, str):
        if any(ch not in "01" for ch in x):
            raise DimensionError(f"not a bit string: {x!r}")
        bits = np.frombuffer(x.encode(), dtype=np.uint8) - ord("0")
    else:
        bits = np.asarray(x, dtype=np.uint8).reshape(-1)
        if bits.size and bits.max() > 1:
            raise DimensionError("assignment entries must be 0/1")
    if n is not None and bits.shape[0] != n:
        raise DimensionError(f"assignment has {bits.shape[0]} bits, expected {n}")
    return bits


def bits_to_index(bits):
    bits = np.asarray(bits, dtype=np.int64)
    return int((bits << np.arange(bits.shape[0], dtype=np.int64)).sum())


def all_inputs(n):
    """Index vector 0..2^n-1, the enumeration order of every table."""
    return np.arange(1 << n, dtype=np.int64)


class TruthTable:
    """A Boolean function on n <= 28 variables stored as 2^n output bits."""

    __slots__ = ("n", "bits")

    def __init__(self, n, bits):
        if n < 0 or n > MAX_VARS:
            raise CapError(f"truth tables are capped at {MAX_VARS} variables, got {n}")
        bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
        if bits.shape[0] != 1 << n:
            raise DimensionError(f"table has {bits.shape[0]} entries, expected {1 << n}")
        if bits.size and bits.max() > 1:
            raise ValueError("truth table entries must be 0/1")
        bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, name, value):
        raise AttributeError("TruthTable is immutable")

    def __reduce__(self):
        return TruthTable, (self.n, self.bits)

    @classmethod
    def constant(cls, n, value):
        return cls(n, np.full(1 << n, int(value) & 1, dtype=np.uint8))

    @classmethod
    def parity(cls, n):
        x = all_inputs(n)
        acc = np.zeros_like(x)
        for i in range(n):
            acc ^= (x >> i) & 1
        return cls(n, acc)

    @classmethod
    def literal(cls, n, var, positive=True):
        col = (all_inputs(n) >> var) & 1
        return cls(n, col if positive else 1 - col)

    @classmethod
    def from_function(cls, n, fn):
        """Tabulate ``fn(bits)`` over all inputs; slow, meant for oracles."""
        return cls(n, [int(fn(as_bits(x, n))) & 1 for x in range(1 << n)])

    def __call__(self, x):
        return eval_table(self, x)

    def __eq__(self, other):
        return isinstance(other, TruthTable) and self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def __invert__(self):
        return TruthTable(self.n, 1 - self.bits)

    def __repr__(self):
        if self.n <= 4:
            return f"TruthTable(n={self.n}, bits={''.join(map(str, self.bits))})"
        return f"TruthTable(n={self.n}, density={self.density():.4f})"

    def density(self):
        return float(self.bits.mean())

    def count_ones(self):
        return int(self.bits.sum())

    def is_constant(self):
        return bool(self.bits.min() == self.bits.max())

    def packed(self):
        """Little-endian packed bytes of the table."""
        return np.packbits(self.bits, bitorder="little")


def eval_table(f, x):
    bits = as_bits(x, f.n)
    return int(f.bits[bits_to_index(bits)])


class Restriction:
    """A partial assignment in {0,1,*}^n with explicit three-valued cells."""

    __slots__ = ("_cells",)

    def __init__(self, cells):
        if isinstance(cells, str):
            try:
                arr = np.array([_CHARS.index(ch) for ch in cells.strip()], dtype=np.int8)
            except ValueError:
                raise ValueError(f"restriction text must use 0, 1, *: {cells!r}") from None
        else:
            if isinstance(cells, np.ndarray):
                arr = cells.astype(np.int8).reshape(-1)
            else:
                arr = np.array([int(c) for c in cells], dtype=np.int8)
            if arr.size and (arr.min() < 0 or arr.max() > 2):
                raise ValueError("cells must be Zero, One or Star")
        arr.flags.writeable = False
        object.__setattr__(self, "_cells", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Restriction is immutable")

    def __reduce__(self):
        return Restriction, (self._cells,)

    @classmethod
    def all_star(cls, n):
        return cls(np.full(n, Cell.STAR, dtype=np.int8))

    @classmethod
    def from_assignment(cls, bits):
        return cls(as_bits(bits))

    @classmethod
    def from_parts(cls, n, fixed):
        """Build from a mapping ``{var: bit}``; unmapped variables stay free."""
        arr = np.full(n, Cell.STAR, dtype=np.int8)
        for var, bit in fixed.items():
            arr[var] = int(bit)
        return cls(arr)

    @property
    def n(self):
        return self._cells.shape[0]

    @property
    def cells(self):
        return tuple(Cell(c) for c in self._cells)

    @property
    def array(self):
        return self._cells

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return Cell(self._cells[i])

    def __eq__(self, other):
        return isinstance(other, Restriction) and np.array_equal(self._cells, other._cells)

    def __hash__(self):
        return hash(self._cells.tobytes())

    def __str__(self):
        return "".join(_CHARS[c] for c in self._cells)

    def __repr__(self):
        return f"Restriction('{self}')"

    def stars(self):
        return np.flatnonzero(self._cells == Cell.STAR)

    def fixed(self):
        return np.flatnonzero(self._cells != Cell.STAR)

    def star_count(self):
        return int((self._cells == Cell.STAR).sum())

    def fixed_count(self):
        return self.n - self.star_count()

    def base_index(self):
        """Table index of the completion that sets every star to 0."""
        ones = np.flatnonzero(self._cells == Cell.ONE)
        return int(sum(1 << int(i) for i in ones))

    def completion_indices(self):
        """Table indices of all completions, ordered by the free-variable index.

        Entry ``y`` is the completion whose j-th star takes bit j of ``y``.
        """
        idx = np.array([self.base_index()], dtype=np.int64)
        for pos in self.stars():
            idx = np.concatenate([idx, idx + (1 << int(pos))])
        return idx

    def complete(self, free_bits):
        """Fill the stars in order with ``free_bits``."""
        out = self._cells.astype(np.uint8)
        stars = self.stars()
        free_bits = as_bits(free_bits, stars.shape[0])
        out[stars] = free_bits
        return out


def apply_restriction(f, rho):
    """f restricted by rho, as a table over rho's stars in increasing order."""
    if rho.n != f.n:
        raise DimensionError(f"restriction length {rho.n} != arity {f.n}")
    return TruthTable(rho.star_count(), f.bits[rho.completion_indices()])


def compose(rho, rho2):
    """The composition rho rho2: rho's fixed cells win, rho2 fills the rest."""
    if rho.n != rho2.n:
        raise DimensionError(f"cannot compose restrictions of length {rho.n} and {rho2.n}")
    a = rho.array
    return Restriction(np.where(a == Cell.STAR, rho2.array, a))


def induced(rho, rho2):
    """rho2 read on the stars of rho, as a restriction of length star_count(rho).

    ``apply_restriction(f, compose(rho, rho2)) ==
    apply_restriction(apply_restriction(f, rho), induced(rho, rho2))``.
    """
    if rho.n != rho2.n:
        raise DimensionError(f"cannot induce between lengths {rho.n} and {rho2.n}")
    return Restriction(rho2.array[rho.stars()])


def lift(rho, sub):
    """Inverse of :func:`induced`: apply ``sub`` to rho's stars."""
    if sub.n != rho.star_count():
        raise DimensionError("sub-restriction must cover exactly the stars of rho")
    cells = rho.array.copy()
    cells[rho.stars()] = sub.array
    return Restriction(cells)


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ParamError(f"{name} must lie in [0, 1], got {value}")


def sample_rp(n, p, rng):
    """Draw from R_p: each cell is Star w.p. p, else a uniform fixed bit."""
    _check_prob("p", p)
    star = rng.random(n) < p
    bits = rng.integers(0, 2, size=n, dtype=np.int8)
    return Restriction(np.where(star, np.int8(Cell.STAR), bits))


def sample_subset(universe_size, q, rng):
    """Sorted index array of a q-biased random subset of range(universe_size)."""
    _check_prob("q", q)
    return np.flatnonzero(rng.random(universe_size) < q)


def rp_probability(rho, p):
    """Probability mass that R_p assigns to the restriction rho."""
    stars = rho.star_count()
    return p ** stars * ((1 - p) / 2) ** (rho.n - stars)


def read_restrictions(path):
    with open(path) as fh:
        return [Restriction(line.strip()) for line in fh if line.strip()]


def write_restrictions(path, restrictions):
    with open(path, "w") as fh:
        for rho in restrictions:
            fh.write(f"{rho}\n")


def make_rng(seed):
    """The workbench RNG: numpy's PCG64 stream seeded by ``seed``."""
    return np.random.default_rng(seed)


def trial_rng(seed, index):
    """Independent stream for trial ``index`` of an experiment with master ``seed``.

    Streams depend only on (seed, index), so sharding trials across workers
    cannot change results.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(index),)))
