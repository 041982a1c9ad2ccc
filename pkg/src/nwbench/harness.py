"""Fooling, correlation and pipeline measurements with serializable reports."""
import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._trials import map_trials
from .boolcore import TruthTable, apply_restriction, make_rng
from .circuits import CircuitSpec, SparseF2Poly, circuit_table, eval_circuit, eval_poly
from .errors import CapError, DimensionError, SpecError
from .hardfn import RWParams, gip_copy_check, rw_table, structure_under_restriction
from .nwgen import HardFunctionHandle, generate, seed_count, target_table
from .restrictlab import fair_pipeline_sample

SCHEMA = 1
Z99 = 2.576
MAX_EXACT_SEED = 24
MAX_EXACT_TARGET = 20
MAX_CORR_VARS = 20


def flatten(obj, prefix=""):
    """Nested dicts become dotted keys and lists become ';'-joined strings."""
    out = {}
    for key, value in obj.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        elif isinstance(value, (list, tuple)):
            out[name] = ";".join(str(v) for v in value)
        else:
            out[name] = value
    return out


def to_csv(rows):
    """CSV text for one report dict or a list of them (lossy)."""
    rows = [rows] if isinstance(rows, dict) else rows
    flat = [flatten(r) for r in rows]
    keys = []
    for r in flat:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    writer.writerows(flat)
    return buf.getvalue()


class _Report:
    def to_json(self):
        return {"schema": SCHEMA, **asdict(self)}

    @classmethod
    def from_json(cls, obj):
        if obj.get("schema") != SCHEMA:
            raise SpecError(f"unsupported report schema {obj.get('schema')!r}")
        return cls(**{k: v for k, v in obj.items() if k != "schema"})

    def to_csv(self):
        return to_csv(self.to_json())


# ---------------------------------------------------------------- fooling

@dataclass
class FoolReport(_Report):
    mode: str
    bias: float
    seed_mean: float
    uniform_mean: float
    seed_hits: int
    seed_samples: int
    uniform_hits: int
    uniform_samples: int
    half_width: float
    seed: int
    config: dict = field(default_factory=dict)


def _target_arity(target):
    if isinstance(target, (TruthTable, SparseF2Poly, CircuitSpec)):
        return target.n
    raise SpecError(f"unsupported target {type(target).__name__}")


def _target_eval(target):
    if isinstance(target, TruthTable):
        return lambda x: int(target.bits[int(np.dot(x, 1 << np.arange(len(x), dtype=np.int64)))])
    if isinstance(target, SparseF2Poly):
        return lambda x: eval_poly(target, x)
    return lambda x: eval_circuit(target, x)


def measure_bias(target, gen, mode="exact", samples=10000, seed=0):
    """|E_seed target(G(seed)) - E_x target(x)|, exactly or by sampling both sides."""
    n = _target_arity(target)
    if n > gen.output_len:
        raise DimensionError(f"target reads {n} bits but the generator emits {gen.output_len}")
    config = {"target_arity": n, "seed_len": gen.seed_len, "output_len": gen.output_len,
              "hard": gen.hard.kind, "samples": samples}
    if mode == "exact":
        if gen.seed_len > MAX_EXACT_SEED or n > MAX_EXACT_TARGET:
            raise CapError(f"exact bias needs m <= {MAX_EXACT_SEED} and target arity <= {MAX_EXACT_TARGET}")
        table = target_table(target)
        s_hits, s_total = seed_count(table, gen), 1 << gen.seed_len
        u_hits, u_total = table.count_ones(), 1 << n
        half = 0.0
    elif mode == "monte_carlo":
        if samples < 1:
            raise SpecError("monte_carlo needs a positive sample budget")
        rng = make_rng(seed)
        f = _target_eval(target)
        s_hits = 0
        for _ in range(samples):
            z = rng.integers(0, 2, size=gen.seed_len, dtype=np.uint8)
            s_hits += f(generate(gen, z)[:n])
        u_hits = sum(f(rng.integers(0, 2, size=n, dtype=np.uint8)) for _ in range(samples))
        s_total = u_total = samples
        p1, p2 = s_hits / samples, u_hits / samples
        half = Z99 * math.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / samples)
    else:
        raise SpecError(f"unknown mode {mode!r}")
    sm, um = s_hits / s_total, u_hits / u_total
    return FoolReport(mode, abs(sm - um), sm, um, int(s_hits), int(s_total), int(u_hits), int(u_total),
                      half, seed, config)


# ---------------------------------------------------------------- counting

@dataclass
class CountReport(_Report):
    estimate: float
    seed_hits: int
    seeds: int
    exact: float = None
    abs_error: float = None


def count_report(target, gen):
    """Deterministic estimate from the generator plus, for n <= 20, the true density."""
    table = target_table(target)
    hits = seed_count(table, gen)
    est = hits / (1 << gen.seed_len)
    exact = err = None
    if table.n <= MAX_EXACT_TARGET:
        exact = table.density()
        err = abs(est - exact)
    return CountReport(est, hits, 1 << gen.seed_len, exact, err)


# ---------------------------------------------------------------- correlation

@dataclass
class CorrReport(_Report):
    agreement: float
    correlation: float
    agree_count: int
    domain_size: int
    gamma_sl: float = None
    gamma_target: float = None
    gamma_corr: float = None


def _as_table(obj):
    if isinstance(obj, TruthTable):
        return obj
    if isinstance(obj, HardFunctionHandle):
        if obj.arity > MAX_CORR_VARS:
            raise CapError(f"exact correlation is capped at n = {MAX_CORR_VARS}")
        return obj.table()
    if isinstance(obj, (CircuitSpec, SparseF2Poly)):
        if obj.n > MAX_CORR_VARS:
            raise CapError(f"exact correlation is capped at n = {MAX_CORR_VARS}")
        return target_table(obj)
    raise SpecError(f"unsupported function {type(obj).__name__}")


def measure_correlation(F, H):
    """Exact Pr_x[F(x) = H(x)] over all 2^n inputs."""
    a, b = _as_table(F), _as_table(H)
    if a.n != b.n:
        raise DimensionError(f"arity mismatch {a.n} vs {b.n}")
    agree = int((a.bits == b.bits).sum())
    size = 1 << a.n
    return CorrReport(agree / size, agree / size - 0.5, agree, size)


# ---------------------------------------------------------------- pipeline

@dataclass
class PipelineReport(_Report):
    trials: int
    seed: int
    gamma_sl: float
    gamma_target: float
    gamma_corr_max: float
    gamma_corr_mean: float
    good_trials: int
    agreement: float
    rhs: float
    slack: float
    holds: bool
    correlations: list = field(default_factory=list)
    config: dict = field(default_factory=dict)


def _pipeline_trial(payload, rng):
    F, rw, p, q, k, ell, target_m, f_table, h_table = payload
    rho, diag = fair_pipeline_sample(F, p, q, rng, k=k, ell=ell)
    collapsed = bool(diag["collapsed_to_width_k"])
    retained = gip_copy_check(structure_under_restriction(rw, rho), target_m)
    corr = None
    if collapsed and retained:
        a = apply_restriction(f_table, rho).bits
        b = apply_restriction(h_table, rho).bits
        corr = float((a == b).mean()) - 0.5
    return collapsed, retained, corr


def pipeline_experiment(F, rw, p, q, trials, seed=0, k=None, ell=None, target_m=None, workers=None):
    """Desk-scale check of agreement <= 1/2 + g_SL + g_target + max g_corr + slack.

    Every trial draws rho from the fair sampler, so agreement(F, RW) is the
    average over rho of the agreement of F and RW restricted by rho; splitting
    that average into collapse failures, missing GIP copies and the good
    trials gives the inequality. The slack is 3 binomial sigma of a mean of
    [0, 1] values, 1.5 / sqrt(trials).
    """
    if not isinstance(rw, RWParams):
        raise SpecError("pipeline_experiment needs RW parameters")
    if F.n != rw.n:
        raise DimensionError(f"circuit has {F.n} inputs, RW has {rw.n}")
    if trials < 1:
        raise SpecError("trials must be at least 1")
    k = rw.k if k is None else k
    target_m = max(1, rw.m // 2) if target_m is None else target_m
    f_table, h_table = circuit_table(F), rw_table(rw)
    payload = (F, rw, p, q, k, ell, target_m, f_table, h_table)
    results = map_trials(_pipeline_trial, payload, seed, trials, workers)
    g_sl = sum(not c for c, _, _ in results) / trials
    g_target = sum(not r for _, r, _ in results) / trials
    corrs = [c for _, _, c in results if c is not None]
    c_max = max(corrs) if corrs else 0.0
    c_mean = float(np.mean(corrs)) if corrs else 0.0
    agreement = float((f_table.bits == h_table.bits).mean())
    slack = 1.5 / math.sqrt(trials)
    rhs = 0.5 + g_sl + g_target + c_max + slack
    config = {"n": F.n, "rw": [rw.m, rw.k, rw.r], "p": p, "q": q, "k": k, "ell": ell,
              "target_m": target_m, "size": F.size}
    return PipelineReport(trials, seed, g_sl, g_target, c_max, c_mean, len(corrs), agreement, rhs, slack,
                          agreement <= rhs, corrs, config)

