import itertools
import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from nwbench.designs import (
    DESIGN_CONSTANT, PROFILES, Design, build_design_for, build_design_polynomial, is_prime, nw_params,
    read_design, verify_design, write_design,
)
from nwbench.errors import ParamError


def max_pairwise(design):
    best = 0
    for a, b in itertools.combinations(design.blocks, 2):
        best = max(best, len(set(a) & set(b)))
    return best


def test_polynomial_examples():
    d = build_design_polynomial(2, 1)
    assert d.universe_m == 4 and d.s == 2 and max_pairwise(d) == 0
    d = build_design_polynomial(3, 2)
    assert d.s == 9 and d.set_size_r == 3 and max_pairwise(d) <= 1
    d = build_design_polynomial(5, 3)
    assert d.s == 125 and max_pairwise(d) <= 2


def test_polynomial_rejects_composite():
    with pytest.raises(ParamError):
        build_design_polynomial(4, 2)


@pytest.mark.parametrize("q", [2, 3, 5, 7])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_polynomial_matches_brute(q, d):
    design = build_design_polynomial(q, d)
    rep = verify_design(design)
    assert rep.ok and rep.max_overlap == max_pairwise(design) <= d - 1
    assert design.s == q ** d
    if d <= q:
        assert len(set(design.blocks)) == design.s


def test_build_for_examples():
    one = build_design_for(1, 4, 0)
    assert one.s == 1 and verify_design(one).ok
    d = build_design_for(9, 3, 1)
    assert d.s == 9 and d.set_size_r == 3 and verify_design(d).max_overlap <= 1
    assert set(d.blocks) == set(build_design_polynomial(3, 2).blocks)
    d = build_design_for(50, 7, 3)
    assert verify_design(d).ok and d.universe_m <= 8 * 49 / 3


@settings(max_examples=40)
@given(st.integers(1, 60), st.integers(1, 9), st.integers(0, 4))
def test_build_for_always_verifies(s, r, l):
    d = build_design_for(s, r, l)
    rep = verify_design(d)
    assert rep.ok, rep.problems
    assert d.s == s and d.set_size_r == r and d.overlap_l == l
    assert all(list(b) == sorted(set(b)) for b in d.blocks)


def test_verify_examples():
    assert verify_design(Design(4, 2, 0, ((0, 1), (2, 3)))).ok
    rep = verify_design(Design(4, 2, 1, ((0, 1), (0, 1))))
    assert not rep.ok and rep.max_overlap == 2
    rep = verify_design(build_design_polynomial(3, 2))
    assert rep.ok and rep.max_overlap == 1


def test_design_rejects_bad_block():
    with pytest.raises(ParamError):
        Design(4, 2, 0, ((0, 0),))
    with pytest.raises(ParamError):
        Design(4, 2, 0, ((3, 4),))


def test_design_file_round_trip(tmp_path):
    d = build_design_for(20, 5, 2)
    path = tmp_path / "d.txt"
    write_design(path, d)
    text = path.read_text()
    assert text.splitlines()[0] == f"{d.universe_m} 5 2 20"
    again = read_design(path)
    assert again == d and again.to_text() == text


def test_primes():
    assert [q for q in range(30) if is_prime(q)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def reference_r(profile, s, eps, tau=None, c_d=None):
    """Independent re-evaluation of the profile formulas at high precision."""
    with mpmath.workdps(400):
        ls = mpmath.log(s, 2)
        lse = mpmath.log(mpmath.mpf(s) / eps, 2)
        if profile == "viola":
            return int(mpmath.nint(2 ** (10 * mpmath.sqrt(lse / c_d))))
        if profile in ("ls11_sym", "ls11_thr"):
            ll = max(1, mpmath.log(ls, 2))
            e = 1 if profile == "ls11_sym" else 2
            return int(mpmath.nint(2 ** (10 / mpmath.mpf(c_d) * ls / ll))) + int(mpmath.nint(lse ** e))
        return int(mpmath.nint(2 ** (10 * mpmath.sqrt(2 / mpmath.mpf(tau) * ls)))) + \
            int(mpmath.nint(lse ** mpmath.mpf("2.005")))


def test_nw_params_main_example():
    p = nw_params("main", 2 ** 16, 2 ** -10, tau=2)
    assert p.ell == 16
    assert p.r == 2 ** 40 + round(26 ** 2.005)
    assert p.m == -(-DESIGN_CONSTANT * p.r ** 2 // 16)
    assert p.hardness_size == 2 ** 32 and p.hardness_corr == 2 ** -26


def test_nw_params_s2():
    for profile in PROFILES:
        assert nw_params(profile, 2, 0.1, tau=1, c_d=1).ell == 1


def test_nw_params_viola_example():
    p = nw_params("viola", 2 ** 9, 0.5, c_d=1)
    assert p.r == round(2 ** (10 * math.sqrt(10)))


def test_nw_params_errors():
    with pytest.raises(ParamError):
        nw_params("main", 1, 0.1, tau=1)
    with pytest.raises(ParamError):
        nw_params("main", 16, 1.5, tau=1)
    with pytest.raises(ParamError):
        nw_params("viola", 16, 0.1)
    with pytest.raises(ParamError):
        nw_params("nope", 16, 0.1)


@settings(max_examples=30)
@given(st.sampled_from(PROFILES), st.integers(2, 2 ** 20), st.floats(1e-6, 0.9))
def test_nw_params_invariants(profile, s, eps):
    p = nw_params(profile, s, eps, tau=3, c_d=2)
    assert p.ell == math.ceil(math.log2(s))
    assert p.m >= p.r >= p.ell
    assert p.r == reference_r(profile, s, eps, tau=3, c_d=2)


def test_nw_params_desk_cap():
    p = nw_params("main", 2 ** 10, 0.01, tau=1, desk_cap=64)
    assert p.desk_scale and p.r == 64 and p.ell == 10
