import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pntap import zeros
from pntap.chars import character_group
from pntap.errors import DomainError, PreconditionError, ResourceLimitError
from pntap.lfunc import DEFAULT, hardy_z


def chi4():
    return character_group(4).primitive_characters()[0]


def zeta():
    return character_group(1)[0]


def mp_zero_mod4(guess):
    with mp.workdps(25):
        rho = mp.findroot(lambda s: mp.dirichlet(s, [0, 1, 0, -1]), mp.mpc(0.5, guess))
        assert abs(rho.real - 0.5) < 1e-15
        return float(rho.imag)


def test_critical_line_examples():
    zs = zeros.critical_line_zeros(zeta(), 15)
    assert len(zs) == 2
    assert zs.ordinates[1] == pytest.approx(float(mp.zetazero(1).imag), abs=1e-7)
    assert zs.ordinates[0] == -zs.ordinates[1]

    zs = zeros.critical_line_zeros(chi4(), 7)
    assert len(zs) == 2
    assert zs.ordinates[1] == pytest.approx(mp_zero_mod4(6.02), abs=1e-7)
    assert len(zeros.critical_line_zeros(chi4(), 5)) == 0


def test_fine_scan_oracle_agrees():
    # independent scan: dense grid of Z, no rescans, plain sign counting
    chi = character_group(5).primitive_characters()[0]
    t = np.arange(-30, 30.0005, 0.001)
    z = hardy_z(t, chi)
    n_oracle = int(np.sum(np.sign(z[:-1]) * np.sign(z[1:]) < 0))
    assert len(zeros.critical_line_zeros(chi, 30)) == n_oracle


def test_record_fields():
    zs = zeros.critical_line_zeros(chi4(), 20)
    for z in zs.zeros:
        assert z.refinement_width <= 1e-8
        assert 0 < z.beta < 1
        assert z.character == chi4().label
    with pytest.raises(ValueError):
        zeros.ZeroRecord(1.0, beta=1.0)


def test_caps_and_preconditions():
    imprimitive = character_group(8).trivial()
    with pytest.raises(PreconditionError):
        zeros.critical_line_zeros(imprimitive, 10)
    with pytest.raises(PreconditionError):
        zeros.rectangle_zero_count(imprimitive, 0.5, 10)
    with pytest.raises(ResourceLimitError):
        zeros.critical_line_zeros(chi4(), 10, DEFAULT.with_(t_cap=5))
    with pytest.raises(DomainError):
        zeros.rectangle_zero_count(chi4(), 1.5, 10)


def test_rectangle_examples():
    assert zeros.rectangle_zero_count(chi4(), 0.5, 10) == 2
    assert zeros.rectangle_zero_count(chi4(), 0.9, 10) == 0
    for chi in (zeta(), chi4(), character_group(7).primitive_characters()[2]):
        assert zeros.rectangle_zero_count(chi, 1.0, 30) == 0


def test_rectangle_perturbation_bounded():
    r = zeros.rectangle_zero_count(chi4(), 0.5, 6.0209489, detail=True)
    top, bottom = r.perturbation
    assert abs(top) <= 0.01 and abs(bottom) <= 0.01
    assert r.count in (0, 2)


@pytest.mark.parametrize("q", [1, 3, 4, 5, 7, 8, 11, 12])
def test_two_method_equality_subset(q):
    for chi in character_group(q).primitive_characters():
        n_line = len(zeros.critical_line_zeros(chi, 30))
        assert zeros.rectangle_zero_count(chi, 0.5 - 1e-6, 30) == n_line


@pytest.mark.parametrize("q", [5, 7, 13])
def test_conjugate_pairing(q):
    for chi in character_group(q).primitive_characters():
        a = zeros.critical_line_zeros(chi, 25).ordinates
        b = zeros.critical_line_zeros(chi.conj(), 25).ordinates
        assert len(a) == len(b)
        assert np.max(np.abs(np.sort(a) + np.sort(b)[::-1])) < 1e-6
        if chi.is_real:
            assert np.max(np.abs(np.sort(a) + np.sort(a)[::-1])) < 1e-12


def test_exceptional_examples():
    for q in (3, 163):
        e = zeros.exceptional_zero_search(q)
        assert not e.exists
        assert e.search_floor == pytest.approx(1 - 1 / (50 * math.log(q)))
        assert e.characters_scanned >= 1
        assert e.chi1_at(2) == 0
    real = [c for c in character_group(12).real_characters() if not c.is_trivial]
    e = zeros.exceptional_zero_search(12, synthetic=(0.995, real[0]))
    assert e.exists and e.synthetic
    assert e.beta1 == 0.995 and e.chi1 is real[0]
    assert e.chi1_at(5) in (-1, 1)


def test_synthetic_validation():
    complex_chi = [c for c in character_group(5) if not c.is_real][0]
    with pytest.raises(PreconditionError):
        zeros.synthetic_exceptional(5, 0.995, complex_chi)
    with pytest.raises(PreconditionError):
        zeros.synthetic_exceptional(5, 0.995, chi4())
    real5 = [c for c in character_group(5).real_characters() if not c.is_trivial][0]
    with pytest.raises(DomainError):
        zeros.synthetic_exceptional(5, 0.9, real5)
    with pytest.raises(DomainError):
        zeros.exceptional_zero_search(2)


def test_real_characters_positive_near_one():
    for q in (3, 4, 5, 8, 163):
        for chi in character_group(q).real_characters():
            if chi.is_trivial:
                continue
            assert zeros._real_zeros_primitive(chi.primitive, DEFAULT) == []


def test_density_examples():
    tab = zeros.density_stats(3, 30, [0.5, 0.75, 1.0])
    rows = {r.sigma: r for r in tab.rows}
    assert rows[1.0].Nq == 0 and rows[1.0].bound_huxley >= 0 and rows[1.0].bound_repulsive >= 0
    total = sum(len(zeros.critical_line_zeros(c.primitive, 30)) for c in character_group(3))
    assert rows[0.5].Nq == total
    assert tab.is_monotone()
    for r in tab.rows:
        assert r.Nq_star == r.Nq
        assert r.nu == 1.0

    tab = zeros.density_stats(5, 20, [0.75])
    r = tab.rows[0]
    assert r.Nq == 0 and r.ratio == 0
    assert r.bound_huxley == pytest.approx(100 ** (2.5 * 0.25))


def test_density_csv_columns():
    tab = zeros.density_stats(3, 10, [0.5, 1.0])
    lines = tab.to_csv().splitlines()
    assert lines[0] == "sigma,Nq,Nq_star,bound_huxley,bound_repulsive,nu,ratio"
    assert len(lines) == 3


def test_density_with_synthetic_exceptional():
    real = [c for c in character_group(5).real_characters() if not c.is_trivial][0]
    exc = zeros.synthetic_exceptional(5, 0.995, real)
    tab = zeros.density_stats(5, 20, [0.5, 0.99, 1.0], exc=exc)
    rows = {r.sigma: r for r in tab.rows}
    assert rows[0.99].Nq == rows[0.99].Nq_star + 1
    assert rows[1.0].Nq == rows[1.0].Nq_star == 0
    assert rows[0.5].nu == pytest.approx(min(1, 0.005 * math.log(100)))
    assert tab.is_monotone()


def test_density_thread_parity():
    a = zeros.density_stats(7, 15, [0.5, 0.8], threads=1)
    b = zeros.density_stats(7, 15, [0.5, 0.8], threads=3)
    assert a.to_json() == b.to_json()


def test_disc_examples():
    assert zeros.zeros_in_disc(chi4(), 6.0209489, 0.51) == 1
    assert zeros.zeros_in_disc(chi4(), 6.0209489, 0.3) == 0
    assert zeros.zeros_in_disc(chi4(), 3.0, 0.4) == 0
    with pytest.raises(DomainError):
        zeros.zeros_in_disc(chi4(), 3.0, 0.8)


def test_disc_audit_monotone():
    out = zeros.disc_audit(zeta(), 14.1347, [0.2, 0.51, 0.6, 0.75])
    counts = out["counts"]
    assert counts == sorted(counts)
    assert counts[0] == 0 and counts[1] >= 1


def test_nu_examples():
    assert zeros.nu(math.e, 0.99) == pytest.approx(0.01)
    assert zeros.nu(1e10, 0.9) == 1.0
    assert zeros.nu(1.0, 0.99) == 0.0
    assert zeros.nu(50.0, None) == 1.0
    with pytest.raises(DomainError):
        zeros.nu(0.5, 0.99)


@settings(max_examples=200)
@given(st.floats(1, 1e12), st.floats(0.5, 0.999999))
def test_nu_range(u, beta1):
    v = zeros.nu(u, beta1)
    assert 0 <= v <= 1
    assert v == pytest.approx(min(1.0, (1 - beta1) * math.log(u)))
