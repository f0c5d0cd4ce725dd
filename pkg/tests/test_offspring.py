import math

import numpy as np
import pytest

from cuttree_lab.errors import DomainError, InputError
from cuttree_lab.offspring import (
    OffspringModel,
    make_custom_critical,
    make_geometric_critical,
    make_power_tail_critical,
    model_from_config,
    moments,
    scaling_sequence,
)

# frozen reference values for the alpha = 1.5 power-tail law,
# nu(0) = 1 - zeta(2.5)/zeta(1.5), nu(k) = k^-2.5 / zeta(1.5)
# (computed independently with 30-digit mpmath zeta)
POWER_NU0 = 0.486487553204812135
POWER_NU1 = 0.382793383999426562


def test_geometric_pmf_and_tail():
    m = make_geometric_critical()
    ks = np.arange(10)
    assert np.allclose(m.pmf(ks), 0.5 ** (ks + 1))
    assert m.pmf(0) == 0.5
    assert m.tail(-1) == 1.0
    assert m.tail(3) == pytest.approx(2.0 ** -4, abs=0.0)
    assert m.pmf(np.array([-1]))[0] == 0.0


def test_geometric_moments():
    m = make_geometric_critical()
    mean, var = moments(m)
    assert mean == 1.0
    assert var == 2.0
    ks = np.arange(200)
    p = m.pmf(ks)
    assert float(p.sum()) == pytest.approx(1.0, abs=1e-12)
    assert float(ks @ p) == pytest.approx(1.0, abs=1e-12)


def test_power_tail_values():
    m = make_power_tail_critical(1.5)
    assert m.pmf(0) == pytest.approx(POWER_NU0, abs=1e-14)
    assert m.pmf(1) == pytest.approx(POWER_NU1, abs=1e-14)
    # tail is the exact zeta remainder, consistent with the pmf
    brute = float(sum(m.pmf(np.arange(1001))[6:]))
    assert m.tail(5) == pytest.approx(brute + m.tail(1000), rel=1e-10)
    assert math.isinf(m.variance)


def test_power_tail_criticality():
    # partial sum of k * nu(k) plus the closed-form size-biased tail is the
    # full mean, which must be exactly 1
    m = make_power_tail_critical(1.3)
    r = 200_000
    ks = np.arange(1, r + 1)
    partial = float(ks @ m.pmf(ks))
    assert partial < 1.0
    assert partial + m.size_biased_tail(r) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("alpha", [1.0, 2.0, 0.5, 2.5])
def test_power_tail_alpha_domain(alpha):
    with pytest.raises(DomainError):
        make_power_tail_critical(alpha)


def test_size_biased_tail_geometric_closed_form():
    m = make_geometric_critical()
    for r in range(0, 12):
        brute = sum(s * float(m.pmf(s)) for s in range(r + 1, 400))
        assert m.size_biased_tail(r) == pytest.approx(brute, abs=1e-12)
        assert m.size_biased_tail(r) == pytest.approx((r + 2) * 2.0 ** -(r + 1))


def test_size_biased_pmf_domain():
    m = make_geometric_critical()
    assert m.size_biased_pmf(2) == pytest.approx(2 * 0.125)
    with pytest.raises(DomainError):
        m.size_biased_pmf(0)


def test_custom_binary_model():
    m = make_custom_critical({0: 0.5, 2: 0.5}, label="binary")
    assert m.pmf(0) == 0.5 and m.pmf(2) == 0.5 and m.pmf(1) == 0.0
    assert m.support_cap == 2
    assert m.period == 2
    assert m.variance == pytest.approx(1.0)


def test_custom_validation_errors():
    with pytest.raises(InputError):
        make_custom_critical({})
    with pytest.raises(InputError):
        make_custom_critical({0: 0.6, 2: 0.5})      # not normalised
    with pytest.raises(InputError):
        make_custom_critical({1: 1.0})              # nu(0) = 0
    with pytest.raises(InputError):
        make_custom_critical({-1: 0.5, 2: 0.5})     # negative support


def test_custom_non_critical_rejected():
    with pytest.raises(InputError):
        make_custom_critical({0: 0.5, 1: 0.5})      # mean 1/2


def test_period_aperiodic_families():
    assert make_geometric_critical().period == 1
    assert make_power_tail_critical(1.5).period == 1
    m = make_custom_critical({0: 0.5, 1: 0.25, 3: 0.25}, label="mix")
    assert m.period == 1


def test_scaling_finite_variance_exact():
    seq = scaling_sequence(make_geometric_critical())
    assert seq.kind == "finite_variance"
    for n in (1, 5, 200, 4000):
        assert seq(n) == math.sqrt(2.0) * math.sqrt(n)


def test_scaling_tail_inversion():
    seq = scaling_sequence(make_power_tail_critical(1.5))
    assert seq.kind == "tail_inversion"
    a = seq(1000)
    assert 38 <= a <= 42
    # defining property: P(Z - 1 > a_n) <= 1/n < P(Z - 1 > a_n - 1)
    m = seq.model
    assert m.tail(a + 1) <= 1e-3 < m.tail(a)
    values = [seq(n) for n in range(2, 400)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    with pytest.raises(DomainError):
        seq(0)


def test_sampler_matches_pmf():
    m = make_geometric_critical()
    rng = np.random.default_rng(5)
    draws = m.sample(rng, size=200_000)
    emp = np.bincount(draws, minlength=12)[:12] / 200_000
    assert np.max(np.abs(emp - m.pmf(np.arange(12)))) < 5e-3


def test_sample_batch_capped_exact_sentinel():
    m = make_power_tail_critical(1.5)
    rng = np.random.default_rng(6)
    cap = 8
    z = m.sample_batch_capped(rng, (300_000,), cap=cap)
    assert z.max() <= cap + 1
    emp = np.bincount(z, minlength=cap + 2) / 300_000
    exact = np.append(m.pmf(np.arange(cap + 1)), m.tail(cap))
    assert np.max(np.abs(emp - exact)) < 5e-3


def test_capped_tail_continuation_past_table():
    # geometric table is finite; a cap beyond it must still be handled
    m = make_geometric_critical()
    rng = np.random.default_rng(7)
    z = m.sample_batch_capped(rng, (10_000,), cap=500)
    assert z.max() <= 501


def test_model_from_config():
    assert model_from_config({"model": "geometric"}).kind == "geometric"
    m = model_from_config({"model": "power_tail", "alpha": 1.5})
    assert m.alpha == 1.5
    m = model_from_config({"model": "custom", "pmf": {"0": 0.5, "2": 0.5}})
    assert m.support_cap == 2
    with pytest.raises(InputError):
        model_from_config({})
    with pytest.raises(InputError):
        model_from_config({"model": "power_tail"})
    with pytest.raises(InputError):
        model_from_config({"model": "custom"})
    with pytest.raises(InputError):
        model_from_config({"model": "zeta"})


def test_hypothesis_h_sup_finite():
    m = make_power_tail_critical(1.5)
    assert 0.0 < m.hypothesis_h_sup(2000) < 10.0
