import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from beamwaves.errors import DomainError, PreconditionError
from beamwaves.exact import Radical, surd
from beamwaves.params import (
    ModelParams,
    TorusGeometry,
    check_membership_S,
    check_membership_Sprime,
    classify_case,
    params_from_json,
    params_to_json,
    running_example,
    sample_dense,
    sqrt_is_irrational,
    standing_hypothesis,
)

CASE_GEOMETRIES = {
    1: (1, 1),
    2: (Radical(1, 2, 4), 1),
    3: (1, Radical(1, 3, 4)),
    4: (Radical(1, 2, 4), Radical(1, 3, 4)),
    5: (Radical(1, 2, 8), Radical(Fraction(3, 2), 2, 8)),
    6: (Radical(1, 2, 8), Radical(1, 18, 8)),
}


def test_sqrt_is_irrational_oracle():
    # integer-square-root oracle
    for q in (Fraction(1, 11), Fraction(2), Fraction(4, 9), Fraction(50, 2)):
        rational = math.isqrt(q.numerator) ** 2 == q.numerator and math.isqrt(q.denominator) ** 2 == q.denominator
        assert sqrt_is_irrational(q) is (not rational)


def test_running_example_is_case_1_member(example):
    params, geom = example
    rep = check_membership_S(params, geom)
    assert rep.member and rep.case_id == 1 and rep.failed_conditions == ()
    # the ratio behind the decisive condition
    assert Fraction(3, 2) / Fraction(33, 2) == Fraction(1, 11)


def test_m4_fails_natural_condition(example):
    params, geom = example
    rep = check_membership_S(params.replace(m=4), geom)
    assert not rep.member
    assert "m_over_mu_nu1_4_not_natural" in rep.failed_conditions


def test_standing_hypothesis_violation():
    params = ModelParams(1, Fraction(1, 2), 1.0, 1, (2, 1))
    geom = TorusGeometry.from_nu(1, 2)
    assert not standing_hypothesis(params, geom)
    with pytest.raises(PreconditionError):
        check_membership_S(params, geom)
    with pytest.raises(PreconditionError):
        check_membership_Sprime(params, geom)


def test_sprime_examples(example):
    params, geom = example
    assert check_membership_Sprime(params.replace(mu=surd(1, 2), m=surd(1, 3)), geom).member
    rep = check_membership_Sprime(params.replace(mu=surd(1, 2), m=surd(3, 2)), geom)
    assert not rep.member and rep.failed_conditions == ("m_over_mu_irrational",)
    assert not check_membership_Sprime(params.replace(mu=1, m=1), geom).member


def test_sprime_geometry_failure_is_reported():
    params = ModelParams(surd(1, 2), surd(1, 3))
    geom = TorusGeometry.from_nu(Radical(1, 2, 8), 1)
    rep = check_membership_Sprime(params, geom)
    assert not rep.member and "nu1_4_rational" in rep.failed_conditions


@pytest.mark.parametrize("case", sorted(CASE_GEOMETRIES))
def test_case_classification(case):
    geom = TorusGeometry.from_nu(*CASE_GEOMETRIES[case])
    assert classify_case(geom) == case


def test_sample_dense_examples(example):
    params, geom = example
    for eps in (0.1, 1e-6):
        res = sample_dense((1, 1), eps, "S", geom)
        assert res.success
        assert abs(float(res.params.mu) - 1) < eps and abs(float(res.params.m) - 1) < eps
        assert check_membership_S(res.params, geom).member
    with pytest.raises(DomainError):
        sample_dense((1, 1), 0, "S", geom)


@pytest.mark.parametrize("case", sorted(CASE_GEOMETRIES))
def test_sample_dense_every_case(case):
    geom = TorusGeometry.from_nu(*CASE_GEOMETRIES[case])
    res = sample_dense((2.5, 0.7), 1e-3, "S", geom)
    assert res.success and check_membership_S(res.params, geom).member


def test_sample_dense_sprime_and_incompatible_geometry():
    geom = TorusGeometry.from_nu(1, 1)
    res = sample_dense((3.0, 0.2), 1e-4, "Sprime", geom)
    assert res.success and check_membership_Sprime(res.params, geom).member
    bad = TorusGeometry.from_nu(Radical(1, 2, 8), 1)
    assert not sample_dense((1, 1), 1e-3, "Sprime", bad).success
    assert not sample_dense((1, 1), 1e-3, "S", bad).success


def _random_params(rng):
    geom = TorusGeometry.from_nu(*CASE_GEOMETRIES[rng.randint(1, 6)])
    mu = rng.choice([Radical(Fraction(rng.randint(1, 20), rng.randint(1, 20))), surd(Fraction(rng.randint(1, 9), 7), rng.choice([2, 3, 5]))])
    m = rng.choice([Radical(Fraction(rng.randint(1, 20), rng.randint(1, 20))), surd(Fraction(rng.randint(1, 9), 5), rng.choice([2, 3, 7]))])
    jstar = (rng.randint(1, 3), rng.randint(1, 3))
    return ModelParams(mu, m, 1.0, 1, jstar), geom


def test_s_and_sprime_are_disjoint():
    rng = random.Random(7)
    seen = 0
    for _ in range(400):
        params, geom = _random_params(rng)
        if not standing_hypothesis(params, geom):
            continue
        a = check_membership_S(params, geom).member
        b = check_membership_Sprime(params, geom).member
        assert not (a and b)
        seen += a or b
    assert seen > 20


def test_condition_order_does_not_matter():
    rng = random.Random(3)
    for _ in range(30):
        params, geom = _random_params(rng)
        if not standing_hypothesis(params, geom):
            continue
        base = check_membership_S(params, geom)
        base_p = check_membership_Sprime(params, geom)
        for order in itertools.islice(itertools.permutations(range(7)), 0, 5040, 997):
            assert check_membership_S(params, geom, order) == base
        order6 = list(range(6))
        rng.shuffle(order6)
        assert check_membership_Sprime(params, geom, order6) == base_p


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.sampled_from(["S", "S'"]))
def test_sample_dense_rechecks(mu0, m0, set_id):
    geom = TorusGeometry.from_nu(1, 1)
    res = sample_dense((mu0, m0), 1e-3, set_id, geom)
    assert res.success
    check = check_membership_S if set_id == "S" else check_membership_Sprime
    assert check(res.params, geom).member


def test_json_round_trip(example):
    params, geom = example
    obj = params_to_json(params, geom)
    assert obj["m"] == {"r": "1/2", "d": 1, "k": 1}
    p2, g2 = params_from_json(obj)
    assert p2 == params or (p2.mu == params.mu and p2.m == params.m and p2.jstar == params.jstar)
    assert g2.nu1 == geom.nu1
    # the quadratic-surd form without k
    p3, _ = params_from_json({"mu": {"r": "1/1", "d": 2}, "m": {"r": "1/2", "d": 1}, "L1": "1", "L2": "1"})
    assert p3.mu == surd(1, 2)


def test_model_params_validation():
    with pytest.raises(DomainError):
        ModelParams(1, 1, -1.0)
    with pytest.raises(DomainError):
        ModelParams(1, 1, 1.0, 0)
    with pytest.raises(TypeError):
        ModelParams(0.5, 1)
    assert ModelParams(1, 1, 0.0).lam == 0.0
