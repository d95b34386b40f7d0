import random

import pytest

from models.twist_data import TwistData
from utils.errors import FieldError
from utils.ffield import (
    build_field,
    build_tower,
    dlog,
    least_irreducible,
    norm_rel,
    trace_to_prime,
)


def test_default_modulus_is_least_irreducible(f4):
    assert f4.modulus == (1, 1, 1)
    assert least_irreducible(3, 2) == (1, 0, 1)


def test_prime_field_generator(f11):
    assert f11.generator_code == 2
    assert f11.order == 11


def test_rejects_reducible_modulus():
    with pytest.raises(FieldError):
        build_field(3, 2, (2, 0, 1))


def test_rejects_non_prime():
    with pytest.raises(FieldError):
        build_field(4, 1)


def test_trace_examples(f4, f9):
    assert trace_to_prime(f4.root()).to_int() == 1
    assert trace_to_prime(f9.root()).to_int() == 0


def test_trace_is_frobenius_invariant():
    field = build_field(7, 2)
    for code in range(field.order):
        x = field.from_int(code)
        assert trace_to_prime(x ** 7) == trace_to_prime(x)


def test_dlog_example(f11):
    assert dlog(f11.from_int(9)) == 6


def test_dlog_inverts_powers(f121):
    g = f121.generator
    for e in range(0, 120, 7):
        assert dlog(g**e) == e


def test_dlog_of_zero(f11):
    with pytest.raises(FieldError):
        dlog(f11.zero())


def test_norm_example(f9):
    tower = build_tower(build_field(3, 1), 2)
    assert tower.ext == f9
    assert norm_rel(f9.root(), tower).to_int() == 1
    assert norm_rel(f9.one(), tower).to_int() == 1


def test_norm_of_generator_generates(f11, f121):
    tower = build_tower(f11, 2)
    n = norm_rel(f121.generator, tower)
    assert len({(n**i).to_int() for i in range(10)}) == 10


def test_norm_is_multiplicative(f11, f121):
    tower = build_tower(f11, 2)
    for a, b in [(3, 17), (25, 101), (7, 120)]:
        x, y = f121.from_int(a), f121.from_int(b)
        assert norm_rel(x * y, tower) == norm_rel(x, tower) * norm_rel(y, tower)


def test_embedding_is_a_ring_map(f4):
    tower = build_tower(f4, 2)
    for a in range(4):
        for b in range(4):
            x, y = f4.from_int(a), f4.from_int(b)
            assert tower.embed(x * y) == tower.embed(x) * tower.embed(y)
            assert tower.embed(x + y) == tower.embed(x) + tower.embed(y)


def test_norm_of_base_element_is_its_power(f4):
    tower = build_tower(f4, 2)
    for a in range(1, 4):
        x = f4.from_int(a)
        assert norm_rel(tower.embed(x), tower) == x**2


def test_parse_text(f9):
    assert f9.parse("1+2*t") == f9.elem([1, 2])
    assert f9.parse("t^1-1") == f9.elem([-1, 1])
    x = f9.parse("2+t")
    assert str(x) == "2+1*t"
    assert f9.parse(str(x)) == x


@pytest.mark.parametrize("p,b", [(7, 1), (11, 1), (7, 2), (11, 2)])
def test_twist_digits_and_shifts(p, b):
    q = p**b
    for u in range(q - 1):
        twist = TwistData.from_u(p, b, u)
        assert sum(c * p**i for i, c in enumerate(twist.digits)) == u
        for i, s in enumerate(twist.s):
            assert 0 <= s < q - 1
            assert s == (p**i * u) % (q - 1)


def test_trivial_conventions():
    assert TwistData.from_u(11, 1, 10).representative == 0
    literal = TwistData.from_u(11, 1, 10, literal_trivial=True)
    assert literal.representative == 10
    assert literal.residue_digits == (0,)


@pytest.mark.parametrize("p", [2, 3])
def test_norm_is_transitive(p):
    prime, middle, top = build_field(p, 1), build_field(p, 2), build_field(p, 4)
    direct = build_tower(prime, 4)
    upper, lower = build_tower(middle, 2), build_tower(prime, 2)
    assert direct.ext == upper.ext == top
    for code in range(top.order):
        x = top.from_int(code)
        assert norm_rel(x, direct) == norm_rel(norm_rel(x, upper), lower)


def test_dlog_round_trips_on_every_unit(f121):
    g = f121.generator
    seen = set()
    for code in range(1, f121.order):
        x = f121.from_int(code)
        e = dlog(x)
        assert 0 <= e < 120
        assert g**e == x
        seen.add(e)
    assert len(seen) == 120


def test_dlog_to_another_generator(f121):
    base = f121.generator**7
    for code in range(1, f121.order, 3):
        x = f121.from_int(code)
        assert base ** dlog(x, base) == x


def test_norm_is_multiplicative_on_every_pair(f4):
    tower = build_tower(f4, 2)
    ext = tower.ext
    for a in range(ext.order):
        for b in range(ext.order):
            x, y = ext.from_int(a), ext.from_int(b)
            assert norm_rel(x * y, tower) == norm_rel(x, tower) * norm_rel(y, tower)


def test_norm_is_multiplicative_on_random_pairs(f11, f121):
    rng = random.Random(121)
    tower = build_tower(f11, 2)
    for _ in range(400):
        x = f121.from_int(rng.randrange(f121.order))
        y = f121.from_int(rng.randrange(f121.order))
        assert norm_rel(x * y, tower) == norm_rel(x, tower) * norm_rel(y, tower)


def test_pinned_generator_is_checked():
    pinned = build_field(11, 1, None, 7)
    assert pinned.generator.to_int() == 7
    assert pinned.descriptor() == {
        "p": 11,
        "n": 1,
        "modulus": [0, 1],
        "generator": "7",
    }
    g = build_field(11, 2).generator
    assert build_field(11, 2, None, str(g)).generator == g
    with pytest.raises(FieldError):
        build_field(11, 1, None, 3)
