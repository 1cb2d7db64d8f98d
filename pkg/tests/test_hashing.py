import pytest

from fedpop.errors import ParameterError
from fedpop.group import Q
from fedpop.hashing import (
    DIGEST_BYTES,
    hash_to_digest,
    hash_to_scalar,
    prg_expand,
)
from fedpop.rng import Drbg


def test_digest_deterministic_and_fixed_length():
    d1 = hash_to_digest(b"tag", [b"a", b"b"])
    d2 = hash_to_digest(b"tag", [b"a", b"b"])
    assert d1 == d2
    assert len(d1) == DIGEST_BYTES == 32


def test_domain_separation_by_tag():
    assert hash_to_digest(b"tag-one", [b"x"]) != hash_to_digest(b"tag-two", [b"x"])


def test_framing_is_unambiguous():
    # ("ab", "c") and ("a", "bc") must hash differently
    assert hash_to_digest(b"t", [b"ab", b"c"]) != hash_to_digest(b"t", [b"a", b"bc"])


def test_non_bytes_part_rejected():
    with pytest.raises(ParameterError):
        hash_to_digest(b"t", ["not-bytes"])


def test_hash_to_scalar_range():
    for i in range(100):
        s = hash_to_scalar(b"t", [i.to_bytes(4, "big")])
        assert 0 <= s < Q


def test_prg_deterministic():
    seed = bytes(32)
    assert prg_expand(seed, 4) == prg_expand(seed, 4)


def test_prg_prefix_property():
    seed = Drbg.from_seed(1).bytes(32)
    assert prg_expand(seed, 2) == prg_expand(seed, 4)[:2]
    assert prg_expand(seed, 7) == prg_expand(seed, 64)[:7]


def test_prg_distinct_seeds_differ():
    rng = Drbg.from_seed(2)
    a = prg_expand(rng.bytes(32), 8)
    b = prg_expand(rng.bytes(32), 8)
    assert a != b


def test_prg_guards():
    with pytest.raises(ParameterError):
        prg_expand(bytes(32), 0)
    with pytest.raises(ParameterError):
        prg_expand(b"short", 4)
