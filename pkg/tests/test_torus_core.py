import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locpir.errors import DimensionMismatchError, ParameterError
from locpir.models import SecurityLevel, TlweParams
from locpir.torus_core import (
    HALF,
    MU_ONE,
    MU_ZERO,
    NoiseSampler,
    SecretKey,
    TlweSample,
    TorusElement,
    add_samples,
    decrypt_bit,
    decrypt_bits,
    encode_bit,
    encrypt_bit,
    encrypt_bits,
    encrypt_zero,
    keygen,
    neg_sample,
    phase,
    scale_sample,
    trivial_sample,
)

words = st.integers(min_value=0, max_value=2**32 - 1)


def test_bit_encoding_constants():
    assert encode_bit(0).value == MU_ZERO == 0xE0000000
    assert encode_bit(1).value == MU_ONE == 0x20000000
    assert encode_bit(1).to_fraction() == 1 / 8
    assert encode_bit(0).to_fraction() == -1 / 8
    with pytest.raises(ParameterError):
        encode_bit(2)


def test_named_parameter_sets():
    p80 = TlweParams.for_level("sec80")
    p128 = TlweParams.for_level(128)
    assert (p80.n, p128.n) == (540, 630)
    assert p80.sigma == 2.0**-20.2
    assert p128.sigma == 2.0**-13.8
    assert p128.security_level is SecurityLevel.SEC128
    with pytest.raises(ValueError):
        TlweParams(n=500, sigma=2.0**-20.2, security_level="sec80")
    with pytest.raises(ValueError):
        TlweParams(n=0, sigma=0.0)


def test_sample_sizes(params80, params128, sk80, sampler80):
    assert params80.sample_nbytes == 2164
    assert params128.sample_nbytes == 2524
    assert len(encrypt_bit(1, sk80, sampler80).to_bytes()) == 2164


@given(a=words, b=words, k=st.integers(min_value=-4, max_value=4))
def test_torus_arithmetic_wraps_modulo_one(a, b, k):
    x, y = TorusElement(a), TorusElement(b)
    assert (x + y).value == (a + b) % 2**32
    assert (x - y).value == (a - b) % 2**32
    assert (-x + x).value == 0
    assert (x * k).value == (a * k) % 2**32


def test_encrypt_decrypt_both_bits(sk80, sampler80):
    for bit in (0, 1) * 20:
        assert decrypt_bit(encrypt_bit(bit, sk80, sampler80), sk80) == bit


@pytest.mark.slow
@pytest.mark.parametrize("level", [80, 128])
def test_random_bits_never_fail_to_decrypt(level, sk80, sk128):
    sk = sk80 if level == 80 else sk128
    sampler = NoiseSampler.for_params(sk.params, seed=level + 1)
    bits = np.random.default_rng(level).integers(0, 2, size=10**5)
    failures = sum(decrypt_bit(encrypt_bit(int(b), sk, sampler), sk) != b for b in bits)
    assert failures == 0


def test_batch_helpers(sk80, sampler80):
    bits = [1, 0, 0, 1, 1, 0, 1]
    assert decrypt_bits(encrypt_bits(bits, sk80, sampler80), sk80) == bits


def test_decryption_tie_rule(params80, sk80):
    assert decrypt_bit(trivial_sample(TorusElement(0), params80), sk80) == 1
    assert decrypt_bit(trivial_sample(TorusElement(HALF), params80), sk80) == 1
    assert decrypt_bit(trivial_sample(TorusElement(HALF + 1), params80), sk80) == 0
    assert decrypt_bit(trivial_sample(TorusElement(2**32 - 1), params80), sk80) == 0


def test_trivial_sample_decrypts_under_any_key(params80):
    other = keygen(params80, seed=42)
    for bit in (0, 1):
        c = trivial_sample(encode_bit(bit), params80)
        assert c.is_trivial
        assert decrypt_bit(c, other) == bit


def test_zero_sample_phase_is_small(sk80, sampler80):
    for _ in range(50):
        assert abs(phase(encrypt_zero(sk80, sampler80), sk80).signed) < 2**32 // 16


@settings(max_examples=50, deadline=None)
@given(m1=words, m2=words, k=st.integers(min_value=-4, max_value=4))
def test_phase_is_linear(sk80, m1, m2, k):
    sampler = NoiseSampler(0.0, seed=m1 ^ m2)
    c1 = encrypt_bit(1, sk80, sampler)
    c1 = add_samples(c1, trivial_sample(TorusElement(m1), sk80.params))
    c2 = add_samples(encrypt_bit(0, sk80, sampler), trivial_sample(TorusElement(m2), sk80.params))
    p1, p2 = phase(c1, sk80), phase(c2, sk80)
    assert phase(add_samples(c1, c2), sk80) == p1 + p2
    assert phase(neg_sample(c1), sk80) == -p1
    assert phase(scale_sample(k, c2), sk80) == p2 * k


def test_scale_factor_is_bounded(sk80, sampler80):
    with pytest.raises(ParameterError):
        scale_sample(5, encrypt_bit(1, sk80, sampler80))


def test_dimension_mismatch(sk80, sampler80, params128):
    c80 = encrypt_bit(1, sk80, sampler80)
    c128 = trivial_sample(encode_bit(1), params128)
    with pytest.raises(DimensionMismatchError):
        add_samples(c80, c128)
    with pytest.raises(DimensionMismatchError):
        phase(c128, sk80)


def test_sample_bytes_round_trip(sk80, sampler80):
    c = encrypt_bit(0, sk80, sampler80)
    assert TlweSample.from_bytes(c.to_bytes(), 540) == c
    with pytest.raises(DimensionMismatchError):
        TlweSample.from_bytes(c.to_bytes(), 630)


def test_same_seed_same_ciphertexts(params80):
    sk1, sk2 = keygen(params80, seed=5), keygen(params80, seed=5)
    assert sk1 == sk2
    c1 = encrypt_bit(1, sk1, NoiseSampler.for_params(params80, seed=3))
    c2 = encrypt_bit(1, sk2, NoiseSampler.for_params(params80, seed=3))
    assert c1 == c2


def test_spawned_streams_are_independent_and_reproducible(params80):
    sampler = NoiseSampler.for_params(params80, seed=8)
    a = sampler.spawn(1).uniform_mask(16)
    b = sampler.spawn(2).uniform_mask(16)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, NoiseSampler.for_params(params80, seed=8).spawn(1).uniform_mask(16))


@pytest.mark.parametrize("seed", [0, 42, 1234])
def test_key_is_independent_of_masks_under_a_shared_seed(params80, seed):
    sk = keygen(params80, seed=seed)
    sampler = NoiseSampler.for_params(params80, seed=seed)
    assert not np.array_equal(sk.bits, NoiseSampler.for_params(params80, seed=seed).key_bits(params80.n))

    mask = encrypt_zero(sk, sampler).mask
    i = np.arange(params80.n)
    recovered = (mask[i // 4] >> (8 * (i % 4) + 7)) & 1
    matches = int(np.sum(recovered == sk.bits))
    # 540 fair coins: mean 270, sd ~11.6
    assert 200 <= matches <= 340
    assert all(not np.array_equal(sampler.key_bits(params80.n), sk.bits) for _ in range(8))


def test_key_file_round_trip(tmp_path, sk80):
    path = tmp_path / "client.key"
    sk80.save(path)
    assert path.read_bytes()[:4] == b"LPSK"
    assert SecretKey.load(path) == sk80


def test_key_file_rejects_bad_magic(tmp_path, sk80):
    path = tmp_path / "bad.key"
    path.write_bytes(b"XXXX" + sk80.to_bytes()[4:])
    with pytest.raises(ValueError):
        SecretKey.load(path)
    with pytest.raises(FileNotFoundError):
        SecretKey.load(tmp_path / "missing.key")


def test_negative_sigma_rejected():
    with pytest.raises(ParameterError):
        NoiseSampler(-1.0)
