import numpy as np
import pytest
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

ACCEPTANCE_LINES = []

FIPS_KEY = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
FIPS_PLAIN = bytes.fromhex("00112233445566778899aabbccddeeff")
FIPS_CIPHER = "69c4e0d86a7b0430d8cdb78070b4c55a"


def openssl_encrypt(plain: bytes, key: bytes) -> bytes:
    """Independent AES-128 (OpenSSL via ``cryptography``), single ECB block."""
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(plain) + enc.finalize()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
