"""Plain AES-128 reference: field arithmetic, table generators, key schedule, cipher.

Everything here is a pure function over ``bytes``/``int`` and is used as the
ground truth for the crossbar engine and to program its LUT rows.

State layout is column-major: byte ``i`` of a block sits at row ``i % 4``,
column ``i // 4``.
"""

from __future__ import annotations

import string

REDUCTION_POLY = 0x11B
AFFINE_CONST = 0x63
N_ROUNDS = 10
BLOCK_BYTES = 16

RCON = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)


class KeyLengthError(ValueError):
    pass


class BlockLengthError(ValueError):
    pass


def xtime(x: int) -> int:
    """Multiply by 2 in GF(2^8)."""
    x <<= 1
    if x & 0x100:
        x ^= REDUCTION_POLY
    return x & 0xFF


def gf_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a = xtime(a)
        b >>= 1
    return out


def gf_inv(x: int) -> int:
    # x^254 == x^-1 for x != 0; maps 0 to 0 as AES requires
    result = 1
    base = x
    exp = 254
    while exp:
        if exp & 1:
            result = gf_mul(result, base)
        base = gf_mul(base, base)
        exp >>= 1
    return result if x else 0


def _rotl8(x: int, n: int) -> int:
    return ((x << n) | (x >> (8 - n))) & 0xFF


def affine(x: int) -> int:
    return x ^ _rotl8(x, 1) ^ _rotl8(x, 2) ^ _rotl8(x, 3) ^ _rotl8(x, 4) ^ AFFINE_CONST


def gen_sbox() -> bytes:
    """256-entry S-box: multiplicative inverse followed by the affine map."""
    return bytes(affine(gf_inv(x)) for x in range(256))


def gen_m2() -> bytes:
    """256-entry multiply-by-2 table (xtime)."""
    return bytes(xtime(x) for x in range(256))


SBOX = gen_sbox()
M2 = gen_m2()


def _check_block(data, name="block"):
    data = bytes(data)
    if len(data) != BLOCK_BYTES:
        raise BlockLengthError(f"{name} must be {BLOCK_BYTES} bytes, got {len(data)}")
    return data


def expand_key(key) -> list[bytes]:
    """AES-128 key schedule. Returns 11 round keys of 16 bytes each."""
    key = bytes(key)
    if len(key) != BLOCK_BYTES:
        raise KeyLengthError(f"key must be 16 bytes, got {len(key)}")
    words = [list(key[i:i + 4]) for i in range(0, 16, 4)]
    for i in range(4, 44):
        temp = list(words[i - 1])
        if i % 4 == 0:
            temp = temp[1:] + temp[:1]
            temp = [SBOX[b] for b in temp]
            temp[0] ^= RCON[i // 4 - 1]
        words.append([a ^ b for a, b in zip(words[i - 4], temp)])
    return [bytes(sum(words[4 * r:4 * r + 4], [])) for r in range(N_ROUNDS + 1)]


# -- state helpers -----------------------------------------------------------

def block_to_state(block) -> list[list[int]]:
    """16 bytes -> 4x4 list ``state[row][col]`` (column-major fill)."""
    block = _check_block(block)
    return [[block[4 * c + r] for c in range(4)] for r in range(4)]


def state_to_block(state) -> bytes:
    return bytes(state[r][c] for c in range(4) for r in range(4))


def sub_bytes(state):
    return [[SBOX[b] for b in row] for row in state]


def shift_rows(state):
    return [row[r:] + row[:r] for r, row in enumerate(state)]


def mixcolumn_ref(col) -> bytes:
    """One column times the fixed circulant (2 3 1 1) matrix over GF(2^8)."""
    a = list(col)
    if len(a) != 4:
        raise ValueError("column must have 4 bytes")
    return bytes(
        gf_mul(a[r], 2) ^ gf_mul(a[(r + 1) % 4], 3) ^ a[(r + 2) % 4] ^ a[(r + 3) % 4]
        for r in range(4)
    )


def mix_columns(state):
    cols = [mixcolumn_ref([state[r][c] for r in range(4)]) for c in range(4)]
    return [[cols[c][r] for c in range(4)] for r in range(4)]


def add_round_key(state, round_key):
    k = block_to_state(round_key)
    return [[state[r][c] ^ k[r][c] for c in range(4)] for r in range(4)]


def aes128_encrypt(plain, key) -> bytes:
    plain = _check_block(plain, "plaintext")
    keys = expand_key(key)
    state = add_round_key(block_to_state(plain), keys[0])
    for rnd in range(1, N_ROUNDS + 1):
        state = shift_rows(sub_bytes(state))
        if rnd != N_ROUNDS:
            state = mix_columns(state)
        state = add_round_key(state, keys[rnd])
    return state_to_block(state)


# -- hex interchange -----------------------------------------------------------

def parse_hex_block(text: str, name="block") -> bytes:
    """Parse exactly 32 hex digits (no separators) into a 16-byte block."""
    text = text.strip()
    if not all(c in string.hexdigits for c in text):
        raise ValueError(f"{name}: expected hex digits without separators, got {text!r}")
    if len(text) % 2:
        raise ValueError(f"{name}: odd number of hex digits")
    return _check_block(bytes.fromhex(text), name)


def to_hex(block) -> str:
    return bytes(block).hex()
