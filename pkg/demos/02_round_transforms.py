"""One AES round, step by step, on the two 64-bit units.

Unit A owns state columns 0-1, unit B columns 2-3. Only ShiftRows needs the
exchange link between them; MixColumns is column-local.
"""

import numpy as np

from aes_imc import reference as ref
from aes_imc.pipeline import ImcEngine
from aes_imc.transforms import (
    ExchangeChannel, addroundkey_step, mixcolumn_step, post_crossing, shiftrow_step, subbyte_step,
)

key = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
plain = bytes.fromhex("00112233445566778899aabbccddeeff")
round_keys = ref.expand_key(key)

eng = ImcEngine()
eng.load_keys([list(k) for k in round_keys])
eng.load_state(np.array(ref.block_to_state(plain), dtype=np.uint8)[None])


def show(label):
    state = eng.read_state()[0]
    print(f"{label:>12}: {ref.state_to_block(state.tolist()).hex()}")


show("plaintext")
for u in eng.units:
    addroundkey_step(u, 0)
show("ark[0]")

for u in eng.units:
    subbyte_step(u, hold=True)   # S-box images stay latched in the amps
link = ExchangeChannel()
for u in eng.units:
    post_crossing(u, link)
reports = [shiftrow_step(u, link) for u in eng.units]
show("sub+shift")
print(f"{'':>12}  bytes over the link: {sum(r.exchanged for r in reports)}")

for u in eng.units:
    rep = mixcolumn_step(u)
    print(f"{'':>12}  unit {u.name}: {rep.lookups} M-2 lookups in {rep.lut_passes} passes, "
          f"{rep.writes} cell writes")
show("mixcolumns")
for u in eng.units:
    addroundkey_step(u, 1)
show("ark[1]")

# the reference round for comparison
s = ref.add_round_key(ref.block_to_state(plain), round_keys[0])
s = ref.add_round_key(ref.mix_columns(ref.shift_rows(ref.sub_bytes(s))), round_keys[1])
print(f"{'reference':>12}: {ref.state_to_block(s).hex()}")
