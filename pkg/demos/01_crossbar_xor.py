"""XOR inside a memristor crossbar.

Two rows of 4-bit cells are read one after the other into a summing
amplifier: the first lands on the sampling capacitor, the second on the
latch. Committing the amp leaves the XOR in the latch, ready to be staged in
the row buffer and written back.
"""

from aes_imc.crossbar import CrossbarArray, RowBuffer, SummingAmp, activate_read, write_back, xor_commit

xbar = CrossbarArray(rows=4, cols=8)

# data nibbles on word line 0, key nibbles on word line 1
for col, (d, k) in enumerate(zip([0xA, 0x3, 0xF, 0x0], [0x5, 0x3, 0x1, 0x9])):
    xbar.write_cell(0, col, d)
    xbar.write_cell(1, col, k)

buf = RowBuffer(8)
for col in range(4):
    amp = SummingAmp()
    activate_read(xbar, 0, col, amp, "capacitor")
    activate_read(xbar, 1, col, amp, "latch")
    buf.store(col, xor_commit(amp))

written = write_back(xbar, buf, 2)
print(f"cells written back: {written}")
print(xbar.dump())
# row 2 now reads f0e90000
