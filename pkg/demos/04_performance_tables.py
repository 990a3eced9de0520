"""Throughput and energy from the closed-form model, against the printed tables.

The bundled CSV holds the published rows; ``check_row`` lists every figure
that does not back-compute within 0.5 %.
"""

from aes_imc import perf
from aes_imc.perf import PerfParams

p = PerfParams(f_max=108.9e6, b_size=128, latency=26, power=0.098)
rep = perf.evaluate(p)
print(f"Thr   {rep.thr / 1e6:8.2f} Mbps")
print(f"Thr*  {rep.thr_rf / 1e6:8.2f} Mbps at 13.56 MHz")
print(f"E     {rep.energy_per_block * 1e6:8.4f} uJ/block, {rep.energy_per_bit * 1e9:.3f} nJ/bit")

t4 = perf.table_iv_row(PerfParams(30e6, 128, 26, power=0.098))
print(f"30 MHz: {t4.thr / 1e6:.2f} Mbps, {t4.energy_per_block * 1e9:.1f} nJ/block")

n = perf.engines_for_dpr(445e9, 147.6e6)
print(f"engines for 445 GB/s at 147.6 Mbps each: {n}")

print("\nprinted vs computed:")
for row in perf.load_reported_designs():
    notes = perf.check_row(row)
    status = "ok" if not notes else "; ".join(notes)
    print(f"  table {row.metadata['table']:>3} {row.design:<22} {status}")
