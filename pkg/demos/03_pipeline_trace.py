"""Timed trace of a short stream and the effect of the schedule.

The default schedule packs a block into 26 cycles. Changing the schedule
moves the cycle stamps but never the ciphertext.
"""

from aes_imc.pipeline import CycleSchedule, run_stream

key = bytes(range(16))
blocks = [bytes([i]) * 16 for i in range(4)]

cts, trace = run_stream(blocks, key)
print("default schedule:", CycleSchedule().total_latency, "cycles/block,",
      "makespan", trace.makespan)
for line in trace.lines()[:6]:
    print("  ", line)

slow = CycleSchedule(fused=())          # every stage in its own slot
cts_slow, trace_slow = run_stream(blocks, key, slow)
print("unfused schedule:", slow.total_latency, "cycles/block, makespan", trace_slow.makespan)
print("same ciphertexts:", cts == cts_slow)

_, piped = run_stream(blocks, key, overlap=True, ii=8)
print("overlapped, II=8: makespan", piped.makespan)
