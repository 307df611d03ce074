"""Time tokens: quantizing timestamps onto a discrete grid.

A video of duration T is quantized into N grid points. In relative mode the
grid spans [0, T] with N-1 equal intervals; in absolute mode grid index k
simply means the k-th second. Quantization error is bounded by half a grid
step, and grid points round-trip exactly.
"""

from eventseq import TimeGrid, TimeMode, decode_time, encode_time

duration = 120.0
rel = TimeGrid(TimeMode.RELATIVE, 100)

print("relative grid, N=100, duration 120 s")
for t in (0.0, 37.2, 60.0, 120.0):
    k = encode_time(t, duration, rel)
    back = decode_time(k, duration, rel)
    print(f"  t={t:7.2f}s -> index {k:3d} -> {back:8.3f}s  (error {back - t:+.3f}s)")

print("\nmax quantization error is T / (2(N-1)) =", duration / (2 * 99))

absolute = TimeGrid(TimeMode.ABSOLUTE, 500)
print("\nabsolute grid, N=500: index = floor(seconds)")
for t in (0.0, 37.2, 499.9, 1200.0):
    print(f"  t={t:7.1f}s -> index {encode_time(t, duration, absolute)}")
