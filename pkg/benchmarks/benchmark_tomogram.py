# benchmarks/benchmark_tomogram.py
import time
from src.tomogram.tomogram import Indicator, SliceKind, log_symmetric_etas, sweep_indicator

def benchmark(points=1024):
    etas = log_symmetric_etas(20.0, 49)

    for indicator in (Indicator.bd, Indicator.kl):
        start = time.time()
        results = sweep_indicator(indicator, SliceKind.average, 1, etas, points=points)
        end = time.time()
        print(f"{indicator.value}: {len(results)} averaged points in {end - start:.2f}s")
        print(f"Latency per point: {(end - start)/len(results)*1000:.2f}ms")

    start = time.time()
    ipr = sweep_indicator(Indicator.ipr, SliceKind.position, 5, [0.25], points=points)
    end = time.time()
    print(f"ipr at n_r = 5: {ipr[0].value:.6f} in {end - start:.2f}s")

if __name__ == "__main__":
    benchmark()
