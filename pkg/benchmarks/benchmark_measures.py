# benchmarks/benchmark_measures.py
import time
from src.measures.measures import numeric_entropies, schmidt_numeric
from src.model.oscillator import ProductEigenstate, default_position_grid, from_ratio, reduced_density_kernel

def benchmark(points=1024):
    etas = [0.25, 0.5, 1.0, 2.0, 4.0]

    start = time.time()
    pairs = [numeric_entropies(from_ratio(eta), 2, points=points) for eta in etas]
    end = time.time()

    print(f"SVD route: {len(etas)} states at {points} points in {end - start:.2f}s")
    print(f"Latency per state: {(end - start)/len(etas)*1000:.2f}ms")
    print(f"SVNE range: {min(p.svne for p in pairs):.6f} .. {max(p.svne for p in pairs):.6f}")

    state = ProductEigenstate(params=from_ratio(4.0), n_r=2)
    grid = default_position_grid(state, points=points)
    start = time.time()
    spectrum = schmidt_numeric(reduced_density_kernel(state, grid), grid)
    end = time.time()
    print(f"Eigh route at eta = 4: {end - start:.2f}s, {len(spectrum.coefficients)} coefficients kept")

if __name__ == "__main__":
    benchmark()
