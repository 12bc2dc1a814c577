"""Benchmark the compiled integration kernel against the pure-numpy fallback.

Runs the standard strong-driving scenario (omega = 1e8 rad/s, inverted Morse
g0 = 1e8, kappa = 1e5) over the default log grid in all three representation
modes and reports wall time and agreement.

Usage: python3 benchmarks/compare_backends.py [--repeat N]
"""

import argparse
import os
import time

import numpy as np

os.environ.setdefault("QUASIMEAS_BACKEND", "auto")

from quasimeas import backend  # noqa: E402
from quasimeas.dynamics import (  # noqa: E402
    DeviceConfig,
    IntegratorConfig,
    integrate_bloch,
    integrate_density,
    integrate_propagator,
)
from quasimeas.geometry import DeviceGeometry  # noqa: E402
from quasimeas.potentials import InvertedMorse  # noqa: E402
from quasimeas.states import ObservableSpec, density_from_bloch  # noqa: E402


def scenario():
    spec = ObservableSpec(omega_rate=1e8, alpha=np.pi / 2, beta_az=-np.pi / 6)
    dev = DeviceConfig(
        geometry=DeviceGeometry(theta=3 * np.pi / 4, Theta=np.pi / 3, chart_branch=1),
        profile=InvertedMorse(g0_rate=1e8, kappa=1e5),
    )
    n0 = np.array([0.0, -0.5, -0.5])
    return spec, dev, n0


def run_mode(mode, spec, dev, n0, cfg):
    if mode == "bloch":
        return integrate_bloch(n0, spec, dev, 1, cfg).n
    if mode == "density":
        return integrate_density(density_from_bloch(n0), spec, dev, 1, cfg).n
    kh = integrate_propagator(spec, dev, 1, cfg)
    return kh.reconstruct(density_from_bloch(n0))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not backend.HAVE_COMPILED:
        print("compiled extension not built; only the python backend is available")
    spec, dev, n0 = scenario()
    cfg = IntegratorConfig()
    print(f"{'mode':<12} {'backend':<10} {'best wall (s)':>14}   max |diff|")
    for mode in ("bloch", "density", "propagator"):
        results = {}
        for choice in ("compiled", "python"):
            if choice == "compiled" and not backend.HAVE_COMPILED:
                continue
            os.environ["QUASIMEAS_BACKEND"] = choice
            best = np.inf
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                out = run_mode(mode, spec, dev, n0, cfg)
                best = min(best, time.perf_counter() - t0)
            results[choice] = (best, out)
            diff = ""
            if "compiled" in results and choice == "python":
                diff = "%.2e" % np.max(np.abs(results["python"][1] - results["compiled"][1]))
            print(f"{mode:<12} {choice:<10} {best:>14.3f}   {diff}")
        if "compiled" in results and "python" in results:
            speedup = results["python"][0] / results["compiled"][0]
            print(f"{mode:<12} speedup (python/compiled): {speedup:.1f}x")
    os.environ["QUASIMEAS_BACKEND"] = "auto"


if __name__ == "__main__":
    main()
