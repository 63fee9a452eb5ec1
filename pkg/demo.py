#!/usr/bin/env python3
"""
Demo script walking through the engine on the de Sitter horizon and the
flat torus. Uses a small sample count so it finishes in seconds.
"""

import os
import sys

import numpy as np

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "src"))

from src.catalog import load
from src.rigging import build_frame, totally_geodesic_report
from src.runner import CheckRunner
from src.transverse import curvat_identity_check, flow_classification


def demo_horizon():
    """Frame, curvature identity and a short check run on the de Sitter horizon."""
    print("=" * 60)
    print("Rigged null hypersurfaces - Demo")
    print("=" * 60)
    print()

    print("1. Loading the de Sitter horizon scenario...")
    scenario = load("desitter_horizon")
    hypersurface = scenario.hypersurface
    print(f"   ✓ Coordinates: {', '.join(scenario.spacetime.coordinates)}")
    print(f"   ✓ Level function: {hypersurface.level_source}, rigging: {list(hypersurface.rigging.sources)}")
    print()

    print("2. Building the rigged frame at a sample point...")
    point = hypersurface.samples(1, scenario.seed)[0]
    frame = build_frame(hypersurface, point)
    print(f"   ✓ Point: {np.round(point, 4).tolist()}")
    print(f"   ✓ ξ = {np.round(frame.xi, 6).tolist()}")
    print(f"   ✓ N = {np.round(frame.null_rigging, 6).tolist()}")
    print()

    print("3. Second fundamental form over 20 samples...")
    report = totally_geodesic_report(hypersurface, samples=20, seed=scenario.seed)
    print(f"   ✓ max |B| = {report['max_abs_B']:.3e} (totally geodesic: {report['totally_geodesic']})")
    print()

    print("4. Transverse curvature against the rigged and ambient curvature...")
    result = curvat_identity_check(hypersurface, point, frame=frame)
    print(f"   ✓ K^T = {result['transverse']:.10f}, K~ = {result['rigged']:.10f}, K = {result['ambient']:.10f}")
    print(f"   ✓ dω(X, Y) = {result['domega']:.3e}")
    flow = flow_classification(hypersurface, samples=10, seed=scenario.seed)
    print(f"   ✓ The flow of ξ is {flow['classification']} (mean K^T = {flow['mean']:.8f})")
    print()

    print("5. Running the frame and curvat suites with 10 samples...")
    runner = CheckRunner(verbose=False)
    runner.set_scenario(scenario)
    check_report = runner.run(["frame", "curvat"], samples=10)
    print(check_report.to_text())


def demo_torus():
    """A small periodic geodesic hunt on the flat torus."""
    print("6. Hunting periodic geodesics on the flat torus (levels 0, 1)...")
    runner = CheckRunner(verbose=False)
    runner.set_scenario(load("flat_torus"))
    table = runner.hunt(levels=(0.0, 1.0))
    print(table[["guess", "velocity", "closure", "causal"]].to_string(index=False))
    print()

    print("=" * 60)
    print("Next steps:")
    print("1. python main.py list")
    print("2. python main.py run desitter_horizon --suites curvat --samples 200 --seed 7")
    print("3. python main.py hunt flat_torus")
    print("=" * 60)


if __name__ == "__main__":
    demo_horizon()
    demo_torus()
