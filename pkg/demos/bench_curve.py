"""Translation time as the number of constraints grows.

Generates scenarios with 100 cameras and 100 to 500 frame-rate constraints,
times the rule-engine fixpoint five times each and prints the median curve.
Every run's derived-triple count is checked against its closed form.

Pass ``--quick`` for a smaller sweep.
"""

from __future__ import annotations

import sys

from sdnqos import bench


def main(quick: bool = False) -> None:
    sizes = (20, 40, 60) if quick else (100, 200, 300, 400, 500)
    results = bench.sweep(devices=20 if quick else 100, constraints=sizes, runs=3 if quick else 5)
    for r in results:
        expected = bench.expected_derived(r.scenario)
        ok = "ok" if r.derived[0] == expected else f"expected {expected}"
        print(f"{r.scenario.constraints:4d} constraints: median {r.median_ms:8.1f} ms, "
              f"max {max(r.elapsed_ms):8.1f} ms, {r.derived[0]} derived ({ok})")
    print()
    print(bench.curve(results), end="")


if __name__ == "__main__":
    main("--quick" in sys.argv)
