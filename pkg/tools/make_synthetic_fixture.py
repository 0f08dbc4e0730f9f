"""Write the bundled synthetic percentile fixture.

The file mimics the layout of the Temp12k percentile CSV (121 bins of 100
years, ages descending to 0 BP) but every number is simulated. It exists so
the pipeline and CLI can be exercised without the real dataset.

    python tools/make_synthetic_fixture.py > src/holoarima/data/synthetic_percentiles.csv
"""

import sys

import numpy as np

from holoarima.simulate import SimSpec, simulate_arma

N = 121
SEED = 12000


def main(out=sys.stdout):
    med = simulate_arma(SimSpec(ar=(0.93,), ma=(0.27,), constant=0.19, sigma=0.06, n=N, seed=SEED)).values
    wide5 = simulate_arma(SimSpec(ar=(0.8,), sigma=0.05, n=N, seed=SEED + 5)).values
    wide95 = simulate_arma(SimSpec(ar=(0.8,), sigma=0.05, n=N, seed=SEED + 95)).values
    p5 = med - (0.45 + np.abs(wide5))
    p95 = med + (0.40 + np.abs(wide95))
    ages = np.arange(N - 1, -1, -1) * 100.0  # oldest first in time -> print ages descending
    out.write("# SYNTHETIC fixture: simulated values in the Temp12k percentile layout, not real data.\n")
    out.write(f"# generated by tools/make_synthetic_fixture.py (seed {SEED})\n")
    out.write("ages,global_5,global_median,global_95\n")
    for a, lo, m, hi in zip(ages, p5, med, p95):
        out.write(f"{a:.0f},{lo:.6f},{m:.6f},{hi:.6f}\n")


if __name__ == "__main__":
    main()
