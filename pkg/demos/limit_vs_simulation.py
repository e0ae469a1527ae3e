"""Compare finite-portfolio default curves with their infinite limit.

Solves the mean-field equations for an even two-class mixture, then
runs Monte-Carlo ensembles at increasing portfolio sizes and reports
how fast the mean empirical class fractions approach the limit curves.
Saves an overlay plot next to this script.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from contagion.ctmc import monte_carlo
from contagion.limit import solve_limit
from contagion.model import FirmClass, build_portfolio, validate_environment

HORIZON = 5.0
REPLICAS = 400
SIZES = (50, 125, 500)


def main():
    env = validate_environment([
        FirmClass(alpha=3.0, beta=3.0, gamma=3.0, exposure=1.0, weight=0.5),
        FirmClass(alpha=0.1, beta=0.1, gamma=1.0, exposure=1.0, weight=0.5),
    ])
    sol = solve_limit(env, HORIZON, 1024)

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for k, ax in enumerate(axes):
        ax.plot(sol.t_grid, sol.default_prob[:, k], "k-", lw=2,
                label="limit")
        ax.set_title(f"class {k + 1}")
        ax.set_xlabel("t")
    axes[0].set_ylabel("default fraction")

    print(f"{'N':>5}  {'sup gap class 1':>16}  {'sup gap class 2':>16}")
    for n in SIZES:
        portfolio = build_portfolio(env, n, "deterministic_proportions", 0)
        stats = monte_carlo(portfolio, HORIZON, sol.t_grid, REPLICAS, (), 0)
        gaps = np.abs(stats.mean_class_fractions - sol.default_prob).max(axis=0)
        print(f"{n:>5}  {gaps[0]:>16.4f}  {gaps[1]:>16.4f}")
        for k, ax in enumerate(axes):
            ax.plot(stats.t_grid, stats.mean_class_fractions[:, k], "--",
                    lw=1, label=f"N={n}")

    axes[0].legend()
    out = pathlib.Path(__file__).with_name("limit_vs_simulation.png")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(f"\nwrote {out}")


if __name__ == "__main__":
    main()
