"""Convergence monitoring: trace export and posterior summaries.

Fits a short chain, exports traces of a few scalar quantities to CSV
(the format round-trips float64 exactly), prints their posterior
summaries, and draws trace plots if matplotlib is available.

Run:  python demos/05_traces_and_summaries.py
"""

from pathlib import Path

from tvpssm import (
    Hyperparameters,
    McmcConfig,
    ModelKind,
    SyntheticSpec,
    generate_seasonal_series,
    run_chain,
    summary_stats,
    trace_export,
)

series = generate_seasonal_series(SyntheticSpec(n=144), seed=7)
config = McmcConfig(n_iter=8_000, burn_in=4_000, seed=7)
draws = run_chain(series, Hyperparameters(), ModelKind.SEASONAL, config)

selection = ["tau", "mu0", "x[144]", "bt1[72]", "b1[144]"]
out = Path("demo_trace.csv")
trace_export(draws, selection, out)
print(f"wrote {draws.n_draws} rows x {len(selection)} columns to {out}")

print("\nquantity     mean        sd       2.5%     median      97.5%")
for name in selection:
    s = summary_stats(draws, name)
    print(f"{name:9s} {s.mean:9.3f} {s.sd:9.3f} {s.q025:9.3f} "
          f"{s.median:9.3f} {s.q975:9.3f}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    cols = np.genfromtxt(out, delimiter=",", skip_header=1)
    fig, axes = plt.subplots(len(selection), 1, figsize=(8, 9), sharex=True)
    for ax, name, col in zip(axes, selection, cols.T):
        ax.plot(col, lw=0.4)
        ax.set_ylabel(name)
    axes[-1].set_xlabel("retained draw")
    fig.tight_layout()
    fig.savefig("demo_traces.png", dpi=120)
    print("\nwrote demo_traces.png")
except ImportError:
    pass
