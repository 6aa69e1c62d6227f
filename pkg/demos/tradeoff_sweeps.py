"""Desk-scale experiment sweeps: tradeoff weight and DAC resolution.

Two seeded sweeps over the small configuration, each averaged over ten
scenario draws per point. Results land in data/ as CSVs; the aggregate
tables print here. Takes a couple of minutes.
"""

from pathlib import Path

from cfris.config import desk_config
from cfris.harness import SweepSpec, run_sweep

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DATA_DIR.mkdir(exist_ok=True)


def show(aggregates):
    print("  value    method      mean SE     mean EE     mean P_sys  ok")
    for a in aggregates:
        print(f"  {a.value!s:6}   {a.method:9}  {a.mean_se:9.4f}  "
              f"{a.mean_ee:9.4f}   {a.mean_p_sys:9.4f}  {a.n_ok}/{a.n_trials}")


# Tradeoff weight sweep, optimized against random surface phases. The random
# baseline keeps the same hardware and budgets; only the coefficients differ.
print("== kappa sweep, ARIS vs RND_ARIS, 10 trials per point ==")
spec = SweepSpec(axis="kappa", values=(0.0, 0.25, 0.5, 0.75, 1.0),
                 methods=("ARIS", "RND_ARIS"), trials=10)
rows, aggregates = run_sweep(spec, out_path=DATA_DIR / "desk_kappa_sweep.csv")
show(aggregates)
print(f"rows written to {DATA_DIR / 'desk_kappa_sweep.csv'}")

# DAC resolution sweep at the efficiency-leaning end of the tradeoff: more
# bits buy SINR but the converter power grows exponentially.
print("\n== dac_bits sweep, kappa=1, 10 trials per point ==")
spec = SweepSpec(axis="dac_bits", values=(1, 2, 3, 4, 6, 8), methods=("ARIS",),
                 trials=10, config=desk_config().replace(kappa=1.0))
rows, aggregates = run_sweep(spec, out_path=DATA_DIR / "desk_dac_bits_sweep.csv")
show(aggregates)
print(f"rows written to {DATA_DIR / 'desk_dac_bits_sweep.csv'}")
