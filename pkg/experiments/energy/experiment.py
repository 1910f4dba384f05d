from __future__ import annotations

from enercoop.model import Case, NetworkConfig, Objective, Scenario
from enercoop.output import emit_csv, emit_plotdata, print_sweep_summary, rho_table
from enercoop.sweep import SweepSpec, run_sweep, series
from enercoop.utils.logger import LOGGER, Level, setup_logger

if __name__ == "__main__":
    setup_logger(Level.NOTICE, destination="output.log", disable_third_party_warnings=True)

    # X2 is fixed to 100 mW, so X1 runs from a quarter to three times X2
    base = NetworkConfig.default().with_values(X2=100.0)
    spec = SweepSpec.energy(base, start=25.0, stop=300.0, step=25.0)

    table = run_sweep(spec, workers=4)
    print_sweep_summary(table)

    emit_csv(table, "./results/energy.csv")
    emit_plotdata(table, "./results/energy.plotdata.csv")

    ratios = rho_table(table)
    ratios.columns = [f"{value / base.X2:g}" for value in ratios.columns]
    ratios.to_csv("./results/energy.rho.csv", float_format="%g")
    LOGGER.notice("screened ratios (columns are X1/X2):")
    for line in ratios.to_string().splitlines():
        LOGGER.notice(line)

    # where the throughputs of both users meet when U1 transmits first and relays
    B1 = series(table, Scenario.S1, Case.A, Objective.WEIGHTED_SUM, "B1_bits")
    B2 = series(table, Scenario.S1, Case.A, Objective.WEIGHTED_SUM, "B2_bits")
    crossings = [(low, high) for low, high in zip(B1.index[:-1], B1.index[1:], strict=True) if (B1[low] - B2[low]) * (B1[high] - B2[high]) <= 0]
    LOGGER.notice("S1-A: B1 and B2 cross between X1 = %s", ", ".join(f"[{low:g}, {high:g}]" for low, high in crossings) or "never")
