from __future__ import annotations

from enercoop.model import NetworkConfig, Objective, Scenario
from enercoop.output import emit_csv, emit_plotdata, print_sweep_summary, rho_table
from enercoop.sweep import SweepSpec, run_sweep, winners
from enercoop.utils.logger import LOGGER, Level, setup_logger

if __name__ == "__main__":
    setup_logger(Level.NOTICE, destination="output.log", disable_third_party_warnings=True)

    # U1 moves along the U2-D segment (d2 = 2, du = d2 - d1) with equal energy arrival rates
    base = NetworkConfig.default().with_values(X1=100.0, X2=100.0)
    spec = SweepSpec.distance(base, start=0.2, stop=1.8, step=0.2)

    table = run_sweep(spec, workers=4)
    print_sweep_summary(table)

    emit_csv(table, "./results/distance.csv")
    emit_plotdata(table, "./results/distance.plotdata.csv")

    ratios = rho_table(table)
    ratios.to_csv("./results/distance.rho.csv", float_format="%g")
    LOGGER.notice("screened ratios (columns are d1):")
    for line in ratios.to_string().splitlines():
        LOGGER.notice(line)

    for objective in Objective:
        best = winners(table[table["objective_kind"] == objective.value])
        relayed = (best["scenario"] == Scenario.S1.value).sum()
        LOGGER.notice("%s: S1 wins at %d of %d distances", objective.value, relayed, len(best))
