"""
Zero-D solver example

Builds a small vessel network with an RCR outlet, runs it for a few cardiac
cycles and prints the outlet pressure and the periodicity check.
Use ``zerod --help`` (or ``python -m zerod_rom.cli``) for the full command line.
"""
import os

from dotenv import load_dotenv

from zerod_rom import (
    IntegratorParams,
    NetworkBuilder,
    TimeSeries,
    check_periodicity,
    run_simulation,
    setup_logging,
)
from zerod_rom.parameters import FlowBCParams, VesselParams, WindkesselParams
from zerod_rom.units import from_cgs_pressure

# Load environment variables from .env file
load_dotenv()


def main():
    """Main example function"""
    setup_logging(os.getenv("ZEROD_LOG_LEVEL", "INFO"))
    print("Zero-D Solver Example")
    print("=" * 40)

    inflow = TimeSeries.from_samples(
        [0.0, 0.1, 0.3, 0.5, 1.0],
        [5.0, 60.0, 20.0, 5.0, 5.0],
    )
    builder = NetworkBuilder()
    builder.add("inflow", FlowBCParams(Q=inflow))
    builder.add("aorta", VesselParams(R_poiseuille=10.0, C=1e-4, L=1.0))
    builder.add("outlet", WindkesselParams(R_proximal=100.0, C=1e-3, R_distal=1000.0, P_distal=0.0))
    builder.chain("inflow", "aorta", "outlet")
    network = builder.build()

    params = IntegratorParams(steps_per_cycle=500)
    results = run_simulation(network, params, n_cycles=8)
    outlet = results.outlet_wire_ids[0]
    mean = results.cycle_mean_pressure(-1, outlet)
    print(f"\nMean outlet pressure, last cycle: {from_cgs_pressure(mean, 'mmHg'):.2f} mmHg")

    report = check_periodicity(results)
    print(f"Periodic within {report.tol:.0%}: {report.converged} (max delta {report.max_delta:.2e})")


if __name__ == "__main__":
    main()
