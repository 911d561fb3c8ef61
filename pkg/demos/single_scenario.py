"""One full stress -> rejuvenation -> verification day, end to end.

Runs the default scenario (multi-node topology, one workload at a
time, 24 stress hours, one post-rejuvenation hour) and prints the
rendered tables plus a few of the numbers a study would quote.

Run with:  python3 demos/single_scenario.py
"""

from agesim import ScenarioConfig, render_tables, run_scenario


def main():
    config = ScenarioConfig(scenario_id="demo", seed=7)
    report = run_scenario(config)
    print(render_tables(report))

    duration = report.analyses["workload-duration"]
    memory = report.analyses["memory-available"]
    print("highlights:")
    print(
        f"  workload durations trend {duration.trend.verdict.value}"
        f" (Z={duration.trend.z_score:.2f}); rejuvenation recovered"
        f" {duration.ageing.rejuvenation_r:.2f} s of the"
        f" {duration.ageing.ageing_a:.2f} s lost to ageing"
    )
    print(
        f"  memory drained {-memory.ageing.ageing_a * 1024:.0f} MB over the"
        f" stress day ({memory.ageing.sens_slope * 1024:.1f} MB/h)"
    )
    swap = report.analyses["swap-used"]
    print(f"  swap went {swap.trend.verdict.value}, A={swap.ageing.ageing_a:.2f} GB")


if __name__ == "__main__":
    main()
