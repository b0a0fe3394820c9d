import os
from data.defs import SCENARIO_DIR
from gasmix.core.error_handler import ErrorHandler, GasMixError
from gasmix.core.scenario.parser import ScenarioParser
from gasmix.core.timeint.simulation import simulate_pair


# ---------------------------------------------
# MAIN ENTRY POINT
# ---------------------------------------------
def main():
    """Simulate the low-pressure case-study pair and report where the two solutions cross."""
    error_handler = ErrorHandler()
    parser = ScenarioParser(error_handler=error_handler)

    first = parser.load(os.path.join(SCENARIO_DIR, "blended_5mpa_a.yaml"))
    second = parser.load(os.path.join(SCENARIO_DIR, "blended_5mpa_b.yaml"))

    try:
        _, _, report = simulate_pair(first, second, error_handler=error_handler)
    except GasMixError as e:
        error_handler.log_error(e, "main")
        return

    crossed = {column: times for column, times in report.crossings.items() if times}
    if not crossed:
        error_handler.log_info("The two solutions stay ordered at every node.")
    for column, times in sorted(crossed.items()):
        error_handler.log_info(f"{column}: {len(times)} crossing(s), first at t = {times[0]:.2f} hr")


if __name__ == "__main__":
    main()
