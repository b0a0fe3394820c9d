import os
import sys
from data.defs import SCENARIO_DIR
from gasmix.cli.app import EXIT_OK, main

PAIRS = ["blended_5mpa", "blended_10mpa", "h2_injection_5mpa", "h2_injection_10mpa", "h2_onset"]


def run_case_pairs(out_root: str = "out"):
    """Run every shipped case-study pair through the ``pair`` command, one output directory each."""
    failed = []
    for name in PAIRS:
        code = main([
            "pair",
            "--scenario", os.path.join(SCENARIO_DIR, f"{name}_a.yaml"),
            "--other", os.path.join(SCENARIO_DIR, f"{name}_b.yaml"),
            "--out", os.path.join(out_root, name),
        ])
        if code != EXIT_OK:
            failed.append(name)
    return failed


if __name__ == "__main__":
    sys.exit(1 if run_case_pairs(*sys.argv[1:2]) else 0)
