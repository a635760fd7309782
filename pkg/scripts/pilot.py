"""Pilot run at acceptance scale with an independent seed.

Writes tests/fixtures/pilot.json.  The acceptance suite asserts the fixed
thresholds; this file records what an independent seed produced, so a
regression in the simulation shows up as a large shift from these values.
"""

import json
import sys
import time
from pathlib import Path

from bridgegh import harness

PILOT_SEED = 9001

RUNS = {
    "lemma1": dict(study="lemma1", family="rademacher", schedule=[[100, 100], [1600, 1600]],
                   t_list=[0.5], trials=100),
    "theorem1": dict(study="theorem1", family="gaussian-isotropic",
                     schedule=[[100, 100], [400, 400], [1600, 1600], [6400, 6400]],
                     m=20, trials=200, epsilon_list=[0.1]),
    "theorem2": dict(study="theorem2", family="pareto-sphere", alpha=0.5,
                     schedule=[[2000, 2000]], m=20, trials=300),
    "truncation": dict(study="truncation", family="pareto-sphere", alpha=0.5,
                       schedule=[[2000, 2000]], s_list=[0.1, 0.01, 0.001], trials=100),
    "angular": dict(study="angular", family="pareto-sphere", alpha=0.5,
                    schedule=[[100, 100], [4000, 100], [10000, 100]], trials=1000),
}


def main(names):
    out_path = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "pilot.json"
    results = json.loads(out_path.read_text()) if out_path.exists() else {}
    for name in names or RUNS:
        config = harness.StudyConfig.from_dict({**RUNS[name], "seed": PILOT_SEED})
        start = time.time()
        report = harness.run_study(config)
        rows = [[d, n, stat, agg, value] for d, n, stat, agg, value in report.summary]
        results[name] = {"seed": PILOT_SEED, "seconds": round(time.time() - start, 1), "summary": rows}
        print(name, results[name]["seconds"], "s", flush=True)
    out_path.write_text(json.dumps(results, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1:])
