"""Run every stage end to end on a synthetic scenario and inspect the manifest."""

import json
import tempfile
from pathlib import Path

from leadtime_lab.pipeline import STAGES, RunConfig, run
from leadtime_lab.synth import scenario_to_dict, standard_scenario

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    scenario = tmp / "scenario.json"
    scenario.write_text(json.dumps(scenario_to_dict(standard_scenario(60))))
    result = run(RunConfig(scenario, tmp / "out", stages=STAGES, seed=42))
    print("exit status:", result.status)
    manifest = json.loads(result.manifest_path.read_text())
    for stage, secs in manifest["wall_time_s"].items():
        print(f"  {stage:<10} {secs:6.2f}s")
    print("outputs:", sorted(manifest["outputs"]))
    print(json.loads((tmp / "out" / "breaks.json").read_text())["breaks"])
