"""End-to-end experiment: a JSON spec, a sweep, and a CSV report.

The experiment layer turns a declarative JSON spec into a sweep over SINR
(or Eb/N0, finger count, or user count), evaluating closed forms and/or the
simulator at each point, and writes a CSV plus a manifest that reproduces
the run. The same spec drives the CLI:

    thuwb compare demos/out/awgn_sweep.json
"""

import json
import pathlib

from thuwb.experiment import parse_spec, run

out_dir = pathlib.Path(__file__).resolve().parent / "out"
out_dir.mkdir(exist_ok=True)

spec_dict = {
    "n_users": 10,
    "n_frames": 15,
    "n_chips_per_frame": 5,
    "e1": 0.5,
    "interferer_energy": 1.0,
    "channel": {"source": "awgn"},
    "sync_mode": "async",
    "pulse": {"kind": "gaussian_doublet"},
    "n_drops": 50,
    "symbols_per_drop": 1000,
    "seed": 42,
    "sweep": {"variable": "sinr_db", "values": [0.0, 2.0, 4.0]},
    "analytic_modes": ["awgn_sync", "awgn_async"],
    "output_path": str(out_dir / "awgn_sweep.csv"),
}
spec_path = out_dir / "awgn_sweep.json"
spec_path.write_text(json.dumps(spec_dict, indent=2))

result = run(parse_spec(str(spec_path)), compare=True)
print(f"spec     : {spec_path}")
print(f"report   : {result.csv_path}")
print(f"manifest : {result.manifest_path}\n")
print(open(result.csv_path).read())
