"""
Driving the command line tool
=============================

The ``fracrate`` command wraps the library.  Here it is called through
``fracrate.cli.main`` so the exit codes can be printed; from a shell the
equivalent is ``fracrate symbols --s 0.9 0.99 --xi 0.5 1 2 5 --output-dir out``.
"""
import json
import os
import tempfile

from fracrate.cli import main

out = tempfile.mkdtemp(prefix="fracrate_")

# symbol tables on a short xi grid; exit 0 because every bound holds there
code = main(["symbols", "--s", "0.9", "0.99", "--xi", "0.5", "1", "2", "5", "--output-dir", out])
print("symbols exit code:", code, sorted(os.listdir(out)))

# energies from a JSON config, with a flag taking precedence over the file
cfg = os.path.join(out, "run.json")
with open(cfg, "w") as fh:
    json.dump({"grid": {"N": 1, "M": 512}, "profile": {"name": "smooth_bump", "r": 1.0},
               "s_values": [0.75, 0.9], "methods": ["FOURIER"]}, fh)
code = main(["energies", "--config", cfg, "--format", "json", "--output-dir", out])
print("energies exit code:", code)
with open(os.path.join(out, "energies_smooth_bump_N1.json")) as fh:
    for row in json.load(fh):
        print(row)

# unknown keys are rejected with exit code 3
with open(cfg, "w") as fh:
    json.dump({"gird": {"N": 1}}, fh)
print("bad config exit code:", main(["energies", "--config", cfg, "--output-dir", out]))
