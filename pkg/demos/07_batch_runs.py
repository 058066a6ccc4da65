# %% [markdown]
# Batch runs from config files
#
# Every experiment above can be driven by a JSON file through the
# ``metrosearch`` command.  Here we call the same entry point from Python.

# %%
import json
import math
import tempfile
from pathlib import Path

from metrosearch.cli import main

work = Path(tempfile.mkdtemp())
(work / "grover.json").write_text(json.dumps({"scheme": {"N": 4, "M": 1, "omega": math.pi}}))
status = main(["grover", "--config", str(work / "grover.json"), "--out", str(work / "out")])
print("exit status", status)
report = json.loads((work / "out" / "grover_report.json").read_text())
print("success probability", report["results"]["success_probability"])
print((work / "out" / "grover_distance.csv").read_text())
