"""Rebuild every golden artifact from the shipped configs: python3 configs/regenerate.py"""
import json
from pathlib import Path

from spinhom.cli import main

here = Path(__file__).resolve().parent
for entry in json.loads((here / "manifest.json").read_text()):
    code = main([entry["command"], "--config", str(here / entry["config"]), "--out", str(here / entry["out"])])
    print(f"{entry['config']}: exit {code}")
