"""
Adult income: baseline, repair and a budget-neutral correction
==============================================================

Needs data/adult (bundled). Writes the difference histogram next to this file.
"""
import dataclasses
from pathlib import Path

from fairdelta import histogram, render_report, render_table, run_experiment
from fairdelta.report import load_config

here = Path(__file__).resolve().parent
configs = here.parent / "configs"

plain = run_experiment(configs / "adult_lr.ini")
print(render_report(plain, histogram(plain.diffs, 20), "text").decode())

# looser and tighter repair targets on the same split
cfg = load_config(configs / "adult_lr.ini")
rows = [run_experiment(dataclasses.replace(cfg, epsilon=e)) for e in (0.15, 0.05, 0.01)]
print(render_table(rows, "text").decode())

budget = run_experiment(configs / "adult_lr_budget.ini")

svg = render_report(budget, histogram(budget.postproc_diffs), "svg")
(here / "adult_differences.svg").write_bytes(svg)
print("histogram written to", here / "adult_differences.svg")
print("post-processed avg difference: %.2e" % budget.postproc_summary.mean_diff)
