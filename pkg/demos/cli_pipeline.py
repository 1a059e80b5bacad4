"""
The command-line pipeline, step by step
=======================================

train -> repair -> compare -> postprocess -> report, on a generated CSV.
Each step is the same call a shell user would make with `fairdelta ...`.
"""
import tempfile
from pathlib import Path

import numpy as np

from fairdelta.cli import main

work = Path(tempfile.mkdtemp(prefix="fairdelta-demo-"))
rng = np.random.default_rng(1)
n = 1000
group = rng.random(n) < 0.5
x = rng.random(n) + 0.3 * group
y = 0.6 * x + rng.normal(0, 0.05, n)
rows = ["x,group,y"] + [f"{float(a)!r},{'a' if g else 'b'},{float(t)!r}" for a, g, t in zip(x, group, y)]
(work / "toy.csv").write_text("\n".join(rows) + "\n")
(work / "toy.ini").write_text("[dataset]\ntask = square_loss\ntarget = y\nsensitive = group\n"
                              "sensitive_rule = == a\ndefault_kind = numeric\n")

data = ["--data", str(work / "toy.csv"), "--schema", str(work / "toy.ini")]
main(["train", *data, "--sample-size", "300", "--predictions-out", str(work / "b.csv"),
      "--train-predictions-out", str(work / "b_train.csv")])
main(["repair", *data, "--train-predictions", str(work / "b_train.csv"),
      "--predictions", str(work / "b.csv"), "--epsilon", "0.05", "--out", str(work / "f.csv")])
main(["compare", *data, "--baseline", str(work / "b.csv"), "--fair", str(work / "f.csv"),
      "--out", str(work / "pairs.csv")])
main(["postprocess", "norm-nonpos", "--a", "-0.1", "--b", "0", "--pairs", str(work / "pairs.csv"),
      "--out", str(work / "post.csv")])
main(["report", "--pairs", str(work / "post.csv"), "--task", "square_loss", "--format", "text",
      "--histogram-of", "postprocessed", "--bins", "10"])
print("files in", work)
