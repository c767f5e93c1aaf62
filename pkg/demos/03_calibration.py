# Fit the profile network to synthetic wheel recordings.
#
# A short run (3 seeds, 800 epochs); the full search uses many more of both.
import sys
from pathlib import Path

import numpy as np

from omnidrive import RobotGeometry
from omnidrive.calibrator import TrainConfig, extract_samples, gradient_check, init_weights, train_all
from omnidrive.plotting import emit_plot
from omnidrive.scurve import evaluate
from omnidrive.synthetic import SyntheticTruthSpec, default_commands, synth_recordings

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
geom = RobotGeometry(0.1, 0.2, 0.25)
truth = SyntheticTruthSpec(noise_sigma=0.02, repeats=3)

recs = synth_recordings(truth, default_commands(), geom, seed=0)
samples = [s for r in recs for s in extract_samples(r, geom)]
print(len(recs), "recordings ->", len(samples), "per-wheel samples")

# backprop against finite differences before spending time on training
w0 = init_weights(0, max(s.target for s in samples))
print("gradient check:", gradient_check(w0, samples))

res = train_all(samples, TrainConfig(seeds=3, epochs=800))
for run in res.runs:
    print(f"seed {run.seed}: train {run.train_loss:.3g}  validation {run.val_loss:.3g}")
best = res.best
print("kept seed", best.seed)

# held-out targets against the curve family that generated the data; the
# truth starts at the command, the samples at their detected onset
for rec in recs:
    for s in extract_samples(rec, geom):
        if s.target in res.val_targets:
            onset = rec.times[rec.times.size - s.times.size]
            err = evaluate(best.predict_curve(s.target), s.times) - evaluate(truth.curve(s.target), s.times + onset)
            print(f"target {s.target:6.3f} rad/s  rmse {np.sqrt(np.mean(err ** 2)) / s.target:.2%} of target")
            break

t = np.linspace(0, 4, 241)
family = {f"{d:.1f}": (t, evaluate(best.predict_curve(d), t)) for d in np.linspace(0.5, 10, 6)}
emit_plot(family, out / "predicted_family", "time [s]", "wheel speed [rad/s]", "predicted S-curves")
print("plot written to", out / "predicted_family.svg")
