# Relative displacement errors between measured and simulated runs.
#
# The "measured" runs here are dead-reckoned synthetic recordings; the
# simulations replay the same commands through a deliberately wrong model.
from omnidrive import RobotGeometry
from omnidrive.evaluation import format_table
from omnidrive.pipeline import error_report
from omnidrive.simulator import SimConfig
from omnidrive.synthetic import SyntheticTruthSpec, default_commands, diagonal_commands, synth_recordings

geom = RobotGeometry(0.1, 0.2, 0.25)
truth = SyntheticTruthSpec()
recs = synth_recordings(truth, default_commands(n=8) + diagonal_commands(n=8), geom, seed=1)

# the true family scores near the noise floor, a slower family does worse
slow = SyntheticTruthSpec(anchor_b=tuple(b * 1.4 for b in truth.anchor_b))
reports = {
    "truth": error_report(recs, geom, truth, SimConfig()),
    "instant": error_report(recs, geom, None, SimConfig()),
    "slow": error_report(recs, geom, slow, SimConfig()),
}
print(format_table(reports))
