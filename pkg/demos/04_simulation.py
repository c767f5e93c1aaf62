# Play command scripts through the drive controller.
import math
import sys
from pathlib import Path

import numpy as np

from omnidrive import RobotGeometry
from omnidrive.plotting import emit_plot
from omnidrive.simulator import SimConfig, circle_script, run_script, square_script
from omnidrive.synthetic import SyntheticTruthSpec

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
geom = RobotGeometry(0.1, 0.2, 0.25)
profiles = SyntheticTruthSpec()   # any delta_omega -> SCurveParams callable works as a model

# 3 s legs at 0.45 m/s; instantaneous transitions close the loop exactly
ideal = run_script(square_script(), geom, None)
smooth = run_script(square_script(), geom, profiles)
print("instant square ends at", ideal.pose[-1])
print("S-curve square ends at", smooth.pose[-1])

# sideways drift plus yaw traces a circle of radius v / w
period = 2 * math.pi / 0.78
circle = run_script(circle_script(0.19, 0.78), geom, None, SimConfig(dt=period / 480))
print("circle closes to", np.hypot(*circle.pose[-1, :2]), "m; radius", 0.19 / 0.78)

# physical mode drives wheels; with no lag or noise it matches lightweight mode
phys = run_script(square_script(), geom, profiles, SimConfig("physical", dt=1 / 60))
print("mode difference:", np.abs(phys.pose - smooth.pose).max())
laggy = run_script(square_script(), geom, profiles, SimConfig("physical", wheel_lag_tau=0.15))
print("with 0.15 s wheel lag the square ends at", laggy.pose[-1])

emit_plot({"instant": (ideal.pose[:, 0], ideal.pose[:, 1]),
           "S-curve": (smooth.pose[:, 0], smooth.pose[:, 1]),
           "S-curve + lag": (laggy.pose[:, 0], laggy.pose[:, 1])},
          out / "square", "x [m]", "y [m]", "square script", equal_axes=True)
print("plot written to", out / "square.svg")
