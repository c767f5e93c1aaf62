# The three-piece softplus / linear / softplus velocity profile.
import sys
from pathlib import Path

import numpy as np

from omnidrive.plotting import emit_plot
from omnidrive.scurve import SCurveParams, construct_params, evaluate, saturation_time, segment_values

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")

# shape parameters pick the curve; the slope m follows from continuity
p = SCurveParams.from_shape(a=0.25, b=0.8, k1=10.0, k2=4.0, delta_omega=3.5)
print(p)
print("S(0) =", evaluate(p, 0.0), " S(b + 50/k2) =", evaluate(p, p.b + 50 / p.k2))
print("99 % of the target after", round(saturation_time(p), 3), "s")

# the segments meet at a and b
s1, s2, s3 = segment_values(p, np.array([p.a, p.b]))
print("gap at a:", abs(s1[0] - s2[0]), " gap at b:", abs(s2[1] - s3[1]))

# a network emits five unconstrained numbers; positivity maps make them valid
raw = np.array([-0.5, 0.2, 123.0, 2.0, 1.0])   # the third entry is ignored
q = construct_params(raw, 3.5)
print(q)

t = np.linspace(0, 3, 301)
emit_plot({"shape-built": (t, evaluate(p, t)), "from raw outputs": (t, evaluate(q, t))},
          out / "scurve", "time [s]", "wheel speed [rad/s]", "S-curves")
print("plot written to", out / "scurve.svg")
