# Wheel speeds from a body twist and back again.
import numpy as np

from omnidrive import RobotGeometry, Twist, WheelSpeeds
from omnidrive.kinematics import forward_kinematics, inverse_kinematics, slip_residual

geom = RobotGeometry(r=0.1, Lx=0.2, Ly=0.25)   # placeholder dimensions [m]

# driving straight ahead spins every wheel at v / r
print(inverse_kinematics(geom, Twist(0.5, 0.0, 0.0)))

# a pure yaw turns the left and right pairs in opposite directions
print(inverse_kinematics(geom, Twist(0.0, 0.0, 1.0)))

# the pseudoinverse recovers the twist from any consistent wheel vector
w = inverse_kinematics(geom, Twist(0.3, -0.1, 0.4))
print(forward_kinematics(geom, w), "residual", slip_residual(geom, w))

# four wheels, three degrees of freedom: (1, 1, -1, -1) is pure slip
print("slip of (1, 1, -1, -1):", slip_residual(geom, WheelSpeeds(1, 1, -1, -1)))

# the map is linear, so a random check costs nothing
rng = np.random.default_rng(0)
errs = [np.abs(forward_kinematics(geom, inverse_kinematics(geom, Twist(*v))).as_array() - v).max()
        for v in rng.uniform(-1, 1, (1000, 3))]
print("worst round trip error over 1000 twists:", max(errs))
