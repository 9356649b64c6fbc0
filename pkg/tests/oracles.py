"""Frozen reference values.

Computed once with 40-digit mpmath by summing the band integrals of the
staircase density directly (no closed forms from this package), then frozen.
Key: (epsilon, gamma, dimension, sensitivity) -> (a(gamma), E||X||_1).
"""

STAIRCASE = {
    (1.0, 0.3, 2, 1.0): (0.29436759880025622543, 2.0073544223388798203),
    (1.0, 0.3, 1, 1.0): (0.56690839577249737211, 0.96292594375710197876),
    (1.0, 0.3, 3, 1.0): (0.14664455639939868303, 3.003313080252217583),
    (1.0, 0.3, 4, 1.0): (0.073241393328405594445, 3.9997917850896024065),
    (2.0, 0.5, 2, 1.0): (0.81695230876732993457, 0.95547288283878166341),
    (0.5, 0.7, 2, 2.5): (0.0089465505892958696589, 9.9907500954493700671),
    (3.0, 1.0, 2, 1.0): (0.43004178782879840973, 0.8030753084342230912),
    (3.0, 0.0, 2, 1.0): (8.6376202079489674322, 0.8030753084342230912),
}

# root of dV/dgamma for the directly summed 2-D cost at epsilon = 1
GAMMA_STAR_EPS1_2D = 0.66708356157084858982
V_STAR_EPS1_2D = 1.9861532794583930658

# independent 1-D optimum: gamma* = 1 / (1 + e^{eps/2}),
# cost = sensitivity * e^{eps/2} / (e^eps - 1)
