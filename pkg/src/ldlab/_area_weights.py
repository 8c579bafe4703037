"""Calibrated local-configuration surface-area weights.

AREA_W3[code] is the surface area (units h^2) charged to one 2x2x2 block of
cells with occupancy bitmask code (bit = 4x + 2y + z). AREA_W2 is the 2x2
analogue (units h). Weights were fitted by least squares against exact
plane-section areas of digitized half-spaces over ~170 orientations,
bounded below so that isolated cells and checkerboard sponges always pay
positive area (no free dispersal under annealing). Regenerate with
tools/calibrate_area_weights.py.
"""

import numpy as np

AREA_W3 = np.array([
    0.00000000, 0.25000000, 0.25000000, 0.67415417, 0.25000000, 0.67415417,
    1.29903811, 0.92574658, 0.25000000, 1.29903811, 0.67415417, 0.92574658,
    0.67415417, 0.92574658, 0.92574658, 0.95251051, 0.25000000, 0.67415417,
    1.29903811, 0.92574658, 1.29903811, 0.92574658, 1.51554446, 1.22660304,
    0.43301270, 1.96562479, 1.96562479, 1.57313218, 1.96562479, 1.57313218,
    1.36602540, 0.92574658, 0.25000000, 1.29903811, 0.67415417, 0.92574658,
    0.43301270, 1.96562479, 1.96562479, 1.57313218, 1.29903811, 1.51554446,
    0.92574658, 1.22660304, 1.96562479, 1.36602540, 1.57313218, 0.92574658,
    0.67415417, 0.92574658, 0.92574658, 0.95251051, 1.96562479, 1.57313218,
    1.36602540, 0.92574658, 1.96562479, 1.36602540, 1.57313218, 0.92574658,
    1.41421356, 0.92361313, 0.92361313, 0.67415417, 0.25000000, 1.29903811,
    0.43301270, 1.96562479, 0.67415417, 0.92574658, 1.96562479, 1.57313218,
    1.29903811, 1.51554446, 1.96562479, 1.36602540, 0.92574658, 1.22660304,
    1.57313218, 0.92574658, 0.67415417, 0.92574658, 1.96562479, 1.57313218,
    0.92574658, 0.95251051, 1.36602540, 0.92574658, 1.96562479, 1.36602540,
    1.41421356, 0.92361313, 1.57313218, 0.92574658, 0.92361313, 0.67415417,
    1.29903811, 1.51554446, 1.96562479, 1.36602540, 1.96562479, 1.36602540,
    1.41421356, 0.92361313, 1.51554446, 0.86602540, 1.36602540, 0.64951905,
    1.36602540, 0.64951905, 0.92361313, 0.43301270, 0.92574658, 1.22660304,
    1.57313218, 0.92574658, 1.57313218, 0.92574658, 0.92361313, 0.67415417,
    1.36602540, 0.64951905, 0.92361313, 0.43301270, 0.92361313, 0.43301270,
    0.43301270, 0.25000000, 0.25000000, 0.43301270, 1.29903811, 1.96562479,
    1.29903811, 1.96562479, 1.51554446, 1.36602540, 0.67415417, 1.96562479,
    0.92574658, 1.57313218, 0.92574658, 1.57313218, 1.22660304, 0.92574658,
    1.29903811, 1.96562479, 1.51554446, 1.36602540, 1.51554446, 1.36602540,
    0.86602540, 0.64951905, 1.96562479, 1.41421356, 1.36602540, 0.92361313,
    1.36602540, 0.92361313, 0.64951905, 0.43301270, 0.67415417, 1.96562479,
    0.92574658, 1.57313218, 1.96562479, 1.41421356, 1.36602540, 0.92361313,
    0.92574658, 1.36602540, 0.95251051, 0.92574658, 1.57313218, 0.92361313,
    0.92574658, 0.67415417, 0.92574658, 1.57313218, 1.22660304, 0.92574658,
    1.36602540, 0.92361313, 0.64951905, 0.43301270, 1.57313218, 0.92361313,
    0.92574658, 0.67415417, 0.92361313, 0.43301270, 0.43301270, 0.25000000,
    0.67415417, 1.96562479, 1.96562479, 1.41421356, 0.92574658, 1.57313218,
    1.36602540, 0.92361313, 0.92574658, 1.36602540, 1.57313218, 0.92361313,
    0.95251051, 0.92574658, 0.92574658, 0.67415417, 0.92574658, 1.57313218,
    1.36602540, 0.92361313, 1.22660304, 0.92574658, 0.64951905, 0.43301270,
    1.57313218, 0.92361313, 0.92361313, 0.43301270, 0.92574658, 0.67415417,
    0.43301270, 0.25000000, 0.92574658, 1.36602540, 1.57313218, 0.92361313,
    1.57313218, 0.92361313, 0.92361313, 0.43301270, 1.22660304, 0.64951905,
    0.92574658, 0.43301270, 0.92574658, 0.43301270, 0.67415417, 0.25000000,
    0.95251051, 0.92574658, 0.92574658, 0.67415417, 0.92574658, 0.67415417,
    0.43301270, 0.25000000, 0.92574658, 0.43301270, 0.67415417, 0.25000000,
    0.67415417, 0.25000000, 0.25000000, 0.00000000,
])

AREA_W2 = np.array([
    0.00000000, 0.67694646, 0.67694646, 0.95349387, 0.67694646, 0.95349387, 0.25000000, 0.67694646,
    0.67694646, 0.25000000, 0.95349387, 0.67694646, 0.95349387, 0.67694646, 0.67694646, 0.00000000,
])

