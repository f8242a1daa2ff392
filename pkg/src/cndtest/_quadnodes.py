"""Gauss-Legendre nodes shared by both kernel backends.

Panels use a 16-point rule for the value and an embedded pass with the
8-point rule for the error estimate; the arrays are for the reference
interval [-1, 1].
"""

import numpy as np

GL16_X, GL16_W = np.polynomial.legendre.leggauss(16)
GL8_X, GL8_W = np.polynomial.legendre.leggauss(8)
