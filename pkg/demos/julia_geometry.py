"""
Tracing basin boundaries
========================

Trace the interface between two basins to sub-pixel accuracy, then measure
how far it is from a quasiline with the turning constant.
"""

import numpy as np

from basins.diagnostics import smallest_containment_T, trace_boundary, turning_constant
from basins.render import RenderJob, render

# 2 tan z: the two basins are the half planes, so the boundary is the real line
img = render(RenderJob("tan", {}, (-210.0, 210.0, -1.0, 1.0), 840, 8), workers=4)
curve = trace_boundary(img, 1e-4)
print("tan: max |Im| on the boundary =", np.abs(curve.points.imag).max())
for R in (50.0, 200.0):
    print(f"  chordal turning constant, R={R:g}:", turning_constant(curve, R, "chordal").constant)

# the third example is built with the same symmetry
img = render(RenderJob("ex3", {}, (-4.0, 4.0, -2.0, 2.0), 400, 200), workers=4)
curve = trace_boundary(img, 1e-4)
print("ex3: max |Im| on the boundary =", np.abs(curve.all_points.imag).max())

# the first example: the boundary winds around the bulbs along the positive axis
img = render(RenderJob.preset("fig2"), workers=4)
curve = trace_boundary(img, 1e-3)
print(f"ex1: {len(curve.points)} boundary points, {curve.n_coarse} left coarse")
print("  smallest parabola parameter T containing it:", smallest_containment_T(curve))
for R in (50.0, 100.0, 200.0):
    print(f"  euclidean turning constant, R={R:g}:", turning_constant(curve, R).constant)
