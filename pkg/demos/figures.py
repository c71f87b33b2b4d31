"""
Rendering the basin pictures
============================

Render the figure presets to PPM files with JSON sidecars.  The first figure
takes about half a minute on a single core; pass ``--quick`` to skip it.
"""

import sys
import time
from pathlib import Path

from basins.render import RenderJob, render, write_image

out = Path(sys.argv[1] if len(sys.argv) > 1 and not sys.argv[1].startswith("-") else "demo_output")
out.mkdir(exist_ok=True)
names = ["fig3", "fig4", "fig5"] if "--quick" in sys.argv else ["fig2", "fig3", "fig4", "fig5"]

for name in names:
    job = RenderJob.preset(name)
    t0 = time.perf_counter()
    img = render(job, workers=4)
    write_image(img, out / f"{name}.ppm")
    print(f"{name}: {job.entry} {job.width}x{job.height} in {time.perf_counter() - t0:.1f}s, "
          f"unresolved {img.unresolved_fraction():.2%}")

# any viewport works; this one zooms on the parabolic point of the first example
img = render(RenderJob("ex1", {"b": -1.0}, (-10.0, 10.0, -5.0, 5.0), 400, 200), workers=4)
write_image(img, out / "ex1_zoom.ppm")
print("wrote", sorted(p.name for p in out.iterdir()))
