"""SVG pictures of rotation-symmetric spectra and pseudospectrum grids."""
from __future__ import annotations

import numpy as np

SIZE = 512
FILL = "#3b6ea5"


def _header(size):
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">',
            f'<rect width="{size}" height="{size}" fill="white"/>']


def _axes(size):
    c = size / 2
    return [f'<line x1="0" y1="{c}" x2="{size}" y2="{c}" stroke="#bbbbbb" stroke-width="1"/>',
            f'<line x1="{c}" y1="0" x2="{c}" y2="{size}" stroke="#bbbbbb" stroke-width="1"/>']


def spectrum_svg(desc: dict, size: int = SIZE, scale_to: float | None = None) -> str:
    """Filled disk and annuli, origin-centred, outer radius at 90% of the half-width.

    ``desc`` is the JSON form of a spectrum description.
    """
    c = size / 2
    outer = scale_to or max([desc.get("disk") or 0.0] + [r["rmax"] for r in desc.get("rings", [])])
    k = 0.9 * c / outer if outer > 0 else 1.0
    out = _header(size) + _axes(size)
    if desc.get("disk") is not None:
        r = max(desc["disk"] * k, 1.0)
        out.append(f'<circle cx="{c}" cy="{c}" r="{r:.3f}" fill="{FILL}" fill-opacity="0.8"/>')
    for ring in desc.get("rings", []):
        lo, hi = ring["rmin"] * k, ring["rmax"] * k
        if hi - lo < 2.0:
            mid = (lo + hi) / 2
            out.append(f'<circle cx="{c}" cy="{c}" r="{mid:.3f}" fill="none" stroke="{FILL}" '
                       f'stroke-width="{max(hi - lo, 2.0):.3f}"/>')
        else:
            # annulus as an even-odd path of two circles
            d = (f"M {c - hi:.3f} {c} a {hi:.3f} {hi:.3f} 0 1 0 {2 * hi:.3f} 0 "
                 f"a {hi:.3f} {hi:.3f} 0 1 0 {-2 * hi:.3f} 0 Z "
                 f"M {c - lo:.3f} {c} a {lo:.3f} {lo:.3f} 0 1 0 {2 * lo:.3f} 0 "
                 f"a {lo:.3f} {lo:.3f} 0 1 0 {-2 * lo:.3f} 0 Z")
            out.append(f'<path d="{d}" fill="{FILL}" fill-opacity="0.8" fill-rule="evenodd"/>')
    unit = k
    out.append(f'<circle cx="{c}" cy="{c}" r="{unit:.3f}" fill="none" stroke="#999999" '
               f'stroke-dasharray="4 4"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


VERDICT_COLORS = {"IN": "#c0392b", "OUT": "#dfe6ee", "UNDECIDED": "#f1c40f"}


def pseudospectrum_svg(radii, angles, verdicts, size: int = SIZE) -> str:
    """Polar heatmap of verdicts: one annular sector per grid point."""
    radii = np.asarray(radii, float)
    c = size / 2
    k = 0.9 * c / radii[-1] if radii[-1] > 0 else 1.0
    edges = np.concatenate([[0.0], (radii[1:] + radii[:-1]) / 2, [radii[-1]]])
    da = 2 * np.pi / len(angles)
    out = _header(size)
    for a in range(len(radii)):
        r0, r1 = edges[a] * k, edges[a + 1] * k
        for b, th in enumerate(angles):
            t0, t1 = th - da / 2, th + da / 2
            p = [(c + r * np.cos(t), c - r * np.sin(t)) for r, t in
                 ((r1, t0), (r1, t1), (r0, t1), (r0, t0))]
            pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in p)
            out.append(f'<polygon points="{pts}" fill="{VERDICT_COLORS[str(verdicts[a][b])]}"/>')
    out += _axes(size)
    out.append("</svg>")
    return "\n".join(out) + "\n"
