"""Minimal self-contained SVG writers for documentation figures."""

from __future__ import annotations

import numpy as np

_HEAD = ('<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
         'viewBox="0 0 {w} {h}">\n')


def _color(u: float) -> str:
    # blue (low) to red (high)
    u = min(max(u, 0.0), 1.0)
    r = int(round(255 * u))
    b = int(round(255 * (1 - u)))
    g = int(round(255 * (1 - abs(2 * u - 1)) * 0.8))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(values, x_labels, y_labels, title: str = "",
                vmin=None, vmax=None, cell: int = 18) -> str:
    """Rows follow ``y_labels`` (bottom to top), columns ``x_labels``."""
    z = np.asarray(values, dtype=float)
    lo = float(np.nanmin(z)) if vmin is None else vmin
    hi = float(np.nanmax(z)) if vmax is None else vmax
    span = hi - lo if hi > lo else 1.0
    ny, nx = z.shape
    left, top = 60, 30
    w, h = left + nx * cell + 20, top + ny * cell + 50
    parts = [_HEAD.format(w=w, h=h)]
    parts.append(f'<text x="{left}" y="18" font-size="12">{title}</text>\n')
    for i in range(ny):
        y = top + (ny - 1 - i) * cell
        for j in range(nx):
            x = left + j * cell
            parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                         f'fill="{_color((z[i, j] - lo) / span)}"/>\n')
        parts.append(f'<text x="2" y="{y + cell - 4}" font-size="8">'
                     f'{y_labels[i]:.3g}</text>\n')
    for j in range(0, nx, max(1, nx // 5)):
        x = left + j * cell
        parts.append(f'<text x="{x}" y="{top + ny * cell + 14}" font-size="8">'
                     f'{x_labels[j]:.3g}</text>\n')
    parts.append(f'<text x="{left}" y="{h - 8}" font-size="10">'
                 f'min {lo:.4g}  max {hi:.4g}</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def graph_svg(graph, ankle=None, size: int = 400) -> str:
    """Capture discs about the ICP plus the reachable disc about ``ankle``."""
    center = np.atleast_1d(np.asarray(graph.center, dtype=float))
    cx0 = float(center[0])
    cy0 = float(center[1]) if center.size > 1 else 0.0
    if ankle is None:
        ax, ay = cx0, cy0
    else:
        a = np.atleast_1d(np.asarray(ankle, dtype=float))
        ax, ay = float(a[0]), float(a[1]) if a.size > 1 else 0.0
    extent = max(max(graph.radii) + abs(cx0 - ax) + abs(cy0 - ay),
                 graph.L) + graph.L
    scale = size / (2.2 * extent)

    def px(x, y):
        return size / 2 + (x - cx0) * scale, size / 2 - (y - cy0) * scale

    parts = [_HEAD.format(w=size, h=size)]
    x, y = px(ax, ay)
    parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{graph.L * scale:.2f}" '
                 'fill="#e0f0e0" stroke="#2a2"/>\n')
    x, y = px(cx0, cy0)
    for n, r in enumerate(graph.radii, start=1):
        if r > 0:
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r * scale:.2f}" '
                         f'fill="none" stroke="#c33"><title>R_{n}</title>'
                         '</circle>\n')
    parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2" fill="#000"/>\n')
    parts.append("</svg>\n")
    return "".join(parts)
