"""Minimal hand-emitted SVG documents (bit-exact, no plotting dependency)."""

import time


def _fmt(x):
    return f"{x:.4f}"


class SvgCanvas:
    """One or more square data viewports rendered side by side."""

    def __init__(self, panels, size=360, margin=40, timestamp=True):
        # panels: list of dicts with keys 'box' = (xmin, xmax, ymin, ymax),
        # 'title', 'polylines' = [(points, color)], 'lines', 'points'
        self.panels = panels
        self.size = size
        self.margin = margin
        self.timestamp = timestamp

    def _map(self, panel_index, x, y):
        box = self.panels[panel_index]["box"]
        xmin, xmax, ymin, ymax = box
        off = self.margin + panel_index * (self.size + self.margin)
        px = off + (x - xmin) / (xmax - xmin) * self.size
        py = self.margin + self.size - (y - ymin) / (ymax - ymin) * self.size
        return px, py

    def render(self):
        width = len(self.panels) * (self.size + self.margin) + self.margin
        height = self.size + 2 * self.margin
        parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
        ]
        if self.timestamp:
            parts.append(f"<!-- generated {time.strftime('%Y-%m-%dT%H:%M:%S')} -->")
        parts.append(f'<rect width="{width}" height="{height}" fill="white"/>')
        for i, panel in enumerate(self.panels):
            off = self.margin + i * (self.size + self.margin)
            parts.append(
                f'<rect x="{off}" y="{self.margin}" width="{self.size}" '
                f'height="{self.size}" fill="none" stroke="black"/>'
            )
            title = panel.get("title", "")
            if title:
                parts.append(
                    f'<text x="{off}" y="{self.margin - 10}" '
                    f'font-family="monospace" font-size="14">{title}</text>'
                )
            for pts, color in panel.get("lines", []):
                (x1, y1), (x2, y2) = pts
                a = self._map(i, x1, y1)
                b = self._map(i, x2, y2)
                parts.append(
                    f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" x2="{_fmt(b[0])}" '
                    f'y2="{_fmt(b[1])}" stroke="{color}" stroke-dasharray="4 3"/>'
                )
            for pts, color in panel.get("polylines", []):
                coords = " ".join(
                    f"{_fmt(px)},{_fmt(py)}"
                    for px, py in (self._map(i, x, y) for x, y in pts)
                )
                parts.append(
                    f'<polyline points="{coords}" fill="none" stroke="{color}" '
                    'stroke-width="1.5"/>'
                )
            for (x, y), color in panel.get("points", []):
                px, py = self._map(i, x, y)
                parts.append(
                    f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="4" fill="{color}"/>'
                )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"
