"""Static SVG frames of a traced flex."""

from __future__ import annotations

from pathlib import Path

PAD = 0.2
SIZE = 480


def clip_line(a: float, b: float, box) -> tuple | None:
    """Segment of ``a x + b y + 1 = 0`` inside ``box = (x0, y0, x1, y1)``."""
    x0, y0, x1, y1 = box
    pts = []
    if abs(b) > 1e-15:
        for x in (x0, x1):
            y = -(1 + a * x) / b
            if y0 <= y <= y1:
                pts.append((x, y))
    if abs(a) > 1e-15:
        for y in (y0, y1):
            x = -(1 + b * y) / a
            if x0 <= x <= x1:
                pts.append((x, y))
    if len(pts) < 2:
        return None
    # farthest pair, in case a corner was hit twice
    best = max(((p, q) for p in pts for q in pts), key=lambda pq: (pq[0][0] - pq[1][0]) ** 2 + (pq[0][1] - pq[1][1]) ** 2)
    return best


def bounding_box(points) -> tuple:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    w = max(max(xs) - min(xs), 1e-9)
    h = max(max(ys) - min(ys), 1e-9)
    return (min(xs) - PAD * w, min(ys) - PAD * h, max(xs) + PAD * w, max(ys) + PAD * h)


def frame(points: dict, lines: dict, box, title: str = "") -> str:
    x0, y0, x1, y1 = box
    scale = SIZE / max(x1 - x0, y1 - y0)
    tx = lambda x: (x - x0) * scale
    ty = lambda y: (y1 - y) * scale
    w, h = (x1 - x0) * scale, (y1 - y0) * scale
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h:.1f}" viewBox="0 0 {w:.1f} {h:.1f}">',
           f'<rect width="100%" height="100%" fill="white"/>']
    if title:
        out.append(f'<title>{title}</title>')
    for name, (a, b) in lines.items():
        seg = clip_line(a, b, box)
        if seg is None:
            continue
        (px, py), (qx, qy) = seg
        out.append(f'<line x1="{tx(px):.2f}" y1="{ty(py):.2f}" x2="{tx(qx):.2f}" y2="{ty(qy):.2f}" '
                   f'stroke="#444" stroke-width="1"><title>{name}</title></line>')
    for name, (x, y) in points.items():
        out.append(f'<circle cx="{tx(x):.2f}" cy="{ty(y):.2f}" r="3" fill="black"><title>{name}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_frames(trace, directory) -> list[Path]:
    """One SVG per sample, all sharing the first sample's bounding box."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    box = None
    for i, s in enumerate(trace.samples):
        r = s.realization
        pts = {p: tuple(float(c) for c in r.point(p)[:2]) for p in r.geometry.points}
        lines = {l: tuple(float(c) for c in r.line(l)[:2]) for l in r.geometry.lines}
        box = box or bounding_box(list(pts.values()))
        path = d / f"frame_{i:04d}.svg"
        path.write_text(frame(pts, lines, box, f"t = {s.t:g}"))
        paths.append(path)
    return paths
