"""
PNG line charts for sweep results, drawn with Pillow.
"""

import logging
from typing import Dict, List, Sequence, Tuple

from PIL import Image, ImageDraw

logger = logging.getLogger(__name__)

CHART_SIZE = (640, 420)
MARGIN = 56
PALETTE = [
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
]


def _series(rows: List[Dict], x_key: str, y_key: str, group_key: str) -> Dict[str, List[Tuple[float, float]]]:
    groups: Dict[str, List[Tuple[float, float]]] = {}
    for row in rows:
        label = f"{group_key}={row[group_key]:g}"
        groups.setdefault(label, []).append((float(row[x_key]), float(row[y_key])))
    for points in groups.values():
        points.sort()
    return groups


def _scale(values: Sequence[float], low: int, high: int):
    vmin, vmax = min(values), max(values)
    span = vmax - vmin or 1.0
    return lambda v: low + (v - vmin) / span * (high - low)


def render_sweep_chart(
    rows: List[Dict],
    path: str,
    x_key: str = "tau",
    y_key: str = "queries",
    group_key: str = "epsilon",
) -> str:
    """Draw ``y_key`` against ``x_key`` with one line per ``group_key`` value."""
    width, height = CHART_SIZE
    image = Image.new("RGB", CHART_SIZE, (255, 255, 255))
    draw = ImageDraw.Draw(image)

    # Axes
    draw.line([(MARGIN, MARGIN // 2), (MARGIN, height - MARGIN)], fill=(0, 0, 0), width=1)
    draw.line([(MARGIN, height - MARGIN), (width - MARGIN // 2, height - MARGIN)], fill=(0, 0, 0), width=1)
    draw.text((width // 2 - 20, height - MARGIN + 24), x_key, fill=(0, 0, 0))
    draw.text((6, MARGIN // 2 - 14), y_key, fill=(0, 0, 0))

    if rows:
        xs = [float(row[x_key]) for row in rows]
        ys = [float(row[y_key]) for row in rows]
        to_x = _scale(xs, MARGIN, width - MARGIN // 2)
        to_y = _scale(ys, height - MARGIN, MARGIN // 2)
        draw.text((MARGIN - 4, height - MARGIN + 6), f"{min(xs):g}", fill=(80, 80, 80))
        draw.text((width - MARGIN, height - MARGIN + 6), f"{max(xs):g}", fill=(80, 80, 80))
        draw.text((4, height - MARGIN - 6), f"{min(ys):g}", fill=(80, 80, 80))
        draw.text((4, MARGIN // 2), f"{max(ys):g}", fill=(80, 80, 80))

        for index, (label, points) in enumerate(sorted(_series(rows, x_key, y_key, group_key).items())):
            color = PALETTE[index % len(PALETTE)]
            coords = [(to_x(x), to_y(y)) for x, y in points]
            if len(coords) > 1:
                draw.line(coords, fill=color, width=2)
            for cx, cy in coords:
                draw.ellipse([cx - 3, cy - 3, cx + 3, cy + 3], fill=color)
            draw.text((width - 150, MARGIN // 2 + 14 * index), label, fill=color)

    image.save(path, format="PNG")
    logger.info("chart written to %s", path)
    return path
