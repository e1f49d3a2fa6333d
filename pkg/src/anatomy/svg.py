"""Standalone SVG charts without an external renderer.

Two figure types: a per-source token-length histogram (grouped bars)
and a labelled similarity heatmap with a [-1, 1] legend. Output bytes
are deterministic for fixed input: sources are sorted, floats use a
fixed format, and nothing depends on ambient state.
"""

from __future__ import annotations

import html

from anatomy.errors import ValidationError

PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3")

_SVG_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def render_histogram(histogram: dict[str, dict[int, int]], title: str = "Token length distribution") -> str:
    """Grouped per-source bar chart of token-length counts."""
    histogram = {src: h for src, h in histogram.items() if h}
    if not histogram:
        raise ValidationError("empty histogram")
    sources = sorted(histogram)
    lengths = sorted({n for h in histogram.values() for n in h})
    max_count = max(max(h.values()) for h in histogram.values())

    width, height = 720, 380
    left, right, top, bottom = 60, 20, 40, 50
    plot_w = width - left - right
    plot_h = height - top - bottom
    group_w = plot_w / len(lengths)
    bar_w = group_w * 0.8 / len(sources)

    parts = [
        _SVG_HEADER,
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n',
        f'<rect width="{width}" height="{height}" fill="white"/>\n',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{html.escape(title)}</text>\n',
    ]
    # y axis with 5 ticks
    for i in range(6):
        frac = i / 5
        y = top + plot_h * (1 - frac)
        value = int(round(max_count * frac))
        parts.append(
            f'<line x1="{left}" y1="{_fmt(y)}" x2="{width - right}" y2="{_fmt(y)}" '
            f'stroke="#dddddd" stroke-width="1"/>\n'
            f'<text x="{left - 6}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{value}</text>\n'
        )
    for gi, length in enumerate(lengths):
        x0 = left + gi * group_w + group_w * 0.1
        for si, src in enumerate(sources):
            count = histogram[src].get(length, 0)
            h = plot_h * count / max_count
            x = x0 + si * bar_w
            y = top + plot_h - h
            parts.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bar_w)}" height="{_fmt(h)}" '
                f'fill="{PALETTE[si % len(PALETTE)]}"/>\n'
            )
        parts.append(
            f'<text x="{_fmt(x0 + group_w * 0.4)}" y="{height - bottom + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{length}</text>\n'
        )
    parts.append(
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">token length</text>\n'
    )
    for si, src in enumerate(sources):
        y = top + 14 * si
        label = html.escape(src or "(default)")
        parts.append(
            f'<rect x="{width - right - 150}" y="{y}" width="10" height="10" '
            f'fill="{PALETTE[si % len(PALETTE)]}"/>\n'
            f'<text x="{width - right - 135}" y="{y + 9}" font-family="sans-serif" '
            f'font-size="11">{label}</text>\n'
        )
    parts.append("</svg>\n")
    return "".join(parts)


def _heat_color(value: float) -> str:
    """Blue (-1) through white (0) to red (+1)."""
    v = max(-1.0, min(1.0, value))
    if v >= 0:
        r, g, b = 255, int(round(255 * (1 - v))), int(round(255 * (1 - v)))
    else:
        r, g, b = int(round(255 * (1 + v))), int(round(255 * (1 + v))), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def render_heatmap(matrix, title: str = "Cosine similarity") -> str:
    """Row/column-labelled color grid with a [-1, 1] legend."""
    rows = [list(map(float, row)) for row in matrix]
    if not rows or not rows[0]:
        raise ValidationError("empty matrix")
    n, m = len(rows), len(rows[0])
    cell = max(6, min(24, 420 // max(n, m)))
    left, top = 40, 40
    width = left + m * cell + 90
    height = top + n * cell + 30

    parts = [
        _SVG_HEADER,
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n',
        f'<rect width="{width}" height="{height}" fill="white"/>\n',
        f'<text x="{left + m * cell / 2}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{html.escape(title)}</text>\n',
        '<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">'
        '<stop offset="0" stop-color="#0000ff"/><stop offset="0.5" stop-color="#ffffff"/>'
        '<stop offset="1" stop-color="#ff0000"/></linearGradient></defs>\n',
    ]
    label_step = max(1, n // 16)
    for i, row in enumerate(rows):
        if len(row) != m:
            raise ValidationError("ragged matrix")
        for j, value in enumerate(row):
            parts.append(
                f'<rect x="{left + j * cell}" y="{top + i * cell}" width="{cell}" '
                f'height="{cell}" fill="{_heat_color(value)}"/>\n'
            )
        if i % label_step == 0:
            parts.append(
                f'<text x="{left - 5}" y="{top + i * cell + cell / 2 + 3}" text-anchor="end" '
                f'font-family="sans-serif" font-size="9">{i}</text>\n'
            )
    for j in range(0, m, label_step):
        parts.append(
            f'<text x="{left + j * cell + cell / 2}" y="{top - 5}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="9">{j}</text>\n'
        )
    bar_x = left + m * cell + 20
    bar_h = n * cell
    parts.append(
        f'<rect x="{bar_x}" y="{top}" width="14" height="{bar_h}" fill="url(#scale)" '
        f'stroke="#888888"/>\n'
    )
    for frac, label in ((0.0, "1"), (0.5, "0"), (1.0, "-1")):
        parts.append(
            f'<text x="{bar_x + 20}" y="{_fmt(top + bar_h * frac + 4)}" '
            f'font-family="sans-serif" font-size="10">{label}</text>\n'
        )
    parts.append("</svg>\n")
    return "".join(parts)


def emit_svg_histogram(histogram: dict[str, dict[int, int]], path, title="Token length distribution") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_histogram(histogram, title))


def emit_svg_heatmap(matrix, path, title="Cosine similarity") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_heatmap(matrix, title))
