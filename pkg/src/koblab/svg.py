"""Minimal SVG line charts for probe reports.

Hand-rolled on purpose: the emitted artifacts are self-contained text
files with no plotting stack behind them, so runs stay byte-reproducible.
One fixed 800x600 viewport; the sample statistic is drawn against
log10(1/eps), and the value axis switches to log scale whenever every
statistic is positive.
"""

from __future__ import annotations

import math

__all__ = ["render_report_svg"]

_WIDTH, _HEIGHT = 800, 600
_LEFT, _RIGHT, _TOP, _BOTTOM = 74.0, 24.0, 46.0, 56.0


def _fmt(x: float) -> str:
    return "%.6g" % float(x)


def _ticks(lo: float, hi: float, count: int = 5) -> list:
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def render_report_svg(report, title: str | None = None) -> str:
    """An 800x600 chart of a report's statistic against log10(1/eps).

    Samples with non-finite statistics are skipped.  With no drawable
    sample the chart still renders (axes plus a note), so emission never
    fails on a degenerate report.
    """
    pairs = [(float(s.grid_value), float(s.statistic))
             for s in report.samples
             if float(s.grid_value) > 0.0 and math.isfinite(float(s.statistic))]
    pairs.sort(key=lambda p: p[0], reverse=True)
    xs = [math.log10(1.0 / g) for g, _ in pairs]
    log_y = bool(pairs) and all(v > 0.0 for _, v in pairs)
    ys = [math.log10(v) if log_y else v for _, v in pairs]

    if xs:
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
    else:
        x_lo = x_hi = y_lo = y_hi = 0.0
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    span_x, span_y = x_hi - x_lo, y_hi - y_lo
    plot_w = _WIDTH - _LEFT - _RIGHT
    plot_h = _HEIGHT - _TOP - _BOTTOM

    def px(x: float) -> float:
        return _LEFT + (x - x_lo) / span_x * plot_w

    def py(y: float) -> float:
        return _TOP + (y_hi - y) / span_y * plot_h

    head = title if title is not None else report.probe_kind
    y_label = "log10(statistic)" if log_y else "statistic"

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (_WIDTH, _HEIGHT, _WIDTH, _HEIGHT),
        '<rect width="%d" height="%d" fill="white"/>' % (_WIDTH, _HEIGHT),
        '<text x="%d" y="26" font-family="monospace" font-size="16">%s'
        '</text>' % (_LEFT, _escape(head)),
        '<text x="%d" y="%d" font-family="monospace" font-size="12" '
        'text-anchor="middle">log10(1/eps)</text>'
        % (int(_LEFT + plot_w / 2), _HEIGHT - 14),
        '<text x="18" y="%d" font-family="monospace" font-size="12" '
        'text-anchor="middle" transform="rotate(-90 18 %d)">%s</text>'
        % (int(_TOP + plot_h / 2), int(_TOP + plot_h / 2), _escape(y_label)),
    ]

    for tx in _ticks(x_lo, x_hi):
        parts.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="#ccc"/>'
                     % (_fmt(px(tx)), _fmt(_TOP), _fmt(px(tx)),
                        _fmt(_TOP + plot_h)))
        parts.append('<text x="%s" y="%s" font-family="monospace" '
                     'font-size="11" text-anchor="middle">%s</text>'
                     % (_fmt(px(tx)), _fmt(_TOP + plot_h + 18), _fmt(tx)))
    for ty in _ticks(y_lo, y_hi):
        parts.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="#ccc"/>'
                     % (_fmt(_LEFT), _fmt(py(ty)), _fmt(_LEFT + plot_w),
                        _fmt(py(ty))))
        parts.append('<text x="%s" y="%s" font-family="monospace" '
                     'font-size="11" text-anchor="end">%s</text>'
                     % (_fmt(_LEFT - 6), _fmt(py(ty) + 4), _fmt(ty)))

    parts.append('<rect x="%s" y="%s" width="%s" height="%s" fill="none" '
                 'stroke="black"/>' % (_fmt(_LEFT), _fmt(_TOP), _fmt(plot_w),
                                       _fmt(plot_h)))

    if xs:
        coords = " ".join("%s,%s" % (_fmt(px(x)), _fmt(py(y)))
                          for x, y in zip(xs, ys))
        parts.append('<polyline points="%s" fill="none" stroke="#1f77b4" '
                     'stroke-width="2"/>' % coords)
        for x, y in zip(xs, ys):
            parts.append('<circle cx="%s" cy="%s" r="3.5" fill="#1f77b4"/>'
                         % (_fmt(px(x)), _fmt(py(y))))
    else:
        parts.append('<text x="%d" y="%d" font-family="monospace" '
                     'font-size="14" text-anchor="middle">no drawable '
                     'samples</text>'
                     % (int(_LEFT + plot_w / 2), int(_TOP + plot_h / 2)))

    parts.append('<text x="%d" y="%d" font-family="monospace" '
                 'font-size="12">verdict: %s (%s)</text>'
                 % (_LEFT, _TOP - 8, _escape(report.verdict),
                    _escape(report.detail)))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
