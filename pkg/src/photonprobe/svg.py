"""
Static line/point plots written as plain SVG: axes, ticks, polylines,
markers with error bars, legend and an optional right-hand axis.
"""
from xml.sax.saxutils import escape

import numpy as np

from .io import atomic_write


def nice_ticks(lo, hi, n=5):
    """Round tick positions (1, 2, 5 x 10^k steps) covering [lo, hi]."""
    if not np.isfinite(lo) or not np.isfinite(hi):
        raise ValueError("axis limits must be finite")
    if hi <= lo:
        hi = lo + (abs(lo) if lo else 1.0)
    raw = (hi - lo) / max(n, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = np.ceil(lo / step - 1e-9) * step
    count = int(np.floor((hi - start) / step + 1e-9)) + 1
    return start + step * np.arange(max(count, 0))


def _padded(values, frac=0.05):
    v = np.concatenate([np.asarray(a, dtype=float).ravel() for a in values])
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        d = abs(lo) * 0.1 or 1.0
        return lo - d, hi + d
    d = (hi - lo) * frac
    return lo - d, hi + d


def _num(v):
    return f"{v:.2f}"


def _label(v):
    s = f"{v:.6g}"
    return "0" if s in ("-0", "0") else s


class Plot:
    """
    Collects series and renders them.  Series on ``axis="right"`` are scaled
    against their own vertical range and labelled on the right.
    """

    def __init__(self, title="", xlabel="", ylabel="", y2label=None, width=720, height=440):
        self.title, self.xlabel, self.ylabel, self.y2label = title, xlabel, ylabel, y2label
        self.width, self.height = width, height
        self.series = []
        self.xlim = self.ylim = self.y2lim = None
        self.margin = (70, 80 if y2label else 30, 40, 55)  # left, right, top, bottom

    def line(self, x, y, color="black", label=None, axis="left", width=1.5, dash=None):
        self.series.append(dict(kind="line", x=np.asarray(x, float), y=np.asarray(y, float),
                                color=color, label=label, axis=axis, width=width, dash=dash))
        return self

    def points(self, x, y, color="black", label=None, axis="left", yerr=None, radius=2.5):
        self.series.append(dict(kind="points", x=np.asarray(x, float), y=np.asarray(y, float),
                                color=color, label=label, axis=axis, radius=radius,
                                yerr=None if yerr is None else np.asarray(yerr, float)))
        return self

    def _limits(self, axis):
        ss = [s for s in self.series if s["axis"] == axis]
        if not ss:
            return None
        vals = []
        for s in ss:
            vals.append(s["y"])
            if s.get("yerr") is not None:
                vals += [s["y"] - s["yerr"], s["y"] + s["yerr"]]
        return _padded(vals)

    def render(self):
        L, R, T, B = self.margin
        W, H = self.width - L - R, self.height - T - B
        xlim = self.xlim or _padded([s["x"] for s in self.series], 0.0)
        ylim = self.ylim or self._limits("left") or (0.0, 1.0)
        y2lim = self.y2lim or self._limits("right")

        def sx(x):
            return L + (np.asarray(x) - xlim[0]) / (xlim[1] - xlim[0]) * W

        def sy(y, lim):
            return T + H - (np.asarray(y) - lim[0]) / (lim[1] - lim[0]) * H

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
               f'height="{self.height}" viewBox="0 0 {self.width} {self.height}" '
               'font-family="sans-serif" font-size="12">',
               f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>',
               f'<defs><clipPath id="plotarea"><rect x="{L}" y="{T}" width="{W}" height="{H}"/>'
               '</clipPath></defs>']
        # frame and ticks
        out.append(f'<path d="M{L},{T} H{L + W} V{T + H} H{L} Z" fill="none" stroke="black"/>')
        for t in nice_ticks(*xlim):
            x = _num(sx(t))
            out.append(f'<path d="M{x},{T + H} v5" stroke="black"/>')
            out.append(f'<text x="{x}" y="{T + H + 18}" text-anchor="middle">{_label(t)}</text>')
        for t in nice_ticks(*ylim):
            y = _num(sy(t, ylim))
            out.append(f'<path d="M{L},{y} h-5" stroke="black"/>')
            out.append(f'<text x="{L - 8}" y="{y}" text-anchor="end" dy="4">{_label(t)}</text>')
        if y2lim is not None:
            for t in nice_ticks(*y2lim):
                y = _num(sy(t, y2lim))
                out.append(f'<path d="M{L + W},{y} h5" stroke="black"/>')
                out.append(f'<text x="{L + W + 8}" y="{y}" dy="4">{_label(t)}</text>')
        out.append(f'<text x="{L + W / 2}" y="{self.height - 12}" text-anchor="middle">'
                   f'{escape(self.xlabel)}</text>')
        out.append(f'<text transform="translate(16,{T + H / 2}) rotate(-90)" '
                   f'text-anchor="middle">{escape(self.ylabel)}</text>')
        if self.y2label:
            out.append(f'<text transform="translate({self.width - 14},{T + H / 2}) rotate(90)" '
                       f'text-anchor="middle">{escape(self.y2label)}</text>')
        if self.title:
            out.append(f'<text x="{L + W / 2}" y="{T - 14}" text-anchor="middle" '
                       f'font-size="14">{escape(self.title)}</text>')
        # data
        out.append('<g clip-path="url(#plotarea)">')
        for s in self.series:
            lim = y2lim if s["axis"] == "right" else ylim
            px, py = sx(s["x"]), sy(s["y"], lim)
            ok = np.isfinite(px) & np.isfinite(py)
            if s["kind"] == "line":
                pts = " ".join(f"{_num(a)},{_num(b)}" for a, b in zip(px[ok], py[ok]))
                dash = f' stroke-dasharray="{s["dash"]}"' if s["dash"] else ""
                out.append(f'<polyline points="{pts}" fill="none" stroke="{s["color"]}" '
                           f'stroke-width="{s["width"]}"{dash}/>')
            else:
                if s["yerr"] is not None:
                    lo = sy(s["y"] - s["yerr"], lim)
                    hi = sy(s["y"] + s["yerr"], lim)
                    d = " ".join(f"M{_num(a)},{_num(b)} V{_num(c)}"
                                 for a, b, c, k in zip(px, lo, hi, ok) if k)
                    out.append(f'<path d="{d}" stroke="{s["color"]}" stroke-width="0.8"/>')
                for a, b in zip(px[ok], py[ok]):
                    out.append(f'<circle cx="{_num(a)}" cy="{_num(b)}" r="{s["radius"]}" '
                               f'fill="{s["color"]}"/>')
        out.append("</g>")
        # legend
        labelled = [s for s in self.series if s["label"]]
        for i, s in enumerate(labelled):
            y = T + 14 + 16 * i
            x = L + W - 170
            if s["kind"] == "line":
                out.append(f'<path d="M{x},{y} h24" stroke="{s["color"]}" stroke-width="2"/>')
            else:
                out.append(f'<circle cx="{x + 12}" cy="{y}" r="3" fill="{s["color"]}"/>')
            out.append(f'<text x="{x + 30}" y="{y}" dy="4">{escape(s["label"])}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path):
        return atomic_write(path, self.render())
