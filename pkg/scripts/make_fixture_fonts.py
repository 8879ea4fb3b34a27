#!/usr/bin/env python3
"""Construct the bundled fixture fonts as raw TrueType binaries.

This script is deliberately independent of the glyphkit parser: it writes
sfnt tables by hand with struct so the fixtures can serve as ground truth.
Each font is tiny (a handful of geometric glyphs) but exercises a specific
corner of the format: plain contours, quadratic off-curve runs, composite
glyphs, format 12 cmaps, and one deliberately unsupported scaled composite.
"""

from __future__ import annotations

import argparse
import struct
from pathlib import Path

ON_CURVE = 0x01
ARG_1_AND_2_ARE_WORDS = 0x0001
ARGS_ARE_XY_VALUES = 0x0002
WE_HAVE_A_SCALE = 0x0008
MORE_COMPONENTS = 0x0020


class SimpleGlyph:
    def __init__(self, contours, advance=1000):
        # contours: list of [(x, y, on_curve), ...]
        self.contours = contours
        self.advance = advance

    def points(self):
        return [p for c in self.contours for p in c]

    def bbox(self):
        pts = self.points()
        if not pts:
            return (0, 0, 0, 0)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return (min(xs), min(ys), max(xs), max(ys))

    def compile(self):
        if not self.contours:
            return b""
        xmin, ymin, xmax, ymax = self.bbox()
        data = struct.pack(">hhhhh", len(self.contours), xmin, ymin, xmax, ymax)
        end_pts = []
        total = -1
        for c in self.contours:
            total += len(c)
            end_pts.append(total)
        data += struct.pack(f">{len(end_pts)}H", *end_pts)
        data += struct.pack(">H", 0)  # no instructions
        pts = self.points()
        # uncompressed encoding: one flag byte per point, all deltas as int16
        for _, _, on in pts:
            data += struct.pack(">B", ON_CURVE if on else 0)
        prev = 0
        for x, _, _ in pts:
            data += struct.pack(">h", x - prev)
            prev = x
        prev = 0
        for _, y, _ in pts:
            data += struct.pack(">h", y - prev)
            prev = y
        return data


class CompositeGlyph:
    def __init__(self, components, bbox, advance=1000, scaled=False):
        # components: list of (glyph_index, dx, dy)
        self.components = components
        self._bbox = bbox
        self.advance = advance
        self.scaled = scaled

    def bbox(self):
        return self._bbox

    def compile(self):
        xmin, ymin, xmax, ymax = self._bbox
        data = struct.pack(">hhhhh", -1, xmin, ymin, xmax, ymax)
        for i, (gid, dx, dy) in enumerate(self.components):
            flags = ARG_1_AND_2_ARE_WORDS | ARGS_ARE_XY_VALUES
            if i + 1 < len(self.components):
                flags |= MORE_COMPONENTS
            if self.scaled:
                flags |= WE_HAVE_A_SCALE
            data += struct.pack(">HHhh", flags, gid, dx, dy)
            if self.scaled:
                data += struct.pack(">h", int(0.5 * 16384))  # F2Dot14 0.5
        return data


def _pad4(data):
    return data + b"\x00" * (-len(data) % 4)


def _checksum(data):
    data = _pad4(data)
    total = 0
    for (word,) in struct.iter_unpack(">I", data):
        total = (total + word) & 0xFFFFFFFF
    return total


def _cmap_format4(mapping):
    # one segment per contiguous (code, glyph) run, plus the 0xFFFF terminator
    codes = sorted(mapping)
    segments = []
    for code in codes:
        gid = mapping[code]
        if segments and code == segments[-1][1] + 1 and gid == mapping[segments[-1][1]] + (code - segments[-1][1]):
            segments[-1] = (segments[-1][0], code)
        else:
            segments.append((code, code))
    segments.append((0xFFFF, 0xFFFF))
    seg_count = len(segments)
    ends = [s[1] for s in segments]
    starts = [s[0] for s in segments]
    deltas = []
    for start, _ in segments:
        if start == 0xFFFF:
            deltas.append(1)
        else:
            deltas.append((mapping[start] - start) & 0xFFFF)
    offsets = [0] * seg_count
    search_range = 2
    entry_selector = 0
    while search_range * 2 <= seg_count * 2:
        search_range *= 2
        entry_selector += 1
    body = struct.pack(
        ">HHHH",
        seg_count * 2,
        search_range,
        entry_selector,
        seg_count * 2 - search_range,
    )
    body += struct.pack(f">{seg_count}H", *ends)
    body += struct.pack(">H", 0)
    body += struct.pack(f">{seg_count}H", *starts)
    body += struct.pack(f">{seg_count}h", *[d - 0x10000 if d > 0x7FFF else d for d in deltas])
    body += struct.pack(f">{seg_count}H", *offsets)
    header = struct.pack(">HHH", 4, 14 + len(body), 0)
    return header + body


def _cmap_format12(mapping):
    groups = []
    for code in sorted(mapping):
        gid = mapping[code]
        if groups and code == groups[-1][1] + 1 and gid == groups[-1][2] + (code - groups[-1][0]):
            groups[-1] = (groups[-1][0], code, groups[-1][2])
        else:
            groups.append((code, code, gid))
    body = b"".join(struct.pack(">III", s, e, g) for s, e, g in groups)
    header = struct.pack(">HHIII", 12, 0, 16 + len(body), 0, len(groups))
    return header + body


def _cmap_table(mapping4, mapping12=None):
    subtables = [(3, 1, _cmap_format4(mapping4))]
    if mapping12 is not None:
        subtables.append((3, 10, _cmap_format12(mapping12)))
    header = struct.pack(">HH", 0, len(subtables))
    offset = 4 + 8 * len(subtables)
    records = b""
    blobs = b""
    for plat, enc, blob in subtables:
        records += struct.pack(">HHI", plat, enc, offset)
        offset += len(blob)
        blobs += blob
    return header + records + blobs


def build_font(glyphs, cmap, units_per_em=1000, ascent=800, descent=-200, cmap12=None, num_hmetrics=None):
    """Assemble a complete sfnt byte string from glyph objects and a cmap dict."""
    glyf_data = b""
    loca = [0]
    for g in glyphs:
        blob = _pad4(g.compile())
        glyf_data += blob
        loca.append(len(glyf_data))

    long_loca = loca[-1] > 0x1FFFE
    if long_loca:
        loca_data = struct.pack(f">{len(loca)}I", *loca)
    else:
        loca_data = struct.pack(f">{len(loca)}H", *[v // 2 for v in loca])

    boxes = [g.bbox() for g in glyphs if g.bbox() != (0, 0, 0, 0)]
    xmin = min((b[0] for b in boxes), default=0)
    ymin = min((b[1] for b in boxes), default=0)
    xmax = max((b[2] for b in boxes), default=0)
    ymax = max((b[3] for b in boxes), default=0)

    head = struct.pack(
        ">IIIIHHqqhhhhHHhhh",
        0x00010000,
        0x00010000,
        0,  # checkSumAdjustment patched later
        0x5F0F3CF5,
        0x0003,
        units_per_em,
        0,
        0,
        xmin,
        ymin,
        xmax,
        ymax,
        0,
        8,
        2,
        1 if long_loca else 0,
        0,
    )

    advance_max = max(g.advance for g in glyphs)
    if num_hmetrics is None:
        num_hmetrics = len(glyphs)
    hhea = struct.pack(
        ">IhhhHhhhhhhhhhhhH",
        0x00010000,
        ascent,
        descent,
        0,
        advance_max,
        0,
        0,
        xmax,
        1,
        0,
        0,
        0, 0, 0, 0,
        0,
        num_hmetrics,
    )

    max_points = max((sum(len(c) for c in g.contours) for g in glyphs if isinstance(g, SimpleGlyph)), default=0)
    max_contours = max((len(g.contours) for g in glyphs if isinstance(g, SimpleGlyph)), default=0)
    n_composite = sum(1 for g in glyphs if isinstance(g, CompositeGlyph))
    maxp = struct.pack(
        ">IHHHHHHHHHHHHHH",
        0x00010000,
        len(glyphs),
        max_points,
        max_contours,
        max_points,
        max_contours,
        2,
        0,
        0,
        0,
        0,
        0,
        0,
        max(2, n_composite),
        1 if n_composite else 0,
    )

    # glyphs past numberOfHMetrics carry only a left side bearing; readers
    # must repeat the last explicit advance for them
    hmtx = b"".join(
        struct.pack(">Hh", g.advance, g.bbox()[0]) for g in glyphs[:num_hmetrics]
    ) + b"".join(struct.pack(">h", g.bbox()[0]) for g in glyphs[num_hmetrics:])

    name = struct.pack(">HHH", 0, 0, 6)
    post = struct.pack(">IIhhIIIII", 0x00030000, 0, 0, 0, 0, 0, 0, 0, 0)

    tables = {
        b"cmap": _cmap_table(cmap, cmap12),
        b"glyf": glyf_data,
        b"head": head,
        b"hhea": hhea,
        b"hmtx": hmtx,
        b"loca": loca_data,
        b"maxp": maxp,
        b"name": name,
        b"post": post,
    }

    tags = sorted(tables)
    num = len(tags)
    search_range = 16
    entry_selector = 0
    while search_range * 2 <= num * 16:
        search_range *= 2
        entry_selector += 1
    font = struct.pack(">IHHHH", 0x00010000, num, search_range, entry_selector, num * 16 - search_range)

    offset = 12 + 16 * num
    directory = b""
    body = b""
    head_offset = None
    for tag in tags:
        data = tables[tag]
        if tag == b"head":
            head_offset = offset
        directory += struct.pack(">4sIII", tag, _checksum(data), offset, len(data))
        body += _pad4(data)
        offset += len(_pad4(data))
    font = font + directory + body

    adjustment = (0xB1B0AFBA - _checksum(font)) & 0xFFFFFFFF
    font = font[: head_offset + 8] + struct.pack(">I", adjustment) + font[head_offset + 12 :]
    return font


def rect_contour(x0, y0, x1, y1):
    return [(x0, y0, True), (x1, y0, True), (x1, y1, True), (x0, y1, True)]


def notdef():
    return SimpleGlyph([], advance=600)


def make_testsquare():
    square = SimpleGlyph([rect_contour(100, 100, 900, 900)], advance=1000)
    space = SimpleGlyph([], advance=500)
    return build_font([notdef(), square, space], {ord("A"): 1, ord(" "): 2})


def make_testcurves():
    # rounded square: four on-curve cardinal points, off-curve corners
    rounded = SimpleGlyph(
        [[
            (500, 100, True), (900, 100, False), (900, 500, True), (900, 900, False),
            (500, 900, True), (100, 900, False), (100, 500, True), (100, 100, False),
        ]],
        advance=1000,
    )
    # consecutive off-curve pair (50,0) and (150,0): midpoint (100,0) is implied
    offrun = SimpleGlyph(
        [[
            (0, 100, True), (50, 0, False), (150, 0, False), (200, 100, True), (100, 250, True),
        ]],
        advance=300,
    )
    # contour whose first point is off-curve
    offstart = SimpleGlyph(
        [[
            (100, 500, False), (300, 100, True), (500, 500, True), (300, 700, True),
        ]],
        advance=600,
    )
    cmap = {ord("O"): 1, ord("C"): 2, ord("I"): 3}
    return build_font([notdef(), rounded, offrun, offstart], cmap)


def make_testcomposite():
    base = SimpleGlyph([rect_contour(200, 200, 600, 600)], advance=800)
    double = CompositeGlyph([(1, 0, 0), (1, 300, 300)], bbox=(200, 200, 900, 900), advance=1100)
    return build_font([notdef(), base, double], {ord("B"): 1, ord("D"): 2})


def make_testscaled():
    base = SimpleGlyph([rect_contour(200, 200, 600, 600)], advance=800)
    scaled = CompositeGlyph([(1, 100, 100)], bbox=(200, 200, 700, 700), advance=900, scaled=True)
    return build_font([notdef(), base, scaled], {ord("B"): 1, ord("S"): 2})


def make_testhmtx():
    # three letter glyphs but only two explicit metrics: 'B' and 'C' must
    # inherit A's 450 advance via last-entry repetition
    a = SimpleGlyph([rect_contour(100, 100, 400, 700)], advance=450)
    b = SimpleGlyph([rect_contour(100, 100, 500, 600)], advance=450)
    c = SimpleGlyph([rect_contour(100, 100, 350, 800)], advance=450)
    return build_font(
        [notdef(), a, b, c],
        {ord("A"): 1, ord("B"): 2, ord("C"): 3},
        num_hmetrics=2,
    )


def make_testcmap12():
    square = SimpleGlyph([rect_contour(100, 100, 900, 900)], advance=1000)
    triangle = SimpleGlyph([[(100, 100, True), (900, 100, True), (500, 900, True)]], advance=1000)
    # format 4 says 'A' -> 1, format 12 disagrees ('A' -> 2) and adds a
    # supplementary-plane codepoint; parsers preferring format 12 see both
    return build_font(
        [notdef(), square, triangle],
        {ord("A"): 1},
        cmap12={ord("A"): 2, 0x1D538: 1},
    )


def _letter_shapes(style):
    """Per-letter contours for A..H, parameterized by family style.

    Every family draws the same letter as a different silhouette so a
    density-grid classifier can tell the families apart.
    """
    glyphs = {}
    for i, ch in enumerate("ABCDEFGH"):
        if style == "blockwide":
            w = 500 + 50 * i
            contours = [rect_contour(100, 100, 100 + w, 500 + 30 * i)]
            # per-letter notch keeps letters distinguishable
            contours.append(list(reversed(rect_contour(200 + 40 * i, 200, 320 + 40 * i, 360))))
            adv = 200 + w
        elif style == "blocknarrow":
            h = 600 + 30 * i
            contours = [rect_contour(100, 50, 260 + 14 * i, 50 + h)]
            adv = 360 + 14 * i
        elif style == "rounded":
            r = 300 + 25 * i
            cx, cy = 400, 400
            contours = [[
                (cx, cy - r, True), (cx + r, cy - r, False), (cx + r, cy, True),
                (cx + r, cy + r, False), (cx, cy + r, True), (cx - r, cy + r, False),
                (cx - r, cy, True), (cx - r, cy - r, False),
            ]]
            adv = 820
        else:  # slanted
            shear = 40 * (i + 1)
            contours = [[
                (100 + shear, 100, True), (500 + shear, 100, True),
                (500, 700, True), (100, 700, True),
            ]]
            adv = 660
        glyphs[ch] = SimpleGlyph(contours, advance=adv)
    return glyphs


def make_family(style):
    shapes = _letter_shapes(style)
    glyphs = [notdef()]
    cmap = {}
    for ch in sorted(shapes):
        cmap[ord(ch)] = len(glyphs)
        glyphs.append(shapes[ch])
    glyphs.append(SimpleGlyph([], advance=400))
    cmap[ord(" ")] = len(glyphs) - 1
    return build_font(glyphs, cmap)


FONTS = {
    "testsquare.ttf": make_testsquare,
    "testcurves.ttf": make_testcurves,
    "testcomposite.ttf": make_testcomposite,
    "testscaled.ttf": make_testscaled,
    "testcmap12.ttf": make_testcmap12,
    "testhmtx.ttf": make_testhmtx,
    "blockwide.ttf": lambda: make_family("blockwide"),
    "blocknarrow.ttf": lambda: make_family("blocknarrow"),
    "rounded.ttf": lambda: make_family("rounded"),
    "slanted.ttf": lambda: make_family("slanted"),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("tests/fixtures/fonts"))
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, builder in FONTS.items():
        data = builder()
        (args.out_dir / name).write_bytes(data)
        print(f"wrote {args.out_dir / name} ({len(data)} bytes)")


if __name__ == "__main__":
    main()
