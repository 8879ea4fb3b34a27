"""TrueType font parsing.

Reads the glyf-flavored subset of the format: head, maxp, cmap (formats 4
and 12), loca, glyf, hhea, hmtx. Composite glyphs are flattened at load time
(translation components only). CFF outlines, variable fonts, and collections
are rejected with UnsupportedFeature so callers can refuse the upload cleanly.

Parsing is total: any byte sequence yields a Font or a typed FontError, never
an uncaught exception or an unbounded loop. Table checksums are not verified;
many real fonts ship with stale ones.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional, Union

from .errors import IndexOutOfRange, MalformedFont, MissingTable, UnsupportedFeature

__all__ = [
    "Line",
    "QuadraticBezier",
    "Segment",
    "GlyphOutline",
    "Font",
    "load_font",
    "glyph_index",
    "glyph_outline",
]

Point = tuple[float, float]


@dataclass(frozen=True)
class Line:
    p0: Point
    p1: Point


@dataclass(frozen=True)
class QuadraticBezier:
    p0: Point
    control: Point
    p1: Point


Segment = Union[Line, QuadraticBezier]


@dataclass(frozen=True)
class GlyphOutline:
    """Closed contours of line / quadratic segments, in font units.

    bbox is recomputed from the parsed points (covers control points too);
    an empty glyph has zero contours and bbox (0, 0, 0, 0).
    """

    contours: tuple[tuple[Segment, ...], ...]
    bbox: tuple[float, float, float, float]

    @property
    def is_empty(self) -> bool:
        return not self.contours


@dataclass(frozen=True)
class Font:
    units_per_em: int
    codepoint_map: dict[int, int]
    glyphs: tuple[GlyphOutline, ...]
    ascent: int
    descent: int
    advance_widths: tuple[int, ...]


# flag bits of a simple-glyph point record
_ON_CURVE = 0x01
_X_SHORT = 0x02
_Y_SHORT = 0x04
_REPEAT = 0x08
_X_SAME_OR_POS = 0x10
_Y_SAME_OR_POS = 0x20

# composite component flags
_ARG_1_AND_2_ARE_WORDS = 0x0001
_ARGS_ARE_XY_VALUES = 0x0002
_WE_HAVE_A_SCALE = 0x0008
_MORE_COMPONENTS = 0x0020
_WE_HAVE_AN_X_AND_Y_SCALE = 0x0040
_WE_HAVE_A_TWO_BY_TWO = 0x0080

_MAX_COMPONENT_DEPTH = 8


def _read(fmt: str, data: bytes, offset: int):
    try:
        return struct.unpack_from(fmt, data, offset)
    except struct.error as e:
        raise MalformedFont(f"truncated data at offset {offset}: {e}") from None


def _table_bytes(data: bytes, tables: dict[str, tuple[int, int]], tag: str) -> bytes:
    if tag not in tables:
        raise MissingTable(tag)
    off, length = tables[tag]
    return data[off : off + length]


def _parse_directory(data: bytes) -> dict[str, tuple[int, int]]:
    if len(data) < 12:
        raise MalformedFont("file shorter than the 12-byte sfnt header")
    (version,) = _read(">I", data, 0)
    if version == 0x4F54544F:  # 'OTTO'
        raise UnsupportedFeature("CFF outlines are not supported")
    if version == 0x74746366:  # 'ttcf'
        raise UnsupportedFeature("font collections are not supported")
    if version not in (0x00010000, 0x74727565):  # 1.0 or 'true'
        raise MalformedFont(f"unrecognized sfnt version 0x{version:08X}")
    (num_tables,) = _read(">H", data, 4)
    dir_end = 12 + 16 * num_tables
    if dir_end > len(data):
        raise MalformedFont("table directory extends past end of file")
    tables: dict[str, tuple[int, int]] = {}
    for i in range(num_tables):
        tag_raw, _checksum, off, length = _read(">4sIII", data, 12 + 16 * i)
        if off + length > len(data) or off < dir_end:
            raise MalformedFont(
                f"table {tag_raw!r} spans [{off}, {off + length}) outside the file body"
            )
        tables[tag_raw.decode("latin-1")] = (off, length)
    if "fvar" in tables:
        raise UnsupportedFeature("variable fonts are not supported")
    if "glyf" not in tables:
        if "CFF " in tables or "CFF2" in tables:
            raise UnsupportedFeature("CFF outlines are not supported")
        raise MissingTable("glyf")
    return tables


def _parse_cmap(cmap: bytes, num_glyphs: int) -> dict[int, int]:
    if len(cmap) < 4:
        raise MalformedFont("cmap table too short")
    (_version, n_sub) = _read(">HH", cmap, 0)
    fmt4: list[int] = []
    fmt12: list[int] = []
    for i in range(n_sub):
        _plat, _enc, sub_off = _read(">HHI", cmap, 4 + 8 * i)
        if sub_off + 2 > len(cmap):
            raise MalformedFont("cmap subtable offset out of bounds")
        (fmt,) = _read(">H", cmap, sub_off)
        if fmt == 4:
            fmt4.append(sub_off)
        elif fmt == 12:
            fmt12.append(sub_off)
        # other formats are skipped; rejected below only if nothing usable
    if not fmt4 and not fmt12:
        raise UnsupportedFeature("no cmap subtable of format 4 or 12")

    # entries pointing past the glyph count are dropped rather than fatal:
    # the font stays usable for every valid codepoint
    mapping: dict[int, int] = {}
    for off in fmt4:
        _read_cmap4(cmap, off, mapping, num_glyphs)
    for off in fmt12:  # format 12 wins conflicts: full Unicode coverage
        _read_cmap12(cmap, off, mapping, num_glyphs)
    return mapping


def _read_cmap4(cmap: bytes, off: int, out: dict[int, int], num_glyphs: int) -> None:
    _fmt, _length, _lang, seg_count_x2 = _read(">HHHH", cmap, off)
    seg_count = seg_count_x2 // 2
    if seg_count == 0:
        return
    ends_off = off + 14
    starts_off = ends_off + seg_count_x2 + 2  # +2 skips reservedPad
    deltas_off = starts_off + seg_count_x2
    ranges_off = deltas_off + seg_count_x2
    if ranges_off + seg_count_x2 > len(cmap):
        raise MalformedFont("cmap format 4 arrays out of bounds")
    for i in range(seg_count):
        (end,) = _read(">H", cmap, ends_off + 2 * i)
        (start,) = _read(">H", cmap, starts_off + 2 * i)
        (delta,) = _read(">H", cmap, deltas_off + 2 * i)
        (range_off,) = _read(">H", cmap, ranges_off + 2 * i)
        if start > end:
            raise MalformedFont("cmap format 4 segment with start > end")
        for code in range(start, end + 1):
            if code == 0xFFFF:  # sentinel segment, not a real mapping
                continue
            if range_off == 0:
                gid = (code + delta) & 0xFFFF
            else:
                gid_addr = ranges_off + 2 * i + range_off + 2 * (code - start)
                if gid_addr + 2 > len(cmap):
                    raise MalformedFont("cmap format 4 glyph id address out of bounds")
                (gid,) = _read(">H", cmap, gid_addr)
                if gid != 0:
                    gid = (gid + delta) & 0xFFFF
            if 0 < gid < num_glyphs:
                out[code] = gid


def _read_cmap12(cmap: bytes, off: int, out: dict[int, int], num_glyphs: int) -> None:
    _fmt, _res, _length, _lang, n_groups = _read(">HHIII", cmap, off)
    if off + 16 + 12 * n_groups > len(cmap):
        raise MalformedFont("cmap format 12 groups out of bounds")
    for i in range(n_groups):
        start, end, start_gid = _read(">III", cmap, off + 16 + 12 * i)
        if start > end or end - start > 0x10FFFF:
            raise MalformedFont("cmap format 12 group with invalid code range")
        for code in range(start, end + 1):
            gid = start_gid + (code - start)
            if 0 < gid < num_glyphs:
                out[code] = gid


def _parse_loca(loca: bytes, num_glyphs: int, long_format: bool, glyf_len: int) -> list[int]:
    n = num_glyphs + 1
    if long_format:
        if len(loca) < 4 * n:
            raise MalformedFont("loca table shorter than glyph count requires")
        offsets = list(struct.unpack_from(f">{n}I", loca, 0))
    else:
        if len(loca) < 2 * n:
            raise MalformedFont("loca table shorter than glyph count requires")
        offsets = [v * 2 for v in struct.unpack_from(f">{n}H", loca, 0)]
    for i in range(num_glyphs):
        if offsets[i] > offsets[i + 1]:
            raise MalformedFont(f"loca offsets decrease at glyph {i}")
    if offsets[-1] > glyf_len:
        raise MalformedFont("loca points past the end of glyf")
    return offsets


def _contour_segments(points: list[tuple[float, float, bool]]) -> tuple[Segment, ...]:
    """Turn one TrueType contour point run into closed segments.

    Consecutive off-curve points get the implied on-curve midpoint; a contour
    that starts off-curve is rotated to start on-curve (synthesizing the
    start from the last/first midpoint when no on-curve point exists).
    """
    if len(points) < 2:
        return ()
    # materialize implied on-curve midpoints
    expanded: list[tuple[float, float, bool]] = []
    n = len(points)
    for i in range(n):
        x, y, on = points[i]
        expanded.append((x, y, on))
        nx, ny, non = points[(i + 1) % n]
        if not on and not non:
            expanded.append(((x + nx) / 2.0, (y + ny) / 2.0, True))
    # rotate so the walk starts on-curve
    start = next((i for i, p in enumerate(expanded) if p[2]), None)
    if start is None:
        return ()  # all off-curve and none adjacent: impossible after expansion
    expanded = expanded[start:] + expanded[:start]
    segments: list[Segment] = []
    cur = (expanded[0][0], expanded[0][1])
    i = 1
    m = len(expanded)
    while i <= m:
        x, y, on = expanded[i % m] if i < m else expanded[0]
        if on:
            if (x, y) != cur:
                segments.append(Line(cur, (x, y)))
            cur = (x, y)
            i += 1
        else:
            ex, ey, eon = expanded[(i + 1) % m] if i + 1 < m else expanded[0]
            assert eon, "midpoint expansion guarantees on-curve after off-curve"
            segments.append(QuadraticBezier(cur, (x, y), (ex, ey)))
            cur = (ex, ey)
            i += 2
    return tuple(segments)


def _outline_from_point_contours(
    contours: list[list[tuple[float, float, bool]]],
) -> GlyphOutline:
    seg_contours = tuple(
        segs for pts in contours if (segs := _contour_segments(pts))
    )
    if not seg_contours:
        return GlyphOutline((), (0.0, 0.0, 0.0, 0.0))
    xs: list[float] = []
    ys: list[float] = []
    for pts in contours:
        for x, y, _ in pts:
            xs.append(x)
            ys.append(y)
    return GlyphOutline(seg_contours, (min(xs), min(ys), max(xs), max(ys)))


def _parse_simple_glyph(
    rec: bytes, n_contours: int
) -> list[list[tuple[float, float, bool]]]:
    end_pts = list(_read(f">{n_contours}H", rec, 10))
    for i in range(1, n_contours):
        if end_pts[i] < end_pts[i - 1]:
            raise MalformedFont("glyph contour end points decrease")
    n_points = end_pts[-1] + 1 if end_pts else 0
    (instr_len,) = _read(">H", rec, 10 + 2 * n_contours)
    pos = 10 + 2 * n_contours + 2 + instr_len
    if pos > len(rec):
        raise MalformedFont("glyph instructions run past the record")

    flags: list[int] = []
    while len(flags) < n_points:
        if pos >= len(rec):
            raise MalformedFont("glyph flags run past the record")
        flag = rec[pos]
        pos += 1
        flags.append(flag)
        if flag & _REPEAT:
            if pos >= len(rec):
                raise MalformedFont("glyph flag repeat count truncated")
            count = rec[pos]
            pos += 1
            flags.extend([flag] * count)
    flags = flags[:n_points]

    def read_deltas(short_bit: int, same_bit: int, start: int) -> tuple[list[int], int]:
        deltas: list[int] = []
        p = start
        for flag in flags:
            if flag & short_bit:
                if p >= len(rec):
                    raise MalformedFont("glyph coordinates truncated")
                v = rec[p]
                p += 1
                deltas.append(v if flag & same_bit else -v)
            elif flag & same_bit:
                deltas.append(0)
            else:
                (v,) = _read(">h", rec, p)
                p += 2
                deltas.append(v)
        return deltas, p

    dx, pos = read_deltas(_X_SHORT, _X_SAME_OR_POS, pos)
    dy, _ = read_deltas(_Y_SHORT, _Y_SAME_OR_POS, pos)

    contours: list[list[tuple[float, float, bool]]] = []
    x = y = 0
    point_i = 0
    for end in end_pts:
        contour: list[tuple[float, float, bool]] = []
        while point_i <= end:
            x += dx[point_i]
            y += dy[point_i]
            contour.append((float(x), float(y), bool(flags[point_i] & _ON_CURVE)))
            point_i += 1
        contours.append(contour)
    return contours


def _parse_composite_components(rec: bytes) -> list[tuple[int, float, float]]:
    components: list[tuple[int, float, float]] = []
    pos = 10
    while True:
        flags, gid = _read(">HH", rec, pos)
        pos += 4
        if flags & (_WE_HAVE_A_SCALE | _WE_HAVE_AN_X_AND_Y_SCALE | _WE_HAVE_A_TWO_BY_TWO):
            raise UnsupportedFeature("scaled or rotated composite components are not supported")
        if not flags & _ARGS_ARE_XY_VALUES:
            raise UnsupportedFeature("point-matching composite components are not supported")
        if flags & _ARG_1_AND_2_ARE_WORDS:
            dx, dy = _read(">hh", rec, pos)
            pos += 4
        else:
            dx, dy = _read(">bb", rec, pos)
            pos += 2
        components.append((gid, float(dx), float(dy)))
        if not flags & _MORE_COMPONENTS:
            break
    return components


def _resolve_glyph(
    gid: int,
    glyf: bytes,
    loca: list[int],
    cache: dict[int, list[list[tuple[float, float, bool]]]],
    depth: int = 0,
) -> list[list[tuple[float, float, bool]]]:
    if gid in cache:
        return cache[gid]
    if depth > _MAX_COMPONENT_DEPTH:
        raise MalformedFont("composite glyph nesting exceeds the depth limit")
    start, end = loca[gid], loca[gid + 1]
    if start == end:
        cache[gid] = []
        return []
    rec = glyf[start:end]
    (n_contours,) = _read(">h", rec, 0)
    if n_contours >= 0:
        contours = _parse_simple_glyph(rec, n_contours)
    else:
        contours = []
        for comp_gid, dx, dy in _parse_composite_components(rec):
            if comp_gid >= len(loca) - 1:
                raise MalformedFont(f"composite component references glyph {comp_gid} out of range")
            if comp_gid == gid:
                raise MalformedFont("composite glyph references itself")
            for sub in _resolve_glyph(comp_gid, glyf, loca, cache, depth + 1):
                contours.append([(x + dx, y + dy, on) for x, y, on in sub])
    cache[gid] = contours
    return contours


def load_font(data: bytes) -> Font:
    tables = _parse_directory(data)
    for tag in ("head", "maxp", "cmap", "loca", "hhea", "hmtx"):
        if tag not in tables:
            raise MissingTable(tag)

    head = _table_bytes(data, tables, "head")
    if len(head) < 54:
        raise MalformedFont("head table too short")
    (units_per_em,) = _read(">H", head, 18)
    if units_per_em == 0:
        raise MalformedFont("unitsPerEm is zero")
    (index_to_loc,) = _read(">h", head, 50)
    if index_to_loc not in (0, 1):
        raise MalformedFont(f"indexToLocFormat {index_to_loc} is invalid")

    maxp = _table_bytes(data, tables, "maxp")
    if len(maxp) < 6:
        raise MalformedFont("maxp table too short")
    (num_glyphs,) = _read(">H", maxp, 4)
    if num_glyphs == 0:
        raise MalformedFont("font declares zero glyphs")

    hhea = _table_bytes(data, tables, "hhea")
    if len(hhea) < 36:
        raise MalformedFont("hhea table too short")
    ascent, descent = _read(">hh", hhea, 4)
    (num_hmetrics,) = _read(">H", hhea, 34)
    if num_hmetrics == 0 or num_hmetrics > num_glyphs:
        raise MalformedFont("numberOfHMetrics out of range")

    hmtx = _table_bytes(data, tables, "hmtx")
    if len(hmtx) < 4 * num_hmetrics:
        raise MalformedFont("hmtx table too short")
    advances = [
        struct.unpack_from(">H", hmtx, 4 * i)[0] for i in range(num_hmetrics)
    ]
    # glyphs past numberOfHMetrics repeat the last advance
    advances.extend([advances[-1]] * (num_glyphs - num_hmetrics))

    glyf = _table_bytes(data, tables, "glyf")
    loca = _parse_loca(
        _table_bytes(data, tables, "loca"), num_glyphs, index_to_loc == 1, len(glyf)
    )

    codepoint_map = _parse_cmap(_table_bytes(data, tables, "cmap"), num_glyphs)

    cache: dict[int, list[list[tuple[float, float, bool]]]] = {}
    glyphs = tuple(
        _outline_from_point_contours(_resolve_glyph(gid, glyf, loca, cache))
        for gid in range(num_glyphs)
    )

    return Font(
        units_per_em=units_per_em,
        codepoint_map=codepoint_map,
        glyphs=glyphs,
        ascent=ascent,
        descent=descent,
        advance_widths=tuple(advances),
    )


def glyph_index(font: Font, codepoint: int) -> Optional[int]:
    """Map a Unicode scalar to its glyph index; None when unmapped."""
    return font.codepoint_map.get(codepoint)


def glyph_outline(font: Font, index: int) -> GlyphOutline:
    if not 0 <= index < len(font.glyphs):
        raise IndexOutOfRange(f"glyph index {index} not in [0, {len(font.glyphs)})")
    return font.glyphs[index]
