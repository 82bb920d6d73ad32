"""Independent oracles and generators shared by the test modules.

Nothing here calls into the code under test.
"""

import math
import struct
from collections import Counter

import numpy as np


def star_polygon(rng, n, radius=10.0, center=(0.0, 0.0)):
    """Random simple polygon: sorted angles, random radii (CCW)."""
    angles = np.sort(rng.uniform(0, 2 * math.pi, n))
    # keep angles apart so no two vertices coincide
    angles = np.linspace(0, 2 * math.pi, n, endpoint=False) * 0.5 + angles * 0.5
    angles = np.sort(angles)
    r = rng.uniform(0.3, 1.0, n) * radius
    return np.column_stack([center[0] + r * np.cos(angles), center[1] + r * np.sin(angles)])


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _proper_cross(p1, p2, q1, q2):
    d1, d2 = _cross(q1, q2, p1), _cross(q1, q2, p2)
    d3, d4 = _cross(p1, p2, q1), _cross(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def two_opt_polygon(rng, n, scale=10.0):
    """Random simple polygon by untangling a random tour (often non-star-shaped)."""
    pts = rng.uniform(-scale, scale, (n, 2))
    order = list(range(n))
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                a, b = pts[order[i]], pts[order[i + 1]]
                c, d = pts[order[j]], pts[order[(j + 1) % n]]
                if _proper_cross(a, b, c, d):
                    order[i + 1:j + 1] = reversed(order[i + 1:j + 1])
                    changed = True
    poly = pts[order]
    if shoelace(poly) < 0:
        poly = poly[::-1]
    return poly


def shoelace(poly):
    x, y = np.asarray(poly, dtype=float).T
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def winding_number(px, py, poly):
    """Sum of signed angles subtended by each edge; +-1 inside, 0 outside."""
    total = 0.0
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i][0] - px, poly[i][1] - py
        bx, by = poly[(i + 1) % n][0] - px, poly[(i + 1) % n][1] - py
        total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return round(total / (2 * math.pi))


def distance_to_boundary(px, py, poly):
    best = math.inf
    n = len(poly)
    for i in range(n):
        a = np.asarray(poly[i], float)
        b = np.asarray(poly[(i + 1) % n], float)
        ab = b - a
        t = np.clip(np.dot([px, py] - a, ab) / np.dot(ab, ab), 0, 1)
        best = min(best, float(np.hypot(*([px, py] - (a + t * ab)))))
    return best


def brute_force_earclip(poly):
    """Slow O(n^3) ear clipping: rescan every vertex against every other each round."""
    idx = list(range(len(poly)))
    tris = []

    def inside(p, a, b, c):
        return _cross(a, b, p) >= 0 and _cross(b, c, p) >= 0 and _cross(c, a, p) >= 0

    while len(idx) > 3:
        for k in range(len(idx)):
            a, b, c = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            if _cross(poly[a], poly[b], poly[c]) <= 0:
                continue
            if any(inside(poly[j], poly[a], poly[b], poly[c]) for j in idx if j not in (a, b, c)):
                continue
            tris.append((a, b, c))
            idx.pop(k)
            break
        else:
            raise ValueError("oracle found no ear")
    tris.append(tuple(idx))
    return tris


def triangle_area(p, tri):
    a, b, c = (np.asarray(p[i], float) for i in tri)
    return 0.5 * float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def edge_incidence(tris):
    """Map undirected edge -> number of triangles using it."""
    counts = Counter()
    for t in tris:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            counts[(min(a, b), max(a, b))] += 1
    return counts


def signed_volume(verts, tris):
    v = np.asarray(verts, float)
    total = 0.0
    for a, b, c in tris:
        total += float(np.dot(v[a], np.cross(v[b], v[c]))) / 6.0
    return total


def quad_oracle(valid):
    """Enumerate 2x2 pixel blocks whose four pixels are all valid."""
    h, w = valid.shape
    return [
        (r, c)
        for r in range(h - 1)
        for c in range(w - 1)
        if valid[r, c] and valid[r, c + 1] and valid[r + 1, c] and valid[r + 1, c + 1]
    ]


def subdivide_oracle(coords, spacing):
    """Densify by walking each edge in equal steps of at most ``spacing``."""
    out = [tuple(coords[0])]
    for (ax, ay), (bx, by) in zip(coords[:-1], coords[1:]):
        length = math.hypot(bx - ax, by - ay)
        parts = 1
        while length / parts > spacing * (1 + 1e-12):
            parts += 1
        for k in range(1, parts + 1):
            out.append((ax + (bx - ax) * k / parts, ay + (by - ay) * k / parts))
    return out


def hand_tiff(payload, width, height, bits=32, sample_format=3, compression=1, predictor=1,
              spp=1, order="<", magic=42):
    """Single-strip TIFF assembled byte by byte."""
    entries = [
        (256, 4, 1, width), (257, 4, 1, height), (258, 3, 1, bits), (259, 3, 1, compression),
        (262, 3, 1, 1), (273, 4, 1, None), (277, 3, 1, spp), (278, 4, 1, height),
        (279, 4, 1, len(payload)), (317, 3, 1, predictor), (339, 3, 1, sample_format),
    ]
    doubles = {33550: (0.25, 0.5, 0.0), 33922: (0.0, 0.0, 0.0, 10.0, 60.0, 0.0)}
    entries += [(tag, 12, len(v), v) for tag, v in doubles.items()]
    entries.sort()
    ifd_offset = 8
    ifd_size = 2 + 12 * len(entries) + 4
    blob = bytearray()
    data_start = ifd_offset + ifd_size
    out_entries = []
    for tag, ftype, count, value in entries:
        if ftype == 12:
            off = data_start + len(blob)
            blob += struct.pack(order + "d" * count, *value)
            out_entries.append(struct.pack(order + "HHII", tag, ftype, count, off))
        elif tag == 273:
            out_entries.append((tag, ftype, count))
        elif ftype == 3:
            out_entries.append(struct.pack(order + "HHIHH", tag, ftype, count, value, 0))
        else:
            out_entries.append(struct.pack(order + "HHII", tag, ftype, count, value))
    strip_offset = data_start + len(blob)
    raw = bytearray((b"II" if order == "<" else b"MM") + struct.pack(order + "HI", magic, ifd_offset))
    raw += struct.pack(order + "H", len(entries))
    for e in out_entries:
        if isinstance(e, tuple):
            e = struct.pack(order + "HHII", e[0], e[1], e[2], strip_offset)
        raw += e
    raw += struct.pack(order + "I", 0)
    raw += blob
    raw += payload
    return bytes(raw)
