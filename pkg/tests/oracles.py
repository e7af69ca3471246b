"""Floating-point reference formulas used to cross-check exact computations."""
import math


def diagonal(n: int, k: int) -> float:
    """a_k = sin(k pi/n) / sin(pi/n), the k-th diagonal of a regular n-gon with unit side."""
    return math.sin(k * math.pi / n) / math.sin(math.pi / n)


def triangle_area(n: int, triple) -> float:
    """Area of the triangle with angles k_i pi/n and sides a_{k_i}."""
    k1, k2, k3 = triple
    a, b = diagonal(n, k2), diagonal(n, k3)
    return 0.5 * a * b * math.sin(k1 * math.pi / n)


def area_ratio(n: int, triple) -> float:
    """Area in units of the narrow triangle T(1, 1, n-2)."""
    k1, k2, k3 = triple
    return diagonal(n, k1) * diagonal(n, k2) * diagonal(n, k3) / diagonal(n, 2)


def poly_eval(coeffs, x: float) -> float:
    return sum(c * x ** i for i, c in enumerate(coeffs))


def conjugates(n: int, coeffs) -> list[float]:
    """Values of sum c_i a_{i+1} under a_2 -> 2cos((2j-1) pi / n)."""
    out = []
    for j in range(1, (n - 1) // 2 + 1):
        th = (2 * j - 1) * math.pi / n
        out.append(sum(c * math.sin((i + 1) * th) / math.sin(th) for i, c in enumerate(coeffs)))
    return out


def cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def embed(n: int, p) -> tuple[float, float]:
    return (sum(c * math.cos(i * math.pi / n) for i, c in enumerate(p)),
            sum(c * math.sin(i * math.pi / n) for i, c in enumerate(p)))


def area(tri) -> float:
    return 0.5 * abs(cross(*tri))


def _on_open_segment(a, b, p, tol=1e-7) -> bool:
    if abs(cross(a, b, p)) > tol * max(1.0, math.dist(a, b)):
        return False
    t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / math.dist(a, b) ** 2
    return tol < t < 1 - tol


def _separated(t1, t2, tol=1e-7) -> bool:
    for tri in (t1, t2):
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            nx, ny = a[1] - b[1], b[0] - a[0]
            p1 = [nx * p[0] + ny * p[1] for p in t1]
            p2 = [nx * p[0] + ny * p[1] for p in t2]
            if max(p1) <= min(p2) + tol or max(p2) <= min(p1) + tol:
                return True
    return False


def patch_defects(tris, region) -> list[str]:
    """Float audit of a triangle patch against a target region.

    Reports overlapping interiors, vertices in the interior of another
    tile's edge, vertices outside the region and an area mismatch.
    """
    out = []
    verts = {(round(x, 7), round(y, 7)): (x, y) for t in tris for (x, y) in t}
    for i in range(len(tris)):
        for j in range(i + 1, len(tris)):
            if not _separated(tris[i], tris[j]):
                out.append(f"overlap {i} {j}")
    for t in tris:
        for k in range(3):
            a, b = t[k], t[(k + 1) % 3]
            for p in verts.values():
                if _on_open_segment(a, b, p):
                    out.append(f"hanging vertex {p}")
    s = 1 if cross(*region) > 0 else -1
    for p in verts.values():
        if any(s * cross(region[k], region[(k + 1) % 3], p) < -1e-7 for k in range(3)):
            out.append(f"outside {p}")
    total = sum(area(t) for t in tris)
    if abs(total - area(region)) > 1e-7 * max(1.0, area(region)):
        out.append(f"area {total} vs {area(region)}")
    return out
