"""Pure-Python difference-bound kernel (fallback for ``_dbm``).

A domain over ``n - 1`` firing-time variables is a flat tuple of ``n * n``
encoded bounds; entry ``i * n + j`` bounds ``x_i - x_j`` with ``x_0 = 0``.
A bound ``(c, strict)`` on integers is encoded as ``2c`` when strict and
``2c + 1`` otherwise, so the integer order is the tightness order.
"""

INF = 1 << 62
LE_ZERO = 1  # x_i - x_j <= 0
LT_ZERO = 0  # x_i - x_j < 0


def encode(c, strict):
    return 2 * c + (0 if strict else 1)


def add(a, b):
    if a >= INF or b >= INF:
        return INF
    return ((a >> 1) + (b >> 1)) * 2 + (a & b & 1)


def _close(d, n):
    for k in range(n):
        kn = k * n
        for i in range(n):
            dik = d[i * n + k]
            if dik >= INF:
                continue
            base = i * n
            for j in range(n):
                dkj = d[kn + j]
                if dkj >= INF:
                    continue
                s = ((dik >> 1) + (dkj >> 1)) * 2 + (dik & dkj & 1)
                if s < d[base + j]:
                    d[base + j] = s
        if d[k * n + k] < 1:
            return False
    for i in range(n):
        if d[i * n + i] < 1:
            return False
    return True


def canonical(dom, n):
    """Tightest equivalent domain, or None when inconsistent."""
    d = list(dom)
    return tuple(d) if _close(d, n) else None


def fire_domain(dom, n, a, doms):
    """Add ``x_a <= x_u`` for every variable and ``x_a < x_h`` for each ``h``
    in ``doms``; return the closed result or None if ``a`` cannot fire first."""
    d = list(dom)
    base = a * n
    for u in range(1, n):
        if u != a and d[base + u] > LE_ZERO:
            d[base + u] = LE_ZERO
    for h in doms:
        if d[base + h] > LT_ZERO:
            d[base + h] = LT_ZERO
    return tuple(d) if _close(d, n) else None


def successor(dom, n, a, keep, los, his):
    """Domain after firing variable ``a`` of the closed ``dom``.

    ``keep[k]`` is the old index of new variable ``k + 1`` or -1 when that
    variable is newly enabled with encoded bounds ``los[k]`` (for
    ``0 - x``) and ``his[k]`` (for ``x - 0``).  ``x_a`` becomes the origin.
    """
    m = len(keep) + 1
    old = [a] + list(keep)
    out = [INF] * (m * m)
    for i in range(m):
        oi = old[i]
        for j in range(m):
            oj = old[j]
            if i == j:
                out[i * m + j] = 1
            elif oi >= 0 and oj >= 0:
                out[i * m + j] = dom[oi * n + oj]
    for k in range(m - 1):
        if keep[k] < 0:
            v = k + 1
            out[v * m] = his[k]
            out[v] = los[k]
    fresh = [k + 1 for k in range(m - 1) if keep[k] < 0]
    if fresh:
        for v in fresh:
            up = out[v * m]
            lo = out[v]
            for j in range(1, m):
                if j == v:
                    continue
                # x_v - x_j <= (x_v - 0) + (0 - x_j)
                out[v * m + j] = add(up, out[j])
                # x_j - x_v <= (x_j - 0) + (0 - x_v)
                out[j * m + v] = add(out[j * m], lo)
        # fresh-fresh entries went through the origin already
    return tuple(out)


def initial_domain(los, his):
    keep = [-1] * len(los)
    return successor((1,), 1, 0, keep, los, his)
