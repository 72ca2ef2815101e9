"""Brute-force reference implementations used as test oracles.

Plain Python loops over lists, written directly from the definitions and
sharing no code with the package.
"""

import math


def pairwise(points, metric="euclidean"):
    """Full n x n distance table from a double loop."""
    n = len(points)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a, b = points[i], points[j]
            if metric == "euclidean":
                s = 0.0
                for k in range(len(a)):
                    d = a[k] - b[k]
                    s += d * d
                dist = math.sqrt(s)
            else:
                na = 0.0
                nb = 0.0
                dot = 0.0
                for k in range(len(a)):
                    na += a[k] * a[k]
                    nb += b[k] * b[k]
                    dot += a[k] * b[k]
                dist = 1.0 - dot / (math.sqrt(na) * math.sqrt(nb))
                dist = min(max(dist, 0.0), 2.0)
            out[i][j] = out[j][i] = dist
    return out


def cutoff(dist, t):
    n = len(dist)
    flat = sorted(dist[i][j] for i in range(n) for j in range(i + 1, n))
    m = len(flat)
    pos = math.floor(m * t + 0.5)
    pos = min(max(pos, 1), m)
    return flat[pos - 1]


def rho_cutoff(dist, d_c):
    n = len(dist)
    return [float(sum(1 for j in range(n) if j != i and dist[i][j] < d_c)) for i in range(n)]


def rho_gaussian(dist, d_c):
    n = len(dist)
    out = []
    for i in range(n):
        s = 0.0
        for j in range(n):
            if j != i:
                s += math.exp(-((dist[i][j] / d_c) ** 2))
        out.append(s)
    return out


def outranks(rho, k, i):
    """True when point k counts as denser than point i (ties: lower index wins)."""
    return rho[k] > rho[i] or (rho[k] == rho[i] and k < i)


def delta_nhd(dist, rho):
    n = len(dist)
    delta, nhd = [], []
    for i in range(n):
        best, arg = None, None
        for k in range(n):
            if outranks(rho, k, i) and (best is None or dist[i][k] < best):
                best, arg = dist[i][k], k
        if arg is None:
            delta.append(max(dist[i]) if n > 1 else 0.0)
            nhd.append(i)
        else:
            delta.append(best)
            nhd.append(arg)
    return delta, nhd


def top_gamma(gamma, n_c):
    ranked = sorted(range(len(gamma)), key=lambda i: (-gamma[i], i))
    return sorted(ranked[:n_c])


def auto_n_c(gamma):
    g = sorted(gamma, reverse=True)
    n = len(g)
    best_k, best = 1, -1.0
    for k in range(1, n):
        gap = (g[k - 1] - g[k]) / (g[k - 1] + 1e-12)
        if gap > best:
            best_k, best = k, gap
    return max(1, min(best_k, math.ceil(n / 4)))


def dpc(points, t=0.2, kernel="gaussian", metric="euclidean", n_c=None):
    """Complete reference decision graph and centers for one point set.

    Returns None when every pairwise distance is zero under the Gaussian kernel.
    """
    dist = pairwise(points, metric)
    if len(points) == 1:
        return {"rho": [0.0], "delta": [0.0], "gamma": [0.0], "nhd": [0], "centers": [0]}
    d_c = cutoff(dist, t)
    if kernel == "gaussian" and d_c == 0.0:
        # zero bandwidth: fall back to the smallest positive distance
        positive = [v for row in dist for v in row if v > 0]
        if not positive:
            return None
        d_c = min(positive)
    rho = rho_cutoff(dist, d_c) if kernel == "cutoff" else rho_gaussian(dist, d_c)
    delta, nhd = delta_nhd(dist, rho)
    gamma = [r * d for r, d in zip(rho, delta)]
    k = n_c if n_c is not None else auto_n_c(gamma)
    return {"rho": rho, "delta": delta, "gamma": gamma, "nhd": nhd,
            "centers": top_gamma(gamma, k), "d_c": d_c}


def block_means(img, gw, gh):
    """Block means of a 2-D list image over a gw x gh grid, pixel loop."""
    h, w = len(img), len(img[0])
    out = []
    for r in range(gh):
        for c in range(gw):
            y0, y1 = r * h // gh, (r + 1) * h // gh
            x0, x1 = c * w // gw, (c + 1) * w // gw
            total, count = 0.0, 0
            for y in range(y0, y1):
                for x in range(x0, x1):
                    total += img[y][x]
                    count += 1
            out.append(total / count)
    return out


def _sig(x):
    return 1.0 / (1.0 + math.exp(-x))


def _matvec(m, v):
    return [sum(m[r][k] * v[k] for k in range(len(v))) for r in range(len(m))]


def lstm_reference(xs, layers, tanh_block=False):
    """Stacked LSTM over a sequence; ``layers`` holds dicts of nested lists.

    Returns the top-layer hidden state per step.
    """
    hdim = len(layers[0]["b_c"])
    hs = [[0.0] * hdim for _ in layers]
    cs = [[0.0] * hdim for _ in layers]
    tops = []
    for x in xs:
        inp = list(x)
        for n, L in enumerate(layers):
            def pre(wx, wh, b):
                a = _matvec(L[wx], inp)
                c = _matvec(L[wh], hs[n])
                return [a[u] + c[u] + L[b][u] for u in range(hdim)]
            pg = pre("W_xc", "W_hc", "b_c")
            g = [math.tanh(v) if tanh_block else _sig(v) for v in pg]
            i = [_sig(v) for v in pre("W_xi", "W_hi", "b_i")]
            f = [_sig(v) for v in pre("W_xf", "W_hf", "b_f")]
            o = [_sig(v) for v in pre("W_xo", "W_ho", "b_o")]
            c = [i[u] * g[u] + f[u] * cs[n][u] for u in range(hdim)]
            h = [o[u] * math.tanh(c[u]) for u in range(hdim)]
            hs[n], cs[n] = h, c
            inp = h
        tops.append(inp)
    return tops


def mean_rows(rows):
    n = len(rows)
    return [sum(r[c] for r in rows) / n for c in range(len(rows[0]))]


def weighted_mean(vectors, weights):
    total = sum(weights)
    return [sum(w * v[c] for w, v in zip(weights, vectors)) / total
            for c in range(len(vectors[0]))]
