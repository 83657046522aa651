"""Pure-Python/numpy reference for the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def _walk(lo, hi, cons, cap, emit):
    n = cons.shape[0]
    if n == 0:
        return 0, []
    rows = []
    count = 0
    val = [0] * n
    ub = [0] * n
    val[0], ub[0] = lo, hi
    i = 0
    while True:
        if val[i] > ub[i]:
            if i == 0:
                break
            i -= 1
            val[i] += 1
            continue
        if i == n - 1:
            if emit:
                prefix = val[: n - 1]
                for v in range(val[i], ub[i] + 1):
                    rows.append(prefix + [v])
            count += ub[i] - val[i] + 1
            if not emit and count > cap:
                return cap + 1, rows
            val[i] = ub[i] + 1
            continue
        i += 1
        a, b = lo, hi
        ci = cons[i]
        for j in range(i):
            c = int(ci[j])
            if val[j] - c > a:
                a = val[j] - c
            if val[j] + c < b:
                b = val[j] + c
        val[i], ub[i] = a, b
        if a > b:
            val[i] = b + 1
    return count, rows


def lattice_count(lo, hi, cons, cap):
    cons = np.ascontiguousarray(cons, dtype=np.int64)
    return _walk(int(lo), int(hi), cons, int(cap), False)[0]


def lattice_fill(lo, hi, cons, total):
    cons = np.ascontiguousarray(cons, dtype=np.int64)
    n = cons.shape[0]
    count, rows = _walk(int(lo), int(hi), cons, int(total), True)
    if count != total:
        raise RuntimeError("lattice enumeration count mismatch")
    return np.array(rows, dtype=np.int64).reshape(total, n)


def mcshane_batch(vals, lrho, lo, hi, chunk=4096):
    v = np.ascontiguousarray(vals, dtype=np.int64)
    lr = np.ascontiguousarray(lrho, dtype=np.int64)
    out = np.empty((v.shape[0], lr.shape[0]), dtype=np.int64)
    for start in range(0, v.shape[0], chunk):
        vc = v[start:start + chunk, None, :]
        mx = (vc - lr[None, :, :]).max(axis=2)
        mn = (vc + lr[None, :, :]).min(axis=2)
        out[start:start + chunk] = np.clip(mx + mn, lo, hi)
    return out


def lattice_min_quad(lo, hi, cons, lrho, unit, clo, chi, qa, qb):
    cons = np.ascontiguousarray(cons, dtype=np.int64)
    lr = np.ascontiguousarray(lrho, dtype=np.int64)
    qa = [int(v) for v in qa]
    qb = [int(v) for v in qb]
    count, rows = _walk(int(lo), int(hi), cons, 0, True)
    n = cons.shape[0]
    if count == 0:
        return 0, -1, np.zeros(n, dtype=np.int64)
    levels = np.array(rows, dtype=np.int64).reshape(count, n)
    best, bidx = None, -1
    for start in range(0, count, 4096):
        y = mcshane_batch(levels[start:start + 4096] * unit, lr, clo, chi).tolist()
        for r, row in enumerate(y):
            obj = sum((a * v + b) * v for a, b, v in zip(qa, qb, row))
            if best is None or obj < best:
                best, bidx = obj, start + r
    return count, bidx, levels[bidx].copy()
