"""Pure-Python/numpy reference kernels.

These mirror ``_kernels.pyx`` operation for operation (same multiplication
and accumulation order) so the two backends agree to rounding.
"""
import numpy as np


def _power_table(base, maxdeg):
    # table[e] = base**e by repeated multiplication, table[0] == 1 exactly
    table = np.empty((maxdeg + 1,) + np.shape(base), dtype=np.complex128)
    table[0] = 1.0
    for e in range(1, maxdeg + 1):
        table[e] = table[e - 1] * base
    return table


def eval_points(exps, coefs, points, maxdeg):
    """Evaluate one sparse polynomial at each row of ``points``."""
    points = np.asarray(points, dtype=np.complex128)
    p, n = points.shape
    m = exps.shape[0]
    out = np.zeros(p, dtype=np.complex128)
    if m == 0:
        return out
    tables = [_power_table(points[:, j], maxdeg) for j in range(n)]
    terms = np.broadcast_to(coefs, (p, m)).copy()
    for j in range(n):
        terms *= tables[j][exps[:, j]].T
    for t in range(m):
        out += terms[:, t]
    return out


def taylor_shift(exps, coefs, x0, maxdeg):
    """Dense Taylor coefficients of a sparse polynomial at ``x0``.

    Returns a flat array of length ``(maxdeg+1)**n`` in C order over the
    multi-index ``g``; entry ``g`` is the coefficient of ``w**g`` in
    ``p(x0 + w)``.
    """
    n = exps.shape[1]
    base = maxdeg + 1
    out = [0j] * (base ** n)
    pw = [[1 + 0j] for _ in range(n)]
    for j in range(n):
        for _ in range(maxdeg):
            pw[j].append(pw[j][-1] * complex(x0[j]))
    binom = [[1.0] * (e + 1) for e in range(base)]
    for e in range(2, base):
        for g in range(1, e):
            binom[e][g] = binom[e - 1][g - 1] + binom[e - 1][g]
    strides = [base ** (n - 1 - j) for j in range(n)]
    for t in range(exps.shape[0]):
        e = [int(v) for v in exps[t]]
        c = complex(coefs[t])
        g = [0] * n
        while True:
            val = c
            idx = 0
            for j in range(n):
                val = val * (binom[e[j]][g[j]] * pw[j][e[j] - g[j]])
                idx += g[j] * strides[j]
            out[idx] += val
            j = n - 1
            while j >= 0:
                g[j] += 1
                if g[j] <= e[j]:
                    break
                g[j] = 0
                j -= 1
            if j < 0:
                break
    return np.array(out, dtype=np.complex128)
