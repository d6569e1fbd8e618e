"""Random polynomial systems with a constructed singular zero, for tests."""
from __future__ import annotations

import itertools

import numpy as np

from singcert.polyexpr import Polynomial, PolySystem, multi_indices

CORPUS_NAMES = (
    "double_x2_y", "nonsimple_x_y3", "regular", "cube_diff", "cube_diff_near", "sin_trunc",
    "x2_y2", "x2_y2_zxy", "x3_yz", "xn_yz_4",
)


def cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_form(rng, n, k, density=0.7):
    """Random homogeneous polynomial of degree ``k`` in ``w`` (local coordinates)."""
    terms = {}
    for a in multi_indices(n, k):
        if rng.random() < density:
            terms[a] = complex(cplx(rng))
    return terms


def _shifted(local_terms: dict, x0, n: int) -> Polynomial:
    """``p(y) = q(y - x0)`` expanded by plain polynomial arithmetic."""
    shifted = [Polynomial.variable(j, n) - complex(x0[j]) for j in range(n)]
    out = Polynomial({}, n)
    for a, c in local_terms.items():
        mono = Polynomial.constant(c, n)
        for j, e in enumerate(a):
            if e:
                mono = mono * shifted[j] ** e
        out = out + mono
    return out


def singular_system(seed, n=None, kappa=None, degree=None, degenerate=False, at_origin=False):
    """Square system with a zero of corank ``kappa`` at a random point ``x0``.

    Local form ``L w + Q(w) + C(w)`` with ``rank L = n - kappa``.  With
    ``degenerate=True`` the quadratic part is ``L q(w)``, so every second
    derivative lands in the image of ``L`` and one-step deflation fails.
    Returns ``(f, x0, kappa)``.
    """
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(2, 5))
    # a degenerate quadratic part needs a nonzero linear part to live in
    kappa = kappa or int(rng.integers(1, n if degenerate else n + 1))
    degree = degree or int(rng.integers(2, 4))
    U = np.linalg.qr(cplx(rng, n, n))[0]
    W = np.linalg.qr(cplx(rng, n, n))[0]
    s = np.concatenate([rng.uniform(0.5, 2.0, n - kappa), np.zeros(kappa)])
    L = U @ np.diag(s) @ W.conj().T
    quad = [random_form(rng, n, 2) for _ in range(n)]
    if degenerate:
        mixed = []
        for i in range(n):
            t = {}
            for j in range(n):
                for a, c in quad[j].items():
                    t[a] = t.get(a, 0) + L[i, j] * c
            mixed.append(t)
        quad = mixed
    cubic = [random_form(rng, n, 3) if degree >= 3 else {} for _ in range(n)]
    x0 = np.zeros(n, complex) if at_origin else 0.5 * cplx(rng, n)
    polys = []
    for i in range(n):
        local = {}
        for j in range(n):
            e = tuple(1 if q == j else 0 for q in range(n))
            local[e] = L[i, j]
        for part in (quad[i], cubic[i]):
            for a, c in part.items():
                local[a] = local.get(a, 0) + c
        polys.append(_shifted(local, x0, n))
    return PolySystem.from_polys(polys), x0, kappa


def random_system(seed, n=None, degree=None):
    """Dense-ish random square system and a random point."""
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(1, 5))
    degree = degree or int(rng.integers(1, 5))
    polys = []
    for _ in range(n):
        terms = {}
        for k in range(degree + 1):
            terms.update(random_form(rng, n, k, density=0.5))
        polys.append(Polynomial(terms, n))
    return PolySystem.from_polys(polys), cplx(rng, n)


def all_exponents(n, k):
    return [a for a in itertools.product(range(k + 1), repeat=n) if sum(a) <= k]


def load_case(name):
    """``(f, x, expected)`` for a bundled corpus case."""
    import json

    from singcert.cli import bundled_corpus, read_point, read_system

    root = bundled_corpus() / name
    f = read_system(root / "system.txt")
    x = read_point(root / "point.json", f)
    exp = root / "expected.json"
    return f, x, json.loads(exp.read_text()) if exp.exists() else {}


def simple_multiple_cases():
    """Corpus cases whose point is a simple multiple root."""
    return [n for n in CORPUS_NAMES if load_case(n)[2].get("verdict") == "SimpleMultiple"]
