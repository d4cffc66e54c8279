"""Regenerate ``tests/data/standard_triples.json``.

Independent of the unit-square reduction: the innermost tail is the upper
incomplete gamma function and the remaining two integrals are done by
mpmath's tanh-sinh rule in the original variables (with ``y = x v``).
Run: ``python3 tests/oracles/standard_triples.py``.
"""

import itertools
import json
import pathlib

import mpmath as mp

mp.mp.dps = 20


def nested(m, n, p, g):
    g = mp.mpf(g)
    a = mp.mpf(p) / 2 + 1

    def tail(y):
        # int_y^inf z^(p/2) e^{-2gz} dz
        return mp.gammainc(a, 2 * g * y) / (2 * g) ** a

    def inner(x):
        # e^{-2gx} e^{2gy} with y = x v
        f = lambda v: v ** (mp.mpf(n) / 2) * mp.exp(-2 * g * x * (1 - v)) * tail(x * v)
        return x ** (mp.mpf(m + n) / 2 + 1) * mp.quad(f, [0, 1])

    return mp.quad(inner, [0, 1 / g, 5 / g, mp.inf])


def main():
    out = []
    for (m, n, p), g in itertools.product(itertools.product((-1, 0, 1, 2), repeat=3), (1, 4)):
        out.append({"m": m, "n": n, "p": p, "g": g, "value": mp.nstr(nested(m, n, p, g), 15)})
    path = pathlib.Path(__file__).resolve().parents[1] / "data" / "standard_triples.json"
    path.write_text(json.dumps({"oracle": "mpmath nested quadrature, inner tail via incomplete gamma",
                                "entries": out}, indent=1) + "\n")


if __name__ == "__main__":
    main()
