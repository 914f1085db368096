"""Reference values for the frozen constants in the unit and acceptance tests.

Run: python3 tests/oracle/gallery_oracle.py
"""

import sys
import time

from piecewise import *

HALF = mp.mpf(1) / 2
CP = mp.log((E + 1) / 2)


def show(label, v, digits=25):
    print(f"{label} = {mp.nstr(v, digits)}")
    sys.stdout.flush()


def interval(f, n):
    return f.integral(mp.exp(n), mp.exp(n + 1))


def flat_mid(n):
    a6 = (mp.exp(n) + mp.exp(n + 1)) / 2 + mp.exp(mp.sqrt(n))
    return (mp.exp(n) + a6) / 2


def main():
    t0 = time.time()
    f1, g1, h1 = ex1(40)
    for n in (5, 10, 20):
        show(f"ex1 raw p on I_{n}", interval(f1 if n % 2 == 0 else g1, n))
        show(f"ex1 raw q on I_{n}", interval(g1 if n % 2 == 0 else f1, n))
    show("ex1 raw mass f", f1.mass())
    show("ex1 raw mass h", h1.mass())
    f2, g2 = ex2(40)
    for n in (5, 10, 20):
        show(f"ex2 raw f on I_{n}", interval(f2, n))
        show(f"ex2 raw g on I_{n}", interval(g2, n))
    show("ex2 raw mass f", f2.mass())
    show("ex2 raw mass g", g2.mass())
    f6 = ex6(12)
    for n in (2, 3, 4):
        show(f"ex6 raw f on (e^{n*n}, e^{(n+1)**2}]", f6.integral(mp.exp(n * n), mp.exp((n + 1) ** 2)))
    show("ex6 raw mass", f6.mass())

    h = normalize(h1)
    for n in (10, 20, 30, 40):
        x = flat_mid(n)
        al = mp.exp(n) * mp.mpf(n) ** (-HALF)
        show(f"ex1.h J2/h m{n}", partial_conv(h, h, x, al, x - al) / h(x))
    for n in (10, 20, 40):
        x = mp.exp(n)
        show(f"ex1.h subexp a{n}", conv(h, h, x) / (2 * h(x)))
    f = normalize(f1)
    for k in (4, 6):
        x = (mp.exp(k * k) + mp.exp(k * k + 1)) / 2
        al = mp.sqrt(mp.log(x) - CP)
        show(f"ex1.f fkz a({k*k},5)", partial_conv(f, f, x, al, x - al) / f(x))
    g = normalize(g2)
    for n in range(10, 41, 5):
        x = mp.exp(n)
        show(f"ex2.g subexp a{n}", conv(g, g, x) / (2 * g(x)))
    f = normalize(f2)
    for k in (4, 6):
        x = (mp.exp(k * k) + mp.exp(k * k + 1)) / 2
        al = mp.sqrt(mp.log(x) - CP)
        show(f"ex2.f fkz a({k*k},3)", partial_conv(f, f, x, al, x - al) / f(x))
    f = normalize(f6)
    for k in (2, 3):
        n = k * k
        x = mp.exp(n * n) + mp.exp(3 * n)
        al = mp.exp(2 * mp.sqrt(mp.log(x)))
        show(f"ex6.f fkz b{n}", partial_conv(f, f, x, al, x - al) / f(x))
    # ex5.G normalization: 1 / int_0^inf e^{-x} (1/2) x^{-1/2} e^{-sqrt x} dx,
    # substituting s = sqrt x
    z = mp.quad(lambda s: mp.exp(-s - s * s), [0, 1, 3, 6, mp.inf])
    show("ex5.G scale", 1 / z)
    print(f"# {time.time() - t0:.1f} s")


if __name__ == "__main__":
    main()
