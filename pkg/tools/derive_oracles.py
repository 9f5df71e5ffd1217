"""Independent reference values for the frozen constants in tests/.

Uses mpmath quadrature and exact rational arithmetic only; nothing from
pdbas is imported. Run with ``python tools/derive_oracles.py``.
"""
from fractions import Fraction

import mpmath as mp

mp.mp.dps = 40


def tri(delta):
    delta = mp.mpf(delta)
    return lambda x: 12 / delta**3 * (1 - abs(x) / delta) if abs(x) <= delta else mp.mpf(0)


def beta_quad(delta):
    delta = mp.mpf(delta)
    mu = tri(delta)
    return mp.quad(mu, [-delta, 0, delta])


def eigenvalue_quad(c, delta):
    delta = mp.mpf(delta)
    mu = tri(delta)
    c = mp.mpf(c)
    return mp.quad(lambda z: mu(z) * mp.cos(c * z), [-delta, 0, delta]) - beta_quad(delta)


def kernel_sum_exact(delta, S, n):
    """sum_p w_p dx with w_p = mu(min(p, n-p) dx), in exact rationals."""
    delta, S = Fraction(delta), Fraction(S)
    dx = S / n
    total = Fraction(0)
    for p in range(n):
        d = min(p, n - p) * dx
        if d <= delta:
            total += 12 / delta**3 * (1 - d / delta) * dx
    return total


def mask_count(L, delta, n):
    L, delta = Fraction(L), Fraction(delta)
    left, right = -L / 2, L / 2
    x0, dx = left - delta, (L + 2 * delta) / n
    xs = [x0 + i * dx for i in range(n)]
    return sum(1 for x in xs if x < left), sum(1 for x in xs if x > right)


def dirichlet_u0_norm(L):
    # max of |2x/L + sin(2 pi x/L)| on [-L/2, L/2]; interior critical point
    L = mp.mpf(L)
    f = lambda x: 2 * x / L + mp.sin(2 * mp.pi * x / L)
    xc = mp.findroot(lambda x: mp.diff(f, x), 0.3 * L)
    return max(abs(f(xc)), abs(f(L / 2)), abs(f(-L / 2))), xc


def forcing_amplitude_quad(L, nu, delta):
    # f = u_t - nu L u for u = exp(-nu t) m(x): A = -nu (1 + lambda(2 pi / L))
    return -mp.mpf(nu) * (1 + eigenvalue_quad(2 * mp.pi / L, delta))


def dft_brute(u):
    n = len(u)
    return [mp.fsum(u[i] * mp.exp(-2j * mp.pi * k * i / n) for i in range(n)) for k in range(n)]


if __name__ == "__main__":
    print("beta(0.2)      =", mp.nstr(beta_quad("0.2"), 20))
    print("beta(0.5)      =", mp.nstr(beta_quad("0.5"), 20))
    print("beta(1.0)      =", mp.nstr(beta_quad(1), 20))
    print("lambda(pi,0.2) =", mp.nstr(eigenvalue_quad(mp.pi, "0.2"), 20))
    print("A(2,0.2,0.2)   =", mp.nstr(forcing_amplitude_quad(2, "0.2", "0.2"), 20))
    norm, xc = dirichlet_u0_norm(2)
    print("u0_norm(L=2)   =", mp.nstr(norm, 20), "at x =", mp.nstr(xc, 20))
    print("mask(2,0.2,512)=", mask_count(2, Fraction(1, 5), 512))
    print("dt bound       =", mp.nstr(2 / (1 / mp.mpf("5e-4") + 2 * mp.mpf("0.2") * 300), 20))
    for n in (256, 512, 1024, 2048, 4096):
        s = kernel_sum_exact(Fraction(1, 5), Fraction(12, 5), n)
        print(f"kernel sum n={n:5d} minus beta =", mp.nstr(mp.mpf(s.numerator) / s.denominator - 300, 20))
    u = [mp.mpf(v) for v in ("0.5", "-1.25", "2", "0", "3.5", "-0.75", "1", "0.25")]
    print("dft n=8        =", [mp.nstr(z, 17) for z in dft_brute(u)])
