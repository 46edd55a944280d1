"""Extended-precision reference values built directly from Poisson weights."""

import mpmath as mp

mp.mp.dps = 60


def class_sum(mu, N, j, n_top=400):
    mu = mp.mpf(mu)
    return mp.fsum(mu**n / mp.factorial(n) for n in range(j, n_top, N))


def p_j(mu, N, j):
    return class_sum(mu, N, j) * mp.exp(-mp.mpf(mu))


def fidelity(mu_a, mu_b, N, j):
    a = class_sum(mp.sqrt(mp.mpf(mu_a) * mp.mpf(mu_b)), N, j)
    return a / mp.sqrt(class_sum(mu_a, N, j) * class_sum(mu_b, N, j))


def trace_distance(mu_a, mu_b, N, j):
    return mp.sqrt(1 - fidelity(mu_a, mu_b, N, j) ** 2)


def f11(mu_x, mu_z, N, q, sign):
    mu_x, mu_z = mp.mpf(mu_x), mp.mpf(mu_z)
    re = im = mp.mpf(0)
    for k in range(60):
        n = k * N + 1
        w = (mu_x * mu_z) ** (mp.mpf(n) / 2) / mp.factorial(n)
        angle = 2 * mp.pi * q * n / N
        re += w * (1 + mp.cos(angle) if sign == "plus" else 1 - mp.cos(angle))
        im += w * mp.sin(angle)
    norm = mp.sqrt(class_sum(2 * mu_x, N, 1) * class_sum(mu_z, N, 1))
    return mp.sqrt(re**2 + im**2) / mp.sqrt(2) / norm
