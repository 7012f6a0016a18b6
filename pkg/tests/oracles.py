"""Reference implementations that share no code with the package.

Field arithmetic here is bit-level carry-less multiply-and-reduce, never
table lookups, so the RS and field tests check the tables against first
principles.
"""

import itertools

import numpy as np
import scipy.linalg


def clmul_reduce(a, b, poly, m):
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if (a >> m) & 1:
            a ^= poly
    return r


def brute_inverse(a, poly, m):
    for x in range(1, 1 << m):
        if clmul_reduce(a, x, poly, m) == 1:
            return x
    raise ZeroDivisionError


def poly_mod(num, den, poly, m):
    """Remainder of num / den, both highest degree first, over GF(2^m)."""
    num = list(num)
    lead_inv = brute_inverse(den[0], poly, m)
    for i in range(len(num) - len(den) + 1):
        coef = clmul_reduce(num[i], lead_inv, poly, m)
        if coef:
            for j, d in enumerate(den):
                num[i + j] ^= clmul_reduce(coef, d, poly, m)
    return num[len(num) - len(den) + 1 :]


def generator_highest_first(nroots, fcr, poly, m):
    """prod (x - alpha^(fcr+j)) with alpha = x, highest degree first."""
    g = [1]
    alpha_pow = 1
    for _ in range(fcr):
        alpha_pow = clmul_reduce(alpha_pow, 2, poly, m)
    for _ in range(nroots):
        nxt = g + [0]
        for i, c in enumerate(g):
            nxt[i + 1] ^= clmul_reduce(c, alpha_pow, poly, m)
        g = nxt
        alpha_pow = clmul_reduce(alpha_pow, 2, poly, m)
    return g


def systematic_encode(msg, nroots, fcr, poly, m):
    g = generator_highest_first(nroots, fcr, poly, m)
    parity = poly_mod(list(msg) + [0] * nroots, g, poly, m)
    return list(msg) + parity


def all_codewords(k, nroots, fcr, poly, m):
    msgs = list(itertools.product(range(1 << m), repeat=k))
    words = np.array([systematic_encode(msg, nroots, fcr, poly, m) for msg in msgs])
    return np.array(msgs), words


def nearest_codeword(received, msgs, words):
    """Minimum Hamming distance decode; returns (message, distance, unique)."""
    dist = np.count_nonzero(words != np.asarray(received)[None, :], axis=1)
    best = dist.min()
    hits = np.flatnonzero(dist == best)
    return msgs[hits[0]], int(best), hits.size == 1


def lmmse_dense(H, Y, noise_var, signal_var=1.0):
    """Explicit-inverse evaluation of (H^H H + (nv/sv) I)^-1 H^H Y."""
    Hh = H.conj().T
    G = Hh @ H + (noise_var / signal_var) * np.eye(H.shape[1])
    return scipy.linalg.inv(G) @ (Hh @ Y)
