"""Compiled inner loops for the Reed-Solomon codec.

Codeword arrays hold the highest-degree coefficient first: ``r[i]`` is the
coefficient of ``x^(n-1-i)``.  Locator, evaluator and syndrome polynomials
are lowest degree first.  All kernels release the GIL.
"""

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(inline="always", **_JIT)
def _mul(a, b, exp2, log):
    if a == 0 or b == 0:
        return 0
    return exp2[log[a] + log[b]]


@njit(**_JIT)
def encode_parity(msg, gen_log, exp2, log):
    """Remainder of msg(x) * x^nroots modulo the monic generator.

    ``gen_log[j]`` is the log of the generator coefficient of
    ``x^(nroots-1-j)`` (or -1 for a zero coefficient).
    """
    nroots = gen_log.shape[0]
    rem = np.zeros(nroots, dtype=np.int64)
    for i in range(msg.shape[0]):
        fb = msg[i] ^ rem[0]
        for j in range(nroots - 1):
            rem[j] = rem[j + 1]
        rem[nroots - 1] = 0
        if fb != 0:
            lf = log[fb]
            for j in range(nroots):
                g = gen_log[j]
                if g >= 0:
                    rem[j] ^= exp2[lf + g]
    return rem


@njit(**_JIT)
def syndromes(r, fcr, nroots, exp2, log, order):
    """S[j] = r(alpha^(fcr+j)), Horner over all roots at once."""
    out = np.zeros(nroots, dtype=np.int64)
    root_log = np.empty(nroots, dtype=np.int64)
    for j in range(nroots):
        root_log[j] = (fcr + j) % order
    for i in range(r.shape[0]):
        ri = r[i]
        for j in range(nroots):
            s = out[j]
            if s != 0:
                s = exp2[log[s] + root_log[j]]
            out[j] = s ^ ri
    return out


@njit(**_JIT)
def berlekamp_massey(synd, exp2, log, order):
    """Error locator (lowest degree first, length nroots + 1) and its length L."""
    nroots = synd.shape[0]
    C = np.zeros(nroots + 1, dtype=np.int64)
    B = np.zeros(nroots + 1, dtype=np.int64)
    T = np.zeros(nroots + 1, dtype=np.int64)
    C[0] = 1
    B[0] = 1
    L = 0
    shift = 1
    b = 1
    for k in range(nroots):
        d = synd[k]
        for i in range(1, L + 1):
            d ^= _mul(C[i], synd[k - i], exp2, log)
        if d == 0:
            shift += 1
            continue
        # coef = d / b
        coef_log = (log[d] - log[b]) % order
        if 2 * L <= k:
            T[:] = C
            for i in range(nroots + 1 - shift):
                if B[i] != 0:
                    C[i + shift] ^= exp2[coef_log + log[B[i]]]
            L = k + 1 - L
            B[:] = T
            b = d
            shift = 1
        else:
            for i in range(nroots + 1 - shift):
                if B[i] != 0:
                    C[i + shift] ^= exp2[coef_log + log[B[i]]]
            shift += 1
    return C, L


@njit(**_JIT)
def _poly_eval(p, deg, x, exp2, log):
    acc = 0
    for i in range(deg, -1, -1):
        acc = _mul(acc, x, exp2, log) ^ p[i]
    return acc


@njit(**_JIT)
def decode_inplace(r, fcr, nroots, exp2, log, order):
    """Correct ``r`` in place.

    Returns the number of corrected symbols, or -1 when the locator is
    inconsistent (too many errors detected).  ``r`` is left untouched on
    failure.
    """
    n = r.shape[0]
    synd = syndromes(r, fcr, nroots, exp2, log, order)
    clean = True
    for j in range(nroots):
        if synd[j] != 0:
            clean = False
            break
    if clean:
        return 0

    lam, L = berlekamp_massey(synd, exp2, log, order)
    deg = 0
    for i in range(nroots, -1, -1):
        if lam[i] != 0:
            deg = i
            break
    if deg != L or L > nroots // 2:
        return -1

    # Chien search over the degrees present in a (possibly shortened)
    # codeword: terms[i] = lam[i] * alpha^(-i*d), stepped once per degree d.
    degs = np.zeros(L, dtype=np.int64)
    terms = np.zeros(deg + 1, dtype=np.int64)
    step = np.zeros(deg + 1, dtype=np.int64)
    for i in range(deg + 1):
        terms[i] = log[lam[i]] if lam[i] != 0 else -1
        step[i] = (order - i) % order
    found = 0
    for d in range(n):
        acc = 0
        for i in range(deg + 1):
            if terms[i] >= 0:
                acc ^= exp2[terms[i]]
                terms[i] = (terms[i] + step[i]) % order
        if acc == 0:
            if found == L:
                return -1
            degs[found] = d
            found += 1
    if found != L:
        return -1

    # Omega = S * Lambda mod x^nroots
    omega = np.zeros(nroots, dtype=np.int64)
    for i in range(nroots):
        s = synd[i]
        if s == 0:
            continue
        ls = log[s]
        for j in range(min(deg + 1, nroots - i)):
            if lam[j] != 0:
                omega[i + j] ^= exp2[ls + log[lam[j]]]

    mags = np.zeros(L, dtype=np.int64)
    for e in range(L):
        d = degs[e]
        xinv = exp2[(order - d) % order]
        num = _poly_eval(omega, nroots - 1, xinv, exp2, log)
        # formal derivative: odd-degree terms only
        den = 0
        xinv2 = _mul(xinv, xinv, exp2, log)
        p = 1
        for i in range(1, deg + 1, 2):
            den ^= _mul(lam[i], p, exp2, log)
            p = _mul(p, xinv2, exp2, log)
        if den == 0 or num == 0:
            return -1
        # X^(1-fcr) * num / den
        lg = (d * (1 - fcr) + log[num] - log[den]) % order
        mags[e] = exp2[lg]

    for e in range(L):
        r[n - 1 - degs[e]] ^= mags[e]
    return L
