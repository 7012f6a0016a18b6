"""Trustworthy semantic transmission link: chunking, hybrid-encryption
envelope, Reed-Solomon over GF(2^18), QPSK over fading MIMO channels with
ZF-LMMSE detection, and digest-gated ARQ."""

__version__ = "0.1.0"
