#!/usr/bin/env python3
"""Independent reference for the hashed bag-of-words embedder.

Walks the text occurrence by occurrence (weight 1/(1+seen_so_far)) rather
than grouping by token, and prints the non-zero buckets of each normalized
vector with 17 significant digits.  Used once to produce the golden values
frozen in test_embedder.cpp.
"""
import math
import sys

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK
    return h


def tokens(text: bytes):
    out, cur = [], bytearray()
    for b in text:
        if (48 <= b <= 57) or (65 <= b <= 90) or (97 <= b <= 122) or b >= 0x80:
            cur.append(b + 32 if 65 <= b <= 90 else b)
        elif cur:
            out.append(bytes(cur))
            cur = bytearray()
    if cur:
        out.append(bytes(cur))
    return out


def embed(text: str, dim: int = 256):
    raw = text.encode("utf-8")
    seen = {}
    buckets = [0.0] * dim
    # Exact accumulation with fractions avoids any dependence on summation order.
    from fractions import Fraction
    exact = [Fraction(0)] * dim
    for tok in tokens(raw):
        k = seen.get(tok, 0)
        seen[tok] = k + 1
        h = fnv1a64(tok)
        sign = 1 if (h >> 63) == 0 else -1
        exact[h % dim] += sign * Fraction(1, 1 + k)
    if all(x == 0 for x in exact):
        # Exact cancellation: one bucket keyed by the sorted token multiset.
        toks = sorted(tokens(raw)) or [raw.strip()]
        h = fnv1a64(b" ".join(toks))
        exact[h % dim] = Fraction(1 if (h >> 63) == 0 else -1)
    buckets = [float(x) for x in exact]
    norm = math.sqrt(sum(x * x for x in buckets))
    return [x / norm for x in buckets]


if __name__ == "__main__":
    dim = 256
    for text in sys.argv[1:]:
        v = embed(text, dim)
        print(repr(text))
        for i, x in enumerate(v):
            if x != 0.0:
                print(f"  {{{i}, {x:.17g}}},")
