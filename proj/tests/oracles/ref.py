# Copyright 2026 The lirlab Authors
# SPDX-License-Identifier: Apache-2.0
"""Independent reference implementations used to produce frozen test values.

Written from the definitions, without reading the C++ sources line by line.
"""

import json
import math
import re

import numpy as np

M64 = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & M64
    return x ^ (x >> 31)


def stable_hash(seed, s):
    h = 0xCBF29CE484222325 ^ splitmix64(seed)
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & M64
    return splitmix64(h)


def tokenize(text):
    out, cur = [], []
    for ch in text.encode("utf-8"):
        if ch >= 0x80 or chr(ch).isdigit() or 97 <= ch <= 122:
            cur.append(ch)
        elif 65 <= ch <= 90:
            cur.append(ch + 32)
        elif cur:
            out.append(bytes(cur).decode("utf-8"))
            cur = []
    if cur:
        out.append(bytes(cur).decode("utf-8"))
    return out


def token_features(tok, n=3, words=True):
    feats = []
    if words:
        feats.append("w:" + tok)
    cps = ["#"] + list(tok) + ["#"]
    if len(cps) <= n:
        feats.append("c:" + "".join(cps))
    else:
        feats.extend("c:" + "".join(cps[i:i + n]) for i in range(len(cps) - n + 1))
    return feats


def raw_vector(tokens, dim, seed, n=3):
    v = [0] * dim
    sign_seed = seed ^ 0x9E3779B97F4A7C15
    for t in tokens:
        for f in token_features(t, n):
            c = stable_hash(seed, f) % dim
            s = -1 if stable_hash(sign_seed, f) >> 63 else 1
            v[c] += s
    return v


def encode(text, dim=256, seed=0):
    v = np.array(raw_vector(tokenize(text), dim, seed), dtype=np.float64)
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def load_corpus(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def load_queries(path):
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if line:
                qid, text = line.split("\t", 1)
                out.append((qid, text))
    return out


def load_qrels(path):
    out = {}
    with open(path) as f:
        for line in f:
            parts = line.split()
            if len(parts) == 4:
                out.setdefault(parts[0], {})[parts[2]] = int(parts[3])
    return out


def build_matrix(docs, dim=256, seed=0):
    docs = sorted(docs, key=lambda d: d["doc_id"])
    ids = [d["doc_id"] for d in docs]
    mat = np.stack([encode(d["text"], dim, seed) for d in docs]).astype(np.float32)
    return ids, mat


def search(ids, mat, q, k):
    # Left-to-right sum over coordinates (cumsum is sequential), as mandated.
    scores = (mat.astype(np.float64) * q).cumsum(axis=1)[:, -1]
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], i))[:k]
    return [(ids[i], float(scores[i])) for i in order]


def ndcg(ranked_ids, labels, k=10):
    dcg = sum((2 ** labels.get(d, 0) - 1) / math.log2(i + 2) for i, d in enumerate(ranked_ids[:k]))
    grades = sorted((g for g in labels.values() if g > 0), reverse=True)[:k]
    idcg = sum((2 ** g - 1) / math.log2(i + 2) for i, g in enumerate(grades))
    return dcg / idcg if idcg > 0 else 0.0


class MT19937_64:
    """Standard 64-bit Mersenne Twister."""

    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & M64
        for i in range(1, 312):
            self.mt[i] = (6364136223846793005 * (self.mt[i - 1] ^ (self.mt[i - 1] >> 62)) + i) & M64
        self.idx = 312

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.idx = 0

    def __call__(self):
        if self.idx >= 312:
            self._twist()
        y = self.mt[self.idx]
        self.idx += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & M64
