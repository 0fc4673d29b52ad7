"""Compiled inner loops: random stream, archive hash table, mutation
operators, objective evaluation and the single-individual search loop.

Everything here works on plain integers and numpy arrays so it can be
jitted. Genotypes are int64 holding the bit pattern (bit 0 least
significant); only widths up to 62 bits are supported.

Random stream: SplitMix64 (Steele, Lea & Flood 2014). The state is a
1-element uint64 array; each draw adds the golden-ratio increment and
returns the finalised state. Output is pinned: changing any constant
below changes every stored result.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

SENTINEL = 1e300

# mutation kinds
GAUSSIAN = 0
PER_BIT = 1
K_FLIPS = 2
UNIFORM = 3

# acceptance kinds
ELITIST = 0
ACCEPT_ALL = 1

# objective kinds
OBJ_TABLE = 0
OBJ_PROGRAM = 1

# program opcodes (postfix)
OP_X = 0
OP_CONST = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_SIN = 5
OP_EXP = 6


# ---------------------------------------------------------------- random stream

@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def derive_seed(seed, index):
    return mix64(np.uint64(seed) ^ mix64(np.uint64(index + 1) * GOLDEN))


@njit(cache=True)
def next_u64(state):
    state[0] += GOLDEN
    return mix64(state[0])


@njit(cache=True)
def next_double(state):
    """Uniform in [0, 1) with 53 random bits."""
    return np.float64(next_u64(state) >> _S11) * _INV53


@njit(cache=True)
def next_below(state, n):
    """Integer in [0, n) for 1 <= n <= 2**32 (multiply-shift, bias < n/2**32)."""
    return np.int64(((next_u64(state) >> _S32) * np.uint64(n)) >> _S32)


@njit(cache=True)
def next_bits(state, nbits):
    """Uniform integer with `nbits` random bits, 1 <= nbits <= 62."""
    return np.int64(next_u64(state) >> np.uint64(64 - nbits))


@njit(cache=True)
def next_normal(state):
    """Standard normal via Box-Muller, cosine branch only."""
    u1 = 1.0 - next_double(state)
    u2 = next_double(state)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@njit(cache=True)
def fill_seeds(seed, start, count):
    out = np.empty(count, np.uint64)
    for i in range(count):
        out[i] = derive_seed(seed, start + i)
    return out


# ---------------------------------------------------------------- archive

@njit(cache=True)
def archive_new(capacity):
    size = 16
    while size < 2 * capacity:
        size *= 2
    # slot holds genotype + 1; zero marks an empty slot
    return np.zeros(size, np.uint64)


@njit(cache=True)
def _slot(keys, g):
    mask = np.uint64(keys.shape[0] - 1)
    key = np.uint64(g) + _ONE
    h = mix64(key) & mask
    while keys[h] != 0 and keys[h] != key:
        h = (h + _ONE) & mask
    return h


@njit(cache=True)
def archive_contains(keys, g):
    return keys[_slot(keys, g)] != 0


@njit(cache=True)
def archive_insert(keys, g):
    h = _slot(keys, g)
    if keys[h] != 0:
        return False
    keys[h] = np.uint64(g) + _ONE
    return True


# ---------------------------------------------------------------- encodings

@njit(cache=True)
def decode_unit(g, nbits):
    return np.float64(g) / np.float64((np.int64(1) << nbits) - 1)


@njit(cache=True)
def encode_unit(x, nbits):
    scale = np.float64((np.int64(1) << nbits) - 1)
    if x <= 0.0:
        return np.int64(0)
    if x >= 1.0:
        return np.int64((np.int64(1) << nbits) - 1)
    return np.int64(math.floor(x * scale + 0.5))


# ---------------------------------------------------------------- mutation

@njit(cache=True)
def mutate_gaussian(g, nbits, sigma, state):
    x = decode_unit(g, nbits) + sigma * next_normal(state)
    if x < 0.0:
        x = 0.0
    elif x > 1.0:
        x = 1.0
    return encode_unit(x, nbits)


@njit(cache=True)
def mutate_per_bit(g, nbits, p, state):
    mask = np.int64(0)
    for i in range(nbits):
        if next_double(state) < p:
            mask |= np.int64(1) << i
    return g ^ mask


@njit(cache=True)
def mutate_k_flips(g, nbits, k, state):
    # selection sampling (Knuth's Algorithm S): uniform k-subset, nbits draws
    mask = np.int64(0)
    need = k
    for i in range(nbits):
        if next_below(state, nbits - i) < need:
            mask |= np.int64(1) << i
            need -= 1
    return g ^ mask


@njit(cache=True)
def mutate(g, nbits, kind, param, state):
    if kind == GAUSSIAN:
        return mutate_gaussian(g, nbits, param, state)
    if kind == PER_BIT:
        return mutate_per_bit(g, nbits, param, state)
    if kind == K_FLIPS:
        return mutate_k_flips(g, nbits, np.int64(param), state)
    return next_bits(state, nbits)


# ---------------------------------------------------------------- objectives

@njit(cache=True)
def eval_program(ops, consts, x, stack):
    sp = 0
    for i in range(ops.shape[0]):
        op = ops[i]
        if op == OP_X:
            stack[sp] = x
            sp += 1
        elif op == OP_CONST:
            stack[sp] = consts[i]
            sp += 1
        elif op == OP_SIN:
            stack[sp - 1] = math.sin(stack[sp - 1]) if math.isfinite(stack[sp - 1]) else math.nan
        elif op == OP_EXP:
            stack[sp - 1] = math.exp(stack[sp - 1])
        else:
            b = stack[sp - 1]
            a = stack[sp - 2]
            sp -= 1
            if op == OP_ADD:
                stack[sp - 1] = a + b
            elif op == OP_SUB:
                stack[sp - 1] = a - b
            else:
                stack[sp - 1] = a * b
    return stack[0]


@njit(cache=True)
def evaluate(g, nbits, obj_kind, table, ops, consts, stack):
    if obj_kind == OBJ_TABLE:
        v = table[g]
    else:
        v = eval_program(ops, consts, decode_unit(g, nbits), stack)
    if not math.isfinite(v):
        return SENTINEL
    return v


# ---------------------------------------------------------------- search loop

@njit(cache=True)
def run_one(state, nbits, max_steps, max_mutations, mut_kind, mut_param,
            acc_kind, count_rejected, obj_kind, table, ops, consts):
    """One search run; returns (best, distinct, reinits, evaluations)."""
    stack = np.empty(max(ops.shape[0], 1), np.float64)
    keys = archive_new(max_steps)

    curr = next_bits(state, nbits)
    archive_insert(keys, curr)
    fcurr = evaluate(curr, nbits, obj_kind, table, ops, consts, stack)
    best = fcurr
    t = 1
    reinits = 0
    evals = 1
    while t < max_steps:
        found = False
        cand = curr
        fcand = fcurr
        nr_mut = 0
        while nr_mut < max_mutations:
            cand = mutate(curr, nbits, mut_kind, mut_param, state)
            nr_mut += 1
            if archive_contains(keys, cand):
                continue
            fcand = evaluate(cand, nbits, obj_kind, table, ops, consts, stack)
            evals += 1
            if acc_kind == ACCEPT_ALL or fcand <= fcurr:
                found = True
                break
            if count_rejected:
                archive_insert(keys, cand)
                t += 1
                if fcand < best:
                    best = fcand
                if t >= max_steps:
                    break
        if t >= max_steps:
            break
        if not found:
            reinits += 1
            cand = next_bits(state, nbits)
            while archive_contains(keys, cand):
                cand = next_bits(state, nbits)
            fcand = evaluate(cand, nbits, obj_kind, table, ops, consts, stack)
            evals += 1
        archive_insert(keys, cand)
        t += 1
        curr = cand
        fcurr = fcand
        if fcand < best:
            best = fcand
    return best, t, reinits, evals


@njit(cache=True, parallel=True)
def run_many(seeds, nbits, max_steps, max_mutations, mut_kind, mut_param,
             acc_kind, count_rejected, obj_kind, table, ops, consts):
    n = seeds.shape[0]
    best = np.empty(n, np.float64)
    distinct = np.empty(n, np.int64)
    reinits = np.empty(n, np.int64)
    evals = np.empty(n, np.int64)
    for i in prange(n):
        state = np.empty(1, np.uint64)
        state[0] = seeds[i]
        b, d, r, e = run_one(state, nbits, max_steps, max_mutations, mut_kind,
                             mut_param, acc_kind, count_rejected, obj_kind,
                             table, ops, consts)
        best[i] = b
        distinct[i] = d
        reinits[i] = r
        evals[i] = e
    return best, distinct, reinits, evals


@njit(cache=True)
def ordered_sum(values):
    s = 0.0
    for i in range(values.shape[0]):
        s += values[i]
    return s


# ---------------------------------------------------------------- tables

@njit(cache=True)
def random_table(count, nbits, state):
    out = np.empty(count, np.uint64)
    shift = np.uint64(64 - nbits)
    for i in range(count):
        out[i] = next_u64(state) >> shift
    return out


@njit(cache=True)
def table_crossover(a, b, nbits, state):
    out = np.empty_like(a)
    shift = np.uint64(64 - nbits)
    for i in range(a.shape[0]):
        mask = next_u64(state) >> shift
        out[i] = (a[i] & ~mask) | (b[i] & mask)
    return out


@njit(cache=True)
def table_mutate(values, nbits, p, state):
    """Flip each of the len*nbits bits with probability p (geometric skips)."""
    out = values.copy()
    if p <= 0.0:
        return out
    total = values.shape[0] * nbits
    if p >= 1.0:
        full = (_ONE << np.uint64(nbits)) - _ONE if nbits < 64 else ~np.uint64(0)
        for i in range(out.shape[0]):
            out[i] = out[i] ^ full
        return out
    lq = math.log1p(-p)
    pos = -1
    while True:
        skip = math.log(1.0 - next_double(state)) / lq
        if skip >= total:
            break
        pos += 1 + np.int64(skip)
        if pos >= total:
            break
        out[pos // nbits] ^= _ONE << np.uint64(pos % nbits)
    return out


@njit(cache=True)
def count_minima(values):
    n = values.shape[0]
    if n < 2:
        return 0
    c = 0
    if values[1] > values[0]:
        c += 1
    if values[n - 2] > values[n - 1]:
        c += 1
    for i in range(1, n - 1):
        if values[i - 1] > values[i] and values[i + 1] > values[i]:
            c += 1
    return c
