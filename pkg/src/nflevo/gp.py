"""Real-valued test functions on [0, 1] as expression trees over
{add, sub, mul, sin, exp} with terminal x (plus optional constants)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import BitGenotype, SENTINEL, RngStream

BINARY = ("add", "sub", "mul")
UNARY = ("sin", "exp")
OPERATORS = BINARY + UNARY
ARITY = {"add": 2, "sub": 2, "mul": 2, "sin": 1, "exp": 1, "x": 0, "c": 0}
_OPCODES = {"x": K.OP_X, "c": K.OP_CONST, "add": K.OP_ADD, "sub": K.OP_SUB,
            "mul": K.OP_MUL, "sin": K.OP_SIN, "exp": K.OP_EXP}

MAX_DEPTH = 6
LEAF_PROB = 0.3
CONST_PROB = 0.5
CONST_RANGE = 10.0
CROSSOVER_RETRIES = 10


class Node:
    __slots__ = ("op", "children", "value")

    def __init__(self, op: str, children: list[Node] | None = None, value: float = 0.0):
        self.op = op
        self.children = children or []
        self.value = value

    def copy(self) -> Node:
        return Node(self.op, [c.copy() for c in self.children], self.value)

    def depth(self) -> int:
        if not self.children:
            return 1
        return 1 + max(c.depth() for c in self.children)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Node):
            return NotImplemented
        return (self.op == other.op and self.value == other.value
                and self.children == other.children)

    def __hash__(self):
        return hash(to_sexpr(self))

    def __repr__(self) -> str:
        return f"Node({to_sexpr(self)})"


def x() -> Node:
    return Node("x")


def const(v: float) -> Node:
    return Node("c", value=float(v))


def op(name: str, *children: Node) -> Node:
    if ARITY.get(name) != len(children) or name in ("x", "c"):
        raise ValueError(f"{name} takes {ARITY.get(name)} arguments, got {len(children)}")
    return Node(name, list(children))


def validate(t: Node, max_depth: int = MAX_DEPTH) -> None:
    """Raise ValueError if arities are wrong or the tree is too deep."""
    stack = [t]
    while stack:
        n = stack.pop()
        if n.op not in ARITY:
            raise ValueError(f"unknown operator {n.op!r}")
        if len(n.children) != ARITY[n.op]:
            raise ValueError(f"{n.op} has {len(n.children)} children")
        stack.extend(n.children)
    if t.depth() > max_depth:
        raise ValueError(f"depth {t.depth()} exceeds {max_depth}")


# ---------------------------------------------------------------- evaluation

def _eval(n: Node, xv: float) -> float:
    o = n.op
    if o == "x":
        return xv
    if o == "c":
        return n.value
    if o == "sin":
        a = _eval(n.children[0], xv)
        return math.sin(a) if math.isfinite(a) else math.nan
    if o == "exp":
        a = _eval(n.children[0], xv)
        try:
            return math.exp(a)
        except OverflowError:
            return math.inf
    a = _eval(n.children[0], xv)
    b = _eval(n.children[1], xv)
    if o == "add":
        return a + b
    if o == "sub":
        return a - b
    return a * b


def eval_tree(t: Node, xv: float) -> float:
    """Value of the tree at x; overflow and NaN become the penalty sentinel."""
    v = _eval(t, float(xv))
    return v if math.isfinite(v) else SENTINEL


def compile_tree(t: Node) -> tuple[np.ndarray, np.ndarray]:
    """Postfix program (opcodes, constants) for the compiled evaluator."""
    ops: list[int] = []
    consts: list[float] = []

    def emit(n: Node):
        for c in n.children:
            emit(c)
        ops.append(_OPCODES[n.op])
        consts.append(n.value)

    emit(t)
    return np.array(ops, dtype=np.int8), np.array(consts, dtype=np.float64)


class GpObjective:
    """A tree read as a function of the decoded genotype x in [0, 1]."""

    def __init__(self, tree: Node, length: int = 32):
        self.tree = tree
        self.length = length
        self._program = compile_tree(tree)

    def evaluate(self, g: BitGenotype) -> float:
        return eval_tree(self.tree, g.value / ((1 << self.length) - 1))

    def kernel_args(self):
        ops, consts = self._program
        return K.OBJ_PROGRAM, _DUMMY_TABLE, ops, consts


_DUMMY_TABLE = np.zeros(1, np.float64)


# ---------------------------------------------------------------- text form

def to_sexpr(t: Node) -> str:
    if t.op == "x":
        return "x"
    if t.op == "c":
        return f"c{t.value!r}"
    return "(" + " ".join([t.op] + [to_sexpr(c) for c in t.children]) + ")"


def parse_sexpr(text: str) -> Node:
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse() -> Node:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "x":
            return x()
        if tok.startswith("c"):
            try:
                return const(float(tok[1:]))
            except ValueError:
                raise ValueError(f"bad constant token {tok!r}") from None
        if tok != "(":
            raise ValueError(f"unexpected token {tok!r}")
        name = tokens[pos] if pos < len(tokens) else ""
        pos += 1
        if name not in OPERATORS:
            raise ValueError(f"unknown operator {name!r}")
        children = [parse() for _ in range(ARITY[name])]
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ValueError(f"expected ')' after {name} arguments")
        pos += 1
        return Node(name, children)

    tree = parse()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens: {' '.join(tokens[pos:])}")
    return tree


# ---------------------------------------------------------------- variation

def _random_leaf(rng: RngStream, constants: bool) -> Node:
    if constants and rng.uniform() < CONST_PROB:
        return const(CONST_RANGE * (2.0 * rng.uniform() - 1.0))
    return x()


def random_tree(max_depth: int, rng: RngStream, constants: bool = True,
                leaf_prob: float = LEAF_PROB) -> Node:
    """Grow-method tree with depth <= max_depth."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if max_depth == 1 or rng.uniform() < leaf_prob:
        return _random_leaf(rng, constants)
    name = OPERATORS[rng.below(len(OPERATORS))]
    return Node(name, [random_tree(max_depth - 1, rng, constants, leaf_prob)
                       for _ in range(ARITY[name])])


def _positions(t: Node) -> list[tuple[Node, Node | None, int, int]]:
    """Preorder list of (node, parent, child index, depth of node)."""
    out = []
    stack = [(t, None, 0, 1)]
    while stack:
        n, parent, idx, d = stack.pop()
        out.append((n, parent, idx, d))
        for i in range(len(n.children) - 1, -1, -1):
            stack.append((n.children[i], n, i, d + 1))
    return out


def _graft(base: Node, point: int, donor: Node) -> Node:
    """Copy of `base` with its `point`-th preorder subtree replaced by a copy of `donor`."""
    out = base.copy()
    node, parent, idx, _ = _positions(out)[point]
    if parent is None:
        return donor.copy()
    parent.children[idx] = donor.copy()
    return out


def subtree_crossover(a: Node, b: Node, rng: RngStream, max_depth: int = MAX_DEPTH) -> Node:
    """Replace a random subtree of a copy of `a` with a random subtree of `b`.

    Points are redrawn up to CROSSOVER_RETRIES times while the result would
    be too deep; after that a copy of `a` is returned.
    """
    pa = _positions(a)
    pb = _positions(b)
    heights = [n.depth() for n, _, _, _ in pb]
    for _ in range(1 + CROSSOVER_RETRIES):
        i = rng.below(len(pa))
        j = rng.below(len(pb))
        if pa[i][3] - 1 + heights[j] <= max_depth:
            return _graft(a, i, pb[j][0])
    return a.copy()


def mutate_tree(t: Node, rng: RngStream, max_depth: int = MAX_DEPTH, constants: bool = True) -> Node:
    """Change exactly one node: operators swap to another of equal arity,
    leaves are regrown within the remaining depth allowance."""
    out = t.copy()
    pos = _positions(out)
    node, parent, idx, d = pos[rng.below(len(pos))]
    if node.children:
        same = BINARY if len(node.children) == 2 else UNARY
        others = [o for o in same if o != node.op]
        node.op = others[rng.below(len(others))]
        return out
    new = random_tree(max_depth - d + 1, rng, constants)
    if parent is None:
        return new
    parent.children[idx] = new
    return out


# ---------------------------------------------------------------- parameters

@dataclass(frozen=True)
class GpParams:
    population_size: int = 50
    generations: int = 10
    crossover_probability: float = 0.9
    mutations_per_chromosome: int = 1
    max_depth: int = MAX_DEPTH
    duel_runs: int = 500
    constants: bool = True
    selection: str = "uniform"

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not 0 <= self.crossover_probability <= 1:
            raise ValueError("crossover_probability must be in [0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.duel_runs < 1:
            raise ValueError("duel_runs must be >= 1")


def evolve_gp_function(a, b, gp: GpParams, engine, rng: RngStream, *,
                       paired_seeds: bool = False, progress=None):
    """Evolve a tree on which `a` reaches lower minima than `b`.

    Returns an `Evolved` record (unpacks as `tree, fitness`).
    """
    from .duel import duel
    from .steady import steady_state

    if a.encoding_length != b.encoding_length:
        raise ValueError("both algorithms must use the same encoding length")
    length = a.encoding_length

    def evaluate(tree: Node, stream: RngStream):
        return duel(GpObjective(tree, length), a, b, gp.duel_runs, engine, stream,
                    paired_seeds=paired_seeds)

    def vary(tree: Node, r: RngStream) -> Node:
        for _ in range(gp.mutations_per_chromosome):
            tree = mutate_tree(tree, r, gp.max_depth, gp.constants)
        return tree

    return steady_state(
        init=lambda r: random_tree(gp.max_depth, r, gp.constants),
        crossover=lambda p, q, r: subtree_crossover(p, q, r, gp.max_depth),
        mutate=vary,
        evaluate=evaluate,
        population_size=gp.population_size,
        generations=gp.generations,
        crossover_probability=gp.crossover_probability,
        rng=rng,
        selection=gp.selection,
        progress=progress,
    )
