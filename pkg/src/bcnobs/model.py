"""Boolean control network core: expression trees, dynamics, reduction.

A network over ``n`` Boolean state variables and ``p`` Boolean inputs is a
list of ``n`` update expressions plus a sorted set of directly observable
state indices (the outputs, each one the value of a single state variable).
Variable indices are 1-based, matching the way models are written down;
state, input, and output values are plain 0-based tuples of 0/1 bits.

Truth tables are packed into Python integers: bit ``a`` of the table holds
the expression value at the assignment whose variable bits spell ``a``.
That keeps exhaustive essentiality checks cheap without any dependencies.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from .errors import ArityCapError, ModelError

Bits = tuple[int, ...]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Const:
    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise ModelError(f"constant must be 0 or 1, got {self.value!r}")


@dataclass(frozen=True)
class StateRef:
    index: int  # 1-based

    def __post_init__(self):
        if self.index < 1:
            raise ModelError(f"state index must be positive, got {self.index}")


@dataclass(frozen=True)
class InputRef:
    index: int  # 1-based

    def __post_init__(self):
        if self.index < 1:
            raise ModelError(f"input index must be positive, got {self.index}")


@dataclass(frozen=True)
class Not:
    child: "Expr"


def _as_operands(node) -> tuple["Expr", ...]:
    children = tuple(node.children)
    if len(children) < 2:
        raise ModelError(f"{type(node).__name__} needs at least two operands")
    return children


@dataclass(frozen=True)
class And:
    children: tuple["Expr", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", _as_operands(self))


@dataclass(frozen=True)
class Or:
    children: tuple["Expr", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", _as_operands(self))


@dataclass(frozen=True)
class Xor:
    children: tuple["Expr", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", _as_operands(self))


Expr = Union[Const, StateRef, InputRef, Not, And, Or, Xor]
Ref = Union[StateRef, InputRef]


def _ref_key(ref: Ref) -> tuple[int, int]:
    return (0 if isinstance(ref, StateRef) else 1, ref.index)


def support(expr: Expr) -> frozenset[Ref]:
    """All state/input references appearing syntactically in ``expr``."""
    refs: set[Ref] = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if isinstance(e, (StateRef, InputRef)):
            refs.add(e)
        elif isinstance(e, Not):
            stack.append(e.child)
        elif isinstance(e, (And, Or, Xor)):
            stack.extend(e.children)
    return frozenset(refs)


def evaluate(expr: Expr, x: Sequence[int], u: Sequence[int]) -> int:
    """Truth value of ``expr`` under state bits ``x`` and input bits ``u``."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, StateRef):
        if expr.index > len(x):
            raise ModelError(f"state index {expr.index} out of range for {len(x)} states")
        return x[expr.index - 1]
    if isinstance(expr, InputRef):
        if expr.index > len(u):
            raise ModelError(f"input index {expr.index} out of range for {len(u)} inputs")
        return u[expr.index - 1]
    if isinstance(expr, Not):
        return 1 - evaluate(expr.child, x, u)
    if isinstance(expr, And):
        return int(all(evaluate(c, x, u) for c in expr.children))
    if isinstance(expr, Or):
        return int(any(evaluate(c, x, u) for c in expr.children))
    if isinstance(expr, Xor):
        return sum(evaluate(c, x, u) for c in expr.children) & 1
    raise ModelError(f"not an expression node: {expr!r}")


def _bit_pattern(j: int, width: int) -> int:
    # Bit i of the result is (i >> j) & 1, for i in [0, 2**width).
    positions = 1 << width
    block = 1 << j
    seg = ((1 << block) - 1) << block
    span = 2 * block
    while span < positions:
        seg |= seg << span
        span <<= 1
    return seg


def truth_table(expr: Expr, positions: Mapping[Ref, int], width: int) -> int:
    """Packed truth table of ``expr`` over ``width`` variables.

    ``positions`` maps each reference in the expression to its bit position
    within the assignment index.
    """
    mask = (1 << (1 << width)) - 1

    def go(e: Expr) -> int:
        if isinstance(e, Const):
            return mask if e.value else 0
        if isinstance(e, (StateRef, InputRef)):
            return _bit_pattern(positions[e], width)
        if isinstance(e, Not):
            return mask ^ go(e.child)
        vals = [go(c) for c in e.children]
        if isinstance(e, And):
            acc = mask
            for v in vals:
                acc &= v
        elif isinstance(e, Or):
            acc = 0
            for v in vals:
                acc |= v
        else:
            acc = 0
            for v in vals:
                acc ^= v
        return acc

    return go(expr)


def essential_support(expr: Expr, *, arity_cap: int = 20,
                      update_index: int | None = None) -> frozenset[Ref]:
    """Variables whose value can flip ``expr``, by exhaustive assignment.

    Checks, for every distinct variable in the expression, whether some
    assignment of the remaining variables is sensitive to it. The check
    enumerates all ``2**arity`` assignments at once as a packed table and
    refuses (``ArityCapError``) above ``arity_cap``.
    """
    refs = sorted(support(expr), key=_ref_key)
    if len(refs) > arity_cap:
        raise ArityCapError(len(refs), arity_cap, update_index)
    width = len(refs)
    table = truth_table(expr, {v: j for j, v in enumerate(refs)}, width)
    mask = (1 << (1 << width)) - 1
    essential = set()
    for j, v in enumerate(refs):
        fixed_zero = mask ^ _bit_pattern(j, width)
        if ((table >> (1 << j)) ^ table) & fixed_zero:
            essential.add(v)
    return frozenset(essential)


def substitute(expr: Expr, ref: Ref, bit: int) -> Expr:
    """Replace every occurrence of ``ref`` by the constant ``bit``."""
    if isinstance(expr, (StateRef, InputRef)):
        return Const(bit) if expr == ref else expr
    if isinstance(expr, Not):
        return Not(substitute(expr.child, ref, bit))
    if isinstance(expr, (And, Or, Xor)):
        return type(expr)(tuple(substitute(c, ref, bit) for c in expr.children))
    return expr


def fold_constants(expr: Expr) -> Expr:
    """Propagate constants; returns an equivalent, usually smaller expression."""
    if isinstance(expr, (Const, StateRef, InputRef)):
        return expr
    if isinstance(expr, Not):
        child = fold_constants(expr.child)
        if isinstance(child, Const):
            return Const(1 - child.value)
        return Not(child)
    kids = [fold_constants(c) for c in expr.children]
    if isinstance(expr, And):
        if any(isinstance(k, Const) and k.value == 0 for k in kids):
            return Const(0)
        kids = [k for k in kids if not isinstance(k, Const)]
        if not kids:
            return Const(1)
        return kids[0] if len(kids) == 1 else And(tuple(kids))
    if isinstance(expr, Or):
        if any(isinstance(k, Const) and k.value == 1 for k in kids):
            return Const(1)
        kids = [k for k in kids if not isinstance(k, Const)]
        if not kids:
            return Const(0)
        return kids[0] if len(kids) == 1 else Or(tuple(kids))
    parity = sum(k.value for k in kids if isinstance(k, Const)) & 1
    kids = [k for k in kids if not isinstance(k, Const)]
    if not kids:
        return Const(parity)
    core = kids[0] if len(kids) == 1 else Xor(tuple(kids))
    return Not(core) if parity else core


def _drop_fictitious(expr: Expr, essential: frozenset[Ref]) -> Expr:
    current = expr
    for v in sorted(support(expr) - essential, key=_ref_key):
        zero = fold_constants(substitute(current, v, 0))
        one = fold_constants(substitute(current, v, 1))
        # Dropping a non-essential variable must not change the function.
        refs = sorted(support(zero) | support(one), key=_ref_key)
        pos = {r: j for j, r in enumerate(refs)}
        assert truth_table(zero, pos, len(refs)) == truth_table(one, pos, len(refs))
        current = zero
    return current


@dataclass(frozen=True)
class BcnModel:
    """A Boolean control network with identity outputs.

    ``updates[i]`` is the next-state expression of state variable ``i+1``;
    ``outputs`` is the strictly increasing list of directly observable
    state indices. After :func:`reduce_fictitious` every variable that
    appears in an update is essential for it, which downstream graph
    analysis relies on.
    """

    n: int
    p: int
    updates: tuple[Expr, ...]
    outputs: tuple[int, ...]
    state_names: tuple[str, ...]
    input_names: tuple[str, ...]

    def __post_init__(self):
        if self.n != len(self.updates):
            raise ModelError(f"{self.n} states but {len(self.updates)} updates")
        if len(self.state_names) != self.n or len(self.input_names) != self.p:
            raise ModelError("name lists do not match the declared sizes")
        seen: set[str] = set()
        for name in self.state_names + self.input_names:
            if not _NAME_RE.match(name):
                raise ModelError(f"bad identifier {name!r}")
            if name in seen:
                raise ModelError(f"duplicate name {name!r}")
            seen.add(name)
        prev = 0
        for o in self.outputs:
            if not 1 <= o <= self.n:
                raise ModelError(f"output index {o} out of range")
            if o <= prev:
                raise ModelError("outputs must be strictly increasing")
            prev = o
        for i, f in enumerate(self.updates, start=1):
            for ref in support(f):
                if isinstance(ref, StateRef) and ref.index > self.n:
                    raise ModelError(f"update {i} references missing state {ref.index}")
                if isinstance(ref, InputRef) and ref.index > self.p:
                    raise ModelError(f"update {i} references missing input {ref.index}")

    @property
    def m(self) -> int:
        return len(self.outputs)

    @classmethod
    def make(cls, updates: Iterable[Expr], p: int = 0,
             outputs: Iterable[int] = (),
             state_names: Sequence[str] | None = None,
             input_names: Sequence[str] | None = None) -> "BcnModel":
        """Build a model with sorted outputs and default names."""
        ups = tuple(updates)
        n = len(ups)
        outs = tuple(sorted(set(outputs)))
        if state_names is None:
            state_names = tuple(f"x{i}" for i in range(1, n + 1))
        if input_names is None:
            input_names = tuple(f"u{q}" for q in range(1, p + 1))
        return cls(n, p, ups, outs, tuple(state_names), tuple(input_names))


def with_outputs(model: BcnModel, extra: Iterable[int]) -> BcnModel:
    """The same network with ``extra`` state indices made directly observable."""
    merged = tuple(sorted(set(model.outputs) | set(extra)))
    return BcnModel(model.n, model.p, model.updates, merged,
                    model.state_names, model.input_names)


def _check_width(bits: Sequence[int], width: int, what: str) -> None:
    if len(bits) != width:
        raise ModelError(f"{what} has width {len(bits)}, expected {width}")
    for b in bits:
        if b not in (0, 1):
            raise ModelError(f"{what} contains a non-bit value {b!r}")


def step(model: BcnModel, x: Sequence[int], u: Sequence[int]) -> Bits:
    """One synchronous update of every state variable."""
    _check_width(x, model.n, "state vector")
    _check_width(u, model.p, "input vector")
    return tuple(evaluate(f, x, u) for f in model.updates)


def output_of(model: BcnModel, x: Sequence[int]) -> Bits:
    """The output vector read off a state: bit j is the j-th observed variable."""
    _check_width(x, model.n, "state vector")
    return tuple(x[o - 1] for o in model.outputs)


def simulate(model: BcnModel, x0: Sequence[int],
             inputs: Sequence[Sequence[int]]) -> tuple[list[Bits], list[Bits]]:
    """Roll the dynamics forward; returns T+1 states and T+1 outputs."""
    x = tuple(x0)
    states = [x]
    for u in inputs:
        x = step(model, x, u)
        states.append(x)
    return states, [output_of(model, s) for s in states]


def reduce_fictitious(model: BcnModel, *, arity_cap: int = 20) -> BcnModel:
    """Rewrite every update so it mentions only its essential arguments.

    The step function is unchanged; updates that are already reduced are
    kept identical, so reducing twice is a no-op.
    """
    new_updates = []
    changed = False
    for i, f in enumerate(model.updates, start=1):
        essential = essential_support(f, arity_cap=arity_cap, update_index=i)
        if essential == support(f):
            new_updates.append(f)
            continue
        changed = True
        new_updates.append(_drop_fictitious(f, essential))
    if not changed:
        return model
    return BcnModel(model.n, model.p, tuple(new_updates), model.outputs,
                    model.state_names, model.input_names)


def parse_bits(text: str) -> Bits:
    """A tuple of bits from a string like ``10110``."""
    for ch in text:
        if ch not in "01":
            raise ModelError(f"bad bit {ch!r} in {text!r}")
    return tuple(int(ch) for ch in text)


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)
