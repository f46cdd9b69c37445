"""
Canonical text form of radial profiles

Profiles print as prefix S-expressions:

    (profile (support LO HI) (breaks b1 ... bn) e0 e1 ... en)

with e ::= number | r | pi | (add e...) | (mul e...) | (pow e e)
         | (exp e) | (log e) | (abs e)

The parser also accepts sugar that expands into the canonical form:
(sub a b), (neg a), (div a b), (sqrt a), (compose outer inner),
(bump r0 r1 [h]), (cutoff r0 r1), (falloff r0 r1), (window lo hi [w]),
(truncpower C lo hi [w]), (trunclogpower C lo hi),
(loghardy k gamma p R), (restrict lo hi P), (dilate lam P), and profile
arithmetic through add / sub / mul / neg. Nothing is evaluated besides
building sympy objects.
"""

import math
import re
from dataclasses import dataclass
from typing import List, Tuple, Union

import sympy as sp

import profiles as pr
from errors import ProfileError

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(/[+-]?\d+)?$")


class GrammarError(ProfileError):
    """Malformed profile text, with the offset of the offending token."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


@dataclass
class Atom:
    text: str
    offset: int


@dataclass
class Node:
    items: List[Union["Node", Atom]]
    offset: int

    @property
    def head(self) -> str:
        if not self.items or not isinstance(self.items[0], Atom):
            raise GrammarError("expected an operator name", self.offset)
        return self.items[0].text

    @property
    def args(self) -> List[Union["Node", Atom]]:
        return self.items[1:]


Tree = Union[Node, Atom]


# -- reading ----------------------------------------------------------------

def read(text: str) -> Tree:
    """Tokenize and nest one S-expression."""
    stack: List[Node] = []
    result = None
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            if text[pos:].strip() == "":
                break
            raise GrammarError("unexpected character", pos)
        start = match.start(1) if match.group(1) else match.start(2) if match.group(2) else match.start(3)
        pos = match.end()
        if result is not None:
            raise GrammarError("trailing text after expression", start)
        if match.group(1):
            stack.append(Node([], start))
        elif match.group(2):
            if not stack:
                raise GrammarError("unbalanced ')'", start)
            node = stack.pop()
            if stack:
                stack[-1].items.append(node)
            else:
                result = node
        else:
            atom = Atom(match.group(3), start)
            if stack:
                stack[-1].items.append(atom)
            else:
                result = atom
    if stack:
        raise GrammarError("unbalanced '('", stack[-1].offset)
    if result is None:
        raise GrammarError("empty expression", 0)
    return result


def _number(atom: Tree) -> sp.Expr:
    if not isinstance(atom, Atom) or not _NUMBER.match(atom.text):
        raise GrammarError("expected a number", atom.offset)
    text = atom.text
    if "/" in text:
        num, den = text.split("/")
        if float(den) == 0:
            raise GrammarError("zero denominator", atom.offset)
        return sp.Rational(num) / sp.Rational(den)
    if re.match(r"^[+-]?\d+$", text):
        return sp.Integer(int(text))
    return sp.Rational(text)


def _real(atom: Tree) -> float:
    if isinstance(atom, Atom) and atom.text in ("inf", "+inf"):
        return math.inf
    return float(_number(atom))


# -- building ---------------------------------------------------------------

_UNARY = {"exp": sp.exp, "log": sp.log, "abs": sp.Abs, "sqrt": sp.sqrt, "neg": lambda x: -x}


def build_expr(tree: Tree) -> sp.Expr:
    if isinstance(tree, Atom):
        if tree.text == "r":
            return pr.r
        if tree.text == "pi":
            return sp.pi
        return _number(tree)
    head, args = tree.head, tree.args
    if head in _UNARY:
        _arity(tree, 1)
        return _UNARY[head](build_expr(args[0]))
    if head == "add":
        _arity(tree, 1, None)
        return sp.Add(*[build_expr(a) for a in args])
    if head == "mul":
        _arity(tree, 1, None)
        return sp.Mul(*[build_expr(a) for a in args])
    if head == "pow":
        _arity(tree, 2)
        return sp.Pow(build_expr(args[0]), build_expr(args[1]))
    if head == "sub":
        _arity(tree, 2)
        return build_expr(args[0]) - build_expr(args[1])
    if head == "div":
        _arity(tree, 2)
        return build_expr(args[0]) / build_expr(args[1])
    if head == "compose":
        _arity(tree, 2)
        return build_expr(args[0]).subs(pr.r, build_expr(args[1]))
    raise GrammarError(f"unknown expression operator '{head}'", tree.offset)


def _arity(node: Node, low: int, high: Union[int, None] = -1) -> None:
    high = low if high == -1 else high
    count = len(node.args)
    if count < low or (high is not None and count > high):
        expected = f"{low}" if high == low else f"at least {low}" if high is None else f"{low}-{high}"
        raise GrammarError(f"'{node.head}' takes {expected} arguments, got {count}", node.offset)


_PROFILE_ALGEBRA = {"add", "sub", "mul", "neg"}


def build_profile(tree: Tree) -> pr.RadialProfile:
    if isinstance(tree, Atom):
        return pr.from_expr(build_expr(tree))
    head, args = tree.head, tree.args
    try:
        if head == "profile":
            return _build_canonical(tree)
        if head == "bump":
            _arity(tree, 2, 3)
            return pr.bump(*[_number(a) for a in args])
        if head == "cutoff":
            _arity(tree, 2)
            return pr.cutoff(*[_number(a) for a in args])
        if head == "falloff":
            _arity(tree, 2)
            return pr.falloff(*[_number(a) for a in args])
        if head == "window":
            _arity(tree, 2, 3)
            return pr.window(*[_number(a) for a in args])
        if head == "truncpower":
            _arity(tree, 3, 4)
            return pr.truncated_power(*[_number(a) for a in args])
        if head == "trunclogpower":
            _arity(tree, 3)
            return pr.truncated_log_power(*[_number(a) for a in args])
        if head == "loghardy":
            _arity(tree, 4)
            return pr.log_hardy_profile(*[_number(a) for a in args])
        if head == "restrict":
            _arity(tree, 3)
            return build_profile(args[2]).restrict(_real(args[0]), _real(args[1]))
        if head == "dilate":
            _arity(tree, 2)
            return build_profile(args[1]).dilate(float(_number(args[0])))
    except GrammarError:
        raise
    except ProfileError as exc:
        raise GrammarError(str(exc), tree.offset) from exc
    if head in _PROFILE_ALGEBRA and _mentions_profile_form(tree):
        parts = [build_profile(a) for a in args]
        if head == "neg":
            _arity(tree, 1)
            return -parts[0]
        if head == "sub":
            _arity(tree, 2)
            return parts[0] - parts[1]
        combined = parts[0]
        for part in parts[1:]:
            combined = combined + part if head == "add" else combined * part
        return combined
    return pr.from_expr(build_expr(tree))


_PROFILE_FORMS = {"profile", "bump", "cutoff", "falloff", "window", "truncpower", "trunclogpower", "loghardy", "restrict", "dilate"}


def _mentions_profile_form(tree: Tree) -> bool:
    if isinstance(tree, Atom):
        return False
    if tree.head in _PROFILE_FORMS:
        return True
    return any(_mentions_profile_form(a) for a in tree.args)


def _build_canonical(tree: Node) -> pr.RadialProfile:
    args = tree.args
    if len(args) < 3 or not all(isinstance(a, Node) for a in args[:2]):
        raise GrammarError("expected (profile (support LO HI) (breaks ...) pieces...)", tree.offset)
    support_node, breaks_node = args[0], args[1]
    if support_node.head != "support" or len(support_node.args) != 2:
        raise GrammarError("expected (support LO HI)", support_node.offset)
    if breaks_node.head != "breaks":
        raise GrammarError("expected (breaks ...)", breaks_node.offset)
    support = (_real(support_node.args[0]), _real(support_node.args[1]))
    breaks = tuple(_real(a) for a in breaks_node.args)
    pieces = tuple(build_expr(a) for a in args[2:])
    try:
        return pr.RadialProfile(pieces, breaks, support)
    except ProfileError as exc:
        raise GrammarError(str(exc), tree.offset) from exc


# -- printing ---------------------------------------------------------------

def print_expr(expr: sp.Expr) -> str:
    if expr == pr.r:
        return "r"
    if expr is sp.E:
        return "(exp 1)"
    if expr is sp.pi:
        return "pi"
    if isinstance(expr, sp.Integer):
        return str(int(expr))
    if isinstance(expr, sp.Rational):
        return f"{expr.p}/{expr.q}"
    if isinstance(expr, sp.Float):
        return print_expr(pr.exact(float(expr)))
    if isinstance(expr, sp.Add):
        return "(add " + " ".join(print_expr(a) for a in expr.args) + ")"
    if isinstance(expr, sp.Mul):
        return "(mul " + " ".join(print_expr(a) for a in expr.args) + ")"
    if isinstance(expr, sp.Pow):
        return f"(pow {print_expr(expr.base)} {print_expr(expr.exp)})"
    if isinstance(expr, sp.exp):
        return f"(exp {print_expr(expr.args[0])})"
    if isinstance(expr, sp.log):
        return f"(log {print_expr(expr.args[0])})"
    if isinstance(expr, sp.Abs):
        return f"(abs {print_expr(expr.args[0])})"
    raise ProfileError(f"expression {expr} is outside the profile grammar")


def _print_real(value: float) -> str:
    return "inf" if math.isinf(value) else repr(float(value))


def print_profile(profile: pr.RadialProfile) -> str:
    lo, hi = profile.support
    parts = [
        "profile",
        f"(support {_print_real(lo)} {_print_real(hi)})",
        "(breaks" + "".join(" " + _print_real(b) for b in profile.breaks) + ")",
    ]
    parts.extend(print_expr(piece) for piece in profile.pieces)
    return "(" + " ".join(parts) + ")"


def parse_profile(text: str) -> pr.RadialProfile:
    return build_profile(read(text))


def parse_expr(text: str) -> sp.Expr:
    return build_expr(read(text))


def canonical(text: str) -> str:
    """Canonical text for any accepted profile text."""
    return print_profile(parse_profile(text))


def error_position(text: str, offset: int) -> Tuple[int, int]:
    """1-based (line, column) of an offset inside text."""
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column
