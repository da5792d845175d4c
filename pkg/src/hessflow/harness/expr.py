"""Tiny arithmetic expression language for config files.

Grammar: numbers, variables ``x y z t``, constants ``pi e``, ``+ - * / ^``,
parentheses, unary minus and the functions ``sin cos exp abs sqrt``.  The
source is parsed with :mod:`ast` (``^`` is mapped to power) and compiled to a
vectorized numpy sampler; anything outside the whitelist is rejected with the
column where it occurs.
"""

import ast

import numpy as np

from ..exceptions import ConfigError

VARIABLES = ("x", "y", "z", "t")
CONSTANTS = {"pi": np.pi, "e": np.e}
FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs, "sqrt": np.sqrt}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


def _source_column(src, offset):
    """Map a 0-based offset in the ``^``-expanded text back to a 1-based column of ``src``."""
    if offset is None:
        return None
    pos = 0
    for k, ch in enumerate(src):
        width = 2 if ch == "^" else 1
        if offset < pos + width:
            return k + 1
        pos += width
    return len(src) + 1


def _fail(msg, node, src, offset=None):
    if offset is None:
        offset = getattr(node, "col_offset", None)
    pos = _source_column(src, offset)
    raise ConfigError(f"{msg} in expression {src!r}", position=pos)


def _operator_offset(node, src):
    """Offset of a binary operator: first non-blank after the left operand."""
    expanded = src.replace("^", "**")
    k = node.left.end_col_offset
    while k < len(expanded) and expanded[k] in " )":
        k += 1
    return k


def _check(node, src):
    if isinstance(node, ast.Expression):
        _check(node.body, src)
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            _fail("only numeric literals are allowed", node, src)
    elif isinstance(node, ast.Name):
        if node.id not in VARIABLES and node.id not in CONSTANTS:
            _fail(f"unknown name {node.id!r}", node, src)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            _fail("unsupported operator", node, src, _operator_offset(node, src))
        _check(node.left, src)
        _check(node.right, src)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            _fail("unsupported unary operator", node, src)
        _check(node.operand, src)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            _fail("unknown function", node, src)
        if len(node.args) != 1 or node.keywords:
            _fail(f"{node.func.id} takes exactly one argument", node, src)
        _check(node.args[0], src)
    else:
        _fail("unsupported syntax", node, src)


def _evaluate(node, env):
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return env[node.id] if node.id in env else CONSTANTS[node.id]
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_evaluate(node.left, env), _evaluate(node.right, env))
    if isinstance(node, ast.UnaryOp):
        val = _evaluate(node.operand, env)
        return -val if isinstance(node.op, ast.USub) else val
    return FUNCTIONS[node.func.id](_evaluate(node.args[0], env))


class Expression:
    """Compiled expression; call with coordinate arrays ``(x[, y[, z]][, t])``."""

    def __init__(self, src, dim=None):
        if not isinstance(src, str) or not src.strip():
            raise ConfigError("empty expression", position=1)
        self.src = src.strip()
        expanded = self.src.replace("^", "**")
        try:
            tree = ast.parse(expanded, mode="eval")
        except SyntaxError as exc:
            # offsets are 1-based; 0 or past the end means "ran out of input"
            offset = exc.offset - 1 if exc.offset else len(expanded)
            pos = _source_column(self.src, offset)
            raise ConfigError(f"syntax error in expression {self.src!r}", position=pos) from None
        _check(tree, self.src)
        self._tree = tree.body
        self.names = sorted({n.id for n in ast.walk(tree) if isinstance(n, ast.Name) and n.id in VARIABLES})
        self.dim = dim
        if dim is not None:
            allowed = set(VARIABLES[:dim]) | {"t"}
            extra = set(self.names) - allowed
            if extra:
                raise ConfigError(f"variable(s) {sorted(extra)} not defined in dimension {dim}")

    @property
    def uses_time(self):
        return "t" in self.names

    def __call__(self, *args, t=None, **kwargs):
        env = dict(kwargs)
        coords = list(args)
        if self.dim is not None and len(coords) == self.dim + 1 and t is None:
            t = coords.pop()
        for name, val in zip(VARIABLES[:3], coords):
            env[name] = np.asarray(val, dtype=float)
        if t is not None:
            env["t"] = np.asarray(t, dtype=float)
        missing = [n for n in self.names if n not in env]
        if missing:
            raise ConfigError(f"expression {self.src!r} needs value(s) for {missing}")
        shape = np.broadcast_shapes(*(np.shape(v) for v in env.values())) if env else ()
        with np.errstate(all="ignore"):
            out = np.broadcast_to(np.asarray(_evaluate(self._tree, env), dtype=float), shape)
        return out

    def __repr__(self):
        return f"Expression({self.src!r})"


def expression_eval(src, dim=None):
    """Parse ``src`` and return a vectorized sampler."""
    return Expression(src, dim)
