"""User-defined problems from INI files.

Example::

    [problem]
    name = bbm
    d = 2
    domain = -1, 1
    A = [[2, 1], [0, 2]]
    B = [[1, 0], [0, 1]]
    G = [u1*u2, u1^2]
    u0 = [exp(-20*x^2), 0]
    gamma = [0, 0]
    gL = [0, 0]
    gR = [0, 0]

    [solver]
    N = 64
    dt = 0.01
    T = 1
    scheme = ssp23

Expressions may use numbers, ``+ - * / ^ **``, parentheses, the functions
``sin cos tan exp log sqrt tanh abs``, the constant ``pi``, the unknowns
``u1 .. ud`` and (where meaningful) ``x`` and ``t``. Anything else is
rejected.
"""

from __future__ import annotations

import ast
import configparser
import math

import numpy as np

from .errors import ConfigurationError
from .problems import Problem
from .system import SystemDef

FUNCTIONS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "tanh": np.tanh, "abs": np.abs,
}
CONSTANTS = {"pi": math.pi}
_BINOPS = {
    ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
    ast.Div: np.divide, ast.Pow: np.power,
}


class Expression:
    """A whitelisted arithmetic expression evaluated with numpy broadcasting."""

    def __init__(self, text, variables):
        self.text = text
        self.variables = tuple(variables)
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ConfigurationError(f"cannot parse expression {text!r}: {exc.msg}") from None
        self._check(tree.body)
        self.tree = tree.body
        self.names = {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)}

    def _check(self, node):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            self._check(node.operand)
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            pass
        elif isinstance(node, ast.Name):
            if node.id not in self.variables and node.id not in CONSTANTS:
                raise ConfigurationError(
                    f"unknown name {node.id!r} in {self.text!r}; allowed: {', '.join(self.variables)}")
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in FUNCTIONS) or node.keywords \
                    or len(node.args) != 1:
                raise ConfigurationError(f"only one-argument calls of {sorted(FUNCTIONS)} are allowed in {self.text!r}")
            self._check(node.args[0])
        else:
            raise ConfigurationError(f"unsupported syntax {type(node).__name__} in {self.text!r}")

    def __call__(self, **env):
        return self._eval(self.tree, env)

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else CONSTANTS[node.id]
        return FUNCTIONS[node.func.id](self._eval(node.args[0], env))


def _split_literal(text, what):
    """Parse ``[[a, b], [c, d]]`` or ``[a, b]`` into nested lists of source strings."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval").body
    except SyntaxError as exc:
        raise ConfigurationError(f"cannot parse {what} = {text!r}: {exc.msg}") from None

    def walk(node):
        if isinstance(node, (ast.List, ast.Tuple)):
            return [walk(e) for e in node.elts]
        return ast.unparse(node)
    return walk(tree)


def _vector(text, d, what, variables):
    items = _split_literal(text, what)
    if d == 1 and not isinstance(items, list):
        items = [items]
    if not isinstance(items, list) or len(items) != d or any(isinstance(i, list) for i in items):
        raise ConfigurationError(f"{what} must be a list of {d} expressions, got {text!r}")
    return [Expression(s, variables) for s in items]


def _matrix(text, d, what, variables):
    items = _split_literal(text, what)
    if d == 1 and not isinstance(items, list):
        items = [[items]]
    if not (isinstance(items, list) and len(items) == d
            and all(isinstance(r, list) and len(r) == d for r in items)):
        raise ConfigurationError(f"{what} must be a {d}x{d} nested list, got {text!r}")
    return [[Expression(s, variables) for s in row] for row in items]


def _state_env(u, d):
    u = np.asarray(u, dtype=float)
    return {f"u{i + 1}": u[i] for i in range(d)}


def _matrix_field(exprs, d):
    def coeff(u):
        shape = np.shape(u)[1:]
        env = _state_env(u, d)
        return np.array([[np.broadcast_to(e(**env), shape) for e in row] for row in exprs], dtype=float)
    return coeff


def _flux_field(exprs, d):
    def G(u):
        shape = np.shape(u)[1:]
        env = _state_env(u, d)
        return np.array([np.broadcast_to(e(**env), shape) for e in exprs], dtype=float)
    return G


def _source_field(exprs, d):
    def gamma(u, x, t):
        shape = np.shape(u)[1:]
        env = _state_env(u, d)
        env.update(x=np.asarray(x, dtype=float), t=float(t))
        return np.array([np.broadcast_to(e(**env), shape) for e in exprs], dtype=float)
    return gamma


def _initial_field(exprs):
    def u0(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([np.broadcast_to(e(x=x), x.shape) for e in exprs], dtype=float)
    return u0


def _boundary_field(exprs):
    def g(t):
        return np.array([float(e(t=float(t))) for e in exprs])
    return g


def _uses_state(exprs):
    flat = [e for row in exprs for e in (row if isinstance(row, list) else [row])]
    return any(n.startswith("u") and n[1:].isdigit() for e in flat for n in e.names)


def problem_from_config(parser):
    """Build a :class:`Problem` from a parsed INI configuration."""
    if not parser.has_section("problem"):
        raise ConfigurationError("configuration needs a [problem] section")
    sec = parser["problem"]
    try:
        d = int(sec.get("d", "1"))
    except ValueError:
        raise ConfigurationError(f"d must be an integer, got {sec.get('d')!r}") from None
    if d < 1:
        raise ConfigurationError("d must be >= 1")
    states = [f"u{i + 1}" for i in range(d)]
    for key in ("A", "B", "G", "u0"):
        if key not in sec:
            raise ConfigurationError(f"[problem] is missing {key}")
    try:
        domain = tuple(float(v) for v in sec.get("domain", "-1, 1").split(","))
    except ValueError:
        raise ConfigurationError(f"domain must be two numbers, got {sec.get('domain')!r}") from None
    if len(domain) != 2:
        raise ConfigurationError("domain must be two numbers")
    A = _matrix(sec["A"], d, "A", states)
    B = _matrix(sec["B"], d, "B", states)
    G = _vector(sec["G"], d, "G", states)
    u0 = _vector(sec["u0"], d, "u0", ["x"])
    zero = "[" + ", ".join(["0"] * d) + "]"
    gamma = _vector(sec.get("gamma", zero), d, "gamma", states + ["x", "t"])
    gL = _vector(sec.get("gL", zero), d, "gL", ["t"])
    gR = _vector(sec.get("gR", zero), d, "gR", ["t"])
    constant_A = not _uses_state(A)
    linear = constant_A and not _uses_state(B) and all(
        _is_linear(e.text, states) for e in G)
    system = SystemDef(
        d=d,
        A=_matrix_field(A, d),
        B=_matrix_field(B, d),
        G=_flux_field(G, d),
        u0=_initial_field(u0),
        domain=domain,
        gamma=_source_field(gamma, d),
        gL=_boundary_field(gL),
        gR=_boundary_field(gR),
        constant_A=constant_A,
        linear=linear and not _uses_state(gamma),
        name=sec.get("name", "custom"),
    )
    return Problem(name=system.name, system=system, notes="user-defined")


def _is_linear(text, states):
    # Conservative test: the flux is linear if no state appears inside a call,
    # a power or a product/quotient with another state-dependent factor.
    tree = ast.parse(text.replace("^", "**"), mode="eval").body

    def dep(node):
        return any(isinstance(n, ast.Name) and n.id in states for n in ast.walk(node))

    def lin(node):
        if not dep(node):
            return True
        if isinstance(node, ast.Name):
            return True
        if isinstance(node, ast.UnaryOp):
            return lin(node.operand)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, (ast.Add, ast.Sub)):
                return lin(node.left) and lin(node.right)
            if isinstance(node.op, ast.Mult):
                return (lin(node.left) and not dep(node.right)) or (lin(node.right) and not dep(node.left))
            if isinstance(node.op, ast.Div):
                return lin(node.left) and not dep(node.right)
        return False
    return lin(tree)


def solver_settings(parser):
    """Optional [solver] values as a dict with typed entries."""
    if not parser.has_section("solver"):
        return {}
    sec = parser["solver"]
    out = {}
    casts = {"N": int, "dt": float, "T": float, "scheme": str, "fp_tol": float, "fp_max_iters": int}
    for key, cast in casts.items():
        if key in sec:
            try:
                out[key] = cast(sec[key])
            except ValueError:
                raise ConfigurationError(f"[solver] {key} = {sec[key]!r} is not a valid {cast.__name__}") from None
    return out


def load_config(path):
    """Read an INI file and return ``(problem, solver_settings)``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration {path}: {exc}") from None
    return problem_from_config(parser), solver_settings(parser)
