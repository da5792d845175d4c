"""Rectangular grids, sampled fields and central-difference Hessians."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DomainError


@dataclass(frozen=True)
class GridSpec:
    """Tensor-product grid on ``[lo_1, hi_1] x ... x [lo_d, hi_d]``.

    Node ordering is row-major with axis 0 the slowest index; interior nodes are
    those with every index in ``[1, res - 2]``.
    """

    dim: int
    lo: tuple
    hi: tuple
    res: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.broadcast_to(self.lo, (self.dim,)))
        hi = tuple(float(v) for v in np.broadcast_to(self.hi, (self.dim,)))
        res = tuple(int(v) for v in np.broadcast_to(self.res, (self.dim,)))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "res", res)
        if self.dim not in (1, 2, 3):
            raise DomainError(f"grid dimension must be 1, 2 or 3, got {self.dim}")
        if any(r < 5 for r in res):
            raise DomainError(f"need at least 5 nodes per axis, got {res}")
        if any(h <= l for l, h in zip(lo, hi)):
            raise DomainError("grid needs hi > lo on every axis")

    @classmethod
    def square(cls, dim=2, lo=0.0, hi=1.0, res=33):
        return cls(dim, (lo,) * dim, (hi,) * dim, (res,) * dim)

    @property
    def spacing(self):
        return tuple((h - l) / (r - 1) for l, h, r in zip(self.lo, self.hi, self.res))

    @property
    def shape(self):
        return self.res

    @property
    def interior_shape(self):
        return tuple(r - 2 for r in self.res)

    @property
    def interior(self):
        return (slice(1, -1),) * self.dim

    def axes(self):
        return [np.linspace(l, h, r) for l, h, r in zip(self.lo, self.hi, self.res)]

    def coords(self):
        """Coordinate arrays of shape ``res``, one per axis (``ij`` indexing)."""
        return self._coords

    @cached_property
    def _coords(self):
        xs = np.meshgrid(*self.axes(), indexing="ij")
        for x in xs:
            x.setflags(write=False)
        return xs

    def boundary_mask(self):
        mask = np.ones(self.res, dtype=bool)
        mask[self.interior] = False
        return mask

    def boundary_adjacent_mask(self):
        """Interior nodes with at least one boundary neighbour along an axis."""
        mask = np.zeros(self.res, dtype=bool)
        inner = np.zeros(self.interior_shape, dtype=bool)
        for axis in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[axis] = 0
            inner[tuple(idx)] = True
            idx[axis] = -1
            inner[tuple(idx)] = True
        mask[self.interior] = inner
        return mask

    def sample(self, func, t=None):
        """Evaluate ``func(*coords)`` or ``func(*coords, t)`` on every node."""
        xs = self.coords()
        vals = func(*xs) if t is None else func(*xs, t)
        return ScalarField(self, np.broadcast_to(np.asarray(vals, dtype=float), self.res).copy())

    def node_coords(self, index):
        return tuple(l + i * h for l, i, h in zip(self.lo, index, self.spacing))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.size != int(np.prod(self.grid.res)):
            raise DomainError(
                f"field has {values.size} values, grid needs {int(np.prod(self.grid.res))}"
            )
        values = values.reshape(self.grid.res)
        if not np.all(np.isfinite(values)):
            raise DomainError("field has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def interior(self):
        return self.values[self.grid.interior]

    def with_values(self, values):
        return ScalarField(self.grid, values)

    def __add__(self, other):
        other = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, ScalarField) else other
        return ScalarField(self.grid, self.values - other)

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def __mul__(self, scalar):
        return ScalarField(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class HessianField:
    """Per-interior-node Hessians, array of shape ``interior_shape + (dim, dim)``."""

    grid: GridSpec
    values: np.ndarray


def hessian_values(u, grid):
    """Central-difference Hessian of a raw node array, interior nodes only.

    Diagonal entries use the three-point stencil, mixed entries the four-point
    cross stencil; both are exact on quadratics.
    """
    d = grid.dim
    h = grid.spacing
    inner = tuple(r - 2 for r in grid.res)
    H = np.empty(inner + (d, d))

    def shifted(offsets):
        idx = tuple(slice(1 + o, r - 1 + o) for o, r in zip(offsets, grid.res))
        return u[idx]

    center = shifted((0,) * d)
    for a in range(d):
        e = [0] * d
        e[a] = 1
        plus = shifted(tuple(e))
        e[a] = -1
        minus = shifted(tuple(e))
        H[..., a, a] = (plus - 2.0 * center + minus) / h[a] ** 2
        for b in range(a + 1, d):
            corners = 0.0
            for sa, sb, sign in ((1, 1, 1.0), (-1, -1, 1.0), (1, -1, -1.0), (-1, 1, -1.0)):
                off = [0] * d
                off[a], off[b] = sa, sb
                corners = corners + sign * shifted(tuple(off))
            val = corners / (4.0 * h[a] * h[b])
            H[..., a, b] = val
            H[..., b, a] = val
    return H


def hessian_central(u):
    """Discrete Hessian of a :class:`ScalarField` on its interior nodes."""
    return HessianField(u.grid, hessian_values(u.values, u.grid))


def _same_grid(u, v):
    if u.grid != v.grid:
        raise DomainError("fields live on different grids")


def sup_norm(u, v):
    """``max |u - v|`` over all nodes."""
    _same_grid(u, v)
    return float(np.max(np.abs(u.values - v.values)))


def oscillation(u):
    values = u.values if isinstance(u, ScalarField) else np.asarray(u)
    return float(values.max() - values.min())


def format_float(x):
    """Fixed 17-significant-digit text used by every file writer."""
    return f"{float(x):.17g}"


def dump_field(u, path):
    """Write ``u`` in the plain-text field dump format."""
    g = u.grid
    header = [str(g.dim)] + [str(r) for r in g.res]
    header += [format_float(v) for v in g.lo] + [format_float(v) for v in g.hi]
    with open(path, "w") as fh:
        fh.write(" ".join(header) + "\n")
        for v in u.values.ravel(order="C"):
            fh.write(format_float(v) + "\n")


def load_field(path):
    with open(path) as fh:
        tokens = fh.readline().split()
        if not tokens:
            raise DomainError(f"{path}: empty field dump")
        dim = int(tokens[0])
        if len(tokens) != 1 + 3 * dim:
            raise DomainError(f"{path}: malformed header")
        res = tuple(int(v) for v in tokens[1 : 1 + dim])
        lo = tuple(float(v) for v in tokens[1 + dim : 1 + 2 * dim])
        hi = tuple(float(v) for v in tokens[1 + 2 * dim :])
        values = np.loadtxt(fh, dtype=float, ndmin=1)
    return ScalarField(GridSpec(dim, lo, hi, res), values)
