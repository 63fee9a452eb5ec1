"""
Multivariate truncated Taylor arithmetic ("jets") to total order 3.

A Jet3 holds the value and the partial derivatives of a (possibly
tensor-valued) quantity at a point, in n variables:

    coeffs[0]  shape S             value
    coeffs[1]  shape S + (n,)      first partials
    coeffs[2]  shape S + (n, n)    second partials (symmetric)
    coeffs[3]  shape S + (n, n, n) third partials (symmetric)

Derivative axes always trail the tensor axes. ``order`` is the highest
order through which the coefficients are exact; differentiating a jet
consumes one order, and combining jets keeps the lowest order involved.
"""

import math
from itertools import combinations_with_replacement
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

try:
    from .errors import ExpressionDomainError, JetDimensionError, SingularMetricError
except ImportError:
    from errors import ExpressionDomainError, JetDimensionError, SingularMetricError

MAX_ORDER = 3

# Univariate rule: (value array, order) -> [f, f', f'', f'''][:order + 1]
UnivariateRule = Callable[[np.ndarray, int], List[np.ndarray]]

Number = Union[int, float, np.floating, np.ndarray]


def _expand(array: np.ndarray, k: int) -> np.ndarray:
    """Append k singleton axes so a tensor broadcasts against derivative blocks."""
    return np.reshape(array, np.shape(array) + (1,) * k)


def _product(a_spec: str, b_spec: str, out_spec: str, ac, bc, order: int) -> List[np.ndarray]:
    """Leibniz rule through order 3 for a bilinear einsum product."""

    def term(i, li, j, lj, lo):
        return np.einsum(f"{a_spec}{li},{b_spec}{lj}->{out_spec}{lo}", ac[i], bc[j])

    out = [term(0, "", 0, "", "")]
    if order >= 1:
        out.append(term(1, "P", 0, "", "P") + term(0, "", 1, "P", "P"))
    if order >= 2:
        out.append(
            term(2, "PQ", 0, "", "PQ")
            + term(0, "", 2, "PQ", "PQ")
            + term(1, "P", 1, "Q", "PQ")
            + term(1, "Q", 1, "P", "PQ")
        )
    if order >= 3:
        out.append(
            term(3, "PQR", 0, "", "PQR")
            + term(0, "", 3, "PQR", "PQR")
            + term(2, "PQ", 1, "R", "PQR")
            + term(2, "PR", 1, "Q", "PQR")
            + term(2, "QR", 1, "P", "PQR")
            + term(1, "P", 2, "QR", "PQR")
            + term(1, "Q", 2, "PR", "PQR")
            + term(1, "R", 2, "PQ", "PQR")
        )
    return out


class Jet3:
    """Truncated Taylor expansion (order <= 3) of a scalar or tensor at a point."""

    __slots__ = ("n", "order", "coeffs")
    __array_ufunc__ = None  # numpy defers binary operators to Jet3

    def __init__(self, coeffs: Sequence[np.ndarray], n: int, order: int = None):
        coeffs = tuple(np.asarray(c, dtype=float) for c in coeffs)
        if order is None:
            order = len(coeffs) - 1
        if order < 0 or order > MAX_ORDER or len(coeffs) < order + 1:
            raise ValueError(f"Jet3 needs {order + 1} coefficient blocks, got {len(coeffs)}")
        shape = coeffs[0].shape
        for k in range(1, order + 1):
            if coeffs[k].shape != shape + (n,) * k:
                raise JetDimensionError(
                    f"Coefficient block {k} has shape {coeffs[k].shape}, expected {shape + (n,) * k}"
                )
        self.n = n
        self.order = order
        self.coeffs = coeffs[: order + 1]

    # ----------------------------------------------------------------- builders

    @classmethod
    def constant(cls, value: Number, n: int, order: int = MAX_ORDER) -> "Jet3":
        value = np.asarray(value, dtype=float)
        return cls([np.zeros(value.shape + (n,) * k) if k else value for k in range(order + 1)], n, order)

    @classmethod
    def variable(cls, value: float, index: int, n: int, order: int = MAX_ORDER) -> "Jet3":
        """Seed for the coordinate function x_index at the given value."""
        coeffs = [np.asarray(float(value))]
        if order >= 1:
            grad = np.zeros(n)
            grad[index] = 1.0
            coeffs.append(grad)
        coeffs.extend(np.zeros((n,) * k) for k in range(2, order + 1))
        return cls(coeffs, n, order)

    @classmethod
    def seeds(cls, point: Sequence[float], order: int = MAX_ORDER) -> List["Jet3"]:
        n = len(point)
        return [cls.variable(x, i, n, order) for i, x in enumerate(point)]

    @classmethod
    def stack(cls, jets: Sequence["Jet3"]) -> "Jet3":
        """Stack equally shaped jets along a new leading axis."""
        if not jets:
            raise ValueError("Cannot stack an empty sequence of jets")
        n = jets[0].n
        if any(j.n != n for j in jets):
            raise JetDimensionError("Cannot stack jets over different variable counts")
        order = min(j.order for j in jets)
        return cls([np.stack([j.coeffs[k] for j in jets]) for k in range(order + 1)], n, order)

    @classmethod
    def array(cls, nested) -> "Jet3":
        """Build a tensor jet from nested lists of scalar jets."""
        if isinstance(nested, Jet3):
            return nested
        return cls.stack([cls.array(item) for item in nested])

    # --------------------------------------------------------------- accessors

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.coeffs[0].shape

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def grad(self) -> np.ndarray:
        return self._block(1)

    @property
    def hess(self) -> np.ndarray:
        return self._block(2)

    @property
    def third(self) -> np.ndarray:
        return self._block(3)

    def _block(self, k: int) -> np.ndarray:
        if k > self.order:
            raise ValueError(f"Jet is only exact through order {self.order}; order {k} requested")
        return self.coeffs[k]

    def taylor_coefficient(self, multi_index: Sequence[int]) -> np.ndarray:
        """Coefficient of x^alpha in the Taylor polynomial (derivative / alpha!)."""
        if len(multi_index) != self.n:
            raise JetDimensionError(f"Multi-index {tuple(multi_index)} does not match n={self.n}")
        k = sum(multi_index)
        indices = tuple(i for i, m in enumerate(multi_index) for _ in range(m))
        derivative = self._block(k)[(Ellipsis,) + indices]
        return derivative / math.prod(math.factorial(m) for m in multi_index)

    def coefficients(self) -> Dict[Tuple[int, ...], np.ndarray]:
        """All Taylor coefficients keyed by multi-index, each stored once."""
        table = {}
        for k in range(self.order + 1):
            for combo in combinations_with_replacement(range(self.n), k):
                alpha = tuple(combo.count(i) for i in range(self.n))
                table[alpha] = self.taylor_coefficient(alpha)
        return table

    def truncate(self, order: int) -> "Jet3":
        return Jet3(self.coeffs[: order + 1], self.n, min(order, self.order))

    # ------------------------------------------------------------- structure

    def __getitem__(self, index) -> "Jet3":
        if not isinstance(index, tuple):
            index = (index,)
        return Jet3([c[index] for c in self.coeffs], self.n, self.order)

    def transpose(self, axes: Sequence[int]) -> "Jet3":
        """Permute tensor axes; derivative axes stay trailing."""
        ndim = len(self.shape)
        return Jet3(
            [np.transpose(c, tuple(axes) + tuple(range(ndim, ndim + k))) for k, c in enumerate(self.coeffs)],
            self.n,
            self.order,
        )

    def diff(self) -> "Jet3":
        """Jet of the gradient: a new trailing tensor axis indexes the variable."""
        if self.order == 0:
            raise ValueError("Cannot differentiate an order-0 jet")
        return Jet3(self.coeffs[1:], self.n, self.order - 1)

    # ------------------------------------------------------------- arithmetic

    def _coerce(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            if other.n != self.n:
                raise JetDimensionError(f"Jet dimension mismatch: {self.n} vs {other.n}")
            return other
        return None

    def __add__(self, other) -> "Jet3":
        jet = self._coerce(other)
        if jet is None:
            other = np.asarray(other, dtype=float)
            coeffs = [self.coeffs[0] + other] + [
                c + np.zeros(_expand(other, k).shape) for k, c in enumerate(self.coeffs) if k
            ]
            return Jet3(coeffs, self.n, self.order)
        order = min(self.order, jet.order)
        return Jet3([self.coeffs[k] + jet.coeffs[k] for k in range(order + 1)], self.n, order)

    __radd__ = __add__

    def __neg__(self) -> "Jet3":
        return Jet3([-c for c in self.coeffs], self.n, self.order)

    def __sub__(self, other) -> "Jet3":
        return self + (-other)

    def __rsub__(self, other) -> "Jet3":
        return (-self) + other

    def __mul__(self, other) -> "Jet3":
        jet = self._coerce(other)
        if jet is None:
            other = np.asarray(other, dtype=float)
            return Jet3([c * _expand(other, k) for k, c in enumerate(self.coeffs)], self.n, self.order)
        order = min(self.order, jet.order)
        return Jet3(_product("...", "...", "...", self.coeffs, jet.coeffs, order), self.n, order)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet3":
        jet = self._coerce(other)
        if jet is None:
            other = np.asarray(other, dtype=float)
            if np.any(other == 0.0):
                raise ExpressionDomainError("jet division by zero")
            return Jet3([c / _expand(other, k) for k, c in enumerate(self.coeffs)], self.n, self.order)
        # value block is a true quotient so plain and jet evaluation agree bitwise
        return _with_value(self * reciprocal(jet), self.value / jet.value)

    def __rtruediv__(self, other) -> "Jet3":
        return _with_value(reciprocal(self) * other, np.asarray(other, dtype=float) / self.value)

    def __pow__(self, exponent) -> "Jet3":
        if isinstance(exponent, (int, np.integer)):
            return integer_power(self, int(exponent))
        return jet_compose(power_rule(float(exponent)), self)

    def __repr__(self) -> str:
        return f"Jet3(n={self.n}, order={self.order}, shape={self.shape}, value={self.value!r})"


def _with_value(jet: Jet3, value: np.ndarray) -> Jet3:
    return Jet3((np.asarray(value, dtype=float) + np.zeros(jet.shape),) + jet.coeffs[1:], jet.n, jet.order)


# ------------------------------------------------------------------- rules


def reciprocal_rule(x: np.ndarray, order: int) -> List[np.ndarray]:
    if np.any(x == 0.0):
        raise ExpressionDomainError("reciprocal of a zero value")
    r = 1.0 / x
    return [r, -r * r, 2.0 * r ** 3, -6.0 * r ** 4][: order + 1]


def power_rule(p: float) -> UnivariateRule:
    """x ** p for a non-integer exponent; needs x > 0."""

    def rule(x: np.ndarray, order: int) -> List[np.ndarray]:
        if np.any(x <= 0.0):
            raise ExpressionDomainError(f"non-integer power {p} of a non-positive value")
        return [
            np.power(x, p),
            p * np.power(x, p - 1.0),
            p * (p - 1.0) * np.power(x, p - 2.0),
            p * (p - 1.0) * (p - 2.0) * np.power(x, p - 3.0),
        ][: order + 1]

    return rule


def reciprocal(a: Jet3) -> Jet3:
    return jet_compose(reciprocal_rule, a)


def integer_power(base, k: int):
    """Left-to-right repeated multiplication, shared by float and jet evaluation."""
    if k < 0:
        return 1.0 / integer_power(base, -k)
    if k == 0:
        return base * 0.0 + 1.0
    result = base
    for _ in range(k - 1):
        result = result * base
    return result


# --------------------------------------------------------------- operations


def jet_add(a: Jet3, b) -> Jet3:
    return a + b


def jet_mul(a: Jet3, b) -> Jet3:
    return a * b


def jet_div(a: Jet3, b) -> Jet3:
    return a / b


def jet_pow_int(a: Jet3, k: int) -> Jet3:
    return integer_power(a, k)


def jet_compose(rule: UnivariateRule, a: Jet3) -> Jet3:
    """Faa di Bruno composition f(a) through order 3, elementwise over tensors."""
    c = a.coeffs
    d = [np.asarray(v, dtype=float) for v in rule(a.value, a.order)]
    out = [d[0] + np.zeros(a.shape)]
    if a.order >= 1:
        out.append(np.einsum("...,...P->...P", d[1], c[1]))
    if a.order >= 2:
        out.append(
            np.einsum("...,...P,...Q->...PQ", d[2], c[1], c[1]) + np.einsum("...,...PQ->...PQ", d[1], c[2])
        )
    if a.order >= 3:
        out.append(
            np.einsum("...,...P,...Q,...R->...PQR", d[3], c[1], c[1], c[1])
            + np.einsum("...,...PQ,...R->...PQR", d[2], c[2], c[1])
            + np.einsum("...,...PR,...Q->...PQR", d[2], c[2], c[1])
            + np.einsum("...,...QR,...P->...PQR", d[2], c[2], c[1])
            + np.einsum("...,...PQR->...PQR", d[1], c[3])
        )
    return Jet3(out, a.n, a.order)


def jet_sqrt(a: Jet3) -> Jet3:
    def rule(x, order):
        if np.any(x <= 0.0):
            raise ExpressionDomainError("square root of a non-positive value")
        r = np.sqrt(x)
        return [r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)][: order + 1]

    return jet_compose(rule, a)


def _split(subscripts: str) -> Tuple[List[str], str]:
    inputs, output = subscripts.replace(" ", "").split("->")
    return inputs.split(","), output


def jet_einsum(subscripts: str, *operands) -> Jet3:
    """einsum over jets (and plain arrays) with the Leibniz rule.

    Subscripts must be explicit lowercase letters; operands are folded
    pairwise from the left.
    """
    specs, output = _split(subscripts)
    if len(specs) != len(operands):
        raise ValueError("einsum subscripts do not match operand count")
    if any(ch.isupper() for ch in subscripts):
        raise ValueError("uppercase subscripts are reserved for derivative axes")
    spec, acc = specs[0], operands[0]
    for i in range(1, len(operands)):
        rest = "".join(specs[i + 1:]) + output
        joined = spec + specs[i]
        keep = "".join(ch for ch in dict.fromkeys(joined) if ch in rest)
        acc = _einsum_pair(spec, specs[i], keep, acc, operands[i])
        spec = keep
    if spec != output:
        acc = _einsum_pair(spec, "", output, acc, 1.0)
    return acc


def _einsum_pair(sa: str, sb: str, so: str, a, b) -> Jet3:
    a_jet, b_jet = isinstance(a, Jet3), isinstance(b, Jet3)
    if a_jet and b_jet:
        if a.n != b.n:
            raise JetDimensionError(f"Jet dimension mismatch: {a.n} vs {b.n}")
        order = min(a.order, b.order)
        return Jet3(_product(sa, sb, so, a.coeffs, b.coeffs, order), a.n, order)
    if a_jet:
        b = np.asarray(b, dtype=float)
        letters = "PQR"
        return Jet3(
            [np.einsum(f"{sa}{letters[:k]},{sb}->{so}{letters[:k]}", c, b) for k, c in enumerate(a.coeffs)],
            a.n,
            a.order,
        )
    if b_jet:
        return _einsum_pair(sb, sa, so, b, a)
    raise TypeError("jet_einsum needs at least one Jet3 operand")


def jet_inv(m: Jet3) -> Jet3:
    """Inverse of a square-matrix jet via the truncated Neumann series."""
    m0 = m.value
    try:
        w0 = np.linalg.inv(m0)
    except np.linalg.LinAlgError as exc:
        raise SingularMetricError("matrix is singular at the expansion point") from exc
    if not np.all(np.isfinite(w0)) or np.linalg.cond(m0) > 1e12:
        raise SingularMetricError(f"matrix is numerically singular (cond={np.linalg.cond(m0):.3e})")
    inverse = Jet3.constant(w0, m.n, m.order)
    if m.order == 0:
        return inverse
    perturbation = Jet3([np.zeros_like(m0)] + list(m.coeffs[1:]), m.n, m.order)
    q = -jet_einsum("ij,jk->ik", w0, perturbation)
    term = Jet3.constant(w0, m.n, m.order)
    for _ in range(m.order):
        term = jet_einsum("ij,jk->ik", q, term)
        inverse = inverse + term
    return inverse
