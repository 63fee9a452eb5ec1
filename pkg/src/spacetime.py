"""
Charted Lorentzian manifolds: metric evaluation, Levi-Civita connection,
curvature, Killing and closedness residuals, and the pointwise identities
satisfied by Killing fields.

Curvature convention: R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z, stored as
``riemann[l, k, i, j]`` = component l of R(∂_i, ∂_j)∂_k. Ricci is the trace
Ric(X,Y) = tr(Z ↦ R(Z,X)Y), so constant curvature K gives Ric = (n−1)K g.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

try:
    from .errors import (
        DegeneratePlaneError,
        NotNullError,
        PreconditionError,
        ScenarioValidationError,
        SignatureError,
        SingularMetricError,
    )
    from .exprlang import CompiledExpr, bind, parse
    from .jets import Jet3, jet_einsum, jet_inv
    from .sampling import halton_points
except ImportError:
    from errors import (
        DegeneratePlaneError,
        NotNullError,
        PreconditionError,
        ScenarioValidationError,
        SignatureError,
        SingularMetricError,
    )
    from exprlang import CompiledExpr, bind, parse
    from jets import Jet3, jet_einsum, jet_inv
    from sampling import halton_points

logger = logging.getLogger(__name__)

DEGENERATE_PLANE_THRESHOLD = 1e-10
NULL_THRESHOLD = 1e-10
KILLING_THRESHOLD = 1e-8


class VectorField:
    """A vector field given by one expression per chart coordinate."""

    def __init__(self, sources: Sequence[str], coordinates: Sequence[str]):
        if len(sources) != len(coordinates):
            raise ValueError(f"Vector field needs {len(coordinates)} components, got {len(sources)}")
        self.sources = tuple(str(s) for s in sources)
        self.components: Tuple[CompiledExpr, ...] = tuple(bind(parse(s), coordinates) for s in self.sources)

    def at(self, values: Sequence) -> np.ndarray:
        return np.array([float(c(values)) for c in self.components])

    def jet(self, seeds: Sequence[Jet3]) -> Jet3:
        n, order = seeds[0].n, seeds[0].order
        parts = []
        for component in self.components:
            value = component(seeds)
            parts.append(value if isinstance(value, Jet3) else Jet3.constant(value, n, order))
        return Jet3.stack(parts)

    def __repr__(self) -> str:
        return f"VectorField({list(self.sources)!r})"


FieldLike = Union[VectorField, Jet3, np.ndarray, Sequence[float]]


@dataclass(frozen=True)
class CurvatureTensors:
    """Metric, connection and curvature arrays at one point, in chart components."""

    metric: np.ndarray
    inverse: np.ndarray
    christoffel: np.ndarray
    riemann: Optional[np.ndarray] = None
    ricci: Optional[np.ndarray] = None

    def inner(self, u, v) -> float:
        return float(np.einsum("i,ij,j->", u, self.metric, v))

    def apply(self, u, v, w) -> np.ndarray:
        """Components of R(u,v)w."""
        return np.einsum("lkij,i,j,k->l", self.riemann, u, v, w)

    def rm(self, u, v, w, z) -> float:
        """g(R(u,v)w, z)."""
        return float(np.einsum("l,lm,m->", self.apply(u, v, w), self.metric, z))

    def ricci_form(self, u, v) -> float:
        return float(np.einsum("a,ab,b->", u, self.ricci, v))

    @property
    def scalar(self) -> float:
        return float(np.einsum("ab,ab->", self.inverse, self.ricci))

    def plane_denominator(self, u, v) -> float:
        return self.inner(u, u) * self.inner(v, v) - self.inner(u, v) ** 2

    def sectional(self, u, v) -> float:
        denominator = self.plane_denominator(u, v)
        if abs(denominator) < DEGENERATE_PLANE_THRESHOLD:
            raise DegeneratePlaneError(f"Plane is degenerate (g(u,u)g(v,v) - g(u,v)^2 = {denominator:.3e})")
        return self.rm(u, v, v, u) / denominator

    def covariant(self, u, field: np.ndarray, derivative: np.ndarray) -> np.ndarray:
        """∇_u Z for a field with value ``field`` and gradient ``derivative[k, i] = ∂_i Z^k``."""
        return np.einsum("ki,i->k", derivative, u) + np.einsum("kim,i,m->k", self.christoffel, u, field)


def christoffel_from_metric(g: Jet3) -> Jet3:
    """Γ^k_ij (axes k, i, j) as a jet one order below the metric jet."""
    dg = g.diff()  # dg[a, b, c] = ∂_c g_ab
    ginv = jet_inv(g.truncate(dg.order))
    lowered = 0.5 * (jet_einsum("jli->lij", dg) + jet_einsum("ilj->lij", dg) - jet_einsum("ijl->lij", dg))
    return jet_einsum("kl,lij->kij", ginv, lowered)


def riemann_from_christoffel(gamma: Jet3) -> np.ndarray:
    """riemann[l, k, i, j] from a Christoffel jet of order >= 1."""
    d_gamma = gamma.diff().value  # d_gamma[l, i, j, m] = ∂_m Γ^l_ij
    g0 = gamma.value
    return (
        np.einsum("ljki->lkij", d_gamma)
        - np.einsum("likj->lkij", d_gamma)
        + np.einsum("lim,mjk->lkij", g0, g0)
        - np.einsum("ljm,mik->lkij", g0, g0)
    )


def curvature_from_metric(g: Jet3) -> CurvatureTensors:
    """Full curvature package from an order >= 2 metric jet."""
    gamma = christoffel_from_metric(g)
    riemann = riemann_from_christoffel(gamma)
    ricci = np.einsum("lbla->ab", riemann)
    return CurvatureTensors(
        metric=g.value,
        inverse=np.linalg.inv(g.value),
        christoffel=gamma.value,
        riemann=riemann,
        ricci=ricci,
    )


class ChartedSpacetime:
    """A Lorentzian metric given by expressions on one coordinate chart."""

    def __init__(
        self,
        coordinates: Sequence[str],
        metric: Sequence[Sequence[str]],
        bounds: Sequence[Tuple[float, float]],
        periods: Optional[Mapping[str, float]] = None,
        name: str = "spacetime",
    ):
        self.name = name
        self.coordinates = tuple(coordinates)
        self.n = len(self.coordinates)
        problems = []
        if not 3 <= self.n <= 6:
            problems.append(f"dimension: must be between 3 and 6, got {self.n}")
        if len(set(self.coordinates)) != self.n:
            problems.append("coordinates: names must be distinct")
        if len(bounds) != self.n:
            problems.append(f"bounds: expected {self.n} intervals, got {len(bounds)}")
        self.bounds = np.array([tuple(map(float, b)) for b in bounds], dtype=float).reshape(-1, 2)
        for name_, (lo, hi) in zip(self.coordinates, self.bounds):
            if not lo < hi:
                problems.append(f"bounds.{name_}: lower bound {lo} must be below upper bound {hi}")
        self.periods: Dict[int, float] = {}
        for name_, period in (periods or {}).items():
            if name_ not in self.coordinates:
                problems.append(f"periodic.{name_}: not a coordinate")
            elif not float(period) > 0:
                problems.append(f"periodic.{name_}: period must be positive, got {period}")
            else:
                self.periods[self.coordinates.index(name_)] = float(period)
        if problems:
            raise ScenarioValidationError(problems, name)
        self.metric_sources = self._full_matrix(metric)
        self._metric = [
            [bind(parse(self.metric_sources[i][j]), self.coordinates) for j in range(self.n)] for i in range(self.n)
        ]

    def _full_matrix(self, metric: Sequence[Sequence[str]]):
        rows = [list(map(str, row)) for row in metric]
        if len(rows) != self.n:
            raise ScenarioValidationError([f"metric: expected {self.n} rows, got {len(rows)}"], self.name)
        if all(len(row) == self.n - i for i, row in enumerate(rows)):
            full = [[None] * self.n for _ in range(self.n)]
            for i, row in enumerate(rows):
                for offset, source in enumerate(row):
                    full[i][i + offset] = full[i + offset][i] = source
            return full
        if all(len(row) == self.n for row in rows):
            return rows
        raise ScenarioValidationError(["metric: rows must form an upper triangle or a full matrix"], self.name)

    # ---------------------------------------------------------- chart maps

    @property
    def is_compact_quotient(self) -> bool:
        return len(self.periods) == self.n

    @property
    def has_constant_metric(self) -> bool:
        return all(not self._metric[i][j].expr.identifiers() for i in range(self.n) for j in range(i, self.n))

    def reduce(self, point: Sequence[float]) -> np.ndarray:
        """Wrap periodic coordinates into [0, period)."""
        point = np.array(point, dtype=float)
        for i, period in self.periods.items():
            point[..., i] = np.mod(point[..., i], period)
        return point

    def reduce_jets(self, seeds: Sequence[Jet3]) -> list:
        reduced = list(seeds)
        for i, period in self.periods.items():
            shift = period * np.floor(float(seeds[i].value) / period)
            if shift:
                reduced[i] = seeds[i] - shift
        return reduced

    def in_chart(self, point: Sequence[float], slack: float = 0.0) -> bool:
        point = np.asarray(point, dtype=float)
        for i, (lo, hi) in enumerate(self.bounds):
            if i in self.periods:
                continue
            if point[i] < lo - slack or point[i] > hi + slack:
                return False
        return True

    def seeds(self, point: Sequence[float], order: int = 2) -> list:
        return self.reduce_jets(Jet3.seeds(np.asarray(point, dtype=float), order))

    # ------------------------------------------------------------- metric

    def metric(self, point: Sequence[float]) -> np.ndarray:
        values = self.reduce(point)
        out = np.empty((self.n, self.n))
        for i in range(self.n):
            for j in range(i, self.n):
                out[i, j] = out[j, i] = float(self._metric[i][j](values))
        return out

    def metric_jet(self, point: Optional[Sequence[float]] = None, order: int = 2, seeds=None) -> Jet3:
        """Metric components as a (n, n) jet at a point, or over supplied seeds."""
        seeds = self.seeds(point, order) if seeds is None else self.reduce_jets(seeds)
        n_vars, jet_order = seeds[0].n, seeds[0].order
        entries = {}
        for i in range(self.n):
            for j in range(i, self.n):
                value = self._metric[i][j](seeds)
                if not isinstance(value, Jet3):
                    value = Jet3.constant(value, n_vars, jet_order)
                entries[i, j] = entries[j, i] = value
        return Jet3.array([[entries[i, j] for j in range(self.n)] for i in range(self.n)])

    def metric_grid(self, points: np.ndarray) -> np.ndarray:
        """Vectorized metric over an (N, n) array of points."""
        points = self.reduce(points)
        columns = [points[:, i] for i in range(self.n)]
        out = np.empty((len(points), self.n, self.n))
        for i in range(self.n):
            for j in range(i, self.n):
                out[:, i, j] = out[:, j, i] = np.broadcast_to(self._metric[i][j](columns), (len(points),))
        return out

    def inner(self, point, u, v) -> float:
        return float(np.einsum("i,ij,j->", u, self.metric(point), v))

    def field_jet(self, field: FieldLike, seeds: Sequence[Jet3]) -> Jet3:
        if isinstance(field, VectorField):
            return field.jet(self.reduce_jets(seeds))
        if isinstance(field, Jet3):
            return field
        return Jet3.constant(np.asarray(field, dtype=float), seeds[0].n, seeds[0].order)

    # ---------------------------------------------------------- validation

    def grid(self, per_axis: int = 8) -> np.ndarray:
        axes = []
        for i, (lo, hi) in enumerate(self.bounds):
            if i in self.periods:
                axes.append(np.linspace(0.0, self.periods[i], per_axis, endpoint=False))
            else:
                axes.append(np.linspace(lo, hi, per_axis))
        return np.array(list(itertools.product(*axes)))

    def check_signature(self, per_axis: int = 8) -> None:
        """Require one negative eigenvalue and no near-zero ones on a grid."""
        points = self.grid(per_axis)
        metrics = self.metric_grid(points)
        if not np.allclose(metrics, np.swapaxes(metrics, 1, 2)):
            raise SignatureError(f"Metric of '{self.name}' is not symmetric")
        eigenvalues = np.linalg.eigvalsh(metrics)
        scale = np.max(np.abs(eigenvalues), axis=1)
        singular = np.min(np.abs(eigenvalues), axis=1) < 1e-12 * np.maximum(scale, 1.0)
        if np.any(singular):
            bad = points[np.argmax(singular)]
            raise SingularMetricError(f"Metric of '{self.name}' is degenerate at {bad.tolist()}")
        negatives = np.sum(eigenvalues < 0.0, axis=1)
        if np.any(negatives != 1):
            bad = points[np.argmax(negatives != 1)]
            raise SignatureError(
                f"Metric of '{self.name}' does not have signature (-,+,...,+) at {bad.tolist()} "
                f"({int(negatives[np.argmax(negatives != 1)])} negative eigenvalues)"
            )
        logger.debug("Signature check passed for %s on %d points", self.name, len(points))

    def check_periodicity(self, per_axis: int = 4) -> None:
        points = self.grid(per_axis)
        columns = [points[:, i] for i in range(self.n)]
        problems = []
        for i, period in self.periods.items():
            shifted = list(columns)
            shifted[i] = columns[i] + period
            for a in range(self.n):
                for b in range(a, self.n):
                    base = np.broadcast_to(self._metric[a][b](columns), (len(points),))
                    moved = np.broadcast_to(self._metric[a][b](shifted), (len(points),))
                    if np.max(np.abs(base - moved)) > 1e-10 * max(1.0, float(np.max(np.abs(base)))):
                        problems.append(
                            f"periodic.{self.coordinates[i]}: metric component "
                            f"g[{self.coordinates[a]},{self.coordinates[b]}] is not invariant under the period shift"
                        )
        if problems:
            raise ScenarioValidationError(problems, self.name)

    def __repr__(self) -> str:
        return f"ChartedSpacetime({self.name!r}, coordinates={self.coordinates})"


# ----------------------------------------------------------------- operations


def christoffel(spacetime: ChartedSpacetime, point: Sequence[float]) -> CurvatureTensors:
    g = spacetime.metric_jet(point, order=1)
    gamma = christoffel_from_metric(g)
    return CurvatureTensors(metric=g.value, inverse=np.linalg.inv(g.value), christoffel=gamma.value)


def riemann(spacetime: ChartedSpacetime, point: Sequence[float]) -> CurvatureTensors:
    return curvature_from_metric(spacetime.metric_jet(point, order=2))


def sectional_curvature(spacetime: ChartedSpacetime, point, u, v) -> float:
    return riemann(spacetime, point).sectional(np.asarray(u, float), np.asarray(v, float))


def unnormalized_plane_curvature(spacetime: ChartedSpacetime, point, u, v) -> float:
    """g(R(u,v)v,u) without dividing by the plane's Gram determinant."""
    u, v = np.asarray(u, float), np.asarray(v, float)
    return riemann(spacetime, point).rm(u, v, v, u)


def null_sectional_curvature(spacetime: ChartedSpacetime, point, xi, x) -> float:
    xi, x = np.asarray(xi, float), np.asarray(x, float)
    tensors = riemann(spacetime, point)
    if abs(tensors.inner(xi, xi)) > NULL_THRESHOLD:
        raise NotNullError(f"g(xi, xi) = {tensors.inner(xi, xi):.3e} is not zero")
    norm = tensors.inner(x, x)
    if norm <= NULL_THRESHOLD:
        raise DegeneratePlaneError(f"x must be spacelike, g(x, x) = {norm:.3e}")
    if np.linalg.matrix_rank(np.vstack([xi, x]), tol=1e-12) < 2:
        raise DegeneratePlaneError("xi and x do not span a plane")
    return tensors.rm(x, xi, xi, x) / norm


def killing_residual(spacetime: ChartedSpacetime, point, field: FieldLike) -> np.ndarray:
    """(L_Z g)_ij = Z^k ∂_k g_ij + g_kj ∂_i Z^k + g_ik ∂_j Z^k."""
    seeds = spacetime.seeds(point, 1)
    g = spacetime.metric_jet(seeds=seeds)
    z = spacetime.field_jet(field, seeds)
    return (
        np.einsum("k,ijk->ij", z.value, g.grad)
        + np.einsum("kj,ki->ij", g.value, z.grad)
        + np.einsum("ik,kj->ij", g.value, z.grad)
    )


def closedness_residual(spacetime: ChartedSpacetime, point, field: FieldLike) -> np.ndarray:
    """dα for α = g(Z, ·); entry [i, j] = ∂_i α_j − ∂_j α_i."""
    seeds = spacetime.seeds(point, 1)
    g = spacetime.metric_jet(seeds=seeds)
    alpha = jet_einsum("ij,j->i", g, spacetime.field_jet(field, seeds))
    grad = alpha.grad  # grad[j, i] = ∂_i α_j
    return grad.T - grad


def _killing_data(spacetime: ChartedSpacetime, point, field: FieldLike):
    """Curvature, ζ with its gradient, and f = ½ g(ζ, ζ) to second order."""
    seeds = spacetime.seeds(point, 2)
    g = spacetime.metric_jet(seeds=seeds)
    zeta = spacetime.field_jet(field, seeds)
    f = 0.5 * jet_einsum("ij,i,j->", g, zeta, zeta)
    return curvature_from_metric(g), zeta, f


def hessian_identity_residual(
    spacetime: ChartedSpacetime, point, field: FieldLike, x, y, check_hypotheses: bool = True
) -> float:
    """Hess f(x,y) + g(R(x,ζ)ζ,y) − g(∇_xζ,∇_yζ) with f = ½ g(ζ,ζ)."""
    if check_hypotheses:
        residual = np.max(np.abs(killing_residual(spacetime, point, field)))
        if residual > KILLING_THRESHOLD:
            raise PreconditionError(f"Field is not Killing at {list(point)} (|L_Z g| = {residual:.3e})")
    x, y = np.asarray(x, float), np.asarray(y, float)
    tensors, zeta, f = _killing_data(spacetime, point, field)
    hessian = f.hess - np.einsum("kij,k->ij", tensors.christoffel, f.grad)
    nabla_x = tensors.covariant(x, zeta.value, zeta.grad)
    nabla_y = tensors.covariant(y, zeta.value, zeta.grad)
    return float(
        np.einsum("i,ij,j->", x, hessian, y)
        + tensors.rm(x, zeta.value, zeta.value, y)
        - tensors.inner(nabla_x, nabla_y)
    )


def killing_plane_identity(spacetime: ChartedSpacetime, point, zeta: FieldLike, xi: FieldLike) -> Dict[str, float]:
    """Both sides of ξ(ξ(f)) = K(ζ,ξ) + g(∇_ξζ,∇_ξζ) along a null field ξ with g(ξ,ζ) = 1.

    K(ζ,ξ) is normalized by the Gram determinant of span(ζ,ξ), which is −1 for
    such a pair; the unnormalized g(R(ξ,ζ)ζ,ξ) is reported alongside.
    """
    tensors, zeta_jet, f = _killing_data(spacetime, point, zeta)
    seeds = spacetime.seeds(point, 2)
    xi_jet = spacetime.field_jet(xi, seeds)
    if xi_jet.order < 1:
        raise PreconditionError("ξ must be supplied as a field with derivatives")
    xi0, dxi = xi_jet.value, xi_jet.grad
    lhs = float(np.einsum("i,j,ij->", xi0, xi0, f.hess) + np.einsum("i,ji,j->", xi0, dxi, f.grad))
    unnormalized = tensors.rm(xi0, zeta_jet.value, zeta_jet.value, xi0)
    denominator = tensors.plane_denominator(zeta_jet.value, xi0)
    plane_curvature = unnormalized / denominator
    nabla_xi_zeta = tensors.covariant(xi0, zeta_jet.value, zeta_jet.grad)
    rhs = plane_curvature + tensors.inner(nabla_xi_zeta, nabla_xi_zeta)
    geodesic = tensors.covariant(xi0, xi0, dxi)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "residual": lhs - rhs,
        "plane_curvature": plane_curvature,
        "unnormalized": unnormalized,
        "denominator": denominator,
        "xi_geodesic_defect": float(np.max(np.abs(geodesic))),
    }


def ncc_residual(spacetime: ChartedSpacetime, point, u) -> float:
    u = np.asarray(u, float)
    tensors = riemann(spacetime, point)
    if abs(tensors.inner(u, u)) > NULL_THRESHOLD * max(1.0, float(u @ u)):
        raise NotNullError(f"g(u, u) = {tensors.inner(u, u):.3e} is not zero")
    return tensors.ricci_form(u, u)


def null_vectors(metric: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Future-or-past null vectors e0 + Σ n_i e_i from unit spatial directions."""
    eigenvalues, vectors = np.linalg.eigh(metric)
    frame = vectors / np.sqrt(np.abs(eigenvalues))
    timelike, spatial = frame[:, 0], frame[:, 1:]
    directions = directions / np.linalg.norm(directions, axis=-1, keepdims=True)
    return timelike + directions @ spatial.T


def ncc_report(
    spacetime: ChartedSpacetime, samples: int = 100, seed: int = 42, directions: int = 8
) -> Dict[str, float]:
    """Minimum of Ric(u,u) over sampled points and null directions."""
    rng = np.random.default_rng(seed)
    points = halton_points(spacetime.bounds, samples, seed)
    minimum, where = np.inf, None
    for point in points:
        tensors = riemann(spacetime, point)
        for u in null_vectors(tensors.metric, rng.normal(size=(directions, spacetime.n - 1))):
            value = tensors.ricci_form(u, u) / float(u @ u)
            if value < minimum:
                minimum, where = value, point
    logger.debug("NCC minimum %.3e at %s", minimum, where)
    return {"min_ricci": float(minimum), "samples": int(samples * directions)}


def curvature_invariants(spacetime: ChartedSpacetime, point, rng: np.random.Generator, triples: int = 4) -> Dict[str, float]:
    """First Bianchi and antisymmetry residuals on random vector triples."""
    tensors = riemann(spacetime, point)
    bianchi = antisymmetry = pair = 0.0
    for _ in range(triples):
        x, y, z, w = rng.uniform(-1.0, 1.0, size=(4, spacetime.n))
        cyclic = tensors.apply(x, y, z) + tensors.apply(y, z, x) + tensors.apply(z, x, y)
        bianchi = max(bianchi, float(np.max(np.abs(cyclic))))
        antisymmetry = max(antisymmetry, abs(tensors.rm(x, y, z, w) + tensors.rm(y, x, z, w)))
        pair = max(pair, abs(tensors.rm(x, y, z, w) + tensors.rm(x, y, w, z)))
    return {"bianchi": bianchi, "antisymmetry": antisymmetry, "pair_antisymmetry": pair}
