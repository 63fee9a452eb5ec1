"""
Rigged structure of a null hypersurface L = {F = 0} with rigging ζ.

The frame (ξ, N, screen) is built once per point in jet arithmetic over the
ambient coordinates, so the same construction yields both the vectors at
the point and their derivatives, which every induced tensor consumes.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    from .charts import InducedChart
    from .errors import GramSchmidtBreakdown, NotNullError, PreconditionError, TangencyError, TransversalityError
    from .exprlang import CompiledExpr, bind, parse
    from .jets import Jet3, jet_einsum, jet_inv, jet_sqrt
    from .sampling import sample_hypersurface
    from .spacetime import ChartedSpacetime, CurvatureTensors, VectorField, christoffel_from_metric, curvature_from_metric
except ImportError:
    from charts import InducedChart
    from errors import GramSchmidtBreakdown, NotNullError, PreconditionError, TangencyError, TransversalityError
    from exprlang import CompiledExpr, bind, parse
    from jets import Jet3, jet_einsum, jet_inv, jet_sqrt
    from sampling import sample_hypersurface
    from spacetime import ChartedSpacetime, CurvatureTensors, VectorField, christoffel_from_metric, curvature_from_metric

logger = logging.getLogger(__name__)

NULL_TOLERANCE = 1e-8
TANGENCY_TOLERANCE = 1e-9
TRANSVERSALITY_THRESHOLD = 1e-10
TOTALLY_GEODESIC_THRESHOLD = 1e-7


class NullHypersurfaceScenario:
    """One (L, ζ) instance: level function, rigging, sampling box, graph coordinate."""

    def __init__(
        self,
        spacetime: ChartedSpacetime,
        level_function: str,
        rigging: Sequence[str],
        graph_coordinate: str,
        sampling_domain: Optional[Sequence[Tuple[float, float]]] = None,
        leaf_function: Optional[str] = None,
        name: str = "hypersurface",
    ):
        self.spacetime = spacetime
        self.name = name
        self.level_source = str(level_function)
        self.level_function: CompiledExpr = bind(parse(self.level_source), spacetime.coordinates)
        self.rigging = VectorField(rigging, spacetime.coordinates)
        self.graph_coordinate = spacetime.coordinates.index(graph_coordinate)
        self.sampling_domain = np.array(
            sampling_domain if sampling_domain is not None else spacetime.bounds, dtype=float
        ).reshape(-1, 2)
        self.leaf_source = leaf_function
        self.leaf_function: Optional[CompiledExpr] = (
            bind(parse(leaf_function), spacetime.coordinates) if leaf_function else None
        )
        self.chart = InducedChart(self)

    @property
    def n(self) -> int:
        return self.spacetime.n

    def project(self, point: Sequence[float]) -> np.ndarray:
        """Root-solve F = 0 along the graph coordinate."""
        return self.chart.solve(point)

    def check_point(self, point: Sequence[float]) -> Dict[str, float]:
        """Null and transversality invariants at a point of L."""
        seeds = self.spacetime.seeds(point, 1)
        g = self.spacetime.metric(point)
        df = self.level_function(seeds).grad
        grad_f = np.linalg.solve(g, df)
        norm = float(df @ grad_f)
        zeta = self.rigging.at(self.spacetime.reduce(point))
        pairing = float(df @ zeta)
        if not np.any(df):
            raise NotNullError(f"grad F vanishes at {np.round(point, 6).tolist()}")
        if abs(norm) > NULL_TOLERANCE * max(1.0, float(df @ df)):
            raise NotNullError(f"L is not null at {np.round(point, 6).tolist()}: g(grad F, grad F) = {norm:.3e}")
        if abs(pairing) < TRANSVERSALITY_THRESHOLD:
            raise TransversalityError(f"Rigging is tangent to L at {np.round(point, 6).tolist()}")
        return {"null": abs(norm), "pairing": pairing}

    def samples(self, count: int, seed: int) -> List[np.ndarray]:
        return sample_hypersurface(self, count, seed)

    def __repr__(self) -> str:
        return f"NullHypersurfaceScenario({self.name!r}, F={self.level_source!r}, zeta={list(self.rigging.sources)})"


@dataclass
class FrameJets:
    """Frame fields as ambient jets (order one below the seeds)."""

    metric: Jet3
    zeta: Jet3
    xi: Jet3
    null_rigging: Jet3
    screen: Jet3  # shape (q, n)
    alpha: Jet3
    df: Jet3
    pairing: Jet3


@dataclass
class RiggedFrame:
    """Rigged data at a point of L, with the ambient curvature package there."""

    point: np.ndarray
    xi: np.ndarray
    null_rigging: np.ndarray
    zeta: np.ndarray
    screen: np.ndarray  # rows e_a
    alpha: np.ndarray
    metric: np.ndarray
    tensors: CurvatureTensors
    jets: Optional[FrameJets] = field(default=None, repr=False)
    screen_indices: Tuple[int, ...] = ()

    @property
    def n(self) -> int:
        return len(self.point)

    @property
    def q(self) -> int:
        return len(self.screen)

    @property
    def tangent_basis(self) -> np.ndarray:
        """Rows (ξ, e_1, ..., e_q) spanning T_pL."""
        return np.vstack([self.xi, self.screen])

    @property
    def rigged_metric(self) -> np.ndarray:
        """g̃ = i*g + ω⊗ω on the tangent basis."""
        basis = self.tangent_basis
        omega = basis @ self.alpha
        return basis @ self.metric @ basis.T + np.outer(omega, omega)

    def g(self, u, v) -> float:
        return float(np.einsum("i,ij,j->", u, self.metric, v))

    def omega(self, u) -> float:
        return float(self.alpha @ u)

    def frame_coordinates(self, w) -> np.ndarray:
        """(ξ-coefficient, screen coefficients) of a tangent vector."""
        return np.concatenate([[self.g(w, self.null_rigging)], self.screen @ self.metric @ w])

    def transverse_component(self, w) -> float:
        """N-coefficient of an ambient vector; zero iff w is tangent to L."""
        return self.g(w, self.xi)

    def screen_projection(self, u) -> np.ndarray:
        """P(u) = u − ω(u)ξ."""
        return np.asarray(u, float) - self.omega(u) * self.xi

    def from_screen(self, coefficients) -> np.ndarray:
        return np.asarray(coefficients, float) @ self.screen


def _screen_order(n: int, graph: int) -> List[int]:
    return [k for k in range(n) if k != graph] + [graph]


def frame_jets(scenario: NullHypersurfaceScenario, seeds: Sequence[Jet3], indices: Optional[Sequence[int]] = None):
    """Frame fields over the given ambient seeds.

    Screen candidates are Π(∂_k − dF_k ζ / dF(ζ)) with Π(w) = w − g(ζ, w)ξ,
    orthonormalized by modified Gram–Schmidt. Which candidates are used is
    decided on values the first time (``indices`` None) and then reused.
    """
    spacetime = scenario.spacetime
    n = spacetime.n
    seeds = spacetime.reduce_jets(seeds)
    order = seeds[0].order - 1
    g_full = spacetime.metric_jet(seeds=seeds)
    df = scenario.level_function(seeds).diff()
    g = g_full.truncate(order)
    zeta = spacetime.field_jet(scenario.rigging, seeds).truncate(order)
    ginv = jet_inv(g)
    grad_f = jet_einsum("ij,j->i", ginv, df)
    pairing = jet_einsum("i,i->", df, zeta)
    if abs(float(pairing.value)) < TRANSVERSALITY_THRESHOLD:
        raise TransversalityError("Rigging is tangent to L at this point")
    xi = grad_f / pairing
    alpha = jet_einsum("ij,j->i", g, zeta)
    q_norm = jet_einsum("i,i->", alpha, zeta)
    null_rigging = zeta - 0.5 * q_norm * xi

    identity = np.eye(n)
    chosen: List[int] = []
    screen: List[Jet3] = []
    candidates = _screen_order(n, scenario.graph_coordinate) if indices is None else list(indices)
    scale = 1.0 + float(np.max(np.abs(g.value)))
    for k in candidates:
        w = Jet3.constant(identity[k], g.n, order) - (df[k] / pairing) * zeta
        v = w - jet_einsum("i,i->", alpha, w) * xi
        for e in screen:
            v = v - jet_einsum("ij,i,j->", g, v, e) * e
        norm = jet_einsum("ij,i,j->", g, v, v)
        norm_value = float(norm.value)
        if indices is None:
            if norm_value < -1e-10 * scale:
                raise GramSchmidtBreakdown(
                    f"Screen metric is not positive definite (g(e, e) = {norm_value:.3e}); is L null?"
                )
            if norm_value < 1e-8 * scale:
                continue
        elif norm_value <= 0.0:
            raise GramSchmidtBreakdown(f"Screen candidate {k} degenerated (g(e, e) = {norm_value:.3e})")
        screen.append(v / jet_sqrt(norm))
        chosen.append(k)
        if len(screen) == n - 2:
            break
    if len(screen) != n - 2:
        raise GramSchmidtBreakdown(f"Found {len(screen)} screen vectors, need {n - 2}")
    jets = FrameJets(
        metric=g_full,
        zeta=zeta,
        xi=xi,
        null_rigging=null_rigging,
        screen=Jet3.stack(screen),
        alpha=alpha,
        df=df,
        pairing=pairing,
    )
    return jets, tuple(chosen)


def build_frame(scenario: NullHypersurfaceScenario, point: Sequence[float], order: int = 3) -> RiggedFrame:
    """Rigged frame at a point of L.

    ``order`` is the jet order of the ambient seeds; the frame fields carry
    one order less (order 3 gives second derivatives of the frame).
    """
    point = np.asarray(point, dtype=float)
    spacetime = scenario.spacetime
    tangency = abs(float(scenario.level_function(spacetime.reduce(point))))
    if tangency > TANGENCY_TOLERANCE:
        raise TangencyError(f"Point is not on L (|F| = {tangency:.3e})")
    seeds = spacetime.seeds(point, max(order, 2))
    jets, indices = frame_jets(scenario, seeds)
    tensors = curvature_from_metric(jets.metric.truncate(2))
    return RiggedFrame(
        point=point,
        xi=jets.xi.value,
        null_rigging=jets.null_rigging.value,
        zeta=jets.zeta.value,
        screen=jets.screen.value,
        alpha=jets.alpha.value,
        metric=tensors.metric,
        tensors=tensors,
        jets=jets,
        screen_indices=indices,
    )


def frame_invariants(frame: RiggedFrame) -> Dict[str, float]:
    """Residuals of the algebraic identities the frame must satisfy."""
    g = frame.g
    xi, nr, zeta = frame.xi, frame.null_rigging, frame.zeta
    screen = frame.screen
    df = frame.jets.df.value if frame.jets is not None else None
    gram = screen @ frame.metric @ screen.T
    return {
        "g(xi,xi)": abs(g(xi, xi)),
        "g(xi,zeta)-1": abs(g(xi, zeta) - 1.0),
        "dF(xi)": abs(float(df @ xi)) / max(1.0, float(np.max(np.abs(df)))) if df is not None else 0.0,
        "g(N,N)": abs(g(nr, nr)),
        "g(N,xi)-1": abs(g(nr, xi) - 1.0),
        "g(N,e)": float(np.max(np.abs(screen @ frame.metric @ nr))),
        "g(xi,e)": float(np.max(np.abs(screen @ frame.metric @ xi))),
        "omega(xi)-1": abs(frame.omega(xi) - 1.0),
        "omega(e)": float(np.max(np.abs(screen @ frame.alpha))),
        "rigged_metric-identity": float(np.max(np.abs(frame.rigged_metric - np.eye(frame.n - 1)))),
        "screen_gram-identity": float(np.max(np.abs(gram - np.eye(frame.q)))),
    }


# ------------------------------------------------------------------ derivatives


def nabla(frame: RiggedFrame, u, field_jet: Jet3) -> np.ndarray:
    """∇_u Z at the frame point for a vector field given as an ambient jet."""
    return frame.tensors.covariant(np.asarray(u, float), field_jet.value, field_jet.grad)


def _require_tangent(frame: RiggedFrame, *vectors) -> None:
    for v in vectors:
        residual = abs(frame.transverse_component(v)) / max(1.0, float(np.max(np.abs(v))))
        if residual > TANGENCY_TOLERANCE:
            raise TangencyError(f"Vector {np.round(v, 6).tolist()} is not tangent to L (|dF(v)| = {residual:.3e})")


def _require_screen(frame: RiggedFrame, x) -> None:
    _require_tangent(frame, x)
    residual = abs(frame.omega(x)) / max(1.0, float(np.max(np.abs(x))))
    if residual > TANGENCY_TOLERANCE:
        raise TangencyError(f"Vector {np.round(x, 6).tolist()} is not in the screen (|ω(x)| = {residual:.3e})")


def _tangent_extension(frame: RiggedFrame, v) -> Jet3:
    """Ṽ = v − (dF(v)/dF(ζ)) ζ, tangent to every level set of F."""
    jets = frame.jets
    v = np.asarray(v, float)
    constant = Jet3.constant(v, jets.xi.n, jets.xi.order)
    return constant - (jet_einsum("i,i->", jets.df, v) / jets.pairing) * jets.zeta


def _screen_extension(frame: RiggedFrame, x) -> Jet3:
    """X̃ = Σ x^a e_a with x^a the screen coefficients at the point."""
    coefficients = frame.screen @ frame.metric @ np.asarray(x, float)
    return jet_einsum("a,ak->k", coefficients, frame.jets.screen)


def second_fundamental_B(frame: RiggedFrame, u, v, check: bool = True) -> float:
    """B(u, v) = −g(∇_u ξ, v)."""
    if check:
        _require_tangent(frame, u, v)
    return -frame.g(nabla(frame, u, frame.jets.xi), v)


def second_fundamental_B_extension(frame: RiggedFrame, u, v) -> float:
    """B(u, v) = g(∇_u Ṽ, ξ) through a tangent extension of v."""
    return frame.g(nabla(frame, u, _tangent_extension(frame, v)), frame.xi)


def screen_fundamental_C(frame: RiggedFrame, u, x, check: bool = True) -> float:
    """C(u, x) = g(∇_u X̃, N)."""
    if check:
        _require_tangent(frame, u)
        _require_screen(frame, x)
    return frame.g(nabla(frame, u, _screen_extension(frame, x)), frame.null_rigging)


def rotation_one_form_tau(frame: RiggedFrame, u) -> float:
    """τ(u) = g(∇_u ζ, ξ)."""
    return frame.g(nabla(frame, u, frame.jets.zeta), frame.xi)


def rotation_one_form_tau_alt(frame: RiggedFrame, u) -> float:
    """τ(u) = g(∇_u N, ξ)."""
    return frame.g(nabla(frame, u, frame.jets.null_rigging), frame.xi)


def shape_operator_star(frame: RiggedFrame, u) -> np.ndarray:
    """A*(u) = −τ(u)ξ − ∇_u ξ as an ambient vector."""
    return -rotation_one_form_tau(frame, u) * frame.xi - nabla(frame, u, frame.jets.xi)


def shape_operator(frame: RiggedFrame, u) -> np.ndarray:
    """A(u) = τ(u)N − ∇_u N as an ambient vector."""
    return rotation_one_form_tau(frame, u) * frame.null_rigging - nabla(frame, u, frame.jets.null_rigging)


def shape_operators(frame: RiggedFrame) -> Tuple[np.ndarray, np.ndarray]:
    """Matrices of A and A* on the tangent basis (ξ, e_a); column j is the image of basis vector j."""
    basis = frame.tangent_basis
    a = np.column_stack([frame.frame_coordinates(shape_operator(frame, u)) for u in basis])
    a_star = np.column_stack([frame.frame_coordinates(shape_operator_star(frame, u)) for u in basis])
    return a, a_star


def shape_consistency(frame: RiggedFrame) -> Dict[str, float]:
    """|g(A*(u), x) − B(u, x)|, the ξ-part and N-part of A*(u), and the N-part of A(u)."""
    basis = frame.tangent_basis
    consistency = in_screen = a_tangent = 0.0
    for u in basis:
        a_star = shape_operator_star(frame, u)
        for x in frame.screen:
            consistency = max(consistency, abs(frame.g(a_star, x) - second_fundamental_B(frame, u, x, check=False)))
        in_screen = max(in_screen, abs(frame.g(a_star, frame.null_rigging)), abs(frame.g(a_star, frame.xi)))
        a_tangent = max(a_tangent, abs(frame.g(shape_operator(frame, u), frame.xi)))
    return {"consistency": consistency, "in_screen": in_screen, "A_tangent": a_tangent}


def eq1_residual(frame: RiggedFrame, u, x) -> float:
    """C(u, x) + g(∇_u ζ, x) + ½ g(ζ, ζ) B(u, x)."""
    zeta = frame.zeta
    return (
        screen_fundamental_C(frame, u, x, check=False)
        + frame.g(nabla(frame, u, frame.jets.zeta), x)
        + 0.5 * frame.g(zeta, zeta) * second_fundamental_B(frame, u, x, check=False)
    )


def cbar(frame: RiggedFrame, u, v) -> float:
    """C̄(u, v) = C(Pu, Pv) − ω(u)τ(Pv) − ω(v)τ(Pu) − ω(u)ω(v)τ(ξ)."""
    pu, pv = frame.screen_projection(u), frame.screen_projection(v)
    wu, wv = frame.omega(u), frame.omega(v)
    return (
        screen_fundamental_C(frame, pu, pv, check=False)
        - wu * rotation_one_form_tau(frame, pv)
        - wv * rotation_one_form_tau(frame, pu)
        - wu * wv * rotation_one_form_tau(frame, frame.xi)
    )


def leaf_second_fundamental_form(frame: RiggedFrame, x, y) -> np.ndarray:
    """C(x, y)ξ + B(x, y)N for screen vectors x, y."""
    return screen_fundamental_C(frame, x, y) * frame.xi + second_fundamental_B(frame, x, y) * frame.null_rigging


def lie_bracket(frame: RiggedFrame, a: Jet3, b: Jet3) -> np.ndarray:
    """[A, B]^k = A^i ∂_i B^k − B^i ∂_i A^k at the frame point."""
    return np.einsum("i,ki->k", a.value, b.grad) - np.einsum("i,ki->k", b.value, a.grad)


def screen_integrability_residual(frame: RiggedFrame) -> float:
    """max |g̃([e_a, e_b], ξ)| = max |g(ζ, [e_a, e_b])| over screen pairs."""
    screen = frame.jets.screen
    worst = 0.0
    for a in range(frame.q):
        for b in range(a + 1, frame.q):
            bracket = lie_bracket(frame, screen[a], screen[b])
            worst = max(worst, abs(frame.omega(bracket)))
    return worst


def max_abs_b(frame: RiggedFrame) -> float:
    basis = frame.tangent_basis
    return max(abs(second_fundamental_B(frame, u, v, check=False)) for u in basis for v in basis)


def radical_degeneracy(frame: RiggedFrame) -> float:
    """max |B(ξ, ·)| on the tangent basis."""
    return max(abs(second_fundamental_B(frame, frame.xi, v, check=False)) for v in frame.tangent_basis)


def totally_geodesic_report(scenario: NullHypersurfaceScenario, samples: int = 100, seed: int = 42) -> Dict[str, float]:
    """max |B| over sampled points and tangent-basis pairs."""
    worst, where = 0.0, None
    points = scenario.samples(samples, seed)
    for point in points:
        value = max_abs_b(build_frame(scenario, point, order=2))
        if value > worst:
            worst, where = value, point
    logger.debug("max |B| on %s is %.3e at %s", scenario.name, worst, where)
    return {
        "max_abs_B": worst,
        "samples": len(points),
        "totally_geodesic": worst < TOTALLY_GEODESIC_THRESHOLD,
    }


def require_totally_geodesic(frame: RiggedFrame) -> None:
    value = max_abs_b(frame)
    if value > TOTALLY_GEODESIC_THRESHOLD:
        raise PreconditionError(f"L is not totally geodesic here (max |B| = {value:.3e})")


def radical_independence(first: NullHypersurfaceScenario, second: NullHypersurfaceScenario, point) -> float:
    """Relative second singular value of [ξ₁; ξ₂]; zero when the two radicals agree."""
    xi1 = build_frame(first, point, order=1).xi
    xi2 = build_frame(second, point, order=1).xi
    singular = np.linalg.svd(np.vstack([xi1, xi2]), compute_uv=False)
    return float(singular[1] / singular[0])
