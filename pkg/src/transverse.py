"""
Transverse geometry of the flow of ξ on (L, g̃).

Two independent sides are computed here. The chart side works in the
graph chart of L with the rigged metric g̃ = i*g + ω⊗ω (K̃, dω, Lie
derivatives). The frame side works with the screen frame and the ambient
connection (∇*, ∇^T, R^T, K^T, Ric^T).
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

try:
    from .errors import PreconditionError
    from .jets import Jet3, jet_einsum, jet_inv
    from .rigging import (
        TOTALLY_GEODESIC_THRESHOLD,
        NullHypersurfaceScenario,
        RiggedFrame,
        build_frame,
        lie_bracket,
        max_abs_b,
        second_fundamental_B,
    )
    from .spacetime import christoffel_from_metric, closedness_residual
except ImportError:
    from errors import PreconditionError
    from jets import Jet3, jet_einsum, jet_inv
    from rigging import (
        TOTALLY_GEODESIC_THRESHOLD,
        NullHypersurfaceScenario,
        RiggedFrame,
        build_frame,
        lie_bracket,
        max_abs_b,
        second_fundamental_B,
    )
    from spacetime import christoffel_from_metric, closedness_residual

logger = logging.getLogger(__name__)

CLOSED_THRESHOLD = 1e-8
CONSTANT_CURVATURE_THRESHOLD = 1e-5


# ------------------------------------------------------------------ helpers


def _frame(scenario: NullHypersurfaceScenario, point, frame: Optional[RiggedFrame]) -> RiggedFrame:
    return frame if frame is not None else build_frame(scenario, point)


def _require_totally_geodesic(frame: RiggedFrame) -> None:
    value = max_abs_b(frame)
    if value > TOTALLY_GEODESIC_THRESHOLD:
        raise PreconditionError(f"not totally geodesic (max |B| = {value:.3g})")


def is_closed(scenario: NullHypersurfaceScenario, point) -> bool:
    residual = closedness_residual(scenario.spacetime, point, scenario.rigging)
    return float(np.max(np.abs(residual))) < CLOSED_THRESHOLD


def _require_closed(scenario: NullHypersurfaceScenario, point) -> None:
    residual = float(np.max(np.abs(closedness_residual(scenario.spacetime, point, scenario.rigging))))
    if residual > CLOSED_THRESHOLD:
        raise PreconditionError(f"rigging is not closed (|dα| = {residual:.3g})")


@dataclass
class ChartData:
    """g̃, ω and the field ξ = g̃⁻¹ω in the graph chart of L, exact to first order."""

    metric: Jet3
    omega: Jet3
    xi: Jet3
    christoffel: np.ndarray

    def lie_derivative(self) -> np.ndarray:
        """(L_ξ g̃)_ab = ξ^c ∂_c g̃_ab + g̃_cb ∂_a ξ^c + g̃_ac ∂_b ξ^c."""
        g0, dg = self.metric.value, self.metric.grad
        xi0, dxi = self.xi.value, self.xi.grad  # dxi[c, a] = ∂_a ξ^c
        return np.einsum("c,abc->ab", xi0, dg) + np.einsum("cb,ca->ab", g0, dxi) + np.einsum("ac,cb->ab", g0, dxi)

    def nabla_xi(self) -> np.ndarray:
        """nabla[c, a] = (∇̃_a ξ)^c."""
        return self.xi.grad + np.einsum("cab,b->ca", self.christoffel, self.xi.value)

    def d_omega(self) -> np.ndarray:
        """d_omega[a, b] = ∂_a ω_b − ∂_b ω_a."""
        grad = self.omega.grad  # grad[b, a] = ∂_a ω_b
        return grad.T - grad


def chart_data(scenario: NullHypersurfaceScenario, point) -> ChartData:
    metric, omega = scenario.chart.pullback(point, order=1)
    xi = jet_einsum("ab,b->a", jet_inv(metric), omega)
    return ChartData(metric=metric, omega=omega, xi=xi, christoffel=christoffel_from_metric(metric).value)


def pullback_consistency(scenario: NullHypersurfaceScenario, point, frame: Optional[RiggedFrame] = None) -> float:
    """max |g̃_chart(T_i, T_j) − δ_ij| on the frame's tangent basis."""
    frame = _frame(scenario, point, frame)
    basis = np.array([scenario.chart.to_chart(v) for v in frame.tangent_basis])
    metric = scenario.chart.metric_jet(point, order=0).value
    return float(np.max(np.abs(basis @ metric @ basis.T - np.eye(len(basis)))))


# ------------------------------------------------------------ flow identities


def flow_residual(scenario: NullHypersurfaceScenario, point, x, y, frame: Optional[RiggedFrame] = None) -> float:
    """(L_ξ g̃)(x, y) + 2B(x, y)."""
    frame = _frame(scenario, point, frame)
    lie = chart_data(scenario, point).lie_derivative()
    xc, yc = scenario.chart.to_chart(x), scenario.chart.to_chart(y)
    return float(xc @ lie @ yc) + 2.0 * second_fundamental_B(frame, x, y)


def killing_xi_residual(
    scenario: NullHypersurfaceScenario, point, frame: Optional[RiggedFrame] = None, check_hypotheses: bool = True
) -> Dict[str, float]:
    """max |(L_ξ g̃)(u, v)| and max |∇̃ξ| over the tangent basis."""
    frame = _frame(scenario, point, frame)
    if check_hypotheses:
        _require_closed(scenario, point)
        _require_totally_geodesic(frame)
    data = chart_data(scenario, point)
    basis = np.array([scenario.chart.to_chart(v) for v in frame.tangent_basis])
    lie = basis @ data.lie_derivative() @ basis.T
    # frame coordinates of ∇̃_{T_i} ξ via g̃(·, T_j) (the basis is g̃-orthonormal)
    nabla = basis @ data.nabla_xi().T @ data.metric.value @ basis.T
    return {"killing": float(np.max(np.abs(lie))), "parallel": float(np.max(np.abs(nabla)))}


def domega_two_route(
    scenario: NullHypersurfaceScenario, point, x, y
) -> Tuple[float, float]:
    """dω(x, y) from ∂ω in the chart, and from g̃(∇̃_xξ, y) − g̃(∇̃_yξ, x)."""
    data = chart_data(scenario, point)
    xc, yc = scenario.chart.to_chart(x), scenario.chart.to_chart(y)
    exterior = float(xc @ data.d_omega() @ yc)
    nabla = data.nabla_xi()
    g0 = data.metric.value
    connection = float((nabla @ xc) @ g0 @ yc - (nabla @ yc) @ g0 @ xc)
    return exterior, connection


def domega(scenario: NullHypersurfaceScenario, point, x, y) -> float:
    return domega_two_route(scenario, point, x, y)[0]


def rigged_curvature(scenario: NullHypersurfaceScenario, point, x, y) -> float:
    """Sectional curvature K̃ of g̃ on span(x, y), computed in the graph chart."""
    return scenario.chart.sectional_curvature(point, x, y)


# -------------------------------------------------------------- frame side


def screen_connection_jet(frame: RiggedFrame) -> Jet3:
    """W[i, b, c] = g(∇_{∂_i} e_b, e_c) as a first-order jet over the ambient chart."""
    jets = frame.jets
    metric = jets.metric.truncate(2)
    gamma = christoffel_from_metric(metric)
    screen = jets.screen
    nabla_e = screen.diff() + jet_einsum("kim,bm->bki", gamma, screen)  # [b, k, i]
    return jet_einsum("bki,kl,cl->ibc", nabla_e, metric, screen)


def screen_connection(scenario: NullHypersurfaceScenario, point, frame: Optional[RiggedFrame] = None) -> np.ndarray:
    """∇* coefficients g(∇*_{T_t} e_b, e_c) with T = (ξ, e_1, ..., e_q)."""
    frame = _frame(scenario, point, frame)
    return np.einsum("ti,ibc->tbc", frame.tangent_basis, screen_connection_jet(frame).value)


def _screen_coefficients(frame: RiggedFrame, w) -> np.ndarray:
    return frame.screen @ frame.metric @ w


def transverse_connection(
    scenario: NullHypersurfaceScenario, point, frame: Optional[RiggedFrame] = None, check_hypotheses: bool = True
) -> Dict[str, object]:
    """∇^T from its two-case definition, and its largest difference from ∇*.

    Along ξ: π([ξ, e_b]). Along the screen: the Levi-Civita connection of
    g̃ through the Koszul formula for the g̃-orthonormal frame, with
    g̃(W, e_c) = g(W, e_c) for tangent W.
    """
    frame = _frame(scenario, point, frame)
    if check_hypotheses:
        _require_totally_geodesic(frame)
    q = frame.q
    screen = frame.jets.screen
    coefficients = np.zeros((q + 1, q, q))
    for b in range(q):
        coefficients[0, b] = _screen_coefficients(frame, lie_bracket(frame, frame.jets.xi, screen[b]))
    brackets = np.zeros((q, q, q))  # g̃([e_a, e_b], e_c)
    for a in range(q):
        for b in range(q):
            if a != b:
                brackets[a, b] = _screen_coefficients(frame, lie_bracket(frame, screen[a], screen[b]))
    for a in range(q):
        for b in range(q):
            for c in range(q):
                coefficients[a + 1, b, c] = 0.5 * (brackets[a, b, c] - brackets[b, c, a] + brackets[c, a, b])
    star = screen_connection(scenario, point, frame)
    return {
        "transverse": coefficients,
        "screen": star,
        "difference": float(np.max(np.abs(coefficients - star))) if q else 0.0,
    }


def connection_properties(frame: RiggedFrame) -> Dict[str, float]:
    """Metric compatibility and torsion of ∇* on the screen frame."""
    w = screen_connection_jet(frame).value
    star = np.einsum("ti,ibc->tbc", frame.tangent_basis, w)
    metric = float(np.max(np.abs(star + np.swapaxes(star, 1, 2)))) if frame.q else 0.0
    torsion = 0.0
    screen = frame.jets.screen
    for a in range(frame.q):
        for b in range(frame.q):
            bracket = _screen_coefficients(frame, lie_bracket(frame, screen[a], screen[b]))
            torsion = max(torsion, float(np.max(np.abs(star[a + 1, b] - star[b + 1, a] - bracket))))
    return {"metric": metric, "torsion": torsion}


def transverse_curvature_tensor(frame: RiggedFrame) -> np.ndarray:
    """rs[a, b, c, d] = g(R^T(e_a, e_b)e_c, e_d) from the curvature of W."""
    w = screen_connection_jet(frame)
    d_w = w.grad  # d_w[j, b, d, i] = ∂_i W[j, b, d]
    w0 = w.value
    ambient = (
        np.einsum("jbdi->ijbd", d_w)
        - np.einsum("ibdj->ijbd", d_w)
        + np.einsum("jbc,icd->ijbd", w0, w0)
        - np.einsum("ibc,jcd->ijbd", w0, w0)
    )
    e = frame.screen
    return np.einsum("ai,bj,ijcd->abcd", e, e, ambient)


def _gram(frame: RiggedFrame, x, y) -> float:
    xc, yc = _screen_coefficients(frame, x), _screen_coefficients(frame, y)
    return float((xc @ xc) * (yc @ yc) - (xc @ yc) ** 2)


def transverse_curvature_literal(frame: RiggedFrame, x, y) -> float:
    """K^T(x, y) = g(R^T(X, Y)Y, X) with R^T built from ∇^T applied to the fields X = Σx^a e_a, Y = Σy^b e_b."""
    w = screen_connection_jet(frame)
    screen = frame.jets.screen
    xc, yc = _screen_coefficients(frame, x), _screen_coefficients(frame, y)
    x_field = jet_einsum("a,ak->k", xc, screen)
    y_field = jet_einsum("a,ak->k", yc, screen)

    def covariant(direction: np.ndarray, coefficients: Jet3) -> np.ndarray:
        # screen coefficients of ∇*_direction (Σ z^b e_b)
        return coefficients.grad @ direction + np.einsum("b,i,ibd->d", coefficients.value, direction, w.value)

    yy = jet_einsum("i,b,ibc->c", y_field, yc, w)
    xy = jet_einsum("i,b,ibc->c", x_field, yc, w)
    first = covariant(x_field.value, yy)
    second = covariant(y_field.value, xy)
    bracket = lie_bracket(frame, x_field, y_field)
    along_xi = frame.g(bracket, frame.null_rigging)
    in_screen = _screen_coefficients(frame, bracket) @ frame.screen
    third = along_xi * _screen_coefficients(frame, lie_bracket(frame, frame.jets.xi, y_field)) + np.einsum(
        "b,i,ibd->d", yc, in_screen, w.value
    )
    return float((first - second - third) @ xc) / _gram(frame, x, y)


def transverse_curvature(
    scenario: NullHypersurfaceScenario, point, x, y, frame: Optional[RiggedFrame] = None, check_hypotheses: bool = True
) -> float:
    """K^T(x, y) from the tensor route, normalized by the plane's Gram determinant."""
    frame = _frame(scenario, point, frame)
    if check_hypotheses:
        _require_totally_geodesic(frame)
    rs = transverse_curvature_tensor(frame)
    xc, yc = _screen_coefficients(frame, x), _screen_coefficients(frame, y)
    return float(np.einsum("a,b,c,d,abcd->", xc, yc, yc, xc, rs)) / _gram(frame, x, y)


def curvat_identity_check(
    scenario: NullHypersurfaceScenario, point, x=None, y=None, frame: Optional[RiggedFrame] = None
) -> Dict[str, float]:
    """K^T − (K̃ + ¾dω²) and K^T − K for the screen plane span(x, y)."""
    frame = _frame(scenario, point, frame)
    if frame.q < 2:
        raise PreconditionError("screen has no 2-planes")
    x = frame.screen[0] if x is None else np.asarray(x, float)
    y = frame.screen[1] if y is None else np.asarray(y, float)
    k_t = transverse_curvature(scenario, point, x, y, frame)
    k_rigged = rigged_curvature(scenario, point, x, y)
    d = domega(scenario, point, x, y) / np.sqrt(_gram(frame, x, y))
    k_ambient = frame.tensors.sectional(x, y)
    return {
        "transverse": k_t,
        "rigged": k_rigged,
        "domega": d,
        "ambient": k_ambient,
        "residual_rigged": k_t - (k_rigged + 0.75 * d * d),
        "residual_ambient": k_t - k_ambient,
    }


def ricci_bound_quantity(frame: RiggedFrame, x, y=None) -> float:
    """Ric(x, y) − 2g(R(ξ, x)y, N); on the diagonal, the quantity bounded in the Ricci comparison."""
    y = x if y is None else y
    tensors = frame.tensors
    return tensors.ricci_form(x, y) - 2.0 * tensors.rm(frame.xi, x, y, frame.null_rigging)


@dataclass
class TransverseData:
    """Transverse geometry at one point, in the screen frame."""

    connection: np.ndarray
    domega: np.ndarray
    sectional: Dict[Tuple[int, int], float]
    ricci: np.ndarray
    rho: np.ndarray
    scalar: float
    bound_residual: Optional[float]

    @property
    def ricci_symmetry(self) -> float:
        return float(np.max(np.abs(self.ricci - self.ricci.T))) if self.ricci.size else 0.0

    @property
    def trace_residual(self) -> float:
        return abs(self.scalar - float(np.trace(self.rho)))


def transverse_ricci(
    scenario: NullHypersurfaceScenario, point, frame: Optional[RiggedFrame] = None, check_hypotheses: bool = True
) -> Tuple[np.ndarray, np.ndarray, float, Optional[float]]:
    """Ric^T, ρ^T, S^T, and the comparison with Ric(X,X) − 2g(R(ξ,X)X,N) (None unless ζ is closed)."""
    frame = _frame(scenario, point, frame)
    if check_hypotheses:
        _require_totally_geodesic(frame)
    rs = transverse_curvature_tensor(frame)
    ricci = np.einsum("abbd->ad", rs)
    rho = ricci.T
    scalar = float(np.einsum("aa->", ricci))
    bound = None
    if is_closed(scenario, point):
        q_matrix = np.array([[ricci_bound_quantity(frame, u, v) for v in frame.screen] for u in frame.screen])
        difference = ricci - q_matrix
        bound = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (difference + difference.T))))) if frame.q else 0.0
    return ricci, rho, scalar, bound


def transverse_data(scenario: NullHypersurfaceScenario, point, frame: Optional[RiggedFrame] = None) -> TransverseData:
    frame = _frame(scenario, point, frame)
    ricci, rho, scalar, bound = transverse_ricci(scenario, point, frame)
    rs = transverse_curvature_tensor(frame)
    q = frame.q
    data = chart_data(scenario, point)
    screen_chart = np.array([scenario.chart.to_chart(e) for e in frame.screen]).reshape(q, -1)
    sectional = {(a, b): float(rs[a, b, b, a]) for a in range(q) for b in range(a + 1, q)}
    return TransverseData(
        connection=screen_connection(scenario, point, frame),
        domega=screen_chart @ data.d_omega() @ screen_chart.T,
        sectional=sectional,
        ricci=ricci,
        rho=rho,
        scalar=scalar,
        bound_residual=bound,
    )


def classify_curvature(mean: float, spread: float, tolerance: float = CONSTANT_CURVATURE_THRESHOLD) -> str:
    if spread > tolerance:
        return "variable"
    if mean > tolerance:
        return "elliptic"
    if mean < -tolerance:
        return "hyperbolic"
    return "euclidean"


def flow_classification(
    scenario: NullHypersurfaceScenario, samples: int = 50, seed: int = 42, tolerance: float = CONSTANT_CURVATURE_THRESHOLD
) -> Dict[str, object]:
    """Classify the flow by its transverse curvature: elliptic, euclidean, hyperbolic or variable."""
    values = []
    for point in scenario.samples(samples, seed):
        frame = build_frame(scenario, point)
        _require_totally_geodesic(frame)
        rs = transverse_curvature_tensor(frame)
        values.extend(rs[a, b, b, a] for a in range(frame.q) for b in range(a + 1, frame.q))
    if not values:
        raise PreconditionError("screen has no 2-planes to classify")
    values = np.array(values)
    mean, spread = float(np.mean(values)), float(np.std(values))
    kind = classify_curvature(mean, spread, tolerance)
    logger.debug("Flow on %s is %s (K^T mean %.6g, std %.3g)", scenario.name, kind, mean, spread)
    return {"classification": kind, "mean": mean, "std": spread, "planes": len(values)}


def sample_planes(frame: RiggedFrame, rng: np.random.Generator, count: int = 1) -> Sequence[Tuple[np.ndarray, np.ndarray]]:
    """Random g̃-orthonormal screen pairs; the first is always (e_1, e_2)."""
    planes = [(frame.screen[0], frame.screen[1])]
    for _ in range(count - 1):
        coefficients, _ = np.linalg.qr(rng.normal(size=(frame.q, 2)))
        planes.append((coefficients[:, 0] @ frame.screen, coefficients[:, 1] @ frame.screen))
    return planes
