"""
Tests for the expression parser and evaluator.
"""

import numpy as np
import pytest

from errors import ExpressionDomainError, ExpressionSyntaxError, UnboundIdentifierError
from exprlang import (
    FUNCTIONS,
    BinaryOp,
    Negate,
    Power,
    UnivariateFunction,
    Variable,
    bind,
    eval_jet,
    evaluate,
    parse,
    parse_many,
    register_function,
    to_source,
)
from jets import Jet3


class TestParse:
    """Precedence, associativity and syntax errors."""

    def test_power_binds_tighter_than_plus(self):
        """'x^2 + y' parses as (x^2) + y."""
        tree = parse("x^2 + y")
        assert isinstance(tree, BinaryOp) and tree.op == "+"
        assert isinstance(tree.left, Power)
        assert tree.right == Variable("y")

    def test_unary_minus_below_power(self):
        """'-x^2' is -(x^2), not (-x)^2."""
        tree = parse("-x^2")
        assert isinstance(tree, Negate)
        assert isinstance(tree.operand, Power)
        assert evaluate(tree, {"x": 3.0}) == -9.0

    def test_left_associative_subtraction(self):
        """Subtraction and division associate to the left."""
        assert evaluate(parse("8 - 3 - 2"), {}) == 3.0
        assert evaluate(parse("8 / 4 / 2"), {}) == 1.0

    def test_whitespace_is_insignificant(self):
        """Spacing does not change the tree."""
        assert parse("x*y+ 2") == parse("  x * y +2 ")

    def test_space_inside_identifier_offset(self):
        """'2*d u' fails at byte offset 3."""
        with pytest.raises(ExpressionSyntaxError) as info:
            parse("2*d u")
        assert info.value.offset == 3

    def test_error_reports_expected_tokens(self):
        """A dangling operator lists what could have followed."""
        with pytest.raises(ExpressionSyntaxError) as info:
            parse("x +")
        assert "IDENT" in info.value.expected
        assert "NUMBER" in info.value.expected

    def test_empty_source(self):
        """Empty input is a syntax error at offset 0."""
        with pytest.raises(ExpressionSyntaxError, match="offset 0"):
            parse("   ")

    def test_non_constant_exponent_rejected(self):
        """Exponents must be constant integers or rationals."""
        with pytest.raises(ExpressionSyntaxError, match="Exponent"):
            parse("x^y")

    def test_rational_exponent(self):
        """A parenthesized rational exponent is accepted."""
        tree = parse("x^(1/2)")
        assert float(tree.exponent) == 0.5
        assert evaluate(tree, {"x": 4.0}) == 2.0

    def test_round_trip_is_fixed_point(self):
        """print(parse(print(e))) == print(e)."""
        for source in ["-x^2", "(x + y)*z", "x - (y - z)", "sin(x^2)/(1 + y)", "-(x + 1)^(-3)", "r^2*sin(th)^2"]:
            printed = to_source(parse(source))
            assert to_source(parse(printed)) == printed
            assert parse(printed) == parse(source)


class TestBind:
    """Binding to a coordinate list."""

    def test_unknown_identifier_named(self):
        """Unknown names are reported at bind time, not parse time."""
        tree = parse("x + w")
        with pytest.raises(UnboundIdentifierError, match="'w'"):
            bind(tree, ["x", "y"])

    def test_unknown_function_named(self):
        """abs is not in the function set."""
        with pytest.raises(UnboundIdentifierError, match="abs"):
            bind(parse("abs(x)"), ["x"])

    def test_vectorized_evaluation(self):
        """The same closure evaluates numpy columns."""
        compiled = bind(parse("x*y + 1"), ["x", "y"])
        result = compiled([np.array([1.0, 2.0]), np.array([3.0, 4.0])])
        np.testing.assert_array_equal(result, [4.0, 9.0])

    def test_parse_many(self):
        compiled = parse_many(["1", "t*x", "y^2"], ["t", "x", "y"])
        assert [c([2.0, 3.0, -1.0]) for c in compiled] == [1.0, 6.0, 1.0]

    def test_registered_function(self):
        """A registered function parses, binds and expands like the built-ins."""

        def sinh_rule(x, order):
            s, c = np.sinh(x), np.cosh(x)
            return [s, c, s, c][: order + 1]

        register_function(UnivariateFunction("sinh", np.sinh, sinh_rule))
        try:
            jet = eval_jet(parse("sinh(x)"), ["x"], [0.0])
            assert jet.value == 0.0
            assert jet.grad[0] == 1.0
            assert jet.third[0, 0, 0] == 1.0
        finally:
            FUNCTIONS.pop("sinh")


class TestEvalJet:
    """Taylor expansion of expressions."""

    def test_product(self):
        """x*y at (2, 3): value 6, gradient (3, 2), mixed second derivative 1."""
        jet = eval_jet(parse("x*y"), ["x", "y"], [2.0, 3.0])
        assert jet.value == 6.0
        np.testing.assert_array_equal(jet.grad, [3.0, 2.0])
        assert jet.hess[0, 1] == 1.0
        assert jet.hess[0, 0] == 0.0

    def test_exp_series(self):
        """Every derivative of exp(x) at 0 through order 3 equals 1."""
        jet = eval_jet(parse("exp(x)"), ["x"], [0.0])
        assert jet.value == 1.0
        assert jet.grad[0] == 1.0
        assert jet.hess[0, 0] == 1.0
        assert jet.third[0, 0, 0] == 1.0

    def test_sin_square_third_derivative(self):
        """Third derivative of sin(x^2) at 0.7 against the analytic value."""
        x = 0.7
        jet = eval_jet(parse("sin(x^2)"), ["x"], [x])
        analytic = -12.0 * x * np.sin(x * x) - 8.0 * x ** 3 * np.cos(x * x)
        assert jet.third[0, 0, 0] == pytest.approx(analytic, rel=1e-10)

    def test_sin_square_against_finite_differences(self):
        """Third derivative matches central differences of the analytic first derivative."""
        x, h = 0.7, 1e-3

        def first(s):
            return 2.0 * s * np.cos(s * s)

        def second_difference(step):
            return (first(x + step) - 2.0 * first(x) + first(x - step)) / step ** 2

        richardson = (4.0 * second_difference(h / 2) - second_difference(h)) / 3.0
        jet = eval_jet(parse("sin(x^2)"), ["x"], [x])
        assert jet.third[0, 0, 0] == pytest.approx(richardson, rel=1e-6)

    def test_zero_seeds_match_plain_evaluation_bitwise(self):
        """Order-0 jets reproduce plain evaluation to the last bit."""
        coordinates = ["r", "th"]
        for source in ["-(1 - r^2)", "r^2*sin(th)^2", "1/r^2 + exp(th)/3", "sqrt(r^2 + th^2) - r/th"]:
            compiled = bind(parse(source), coordinates)
            point = [0.731, 1.234]
            plain = compiled(point)
            jet = compiled(Jet3.seeds(point, order=0))
            assert float(jet.value) == float(plain)

    def test_cubic_polynomial_exact(self):
        """Integer-coefficient cubic: derivatives are bit-exact."""
        jet = eval_jet(parse("x^3 + 2*x*y^2 - 3*y"), ["x", "y"], [1.0, 2.0])
        assert jet.value == 1.0 + 8.0 - 6.0
        np.testing.assert_array_equal(jet.grad, [3.0 + 8.0, 8.0 - 3.0])
        np.testing.assert_array_equal(jet.hess, [[6.0, 8.0], [8.0, 4.0]])
        assert jet.third[0, 0, 0] == 6.0
        assert jet.third[0, 1, 1] == 4.0
        assert jet.third[1, 1, 1] == 0.0

    def test_log_domain_error_names_subexpression(self):
        """log of a non-positive value names the offending call."""
        compiled = bind(parse("1 + log(x - 2)"), ["x"])
        with pytest.raises(ExpressionDomainError, match="log"):
            compiled([1.0])

    def test_sqrt_of_negative(self):
        with pytest.raises(ExpressionDomainError, match="sqrt"):
            bind(parse("sqrt(x)"), ["x"])([-1.0])

    def test_division_by_zero(self):
        """Division by a zero value is a domain error on the division."""
        with pytest.raises(ExpressionDomainError, match="division by zero"):
            eval_jet(parse("1/(x - 1)"), ["x"], [1.0])
