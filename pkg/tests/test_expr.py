from __future__ import annotations

import math

import numpy as np
import pytest

from varexp.errors import DomainError, ParseError, UnboundVariableError, UnknownIdentifierError
from varexp.expr import parse, sample


def test_precedence_and_associativity() -> None:
    assert parse("2 + 0.5*x").evaluate({"x": 0.4}) == pytest.approx(2.2)
    assert parse("-2^2").evaluate({}) == -4.0
    assert parse("2^3^2").evaluate({}) == 512.0
    assert parse("(1 + 2) * 3 - 4 / 2").evaluate({}) == 7.0


def test_functions_and_constants() -> None:
    assert parse("sin(pi*x)").evaluate({"x": 0.5}) == pytest.approx(1.0)
    assert parse("log(e)").evaluate({}) == pytest.approx(1.0)
    assert parse("min(x, 0.3, 2)").evaluate({"x": 0.7}) == pytest.approx(0.3)
    assert parse("max(x, t)").evaluate({"x": 1.0, "t": 4.0}) == 4.0
    assert parse("sqrt(abs(-9))").evaluate({}) == 3.0


def test_vectorised_evaluation() -> None:
    x = np.linspace(0.0, 1.0, 11)
    values = parse("x*(1-x)").evaluate({"x": x})
    np.testing.assert_allclose(values, x * (1 - x))


def test_unknown_identifier_reports_position() -> None:
    with pytest.raises(UnknownIdentifierError) as exc:
        parse("2 + y")
    assert exc.value.position == 4
    assert exc.value.name == "y"


def test_unknown_function_rejected() -> None:
    with pytest.raises(UnknownIdentifierError):
        parse("tan(x)")


@pytest.mark.parametrize("src", ["", "2 +", "(x", "x)", "sin()", "min(x)", "2 ** 3", "3 $ 4"])
def test_malformed_text(src: str) -> None:
    with pytest.raises(ParseError):
        parse(src)


def test_variables_restricted_by_allowed_set() -> None:
    with pytest.raises(UnknownIdentifierError):
        parse("x + t", ("x",))
    assert parse("x + t").variables == frozenset({"x", "t"})
    assert parse("1 + pi").variables == frozenset()
    assert not parse("1 + x").depends_on("t")


def test_unbound_variable() -> None:
    with pytest.raises(UnboundVariableError) as exc:
        parse("x + t").evaluate({"x": 1.0})
    assert exc.value.missing == ["t"]


@pytest.mark.parametrize(
    ("src", "bindings"),
    [
        ("log(x)", {"x": 0.0}),
        ("sqrt(x)", {"x": -1.0}),
        ("1 / x", {"x": 0.0}),
        ("x^0.5", {"x": -2.0}),
        ("x^(-1)", {"x": 0.0}),
    ],
)
def test_domain_errors(src: str, bindings: dict[str, float]) -> None:
    with pytest.raises(DomainError):
        parse(src).evaluate(bindings)


def test_negative_base_integer_power_is_fine() -> None:
    assert parse("x^3").evaluate({"x": -2.0}) == -8.0


def test_pretty_print_reparses_equivalently() -> None:
    rng = np.random.default_rng(3)
    x = rng.uniform(0.1, 0.9, 50)
    for src in ["2 + 0.5*x", "-x^2 + sin(pi*x)/3", "max(x, 1 - x)^1.5", "exp(-x) * (1 + x)"]:
        expr = parse(src)
        again = parse(str(expr))
        np.testing.assert_allclose(again.evaluate({"x": x}), expr.evaluate({"x": x}), rtol=1e-15)


def test_sample_broadcasts_constants() -> None:
    x = np.linspace(0.0, 1.0, 5)
    out = sample(parse("3"), x)
    assert out.shape == x.shape
    assert np.all(out == 3.0)
    out[0] = -1.0
    assert sample(parse("3"), x)[0] == 3.0


def test_sample_with_time() -> None:
    x = np.array([0.0, 0.5])
    np.testing.assert_allclose(sample(parse("x + t"), x, t=2.0), [2.0, 2.5])
    assert math.isclose(parse("t").evaluate({"t": 1.5}), 1.5)
