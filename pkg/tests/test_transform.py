import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from claimpi.errors import (
    ArityError,
    EvaluationDomainError,
    ExprSyntaxError,
    UnknownIdentifierError,
    VariableIndexError,
)
from claimpi.transform import (
    BinOp,
    Call,
    Neg,
    Num,
    Var,
    check_nonnegative_on,
    evaluate,
    evaluate_rows,
    parse,
    to_source,
)

# (source, arity, hand-written equivalent)
CORPUS = [
    ("t1", 1, lambda t: t[0]),
    ("t1^2+3*t1", 1, lambda t: t[0] ** 2 + 3 * t[0]),
    ("log(1+t1)", 1, lambda t: math.log(1 + t[0])),
    ("t1+0.5*t2", 2, lambda t: t[0] + 0.5 * t[1]),
    ("(t1^3+t2)/2", 2, lambda t: (t[0] ** 3 + t[1]) / 2),
    ("log(1+t1+t2)", 2, lambda t: math.log(1 + t[0] + t[1])),
    ("1+t1+t2+t3", 3, lambda t: 1 + t[0] + t[1] + t[2]),
    ("(t1^2+t2^2+t3^2)/2", 3, lambda t: (t[0] ** 2 + t[1] ** 2 + t[2] ** 2) / 2),
    ("log(2+t1+t2+t3)", 3, lambda t: math.log(2 + t[0] + t[1] + t[2])),
    ("log(1+t1+t2+t3+t4+t5)", 5, lambda t: math.log(1 + sum(t))),
]


class TestParse:
    def test_realdata_transform(self):
        expr = parse("log(1+t1+t2+t3+t4+t5)", 5)
        terms = Num(1.0)
        for i in range(5):
            terms = BinOp("+", terms, Var(i))
        assert expr.root == Call("log", (terms,))

    def test_polynomial(self):
        expr = parse("t1^2+3*t1", 1)
        assert expr.root == BinOp("+", BinOp("^", Var(0), Num(2.0)), BinOp("*", Num(3.0), Var(0)))

    def test_variable_out_of_range(self):
        with pytest.raises(VariableIndexError):
            parse("t3", 2)

    def test_t0_out_of_range(self):
        with pytest.raises(VariableIndexError):
            parse("t0", 2)

    @pytest.mark.parametrize(
        "source,offset",
        [("3t1", 1), ("1 +", 3), ("(t1", 3), ("t1 $ 2", 3), ("2 3", 2), ("log t1", 4)],
    )
    def test_syntax_errors_report_offset(self, source, offset):
        with pytest.raises(ExprSyntaxError) as info:
            parse(source, 1)
        assert info.value.offset == offset

    def test_empty(self):
        with pytest.raises(ExprSyntaxError):
            parse("   ", 1)

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError):
            parse("sqrt(t1)", 1)

    @pytest.mark.parametrize("source", ["log(t1, t1)", "exp()", "min(t1)"])
    def test_function_arity(self, source):
        with pytest.raises((ArityError, ExprSyntaxError)):
            parse(source, 1)

    def test_precedence_and_associativity(self):
        point = [2.0]
        assert evaluate(parse("-t1^2", 1), point) == -4
        assert evaluate(parse("2^3^2", 0), []) == 512
        assert evaluate(parse("8/4/2", 0), []) == 1
        assert evaluate(parse("10-4-3", 0), []) == 3
        assert evaluate(parse("2*3+4*5", 0), []) == 26
        assert evaluate(parse("2^-1", 0), []) == 0.5
        assert evaluate(parse("min(3, t1, 5) + max(t1, 7)", 1), point) == 9

    def test_named_extras(self):
        expr = parse("t1 + eps", 1, names=("eps",))
        assert expr.width == 2
        assert evaluate(expr, [1.5, 0.25]) == 1.75

    def test_exponent_literals(self):
        assert evaluate(parse("1.5e2 + .5 + 2.", 0), []) == 152.5


class TestEvaluate:
    def test_identity(self):
        assert evaluate(parse("t1", 1), [2.5]) == 2.5

    def test_hand_evaluation(self):
        assert evaluate(parse("(t1^3+t2)/2", 2), [2, 4]) == 6.0

    @pytest.mark.parametrize(
        "source,point",
        [("log(1+t1)", [-1]), ("log(t1)", [-3]), ("1/t1", [0]), ("t1^-1", [0]), ("t1^0.5", [-4]), ("exp(t1)", [1e4])],
    )
    def test_domain_errors(self, source, point):
        with pytest.raises(EvaluationDomainError):
            evaluate(parse(source, 1), point)
        with pytest.raises(EvaluationDomainError) as info:
            evaluate_rows(parse(source, 1), np.array([[1.0], point]))
        assert info.value.row == 1

    def test_wrong_point_length(self):
        with pytest.raises(ArityError):
            evaluate(parse("t1+t2", 2), [1.0])

    @pytest.mark.parametrize("source,arity,oracle", CORPUS)
    def test_corpus_matches_hand_evaluation(self, source, arity, oracle):
        rng = np.random.default_rng(len(source))
        expr = parse(source, arity)
        points = rng.uniform(0, 10, size=(10, arity))
        vector = evaluate_rows(expr, points)
        for point, v in zip(points, vector):
            expected = oracle(list(point))
            assert abs(evaluate(expr, point) - expected) <= 1e-12 * max(1, abs(expected))
            assert abs(v - expected) <= 1e-12 * max(1, abs(expected))

    def test_constant_broadcasts_over_rows(self):
        assert np.array_equal(evaluate_rows(parse("0", 3), np.ones((4, 3))), np.zeros(4))


class TestNonnegativeCheck:
    def test_gamma_features(self):
        rng = np.random.default_rng(0)
        report = check_nonnegative_on(parse("t1", 1), rng.gamma(5, 0.25, size=(200, 1)))
        assert report.nonneg_on_data and report.min_value_on_data > 0

    def test_example3_linear(self):
        rows = np.array([[0.0, 0.0, -1.0], [1.2, 3.0, 0.0], [0.3, 0.1, -1.0]])
        report = check_nonnegative_on(parse("1+t1+t2+t3", 3), rows)
        assert report.nonneg_on_data and report.min_value_on_data == 0.0

    def test_violation(self):
        report = check_nonnegative_on(parse("t1-10", 1), np.linspace(0, 5, 11).reshape(-1, 1))
        assert not report.nonneg_on_data and report.min_value_on_data < 0

    def test_propagates_row(self):
        with pytest.raises(EvaluationDomainError) as info:
            check_nonnegative_on(parse("log(t1)", 1), np.array([[1.0], [2.0], [0.0]]))
        assert info.value.row == 2


def _ast(arity):
    leaves = st.one_of(
        st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(Num),
        st.integers(0, arity - 1).map(Var),
    )

    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: BinOp(*t)),
            children.map(lambda c: Call("log", (c,))),
            children.map(lambda c: Call("exp", (c,))),
            st.lists(children, min_size=2, max_size=3).map(lambda cs: Call("max", tuple(cs))),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@given(_ast(3))
def test_print_parse_round_trip(tree):
    text = to_source(tree, 3)
    assert parse(text, 3).root == tree
