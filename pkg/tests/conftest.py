import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from apnverify.equation import HomogeneousEquation  # noqa: E402
from apnverify.groups import INTEGERS, CyclicGroup  # noqa: E402
from apnverify.net import Transition  # noqa: E402
from apnverify.poly import Polynomial, PVector  # noqa: E402
from apnverify.terms import App, Signature, Var  # noqa: E402

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MODELS = os.path.join(ROOT, "models")

PLACES = ("A", "B", "C", "D", "E")
SIG = Signature((("f", 1), ("g", 1), ("c", 0)))
c = App("c")
Z7 = CyclicGroup(7)


def f(a):
    return App("f", [a])


def g(a):
    return App("g", [a])


def vec(entries, group=INTEGERS, places=PLACES):
    return PVector(places, {p: Polynomial.monomial(t, a, group) for p, (t, a) in entries.items()}, group)


def marking(places=PLACES, **entries):
    return PVector(places, {p: Polynomial(INTEGERS, d) for p, d in entries.items()})


def build_e1():
    x = Var("x")
    return HomogeneousEquation("E1", vec({"A": (f(x), 4), "B": (g(x), 3), "C": (f(g(x)), -5), "D": (x, -1)}))


def build_e2():
    return HomogeneousEquation("E2", vec({"A": (c, 3), "D": (Var("x"), 2)}, Z7))


def build_t():
    W, Y, Z = Var("W"), Var("Y"), Var("Z")
    return Transition("t", vec({"A": (g(W), 1), "B": (f(Y), 1), "C": (W, 1), "D": (Z, 2)}), vec({"E": (f(W), 1)}))


M1 = marking(B={c: 1}, D={g(c): 3})
M2 = marking(B={f(c): 2}, D={g(f(c)): 6})
M3 = marking(A={g(c): 5}, C={c: 4})
M4 = marking(A={g(c): 2}, D={c: 4})
M5 = M1 + M2 + M3
SIGMA1 = {"W": c, "Y": c, "Z": g(c)}


@pytest.fixture
def e1():
    return build_e1()


@pytest.fixture
def e2():
    return build_e2()


@pytest.fixture
def t():
    return build_t()


@pytest.fixture(scope="session")
def e1_spanning():
    from apnverify.stability import spanning_set

    return spanning_set(build_e1())


@pytest.fixture
def model_path():
    return os.path.join(MODELS, "example1.apn")


@pytest.fixture
def minsky_path():
    return os.path.join(MODELS, "minsky.apn")
