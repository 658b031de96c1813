"""Smoke tests for the _kurnet python module."""
import math

import _kurnet as k


def test_bound():
    r = k.cohesiveness_bound(2, [(1, 2)], [1.0], [0.5, -0.5])
    assert r["feasible"]
    assert abs(r["bound_sin"] - 0.5) < 1e-12
    assert abs(r["bound_angle"] - math.asin(0.5)) < 1e-12


def test_simulate():
    r = k.simulate(2, [(1, 2)], [1.0], [0.5, -0.5])
    assert r["synchronized"]
    assert abs(r["phi"] - math.asin(0.5)) < 1e-4
    assert r["states"].shape[1] == 2


def test_fixed_point():
    r = k.fixed_point(3, [(1, 2), (2, 3)], [1.0, 1.0], [0.4, 0.0, -0.4])
    assert r["found"] and r["stable"]
    assert r["residual"] < 1e-8
    assert abs(r["theta"][0]) < 1e-12  # grounded at node 1


def test_design_frequencies():
    r = k.design_frequencies(2, [(1, 2)], [1.0], math.pi / 6, 0.0,
                             [1.0, -1.0], [-5.0, -5.0], [5.0, 5.0])
    assert r["status"] == "optimal"
    assert abs(r["omega"][0] - 0.5) < 1e-4
    assert abs(r["cost"] - 1.0) < 1e-4


def test_design_weights():
    r = k.design_weights(2, [(1, 2)], math.pi / 6, [0.5, -0.5], [0.5, -0.5])
    assert r["status"] == "optimal"
    assert abs(r["w"][0] - 1.0) < 1e-3
    assert r["tightness"] <= 1e-4


def test_reweighted_l1():
    r = k.reweighted_l1(3, [(1, 2), (2, 3), (1, 3)], [0.4, 0.0, -0.4],
                        math.pi / 4)
    assert r["status"] == "optimal"
    assert r["final_feasible"]
    assert r["bound_sin_exact"] <= math.sin(math.pi / 4) + 1e-5


def main():
    tests = [v for n, v in sorted(globals().items()) if n.startswith("test_")]
    for t in tests:
        t()
        print(f"{t.__name__}: ok")
    print(f"{len(tests)} python smoke tests passed")


if __name__ == "__main__":
    main()
