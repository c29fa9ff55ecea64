"""Tests for the embedded feasibility solver and its audit."""

import numpy as np
import pytest

from lurecert import linalg
from lurecert.pencil import AffinePencil, VariableLayout, pencil_from_function
from lurecert.solver import (
    FEASIBLE,
    INFEASIBLE,
    UNDETERMINED,
    FeasibilityProblem,
    SolveOptions,
    StructuralError,
    audit,
    solve,
)

from helpers import grid_oracle, random_sym


def scalar_pencil(target):
    """F(p) = p - target as a 1x1 pencil in the scalar group P."""
    layout = VariableLayout([VariableLayout.sym("P", 1)])
    return pencil_from_function(
        layout, lambda v: v["P"] - target * np.eye(1))


class TestTrivialInstances:
    def test_scalar_feasible(self):
        # p <= 1 with p >= eps: any small positive p works
        prob = FeasibilityProblem(scalar_pencil(1.0), positivity=(("P", None),))
        res = solve(prob)
        assert res.status == FEASIBLE
        assert res.margin < 0
        p = res.witness["P"][0, 0]
        assert 0 < p < 1

    def test_scalar_infeasible(self):
        # p <= -1 conflicts with p >= eps > 0
        prob = FeasibilityProblem(scalar_pencil(-1.0), positivity=(("P", None),))
        res = solve(prob)
        assert res.status == INFEASIBLE

    def test_two_by_two_feasible(self):
        layout = VariableLayout([VariableLayout.sym("P", 2)])
        a = np.array([[-1.0, 0.3], [0.0, -2.0]])

        def blocks(v):
            return linalg.brack(v["P"] @ a)

        prob = FeasibilityProblem(pencil_from_function(layout, blocks),
                                  positivity=(("P", None),),
                                  trace_normalize=("P",))
        res = solve(prob)
        assert res.status == FEASIBLE
        assert np.trace(res.witness["P"]) == pytest.approx(2.0, abs=1e-8)
        assert linalg.is_pd(res.witness["P"], tol=0.0)[0]

    def test_unstable_direction_infeasible(self):
        layout = VariableLayout([VariableLayout.sym("P", 1)])
        a = np.array([[0.5]])

        def blocks(v):
            return linalg.brack(v["P"] @ a)

        prob = FeasibilityProblem(pencil_from_function(layout, blocks),
                                  positivity=(("P", None),),
                                  trace_normalize=("P",))
        res = solve(prob)
        assert res.status == INFEASIBLE


class TestContract:
    def test_determinism(self):
        prob = FeasibilityProblem(scalar_pencil(1.0), positivity=(("P", None),))
        r1 = solve(prob)
        r2 = solve(prob)
        assert r1.status == r2.status
        assert np.array_equal(r1.witness["P"], r2.witness["P"])
        assert r1.iterations == r2.iterations

    def test_feasible_always_passes_audit(self):
        prob = FeasibilityProblem(scalar_pencil(1.0), positivity=(("P", None),))
        res = solve(prob)
        report = audit(prob, res.witness, margin_min=SolveOptions().margin_min)
        assert report.satisfied

    def test_audit_rejects_tampered_witness(self):
        prob = FeasibilityProblem(scalar_pencil(1.0), positivity=(("P", None),))
        report = audit(prob, {"P": np.array([[5.0]])})
        assert not report.satisfied
        assert report.pencil_lambda_max == pytest.approx(4.0)

    def test_audit_enforces_positivity(self):
        prob = FeasibilityProblem(scalar_pencil(1.0), positivity=(("P", 0.5),))
        assert audit(prob, {"P": np.array([[0.6]])}).satisfied
        assert not audit(prob, {"P": np.array([[0.4]])}).satisfied

    def test_margin_min_respected(self):
        # feasible region is p in [eps, 1]; demanding margin 2 is impossible
        prob = FeasibilityProblem(scalar_pencil(1.0), positivity=(("P", None),))
        res = solve(prob, SolveOptions(margin_min=2.0, margin_stop=3.0))
        assert res.status != FEASIBLE


class TestStructure:
    def test_unknown_positivity_group(self):
        with pytest.raises(StructuralError):
            FeasibilityProblem(scalar_pencil(1.0), positivity=(("Q", None),))

    def test_positivity_requires_sym_group(self):
        layout = VariableLayout([("Z", "mat", (1, 2))])
        pencil = pencil_from_function(
            layout, lambda v: -np.eye(2) + v["Z"].T @ v["Z"] * 0.0)
        with pytest.raises(StructuralError):
            FeasibilityProblem(pencil, positivity=(("Z", None),))

    def test_bad_eps(self):
        prob = FeasibilityProblem(scalar_pencil(1.0))
        with pytest.raises(StructuralError):
            prob.eps_for("P", -1.0)

    def test_bad_box(self):
        with pytest.raises(StructuralError):
            FeasibilityProblem(scalar_pencil(1.0), box=0.0)


class TestGridOracleAgreement:
    """On 2-coordinate pencils the solver must agree with brute force."""

    def random_two_var_problem(self, rng):
        kind = rng.integers(0, 2)
        if kind == 0:
            layout = VariableLayout([VariableLayout.sym("P", 1),
                                     VariableLayout.sym("Q", 1)])
        else:
            layout = VariableLayout([("Z", "mat", (1, 2))])
        dim = int(rng.integers(1, 4))
        f0 = random_sym(rng, dim)
        g1 = random_sym(rng, dim)
        g2 = random_sym(rng, dim)

        def blocks(v):
            if kind == 0:
                a, b = v["P"][0, 0], v["Q"][0, 0]
            else:
                a, b = v["Z"][0, 0], v["Z"][0, 1]
            return f0 + a * g1 + b * g2

        pencil = pencil_from_function(layout, blocks)
        positivity = ()
        if kind == 0 and rng.random() < 0.5:
            positivity = (("P", None),)
        return FeasibilityProblem(pencil, positivity=positivity, box=2.0)

    def test_agreement(self):
        rng = np.random.default_rng(99)
        checked = 0
        for _ in range(40):
            prob = self.random_two_var_problem(rng)
            best = grid_oracle(prob, n=61)
            res = solve(prob)
            scale = max(1.0, float(np.abs(prob.pencil.F0).max()))
            if abs(best) < 1e-2 * scale:
                continue  # too close to the boundary for a grid verdict
            if best < 0:
                assert res.status == FEASIBLE
            else:
                assert res.status != FEASIBLE
            checked += 1
        assert checked >= 25


class TestFuzzNoFalseFeasible:
    def test_random_pencils_audit_clean(self):
        rng = np.random.default_rng(7)
        statuses = set()
        for _ in range(60):
            n = int(rng.integers(1, 3))
            dim = int(rng.integers(1, 5))
            layout = VariableLayout([VariableLayout.sym("X", n)])
            f0 = random_sym(rng, dim, scale=float(rng.uniform(0.1, 3.0)))
            coeffs = [random_sym(rng, dim) for _ in range(n * (n + 1) // 2)]

            def blocks(v, f0=f0, coeffs=coeffs, layout=layout):
                x = layout.pack(v)
                out = f0.copy()
                for c, m in zip(x, coeffs):
                    out = out + c * m
                return out

            pencil = pencil_from_function(layout, blocks)
            positivity = (("X", None),) if rng.random() < 0.5 else ()
            prob = FeasibilityProblem(pencil, positivity=positivity, box=10.0)
            res = solve(prob, SolveOptions(max_iter=200))
            statuses.add(res.status)
            if res.status == FEASIBLE:
                assert audit(prob, res.witness,
                             margin_min=SolveOptions().margin_min).satisfied
        assert FEASIBLE in statuses
