import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from assouadlab.errors import ParameterError
from assouadlab.harness import (
    BoundReport,
    SuiteContext,
    beta_intermediate,
    predict_qr_bound,
    predict_spectrum_bound,
    reports_to_csv,
    reports_to_json,
    run_suite,
)


def test_qr_bound_identity_at_k_one():
    for a in np.linspace(0.01, 1.99, 25):
        assert predict_qr_bound(float(a), 1.0) == pytest.approx(float(a), abs=0)


def test_qr_bound_worked_example():
    assert predict_qr_bound(1.0, 2.0) == pytest.approx(4.0 / 3.0, rel=1e-15)


def test_qr_bound_monotone_and_below_two():
    alphas = np.linspace(0.05, 1.95, 10)
    ks = np.linspace(1.0, 16.0, 10)
    for k in ks:
        vals = [predict_qr_bound(float(a), float(k)) for a in alphas]
        assert all(v < 2.0 for v in vals)
        assert all(b > a for a, b in zip(vals, vals[1:]))
    for a in alphas:
        vals = [predict_qr_bound(float(a), float(k)) for k in ks]
        assert all(b >= a2 for a2, b in zip(vals, vals[1:]))
        # strictly increasing in K away from the K=1 degeneracy
        assert vals[-1] > vals[0]


def test_qr_bound_domain():
    for bad in ((0.0, 2.0), (2.0, 2.0), (1.0, 0.5)):
        with pytest.raises(ParameterError):
            predict_qr_bound(*bad)


def test_spectrum_bound_reduces_at_k_one():
    theta, bound = predict_spectrum_bound(1.0, 1.0, 1.0)
    assert theta == 0.5 and bound == 1.0
    theta, bound = predict_spectrum_bound(3.0, 1.0, 0.7)
    assert theta == 0.25 and bound == pytest.approx(0.7, abs=0)


def test_spectrum_bound_worked_example():
    # t = 1, K = 2: source read at theta = 2/3, image bounded at theta = 1/2
    alpha = 0.9
    theta, bound = predict_spectrum_bound(1.0, 2.0, alpha)
    assert theta == 0.5
    assert bound == pytest.approx(4.0 * alpha / (2.0 + alpha), rel=1e-15)


def test_spectrum_bound_t_to_zero_matches_qr_bound():
    # algebraic limit: the bound formula is t-free, so the identity is exact
    for alpha in (0.3, 1.0, 1.7):
        for k in (1.0, 2.0, 4.0):
            for t in (1e-3, 1e-6, 1e-9):
                _, bound = predict_spectrum_bound(t, k, alpha)
                assert bound == predict_qr_bound(alpha, k)


def test_beta_examples():
    assert beta_intermediate(4.0, 1.0) == pytest.approx(4.0 / 3.0, rel=1e-15)
    for p in (4.0, 8.0, 32.0):
        assert beta_intermediate(p, 2.0) == pytest.approx(2.0, rel=1e-15)


@given(
    p=st.floats(2.01, 200.0),
    alpha=st.floats(0.01, 2.0),
)
@settings(max_examples=100, deadline=None)
def test_beta_cancellation_identity(p, alpha):
    beta = beta_intermediate(p, alpha)
    assert abs(-(p - 2.0) + alpha * p / beta - alpha) <= 1e-12


def test_beta_decreases_to_alpha():
    alpha = 1.3
    betas = [beta_intermediate(p, alpha) for p in (4.0, 8.0, 16.0, 32.0, 1e6)]
    assert all(b2 < b1 for b1, b2 in zip(betas, betas[1:]))
    assert betas[-1] == pytest.approx(alpha, rel=1e-5)


def test_bound_report_verdicts():
    base = dict(
        suite="s", row="r", theorem="thm1.1", set_label="e", map_label="m",
        k=2.0, alpha_source=1.0, bound=1.0, tolerance=0.1,
    )
    assert BoundReport(alpha_image=1.05, **base).verdict == "PASS"
    assert BoundReport(alpha_image=1.2, **base).verdict == "FAIL"
    r = BoundReport(alpha_image=1.2, expect_violation=True, **base)
    assert r.verdict == "EXPECTED-VIOLATION" and r.ok
    r = BoundReport(alpha_image=0.9, expect_violation=True, **base)
    assert r.verdict == "PASS" and not r.ok  # counterexample failed to violate


def test_counterexamples_suite(ctx):
    reports = run_suite("counterexamples", ctx)
    assert [r.row for r in reports] == ["neglog:geom_e", "recip:naturals30"]
    for r in reports:
        assert r.verdict == "EXPECTED-VIOLATION"
        assert r.ok
    neglog = reports[0]
    assert neglog.alpha_image >= 0.8
    assert neglog.alpha_source <= 0.2


def test_suite_determinism_fresh_contexts():
    a = run_suite("counterexamples", SuiteContext())
    b = run_suite("counterexamples", SuiteContext())
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


def test_unknown_suite_rejected():
    with pytest.raises(ParameterError):
        run_suite("nonsense")


def test_reports_serialization_schema(ctx):
    reports = run_suite("counterexamples", ctx)
    d = json.loads(reports_to_json(reports, timestamp="T"))
    assert d["timestamp"] == "T"
    assert {r["row"] for r in d["reports"]} == {"neglog:geom_e", "recip:naturals30"}
    for r in d["reports"]:
        assert set(r) >= {
            "suite", "row", "theorem", "alpha_source", "bound",
            "alpha_image", "slack", "verdict", "ok",
        }
    csv = reports_to_csv(reports).splitlines()
    assert csv[0] == "suite,row,alpha_src,bound,alpha_img,slack,verdict"
    assert len(csv) == len(reports) + 1


def test_sharpness_suite(ctx):
    reports = run_suite("sharpness-sequences", ctx)
    assert len(reports) == 9
    for r in reports:
        # one-sided verdict per the bound direction
        assert r.verdict == "PASS", (r.row, r.alpha_image, r.bound)
        # quantitative sharpness: measured within the calibrated band of the
        # derived target min(1/((1/K+1)(1-theta)), 1)
        assert abs(r.details["two_sided_gap"]) <= 0.12, r.row
