"""Smoke tests for the python bindings and the CLI."""

import json
import math
import os
import subprocess

import pytest

import _ctrac as ct


def test_expr_eval_and_derivative():
    assert ct.eval_expr("4/(1+x1^2+x2^2)^2", [0.0, 0.0]) == pytest.approx(4.0)
    d = ct.derivative_expr("x1*x2", 2, 0)
    assert ct.eval_expr(d, [3.0, 1.5]) == pytest.approx(1.5)


def test_catalog_and_curvature():
    names = ct.catalog_names()
    assert len(names) >= 8
    sphere = ct.catalog_chart("sphere_stereo:d=3")
    assert sphere.dim == 3
    pack = ct.curvature(sphere, [0.0, 0.0, 0.0])
    assert pack["scalar"] == pytest.approx(6.0)
    assert ct.einstein_residual(sphere, 1.0, [0.1, 0.2, -0.1]) < 1e-8


def test_verify_ae_classification():
    flat = ct.catalog_chart("flat:d=3")
    rep = ct.verify_ae(flat, "(1 - x1^2 - x2^2 - x3^2)/2")
    assert rep["S"] == pytest.approx(-1.0)
    assert rep["classification"] == "hypersurface"
    assert rep["einstein_residual"] < 1e-7

    rep0 = ct.verify_ae(flat, "(x1^2 + x2^2 + x3^2)/2")
    assert rep0["classification"] == "isolated-points"
    assert abs(rep0["S"]) < 1e-9

    with pytest.raises(ct.CtracError):
        ct.verify_ae(flat, "x1*x2")


def test_tractor_operations():
    flat = ct.catalog_chart("flat:d=3")
    i = ct.scale_tractor(flat, "(1 - x1^2 - x2^2 - x3^2)/2", [0.2, 0.1, -0.3])
    assert i[4] == pytest.approx(1.0)
    assert ct.tractor_metric(flat, i, i, [0.2, 0.1, -0.3]) == pytest.approx(1.0)

    res = ct.parallel_transport(flat, ["t", "0.3*sin(3*t)", "0.1"], [1, 0, 0, 0, 0])
    assert res["metric_drift"] < 1e-9
    assert res["endpoint"][0] == pytest.approx(1.0)


def test_parallel_space_and_products():
    flat = ct.catalog_chart("flat:d=3")
    ps = ct.parallel_space(flat)
    assert ps["dim"] == 5

    s2 = ct.catalog_chart("sphere_stereo:d=2")
    h2 = ct.catalog_chart("hyperbolic_ball:d=2")
    prod = ct.build_product(s2, h2)
    assert prod.dim == 4
    assert abs(ct.scalar_curvature(prod, [0.1, 0.0, 0.1, -0.2])) < 1e-9

    collar = ct.build_collar(s2, h2, mu=0.5)
    assert collar.dim == 5
    assert ct.einstein_residual(collar, -1.0, [0.5, 0.1, 0.0, 0.1, -0.1]) < 1e-7


def test_killing_and_circle():
    flat = ct.catalog_chart("flat:d=3")
    assert ct.ck_residual(flat, ["-x2", "x1", "0"], [0.3, -0.1, 0.2]) < 1e-12
    assert ct.circle_ode_zeros_per_period(0.5, 1.0, 0.7) == 2
    assert ct.circle_ode_zeros_per_period(-0.5, 1.0, 0.0) == -1  # no period


def test_holonomy_verdicts():
    flat = ct.catalog_chart("flat:d=3")
    rep = ct.holonomy(flat, loops=8)
    assert rep["splitting"] == "TRIVIAL-HOLONOMY"
    assert rep["metric_residual"] < 1e-7


def test_cli_roundtrip(tmp_path):
    cli = os.environ.get("CTRAC_CLI")
    if not cli:
        pytest.skip("CTRAC_CLI not set")
    chart = tmp_path / "flat3.chart"
    out = subprocess.run([cli, "catalog", "--name", "flat:d=3", "--out", str(chart)],
                         capture_output=True, text=True)
    assert out.returncode == 0
    cert = json.loads(
        subprocess.run([cli, "verify-ae", "--chart", str(chart), "--sigma",
                        "(1 - x1^2 - x2^2 - x3^2)/2"],
                       capture_output=True, text=True).stdout)
    assert cert["outputs"]["S"] == pytest.approx(-1.0)
    assert cert["verdicts"]["almost_einstein"] is True
    bad = subprocess.run([cli, "curvature", "--chart", "/nonexistent", "--point", "0"],
                         capture_output=True, text=True)
    assert bad.returncode == 2
