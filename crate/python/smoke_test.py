"""Smoke test for the pyeigpath extension module.

Build and install it first, e.g.

    pip install maturin
    maturin build -m crates/python/Cargo.toml --release --offline
    pip install --force-reinstall target/wheels/pyeigpath-*.whl
    python python/smoke_test.py
"""

import math
import pathlib
import sys

import numpy as np

import pyeigpath as ep

ROOT = pathlib.Path(__file__).resolve().parent.parent


def check(label, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {label} {detail}")
    if not ok:
        sys.exit(1)


def main():
    torus = ep.Problem.example1(8)
    check("problem dimension", torus.n == 8 and torus.hermitian)

    a = np.array(torus.matrix(0.2))
    check("matrix is symmetric", np.allclose(a, a.conj().T))

    # Every pair about mu0 = 0.2, compared with numpy at a nearby point.
    series = ep.taylor_expand(torus, 0.2, 20)
    check("all pairs expanded", len(series) == 8 and all(s is not None for s in series))
    mu = 0.27
    direct = np.sort(np.linalg.eigvalsh(np.array(torus.matrix(mu))))
    approx = np.sort(np.array([s.eigenvalue(mu).real for s in series]))
    err = np.max(np.abs(direct - approx))
    check("taylor eigenvalues match numpy", err < 1e-11, f"(max error {err:.2e})")

    lam, v = series[0].eval(mu)
    v = np.array(v)
    resid = np.linalg.norm(np.array(torus.matrix(mu)) @ v - lam * v) / np.linalg.norm(v)
    check("eigenvector residual", resid < 1e-10, f"({resid:.2e})")

    report = ep.error_report(torus, series, list(np.linspace(0.1, 0.3, 41)), rayleigh=True)
    check("error report", report["max_abs_err_lambda"] < 1e-11, f"(max {report['max_abs_err_lambda']:.2e})")
    check("report csv header", report["csv"].startswith("mu,pair_index,abs_err_lambda,vec_deviation,abs_err_rayleigh"))

    # Chebyshev on an interval that reaches past the Taylor disk.
    cheb = ep.chebyshev_expand(torus, 0.0, 0.6, 14, index=1)
    check("chebyshev basis", cheb.basis == "chebyshev" and cheb.newton_iterations is not None)
    report = ep.error_report(torus, [cheb], list(np.linspace(0.0, 0.6, 61)))
    check("chebyshev accuracy", report["max_abs_err_lambda"] < 1e-8, f"({report['max_abs_err_lambda']:.2e})")

    copy = ep.EigenPairSeries.from_json(cheb.to_json())
    check("json roundtrip", copy.eigenvalue(0.33) == cheb.eigenvalue(0.33))

    s1 = ep.sample_eigenvalues(torus, series[:2], 0.2, 0.05, 500, seed=7)
    s2 = ep.sample_eigenvalues(torus, series[:2], 0.2, 0.05, 500, seed=7, method="direct")
    check("sampling is seeded", s1["mus"] == s2["mus"])
    diff = max(abs(x - y) for r1, r2 in zip(s1["values"], s2["values"]) for x, y in zip(r1, r2))
    check("surrogate samples match direct", diff < 1e-9, f"({diff:.2e})")

    # Defective Jordan block at mu = 0.
    jordan = ep.Problem.from_config(str(ROOT / "configs" / "jordan2.toml"))
    try:
        ep.taylor_expand(jordan, 0.0, 4, index=0)
        check("defective point rejected", False)
    except ep.EigpathError as e:
        check("defective point rejected", "non-simple" in str(e))
    s = ep.taylor_expand(jordan, 0.25, 12, index=0)
    want = 1 + math.sqrt(0.3)
    check("jordan branch", abs(s.eigenvalue(0.3) - want) < 1e-7, f"({abs(s.eigenvalue(0.3) - want):.2e})")

    try:
        ep.Problem.from_toml('name = "bad"\nn = 2\nentries = ["1", "mu +", "0", "1"]\n')
        check("bad config rejected", False)
    except ValueError:
        check("bad config rejected", True)

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
