"""Smoke test for the pydnls extension.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/pydnls-*.whl
"""

import cmath
import json
import math

import pydnls


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    names = [d for _, d in pydnls.energies(2)]
    assert len(names) == 3, names

    u = pydnls.GridFunction.profile("gaussian", 256, 24.0)
    assert len(u) == 256 and u.edge_ratio() < 1e-10
    mass = u.l2_norm_sq()
    assert close(pydnls.evaluate_energy(u, 0), -0.5j * mass, 1e-12)

    lam = 4j
    a = pydnls.jost_transmission(u, lam)
    det = pydnls.perturbation_determinant(u, lam)
    assert abs(a * a - det) / abs(det) < 1e-5, (a, det)
    assert abs(cmath.exp(pydnls.log_transmission(u, lam)) - a) < 1e-10

    nu = 0.7
    assert close(pydnls.f_nu_l1_norm(nu), math.pi / math.sin(math.pi * nu), 1e-10)
    rep = pydnls.compare_hs(u, 0.7, 0.0)
    assert rep["pass"] and abs(rep["ratio"] / rep["expected_ratio"] - 1) < 1e-4

    rho = 4.0 * pydnls.estimate_r0(u)
    assert pydnls.phi0(u, rho, 1) <= 0.0
    pydnls.phi(u, rho, 1)

    g = pydnls.GridFunction.profile("evolution-gaussian", 1024, 300.0)
    out = pydnls.evolve_monitors(g, 1e-3, 0.5, ["M", "a_u"], lambda_sq=[4j], stride=250)
    m = out["M"]
    assert abs(m[-1] - m[0]) / m[0] < 1e-9
    av = out["a(0+4i)"]
    assert abs(av[-1] - av[0]) < 1e-8

    verdict = json.loads(pydnls.run_verify("symbolic", 0))
    assert verdict["passed"], [c["name"] for c in verdict["checks"] if not c["passed"]]
    print("pydnls smoke test passed")


if __name__ == "__main__":
    main()
