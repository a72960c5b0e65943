"""Smoke test for the rydberg_ramsey_py extension.

Build and install first, e.g.

    pip install maturin
    maturin develop -m crates/python/Cargo.toml --release

or put a built rydberg_ramsey_py.so on PYTHONPATH.
"""

import cmath
import math

import rydberg_ramsey_py as rr


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    pot = rr.Potential.soft_core(1.0, 1.0, 0.1)
    assert close(pot(0.0), 1.0, 1e-15)
    assert close(pot(1.0), 0.5, 1e-15)
    assert close(pot.blockade_number(3 / (4 * math.pi)), 1.0, 1e-12)

    dressed = rr.Potential.from_dressing(2 * math.pi * 100, -2 * math.pi * 500, 2 * math.pi * 1000)
    assert close(dressed.r_c, 1.0, 1e-12)

    # two atoms, echo, quarter turn: <sigma+> = cos(V t / 2)
    proto = rr.Protocol(math.pi / 2, True)
    v = pot(0.8)
    sp = rr.sigma_plus([[0, 0, 0], [0.8, 0, 0]], pot, proto, 2.0)
    assert close(sp, math.cos(v), 1e-14), sp

    # closed form against the master-equation oracle with emission
    lossy = rr.Protocol(math.pi / 4, False, gamma=0.2)
    atoms = [[0, 0, 0], [0.7, 0.1, 0], [0.2, 0.9, 0.3]]
    a = rr.sigma_plus(atoms, pot, lossy, 3.0)
    b = rr.oracle_sigma_plus(atoms, pot, lossy, 3.0)
    assert close(a, b, 1e-8), (a, b)

    dev, gap = rr.echo_equivalence(atoms, pot, math.pi / 2, 2.0)
    assert dev < 1e-10 and abs(gap) < 1e-10

    f = rr.f_kernel(1.0, 0.0, math.pi / 2, 0.0)
    assert close(f, math.cos(0.5), 1e-15)

    c0 = rr.contrast_gas(0.3, pot, proto, 0.0)
    assert c0 == 1.0
    c = rr.contrast_gas(0.3, pot, proto, 2.0)
    assert 0 < abs(c) < 1
    assert rr.tau_half(0.3, pot, proto) > 0

    low = rr.asymptotic_contrast(0.01, 4.0, True, "low")
    assert close(low, math.exp(-math.sqrt(math.pi) / 2 * 0.01 * 2.0), 1e-15)

    mean, se = rr.monte_carlo_gas(0.3, pot, proto, 2.0, 16, 2000, seed=5)
    assert abs(mean - c) < 4 * se, (mean, c, se)

    grid = rr.correlation_map(5, 0.5, pot, proto, 1.0)
    assert grid[2][2] is None and len(grid) == 5
    assert close(abs(rr.lattice_contrast(1, 0.5, pot, proto, 3.0)), 1.0, 1e-15)

    try:
        rr.Potential.bare(1.0)(0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("bare potential at r = 0 should raise")

    print("smoke test passed")


if __name__ == "__main__":
    main()
