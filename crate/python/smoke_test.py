"""Quick end-to-end check of the platepatch extension module.

Build and install it first:

    pip install --no-build-isolation -e crates/python
"""

import math
import pathlib
import sys

import platepatch

ROOT = pathlib.Path(__file__).resolve().parent.parent


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    return cond


def main():
    good = True

    k = platepatch.kirsch_check(0.5, 12)
    good &= check(k["max_error"] < 1e-6, f"Kirsch hoop stress, max error {k['max_error']:.2e}")
    good &= check(abs(k["theta_at_max"] - math.pi / 2) < 1e-6, "Kirsch peak at pi/2")

    nodes = platepatch.collocation_nodes(3)
    good &= check(nodes[0] == math.pi / 7, "first collocation node")

    p = platepatch.Problem.two_hole(math.pi / 4, True)
    good &= check(p.counts == (2, 0, 0) and p.system_order(20) == 656, "two-hole system order 656")
    s = p.solve(20)
    good &= check(s.order == 656, f"solved, residual {s.residual_norm:.1e}")
    loops = s.loop_integrals()
    good &= check(max(abs(v) for v in loops.values()) < 1e-8, "loop integrals vanish")

    t = s.trace("L1")
    good &= check(len(t["theta"]) == 360 and t["max_sigma"][1] > 0, f"trace on L1, max sigma_n {t['max_sigma'][1]:.3f}")
    g = s.trace("G1", region="patch")
    q = dict(s.coefficients("G1", "q"))
    good &= check(len(q) == 41, "edge density coefficients")
    th = g["theta"][10]
    qv = sum(c * complex(math.cos(m * th), math.sin(m * th)) for m, c in q.items())
    err = abs(complex(g["sigma_n"][10], g["tau_n"][10]) + 2 * qv)
    good &= check(err < 1e-4, f"patch-side stress matches -2q at N=20 ({err:.1e})")

    # uniform field on a horizontal element: 2Γ + conj(Γ′) with Γ = 1/4, Γ′ = i/2
    far = s.stress(complex(0, 50), 1 + 0j)
    good &= check(abs(far - (0.5 - 0.5j)) < 1e-2, f"remote traction on a horizontal line {far:.4f}")

    cfg = (ROOT / "configs" / "kirsch.toml").read_text()
    kp = platepatch.Problem.from_toml(cfg)
    kt = kp.solve().trace("L1")
    good &= check(abs(kt["max_sigma"][1] - 3) < 1e-6, "config file round trip")

    try:
        s.trace("L9")
        good &= check(False, "unknown contour raises")
    except KeyError:
        good &= check(True, "unknown contour raises")

    rows = platepatch.sweep(platepatch.Problem.kirsch(0.5), "alpha", [0.0, 0.5], 8)
    good &= check(len(rows) == 2 and abs(rows[0]["max_sigma_n"] - rows[1]["max_sigma_n"]) < 1e-3, "alpha sweep")

    print("all good" if good else "failures above")
    return 0 if good else 1


if __name__ == "__main__":
    sys.exit(main())
