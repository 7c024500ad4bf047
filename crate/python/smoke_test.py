#!/usr/bin/env python3
"""Smoke test for the compiled extension module.

Builds the module, prepares a small model, and exercises the main operations:
transforms, energy bookkeeping, flow conservation, constrained minimization,
wave-operator pairings, and a sector ground state. Run from the repository
root:

    cargo build --release -p skgw-py
    python3 python/smoke_test.py
"""

import math
import pathlib
import shutil
import sys


def import_skgw():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libskgw.so",
        root / "target" / "debug" / "libskgw.so",
        root / "target" / "release" / "libskgw.dylib",
        root / "target" / "debug" / "libskgw.dylib",
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p skgw-py")
    staged = built.parent / ("skgw" + built.suffix.replace("dylib", "so"))
    if not staged.exists() or staged.stat().st_mtime < built.stat().st_mtime:
        shutil.copy2(built, staged)
    sys.path.insert(0, str(staged.parent))
    import skgw

    return skgw


def main():
    skgw = import_skgw()
    print(f"skgw {skgw.__version__}")

    model = skgw.Model(box_half_length=16.0, grid_size=256)
    n = len(model.position_nodes())
    assert n == 256

    # transform round trip
    u_re, u_im = model.gaussian_state(center=0.3, width=1.0, norm=0.5, momentum=0.2)
    hat = model.to_momentum(u_re, u_im)
    back = model.to_position(*hat)
    err = max(
        abs(a - b) + abs(c - d)
        for a, b, c, d in zip(u_re, back[0], u_im, back[1])
    )
    assert err < 1e-12, f"round trip error {err}"
    print(f"transform round trip: max error {err:.2e}")

    # flow conservation over a short horizon
    z_re = [0.0] * n
    z_im = [0.0] * n
    rows, final = model.evolve(u_re, u_im, z_re, z_im, dt=1e-3, horizon=0.5, stride=50)
    mass0 = rows[0][1]
    drift = max(abs(r[1] - mass0) / mass0 for r in rows)
    assert drift < 1e-12, f"mass drift {drift}"
    print(f"flow: {len(rows)} samples, relative mass drift {drift:.2e}")

    # constrained minimization and the stationary pair
    result = model.minimize(0.3, method="scf", tol=1e-10, starts=1, seed=1)
    assert result.residual < 1e-9
    print(
        f"minimizer: E_delta={result.e_delta:.8f} lambda={result.lambda_multiplier:.6f} "
        f"({result.iterations} iterations, residual {result.residual:.1e})"
    )

    # the minimizer pair scores tiny wave-operator pairings; a field-only
    # state with band overlap does not
    u0 = result.u0()
    z0 = result.z0()
    ok, max_pairing, threshold = model.is_radiationless(
        u0[0], u0[1], z0[0], z0[1], annulus=(1.0, 2.0), count=2, horizon=16.0
    )
    print(f"minimizer pairings: max {max_pairing:.3e} (threshold {threshold:.3e})")
    k = model.momentum_nodes()
    zg_re = [math.exp(-2.0 * (kj - 1.4) ** 2) * 0.3 for kj in k]
    zg_im = [0.0] * n
    bad, generic_pairing, _ = model.is_radiationless(
        [0.0] * n, [0.0] * n, zg_re, zg_im, annulus=(1.0, 2.0), count=2, horizon=16.0
    )
    assert not bad and generic_pairing > 10.0 * max_pairing
    print(f"generic pairings: max {generic_pairing:.3e} (separation confirmed)")

    # one truncated quantum sector
    energy, dim = model.quantum_ground_energy(1, 0.25, d_u=3, meson_ks=[1.2, 1.6], meson_cap=3)
    assert energy < 0.25 * 2.0 + 1e-6  # at or below the free level
    print(f"sector ground state: E={energy:.6f} on a {dim}-dimensional basis")

    print("smoke test passed")


if __name__ == "__main__":
    main()
