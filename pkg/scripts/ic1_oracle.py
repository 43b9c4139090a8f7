"""Brute-force calibration of min K_IC1 against the Ricci spectrum.

In three dimensions the ratio of the sampled minimum to the smallest Ricci
eigenvalue is printed per tensor and rounded to a simple fraction. In four
dimensions a seeded search looks for a Ricci-nonnegative tensor with negative
K_IC1 and writes it out.
"""
import argparse

from ricciplane.pic1 import (brute_force_min, calibration_constant, min_ic1, plane_curvature,
                             random_bianchi_tensor, ricci_min_eigenvalue,
                             search_ricci_nonnegative_counterexample, write_tensor)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--planes", type=int, default=100_000)
    ap.add_argument("--tensors", type=int, default=5)
    ap.add_argument("--first-seed", type=int, default=1000)
    ap.add_argument("--write", help="path for the 4D witness tensor (JSON)")
    args = ap.parse_args()

    ratios = []
    print("seed   lambda_min(Ric)   brute_min     optimised     ratio")
    for seed in range(args.first_seed, args.first_seed + args.tensors):
        R = random_bianchi_tensor(3, seed)
        lam = ricci_min_eigenvalue(R)
        brute = brute_force_min(R, args.planes, seed)
        best = min_ic1(R, seed=seed).value
        ratios.append(brute / lam)
        print(f"{seed:<6d} {lam:<17.6f} {brute:<13.6f} {best:<13.6f} {brute / lam:.5f}")
    print(f"calibration constant: {calibration_constant(ratios)}")

    found = search_ricci_nonnegative_counterexample(4)
    if found is None:
        print("no 4D witness found")
        return
    seed, R, res = found
    print(f"\n4D seed {seed}: lambda_min(Ric) = {ricci_min_eigenvalue(R):.3e}, "
          f"min K_IC1 = {res.value:.6f}, witness re-evaluates to {plane_curvature(R, res.witness):.6f}")
    if args.write:
        write_tensor(R, args.write)


if __name__ == "__main__":
    main()
