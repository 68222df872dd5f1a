"""The frequency-localized family f_N below and above the regularity threshold a/4.

Below the threshold the Sobolev norms of f_N shrink like N^(beta - a/4) while the
linearized propagator keeps a fixed size on a shrinking annulus, so no maximal
estimate can hold.  Above it the maximal ratios stay bounded.

Run:  python3 demos/sharpness_contrast.py
"""

from damekricci import H3
from damekricci.experiments import counterexample_family, maximal_ratio_run, sharpness_run

N_LIST = [16, 32, 64, 128, 256]


def main():
    a = 0.5
    below = sharpness_run(H3, a, 0.1, N_LIST)
    print(f"beta = 0.1 < a/4: fitted Sobolev slope {below.slope:.4f} (target {0.1 - a / 4:.4f})")
    for row in below.per_point:
        print(f"    N={row['N']:4d}  ||f_N||_H^beta={row['sobolev_norm']:.4e}  ||T f_N||={row['T_norm']:.4e}"
              f"  ratio={row['ratio']:.3f}")
    print(f"    verdict: {'PASS' if below.passed else 'FAIL'}")

    above = maximal_ratio_run(H3, a, 0.175, counterexample_family(H3, a, N_LIST, beta=0.175))
    print(f"beta = 0.175 > a/4: maximal ratios, trend slope {above.slope:.3f}")
    for row in above.per_point:
        print(f"    N={row['scale']:4d}  ratio={row['ratio']:.4f}  refined={row['ratio_refined']:.4f}")
    print(f"    verdict: {'PASS' if above.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
