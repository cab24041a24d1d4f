import argparse

from leafscope.curve import CurveSpec


def main() -> None:
    # Expose the curve parameters so every later step reads the same file.
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--tau_re", type=float, default=0.0)
    ap.add_argument("--tau_im", type=float, default=1.0)
    ap.add_argument("--out", type=str, default="spec.json")
    args = ap.parse_args()
    if args.tau_im <= 0:
        raise ValueError("--tau_im must be > 0")

    spec = CurveSpec.new(complex(args.tau_re, args.tau_im), args.n)
    spec.save(args.out)

    print(f"✅ Curve ready: {args.out}")
    print(f"   n={spec.n}, tau={spec.tau}")
    for k, w in enumerate(spec.omega_coset()):
        print(f"   omega[{k}] = {w.z:.6f}")


if __name__ == "__main__":
    main()
