"""Wall-clock time of a full segmentation at several image sizes."""
import argparse
import time

from potts_sva import SvaConfig, segment
from potts_sva.phantom import make_phantom


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--classes", type=int, default=3)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    print("size\tbest_seconds\touter\tconverged")
    for n in args.sizes:
        y, _ = make_phantom(n, n, args.classes, 0.08, 1)
        best = float("inf")
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            res = segment(y, SvaConfig(K=args.classes))
            best = min(best, time.perf_counter() - t0)
        print(f"{n}\t{best:.3f}\t{res.outer_iterations}\t{res.converged}")


if __name__ == "__main__":
    main()
