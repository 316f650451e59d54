"""Accuracy of the unsupervised method and of fixed-lambda TSA over a phantom suite.

    python3 scripts/phantom_accuracy.py --classes 2 --noise 0.05 --seeds 20
"""
import argparse
import time

import numpy as np

from potts_sva import SvaConfig, segment, segment_tsa
from potts_sva.phantom import label_accuracy, make_phantom


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--classes", type=int, default=2)
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--scale", type=float, default=255.0)
    args = ap.parse_args()

    cfg = SvaConfig(K=args.classes, intensity_scale=args.scale)
    print("seed\taccuracy\ttsa_accuracy\tagreement\touter\tlambda_final\tseconds")
    accs = []
    for seed in range(args.seeds):
        y, truth = make_phantom(args.size, args.size, args.classes, args.noise, seed)
        t0 = time.perf_counter()
        res = segment(y, cfg)
        dt = time.perf_counter() - t0
        tsa = segment_tsa(y, args.classes, res.lambda_final, cfg)
        acc = label_accuracy(res.z, truth)
        accs.append(acc)
        print(f"{seed}\t{acc:.4f}\t{label_accuracy(tsa.z, truth):.4f}\t{np.mean(tsa.z == res.z):.4f}"
              f"\t{res.outer_iterations}\t{res.lambda_final:.4f}\t{dt:.3f}")
    print(f"# mean accuracy {np.mean(accs):.4f}, min {np.min(accs):.4f}")


if __name__ == "__main__":
    main()
