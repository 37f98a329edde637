"""Random-channel falsification run for the confusion-matrix bound, plus tightness on constructed channels."""

import argparse
import time

from tightbound.channel import build_achieving_channel
from tightbound.formats import dumps
from tightbound.oracle import achieving_as_random, bound_stress_test, channel_confusion, channel_slack, random_channel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--nx", type=int, default=5)
    ap.add_argument("--ny", type=int, default=40)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--tight", type=int, default=100, help="constructed channels to check for zero slack")
    args = ap.parse_args()

    t0 = time.perf_counter()
    rep = bound_stress_test(args.trials, args.nx, args.ny, args.seed, workers=args.workers, raise_on_violation=False)
    print(dumps(rep.to_dict()), end="")
    print(f"random channels: {time.perf_counter() - t0:.1f}s")

    worst = 0.0
    for i in range(args.tight):
        cm = channel_confusion(random_channel(2 + i % 5, 10 + i % 30, args.seed + i))
        worst = max(worst, abs(channel_slack(achieving_as_random(build_achieving_channel(cm)))))
    print(f"constructed channels: max |slack| = {worst:.2e} over {args.tight}")


if __name__ == "__main__":
    main()
