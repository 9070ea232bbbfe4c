"""Run the full verification harness on a batch of random instances and
summarize the ratios against the exact optimum."""

import random
import sys

from steinerls.analysis import summarize
from steinerls.io import gen_random
from steinerls.verify import verify_instance


def main(count=30, seed=0):
    rng = random.Random(seed)
    reports = []
    failures = 0
    for i in range(count):
        n = rng.randint(4, 8)
        inst = gen_random(n, rng.randint(1, n // 2), (1, 100), rng.randrange(2**31)).to_instance()
        res = verify_instance(inst, seed=i)
        reports.append(res.gap)
        if not res.ok:
            failures += 1
            print(f"instance {i}: failed {res.failed()}")
    s = summarize(reports)
    print(f"{s.count} instances, {s.passed} within the guarantee, {failures} failing some check")
    print(f"ratio max {s.max_ratio:.4f} mean {s.mean_ratio:.4f} median {s.median_ratio:.4f}")
    print(f"{s.single_trees} finals are single trees")


if __name__ == "__main__":
    main(*(int(x) for x in sys.argv[1:3]))
