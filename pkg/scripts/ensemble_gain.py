#!/usr/bin/env python
"""Synthetic fused-vs-members experiment.

Ground truth is uniform over C classes; each member is the ground truth with
symmetric label noise. Prints a member/fused table plus pixel accuracies and,
for 3 members, the closed-form fused accuracy for comparison.

    python scripts/ensemble_gain.py --side 1000 --classes 5 --error-rate 0.2 --members 3
"""

import argparse
from fractions import Fraction
from itertools import product

from segfuse.augment import derive_stream
from segfuse.baseline import perturb_labels, random_label_map
from segfuse.fusion import VoteStack, hard_vote
from segfuse.labelcore import ConfusionMatrix, accumulate, miou, pixel_accuracy
from segfuse.report import ReportRow, render_table


def exact_fused_accuracy(num_classes, error_rate, members):
    """Enumerate every (truth, votes) combination; ties go to the smallest class."""
    keep = 1 - Fraction(error_rate).limit_denominator(10**6)
    other = (1 - keep) / (num_classes - 1)
    total = Fraction(0)
    for truth in range(num_classes):
        for votes in product(range(num_classes), repeat=members):
            p = Fraction(1, num_classes)
            for v in votes:
                p *= keep if v == truth else other
            counts = [votes.count(c) for c in range(num_classes)]
            if counts.index(max(counts)) == truth:
                total += p
    return total


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--side", type=int, default=1000)
    parser.add_argument("--classes", type=int, default=5)
    parser.add_argument("--error-rate", type=float, default=0.2)
    parser.add_argument("--members", type=int, default=3)
    parser.add_argument("--seed", type=int, default=2024)
    opt = parser.parse_args()

    gt = random_label_map(opt.side, opt.side, opt.classes, derive_stream(opt.seed, "gt"))
    members = [perturb_labels(gt, opt.error_rate, opt.classes, derive_stream(opt.seed, f"member{i}"))
               for i in range(opt.members)]
    fused = hard_vote(VoteStack(members))

    rows, accs = [], []
    for i, m in enumerate(members + [fused]):
        cm = accumulate(ConfusionMatrix.zeros(opt.classes), gt, m)
        rows.append(ReportRow(f"member {i}", miou(cm)))
        accs.append(pixel_accuracy(cm))
    print(render_table(rows[:-1], rows[-1]), end="")
    print("pixel accuracy: " + ", ".join(f"{a:.4f}" for a in accs[:-1]) + f"; fused {accs[-1]:.4f}")
    if opt.members <= 5 and opt.classes <= 8:
        exact = exact_fused_accuracy(opt.classes, opt.error_rate, opt.members)
        print(f"closed-form fused accuracy: {exact} = {float(exact):.4f}")


if __name__ == "__main__":
    main()
