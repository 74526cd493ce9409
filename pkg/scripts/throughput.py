#!/usr/bin/env python
"""Time directory evaluation on synthetic 1024x1024 label maps.

    python scripts/throughput.py --pairs 100 --threads 4
"""

import argparse
import shutil
import tempfile
import time
from pathlib import Path

import numpy as np

from segfuse.labelcore import ClassSet, LabelMap, write_label_png
from segfuse.pipeline import evaluate_dirs


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=100)
    parser.add_argument("--size", type=int, default=1024)
    parser.add_argument("--classes", type=int, default=19)
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--distinct", type=int, default=4, help="distinct maps to generate; the rest are copies")
    opt = parser.parse_args()

    rng = np.random.default_rng(0)
    cs = ClassSet.from_pairs([(f"c{i}", (i, i, i)) for i in range(opt.classes)])
    block = max(1, opt.size // 64)
    with tempfile.TemporaryDirectory() as tmp:
        gt_dir, pred_dir = Path(tmp, "gt"), Path(tmp, "pred")
        gt_dir.mkdir()
        pred_dir.mkdir()
        for i in range(opt.pairs):
            name = f"{i:04d}.png"
            if i < opt.distinct:
                coarse = rng.integers(0, opt.classes, (opt.size // block + 1,) * 2, dtype=np.uint8)
                gt = np.repeat(np.repeat(coarse, block, 0), block, 1)[:opt.size, :opt.size]
                noise = rng.random(gt.shape) < 0.2
                pred = np.where(noise, (gt + 1) % opt.classes, gt).astype(np.uint8)
                write_label_png(LabelMap(gt), gt_dir / name)
                write_label_png(LabelMap(pred), pred_dir / name)
            else:
                src = f"{i % opt.distinct:04d}.png"
                shutil.copyfile(gt_dir / src, gt_dir / name)
                shutil.copyfile(pred_dir / src, pred_dir / name)
        start = time.perf_counter()
        cm, row = evaluate_dirs(gt_dir, pred_dir, cs, threads=opt.threads)
        elapsed = time.perf_counter() - start
    print(f"{opt.pairs} pairs, {cm.total} pixels, {elapsed:.2f}s, "
          f"{cm.total / elapsed / 1e6:.1f} Mpx/s, mIoU {row.miou:.4f}")


if __name__ == "__main__":
    main()
