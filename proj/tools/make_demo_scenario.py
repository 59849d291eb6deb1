#!/usr/bin/env python3
"""Generates data/demo_scenario.json, the bundled simulator scenario.

The reference policy is factorised: a per-sample answer preference, a
per-sample preference for each candidate box, and a shared preference over
the number of proposed boxes. Rerunning with the same arguments reproduces
the file byte for byte.
"""
import argparse
import json
import random

CANDIDATES = [
    [6, 6, 22, 22],
    [38, 6, 58, 26],
    [8, 38, 28, 58],
    [40, 40, 58, 58],
    [22, 22, 42, 42],
]


def jitter(box, rng, grid):
    while True:
        b = [c + rng.randint(-3, 3) for c in box]
        b = [min(max(c, 0), grid) for c in b]
        if b[0] < b[2] and b[1] < b[3]:
            return b


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=60)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="data/demo_scenario.json")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    grid = 64
    samples = []
    for i in range(args.samples):
        abnormal = i % 5 < 3  # 60% abnormal
        gt = []
        if abnormal:
            k = 2 if rng.random() < 0.35 else 1
            for c in rng.sample(range(len(CANDIDATES)), k):
                gt.append(jitter(CANDIDATES[c], rng, grid))
        # Margin in favour of the correct answer: most samples lean right,
        # some are uncertain, a few lean wrong.
        u = rng.random()
        if u < 0.45:
            margin = 2.5
        elif u < 0.70:
            margin = 1.0
        elif u < 0.88:
            margin = 0.0
        else:
            margin = -1.5
        answer = [0.0, 0.0]
        answer[1 if abnormal else 0] = margin
        box_logits = [round(rng.gauss(0.0, 0.6), 3) for _ in CANDIDATES]
        samples.append({
            "id": f"demo-{i:03d}",
            "label": 1 if abnormal else 0,
            "gt_boxes": gt,
            "answer_logits": answer,
            "box_logits": box_logits,
        })

    scenario = {
        "grid": {"width": grid, "height": grid},
        "candidate_boxes": CANDIDATES,
        "max_boxes": 2,
        "count_logits": [0.0, 0.5, 0.0],
        "evidence_coupling": 2.0,
        "group_size": 6,
        "epochs": 150,
        "learning_rate": 1.0,
        "reward": {
            "alpha": 0.5,
            "beta": 0.04,
            "scheme": "cls_loc",
            "std_eps": 1e-6,
            "random_sigma": 0.3,
            "seed": 7,
        },
        "samples": samples,
    }
    with open(args.out, "w") as f:
        json.dump(scenario, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
