"""Writes the seeded 12-image, 2-class evaluation fixture.

Usage: make_eval_fixture.py OUT_DIR
"""
import json
import random
import sys
from pathlib import Path

SEED = 20240611
NUM_IMAGES = 12
CLASSES = ["plate", "face"]


def jitter(rng, box, amount):
    x0, y0, x1, y1 = box
    return [x0 + rng.randint(-amount, amount), y0 + rng.randint(-amount, amount),
            x1 + rng.randint(-amount, amount), y1 + rng.randint(-amount, amount)]


def random_box(rng):
    x0, y0 = rng.randint(0, 560), rng.randint(0, 400)
    return [x0, y0, x0 + rng.randint(24, 80), y0 + rng.randint(16, 60)]


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    # Distinct confidences on a 1/1000 grid keep the ranking unambiguous.
    confidences = rng.sample(range(50, 1000), 200)
    gt_lines, pred_lines = [], []

    for i in range(NUM_IMAGES):
        image_id = f"img{i:02d}"
        if i == 7:
            # An image with no labels and one stray prediction.
            gt_lines.append({"image_id": image_id})
            pred_lines.append({"image_id": image_id, "class_id": 0, "bbox": random_box(rng),
                               "confidence": confidences.pop() / 1000})
            continue
        gts = [(rng.randrange(2), random_box(rng)) for _ in range(rng.randint(1, 4))]
        for cls, box in gts:
            gt_lines.append({"image_id": image_id, "class_id": cls, "bbox": box})
        for cls, box in gts:
            roll = rng.random()
            if roll < 0.15:
                continue                                  # missed
            if roll < 0.25:
                cls = 1 - cls                             # wrong class
            amount = rng.choice([2, 4, 8, 14])
            pred_lines.append({"image_id": image_id, "class_id": cls, "bbox": jitter(rng, box, amount),
                               "confidence": confidences.pop() / 1000})
            if rng.random() < 0.2:                        # duplicate
                pred_lines.append({"image_id": image_id, "class_id": cls, "bbox": jitter(rng, box, 3),
                                   "confidence": confidences.pop() / 1000})
        for _ in range(rng.randint(0, 2)):                # background hits
            pred_lines.append({"image_id": image_id, "class_id": rng.randrange(2),
                               "bbox": random_box(rng), "confidence": confidences.pop() / 1000})

    with open(out / "gt.jsonl", "w") as f:
        for line in gt_lines:
            f.write(json.dumps(line) + "\n")
    with open(out / "pred.jsonl", "w") as f:
        for line in pred_lines:
            f.write(json.dumps(line) + "\n")
    (out / "names.txt").write_text("\n".join(CLASSES) + "\n")
    print(f"{len(gt_lines)} ground truth lines, {len(pred_lines)} predictions")


if __name__ == "__main__":
    main()
