"""Writes threshold_scores.json: 250 malicious and 500 benign similarity scores.

Layout (all values rounded to 4 places, strictly inside each band):
  malicious: 180 in (0.785, 0.995), 70 in (0.30, 0.77)
  benign:    19 in (0.955, 0.995), 10 in (0.771, 0.779), 471 in (0.05, 0.75)

At tau = 0.78 this gives TPR 180/250 = 0.720 and FPR 19/500 = 0.038. Every
grid point below 0.78 counts at least 29 benign scores above it (FPR >= 0.058,
over the 0.05 cap), and every point above 0.78 loses malicious scores from the
(0.785, 0.79] slice while FPR stays at 0.038, so J peaks at 0.78.
"""

import json
import random
from pathlib import Path


def band(rng, n, lo, hi):
    out = []
    while len(out) < n:
        v = round(rng.uniform(lo, hi), 4)
        if lo < v < hi:
            out.append(v)
    return out


def main():
    rng = random.Random(20240778)
    malicious = band(rng, 5, 0.785, 0.79) + band(rng, 175, 0.79, 0.995) + band(rng, 70, 0.30, 0.77)
    benign = band(rng, 19, 0.955, 0.995) + band(rng, 10, 0.771, 0.779) + band(rng, 471, 0.05, 0.75)
    rows = [{"score": v, "label": "malicious"} for v in malicious] + [{"score": v, "label": "benign"} for v in benign]
    rng.shuffle(rows)
    out = Path(__file__).with_name("threshold_scores.json")
    out.write_text(json.dumps(rows, indent=1) + "\n")


if __name__ == "__main__":
    main()
