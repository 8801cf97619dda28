"""Brute-force confusion tallies used as an oracle for the metrics module."""

import numpy as np

from rasec.domain import BOUNDARY, INSIDE, OUTSIDE


def random_instance(rng, shape=(10, 10)):
    labels = rng.choice([OUTSIDE, INSIDE, BOUNDARY], size=shape, p=[0.5, 0.35, 0.15])
    mask = rng.random(shape) < rng.uniform(0.1, 0.9)
    return mask, labels


def brute_force_counts(mask, labels):
    tp = fp = fn = tn = ex = 0
    for m, lab in zip(np.ravel(mask).tolist(), np.ravel(labels).tolist()):
        if lab == BOUNDARY:
            ex += 1
        elif lab == INSIDE:
            tp, fn = (tp + 1, fn) if m else (tp, fn + 1)
        else:
            fp, tn = (fp + 1, tn) if m else (fp, tn + 1)
    return tp, fp, fn, tn, ex


def separable_field(rng, labels):
    """Scores where every inside candidate outranks every outside one."""
    mu = rng.uniform(0.0, 1.0, size=labels.shape)
    return np.where(labels == INSIDE, mu + 1.0, mu)


def threshold_sweep(mu, labels, steps=20):
    from rasec.metrics import classify_field, confusion_report

    grid = np.linspace(mu.min() - 0.1, mu.max() + 0.1, steps)
    return [confusion_report(classify_field(mu, t), labels) for t in grid]
