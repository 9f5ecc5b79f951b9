"""Smoke test for the spikefeat_py extension.

Build and install first:
    pip install --no-build-isolation -e crates/python
then run:
    python3 python/smoke_test.py
"""

import os
import random
import tempfile

import spikefeat_py as sf


def check(cond, msg):
    if not cond:
        raise SystemExit(f"FAIL: {msg}")
    print(f"ok: {msg}")


def patches_from(images, side, w_p, n, rng):
    out = []
    for _ in range(n):
        img = images[rng.randrange(len(images))]
        r, c = rng.randrange(side - w_p + 1), rng.randrange(side - w_p + 1)
        # grayscale DoG stack: 2 channels (on, off), HWC order
        patch = []
        for y in range(r, r + w_p):
            start = (y * side + c) * 2
            patch.extend(img[start:start + w_p * 2])
        out.append(patch)
    return out


def main():
    rng = random.Random(0)

    ev = sf.encode_latency([1.0, 0.0, 0.3])
    check(ev == [(0.0, 0), (0.7, 2), (1.0, 1)], "latency code orders inputs by value")
    check(abs(sum(sf.gaussian_kernel(5, 1.0)) - 1.0) < 1e-12, "gaussian kernel is normalized")

    side = 16
    images, labels = sf.make_synthetic(40, side, 2, 1)
    check(len(images) == 40 and len(images[0]) == side * side * 3, "synthetic images have HWC shape")
    coded = [sf.encode_image(im, side, side, 3, "grayscale")[0] for im in images]
    check(all(0.0 <= v <= 1.0 for v in coded[0]), "coded values lie in [0, 1]")

    patches = patches_from(coded, side, 5, 2000, rng)
    snn = sf.Snn(8, 50, seed=3)
    wins = snn.train(patches, 3)
    check(sum(wins) > 0, f"spiking network fires during training (wins {wins})")
    weights = [w for row in snn.weights for w in row]
    check(all(0.0 <= w <= 1.0 for w in weights), "weights stay in [0, 1]")
    feats = snn.extract(patches[0])
    check(sum(1 for f in feats if f > 0) <= 1, "winner-take-all gives at most one active feature")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "snn.dict")
        snn.save(path, 5)
        check(sf.Snn.load(path).weights == snn.weights, "dictionary save/load round trip")

    ae = sf.Ae(8, 50, seed=3, epochs=20, batch_size=64)
    curve = ae.train(patches[:512])
    check(curve[-1] < curve[0], f"auto-encoder loss decreases ({curve[0]:.4f} -> {curve[-1]:.4f})")
    check(len(ae.decode(ae.encode(patches[0]))) == 50, "auto-encoder reconstructs patch shape")

    check(abs(sf.sparseness([0.0, 0.0, 1.0]) - 1.0) < 1e-12, "one-hot sparseness is 1")
    matrix, mean, mx, dead = sf.coherence(snn.weights)
    check(all(abs(matrix[i][i] - 1.0) < 1e-12 for i in range(len(matrix))), "coherence has unit diagonal")

    def blob(n, seed):
        r = random.Random(seed)
        xs, ys = [], []
        for i in range(n):
            y = i % 2
            xs.append([r.uniform(-1, 1) + 2.0 * y, r.uniform(-1, 1)])
            ys.append(y)
        return xs, ys

    acc = sf.linear_accuracy(*blob(100, 1), *blob(100, 2))
    check(acc > 0.9, f"linear classifier separates blobs (accuracy {acc:.2f})")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
