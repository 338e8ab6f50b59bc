"""Digital vs over-the-air classification, end to end.

Trains a complex ridge-regression head (width 49) on a digit dataset,
then replaces the digital layer with the optimized precoder / RIS /
combiner chain and measures accuracy through the noisy channel.

Uses real MNIST IDX files if AIRFC_MNIST_DIR points at them, otherwise
falls back to sklearn's 8x8 digits upscaled to 28x28.
"""
import os

import numpy as np

from airfc import OptimizerOptions, SystemConfig, evaluate_airfc, \
    evaluate_digital, gen_channel_set, run_alternating, train_digital_head
from airfc.mnist import Dataset, featurize_batch, load_mnist_dataset


def load_data():
    d = os.environ.get("AIRFC_MNIST_DIR", "")
    if d and os.path.exists(os.path.join(d, "train-images-idx3-ubyte")):
        train = load_mnist_dataset(os.path.join(d, "train-images-idx3-ubyte"),
                                   os.path.join(d, "train-labels-idx1-ubyte"))
        test = load_mnist_dataset(os.path.join(d, "t10k-images-idx3-ubyte"),
                                  os.path.join(d, "t10k-labels-idx1-ubyte"))
        return train, test, "MNIST"
    from scipy.ndimage import zoom
    from sklearn.datasets import load_digits
    digits = load_digits()
    images = np.clip(np.stack([zoom(img / 16.0, 28 / 8, order=1)
                               for img in digits.images]), 0.0, 1.0)
    feats = featurize_batch(images)
    split = 1200
    return (Dataset(features=feats[:split], labels=digits.target[:split]),
            Dataset(features=feats[split:], labels=digits.target[split:]),
            "sklearn digits (upscaled)")


train, test, name = load_data()
print(f"dataset: {name} ({len(train)} train / {len(test)} test)")

head = train_digital_head(train, mu=1e-2)
print(f"digital accuracy: {evaluate_digital(head, test):.4f}")

for l in (1, 4):
    cfg = SystemConfig(n=49, m=196, l=l, k_db=10.0, pmax=10.0, sigma2=1e-3)
    cs = gen_channel_set(cfg, np.random.default_rng(7))
    params, report = run_alternating(cfg, cs, head.w,
                                     OptimizerOptions(max_iters=120, seed=0))
    acc = evaluate_airfc(params, cs, head, test, cfg.sigma2,
                         np.random.default_rng(1))
    print(f"L={l}: imitation error {report.imitation_error:.3e}, "
          f"air accuracy {acc:.4f}")
