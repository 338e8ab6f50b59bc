"""MNIST-style classification harness.

Pipeline: IDX files -> 4x4 average-pooled 7x7 features embedded as
unit-norm complex vectors of width 49 -> complex ridge-regression head
(W, b) trained to one-hot targets -> digital evaluation, or over-the-air
evaluation through an optimized AirLayer. The readout takes the real
parts of the first 10 outputs and predicts the argmax.
"""
import gzip
import struct
from dataclasses import dataclass

import numpy as np

from .airsim import AirLayer, sample_noise
from .channel import ChannelSet, effective_channel
from .numerics import solve_shifted_hermitian
from .optimizer import AirFcParams

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049
NUM_CLASSES = 10


class IdxFormatError(ValueError):
    """Malformed IDX file (bad magic, truncation, or dimension mismatch)."""


def _open_maybe_gzip(path):
    with open(path, "rb") as f:
        head = f.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx(path) -> np.ndarray:
    """Parse an IDX file into a float array (images scaled to [0, 1]) or
    an integer label vector.

    Images: magic 2051, dims [count, rows, cols]. Labels: magic 2049,
    dims [count]. All header integers are big-endian 32-bit.
    """
    with _open_maybe_gzip(path) as f:
        header = f.read(4)
        if len(header) < 4:
            raise IdxFormatError(f"{path}: truncated header")
        (magic,) = struct.unpack(">I", header)
        if magic == IMAGE_MAGIC:
            ndim = 3
        elif magic == LABEL_MAGIC:
            ndim = 1
        else:
            raise IdxFormatError(f"{path}: bad magic {magic}")
        raw_dims = f.read(4 * ndim)
        if len(raw_dims) < 4 * ndim:
            raise IdxFormatError(f"{path}: truncated dimension header")
        dims = struct.unpack(f">{ndim}I", raw_dims)
        expected = int(np.prod(dims))
        data = f.read(expected)
        if len(data) < expected:
            raise IdxFormatError(
                f"{path}: expected {expected} data bytes, got {len(data)}")
    arr = np.frombuffer(data, dtype=np.uint8).reshape(dims)
    if magic == LABEL_MAGIC:
        return arr.astype(np.int64)
    return arr.astype(np.float64) / 255.0


def featurize(image: np.ndarray) -> np.ndarray:
    """28x28 image -> unit-norm complex feature vector of length 49.

    4x4 average pooling down to 7x7, flattened row-major, embedded on
    the real axis, then L2-normalized. The all-zero image maps to the
    zero vector.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.shape != (28, 28):
        raise ValueError(f"expected a 28x28 image, got {image.shape}")
    pooled = image.reshape(7, 4, 7, 4).mean(axis=(1, 3)).reshape(49)
    x = pooled.astype(np.complex128)
    nrm = np.linalg.norm(x)
    return x / nrm if nrm > 0 else x


def featurize_batch(images: np.ndarray) -> np.ndarray:
    """Vectorized featurize over a (count, 28, 28) stack; returns (count, 49)."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 3 or images.shape[1:] != (28, 28):
        raise ValueError(f"expected (count, 28, 28) images, got {images.shape}")
    pooled = images.reshape(-1, 7, 4, 7, 4).mean(axis=(2, 4)).reshape(-1, 49)
    x = pooled.astype(np.complex128)
    nrm = np.linalg.norm(x, axis=1, keepdims=True)
    return np.divide(x, nrm, out=x, where=nrm > 0)


@dataclass
class Dataset:
    """Unit-norm complex features (count, N) with integer labels 0..9."""
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.features.ndim != 2 or len(self.features) != len(self.labels):
            raise ValueError("features/labels size mismatch")

    @property
    def n(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return len(self.labels)


@dataclass
class DigitalHead:
    """Complex FC layer y = W x + b; logits are Re(y_k), k = 0..9."""
    w: np.ndarray
    b: np.ndarray


def one_hot_targets(labels: np.ndarray, n: int) -> np.ndarray:
    """Targets (n, count): one-hot of the label in rows 0..9, zeros elsewhere."""
    t = np.zeros((n, len(labels)), dtype=np.complex128)
    t[labels, np.arange(len(labels))] = 1.0
    return t


def train_digital_head(train: Dataset, mu: float = 1e-2) -> DigitalHead:
    """Complex ridge regression with a bias row.

    Solves [W b] = T Xa^H (Xa Xa^H + mu I)^{-1}, where Xa stacks the
    feature matrix (N x count) on a constant-1 row.
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    if mu <= 0:
        raise ValueError("mu must be positive")
    n = train.n
    xa = np.vstack([train.features.T,
                    np.ones((1, len(train)), dtype=np.complex128)])
    t = one_hot_targets(train.labels, n)
    gram = xa @ np.conj(xa.T)
    gram = 0.5 * (gram + np.conj(gram.T))
    wb = np.conj(solve_shifted_hermitian(gram, mu, xa @ np.conj(t.T)).T)
    return DigitalHead(w=wb[:, :n], b=wb[:, n])


def _predict(outputs: np.ndarray) -> np.ndarray:
    """Argmax of real parts of the first 10 outputs; ties go to the smallest index."""
    return np.argmax(np.real(outputs[:NUM_CLASSES, :]), axis=0)


def evaluate_digital(head: DigitalHead, test: Dataset) -> float:
    y = head.w @ test.features.T + head.b[:, None]
    return float(np.mean(_predict(y) == test.labels))


def evaluate_airfc(params: AirFcParams, cs: ChannelSet, head: DigitalHead,
                   test: Dataset, sigma2: float,
                   rng: np.random.Generator) -> float:
    """Over-the-air accuracy with fresh noise per test sample."""
    layer = AirLayer(params=params, cs=cs, b=head.b, sigma2=sigma2)
    h_eff = effective_channel(cs, params.v)
    noise = sample_noise(cs.n, sigma2, rng, count=len(test))
    y = layer.params.f2 @ (h_eff @ (layer.params.f1 @ test.features.T) + noise) \
        + head.b[:, None]
    return float(np.mean(_predict(y) == test.labels))


def load_mnist_dataset(images_path, labels_path) -> Dataset:
    """Read an IDX image/label pair and featurize it."""
    images = load_idx(images_path)
    labels = load_idx(labels_path)
    if images.ndim != 3:
        raise IdxFormatError(f"{images_path}: not an image file")
    if labels.ndim != 1:
        raise IdxFormatError(f"{labels_path}: not a label file")
    if len(images) != len(labels):
        raise IdxFormatError("image/label counts differ")
    return Dataset(features=featurize_batch(images), labels=labels)
