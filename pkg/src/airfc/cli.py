"""Experiment runner: config parsing, deterministic sweeps, fixture I/O.

Subcommands:
    optimize      single run at the first grid point, prints the report
    sweep         full (M, L, K, pmax) x seed grid -> CSV
    classify      MNIST harness end-to-end (digital vs over-the-air accuracy)
    gen-channels  write a ChannelSet fixture for the first grid point
    check         quick oracle/property self-checks on small instances

Determinism: every run derives its random streams from
SeedSequence([master_seed, seed, m, l, bits(k_db), bits(pmax_db)]) where
bits() is the IEEE-754 bit pattern of the float axis value, so changing
one axis value never perturbs any other run's streams.
"""
import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass

import numpy as np
import yaml

from .channel import SystemConfig, ChannelSet, gen_channel_set
from .mnist import evaluate_airfc, evaluate_digital, load_mnist_dataset, \
    train_digital_head
from .numerics import as_complex_matrix
from .optimizer import OptimizerOptions, run_alternating

CSV_HEADER = ["seed", "n", "m", "l", "k_db", "pmax_db", "sigma2", "iters",
              "converged", "objective", "imitation_error", "noise_term",
              "lambda", "elapsed_ms"]

_CONFIG_KEYS = {"n", "m", "l", "k_db", "pmax_db", "sigma2", "seeds", "tol",
                "max_iters", "inner_iters", "eps_bisect", "mu_ridge",
                "weights_path", "mode"}
_REQUIRED_KEYS = {"n", "m", "l", "k_db", "pmax_db", "sigma2", "seeds"}


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunSpec:
    n: int
    m: list
    l: list
    k_db: list
    pmax_db: list
    sigma2: float
    seeds: list
    tol: float = 1e-5
    max_iters: int = 200
    inner_iters: int = 1
    eps_bisect: float = 1e-8
    mu_ridge: float = 1e-2
    weights_path: str = None
    mode: str = "random"


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _as_list(value, key, cast):
    if isinstance(value, str) and ".." in value:
        lo, hi = value.split("..")
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise ConfigError(f"{key}: bad range syntax {value!r}")
    if not isinstance(value, list):
        value = [value]
    try:
        return [cast(x) for x in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {cast.__name__} values, got {value!r}")


def parse_config(text: str) -> RunSpec:
    """Parse a YAML key/value config document into a validated RunSpec."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"malformed config: {e}")
    if not isinstance(doc, dict):
        raise ConfigError("config must be a key/value document")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key: {sorted(unknown)[0]}")
    missing = _REQUIRED_KEYS - set(doc)
    if missing:
        raise ConfigError(f"missing config key: {sorted(missing)[0]}")

    spec = RunSpec(
        n=int(doc["n"]),
        m=_as_list(doc["m"], "m", int),
        l=_as_list(doc["l"], "l", int),
        k_db=_as_list(doc["k_db"], "k_db", float),
        pmax_db=_as_list(doc["pmax_db"], "pmax_db", float),
        sigma2=float(doc["sigma2"]),
        seeds=_as_list(doc["seeds"], "seeds", int),
        tol=float(doc.get("tol", 1e-5)),
        max_iters=int(doc.get("max_iters", 200)),
        inner_iters=int(doc.get("inner_iters", 1)),
        eps_bisect=float(doc.get("eps_bisect", 1e-8)),
        mu_ridge=float(doc.get("mu_ridge", 1e-2)),
        weights_path=doc.get("weights_path"),
        mode=str(doc.get("mode", "random")),
    )
    if spec.n < 1:
        raise ConfigError("n: must be positive")
    if spec.sigma2 < 0:
        raise ConfigError("sigma2: must be nonnegative")
    if spec.mode not in ("random", "file"):
        raise ConfigError(f"mode: unknown mode {spec.mode!r}")
    if spec.mode == "file" and not spec.weights_path:
        raise ConfigError("weights_path: required when mode is 'file'")
    for m in spec.m:
        for l in spec.l:
            if l < 1 or m < 1 or m % l != 0:
                raise ConfigError(f"m: {m} is not divisible by l={l}")
    return spec


# ---------------------------------------------------------------------------
# Fixture I/O: matrices as diff-able JSON text documents.

def write_matrix(a: np.ndarray, fp) -> None:
    """Write {rows, cols, data_re, data_im} with 17-significant-digit floats."""
    a = as_complex_matrix(a)
    doc = {
        "rows": a.shape[0],
        "cols": a.shape[1],
        "data_re": [format(x, ".17g") for x in a.real.ravel()],
        "data_im": [format(x, ".17g") for x in a.imag.ravel()],
    }
    json.dump(doc, fp, indent=1)
    fp.write("\n")


def read_matrix(fp) -> np.ndarray:
    try:
        doc = json.load(fp)
    except json.JSONDecodeError as e:
        raise ValueError(f"malformed matrix file: {e}")
    for key in ("rows", "cols", "data_re", "data_im"):
        if key not in doc:
            raise ValueError(f"matrix file missing field {key!r}")
    rows, cols = int(doc["rows"]), int(doc["cols"])
    re = np.array([float(x) for x in doc["data_re"]])
    im = np.array([float(x) for x in doc["data_im"]])
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError(f"matrix file data length does not match {rows}x{cols}")
    return (re + 1j * im).reshape(rows, cols)


def save_matrix(a: np.ndarray, path) -> None:
    with open(path, "w") as fp:
        write_matrix(a, fp)


def load_matrix(path) -> np.ndarray:
    with open(path) as fp:
        return read_matrix(fp)


def save_channel_set(cs: ChannelSet, path) -> None:
    """ChannelSet fixture: per-RIS matrices in the matrix file format."""
    def doc(a):
        buf = io.StringIO()
        write_matrix(a, buf)
        return json.loads(buf.getvalue())

    with open(path, "w") as fp:
        json.dump({"l": cs.num_ris,
                   "h_bar": [doc(a) for a in cs.h_bar],
                   "h_hat": [doc(a) for a in cs.h_hat]}, fp, indent=1)
        fp.write("\n")


def load_channel_set(path) -> ChannelSet:
    with open(path) as fp:
        doc = json.load(fp)

    def mat(d):
        return read_matrix(io.StringIO(json.dumps(d)))

    return ChannelSet(h_bar=[mat(d) for d in doc["h_bar"]],
                      h_hat=[mat(d) for d in doc["h_hat"]])


# ---------------------------------------------------------------------------
# Sweep execution.

def _float_bits(x: float) -> int:
    return int(np.float64(x).view(np.uint64))


def _run_seed_seq(master_seed: int, seed: int, m: int, l: int,
                  k_db: float, pmax_db: float) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        [master_seed, seed, m, l, _float_bits(k_db), _float_bits(pmax_db)])


def random_unit_column_weights(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random complex N x N target with unit-norm columns."""
    w = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return w / np.linalg.norm(w, axis=0, keepdims=True)


def _target_weights(spec: RunSpec, master_seed: int, seed: int,
                    w_override: np.ndarray):
    if w_override is not None:
        return w_override
    if spec.mode == "file":
        return load_matrix(spec.weights_path)
    # mode "random": W depends on the seed only, so it is held fixed
    # across the grid axes and sweep curves stay comparable.
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, seed, 0x57]))
    return random_unit_column_weights(spec.n, rng)


def run_sweep(spec: RunSpec, master_seed: int = 0, w_override=None,
              include_timing: bool = False):
    """Execute the full grid and return CSV rows (list of lists).

    Rows are emitted in grid order: (m, l, k_db, pmax_db) nested in that
    order, seeds innermost. With include_timing=False (the default)
    elapsed_ms is written as 0 so identical specs yield byte-identical
    CSV output.
    """
    rows = []
    for m in spec.m:
        for l in spec.l:
            for k_db in spec.k_db:
                for pmax_db in spec.pmax_db:
                    for seed in spec.seeds:
                        rows.append(_run_one(spec, master_seed, seed, m, l,
                                             k_db, pmax_db, w_override,
                                             include_timing))
    return rows


def _run_one(spec, master_seed, seed, m, l, k_db, pmax_db, w_override,
             include_timing):
    cfg = SystemConfig(n=spec.n, m=m, l=l, k_db=k_db,
                       los_only=bool(np.isinf(k_db)),
                       pmax=db_to_linear(pmax_db), sigma2=spec.sigma2)
    ss = _run_seed_seq(master_seed, seed, m, l, k_db, pmax_db)
    ch_ss, v_ss = ss.spawn(2)
    cs = gen_channel_set(cfg, np.random.default_rng(ch_ss))
    w = _target_weights(spec, master_seed, seed, w_override)
    opts = OptimizerOptions(max_iters=spec.max_iters, tol=spec.tol,
                            eps_bisect=spec.eps_bisect,
                            inner_iters=spec.inner_iters,
                            seed=int(v_ss.generate_state(1)[0]))
    t0 = time.perf_counter()
    _, report = run_alternating(cfg, cs, w, opts)
    elapsed_ms = int(round(1000.0 * (time.perf_counter() - t0)))
    return [seed, spec.n, m, l, repr(float(k_db)), repr(float(pmax_db)),
            repr(spec.sigma2), report.iterations, int(report.converged),
            repr(float(report.objective_trace[-1])),
            repr(report.imitation_error), repr(report.noise_term),
            repr(report.lam), elapsed_ms if include_timing else 0]


def write_csv(rows, fp) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)


# ---------------------------------------------------------------------------
# Self-check suite (small instances; seconds, not minutes).

def run_checks(out=None) -> bool:
    from .airsim import expected_noise_power, sample_noise
    from .channel import effective_channel, random_phase_vector
    from .numerics import frobenius_norm_sq
    from .optimizer import build_mm_terms, mm_phase_step, lam_max_bound, \
        phase_quadratic, update_combiner, update_precoder

    out = out if out is not None else sys.stdout
    rng = np.random.default_rng(0)
    ok = True

    def report(name, passed):
        nonlocal ok
        ok = ok and passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}", file=out)

    cfg = SystemConfig(n=3, m=6, l=2, k_db=10.0, pmax=5.0, sigma2=0.5)
    cs = gen_channel_set(cfg, rng)
    w = random_unit_column_weights(cfg.n, rng)
    _, rep = run_alternating(cfg, cs, w, OptimizerOptions(seed=1))
    tr = rep.objective_trace
    report("objective trace non-increasing",
           bool(np.all(np.diff(tr) <= 1e-9 * np.maximum(1.0, tr[:-1]))))

    v = random_phase_vector(cfg.m, rng)
    f2 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    f1, lam = update_precoder(f2, v, cs, w, pmax=0.5)
    report("precoder power feasible",
           frobenius_norm_sq(f1) <= 0.5 * (1 + 1e-6) and lam >= 0)

    f1r = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    f2o = update_combiner(f1r, v, cs, w, sigma2=0.3)
    ub = effective_channel(cs, v) @ f1r
    resid = np.linalg.norm((f2o @ ub - w) @ np.conj(ub.T) + 0.3 * f2o)
    report("combiner stationarity residual <= 1e-8", resid <= 1e-8)

    omega, phi = build_mm_terms(f1r, f2o, cs, w)
    lam_max = lam_max_bound(omega)
    v2 = mm_phase_step(v, omega, phi, lam_max)
    report("MM phase step descends",
           phase_quadratic(v2, omega, phi) <= phase_quadratic(v, omega, phi) + 1e-9)

    f2n = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    samples = f2n @ sample_noise(4, 2.0, rng, count=100_000)
    mc = float(np.mean(np.sum(np.abs(samples) ** 2, axis=0)))
    ref = expected_noise_power(f2n, 2.0)
    report("noise power identity within 2%", abs(mc - ref) <= 0.02 * ref)

    return ok


# ---------------------------------------------------------------------------
# CLI entry points.

def _read_spec(args) -> RunSpec:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    with open(args.config) as fp:
        return parse_config(fp.read())


def _cmd_optimize(args) -> int:
    spec = _read_spec(args)
    row = _run_one(spec, args.seed, spec.seeds[0], spec.m[0], spec.l[0],
                   spec.k_db[0], spec.pmax_db[0],
                   load_matrix(args.weights) if args.weights else None,
                   include_timing=True)
    for key, value in zip(CSV_HEADER, row):
        print(f"{key}: {value}")
    return 0


def _cmd_sweep(args) -> int:
    spec = _read_spec(args)
    w_override = load_matrix(args.weights) if args.weights else None
    rows = run_sweep(spec, master_seed=args.seed, w_override=w_override,
                     include_timing=args.timing)
    if args.out:
        with open(args.out, "w") as fp:
            write_csv(rows, fp)
    else:
        write_csv(rows, sys.stdout)
    return 0


def _cmd_classify(args) -> int:
    if not args.mnist_dir:
        print("classify requires --mnist-dir", file=sys.stderr)
        return 2
    import os
    d = args.mnist_dir

    def pick(*names):
        for name in names:
            p = os.path.join(d, name)
            if os.path.exists(p):
                return p
        raise FileNotFoundError(f"none of {names} under {d}")

    train = load_mnist_dataset(
        pick("train-images-idx3-ubyte", "train-images-idx3-ubyte.gz"),
        pick("train-labels-idx1-ubyte", "train-labels-idx1-ubyte.gz"))
    test = load_mnist_dataset(
        pick("t10k-images-idx3-ubyte", "t10k-images-idx3-ubyte.gz"),
        pick("t10k-labels-idx1-ubyte", "t10k-labels-idx1-ubyte.gz"))

    if args.config:
        with open(args.config) as fp:
            doc = yaml.safe_load(fp.read()) or {}
    else:
        doc = {}
    doc.setdefault("n", train.n)
    doc.setdefault("m", [4 * train.n])
    doc.setdefault("l", [4])
    doc.setdefault("k_db", [10.0])
    doc.setdefault("pmax_db", [10.0])
    doc.setdefault("sigma2", 1e-3)
    doc.setdefault("seeds", [0])
    spec = parse_config(yaml.safe_dump(doc))

    head = train_digital_head(train, mu=spec.mu_ridge)
    digital_acc = evaluate_digital(head, test)
    print(f"digital accuracy: {digital_acc:.4f}")

    m, l, k_db, pmax_db, seed = (spec.m[0], spec.l[0], spec.k_db[0],
                                 spec.pmax_db[0], spec.seeds[0])
    cfg = SystemConfig(n=spec.n, m=m, l=l, k_db=k_db,
                       los_only=bool(np.isinf(k_db)),
                       pmax=db_to_linear(pmax_db), sigma2=spec.sigma2)
    ss = _run_seed_seq(args.seed, seed, m, l, k_db, pmax_db)
    ch_ss, v_ss = ss.spawn(2)
    cs = gen_channel_set(cfg, np.random.default_rng(ch_ss))
    opts = OptimizerOptions(max_iters=spec.max_iters, tol=spec.tol,
                            eps_bisect=spec.eps_bisect,
                            inner_iters=spec.inner_iters,
                            seed=int(v_ss.generate_state(1)[0]))
    params, report = run_alternating(cfg, cs, head.w, opts)
    print(f"imitation error: {report.imitation_error:.6g} "
          f"(after {report.iterations} iterations)")
    air_acc = evaluate_airfc(params, cs, head, test, spec.sigma2,
                             np.random.default_rng(ss.spawn(1)[0]))
    print(f"air accuracy: {air_acc:.4f}")
    return 0


def _cmd_gen_channels(args) -> int:
    spec = _read_spec(args)
    m, l, k_db, pmax_db = spec.m[0], spec.l[0], spec.k_db[0], spec.pmax_db[0]
    cfg = SystemConfig(n=spec.n, m=m, l=l, k_db=k_db,
                       los_only=bool(np.isinf(k_db)),
                       pmax=db_to_linear(pmax_db), sigma2=spec.sigma2)
    ss = _run_seed_seq(args.seed, spec.seeds[0], m, l, k_db, pmax_db)
    cs = gen_channel_set(cfg, np.random.default_rng(ss.spawn(2)[0]))
    out = args.out or "channels.json"
    save_channel_set(cs, out)
    print(f"wrote {out}")
    return 0


def _cmd_check(args) -> int:
    return 0 if run_checks() else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="airfc",
        description="Multi-RIS over-the-air FC-layer imitation experiments")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads (affects wall time only, never results)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="YAML run configuration")
        p.add_argument("--out", help="output path")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--weights", help="target W matrix file")
        p.add_argument("--mnist-dir", help="directory with MNIST IDX files")

    p = sub.add_parser("optimize", help="single run, print the report")
    common(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("sweep", help="run the full grid and emit CSV")
    common(p)
    p.add_argument("--timing", action="store_true",
                   help="record real elapsed_ms (breaks byte-for-byte determinism)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("classify", help="MNIST digital vs over-the-air accuracy")
    common(p, config_required=False)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("gen-channels", help="write a ChannelSet fixture")
    common(p)
    p.set_defaults(func=_cmd_gen_channels)

    p = sub.add_parser("check", help="run small oracle/property self-checks")
    common(p, config_required=False)
    p.set_defaults(func=_cmd_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
