"""Command-line front end: ``smattr {divide,attribute,eval,debug,selftest}``."""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from . import io as sio
from .config import PROFILES, build_oracle, load_config
from .estimator import attribute
from .exceptions import InvalidConfigError, SmattrError
from .geometry import divide, divide_uniform
from .metrics import (
    auc,
    deletion_curve,
    highest_confidence_by_range,
    insertion_curve,
    order_to_saliency,
    write_curve_csv,
)
from .selftest import run_selftest

logger = logging.getLogger("smattr")

RESULT_FILE = "result.json"
SALIENCY_FILE = "saliency.smap"
REGIONS_FILE = "regions.json"
TIMING_FILE = "timing.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidConfigError(f"{self.prog}: {message}")


def _load_inputs(cfg):
    if cfg.image is None:
        raise InvalidConfigError("config lacks an image path")
    image = sio.read_image(cfg.resolve(cfg.image))
    saliency = None
    if cfg.division == "prior":
        if cfg.saliency is None:
            raise InvalidConfigError("prior division needs a saliency path")
        saliency = sio.read_saliency(cfg.resolve(cfg.saliency))
    return image, saliency


def _regions_for(cfg, image, saliency):
    if cfg.division == "uniform":
        return divide_uniform(image, cfg.n)
    return divide(image, saliency, cfg.n, cfg.m)


def _config(args, **overrides):
    cfg = load_config(args.config)
    if getattr(args, "profile", None):
        n, m = PROFILES[args.profile]
        overrides.setdefault("n", n)
        overrides.setdefault("m", m)
    for name in ("n", "m", "k", "threads"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "uniform", False):
        overrides["division"] = "uniform"
    cfg = cfg.with_overrides(**overrides)
    if cfg.division == "uniform":
        cfg.m = cfg.n * cfg.n
    return cfg


def cmd_divide(args):
    image = sio.read_image(args.image)
    saliency = sio.read_saliency(args.saliency)
    regions = divide(image, saliency, args.n, args.m)
    sio.write_regions(regions, args.out)
    logger.info("wrote %d elements of %d patches to %s", regions.m, regions.d, args.out)
    return 0


def _run_attribution(cfg, target_mode=None, category=None):
    image, saliency = _load_inputs(cfg)
    oracle = build_oracle(cfg.oracle, image.shape)
    try:
        t0 = time.perf_counter()
        regions, ctx, result = attribute(
            image, oracle, saliency, n=cfg.n, m=cfg.m, k=cfg.k, lambdas=cfg.lambdas,
            division=cfg.division, target_mode=target_mode or cfg.target_mode,
            category=cfg.category if category is None else category, mode=cfg.mode, n_jobs=cfg.threads,
        )
        elapsed = (time.perf_counter() - t0) * 1000.0
    except BaseException:
        oracle.close()
        raise
    for step, (e, ms) in enumerate(zip(result.order, result.timing_ms)):
        logger.info("step %d: element %d gain %.6g (%.1f ms)", step, e, result.gains[step], ms)
    logger.info("attribution of %d/%d elements took %.1f ms", result.k, regions.m, elapsed)
    return image, regions, oracle, result


def cmd_attribute(args):
    cfg = _config(args)
    out_dir = Path(args.out_dir) if args.out_dir else cfg.resolve(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image, regions, oracle, result = _run_attribution(cfg)
    oracle.close()
    sio.write_result(result, out_dir / RESULT_FILE, config=cfg.echo(), include_timing=False)
    sio.write_float_map(order_to_saliency(regions, result.order), out_dir / SALIENCY_FILE)
    sio.write_regions(regions, out_dir / REGIONS_FILE)
    with open(out_dir / TIMING_FILE, "w") as fh:
        json.dump({"timing_ms": result.timing_ms}, fh, indent=2)
        fh.write("\n")
    print(json.dumps({"order": result.order, "value": result.values[-1], "output_dir": str(out_dir)}))
    return 0


def cmd_eval(args):
    doc = sio.read_result_document(args.order)
    result = sio.result_from_dict(doc, args.order)
    echo = doc.get("config") or {}
    overrides = {key: echo[key] for key in ("n", "m", "division") if echo.get(key) is not None}
    cfg = _config(args, **overrides)
    image, saliency = _load_inputs(cfg)
    regions = _regions_for(cfg, image, saliency)
    with build_oracle(cfg.oracle, image.shape) as oracle:
        make = insertion_curve if args.metric == "insertion" else deletion_curve
        curve = make(image, regions, result.order, args.category, oracle, n_jobs=cfg.threads)
    write_curve_csv(curve, args.out)
    print(f"{args.metric}_auc={auc(curve):.9g}")
    return 0


def cmd_debug(args):
    cfg = _config(args)
    cfg.k = None
    out = Path(args.out) if args.out else cfg.resolve(cfg.output_dir) / "debug_insertion.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    image, regions, oracle, result = _run_attribution(cfg, target_mode="category", category=args.category)
    try:
        curve = insertion_curve(image, regions, result.order, args.category, oracle, n_jobs=cfg.threads)
    finally:
        oracle.close()
    write_curve_csv(curve, out)
    report = highest_confidence_by_range(curve)
    for r, best in zip(report.ranges, report.best):
        print(f"highest_confidence[0-{int(round(r * 100))}%]={best:.9g}")
    print(f"insertion_auc={auc(curve):.9g}")
    return 0


def cmd_selftest(args):
    outcome = run_selftest(trials=args.trials, seed=args.seed, n_bound_instances=args.instances)
    for line in outcome.lines:
        print(line)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(outcome.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if outcome.ok else 4


def build_parser():
    parser = _Parser(prog="smattr", description=__doc__)
    parser.add_argument("--version", action="version", version=f"smattr {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("divide", help="split an image into saliency-ranked sub-regions")
    p.add_argument("--image", required=True)
    p.add_argument("--saliency", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_divide)

    def common(p):
        p.add_argument("--config", required=True)
        p.add_argument("--threads", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)

    p = sub.add_parser("attribute", help="divide and greedily order sub-regions")
    common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--uniform", action="store_true", help="one element per patch, no prior map")
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--out-dir", help="override the config's output_dir")
    p.set_defaults(func=cmd_attribute)

    p = sub.add_parser("eval", help="insertion or deletion curve of a stored ordering")
    common(p)
    p.add_argument("--order", required=True, help="result.json written by attribute")
    p.add_argument("--metric", choices=("insertion", "deletion"), required=True)
    p.add_argument("--category", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("debug", help="search towards a ground-truth category of a mispredicted image")
    common(p)
    p.add_argument("--category", type=int, required=True)
    p.add_argument("--uniform", action="store_true")
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--out")
    p.set_defaults(func=cmd_debug)

    p = sub.add_parser("selftest", help="seeded property checks")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=5)
    p.add_argument("--out", help="write the reports as JSON")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    for old in list(logger.handlers):
        logger.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except SmattrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
