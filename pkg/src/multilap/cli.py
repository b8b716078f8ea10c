"""Command-line front end.

    multilap enhance --preset sharpen in.png out.png
    multilap enhance --config my.cfg --set curve.high.a=30 in.png out.png
    multilap --benchmark [--bench-windows 3,5] [--bench-sizes 0.4,1] [--report DIR]
    multilap --verify

Exit codes: 0 ok, 2 unreadable input, 64 usage / bad configuration,
70 internal invariant failure, 1 when --verify finds a failing check.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfgio
from .bench import DEFAULT_SIZES, DEFAULT_WINDOWS, format_rows, run_benchmark
from .imageio import SUFFIXES, read_image, signed_to_unit, write_image
from .maskblend import mask_from_degrees
from .pipeline import InvariantError, enhance_detailed, layer_names, resolve_preset

EX_OK, EX_FAIL, EX_NOINPUT, EX_USAGE, EX_SOFTWARE = 0, 1, 2, 64, 70

PRESET_CHOICES = ("smooth", "sharpen", "denoise-sharpen", "identity")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _csv(kind):
    def parse(text):
        try:
            return tuple(kind(v) for v in text.split(",") if v)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="multilap", description="Fast multi-layer Laplacian image enhancement.")
    p.add_argument("args", nargs="*", metavar="[enhance] IN OUT")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=PRESET_CHOICES)
    src.add_argument("--config", type=Path, metavar="PATH")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")
    p.add_argument("--color", choices=("luma", "rgb"))
    p.add_argument("--window", type=int, metavar="R", help="window radius")
    p.add_argument("--patch", type=int, metavar="Q", help="patch radius")
    p.add_argument("--h", type=float, metavar="H", help="largest smoothing parameter h1")
    p.add_argument("--levels", type=int, metavar="K")
    p.add_argument("--norm", choices=("exact", "fast"))
    p.add_argument("--alpha", metavar="{closed|trace|invmean|FLOAT}")
    p.add_argument("--mask", choices=("on", "off"))
    p.add_argument("--dump-layers", type=Path, metavar="DIR")
    p.add_argument("--dump-mask", type=Path, metavar="PATH")
    p.add_argument("--dump-degrees", type=Path, metavar="PATH")
    p.add_argument("--dump-config", type=Path, metavar="PATH",
                   help="write the resolved configuration")
    p.add_argument("--plot-curves", type=Path, metavar="PATH",
                   help="render the resolved per-layer curves")
    p.add_argument("--benchmark", action="store_true")
    p.add_argument("--bench-windows", type=_csv(int), default=DEFAULT_WINDOWS, metavar="LIST")
    p.add_argument("--bench-sizes", type=_csv(float), default=DEFAULT_SIZES, metavar="LIST")
    p.add_argument("--bench-repeats", type=int, default=1, metavar="N")
    p.add_argument("--report", type=Path, metavar="DIR",
                   help="write benchmark.tsv and benchmark.png here")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--threads", type=int, default=1, metavar="N")
    return p


def resolve_config(ns: argparse.Namespace, require_source: bool = True):
    if ns.preset:
        items = cfgio.to_mapping(resolve_preset(ns.preset))
    elif ns.config:
        try:
            items = cfgio.parse_lines(ns.config.read_text())
        except OSError as e:
            raise UsageError(f"cannot read config {ns.config}: {e}") from None
        except cfgio.ConfigError as e:
            raise UsageError(f"{ns.config}: {e}") from None
    elif require_source:
        raise UsageError("one of --preset or --config is required")
    else:
        items = cfgio.to_mapping(resolve_preset("sharpen"))
    flags = {"color": ns.color, "window": ns.window, "patch": ns.patch, "h": ns.h,
             "levels": ns.levels, "norm": ns.norm, "alpha": ns.alpha, "mask": ns.mask}
    for key, value in flags.items():
        if value is not None:
            items[key] = str(value)
    for kv in ns.set:
        if "=" not in kv:
            raise UsageError(f"--set expects KEY=VALUE, got {kv!r}")
        key, value = (s.strip() for s in kv.split("=", 1))
        items[key] = value
    if ns.levels is not None:
        # curves of layers that no longer exist are dropped, new ones default to identity
        keep = set(layer_names(max(ns.levels, 1)))
        items = {k: v for k, v in items.items()
                 if not k.startswith("curve.") or k.split(".")[1] in keep}
    try:
        return cfgio.from_mapping(items)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _stack_channels(planes):
    if len(planes) == 1:
        return planes[0]
    return np.stack(planes, axis=-1)


def write_dumps(ns, result, config) -> None:
    planes = result.planes
    if ns.dump_layers:
        ns.dump_layers.mkdir(parents=True, exist_ok=True)
        for idx, name in enumerate(layer_names(config.k)):
            layer = _stack_channels([p.stack.layers[idx] for p in planes])
            img = np.clip(layer, 0, 1) if name == "base" else signed_to_unit(layer)
            write_image(ns.dump_layers / f"{name}.png", img)
    if ns.dump_mask:
        masks = [mask_from_degrees(p.degrees[config.mask_source_level - 1], p.valid_count,
                                   config.mask_gamma) for p in planes]
        write_image(ns.dump_mask, _stack_channels(masks))
    if ns.dump_degrees:
        ratio = [np.clip(p.degrees[0] / p.valid_count, 0, 1) for p in planes]
        write_image(ns.dump_degrees, _stack_channels(ratio))


def cmd_enhance(ns) -> int:
    args = list(ns.args)
    if args and args[0] == "enhance":
        args = args[1:]
    if len(args) != 2:
        raise UsageError("enhance needs exactly an input and an output path")
    src, dst = Path(args[0]), Path(args[1])
    if dst.suffix.lower() not in SUFFIXES:
        raise UsageError(f"unsupported output format {dst.suffix!r}; use one of {sorted(SUFFIXES)}")
    config = resolve_config(ns)
    if ns.dump_config:
        ns.dump_config.write_text(cfgio.dumps(config))
    if ns.plot_curves:
        from .report import plot_curves
        plot_curves(dict(zip(layer_names(config.k), config.curves)), ns.plot_curves)
    try:
        image = read_image(src)
    except (OSError, ValueError) as e:
        print(f"multilap: cannot read {src}: {e}", file=sys.stderr)
        return EX_NOINPUT
    result = enhance_detailed(image, config, threads=ns.threads)
    write_image(dst, result.image)
    write_dumps(ns, result, config)
    return EX_OK


def cmd_benchmark(ns) -> int:
    config = resolve_config(ns, require_source=False)
    if not ns.bench_windows or not ns.bench_sizes or ns.bench_repeats < 1:
        raise UsageError("benchmark needs windows, sizes and repeats >= 1")
    try:
        rows = run_benchmark(ns.bench_windows, ns.bench_sizes, config,
                             repeats=ns.bench_repeats, threads=ns.threads)
    except ValueError as e:
        raise UsageError(str(e)) from None
    text = format_rows(rows)
    sys.stdout.write(text)
    if ns.report:
        from .report import plot_benchmark
        ns.report.mkdir(parents=True, exist_ok=True)
        (ns.report / "benchmark.tsv").write_text(text)
        plot_benchmark(rows, ns.report / "benchmark.png")
    return EX_OK


def cmd_verify(ns) -> int:
    from .verify import run_checks

    def show(c):
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  [{c.detail}]")

    checks = run_checks(show)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EX_OK if failed == 0 else EX_FAIL


def run(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_intermixed_args(argv)
    if ns.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        if ns.verify:
            return cmd_verify(ns)
        if ns.benchmark:
            return cmd_benchmark(ns)
        return cmd_enhance(ns)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"multilap: error: {e}", file=sys.stderr)
        return EX_USAGE
    except InvariantError as e:
        print(f"multilap: internal invariant failed: {e}", file=sys.stderr)
        return EX_SOFTWARE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
