"""Batch CLI over the library.

Exit codes: 0 ok, 2 usage, 3 format/config error, 4 numeric failure.
Every subcommand is a thin shell over a library call; --json emits a
machine-readable report on stdout.
"""

from __future__ import annotations

import argparse
import glob
import json
import sys
from pathlib import Path

import numpy as np

from . import bundleio, calib, metrics
from .errors import ConfigError, FormatError, IspError, NumericError
from .pipeline import RenderRecipe, render
from .presets import load_builtin_styles, load_style_dir
from .service import encode_jpeg, encode_png

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_NUMERIC = 4


def _load_image(path: str) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=float) / 255.0
    return arr


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")


def _build_recipe(args) -> RenderRecipe:
    if args.recipe:
        data = json.loads(Path(args.recipe).read_text())
        return RenderRecipe.from_dict(data)
    recipe = RenderRecipe(
        styles=[args.style],
        weights=[1.0],
        enable_denoise=not args.no_denoise,
        enable_lut3d=not args.no_3dlut,
        multiscale_ltm=args.multiscale,
        refine_ltm=args.refine,
        preview_scale=args.preview_scale,
    )
    return recipe


def _cmd_render(args) -> int:
    styles = load_builtin_styles()
    if args.style_dir:
        styles.update(load_style_dir(args.style_dir))
    recipe = _build_recipe(args)
    inputs = sorted(glob.glob(args.bundle)) or [args.bundle]
    out_path = Path(args.output)
    multi = len(inputs) > 1
    if multi and out_path.suffix:
        raise ConfigError("output must be a directory when rendering multiple bundles")

    def render_one(mosaic_path: str) -> dict:
        bundle = bundleio.read_bundle(mosaic_path)
        result = render(bundle, recipe, styles)
        target = out_path / (Path(mosaic_path).stem + ".jpg") if multi else out_path
        target.parent.mkdir(parents=True, exist_ok=True)
        if target.suffix.lower() == ".png":
            target.write_bytes(encode_png(result.image))
        else:
            jpeg = encode_jpeg(result.image)
            if args.embed_raw:
                jpeg = bundleio.embed_raw(jpeg, bundle, recipe.to_dict())
            target.write_bytes(jpeg)
        return {"input": mosaic_path, "output": str(target),
                "applied_ev": result.applied_ev}

    if multi and args.jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(render_one, inputs))
    else:
        reports = [render_one(p) for p in inputs]
    _emit({"rendered": reports}, args.json)
    return EXIT_OK


def _cmd_extract(args) -> int:
    data = Path(args.input).read_bytes()
    result = bundleio.extract_raw(data)
    if result is None:
        print("no embedded raw", file=sys.stderr)
        return EXIT_FORMAT
    jpeg, bundle, recipe = result
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    bundleio.write_bundle(bundle, out)
    if args.recipe_out:
        Path(args.recipe_out).write_text(json.dumps(recipe, indent=2, sort_keys=True) + "\n")
    _emit({"mosaic": str(out), "jpeg_bytes": len(jpeg),
           "recipe": recipe if args.json else json.dumps(recipe)}, args.json)
    return EXIT_OK


def _cmd_noise_fit(args) -> int:
    stats = json.loads(Path(args.stats).read_text())
    if not isinstance(stats, list):
        raise FormatError("noise stats must be a JSON list", field="stats")
    rows = []
    for i, entry in enumerate(stats):
        try:
            rows.append((entry["mean"], entry["variance"], entry["iso"], entry["channel"]))
        except (TypeError, KeyError) as exc:
            raise FormatError(f"bad stats entry {i}: missing {exc}", field=f"stats[{i}]")
    model = calib.fit_noise_model(rows)
    payload = model.params_table()
    if args.output:
        Path(args.output).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _emit(payload, args.json)
    return EXIT_OK


def _cmd_ccm_fit(args) -> int:
    data = json.loads(Path(args.pixels).read_text())
    try:
        raw = np.asarray(data["wb_raw"], dtype=float)
        srgb = np.asarray(data["srgb_linear"], dtype=float)
    except (TypeError, KeyError) as exc:
        raise FormatError(f"pixel file needs wb_raw and srgb_linear: {exc}", field="pixels")
    ccm = calib.fit_ccm_constrained(raw, srgb)
    payload = {"ccm": ccm.tolist(), "row_sums": ccm.sum(axis=1).tolist()}
    if args.output:
        Path(args.output).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _emit(payload, args.json)
    return EXIT_OK


def _cmd_cm_fit(args) -> int:
    data = json.loads(Path(args.pixels).read_text())
    try:
        lin = np.asarray(data["linear_estimate"], dtype=float)
        raw = np.asarray(data["raw"], dtype=float)
    except (TypeError, KeyError) as exc:
        raise FormatError(f"pixel file needs linear_estimate and raw: {exc}", field="pixels")
    mapping = calib.fit_color_mapping(lin, raw, degree=args.degree)
    payload = {"degree": mapping.degree, "coeffs": mapping.coeffs.tolist()}
    if args.output:
        Path(args.output).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _emit(payload, args.json)
    return EXIT_OK


def _cmd_metrics(args) -> int:
    import math

    a = _load_image(args.a)
    b = _load_image(args.b)
    rep = metrics.report(a, b)
    payload = rep.as_dict()
    if math.isinf(payload["psnr"]):
        payload["psnr"] = None  # strict JSON has no Infinity
        payload["psnr_infinite"] = True
    payload["tv_a"] = metrics.tv_smoothness(a.mean(axis=2))
    _emit(payload, args.json)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ispctl",
                                     description="Batch raw-to-sRGB rendering and calibration")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    json_flag = argparse.ArgumentParser(add_help=False)
    json_flag.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                           help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", parents=[json_flag], help="render bundles to JPEG/PNG")
    p.add_argument("bundle", help="mosaic file or glob pattern")
    p.add_argument("output", help="output file (or directory for multiple inputs)")
    p.add_argument("--style", default="identity")
    p.add_argument("--style-dir", default=None)
    p.add_argument("--recipe", default=None, help="recipe JSON (wins over flags)")
    p.add_argument("--no-denoise", action="store_true")
    p.add_argument("--no-3dlut", action="store_true")
    p.add_argument("--multiscale", action="store_true")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--embed-raw", action="store_true")
    p.add_argument("--preview-scale", type=float, default=1.0,
                   choices=[0.125, 0.25, 0.5, 1.0])
    p.add_argument("--jobs", type=int, default=4, help="parallel batch renders")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("extract", parents=[json_flag], help="recover the embedded raw from a JPEG")
    p.add_argument("input")
    p.add_argument("output", help="mosaic output path (.png or .pgm)")
    p.add_argument("--recipe-out", default=None)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("noise-fit", parents=[json_flag], help="fit a heteroscedastic noise model")
    p.add_argument("stats", help="JSON list of {mean, variance, iso, channel}")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_noise_fit)

    p = sub.add_parser("ccm-fit", parents=[json_flag], help="fit a row-stochastic non-negative CCM")
    p.add_argument("pixels", help="JSON with wb_raw and srgb_linear pixel lists")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_ccm_fit)

    p = sub.add_parser("cm-fit", parents=[json_flag], help="fit a polynomial color mapping")
    p.add_argument("pixels", help="JSON with linear_estimate and raw pixel lists")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_cm_fit)

    p = sub.add_parser("metrics", parents=[json_flag], help="compare two rendered images")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("serve", help="run the render service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8601)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (FormatError,) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except IspError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
