"""Command line entry point: ``grcstandoff {run,validate,stats,detect-crasis}``.

Settings come from flags and, optionally, an INI file given with
``--config``; the file's ``[grcstandoff]`` section may set any of::

    input, output, policy, elision, crasis, external, formats, strict, workers

Flags given explicitly on the command line win over the file. Relative
paths in the file are resolved against the file's directory.

Exit status is 0 when nothing fatal happened (rejected documents are not
fatal), 1 when ``validate`` found problems, 2 for unusable configuration or
missing inputs.
"""

import argparse
import configparser
import logging
import sys
from pathlib import Path

from .errors import StandoffError
from .pipeline import FORMATS, PipelineConfig, Resources, detect_crasis, run, stats, validate_output

log = logging.getLogger("grcstandoff")

SECTION = "grcstandoff"
PATH_KEYS = ("input", "output", "policy", "elision", "crasis", "external")


def _formats(value):
    items = tuple(v.strip() for v in value.split(",") if v.strip())
    bad = [v for v in items if v not in FORMATS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"formats must be drawn from {','.join(FORMATS)}")
    return items


def _bool(value):
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def build_parser():
    p = argparse.ArgumentParser(prog="grcstandoff", description="Standoff annotation builder for TEI Greek texts.")
    p.add_argument("--config", help="INI file with a [grcstandoff] section")
    p.add_argument("-v", "--verbose", action="store_true", help="per-document log lines")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, output=True):
        sp.add_argument("--input", "-i", help="directory of TEI files")
        if output:
            sp.add_argument("--output", "-o", help="output directory")
        sp.add_argument("--policy", help="element policy file")
        sp.add_argument("--elision", help="elision lexicon")
        sp.add_argument("--crasis", help="crasis lexicon (TSV)")

    r = sub.add_parser("run", help="build PAULA/LAULA file sets")
    common(r)
    r.add_argument("--external", help="directory of <doc>.tsv morphosyntax files")
    r.add_argument("--formats", type=_formats, help="paula, laula or paula,laula")
    r.add_argument("--strict", action="store_const", const=True, help="reject documents with form mismatches")
    r.add_argument("--workers", "-j", type=int, help="worker processes")

    v = sub.add_parser("validate", help="re-read and validate emitted file sets")
    common(v)

    s = sub.add_parser("stats", help="recount an emitted corpus")
    s.add_argument("--output", "-o", help="output directory")

    c = sub.add_parser("detect-crasis", help="list coronis-bearing words with counts")
    common(c, output=False)
    return p


def read_config(path):
    parser = configparser.ConfigParser()
    if not parser.read(path, encoding="utf-8"):
        raise StandoffError(f"cannot read config file {path}")
    if not parser.has_section(SECTION):
        return {}
    values = dict(parser[SECTION])
    root = Path(path).resolve().parent
    for key in PATH_KEYS:
        if values.get(key):
            values[key] = str(root / values[key])
    if "formats" in values:
        values["formats"] = _formats(values["formats"])
    if "strict" in values:
        values["strict"] = _bool(values["strict"])
    if "workers" in values:
        values["workers"] = int(values["workers"])
    return values


def settings(args):
    values = read_config(args.config) if args.config else {}
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command", "verbose"):
            values[key] = value
    return values


def _opt(values, key):
    v = values.get(key)
    return Path(v) if v else None


def make_config(values):
    if not values.get("input") or not values.get("output"):
        raise StandoffError("both --input and --output are required")
    return PipelineConfig(
        input_dir=Path(values["input"]),
        output_dir=Path(values["output"]),
        policy_path=_opt(values, "policy"),
        elision_path=_opt(values, "elision"),
        crasis_path=_opt(values, "crasis"),
        external_dir=_opt(values, "external"),
        formats=tuple(values.get("formats") or FORMATS),
        strict=bool(values.get("strict", False)),
        workers=int(values.get("workers") or 1),
    )


def _resources(values):
    cfg = PipelineConfig(
        Path(values.get("input") or "."), Path("."),
        _opt(values, "policy"), _opt(values, "elision"), _opt(values, "crasis"),
    )
    return Resources.load(cfg)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    try:
        values = settings(args)
        if args.command == "run":
            result = run(make_config(values))
            sys.stdout.write(result.to_text())
            return 0
        if args.command == "stats":
            if not values.get("output"):
                raise StandoffError("--output is required")
            sys.stdout.write(stats(values["output"]).to_text())
            return 0
        if args.command == "validate":
            if not values.get("output"):
                raise StandoffError("--output is required")
            problems = validate_output(values["output"], values.get("input"), _resources(values))
            for doc, found in sorted(problems.items()):
                for p in found:
                    print(f"{doc}\t{p}")
            print(f"checked {values['output']}: {len(problems)} file sets with problems")
            return 1 if problems else 0
        if args.command == "detect-crasis":
            if not values.get("input"):
                raise StandoffError("--input is required")
            counts = detect_crasis(values["input"], _resources(values))
            for word, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
                print(f"{word}\t{n}")
            return 0
    except (StandoffError, OSError, ValueError) as e:
        log.error("%s: %s", type(e).__name__, e)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
