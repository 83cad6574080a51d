"""Command-line front end.

Every subcommand accepts ``--config FILE`` plus one flag per config key
(``--align.M 10``, ``--thresholds.grid=-20,-19,-18``). Flags override the file.
Analysis subcommands run the pipeline up to their stage and print that
stage's report section as JSON; ``report`` runs everything and writes the
report plus plot-data CSVs to ``--out``.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import typing

from . import pipeline
from .config import PipelineConfig, dotted, read_config_mapping
from .errors import ConfigError, IngestError, StageError
from .io import dumps_report, write_traces_csv

# subcommand -> (last stage to run, report sections to print)
_STAGE_OF = {
    "decluster": ("decluster", ("data", "decluster")),
    "threshold": ("threshold", ("threshold",)),
    "fit-ugpd": ("ugpd", ("threshold", "ugpd")),
    "validate": ("validate", ("ppp", "validate")),
    "baseline": ("baseline", ("baseline",)),
}


def _parse_tuple(kind):
    def parse(text: str):
        return tuple(kind(v) for v in text.split(",") if v.strip())
    return parse


def _flag_type(f: dataclasses.Field):
    hint = typing.get_type_hints(PipelineConfig)[f.name]
    args = [a for a in typing.get_args(hint) if a is not type(None)]
    if typing.get_origin(hint) is tuple:
        return _parse_tuple(args[0])
    if args:  # Optional[...] or X | None
        return args[0]
    return hint


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON or YAML config file")
    g = p.add_argument_group("config keys")
    for f in dataclasses.fields(PipelineConfig):
        g.add_argument(f"--{dotted(f.name)}", dest=f"cfg_{f.name}", type=_flag_type(f),
                       default=None, metavar=f.name.split("_")[-1].upper())


def _config_from(ns: argparse.Namespace) -> PipelineConfig:
    data = read_config_mapping(ns.config) if ns.config else {}
    # flags win over the file; validation runs once on the merged result
    data.update({dotted(k[4:]): v for k, v in vars(ns).items()
                 if k.startswith("cfg_") and v is not None})
    return PipelineConfig.from_mapping(data)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jointfade",
                                     description="Joint lower-tail modelling of paired fading traces.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write synthetic paired traces as CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    _add_config_flags(p)

    for name in _STAGE_OF:
        _add_config_flags(sub.add_parser(name, help=f"run the pipeline through {name}"))

    p = sub.add_parser("fit-bgpd", help="fit a bivariate tail model")
    p.add_argument("--method", choices=("logistic", "ppp"), default="logistic")
    _add_config_flags(p)

    p = sub.add_parser("report", help="run everything; write report.json and plot CSVs")
    p.add_argument("--out", required=True, help="output directory")
    _add_config_flags(p)
    return parser


def _fail(stage: str, err: BaseException) -> int:
    print(f"jointfade: stage '{stage}' failed: {err}", file=sys.stderr)
    return 2


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config_from(ns)
    except (ConfigError, TypeError) as err:
        return _fail("config", err)

    if ns.command == "synth":
        if cfg.input:
            return _fail("config", ConfigError("synth ignores 'input'; unset it"))
        sx, sy, _ = pipeline.load_series(cfg)
        write_traces_csv(ns.out, sx, sy)
        print(ns.out)
        return 0

    if ns.command == "report":
        stop, sections = None, None
    elif ns.command == "fit-bgpd":
        stop = ns.method
        sections = ("logistic",) if ns.method == "logistic" else ("ppp",)
    else:
        stop, sections = _STAGE_OF[ns.command]

    try:
        result = pipeline.run_pipeline(cfg, stop_after=stop)
    except StageError as err:
        return _fail(err.stage, err.cause)
    except IngestError as err:
        return _fail("data", err)

    if sections is None:
        path = result.write(ns.out)
        print(path)
    else:
        sys.stdout.write(dumps_report({k: result.report[k] for k in sections}))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
