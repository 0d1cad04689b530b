"""Command-line entry point: ``isidec {simulate,exponents,surface,estimate,szego}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .errors import UsageError
from .experiments import (ExperimentConfig, run_estimate, run_exponents, run_montecarlo,
                          run_surface, run_szego)

log = logging.getLogger("isidec")

# flag dest -> config field
_FIELDS = {
    "n": "n", "messages": "M", "trials": "trials", "h": "h", "sigma2": "sigma2", "rate": "rate",
    "snr_db": "snr_db", "rate_axis": "rate_axis", "seed": "seed", "out": "out",
    "gamma": "gamma", "tap_bound": "tap_bound", "isi_len": "isi_len",
    "sigma2_min": "sigma2_min", "sigma2_max": "sigma2_max",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config")
    common.add_argument("--n", type=int, help="block length")
    common.add_argument("--messages", type=int, help="codebook size M")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--h", help="ISI taps, comma separated, e.g. 1.0,0.5")
    common.add_argument("--sigma2", type=float, help="noise variance")
    common.add_argument("--rate", type=float, help="rate in nats/symbol")
    common.add_argument("--snr-db", dest="snr_db", metavar="START:STOP:COUNT")
    common.add_argument("--rate-axis", dest="rate_axis", metavar="START:STOP:COUNT")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", metavar="DIR", help="output directory")
    g = common.add_argument_group("grid overrides")
    g.add_argument("--gamma", type=float)
    g.add_argument("--tap-bound", dest="tap_bound", type=float)
    g.add_argument("--isi-len", dest="isi_len", type=int)
    g.add_argument("--sigma2-min", dest="sigma2_min", type=float)
    g.add_argument("--sigma2-max", dest="sigma2_max", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="isidec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    helps = {
        "simulate": "Monte Carlo block-error rates of MMI vs known-channel ML decoding",
        "exponents": "new and Gallager error exponents at one (h, sigma2, R)",
        "surface": "exponent difference over an (SNR, R) grid, as CSV",
        "estimate": "ISI type of one seeded transmission",
        "szego": "distance between squared singular values and the spectral density",
    }
    for kind, text in helps.items():
        sub.add_parser(kind, parents=[common], help=text, description=text)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"--config: invalid JSON in {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("--config: top level must be an object")
    data = dict(data)
    data["kind"] = args.kind
    for dest, name in _FIELDS.items():
        value = getattr(args, dest)
        if value is not None:
            data[name] = value
    return ExperimentConfig.from_dict(data)


def _flag(message: str) -> str:
    # Name fields by their command-line flag.
    field = message.split(":", 1)[0]
    inverse = {v: k for k, v in _FIELDS.items()}
    if field in inverse:
        return "--" + inverse[field].replace("_", "-") + ":" + message.split(":", 1)[1]
    return message


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if cfg.kind == "simulate":
            summary = run_montecarlo(cfg)
            summary.pop("records")
            print(json.dumps(summary, indent=2))
        elif cfg.kind == "surface":
            _, text = run_surface(cfg)
            if not cfg.out:
                sys.stdout.write(text)
        else:
            run = {"exponents": run_exponents, "estimate": run_estimate, "szego": run_szego}[cfg.kind]
            print(json.dumps(run(cfg), indent=2))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"isidec {args.kind}: error: {_flag(str(exc))}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"isidec {args.kind}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
