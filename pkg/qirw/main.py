import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from qirw import __version__
from qirw.commands.instances import cmd_generate, cmd_measure
from qirw.commands.synthesis import cmd_certify, cmd_synthesize
from qirw.core.exceptions import EXIT_INPUT_ERROR, InputError
from qirw.schemas.run import RunConfig
from qirw.utils.error_logger import setup_logging
from qirw.utils.response import error_response


logger = logging.getLogger(__name__)

COMMANDS = {
    "synthesize": cmd_synthesize,
    "certify": cmd_certify,
    "generate": cmd_generate,
    "measure": cmd_measure,
}


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not argparse's exit 2."""

    def error(self, message: str):
        raise InputError(f"{self.prog}: {message}")


def _add_input_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--instance", help="instance JSON holding G, H, bags and phi")
    parser.add_argument("--g", help="source graph JSON")
    parser.add_argument("--h", help="target graph JSON")
    parser.add_argument("--bags", help="path decomposition JSON")
    parser.add_argument("--phi", help="vertex map JSON")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", choices=["checked", "fast"], help="assertion profile (default from QIRW_PROFILE)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output path")

    parser = _Parser(prog="qirw", description="Additive-error reweighting of quasi-isometries into bounded path-width graphs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    synthesize = subparsers.add_parser("synthesize", parents=[common], help="synthesize weights and write a report")
    _add_input_flags(synthesize)
    synthesize.add_argument("--format", choices=["json", "dot", "materialized"], default="json")

    certify = subparsers.add_parser("certify", parents=[common], help="re-check a report with the independent oracle")
    _add_input_flags(certify)
    certify.add_argument("--report", required=True)
    certify.add_argument("--format", choices=["json", "csv"], default="json")

    generate = subparsers.add_parser("generate", parents=[common], help="write a generated instance")
    generate.add_argument("generator")
    generate.add_argument("--n", type=int, default=10)
    generate.add_argument("--p", type=int, default=2)
    generate.add_argument("--q", type=float, default=0.0)
    generate.add_argument("--k", type=int, default=2)
    generate.add_argument("--m", type=int, default=3)

    measure = subparsers.add_parser("measure", parents=[common], help="measure the parameters of a map")
    _add_input_flags(measure)
    measure.add_argument("--weights", help="weighting JSON for the target")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except InputError as e:
        return error_response(message=e.detail, status_code=e.exit_code)
    values = {key: value for key, value in vars(args).items() if value is not None}
    try:
        config = RunConfig(**values)
    except ValidationError as e:
        return error_response(
            message="Invalid arguments", status_code=EXIT_INPUT_ERROR, data={"errors": [err["msg"] for err in e.errors()]}
        )
    logger.debug("running %s", config.command)
    return COMMANDS[config.command](config)


if __name__ == "__main__":
    sys.exit(main())
