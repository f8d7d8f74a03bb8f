"""``hafrm`` command line: argument parsing, dispatch and exit codes"""

import logging
from typing import Optional, Sequence

from opentelemetry import trace

from otel.metrics import record_command

from ..utils.constants import EXIT_OK
from ..utils.exceptions import HafrmError
from .commands import COMMANDS
from .parser import build_parser

logger = logging.getLogger(__name__)
tracer = trace.get_tracer("hafrm-cli")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; ``HafrmError`` becomes its exit code, anything else propagates."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger("hafrm").setLevel(logging.DEBUG)

    with tracer.start_as_current_span(f"cli.{args.command}") as span:
        try:
            code = COMMANDS[args.command](args)
        except HafrmError as e:
            logger.error(f"{args.command} failed: {e}")
            span.set_attribute("exit_code", e.exit_code)
            record_command(args.command, "error")
            return e.exit_code
        span.set_attribute("exit_code", code)
    record_command(args.command, "ok" if code == EXIT_OK else "error")
    return code


__all__ = ["main", "build_parser", "COMMANDS"]
