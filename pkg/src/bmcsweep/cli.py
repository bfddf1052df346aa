"""``bmcsweep`` command-line entry point."""

from __future__ import annotations

import logging
import signal
import sys
from typing import Optional, Sequence

from bmcsweep.config import parse_cli
from bmcsweep.driver import EXIT_CONFIG, EXIT_FATAL, Orchestrator, exit_code_for
from bmcsweep.errors import ConfigError, FatalError


def _on_sigterm(signum, frame):
    raise KeyboardInterrupt


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = parse_cli(argv)
    except ConfigError as exc:
        print(f"bmcsweep: error: {exc}", file=sys.stderr)
        print("try 'bmcsweep -h' for usage", file=sys.stderr)
        return EXIT_CONFIG

    logging.basicConfig(
        level=logging.INFO if config.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    previous = signal.signal(signal.SIGTERM, _on_sigterm)
    try:
        orchestrator = Orchestrator(config)
        report = orchestrator.run()
    except ConfigError as exc:
        print(f"bmcsweep: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FatalError as exc:
        print(f"bmcsweep: fatal: {exc}", file=sys.stderr)
        return EXIT_FATAL
    finally:
        signal.signal(signal.SIGTERM, previous)

    s = report.summary
    print(
        f"{s.functions_verified} invocations over {s.files_scanned} files, "
        f"{s.violations_total} violations; reports in {report.output_dir}",
        file=sys.stderr,
    )
    return exit_code_for(s)


if __name__ == "__main__":
    sys.exit(main())
