"""``fuzzyspec`` command line: spectrum | action | calculus | mk | verify."""
from __future__ import annotations

import argparse
import logging
import sys

from .cache import EigenCache
from .commands import cmd_action, cmd_calculus, cmd_mk, cmd_spectrum
from .config import DOTTED, load_config

EXIT_OK, EXIT_ERROR, EXIT_VERIFY = 0, 1, 2
COMMANDS = {"spectrum": cmd_spectrum, "action": cmd_action, "calculus": cmd_calculus, "mk": cmd_mk}

log = logging.getLogger("fuzzyspec")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzyspec", description="Fuzzy-torus spectral computations.")
    parser.add_argument("verb", choices=[*COMMANDS, "verify"])
    parser.add_argument("--config", help="TOML file; flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    for name in DOTTED:
        parser.add_argument(f"--{name}", dest=name, default=None, metavar="VALUE")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        overrides = {name: getattr(args, name) for name in DOTTED if getattr(args, name) is not None}
        cfg = load_config(args.config, overrides)
        cache = EigenCache(cfg.cache_dir, enabled=cfg.cache)
        if args.verb == "verify":
            from .acceptance import run_all

            results = run_all(cache)
            for r in results:
                print(r.line())
            return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
        cmd = COMMANDS[args.verb]
        bundle = cmd(cfg) if args.verb == "mk" else cmd(cfg, cache)
        for path in bundle.write(cfg.out_dir):
            print(path)
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 1
        log.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
