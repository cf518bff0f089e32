import argparse
import sys

from pydantic import ValidationError

from navgen import __version__, log_config, logger
from navgen.cli.run_data import RunNavGenGenDataCommand, RunNavGenGenWorldsCommand
from navgen.cli.run_eval import RunNavGenCompareCommand, RunNavGenEvalCommand, RunNavGenScoreCommand
from navgen.cli.run_tent import RunNavGenTentCommand
from navgen.cli.run_train import RunNavGenTrainCommand
from navgen.core.config import get_settings
from navgen.errors import ConfigError, DataError, NavGenError


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_DATA = 3

COMMANDS = (
    RunNavGenGenWorldsCommand,
    RunNavGenGenDataCommand,
    RunNavGenTrainCommand,
    RunNavGenEvalCommand,
    RunNavGenCompareCommand,
    RunNavGenTentCommand,
    RunNavGenScoreCommand,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        "navgen",
        usage="navgen <command> [<args>]",
        epilog="For more information about a command, run: `navgen <command> --help`",
    )
    parser.add_argument("--version", "-v", help="Display navgen version", action="store_true")
    commands_parser = parser.add_subparsers(help="commands")
    for command in COMMANDS:
        command.register_subcommand(commands_parser)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        print(__version__)
        return EXIT_OK
    if not hasattr(args, "func"):
        parser.print_help()
        return EXIT_CONFIG

    log_config.set_level(get_settings().log_level)
    try:
        command = args.func(args)
        command.run()
    except (ConfigError, ValidationError) as e:
        logger.error(f"configuration error: {e}")
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as e:
        logger.error(f"data error: {e}")
        return EXIT_DATA
    except NavGenError as e:
        logger.error(str(e))
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
