from argparse import ArgumentParser

from navgen.cli.utils import collect_params, register_params_parser
from navgen.project import NavGenProject, TentParams

from . import BaseNavGenCommand


def run_tent_command_factory(args):
    return RunNavGenTentCommand(args)


class RunNavGenTentCommand(BaseNavGenCommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        register_params_parser(
            parser, "tent", "Token-wise prediction entropy report", TentParams, run_tent_command_factory
        )

    def __init__(self, args):
        self.args = args

    def run(self):
        return NavGenProject(params=collect_params(self.args, TentParams)).create()
