from argparse import ArgumentParser

from navgen import logger
from navgen.cli.utils import collect_params, register_params_parser
from navgen.project import GenDataParams, GenWorldsParams, NavGenProject

from . import BaseNavGenCommand


def run_gen_worlds_command_factory(args):
    return RunNavGenGenWorldsCommand(args)


def run_gen_data_command_factory(args):
    return RunNavGenGenDataCommand(args)


class RunNavGenGenWorldsCommand(BaseNavGenCommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        register_params_parser(
            parser,
            "gen-worlds",
            "Generate synthetic environment graphs",
            GenWorldsParams,
            run_gen_worlds_command_factory,
        )

    def __init__(self, args):
        self.args = args

    def run(self):
        params = collect_params(self.args, GenWorldsParams)
        logger.info(f"Generating {params.n_worlds} worlds")
        return NavGenProject(params=params).create()


class RunNavGenGenDataCommand(BaseNavGenCommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        register_params_parser(
            parser,
            "gen-data",
            "Generate worlds, trajectories and instructions",
            GenDataParams,
            run_gen_data_command_factory,
        )

    def __init__(self, args):
        self.args = args

    def run(self):
        params = collect_params(self.args, GenDataParams)
        logger.info(f"Building dataset in {params.output_dir}")
        return NavGenProject(params=params).create()
