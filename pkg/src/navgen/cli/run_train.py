from argparse import ArgumentParser

from navgen import logger
from navgen.cli.utils import collect_params, register_params_parser
from navgen.project import NavGenProject
from navgen.trainers.navigation.params import TrainConfig

from . import BaseNavGenCommand


def run_train_command_factory(args):
    return RunNavGenTrainCommand(args)


class RunNavGenTrainCommand(BaseNavGenCommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        register_params_parser(
            parser, "train", "Train a follower or speaker policy", TrainConfig, run_train_command_factory
        )

    def __init__(self, args):
        self.args = args

    def run(self):
        params = collect_params(self.args, TrainConfig)
        logger.info(f"Running {params.model} policy training")
        checkpoint = NavGenProject(params=params).create()
        logger.info(f"Checkpoint: {checkpoint}")
        return checkpoint
