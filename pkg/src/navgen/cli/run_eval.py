from argparse import ArgumentParser

from navgen import logger
from navgen.cli.utils import collect_params, register_params_parser
from navgen.project import CompareParams, EvalParams, NavGenProject, ScoreParams

from . import BaseNavGenCommand


def run_eval_command_factory(args):
    return RunNavGenEvalCommand(args)


def run_compare_command_factory(args):
    return RunNavGenCompareCommand(args)


def run_score_command_factory(args):
    return RunNavGenScoreCommand(args)


class RunNavGenEvalCommand(BaseNavGenCommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        register_params_parser(
            parser, "eval", "Roll a policy on a split and score it", EvalParams, run_eval_command_factory
        )

    def __init__(self, args):
        self.args = args

    def run(self):
        params = collect_params(self.args, EvalParams)
        logger.info(f"Evaluating {params.policy} on {params.split}")
        return NavGenProject(params=params, backend=params.backend).create()


class RunNavGenCompareCommand(BaseNavGenCommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        register_params_parser(
            parser, "compare", "Compare disc, gen and combined policies", CompareParams, run_compare_command_factory
        )

    def __init__(self, args):
        self.args = args

    def run(self):
        params = collect_params(self.args, CompareParams)
        return NavGenProject(params=params, backend=params.backend).create()


class RunNavGenScoreCommand(BaseNavGenCommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        register_params_parser(
            parser, "score", "Score saved trajectories offline", ScoreParams, run_score_command_factory
        )

    def __init__(self, args):
        self.args = args

    def run(self):
        params = collect_params(self.args, ScoreParams)
        return NavGenProject(params=params).create()
