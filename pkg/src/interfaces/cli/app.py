# src/interfaces/cli/app.py
"""Command-line entry point: `python -m src.interfaces.cli <subcommand> ...`.

Exit codes: 0 success, 1 invalid input or usage, 2 runtime or training failure.
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from src.domain.exceptions import ValidationError
from src.infrastructure.config.run_config import RunConfig, load_run_config
from src.infrastructure.config.settings import Settings
from src.interfaces.factories.pipeline_factory import PipelineFactory

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2

logger = logging.getLogger("jump_diffusion")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raises on bad usage instead of exiting, so `run` owns the exit code."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_tuple(text: str):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', type=str, help='Arquivo JSON de configuração (chaves planas)')
    parser.add_argument('--seed', type=int, help='Semente da execução')
    parser.add_argument('--output-dir', dest='output_dir', type=str, help='Diretório de saída')
    parser.add_argument('--verbose', action='store_true', help='Logs em nível DEBUG')
    parser.add_argument('--quiet', action='store_true', help='Sem barras de progresso')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='jump-diffusion', description='Geração de espectrogramas por jump diffusion.')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('gen-corpus', help='Gerar o corpus sintético')
    _common(p)
    p.add_argument('--num-utterances', dest='num_utterances', type=int)
    p.add_argument('--num-bins', dest='num_bins', type=int)
    p.add_argument('--num-phones', dest='num_phones', type=int)
    p.add_argument('--duration-modes', dest='duration_modes', type=_float_tuple)
    p.add_argument('--duration-weights', dest='duration_weights', type=_float_tuple)
    p.add_argument('--duration-std', dest='duration_std', type=float)
    p.add_argument('--silence-probability', dest='silence_probability', type=float)

    p = sub.add_parser('corrupt', help='Aplicar o processo direto a uma locução')
    _common(p)
    p.add_argument('--utterance', type=str, required=True)
    p.add_argument('--t', type=float, required=True)

    p = sub.add_parser('train', help='Treinar os preditores')
    _common(p)
    p.add_argument('--epochs', type=int)
    p.add_argument('--learning-rate', dest='learning_rate', type=float)
    p.add_argument('--batch-size', dest='batch_size', type=int)

    p = sub.add_parser('synth', help='Sintetizar locuções')
    _common(p)
    p.add_argument('--mode', type=str)
    p.add_argument('--solver', type=str)
    p.add_argument('--steps', type=int)
    p.add_argument('--alloc', dest='allocation', type=str)
    p.add_argument('--speed', type=float)
    p.add_argument('--temperature', type=float)
    p.add_argument('--sequential-insertions', dest='sequential_insertions', action='store_const', const=True)
    p.add_argument('--predictors', type=str, default='trained', choices=['trained', 'heuristic', 'oracle'])
    p.add_argument('--utterances', type=int, help='Sintetizar apenas as primeiras K locuções')
    p.add_argument('--tag', type=str)

    p = sub.add_parser('eval', help='Avaliar uma execução de síntese')
    _common(p)
    p.add_argument('--run', type=str, required=True, help='Tag da síntese avaliada')
    p.add_argument('--reference', type=str, help='Tag de referência (padrão: ground truth)')
    p.add_argument('--heatmaps', action='store_const', const=True)
    p.add_argument('--marginal-check', dest='marginal_check', action='store_true')
    p.add_argument('--silence-threshold', dest='silence_threshold', type=float)

    p = sub.add_parser('selftest', help='Executar a suíte de invariantes')
    _common(p)
    return parser


CONFIG_FLAGS = (
    'seed', 'output_dir', 'num_utterances', 'num_bins', 'num_phones', 'duration_modes', 'duration_weights',
    'duration_std', 'silence_probability', 'epochs', 'learning_rate', 'batch_size', 'mode', 'solver', 'steps',
    'allocation', 'speed', 'temperature', 'sequential_insertions', 'heatmaps', 'silence_threshold',
)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {name: getattr(args, name) for name in CONFIG_FLAGS if getattr(args, name, None) is not None}


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, Settings.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(level=level, format=Settings.LOG_FORMAT)


def _dispatch(args: argparse.Namespace) -> int:
    show_progress = not args.quiet
    if args.command == 'selftest':
        seed = args.seed if args.seed is not None else 0
        results = PipelineFactory(args.output_dir or '.').create_selftest_use_case(seed).execute()
        for result in results:
            print(f"{'PASS' if result.passed else 'FAIL'}  {result.name}  {result.detail}")
        return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE

    config: RunConfig = load_run_config(args.config, _overrides(args))
    factory = PipelineFactory(config.output_dir)
    if args.command == 'gen-corpus':
        corpus = factory.create_generate_corpus_use_case().execute(config)
        print(f"{len(corpus)} utterances written to {config.output_dir}")
    elif args.command == 'corrupt':
        sidecar = factory.create_corrupt_use_case().execute(config, args.utterance, args.t)
        print(f"L_t={sidecar['L_t']} s_target={sidecar['s_target']}")
    elif args.command == 'train':
        report = factory.create_train_use_case().execute(config, show_progress)
        print(report.to_frame().tail(1).to_string(index=False) if len(report) else "no epochs run")
    elif args.command == 'synth':
        summary = factory.create_synthesize_use_case().execute(
            config, args.predictors, args.utterances, args.tag, show_progress)
        print(f"run {summary['tag']}: {len(summary['utterances'])} utterances")
    elif args.command == 'eval':
        metrics = factory.create_evaluate_use_case().execute(
            config, args.run, args.reference, args.heatmaps, args.marginal_check)
        print(metrics.groupby('metric')['value'].mean().to_string())
    return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID
    _configure_logging(args.verbose)
    try:
        return _dispatch(args)
    except ValidationError as e:
        logger.error(f"Invalid input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"Run failed: {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> int:
    return run()
