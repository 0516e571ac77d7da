# main.py - synchrolab 명령행 진입점
import argparse
import logging
import os
import sys
from typing import Dict, List, Mapping, Optional, Sequence

from dotenv import dotenv_values
from pydantic import ValidationError

# --- 설정, 명령 라우터, 서비스 임포트 ---
from config import (
    APP_DESCRIPTION, APP_NAME, APP_VERSION, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_EPSILON, DEFAULT_SEED,
    DEFAULT_TRIALS, DEFAULT_WORKERS, ENV_OUTDIR, ENV_SEED, LOG_FILE, LOG_LEVEL, MAX_CHROMATIC_N, MAX_EXACT_N,
    OUTPUT_DIR, OUTPUT_FORMATS, setup_logging,
)
from api import Command, CommandRouter, automaton_api, chromatic_api, experiment_api, independence_api, matrix_api
from models.errors import SynchrolabError
from models.schemas import RunConfig
from services import get_pipeline_service

logger = logging.getLogger(__name__)

ROUTERS: List[CommandRouter] = [
    automaton_api.router,
    matrix_api.router,
    independence_api.router,
    chromatic_api.router,
    experiment_api.router,
]

# RunConfig 필드 -> (config 파일 / 환경변수 키, 기본값)
SETTINGS: Dict[str, tuple] = {
    "seed": (ENV_SEED, DEFAULT_SEED),
    "outdir": (ENV_OUTDIR, OUTPUT_DIR),
    "trials": ("SYNCHROLAB_TRIALS", DEFAULT_TRIALS),
    "workers": ("SYNCHROLAB_WORKERS", DEFAULT_WORKERS),
    "alpha": ("SYNCHROLAB_ALPHA", DEFAULT_ALPHA),
    "beta": ("SYNCHROLAB_BETA", DEFAULT_BETA),
    "epsilon": ("SYNCHROLAB_EPSILON", DEFAULT_EPSILON),
    "max_exact_n": ("SYNCHROLAB_MAX_EXACT_N", MAX_EXACT_N),
    "max_chromatic_n": ("SYNCHROLAB_MAX_CHROMATIC_N", MAX_CHROMATIC_N),
    "format": ("SYNCHROLAB_FORMAT", "json"),
}


def commands() -> Dict[str, Command]:
    registry: Dict[str, Command] = {}
    for router in ROUTERS:
        registry.update(router.commands)
    return registry


# --- 인자 타입 ---
def int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"정수 목록이 아닙니다: {text!r}")


def pair_list(text: str) -> List[tuple]:
    """'i:j,i:j,...'"""
    try:
        return [tuple(int(v) for v in part.split(":")) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"i:j 목록이 아닙니다: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int)
    common.add_argument("--n-grid", type=int_list, dest="n_grid")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--format", choices=OUTPUT_FORMATS)
    common.add_argument("--outdir")
    common.add_argument("--max-exact-n", type=int, dest="max_exact_n")
    common.add_argument("--max-chromatic-n", type=int, dest="max_chromatic_n")
    common.add_argument("--threads", type=int, dest="workers")
    common.add_argument("--b", type=int_list, help="매핑 b (쉼표 구분)")
    common.add_argument("--i", type=int)
    common.add_argument("--j", type=int)
    common.add_argument("--eval", type=int, dest="eval_at")
    common.add_argument("--pairs", type=pair_list, help="i:j,i:j,...")
    common.add_argument("--exhaustive", action="store_true", help="가능하면 M_n 전수 열거")
    common.add_argument("--no-save", action="store_false", dest="save", help="결과 파일을 쓰지 않는다")
    common.add_argument("--config", help="dotenv 형식 설정 파일")

    parser = argparse.ArgumentParser(prog=APP_NAME, description=APP_DESCRIPTION)
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command in commands().items():
        subparsers.add_parser(name, parents=[common], help=command.help, description=command.help)
    return parser


def parse_config(argv: Sequence[str], environment: Mapping[str, str]) -> RunConfig:
    """flag > --config 파일 > environment > 기본값. 잘못된 값이면 usage 와 함께 exit 2"""
    parser = build_parser()
    args = parser.parse_args(list(argv))

    file_values: Mapping[str, Optional[str]] = {}
    if args.config:
        if not os.path.exists(args.config):
            parser.error(f"설정 파일이 없습니다: {args.config}")
        file_values = dotenv_values(args.config)

    values = {
        "command": args.command,
        "n": args.n,
        "n_grid": args.n_grid or [],
        "b": args.b,
        "i": args.i,
        "j": args.j,
        "eval_at": args.eval_at,
        "pairs": args.pairs,
        "exhaustive": args.exhaustive,
        "save": args.save,
    }
    for field, (key, default) in SETTINGS.items():
        flag = getattr(args, field)
        if flag is not None:
            values[field] = flag
        elif file_values.get(key) is not None:
            values[field] = file_values[key]
        elif environment.get(key) is not None:
            values[field] = environment[key]
        else:
            values[field] = default

    try:
        config = RunConfig(**values)
    except ValidationError as e:
        error = e.errors()[0]
        parser.error(f"잘못된 값 {'.'.join(map(str, error['loc']))}: {error['msg']}")

    missing = commands()[config.command].missing(config)
    if missing:
        parser.error(f"'{config.command}' 에는 {', '.join(missing)} 가 필요합니다")
    return config


def dispatch(config: RunConfig) -> int:
    """명령 실행. 0 성공, 2 잘못된 인자, 3 용량 초과, 1 내부 오류"""
    command = commands()[config.command]
    try:
        output = get_pipeline_service(config.outdir).execute(config, command.handler)
    except SynchrolabError as e:
        logger.error(f"❌ {config.command} 실패: {e}")
        print(f"{APP_NAME}: error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"❌ {config.command} 처리 중 예상치 못한 오류")
        print(f"{APP_NAME}: internal error: {e}", file=sys.stderr)
        return 1

    print(output.text)
    if output.run_dir:
        logger.info(f"💾 결과 디렉토리: {output.run_dir}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    config = parse_config(argv, os.environ)
    setup_logging(level=os.environ.get("LOG_LEVEL", LOG_LEVEL), log_file=LOG_FILE)
    logger.info(f"🎯 {APP_NAME} v{APP_VERSION}: {config.command}")
    return dispatch(config)


if __name__ == "__main__":
    sys.exit(main())
