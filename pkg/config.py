# config.py - synchrolab 설정

import os
import logging
from pathlib import Path
from dotenv import load_dotenv

# 환경변수 로드
load_dotenv()

# 프로그램 정보
APP_NAME = "synchrolab"
APP_VERSION = "1.0.0"
APP_DESCRIPTION = "Synchronization of random circular automata: exact checks, distance-matrix statistics, chromatic moments and Monte Carlo experiments"

# 환경변수 이름 (CLI 에서 environment 매핑을 읽을 때 사용)
ENV_SEED = "SYNCHROLAB_SEED"
ENV_OUTDIR = "SYNCHROLAB_OUTDIR"

# 실험 기본값
DEFAULT_SEED = int(os.getenv(ENV_SEED, "20240601"))
DEFAULT_TRIALS = int(os.getenv("SYNCHROLAB_TRIALS", "10000"))
DEFAULT_WORKERS = int(os.getenv("SYNCHROLAB_WORKERS", "1"))

# alpha* = 1 - e^-1 - 0.05, beta* = 1/2 - 0.05
DEFAULT_ALPHA = float(os.getenv("SYNCHROLAB_ALPHA", "0.582"))
DEFAULT_BETA = float(os.getenv("SYNCHROLAB_BETA", "0.45"))
DEFAULT_EPSILON = float(os.getenv("SYNCHROLAB_EPSILON", "0.05"))

# 용량 제한 (capacity)
MAX_EXACT_N = int(os.getenv("SYNCHROLAB_MAX_EXACT_N", "20"))           # 부분집합 BFS 2^n
MAX_CHROMATIC_N = int(os.getenv("SYNCHROLAB_MAX_CHROMATIC_N", "14"))   # deletion-contraction 정점 수
MAX_TOUCHED_COORDS = int(os.getenv("SYNCHROLAB_MAX_TOUCHED", "8"))     # n^t 열거
CHROMATIC_MEMO_LIMIT = int(os.getenv("SYNCHROLAB_CHROMATIC_MEMO", "200000"))  # 메모 항목 수
MAX_ENUMERATION_N = 6      # n^n <= 46656
MAX_PRIME_CHECK_P = 7      # 7^7 = 823543

# 신뢰구간
CONFIDENCE_LEVEL = 0.95

# 파일 경로 설정
OUTPUT_DIR = os.getenv(ENV_OUTDIR, "results")
OUTPUT_FORMATS = ("json", "csv")

# 로깅 설정
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("SYNCHROLAB_LOG_FILE", "synchrolab.log")
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def setup_logging(level: str = LOG_LEVEL, log_file: str = LOG_FILE) -> None:
    """파일 + 콘솔(stderr) 로깅 설정. 여러 번 호출해도 핸들러는 한 번만 붙는다."""
    handlers = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.insert(0, logging.FileHandler(log_file, encoding="utf-8"))

    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
    )
