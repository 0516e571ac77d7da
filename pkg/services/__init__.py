# services/__init__.py
"""
서비스 모듈 초기화 및 전역 인스턴스 관리
상태를 가진 서비스(chromatic 메모, 실험 worker 수, run 저장 위치)는 싱글톤으로 지연 생성한다.
"""

import logging
import threading

from config import DEFAULT_WORKERS, MAX_CHROMATIC_N, OUTPUT_DIR
from .chromatic_service import ChromaticService
from .experiment_service import ExperimentService
from .pipeline_service import PipelineService

logger = logging.getLogger(__name__)

# 전역 서비스 인스턴스들
_chromatic_service = None
_experiment_service = None
_pipeline_service = None
_initialization_lock = threading.Lock()


def get_chromatic_service(max_n: int = MAX_CHROMATIC_N) -> ChromaticService:
    """chromatic 서비스 (싱글톤). 제한이 바뀌면 메모는 유지한 채 제한만 갱신한다."""
    global _chromatic_service
    with _initialization_lock:
        if _chromatic_service is None:
            _chromatic_service = ChromaticService(max_n=max_n)
            logger.debug("✅ Chromatic Service 지연 초기화 완료")
        _chromatic_service.max_n = max_n
        return _chromatic_service


def get_experiment_service(workers: int = DEFAULT_WORKERS) -> ExperimentService:
    global _experiment_service
    with _initialization_lock:
        if _experiment_service is None or _experiment_service.workers != workers:
            _experiment_service = ExperimentService(workers=workers)
            logger.debug(f"✅ Experiment Service 초기화 완료 (workers={workers})")
        return _experiment_service


def get_pipeline_service(outdir: str = OUTPUT_DIR) -> PipelineService:
    global _pipeline_service
    with _initialization_lock:
        if _pipeline_service is None or str(_pipeline_service.outdir) != str(outdir):
            _pipeline_service = PipelineService(outdir=outdir)
            logger.debug(f"✅ Pipeline Service 초기화 완료 (outdir={outdir})")
        return _pipeline_service


def reset_services():
    """테스트용: 모든 서비스 인스턴스 리셋"""
    global _chromatic_service, _experiment_service, _pipeline_service
    with _initialization_lock:
        _chromatic_service = None
        _experiment_service = None
        _pipeline_service = None
