"""
실행(run) 통합 서비스 - 명령 실행 -> 결과 테이블 저장 -> manifest 기록

출력 구조: <outdir>/<run-id>/<table>.json|csv + manifest.json
데이터 파일에는 타임스탬프가 들어가지 않는다 (timestamp 는 manifest 에만).
"""

import hashlib
import json
import logging
import traceback
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel

from config import APP_VERSION, OUTPUT_DIR
from models.errors import InternalError, SynchrolabError
from models.schemas import CommandOutput, RunConfig, RunManifest

logger = logging.getLogger(__name__)

Handler = Callable[[RunConfig], CommandOutput]


def to_jsonable(value: Any) -> Any:
    """Fraction -> "num/den", BaseModel/numpy/tuple -> 기본 JSON 타입"""
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, frozenset, set)):
        items = sorted(value) if isinstance(value, (frozenset, set)) else value
        return [to_jsonable(v) for v in items]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def dumps(value: Any) -> str:
    return json.dumps(to_jsonable(value), ensure_ascii=False, indent=2, sort_keys=True)


def table_frame(table: Any) -> pd.DataFrame:
    """레코드 목록 (또는 단일 레코드) -> 평탄화된 DataFrame. 리스트 셀은 JSON 문자열."""
    rows = to_jsonable(table)
    if isinstance(rows, dict):
        rows = [rows]
    frame = pd.json_normalize(rows, sep=".")
    for column in frame.columns:
        if frame[column].map(lambda v: isinstance(v, list)).any():
            frame[column] = frame[column].map(lambda v: json.dumps(v, ensure_ascii=False))
    return frame.reindex(sorted(frame.columns), axis=1)


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


class PipelineService:
    """명령 하나의 실행과 결과 저장을 담당"""

    def __init__(self, outdir: str = OUTPUT_DIR):
        self.outdir = Path(outdir)

    def new_run_id(self) -> str:
        existing = [p for p in self.outdir.iterdir() if p.is_dir()] if self.outdir.exists() else []
        return f"{len(existing) + 1:04d}_{datetime.now().strftime('%Y%m%d_%H%M%S')}"

    def execute(self, config: RunConfig, handler: Handler) -> CommandOutput:
        """handler 실행 후 (config.save 이면) 테이블과 manifest 를 저장한다"""
        started_at = datetime.now()
        logger.info(f"🚀 명령 실행 시작: {config.command}")

        if not config.save:
            output = handler(config)
            logger.info(f"✅ 명령 완료: {config.command} (저장 생략)")
            return output

        self.outdir.mkdir(parents=True, exist_ok=True)
        run_id = self.new_run_id()
        run_dir = self.outdir / run_id
        run_dir.mkdir()
        manifest = RunManifest(
            run_id=run_id,
            started_at=started_at.isoformat(timespec="seconds"),
            config=to_jsonable(config.model_dump()),
            version=APP_VERSION,
        )
        steps: List[str] = []
        checksums: Dict[str, str] = {}
        status = "failed"

        try:
            output = handler(config)
            steps.append(config.command)
            for name, table in output.tables.items():
                path = self._save_table(run_dir, name, table, config.format)
                checksums[path.name] = sha256_of(path)
            steps.append("save_tables")
            status = "success"
            return output.model_copy(update={"run_dir": str(run_dir)})
        except SynchrolabError:
            raise
        except Exception as e:
            logger.error(f"❌ 명령 실행 실패: {e}\n{traceback.format_exc()}")
            raise InternalError(f"명령 실행 실패: {e}") from e
        finally:
            final = manifest.model_copy(update={
                "completed_at": datetime.now().isoformat(timespec="seconds"),
                "final_status": status,
                "steps_completed": steps,
                "checksums": checksums,
            })
            self._write_manifest(run_dir, final)

    def _save_table(self, run_dir: Path, name: str, table: Any, fmt: str) -> Path:
        if fmt == "csv":
            path = run_dir / f"{name}.csv"
            table_frame(table).to_csv(path, index=False, encoding="utf-8", lineterminator="\r\n")
        else:
            path = run_dir / f"{name}.json"
            path.write_text(dumps(table) + "\n", encoding="utf-8")
        logger.info(f"💾 결과 저장: {path}")
        return path

    def _write_manifest(self, run_dir: Path, manifest: RunManifest) -> Path:
        path = run_dir / "manifest.json"
        path.write_text(dumps(manifest) + "\n", encoding="utf-8")
        logger.info(f"💾 manifest 저장: {path} ({manifest.final_status})")
        return path

    def latest_manifest(self) -> Optional[RunManifest]:
        """가장 최근 run 의 manifest (없으면 None)"""
        manifests = sorted(self.outdir.glob("*/manifest.json")) if self.outdir.exists() else []
        if not manifests:
            return None
        with open(manifests[-1], "r", encoding="utf-8") as f:
            return RunManifest.model_validate(json.load(f))
