# models/schemas.py
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# --- 기본 별칭 ---
Word = Tuple[int, ...]          # letter index 나열, 왼쪽부터 적용
StateSet = FrozenSet[int]


# --- Automaton Schemas ---
class Dfa(BaseModel):
    """n 개 상태, k 개 letter. letters[c][q] 는 letter c 가 상태 q 를 보내는 곳"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    letters: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_letters(self):
        if len(self.letters) < 1:
            raise ValueError("Dfa 에는 letter 가 최소 1개 필요합니다")
        for c, letter in enumerate(self.letters):
            if len(letter) != self.n:
                raise ValueError(f"letter {c} 길이 {len(letter)} != n={self.n}")
            if any(q < 0 or q >= self.n for q in letter):
                raise ValueError(f"letter {c} 에 [0, {self.n - 1}] 밖의 값이 있습니다")
        return self

    @property
    def k(self) -> int:
        return len(self.letters)

    @property
    def states(self) -> StateSet:
        return frozenset(range(self.n))


class CircularMapping(BaseModel):
    """A_n(b) 를 정의하는 b = (b_0, ..., b_{n-1}) in M_n"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    b: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_values(self):
        if len(self.b) != self.n:
            raise ValueError(f"b 길이 {len(self.b)} != n={self.n}")
        if any(v < 0 or v >= self.n for v in self.b):
            raise ValueError(f"b 의 값은 [0, {self.n - 1}] 범위여야 합니다")
        return self

    @classmethod
    def of(cls, values) -> "CircularMapping":
        values = tuple(int(v) for v in values)
        return cls(n=len(values), b=values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.b, dtype=np.int64)

    def is_permutation(self) -> bool:
        return len(set(self.b)) == self.n


# --- Matrix Schemas ---
class DistanceMatrix(BaseModel):
    """
    T_b(i, j) = |b_j - b_{(j+i)_n}|_n, 1 <= i <= floor(n/2), 0 <= j <= n-1.
    entries 는 0-based 저장: entries[i - 1, j] == T_b(i, j).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., ge=2)
    entries: np.ndarray

    @field_validator("entries")
    @classmethod
    def _readonly(cls, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=np.int64)
        value.setflags(write=False)
        return value

    @property
    def rows(self) -> int:
        return self.n // 2

    def entry(self, i: int, j: int) -> int:
        return int(self.entries[i - 1, j])

    def row(self, i: int) -> np.ndarray:
        return self.entries[i - 1]


class MatrixStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    R: Tuple[int, ...]
    z: Tuple[int, ...]
    Dflags: Tuple[int, ...]
    D: int
    Z0: int
    Z1: int
    max_excess: int    # sum_i max(z_i - 1, 0)

    @property
    def min_R(self) -> int:
        return min(self.R)


class Depth1Plan(BaseModel):
    """row i 의 column k 가 0: a^l b 로 거리 i 쌍을 합친다"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["depth1"] = "depth1"
    distance: int
    column: int


class Depth2Plan(BaseModel):
    """row i 의 column k1 값이 j 이고 row j 의 column k2 가 0: a^l1 b a^l2 b"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["depth2"] = "depth2"
    distance: int
    column: int
    value: int
    inner_column: int


class SyncCertificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    plans: Tuple[Union[Depth1Plan, Depth2Plan], ...]

    def plan_for(self, distance: int) -> Union[Depth1Plan, Depth2Plan]:
        return self.plans[distance - 1]

    @property
    def depth2_count(self) -> int:
        return sum(1 for plan in self.plans if plan.kind == "depth2")


# --- Independence Schemas ---
class IndexMultiset(BaseModel):
    """T_b 의 (i, j) 위치 모음 (중복 허용)"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=2)
    pairs: Tuple[Tuple[int, int], ...]

    @model_validator(mode="after")
    def _check_pairs(self):
        for i, j in self.pairs:
            if not (1 <= i <= self.n // 2 and 0 <= j <= self.n - 1):
                raise ValueError(f"({i}, {j}) 는 n={self.n} 의 T_b 범위 밖입니다")
        return self


class Multigraph(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    edges: Tuple[Tuple[int, int], ...]   # (min, max) 정규화, 중복 유지


class JointPmf(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    pairs: Tuple[Tuple[int, int], ...]
    probabilities: Dict[Tuple[int, ...], Fraction]

    def total(self) -> Fraction:
        return sum(self.probabilities.values(), Fraction(0))


# --- Experiment Schemas ---
class RngStream(BaseModel):
    """trial t 의 난수열은 (master_seed, t) 만의 함수다"""
    model_config = ConfigDict(frozen=True)

    master_seed: int = Field(..., ge=0, lt=2 ** 64)
    trial_index: int = Field(..., ge=0)

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.master_seed, spawn_key=(self.trial_index,))
        )


class BoundParams(BaseModel):
    alpha: Optional[float] = None
    beta: Optional[float] = None
    epsilon: Optional[float] = None
    nu: Optional[float] = None
    delta: Optional[float] = None
    lambda_eps: Optional[float] = None


class TrialRecord(BaseModel):
    """표본 하나에서 측정한 값들. 불변식은 생성 시점에 검사된다."""
    model_config = ConfigDict(frozen=True)

    n: int
    trial: int
    synchronizing: bool
    certificate_present: bool
    D: int
    Z0: int
    Z1: int
    max_excess: int
    min_R: int
    in_E_row: bool
    in_E_zero: bool

    @model_validator(mode="after")
    def _check_identities(self):
        if self.certificate_present and not self.synchronizing:
            raise ValueError(f"trial {self.trial}: 인증서가 있는데 동기화되지 않음")
        if self.D != self.Z0 - self.max_excess:
            raise ValueError(f"trial {self.trial}: D != Z0 - sum max(z_i - 1, 0)")
        if self.D < self.Z0 - self.Z1:
            raise ValueError(f"trial {self.trial}: D < Z0 - Z1")
        return self


class ProportionEstimate(BaseModel):
    successes: int
    trials: int
    estimate: float
    low: float = Field(..., ge=0.0, le=1.0)
    high: float = Field(..., ge=0.0, le=1.0)


class MomentEstimate(BaseModel):
    mean: float
    variance: float = Field(..., ge=0.0)
    stderr: float = Field(..., ge=0.0)


class Summary(BaseModel):
    n: int
    trials: int
    seed: int
    proportions: Dict[str, ProportionEstimate]
    moments: Dict[str, MomentEstimate]
    row_R: List[MomentEstimate] = Field(default_factory=list)
    params: BoundParams = Field(default_factory=BoundParams)


class RowLemmaResult(BaseModel):
    """P[E_row^c(alpha)] 의 경험 빈도와 McDiarmid union bound"""
    n: int
    trials: int
    exhaustive: bool
    empirical: ProportionEstimate
    mcdiarmid_value: float
    params: BoundParams


class ZeroLemmaResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    trials: int
    exhaustive: bool
    empirical: ProportionEstimate
    moments: Dict[str, MomentEstimate]
    exact_means: Optional[Dict[str, Fraction]] = None
    params: BoundParams


class ReductionResult(BaseModel):
    """P[D < delta] <= P[Z0 < E Z0 - nu] + P[Z1 > E Z1 + nu] 의 표본 검증"""
    n: int
    trials: int
    d_below_delta: ProportionEstimate
    z0_low_tail: ProportionEstimate
    z1_high_tail: ProportionEstimate
    holds: bool
    params: BoundParams


class Claim9Row(BaseModel):
    i: int
    mean_R: float
    stderr: float
    bound: float
    flagged: bool


class ExactStats(BaseModel):
    """n^n 개 매핑 전체 열거 결과 (분수는 정확값)"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    total: int
    sync_count: int
    certificate_count: int
    permutation_count: int
    mean_D: Fraction
    var_D: Fraction
    mean_Z0: Fraction
    mean_Z1: Fraction
    var_Z0: Fraction
    var_Z1: Fraction
    mean_R: List[Fraction]
    D_distribution: Dict[int, int]


# --- CLI Schemas ---
class RunConfig(BaseModel):
    command: str
    n: Optional[int] = None
    n_grid: List[int] = Field(default_factory=list)
    trials: int = Field(..., ge=1)
    seed: int = Field(..., ge=0, lt=2 ** 64)
    alpha: float = Field(..., gt=0.0, le=1.0)
    beta: float = Field(..., gt=0.0, le=1.0)
    epsilon: float = Field(..., gt=0.0, lt=1.0)
    max_exact_n: int = Field(..., ge=1)
    max_chromatic_n: int = Field(..., ge=1)
    workers: int = Field(1, ge=1)
    outdir: str
    format: Literal["json", "csv"] = "json"
    b: Optional[List[int]] = None
    i: Optional[int] = None
    j: Optional[int] = None
    eval_at: Optional[int] = None
    pairs: Optional[List[Tuple[int, int]]] = None
    exhaustive: bool = False
    save: bool = True


class RunManifest(BaseModel):
    run_id: str
    started_at: str
    completed_at: Optional[str] = None
    final_status: Literal["running", "success", "failed"] = "running"
    steps_completed: List[str] = Field(default_factory=list)
    config: Dict
    version: str
    checksums: Dict[str, str] = Field(default_factory=dict)


class CommandOutput(BaseModel):
    """명령 결과: stdout 에 찍을 text 와 저장할 테이블들 (이름 -> 레코드 목록 또는 단일 레코드)"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    text: str
    tables: Dict[str, Any] = Field(default_factory=dict)
    run_dir: Optional[str] = None
