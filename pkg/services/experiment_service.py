# services/experiment_service.py
"""
M_n 균등 표본 추출, 작은 n 의 전수 열거, 확률적 주장들의 Monte Carlo 추정.

결정성: trial t 의 매핑은 RngStream(seed, t) 만으로 정해지고, 블록 결과는 항상
trial 순서로 이어 붙인다. 따라서 worker 수와 무관하게 결과가 비트 단위로 같다.
"""

import itertools
import logging
import math
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from statistics import NormalDist
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from pydantic import ValidationError
from tqdm import tqdm

from config import (
    CONFIDENCE_LEVEL, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_WORKERS, MAX_ENUMERATION_N, MAX_PRIME_CHECK_P,
)
from models.errors import CapacityExceededError, InternalError, InvalidParameterError
from models.schemas import (
    BoundParams, CircularMapping, Claim9Row, DistanceMatrix, ExactStats, MomentEstimate, ProportionEstimate,
    ReductionResult, RngStream, RowLemmaResult, Summary, TrialRecord, ZeroLemmaResult,
)
from services.automaton_service import letters_synchronize
from services.matrix_service import certificate_mask, distance_graph_synchronizes, distance_table

logger = logging.getLogger(__name__)

Sampler = Callable[[RngStream, int], np.ndarray]

# 블록 하나의 (trials, h, n) 배열 원소 수 상한
BLOCK_ELEMENTS = 2_000_000
ENUMERATION_BLOCK = 50_000


# --- 표본 추출 ---
def draw_mapping(stream: RngStream, n: int) -> np.ndarray:
    return stream.generator().integers(0, n, size=n, dtype=np.int64)


def constant_sampler(stream: RngStream, n: int) -> np.ndarray:
    """모든 좌표가 0 인 퇴화 표본기 (플래그 로직 점검용)"""
    return np.zeros(n, dtype=np.int64)


def sample_mapping(stream: RngStream, n: int) -> CircularMapping:
    """각 좌표가 [0, n-1] 에서 독립 균등"""
    if n < 1:
        raise InvalidParameterError(f"n >= 1 이 필요합니다 (n={n})")
    return CircularMapping(n=n, b=tuple(int(v) for v in draw_mapping(stream, n)))


# --- 신뢰구간 / 모멘트 ---
def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE_LEVEL) -> Tuple[float, float]:
    if trials <= 0:
        raise InvalidParameterError("trials >= 1 이 필요합니다")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # 구간은 항상 p 를 포함하고, 0 / 1 에서는 끝점이 정확히 0 / 1
    low = 0.0 if successes == 0 else min(p, max(0.0, center - half))
    high = 1.0 if successes == trials else max(p, min(1.0, center + half))
    return low, high


def proportion(successes: int, trials: int) -> ProportionEstimate:
    low, high = wilson_interval(successes, trials)
    return ProportionEstimate(successes=successes, trials=trials, estimate=successes / trials, low=low, high=high)


def moment(values: np.ndarray, exact: bool = False) -> MomentEstimate:
    """표본이면 불편분산(ddof=1), 전수 열거면 모분산"""
    values = np.asarray(values, dtype=np.float64)
    count = values.size
    if exact or count < 2:
        variance = float(values.var()) if count else 0.0
        return MomentEstimate(mean=float(values.mean()) if count else 0.0, variance=variance, stderr=0.0 if exact else math.sqrt(variance / max(count, 1)))
    variance = float(values.var(ddof=1))
    return MomentEstimate(mean=float(values.mean()), variance=variance, stderr=math.sqrt(variance / count))


def non_increasing_within_ci(estimates: Sequence[ProportionEstimate]) -> bool:
    """다음 값의 구간 하한이 이전 값의 구간 상한을 넘지 않으면 '증가하지 않음'"""
    return all(later.low <= earlier.high for earlier, later in zip(estimates, estimates[1:]))


# --- 닫힌 형태 ---
def expected_Z0(n: int) -> Fraction:
    return Fraction(n // 2)


def expected_Z1(n: int) -> Fraction:
    """같은 row 의 0-0 비순서쌍 수의 기댓값 (row n/2 는 모든 값이 두 번씩 나타남)"""
    pairs = Fraction(n * (n - 1), 2)
    independent = pairs / (n * n)
    if n % 2:
        return (n // 2) * independent
    half = n // 2
    duplicated_row = Fraction(half, n) + (pairs - half) / (n * n)
    return (half - 1) * independent + duplicated_row


def lambda_eps(n: int, epsilon: float) -> float:
    """lambda_eps(n) = (eps * floor(n/2) - 1)^2 / (4n)"""
    return (epsilon * (n // 2) - 1) ** 2 / (4 * n)


def prime_formula(p: int) -> Fraction:
    """소수 p 에서 동기화 확률 1 - p!/p^p"""
    if not sp.isprime(p):
        raise InvalidParameterError(f"p={p} 는 소수가 아닙니다")
    return 1 - Fraction(math.factorial(p), p ** p)


def prime_decay(p: int) -> Dict[str, float]:
    """비동기화 확률 p!/p^p 와 Stirling 근사 sqrt(2 pi p) e^-p"""
    if not sp.isprime(p):
        raise InvalidParameterError(f"p={p} 는 소수가 아닙니다")
    exact = Fraction(math.factorial(p), p ** p)
    return {"p": p, "non_sync": float(exact), "stirling": math.sqrt(2 * math.pi * p) * math.exp(-p)}


# --- 블록 단위 측정 ---
def _block_statistics(B: np.ndarray, n: int) -> Dict[str, np.ndarray]:
    """(N, n) 매핑 배치 -> T_b 통계 배열들"""
    T = distance_table(B, n)
    z = np.count_nonzero(T == 0, axis=2)
    ordered = np.sort(T, axis=2)
    R = 1 + np.count_nonzero(np.diff(ordered, axis=2), axis=2)
    return {
        "T": T,
        "R": R,
        "D": np.count_nonzero(z, axis=1),
        "Z0": z.sum(axis=1),
        "Z1": (z * (z - 1) // 2).sum(axis=1),
        "max_excess": np.maximum(z - 1, 0).sum(axis=1),
        "certificate": certificate_mask(T),
    }


def _records_for_block(
    B: np.ndarray, n: int, first_trial: int, alpha: float, beta: float, exhaustive: bool,
) -> Tuple[List[TrialRecord], np.ndarray]:
    count = B.shape[0]
    if n == 1:
        records = [
            TrialRecord(n=1, trial=first_trial + t, synchronizing=True, certificate_present=True, D=0, Z0=0, Z1=0,
                        max_excess=0, min_R=0, in_E_row=True, in_E_zero=True)
            for t in range(count)
        ]
        return records, np.zeros((count, 0), dtype=np.int64)

    stats = _block_statistics(B, n)
    half = n // 2
    shift = tuple((q + 1) % n for q in range(n))
    records = []
    for t in range(count):
        certificate = bool(stats["certificate"][t])
        if exhaustive:
            synchronizing = letters_synchronize((shift, tuple(int(v) for v in B[t])), n)
        elif certificate:
            synchronizing = True
        else:
            synchronizing = distance_graph_synchronizes(DistanceMatrix(n=n, entries=stats["T"][t]))
        min_R = int(stats["R"][t].min())
        D = int(stats["D"][t])
        try:
            records.append(TrialRecord(
                n=n, trial=first_trial + t, synchronizing=synchronizing, certificate_present=certificate,
                D=D, Z0=int(stats["Z0"][t]), Z1=int(stats["Z1"][t]), max_excess=int(stats["max_excess"][t]),
                min_R=min_R, in_E_row=min_R >= alpha * half, in_E_zero=D >= beta * half,
            ))
        except ValidationError as e:
            raise InternalError(f"표본 불변식 위반 (n={n}, trial={first_trial + t}): {e.errors()[0]['msg']}") from e
    return records, stats["R"]


def _simulate_block(n: int, seed: int, start: int, stop: int, alpha: float, beta: float, sampler: Sampler):
    B = np.stack([sampler(RngStream(master_seed=seed, trial_index=t), n) for t in range(start, stop)])
    return _records_for_block(B, n, start, alpha, beta, exhaustive=False)


def _exhaustive_block(n: int, start: int, stop: int, alpha: float, beta: float):
    mappings = itertools.islice(itertools.product(range(n), repeat=n), start, stop)
    B = np.array(list(mappings), dtype=np.int64).reshape(-1, n)
    return _records_for_block(B, n, start, alpha, beta, exhaustive=True)


def _sync_count_block(n: int, start: int, stop: int) -> Tuple[int, int, Optional[Tuple[int, ...]]]:
    """(동기화 개수, '동기화 <=> 비순열' 위반 개수, 첫 위반 매핑)"""
    shift = tuple((q + 1) % n for q in range(n))
    sync_count = mismatches = 0
    first = None
    for b in itertools.islice(itertools.product(range(n), repeat=n), start, stop):
        synchronizing = letters_synchronize((shift, b), n)
        sync_count += synchronizing
        if synchronizing == (len(set(b)) == n):
            mismatches += 1
            if first is None:
                first = b
    return sync_count, mismatches, first


class ExperimentService:
    """Monte Carlo / 전수 열거 실험 실행기"""

    def __init__(self, workers: int = DEFAULT_WORKERS):
        self.workers = max(1, workers)

    # --- 병렬 실행 ---
    def _map_blocks(self, fn, arg_list: List[tuple], progress: Optional[str] = None) -> list:
        show = progress is not None and sys.stderr.isatty()
        if self.workers == 1 or len(arg_list) == 1:
            iterator = (fn(*args) for args in arg_list)
            return list(tqdm(iterator, total=len(arg_list), desc=progress, disable=not show))
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            futures = pool.map(fn, *zip(*arg_list))
            return list(tqdm(futures, total=len(arg_list), desc=progress, disable=not show))

    @staticmethod
    def _ranges(total: int, size: int) -> List[Tuple[int, int]]:
        return [(start, min(start + size, total)) for start in range(0, total, size)]

    def simulate(
        self, n: int, trials: int, seed: int, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA,
        sampler: Sampler = draw_mapping,
    ) -> Tuple[List[TrialRecord], np.ndarray]:
        """trial 순서대로 정렬된 (records, R 배열 (trials, floor(n/2)))"""
        if trials < 1:
            raise InvalidParameterError(f"trials >= 1 이 필요합니다 (trials={trials})")
        if n < 1:
            raise InvalidParameterError(f"n >= 1 이 필요합니다 (n={n})")
        block = max(1, BLOCK_ELEMENTS // max(1, (n // 2) * n))
        args = [(n, seed, start, stop, alpha, beta, sampler) for start, stop in self._ranges(trials, block)]
        logger.info(f"🔄 Monte Carlo 시작: n={n}, trials={trials}, seed={seed}, 블록 {len(args)}개, workers={self.workers}")
        return self._collect(self._map_blocks(_simulate_block, args, progress=f"mc n={n}"), n)

    def enumerate_all(self, n: int, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA):
        """n^n 개 매핑 전부 (trial 번호 = 사전순 인덱스)"""
        if not 2 <= n <= MAX_ENUMERATION_N:
            raise CapacityExceededError(f"전수 열거는 2 <= n <= {MAX_ENUMERATION_N} 만 지원합니다 (n={n})")
        args = [(n, start, stop, alpha, beta) for start, stop in self._ranges(n ** n, ENUMERATION_BLOCK)]
        return self._collect(self._map_blocks(_exhaustive_block, args, progress=f"enumerate n={n}"), n)

    @staticmethod
    def _collect(blocks, n: int) -> Tuple[List[TrialRecord], np.ndarray]:
        records = [record for block_records, _ in blocks for record in block_records]
        R = np.concatenate([block_R for _, block_R in blocks], axis=0) if blocks else np.zeros((0, n // 2))
        return records, R

    # --- 요약 ---
    def summarize(self, records: List[TrialRecord], seed: int, params: BoundParams, exact: bool = False,
                  R: Optional[np.ndarray] = None) -> Summary:
        n = records[0].n
        trials = len(records)
        column = lambda name: np.array([getattr(record, name) for record in records])
        sync = int(column("synchronizing").sum())
        proportions = {
            "synchronizing": proportion(sync, trials),
            "non_synchronizing": proportion(trials - sync, trials),
            "certificate": proportion(int(column("certificate_present").sum()), trials),
            "E_row_complement": proportion(int((~column("in_E_row")).sum()), trials),
            "E_zero_complement": proportion(int((~column("in_E_zero")).sum()), trials),
        }
        D, Z0, Z1 = column("D"), column("Z0"), column("Z1")
        moments = {
            "D": moment(D, exact),
            "Z0": moment(Z0, exact),
            "Z1": moment(Z1, exact),
            "Z0_minus_Z1": moment(Z0 - Z1, exact),
            "min_R": moment(column("min_R"), exact),
        }
        row_R = [moment(R[:, r], exact) for r in range(R.shape[1])] if R is not None else []
        return Summary(n=n, trials=trials, seed=seed, proportions=proportions, moments=moments, row_R=row_R, params=params)

    # --- 실험들 ---
    def estimate_sync_prob(self, n: int, trials: int, seed: int, alpha: float = DEFAULT_ALPHA,
                           beta: float = DEFAULT_BETA) -> Summary:
        records, R = self.simulate(n, trials, seed, alpha, beta)
        summary = self.summarize(records, seed, BoundParams(alpha=alpha, beta=beta), R=R)
        logger.info(f"📊 n={n}: 동기화 비율 {summary.proportions['synchronizing'].estimate:.4f}")
        return summary

    def enumerate_exact(self, n: int) -> ExactStats:
        records, R = self.enumerate_all(n)
        total = len(records)
        column = lambda name: np.array([getattr(record, name) for record in records], dtype=np.int64)
        D, Z0, Z1 = column("D"), column("Z0"), column("Z1")

        def mean(values):
            return Fraction(int(values.sum()), total)

        def variance(values):
            return Fraction(int((values * values).sum()), total) - mean(values) ** 2

        permutations = sum(1 for b in itertools.product(range(n), repeat=n) if len(set(b)) == n)
        stats = ExactStats(
            n=n, total=total,
            sync_count=int(column("synchronizing").sum()),
            certificate_count=int(column("certificate_present").sum()),
            permutation_count=permutations,
            mean_D=mean(D), var_D=variance(D),
            mean_Z0=mean(Z0), mean_Z1=mean(Z1),
            var_Z0=variance(Z0), var_Z1=variance(Z1),
            mean_R=[Fraction(int(R[:, r].sum()), total) for r in range(R.shape[1])],
            D_distribution=dict(sorted(Counter(int(d) for d in D).items())),
        )
        logger.info(f"✅ n={n} 전수 열거 완료: 동기화 {stats.sync_count}/{total}, E[D]={stats.mean_D}")
        return stats

    def count_synchronizing(self, n: int) -> Tuple[int, int, Optional[Tuple[int, ...]]]:
        """pair BFS 로 n^n 개 A_n(b) 를 모두 검사 -> (동기화 수, 비순열 기준 위반 수, 첫 위반)"""
        if n > MAX_PRIME_CHECK_P:
            raise CapacityExceededError(f"전수 동기화 검사는 n <= {MAX_PRIME_CHECK_P} 까지 지원합니다 (n={n})")
        if n < 1:
            raise InvalidParameterError(f"n >= 1 이 필요합니다 (n={n})")
        args = [(n, start, stop) for start, stop in self._ranges(n ** n, ENUMERATION_BLOCK)]
        blocks = self._map_blocks(_sync_count_block, args, progress=f"pair BFS n={n}")
        sync_count = sum(block[0] for block in blocks)
        mismatches = sum(block[1] for block in blocks)
        first = next((block[2] for block in blocks if block[2] is not None), None)
        return sync_count, mismatches, first

    def prime_criterion_check(self, p: int) -> bool:
        """모든 b in M_p 에 대해: A_p(b) 동기화 <=> b 가 순열이 아님"""
        if not sp.isprime(p):
            raise InvalidParameterError(f"p={p} 는 소수가 아닙니다")
        sync_count, mismatches, _ = self.count_synchronizing(p)
        expected = p ** p - math.factorial(p)
        logger.info(f"📊 p={p}: 동기화 {sync_count} (기대값 {expected}), 기준 위반 {mismatches}")
        return mismatches == 0

    def _records(self, n: int, trials: int, seed: int, alpha: float, beta: float, exhaustive: bool,
                 sampler: Sampler = draw_mapping):
        if exhaustive:
            return self.enumerate_all(n, alpha, beta)
        return self.simulate(n, trials, seed, alpha, beta, sampler)

    def lemma_row_experiment(self, n: int, trials: int, epsilon: float, seed: int,
                             exhaustive: bool = False) -> RowLemmaResult:
        """P[E_row^c(alpha)], alpha = 1 - e^-1 - eps, 그리고 floor(n/2) exp(-2 lambda_eps(n))"""
        if epsilon <= 0 or n <= 2 / epsilon:
            raise InvalidParameterError(f"n > 2/epsilon 이 필요합니다 (n={n}, epsilon={epsilon})")
        alpha = 1 - math.exp(-1) - epsilon
        records, _ = self._records(n, trials, seed, alpha, DEFAULT_BETA, exhaustive)
        misses = sum(1 for record in records if not record.in_E_row)
        lam = lambda_eps(n, epsilon)
        return RowLemmaResult(
            n=n, trials=len(records), exhaustive=exhaustive,
            empirical=proportion(misses, len(records)),
            mcdiarmid_value=(n // 2) * math.exp(-2 * lam),
            params=BoundParams(alpha=alpha, epsilon=epsilon, lambda_eps=lam),
        )

    def row_tail_experiment(self, n: int, trials: int, epsilon: float, seed: int) -> List[Dict]:
        """row 별 P[R_i < floor(n/2)(1 - e^-1 - eps)] 와 단일 row 상한 exp(-2 lambda_eps(n))"""
        if epsilon <= 0 or n <= 2 / epsilon:
            raise InvalidParameterError(f"n > 2/epsilon 이 필요합니다 (n={n}, epsilon={epsilon})")
        _, R = self.simulate(n, trials, seed)
        threshold = (n // 2) * (1 - math.exp(-1) - epsilon)
        bound = math.exp(-2 * lambda_eps(n, epsilon))
        rows = []
        for r in range(R.shape[1]):
            estimate = proportion(int((R[:, r] < threshold).sum()), R.shape[0])
            rows.append({"i": r + 1, "freq": estimate.estimate, "low": estimate.low, "high": estimate.high,
                         "single_row_bound": bound})
        return rows

    def lemma_zero_experiment(self, n: int, trials: int, epsilon: float, seed: int,
                              exhaustive: bool = False) -> ZeroLemmaResult:
        """P[E_zero^c(beta)], beta = 1/2 - eps, 과 D, Z0, Z1 의 표본 모멘트"""
        if not 0 < epsilon < 0.5:
            raise InvalidParameterError(f"epsilon 은 (0, 1/2) 범위여야 합니다 (epsilon={epsilon})")
        beta = 0.5 - epsilon
        records, _ = self._records(n, trials, seed, DEFAULT_ALPHA, beta, exhaustive)
        total = len(records)
        half = n // 2
        misses = sum(1 for record in records if record.D < beta * half)
        values = {name: np.array([getattr(record, name) for record in records], dtype=np.int64)
                  for name in ("D", "Z0", "Z1")}
        exact_means = None
        if exhaustive:
            exact_means = {name: Fraction(int(v.sum()), total) for name, v in values.items()}
        return ZeroLemmaResult(
            n=n, trials=total, exhaustive=exhaustive,
            empirical=proportion(misses, total),
            moments={name: moment(v, exhaustive) for name, v in values.items()},
            exact_means=exact_means,
            params=BoundParams(beta=beta, epsilon=epsilon),
        )

    def concentration_reduction_experiment(self, n: int, trials: int, epsilon: float, seed: int) -> ReductionResult:
        """nu = eps n / 8, delta = E[Z0 - Z1] - 2 nu 에서 표본으로 감소 부등식을 검증"""
        nu = epsilon * n / 8
        mean_Z0, mean_Z1 = float(expected_Z0(n)), float(expected_Z1(n))
        delta = mean_Z0 - mean_Z1 - 2 * nu
        records, _ = self.simulate(n, trials, seed)
        total = len(records)
        below = sum(1 for record in records if record.D < delta)
        z0_low = sum(1 for record in records if record.Z0 < mean_Z0 - nu)
        z1_high = sum(1 for record in records if record.Z1 > mean_Z1 + nu)
        return ReductionResult(
            n=n, trials=total,
            d_below_delta=proportion(below, total),
            z0_low_tail=proportion(z0_low, total),
            z1_high_tail=proportion(z1_high, total),
            holds=below <= z0_low + z1_high,
            params=BoundParams(epsilon=epsilon, nu=nu, delta=delta),
        )

    def claim9_experiment(self, n: int, trials: int, seed: int, exhaustive: bool = False,
                          sampler: Sampler = draw_mapping) -> List[Claim9Row]:
        """row 별 E[R_i] 추정, 평균 - 4 표준오차가 floor(n/2)(1 - e^-1) - 1 보다 작으면 flag"""
        _, R = self._records(n, trials, seed, DEFAULT_ALPHA, DEFAULT_BETA, exhaustive, sampler)
        bound = (n // 2) * (1 - math.exp(-1)) - 1
        rows = []
        for r in range(R.shape[1]):
            estimate = moment(R[:, r], exact=exhaustive)
            rows.append(Claim9Row(i=r + 1, mean_R=estimate.mean, stderr=estimate.stderr, bound=bound,
                                  flagged=estimate.mean - 4 * estimate.stderr < bound))
        flagged = [row.i for row in rows if row.flagged]
        if flagged:
            logger.warning(f"⚠️ n={n}: E[R_i] 하한 아래로 보이는 row {flagged}")
        return rows

    def conjecture_rate_probe(self, n_grid: Sequence[int], trials: int, seed: int) -> List[Dict]:
        """n 별 비동기화 빈도의 로그 (데이터만 내보내고 판정하지 않는다)"""
        rows = []
        for n in n_grid:
            records, _ = self.simulate(n, trials, seed)
            misses = sum(1 for record in records if not record.synchronizing)
            freq = misses / len(records)
            rows.append({"n": n, "trials": len(records), "non_sync": misses, "freq": freq,
                         "log_freq": math.log(freq) if misses else None})
        return rows
