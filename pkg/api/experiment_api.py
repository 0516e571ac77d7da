# api/experiment_api.py
"""Monte Carlo / 전수 열거 실험 명령들"""

import math

from config import MAX_ENUMERATION_N
from models.schemas import BoundParams, CommandOutput, RunConfig
from services import get_chromatic_service, get_experiment_service
from services.experiment_service import (
    expected_Z0, expected_Z1, non_increasing_within_ci, prime_decay, prime_formula,
)
from services.pipeline_service import dumps

from . import CommandRouter, grid_of

router = CommandRouter()


def _experiments(config: RunConfig):
    return get_experiment_service(config.workers)


@router.command("exact", help="n^n 개 매핑 전수 열거 (정확한 분수)", requires=("n",))
def exact(config: RunConfig) -> CommandOutput:
    stats = _experiments(config).enumerate_exact(config.n)
    chromatic = get_chromatic_service(config.max_chromatic_n)
    check = {
        "n": config.n,
        "expected_D_closed_form": chromatic.expected_D(config.n),
        "mean_D_matches": chromatic.expected_D(config.n) == stats.mean_D,
        "expected_Z0_closed_form": expected_Z0(config.n),
        "mean_Z0_matches": expected_Z0(config.n) == stats.mean_Z0,
        "expected_Z1_closed_form": expected_Z1(config.n),
        "mean_Z1_matches": expected_Z1(config.n) == stats.mean_Z1,
    }
    if config.n <= chromatic.max_n:
        variance = chromatic.variance_D(config.n)
        check.update({"variance_D_closed_form": variance, "var_D_matches": variance == stats.var_D})
    return CommandOutput(text=dumps(stats), tables={"exact": stats, "exact_check": check})


@router.command("mc", help="동기화 확률 Monte Carlo 추정 (Wilson 95% 구간)", requires=("n|n_grid",))
def mc(config: RunConfig) -> CommandOutput:
    experiments = _experiments(config)
    summaries = [experiments.estimate_sync_prob(n, config.trials, config.seed, config.alpha, config.beta)
                 for n in grid_of(config)]
    rows = []
    for summary in summaries:
        non_sync = summary.proportions["non_synchronizing"]
        rows.append({
            "n": summary.n, "trials": summary.trials, "seed": summary.seed,
            "non_sync": non_sync.successes, "freq": non_sync.estimate, "low": non_sync.low, "high": non_sync.high,
            "ten_over_n": 10 / summary.n,
            "certificate_freq": summary.proportions["certificate"].estimate,
        })
    trend = non_increasing_within_ci([summary.proportions["non_synchronizing"] for summary in summaries])
    text = "\n".join(f"n={row['n']}: 비동기화 {row['freq']:.5f} [{row['low']:.5f}, {row['high']:.5f}]" for row in rows)
    text += f"\nnon_increasing_within_ci={str(trend).lower()}"
    return CommandOutput(text=text, tables={"mc": rows, "summaries": summaries, "trend": {"non_increasing_within_ci": trend}})


@router.command("lemma-row", help="P[E_row^c] 경험 빈도와 McDiarmid 상한", requires=("n|n_grid",))
def lemma_row(config: RunConfig) -> CommandOutput:
    experiments = _experiments(config)
    results, tails = [], []
    for n in grid_of(config):
        results.append(experiments.lemma_row_experiment(n, config.trials, config.epsilon, config.seed, config.exhaustive))
        if not config.exhaustive:
            tails.extend({"n": n, **row} for row in experiments.row_tail_experiment(n, config.trials, config.epsilon, config.seed))
    trend = non_increasing_within_ci([result.empirical for result in results])
    text = "\n".join(
        f"n={r.n}: P[E_row^c]={r.empirical.estimate:.5f} [{r.empirical.low:.5f}, {r.empirical.high:.5f}] "
        f"mcdiarmid={r.mcdiarmid_value:.4g}"
        for r in results
    )
    tables = {"lemma_row": results, "trend": {"non_increasing_within_ci": trend}}
    if tails:
        tables["row_tail"] = tails
    return CommandOutput(text=text, tables=tables)


@router.command("lemma-zero", help="P[E_zero^c] 경험 빈도와 D, Z0, Z1 모멘트", requires=("n|n_grid",))
def lemma_zero(config: RunConfig) -> CommandOutput:
    experiments = _experiments(config)
    results = [experiments.lemma_zero_experiment(n, config.trials, config.epsilon, config.seed, config.exhaustive)
               for n in grid_of(config)]
    trend = non_increasing_within_ci([result.empirical for result in results])
    text = "\n".join(
        f"n={r.n}: P[E_zero^c]={r.empirical.estimate:.5f} [{r.empirical.low:.5f}, {r.empirical.high:.5f}]"
        for r in results
    )
    return CommandOutput(text=text, tables={"lemma_zero": results, "trend": {"non_increasing_within_ci": trend}})


@router.command("moments", help="Var[Z0]/n, Var[Z1]/n 표본값과 E[Z0], E[Z1] 닫힌 형태", requires=("n|n_grid",))
def moments(config: RunConfig) -> CommandOutput:
    experiments = _experiments(config)
    chromatic = get_chromatic_service(config.max_chromatic_n)
    rows = []
    for n in grid_of(config):
        if config.exhaustive and n <= MAX_ENUMERATION_N:
            records, R = experiments.enumerate_all(n)
            summary = experiments.summarize(records, config.seed, _params(config), exact=True, R=R)
        else:
            records, R = experiments.simulate(n, config.trials, config.seed, config.alpha, config.beta)
            summary = experiments.summarize(records, config.seed, _params(config), R=R)
        row = {
            "n": n,
            "trials": summary.trials,
            "mean_Z0": summary.moments["Z0"].mean,
            "expected_Z0": expected_Z0(n),
            "mean_Z1": summary.moments["Z1"].mean,
            "expected_Z1": expected_Z1(n),
            "var_Z0_over_n": summary.moments["Z0"].variance / n,
            "var_Z1_over_n": summary.moments["Z1"].variance / n,
            "var_D_over_n": summary.moments["D"].variance / n,
            "mean_Z0_minus_Z1": summary.moments["Z0_minus_Z1"].mean,
            "half_floor_minus_one": 0.5 * (n // 2) - 1,
        }
        if 2 <= n <= chromatic.max_n:
            row["exact_var_D_over_n"] = float(chromatic.variance_D(n)) / n
        rows.append(row)
    text = "\n".join(
        f"n={r['n']}: Var[Z0]/n={r['var_Z0_over_n']:.4f} Var[Z1]/n={r['var_Z1_over_n']:.4f} Var[D]/n={r['var_D_over_n']:.4f}"
        for r in rows
    )
    return CommandOutput(text=text, tables={"moments": rows})


def _params(config: RunConfig) -> BoundParams:
    return BoundParams(alpha=config.alpha, beta=config.beta)


@router.command("claim9", help="row 별 E[R_i] 와 floor(n/2)(1 - e^-1) - 1 비교", requires=("n",))
def claim9(config: RunConfig) -> CommandOutput:
    rows = _experiments(config).claim9_experiment(config.n, config.trials, config.seed, config.exhaustive)
    flagged = [row.i for row in rows if row.flagged]
    text = f"n={config.n}: row {len(rows)}개 중 flag {len(flagged)}개" + (f" {flagged}" if flagged else "")
    return CommandOutput(text=text, tables={"claim9": rows})


@router.command("prime-check", help="소수 p 에서 p^p - p! 동기화 개수와 순열 기준 전수 검사", requires=("n",))
def prime_check(config: RunConfig) -> CommandOutput:
    p = config.n
    formula = prime_formula(p)
    sync_count, mismatches, first = _experiments(config).count_synchronizing(p)
    total = p ** p
    record = {
        "p": p,
        "total": total,
        "sync_count": sync_count,
        "expected_sync_count": total - math.factorial(p),
        "probability": formula,
        "count_matches": sync_count == total - math.factorial(p),
        "criterion_mismatches": mismatches,
        "first_mismatch": list(first) if first is not None else None,
        **{key: value for key, value in prime_decay(p).items() if key != "p"},
    }
    text = f"p={p}: 동기화 {sync_count}/{total} (1 - p!/p^p = {formula}), 기준 위반 {mismatches}"
    return CommandOutput(text=text, tables={"prime_check": record})


@router.command("reduction", help="P[D < delta] <= P[Z0 낮은 꼬리] + P[Z1 높은 꼬리] 표본 검증", requires=("n|n_grid",))
def reduction(config: RunConfig) -> CommandOutput:
    experiments = _experiments(config)
    results = [experiments.concentration_reduction_experiment(n, config.trials, config.epsilon, config.seed)
               for n in grid_of(config)]
    text = "\n".join(
        f"n={r.n}: P[D<delta]={r.d_below_delta.estimate:.5f} <= "
        f"{r.z0_low_tail.estimate:.5f} + {r.z1_high_tail.estimate:.5f} ({'holds' if r.holds else 'fails'})"
        for r in results
    )
    return CommandOutput(text=text, tables={"reduction": results})


@router.command("probe-rate", help="n 별 비동기화 빈도의 로그 (데이터만)", requires=("n|n_grid",))
def probe_rate(config: RunConfig) -> CommandOutput:
    rows = _experiments(config).conjecture_rate_probe(grid_of(config), config.trials, config.seed)
    text = "\n".join(
        f"n={row['n']}: freq={row['freq']:.6f} log={row['log_freq'] if row['log_freq'] is not None else '-inf'}"
        for row in rows
    )
    return CommandOutput(text=text, tables={"probe_rate": rows})
