# api/chromatic_api.py
from models.schemas import CommandOutput, RunConfig
from services import get_chromatic_service
from services.chromatic_service import circulant_graph, coefficients, evaluate, mean_D_asymptote
from services.independence_service import circulant_structure

from . import CommandRouter, grid_of

router = CommandRouter()


@router.command("chromatic", help="순환 그래프 C_n(i) / C_n(i, j) 의 chromatic polynomial", requires=("n", "i"))
def chromatic(config: RunConfig) -> CommandOutput:
    service = get_chromatic_service(config.max_chromatic_n)
    n, i = config.n, config.i
    record = {"n": n, "i": i, "j": config.j}

    if config.j is None:
        poly = service.closed_form_Pi(n, i)
        components, length = circulant_structure(n, i)
        record.update({"method": "closed_form", "components": components, "cycle_length": length})
        if n <= service.max_n:
            record["matches_deletion_contraction"] = poly == service.chromatic_poly(circulant_graph(n, {i}))
    else:
        poly = service.chromatic_poly(circulant_graph(n, {i, config.j}))
        record["method"] = "deletion_contraction"

    # 큰 정수는 JSON 숫자 정밀도 문제를 피하려고 10진 문자열로 저장
    record["coefficients"] = [str(c) for c in coefficients(poly)]
    record["polynomial"] = str(poly.as_expr())
    if config.eval_at is not None:
        value = evaluate(poly, config.eval_at)
        record.update({"eval_at": config.eval_at, "value": str(value)})
        text = str(value)
    else:
        text = record["polynomial"]
    return CommandOutput(text=text, tables={"chromatic": record})


@router.command("bound-thm22", help="eta_star 와 동기화 확률 하한, E[D] 와 지수 ratio 상한", requires=("n|n_grid",))
def bound_thm22(config: RunConfig) -> CommandOutput:
    service = get_chromatic_service(config.max_chromatic_n)
    bounds, ratios = [], []
    for n in grid_of(config):
        eta_star, bound = service.theorem22_bound(n, config.epsilon)
        bounds.append({
            "n": n,
            "epsilon": config.epsilon,
            "eta_star": eta_star,
            "sync_lower_bound": bound,
            "vacuous": bound <= 0,
            "expected_D": service.expected_D(n),
            "expected_D_float": float(service.expected_D(n)),
            "mean_D_asymptote": mean_D_asymptote(n),
        })
        for i in range(1, n // 2 + 1):
            ratio, limit, holds = service.ratio_bound_check(n, i)
            ratios.append({"n": n, "i": i, "ratio": ratio, "ratio_float": float(ratio), "bound": limit, "holds": holds})

    text = "\n".join(
        f"n={row['n']}: eta_star={row['eta_star']:.4f} lower_bound={row['sync_lower_bound']:.6f}"
        + (" (vacuous)" if row["vacuous"] else "")
        for row in bounds
    )
    return CommandOutput(text=text, tables={"theorem22": bounds, "ratio_bounds": ratios})


@router.command("probe-var-d", help="정확한 Var[D]/n 와 공분산 항 (n <= chromatic 제한)", requires=("n|n_grid",))
def probe_var_d(config: RunConfig) -> CommandOutput:
    service = get_chromatic_service(config.max_chromatic_n)
    rows, covariances = [], []
    for n in grid_of(config):
        variance = service.variance_D(n)
        rows.append({
            "n": n,
            "expected_D": service.expected_D(n),
            "variance_D": variance,
            "variance_over_n": float(variance) / n,
        })
        covariances.extend(service.covariance_terms(n))
    text = "\n".join(f"n={row['n']}: Var[D]={row['variance_D']} Var[D]/n={row['variance_over_n']:.4f}" for row in rows)
    return CommandOutput(text=text, tables={"var_d": rows, "covariance_terms": covariances})
