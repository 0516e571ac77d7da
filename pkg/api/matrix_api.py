# api/matrix_api.py
from models.schemas import CommandOutput, RunConfig
from services.automaton_service import parse_mapping
from services.matrix_service import (
    analyze_matrix, build_matrix, certificate_to_reset_word, distance_graph_synchronizes, in_events,
    matrix_sync_certificate, pigeonhole_condition,
)

from . import CommandRouter

router = CommandRouter()


@router.command("matrix", help="거리 행렬 T_b, 통계량, 사건 E_row/E_zero, 동기화 인증서", requires=("b",))
def matrix(config: RunConfig) -> CommandOutput:
    mapping = parse_mapping(config.b)
    T = build_matrix(mapping)
    stats = analyze_matrix(T)
    in_row, in_zero = in_events(stats, mapping.n, config.alpha, config.beta)
    certificate = matrix_sync_certificate(T)

    rows = [
        {"i": i, "entries": [int(v) for v in T.row(i)], "R": stats.R[i - 1], "z": stats.z[i - 1]}
        for i in range(1, T.rows + 1)
    ]
    summary = {
        "n": mapping.n,
        "b": list(mapping.b),
        "D": stats.D,
        "Z0": stats.Z0,
        "Z1": stats.Z1,
        "max_excess": stats.max_excess,
        "min_R": stats.min_R,
        "alpha": config.alpha,
        "beta": config.beta,
        "in_E_row": in_row,
        "in_E_zero": in_zero,
        "pigeonhole": pigeonhole_condition(T),
        "certificate_present": certificate is not None,
        "depth2_plans": certificate.depth2_count if certificate is not None else None,
        "synchronizing": distance_graph_synchronizes(T),
    }
    tables = {"matrix": rows, "matrix_stats": summary}
    if certificate is not None:
        word = certificate_to_reset_word(mapping, certificate)
        summary["certificate_word_length"] = len(word)
        tables["certificate"] = [plan.model_dump() for plan in certificate.plans]

    lines = [f"T_b (n={mapping.n})"]
    lines += [f"  i={row['i']}: {' '.join(map(str, row['entries']))}" for row in rows]
    lines.append(
        f"D={stats.D} Z0={stats.Z0} Z1={stats.Z1} min_R={stats.min_R} "
        f"E_row={in_row} E_zero={in_zero} certificate={certificate is not None}"
    )
    return CommandOutput(text="\n".join(lines), tables=tables)
