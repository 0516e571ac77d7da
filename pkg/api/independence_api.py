# api/independence_api.py
from fractions import Fraction

from models.errors import InvalidParameterError
from models.schemas import CommandOutput, RunConfig
from services.independence_service import (
    associated_multigraph, component_count, is_acyclic, joint_pmf_bruteforce, make_index_multiset, product_form,
    row_independent_subset, touched_coordinates, verify_factorization,
)

from . import CommandRouter

router = CommandRouter()


@router.command("independence", help="인덱스 멀티셋의 비순환성과 결합분포 분해 여부", requires=("n",))
def independence(config: RunConfig) -> CommandOutput:
    if config.pairs:
        pairs, source = config.pairs, "pairs"
    elif config.i is not None:
        pairs, source = row_independent_subset(config.n, config.i), f"row {config.i} 비순환 부분집합"
    else:
        raise InvalidParameterError("--pairs 또는 --i 가 필요합니다")

    S = make_index_multiset(config.n, pairs)
    acyclic = is_acyclic(S)
    factorizes = verify_factorization(S)
    pmf = joint_pmf_bruteforce(S)
    expected = product_form(S)

    record = {
        "n": S.n,
        "pairs": [list(p) for p in S.pairs],
        "edges": [list(e) for e in associated_multigraph(S).edges],
        "touched": touched_coordinates(S),
        "components": component_count(S),
        "acyclic": acyclic,
        "factorizes": factorizes,
    }
    keys = sorted(set(pmf.probabilities) | set(expected))
    table = [
        {"values": list(key), "joint": pmf.probabilities.get(key, Fraction(0)), "product": expected.get(key, Fraction(0))}
        for key in keys
    ]
    text = f"{source}: acyclic={str(acyclic).lower()} factorizes={str(factorizes).lower()}"
    return CommandOutput(text=text, tables={"independence": record, "joint_pmf": table})
