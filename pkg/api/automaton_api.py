# api/automaton_api.py
from models.errors import InvalidParameterError
from models.schemas import CommandOutput, RunConfig
from services.automaton_service import (
    greedy_reset_word, is_synchronizing, make_cerny, make_circular, pair_merging_word, parse_mapping,
    shortest_reset_word,
)
from services.matrix_service import (
    build_matrix, certificate_to_reset_word, distance_graph_synchronizes, matrix_sync_certificate,
)

from . import CommandRouter

router = CommandRouter()


def _word_text(word) -> str:
    return "".join("ab"[c] for c in word) if word else "ε"


@router.command("sync-check", help="A_n(b) 동기화 여부 (pair BFS)", requires=("b",))
def sync_check(config: RunConfig) -> CommandOutput:
    mapping = parse_mapping(config.b)
    synchronizing = is_synchronizing(make_circular(mapping))
    record = {
        "n": mapping.n,
        "b": list(mapping.b),
        "synchronizing": synchronizing,
        "permutation": mapping.is_permutation(),
    }
    if mapping.n >= 2:
        record["distance_graph_synchronizing"] = distance_graph_synchronizes(build_matrix(mapping))
    return CommandOutput(text=f"synchronizing={str(synchronizing).lower()}", tables={"sync_check": record})


@router.command("reset-word", help="A_n(b) 의 reset word (작은 n 은 최단, 아니면 인증서/greedy)", requires=("b",))
def reset_word(config: RunConfig) -> CommandOutput:
    mapping = parse_mapping(config.b)
    dfa = make_circular(mapping)

    if config.i is not None or config.j is not None:
        if config.i is None or config.j is None:
            raise InvalidParameterError("쌍 병합 word 는 --i 와 --j 가 모두 필요합니다")
        if not (0 <= config.i < mapping.n and 0 <= config.j < mapping.n):
            raise InvalidParameterError(f"상태 ({config.i}, {config.j}) 가 [0, {mapping.n - 1}] 밖입니다")
        word = pair_merging_word(dfa, config.i, config.j)
        record = {"n": mapping.n, "b": list(mapping.b), "method": "pair", "p": config.i, "q": config.j,
                  "word": _word_text(word) if word is not None else None,
                  "length": len(word) if word is not None else None}
        text = f"pair ({config.i}, {config.j}): " + (record["word"] if word is not None else "합칠 수 없음")
        return CommandOutput(text=text, tables={"reset_word": record})

    if mapping.n <= config.max_exact_n:
        method, word = "shortest", shortest_reset_word(dfa, config.max_exact_n)
    else:
        certificate = matrix_sync_certificate(build_matrix(mapping))
        if certificate is not None:
            method, word = "certificate", certificate_to_reset_word(mapping, certificate)
        else:
            method, word = "greedy", greedy_reset_word(dfa)

    record = {
        "n": mapping.n,
        "b": list(mapping.b),
        "method": method,
        "synchronizing": word is not None,
        "word": _word_text(word) if word is not None else None,
        "length": len(word) if word is not None else None,
    }
    if word is None:
        text = "동기화되지 않음 (reset word 없음)"
    else:
        text = f"{method} reset word 길이 {len(word)}: {record['word']}"
    return CommandOutput(text=text, tables={"reset_word": record})


@router.command("cerny", help="Černý automaton C_n 의 최단 reset word", requires=("n",))
def cerny(config: RunConfig) -> CommandOutput:
    word = shortest_reset_word(make_cerny(config.n), config.max_exact_n)
    record = {
        "n": config.n,
        "length": len(word),
        "cerny_bound": (config.n - 1) ** 2,
        "word": _word_text(word),
    }
    return CommandOutput(text=f"shortest reset length {len(word)}", tables={"cerny": record})
