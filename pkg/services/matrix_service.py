# services/matrix_service.py
"""
거리 행렬 T_b 와 그 통계량 (R_i, z_i, D, Z0, Z1), 사건 E_row / E_zero,
그리고 a^l1 b a^l2 b 형태의 동기화 인증서.

행 번호 i 는 1..floor(n/2), 열 번호 j 는 0..n-1 이다.
numpy 저장은 0-based 이므로 entries[i - 1, j] == T_b(i, j).
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from models.errors import InternalError, InvalidParameterError
from models.schemas import (
    CircularMapping, Depth1Plan, Depth2Plan, DistanceMatrix, MatrixStats, SyncCertificate, Word,
)
from services.automaton_service import apply_word, make_circular

logger = logging.getLogger(__name__)


def cyclic_abs(r: int, n: int) -> int:
    """n-cyclic absolute value |r|_n = min(r mod n, -r mod n)"""
    if n <= 0:
        raise InvalidParameterError(f"n 은 양수여야 합니다 (n={n})")
    return min(r % n, (-r) % n)


def row_offsets(n: int) -> np.ndarray:
    """(floor(n/2), n) 배열: [i - 1, j] -> (j + i) mod n"""
    rows = np.arange(1, n // 2 + 1, dtype=np.int64)[:, None]
    cols = np.arange(n, dtype=np.int64)[None, :]
    return (cols + rows) % n


def distance_table(b: np.ndarray, n: int) -> np.ndarray:
    """벡터화된 T_b. b 는 길이 n 의 int 배열 (또는 (..., n) 배치)"""
    diff = (b[..., None, :] - b[..., row_offsets(n)]) % n
    return np.minimum(diff, n - diff)


def build_matrix(mapping: CircularMapping) -> DistanceMatrix:
    n = mapping.n
    if n < 2:
        raise InvalidParameterError(f"n={n} 에서는 T_b 의 행이 없습니다 (n >= 2 필요)")
    return DistanceMatrix(n=n, entries=distance_table(mapping.as_array(), n))


def analyze_matrix(T: DistanceMatrix) -> MatrixStats:
    entries = T.entries
    ordered = np.sort(entries, axis=1)
    R = 1 + np.count_nonzero(np.diff(ordered, axis=1), axis=1)
    z = np.count_nonzero(entries == 0, axis=1)
    flags = (z > 0).astype(np.int64)
    return MatrixStats(
        R=tuple(int(v) for v in R),
        z=tuple(int(v) for v in z),
        Dflags=tuple(int(v) for v in flags),
        D=int(flags.sum()),
        Z0=int(z.sum()),
        Z1=int((z * (z - 1) // 2).sum()),
        max_excess=int(np.maximum(z - 1, 0).sum()),
    )


def in_events(stats: MatrixStats, n: int, alpha: float, beta: float) -> Tuple[bool, bool]:
    """(b in E_row(alpha), b in E_zero(beta))"""
    if not (0 < alpha <= 1 and 0 < beta <= 1):
        raise InvalidParameterError(f"alpha, beta 는 (0, 1] 범위여야 합니다 (alpha={alpha}, beta={beta})")
    half = n // 2
    return stats.min_R >= alpha * half, stats.D >= beta * half


# --- 인증서 ---
def presence_table(T: DistanceMatrix) -> np.ndarray:
    """(h + 1, h + 1) bool: [i, v] = row i 에 값 v 가 있는가 (row 0 은 사용하지 않음)"""
    half = T.rows
    table = np.zeros((half + 1, half + 1), dtype=bool)
    rows = np.repeat(np.arange(1, half + 1), T.n)
    table[rows, T.entries.ravel()] = True
    return table


def pigeonhole_condition(T: DistanceMatrix) -> bool:
    """모든 row i 에 대해 (row i 의 서로 다른 0 아닌 값 수) + (0 을 가진 row 수) > floor(n/2)"""
    table = presence_table(T)
    zero_rows = int(table[1:, 0].sum())
    nonzero_distinct = table[1:, 1:].sum(axis=1)
    return bool(np.all(nonzero_distinct + zero_rows > T.rows))


def _zero_rows(entries: np.ndarray) -> np.ndarray:
    """(..., h + 1) bool: [v] = row v 에 0 이 있는가. 값 0 자리는 항상 False"""
    has_zero = (entries == 0).any(axis=-1)
    pad = np.zeros(has_zero.shape[:-1] + (1,), dtype=bool)
    return np.concatenate([pad, has_zero], axis=-1)


def certificate_mask(entries: np.ndarray) -> np.ndarray:
    """
    (..., h, n) 배치에 대한 인증서 존재 여부 (...,).
    row i 가 0 을 갖거나, row i 의 어떤 값 j 의 row 가 0 을 가지면 거리 i 는 덮인다.
    """
    zero_rows = _zero_rows(entries)
    depth1 = zero_rows[..., 1:]
    reachable = np.take_along_axis(zero_rows[..., None, :], entries, axis=-1)
    return np.all(depth1 | reachable.any(axis=-1), axis=-1)


def matrix_sync_certificate(T: DistanceMatrix) -> Optional[SyncCertificate]:
    """모든 거리 i 에 대해 Depth1 (row i 에 0) 또는 Depth2 (row i 의 값 j 의 row 에 0) 를 찾는다"""
    zero_rows = _zero_rows(T.entries)
    plans: List = []
    for i in range(1, T.rows + 1):
        row = T.row(i)
        hits = np.flatnonzero(row == 0)
        if hits.size:
            plans.append(Depth1Plan(distance=i, column=int(hits[0])))
            continue
        candidates = np.flatnonzero(zero_rows[row])
        if not candidates.size:
            return None
        k = int(candidates[0])
        j = int(row[k])
        inner = int(np.flatnonzero(T.row(j) == 0)[0])
        plans.append(Depth2Plan(distance=i, column=k, value=j, inner_column=inner))
    return SyncCertificate(n=T.n, plans=tuple(plans))


def distance_graph_synchronizes(T: DistanceMatrix) -> bool:
    """
    A_n(b) 에서 a 는 쌍의 cyclic 거리를 보존하므로, 거리 d 의 쌍이 b 로 갈 수 있는 거리는
    정확히 row d 의 값들이다. 모든 거리가 0 에 도달하면 동기화된다 (pair BFS 와 동치).
    """
    table = presence_table(T)
    good = np.zeros(T.rows + 1, dtype=bool)
    good[0] = True
    while True:
        updated = good.copy()
        updated[1:] |= table[1:][:, good].any(axis=1)
        if np.array_equal(updated, good):
            return bool(good.all())
        good = updated


def _anchor(p: int, q: int, n: int) -> Tuple[int, int]:
    """쌍 {p, q} 를 {r, (r + i)_n}, 1 <= i <= floor(n/2) 로 표현"""
    d = (q - p) % n
    if d <= n // 2:
        return p, d
    return q, n - d


def certificate_to_reset_word(mapping: CircularMapping, cert: SyncCertificate) -> Word:
    """현재 집합의 최소 쌍을 인증서 계획대로 합치는 일을 singleton 이 될 때까지 반복"""
    n = mapping.n
    b = mapping.b
    dfa = make_circular(mapping)
    if cert.n != n:
        raise InternalError(f"인증서 n={cert.n} 이 매핑 n={n} 과 다릅니다")

    current = dfa.states
    word: List[int] = []
    while len(current) > 1:
        p, q = sorted(current)[:2]
        r, i = _anchor(p, q, n)
        plan = cert.plan_for(i)
        k = plan.column
        if plan.kind == "depth1":
            if b[k] != b[(k + i) % n]:
                raise InternalError(f"인증서 불일치: T({i}, {k}) != 0")
            piece = [0] * ((k - r) % n) + [1]
        else:
            x, y = b[k], b[(k + i) % n]
            if cyclic_abs(x - y, n) != plan.value:
                raise InternalError(f"인증서 불일치: T({i}, {k}) != {plan.value}")
            r2, j = _anchor(x, y, n)
            k2 = plan.inner_column
            if j != plan.value or b[k2] != b[(k2 + j) % n]:
                raise InternalError(f"인증서 불일치: T({j}, {k2}) != 0")
            piece = [0] * ((k - r) % n) + [1] + [0] * ((k2 - r2) % n) + [1]
        word.extend(piece)
        current = apply_word(dfa, current, tuple(piece))

    result = tuple(word)
    if len(apply_word(dfa, dfa.states, result)) != 1:
        raise InternalError("인증서로 만든 word 가 reset word 가 아닙니다")
    return result
