# services/automaton_service.py
"""
DFA 기본 연산 - word action, 동기화 판정(pair automaton), reset word 탐색
모든 함수는 순수 함수이며 입력 모델은 불변(frozen)이다.
"""

import logging
from collections import deque
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from config import MAX_EXACT_N
from models.errors import CapacityExceededError, InternalError, InvalidParameterError
from models.schemas import CircularMapping, Dfa, StateSet, Word

logger = logging.getLogger(__name__)


# --- 생성기 ---
def make_cerny(n: int) -> Dfa:
    """Černý automaton C_n: a 는 순환 이동, b 는 n-1 -> 0 만 움직이고 나머지는 self-loop"""
    if n < 2:
        raise InvalidParameterError(f"Černý automaton 은 n >= 2 가 필요합니다 (n={n})")
    shift = tuple((q + 1) % n for q in range(n))
    collapse = tuple(q if q != n - 1 else 0 for q in range(n))
    return Dfa(n=n, letters=(shift, collapse))


def make_circular(mapping: CircularMapping) -> Dfa:
    """A_n(b): letter 0 = 순환 이동 i -> (i+1)_n, letter 1 = b"""
    n = mapping.n
    shift = tuple((q + 1) % n for q in range(n))
    return Dfa(n=n, letters=(shift, tuple(mapping.b)))


def make_random_dfa(rng: np.random.Generator, n: int, k: int = 2) -> Dfa:
    """각 letter 가 M_n 에서 균등하게 뽑힌 k-letter DFA"""
    letters = tuple(tuple(int(v) for v in rng.integers(0, n, size=n)) for _ in range(k))
    return Dfa(n=n, letters=letters)


def parse_mapping(values: Sequence[int]) -> CircularMapping:
    try:
        return CircularMapping.of(values)
    except ValidationError as e:
        raise InvalidParameterError(f"잘못된 매핑 {list(values)}: {e.errors()[0]['msg']}") from e


def parse_dfa(n: int, letters: Iterable[Sequence[int]]) -> Dfa:
    try:
        return Dfa(n=n, letters=tuple(tuple(letter) for letter in letters))
    except ValidationError as e:
        raise InvalidParameterError(f"잘못된 DFA: {e.errors()[0]['msg']}") from e


# --- word action ---
def _check_word(dfa: Dfa, w: Word) -> None:
    for c in w:
        if not 0 <= c < dfa.k:
            raise InvalidParameterError(f"letter index {c} 는 [0, {dfa.k - 1}] 범위가 아닙니다")


def apply_word(dfa: Dfa, s: Iterable[int], w: Word) -> StateSet:
    """S w: 왼쪽부터 letter 를 차례로 적용한 상 (image)"""
    _check_word(dfa, w)
    current = frozenset(s)
    if not current:
        raise InvalidParameterError("빈 상태 집합에는 word 를 적용할 수 없습니다")
    outside = sorted(q for q in current if not 0 <= q < dfa.n)
    if outside:
        raise InvalidParameterError(f"상태 {outside} 는 [0, {dfa.n - 1}] 범위가 아닙니다")
    for c in w:
        letter = dfa.letters[c]
        current = frozenset(letter[q] for q in current)
    return current


def rank(dfa: Dfa, w: Word) -> int:
    return len(apply_word(dfa, dfa.states, w))


def is_permutation(letter: Sequence[int]) -> bool:
    return len(set(letter)) == len(letter)


# --- pair automaton ---
def letters_synchronize(letters: Sequence[Sequence[int]], n: int) -> bool:
    """
    pair automaton 위의 역방향 BFS.
    노드 = 비순서쌍 {p, q} (p < q, 인덱스 p*n + q) + singleton.
    singleton 으로 바로 떨어지는 쌍에서 시작해 predecessor 를 따라 퍼진다.
    """
    if n == 1:
        return True
    preds: List[List[int]] = [[] for _ in range(n * n)]
    good = bytearray(n * n)
    frontier = deque()
    for p in range(n - 1):
        for q in range(p + 1, n):
            src = p * n + q
            for letter in letters:
                x, y = letter[p], letter[q]
                if x == y:
                    if not good[src]:
                        good[src] = 1
                        frontier.append(src)
                else:
                    preds[x * n + y if x < y else y * n + x].append(src)

    reached = len(frontier)
    while frontier:
        target = frontier.popleft()
        for src in preds[target]:
            if not good[src]:
                good[src] = 1
                reached += 1
                frontier.append(src)
    return reached == n * (n - 1) // 2


def is_synchronizing(dfa: Dfa) -> bool:
    return letters_synchronize(dfa.letters, dfa.n)


def pair_merging_word(dfa: Dfa, p: int, q: int) -> Optional[Word]:
    """{p, q} 를 singleton 으로 보내는 최단 word (순방향 pair BFS, letter 순서대로)"""
    if p == q:
        return ()
    n = dfa.n
    start = (min(p, q), max(p, q))
    parent = {start: None}
    frontier = deque([start])
    while frontier:
        pair = frontier.popleft()
        for c, letter in enumerate(dfa.letters):
            x, y = letter[pair[0]], letter[pair[1]]
            if x == y:
                word = [c]
                node = pair
                while parent[node] is not None:
                    node, letter_index = parent[node]
                    word.append(letter_index)
                return tuple(reversed(word))
            child = (x, y) if x < y else (y, x)
            if child not in parent:
                parent[child] = (pair, c)
                frontier.append(child)
    logger.debug(f"쌍 ({p}, {q}) 은 n={n} 에서 합쳐지지 않습니다")
    return None


# --- reset word 탐색 ---
class _MaskImage:
    """letter 의 부분집합 상을 8비트 청크 표로 계산 (mask -> image mask)"""

    CHUNK = 8

    def __init__(self, letter: Sequence[int], n: int):
        self.tables = []
        for start in range(0, n, self.CHUNK):
            width = min(self.CHUNK, n - start)
            table = [0] * (1 << width)
            for bits in range(1, 1 << width):
                low = bits & -bits
                q = start + low.bit_length() - 1
                table[bits] = table[bits ^ low] | (1 << letter[q])
            self.tables.append(table)

    def __call__(self, mask: int) -> int:
        image = 0
        for table in self.tables:
            image |= table[mask & 0xFF]
            mask >>= self.CHUNK
        return image


def _subset_bfs(dfa: Dfa, max_n: int) -> Tuple[Optional[Word], int]:
    n = dfa.n
    if n > max_n:
        raise CapacityExceededError(
            f"부분집합 BFS 는 n <= {max_n} 까지만 지원합니다 (n={n}); greedy_reset_word 를 사용하세요"
        )
    full = (1 << n) - 1
    if n == 1:
        return (), 1

    images = [_MaskImage(letter, n) for letter in dfa.letters]
    parent = {full: None}
    frontier = deque([full])
    while frontier:
        mask = frontier.popleft()
        for c, image in enumerate(images):
            child = image(mask)
            if child in parent:
                continue
            parent[child] = (mask, c)
            if child & (child - 1) == 0:
                word = []
                node = child
                while parent[node] is not None:
                    node, letter_index = parent[node]
                    word.append(letter_index)
                return tuple(reversed(word)), len(parent)
            frontier.append(child)
    return None, len(parent)


def shortest_reset_word(dfa: Dfa, max_n: int = MAX_EXACT_N) -> Optional[Word]:
    """Q 에서 시작하는 부분집합 격자 BFS. 동기화되지 않으면 None"""
    word, explored = _subset_bfs(dfa, max_n)
    logger.debug(f"부분집합 BFS: n={dfa.n}, 탐색 {explored}개, 결과 길이 {None if word is None else len(word)}")
    if word is not None and len(apply_word(dfa, dfa.states, word)) != 1:
        raise InternalError("부분집합 BFS 가 reset word 가 아닌 word 를 반환했습니다")
    return word


def subset_reset_exists(dfa: Dfa, max_n: int = MAX_EXACT_N) -> bool:
    word, _ = _subset_bfs(dfa, max_n)
    return word is not None


def greedy_reset_word(dfa: Dfa) -> Optional[Word]:
    """현재 집합의 사전순 최소 쌍을 최단 word 로 합치는 일을 반복한다"""
    current = dfa.states
    word: List[int] = []
    while len(current) > 1:
        p, q = sorted(current)[:2]
        merge = pair_merging_word(dfa, p, q)
        if merge is None:
            return None
        word.extend(merge)
        current = apply_word(dfa, current, merge)

    result = tuple(word)
    if len(apply_word(dfa, dfa.states, result)) != 1:
        raise InternalError("greedy reset word 검증 실패")
    return result
