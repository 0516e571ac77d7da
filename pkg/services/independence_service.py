# services/independence_service.py
"""
T_b 원소들의 독립성 - 연관 멀티그래프 G(S) 의 비순환성 판정과
touched 좌표만 열거하는 정확한 결합분포(JointPmf) 오라클.
이 모듈은 부동소수점을 쓰지 않는다 (모든 확률은 Fraction).
"""

import itertools
import logging
from collections import Counter
from fractions import Fraction
from math import gcd
from typing import Dict, List, Tuple

from config import MAX_TOUCHED_COORDS
from models.errors import CapacityExceededError, InvalidParameterError
from models.schemas import IndexMultiset, JointPmf, Multigraph
from services.matrix_service import cyclic_abs

logger = logging.getLogger(__name__)


class UnionFind:
    """path compression + union by rank"""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        """합쳤으면 True, 이미 같은 집합이면 (= 사이클) False"""
        xroot, yroot = self.find(x), self.find(y)
        if xroot == yroot:
            return False
        if self.rank[xroot] < self.rank[yroot]:
            xroot, yroot = yroot, xroot
        self.parent[yroot] = xroot
        if self.rank[xroot] == self.rank[yroot]:
            self.rank[xroot] += 1
        return True

    def groups(self) -> Dict[int, List[int]]:
        result: Dict[int, List[int]] = {}
        for x in range(len(self.parent)):
            result.setdefault(self.find(x), []).append(x)
        return result


def make_index_multiset(n: int, pairs) -> IndexMultiset:
    try:
        return IndexMultiset(n=n, pairs=tuple((int(i), int(j)) for i, j in pairs))
    except ValueError as e:
        raise InvalidParameterError(str(e)) from e


def edge_of(i: int, j: int, n: int) -> Tuple[int, int]:
    """y_{i,j} 의 간선 e = {j, (j+i)_n}"""
    other = (j + i) % n
    return (j, other) if j < other else (other, j)


def associated_multigraph(S: IndexMultiset) -> Multigraph:
    return Multigraph(n=S.n, edges=tuple(edge_of(i, j, S.n) for i, j in S.pairs))


def is_acyclic(S: IndexMultiset) -> bool:
    """union-find: 이미 연결된 두 끝점을 잇는 간선이 사이클을 닫는다 (중복 간선 = 길이 2 사이클)"""
    uf = UnionFind(S.n)
    return all(uf.union(u, v) for u, v in associated_multigraph(S).edges)


def component_count(S: IndexMultiset) -> int:
    """Z_n 전체 정점 위에서 G(S) 의 연결 성분 수"""
    uf = UnionFind(S.n)
    for u, v in associated_multigraph(S).edges:
        uf.union(u, v)
    return len(uf.groups())


def multiplicity(s: int, n: int) -> int:
    """m_s = #{d in Z_n : |d|_n = s}"""
    if n < 1:
        raise InvalidParameterError(f"n 은 양수여야 합니다 (n={n})")
    if s == 0:
        return 1
    if n % 2 == 0 and 2 * s == n:
        return 1
    if 0 < s < n / 2:
        return 2
    return 0


def marginal_pmf(n: int) -> Dict[int, Fraction]:
    return {s: Fraction(multiplicity(s, n), n) for s in range(n // 2 + 1)}


def touched_coordinates(S: IndexMultiset) -> List[int]:
    return sorted({c for i, j in S.pairs for c in (j, (j + i) % S.n)})


def joint_pmf_bruteforce(S: IndexMultiset, max_touched: int = MAX_TOUCHED_COORDS) -> JointPmf:
    """
    touched 좌표 t 개에 대해 n^t 가지 값 배정을 전부 세어 (T_b(i_1,j_1), ..., T_b(i_k,j_k)) 의
    정확한 결합분포를 만든다. 건드리지 않는 b_l 은 독립이므로 적분되어 사라진다.
    """
    n = S.n
    coords = touched_coordinates(S)
    if len(coords) > max_touched:
        raise CapacityExceededError(
            f"touched 좌표 {len(coords)}개 > 제한 {max_touched}개 (n^t 열거 불가)"
        )
    slot = {c: idx for idx, c in enumerate(coords)}
    lookups = [(slot[j], slot[(j + i) % n]) for i, j in S.pairs]

    counts: Counter = Counter()
    for values in itertools.product(range(n), repeat=len(coords)):
        counts[tuple(cyclic_abs(values[x] - values[y], n) for x, y in lookups)] += 1

    denominator = n ** len(coords)
    probabilities = {key: Fraction(count, denominator) for key, count in counts.items()}
    return JointPmf(n=n, pairs=S.pairs, probabilities=probabilities)


def product_form(S: IndexMultiset) -> Dict[Tuple[int, ...], Fraction]:
    """prod_w m_{s_w} / n^k (0 확률 항은 생략)"""
    n = S.n
    marginal = marginal_pmf(n)
    table = {}
    for values in itertools.product(range(n // 2 + 1), repeat=len(S.pairs)):
        p = Fraction(1)
        for s in values:
            p *= marginal[s]
        if p:
            table[values] = p
    return table


def verify_factorization(S: IndexMultiset, max_touched: int = MAX_TOUCHED_COORDS) -> bool:
    pmf = joint_pmf_bruteforce(S, max_touched)
    expected = product_form(S)
    keys = set(pmf.probabilities) | set(expected)
    return all(pmf.probabilities.get(key, Fraction(0)) == expected.get(key, Fraction(0)) for key in keys)


def circulant_structure(n: int, i: int) -> Tuple[int, int]:
    """C_n(i) = gcd(n, i) 개의 길이 n/gcd(n, i) 사이클 (i = n/2 이면 n/2 개의 간선)"""
    if not 1 <= i <= n // 2:
        raise InvalidParameterError(f"i={i} 는 [1, {n // 2}] 범위가 아닙니다")
    g = gcd(n, i)
    return g, n // g


def row_independent_subset(n: int, i: int) -> List[Tuple[int, int]]:
    """row i 에서 비순환인 n - gcd(n, i) 개 위치 (각 사이클에서 간선 하나를 뺀다)"""
    components, length = circulant_structure(n, i)
    subset = []
    for start in range(components):
        for t in range(length - 1):
            subset.append((i, (start + t * i) % n))
    return subset
