# services/chromatic_service.py
"""
순환 그래프(circulant graph)의 chromatic polynomial 과 D 의 정확한 모멘트

x_i = 1 - D_i 는 "b 가 C_n(i) 의 proper coloring 인가" 의 지시함수이므로
E[D] = floor(n/2) - sum_i P_i(n)/n^n,
Var[D] = sum_i (p_i - p_i^2) + 2 sum_{i<j} (p_ij - p_i p_j)
(p_i = P_i(n)/n^n, p_ij = P_{i,j}(n)/n^n).
"""

import itertools
import logging
import math
import threading
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Tuple

import networkx as nx
import sympy as sp

from config import CHROMATIC_MEMO_LIMIT, MAX_CHROMATIC_N
from models.errors import CapacityExceededError, InvalidParameterError
from services.independence_service import UnionFind, circulant_structure

logger = logging.getLogger(__name__)

X = sp.Symbol("x")
IntPolynomial = sp.Poly
Edges = FrozenSet[Tuple[int, int]]


# --- 다항식 헬퍼 ---
def _poly(expr) -> IntPolynomial:
    return sp.Poly(expr, X, domain=sp.ZZ)


def coefficients(poly: IntPolynomial) -> List[int]:
    """lambda_0, lambda_1, ..., lambda_deg (낮은 차수부터)"""
    return [int(c) for c in reversed(poly.all_coeffs())]


def evaluate(poly: IntPolynomial, x: int) -> int:
    return int(poly.eval(x))


@lru_cache(maxsize=None)
def _x_power(v: int) -> IntPolynomial:
    return _poly(X ** v)


@lru_cache(maxsize=None)
def _tree(v: int) -> IntPolynomial:
    return _poly(X * (X - 1) ** (v - 1))


@lru_cache(maxsize=None)
def _cycle(v: int) -> IntPolynomial:
    return _poly((X - 1) ** v + (-1) ** v * (X - 1))


@lru_cache(maxsize=None)
def _complete(v: int) -> IntPolynomial:
    return _poly(sp.prod([X - t for t in range(v)]))


# --- 그래프 ---
def circulant_graph(n: int, offsets: Iterable[int]) -> nx.Graph:
    """C_n(i_1, ..., i_k): |r - s|_n 이 offsets 에 속하면 r, s 가 인접"""
    offsets = sorted(set(offsets))
    if not offsets:
        raise InvalidParameterError("offsets 가 비어 있습니다")
    for i in offsets:
        if not 1 <= i <= n // 2:
            raise InvalidParameterError(f"offset {i} 는 [1, {n // 2}] 범위가 아닙니다 (n={n})")
    return nx.circulant_graph(n, offsets)


def _relabel(vertices: List[int], edges: Iterable[Tuple[int, int]]) -> Tuple[int, Edges]:
    index = {vertex: pos for pos, vertex in enumerate(sorted(vertices))}
    relabeled = frozenset(
        (min(index[u], index[w]), max(index[u], index[w])) for u, w in edges
    )
    return len(index), relabeled


def count_proper_colorings(graph: nx.Graph, x: int) -> int:
    """x^v 가지 배정 전수 조사 (작은 그래프 검증용)"""
    nodes = list(graph.nodes)
    position = {node: idx for idx, node in enumerate(nodes)}
    edges = [(position[u], position[w]) for u, w in graph.edges]
    return sum(
        1 for colors in itertools.product(range(x), repeat=len(nodes))
        if all(colors[u] != colors[w] for u, w in edges)
    )


class ChromaticService:
    """deletion-contraction + 메모이제이션 (메모 테이블은 스레드 간 공유)"""

    def __init__(self, max_n: int = MAX_CHROMATIC_N, memo_limit: int = CHROMATIC_MEMO_LIMIT):
        self.max_n = max_n
        self.memo_limit = memo_limit
        self._memo: Dict[Tuple[int, Edges], IntPolynomial] = {}
        self._lock = threading.Lock()
        self.calls = 0

    @property
    def memo_size(self) -> int:
        return len(self._memo)

    def chromatic_poly(self, graph: nx.Graph) -> IntPolynomial:
        v = graph.number_of_nodes()
        if v > self.max_n:
            raise CapacityExceededError(f"정점 {v}개 > chromatic 제한 {self.max_n}")
        if nx.number_of_selfloops(graph) > 0:
            return _poly(0)
        size, edges = _relabel(list(graph.nodes), graph.edges)
        return self._solve(size, edges)

    def _solve(self, v: int, edges: Edges) -> IntPolynomial:
        key = (v, edges)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        self.calls += 1

        result = self._split_components(v, edges)
        with self._lock:
            if len(self._memo) >= self.memo_limit:
                logger.info(f"🔄 chromatic 메모 {len(self._memo)}개 비움")
                self._memo.clear()
            self._memo.setdefault(key, result)
        return result

    def _split_components(self, v: int, edges: Edges) -> IntPolynomial:
        if not edges:
            return _x_power(v)

        uf = UnionFind(v)
        for u, w in edges:
            uf.union(u, w)
        groups = uf.groups()
        if len(groups) == 1:
            return self._connected(v, edges)

        # 성분별 곱 (고립 정점은 x)
        result = _poly(1)
        for members in groups.values():
            if len(members) == 1:
                result = result * _x_power(1)
                continue
            member_set = set(members)
            size, sub_edges = _relabel(members, (e for e in edges if e[0] in member_set))
            result = result * self._solve(size, sub_edges)
        return result

    def _connected(self, v: int, edges: Edges) -> IntPolynomial:
        m = len(edges)
        degree = [0] * v
        for u, w in edges:
            degree[u] += 1
            degree[w] += 1

        if m == v - 1:
            return _tree(v)
        if m == v and all(d == 2 for d in degree):
            return _cycle(v)
        if m == v * (v - 1) // 2:
            return _complete(v)

        leaf = next((q for q in range(v) if degree[q] == 1), None)
        if leaf is not None:
            rest = [q for q in range(v) if q != leaf]
            size, sub_edges = _relabel(rest, (e for e in edges if leaf not in e))
            return _poly(X - 1) * self._solve(size, sub_edges)

        # 최소 차수 정점의 간선 하나로 분기: P(G) = P(G - e) - P(G / e)
        u = min(range(v), key=lambda q: degree[q])
        w = max((b if a == u else a for a, b in edges if u in (a, b)), key=lambda q: degree[q])
        edge = (min(u, w), max(u, w))

        deleted = edges - {edge}
        merged = []
        for a, b in deleted:
            a = u if a == w else a
            b = u if b == w else b
            if a != b:
                merged.append((a, b))
        size, contracted = _relabel([q for q in range(v) if q != w], merged)
        return self._solve(v, deleted) - self._solve(size, contracted)

    # --- 순환 그래프 공식 ---
    def closed_form_Pi(self, n: int, i: int) -> IntPolynomial:
        """P_i(x) = ((x-1)^l + (-1)^l (x-1))^{n/l}, l = n / gcd(n, i)"""
        components, length = circulant_structure(n, i)
        return _poly(((X - 1) ** length + (-1) ** length * (X - 1)) ** components)

    def Pi_ratio(self, n: int, i: int) -> Fraction:
        return Fraction(evaluate(self.closed_form_Pi(n, i), n), n ** n)

    def Pij_ratio(self, n: int, i: int, j: int) -> Fraction:
        poly = self.chromatic_poly(circulant_graph(n, {i, j}))
        return Fraction(evaluate(poly, n), n ** n)

    def expected_D(self, n: int) -> Fraction:
        if n < 2:
            raise InvalidParameterError(f"n >= 2 가 필요합니다 (n={n})")
        half = n // 2
        return half - sum((self.Pi_ratio(n, i) for i in range(1, half + 1)), Fraction(0))

    def variance_D(self, n: int) -> Fraction:
        if n < 2:
            raise InvalidParameterError(f"n >= 2 가 필요합니다 (n={n})")
        if n > self.max_n:
            raise CapacityExceededError(f"variance_D 는 n <= {self.max_n} 까지 지원합니다 (n={n})")
        half = n // 2
        p = {i: self.Pi_ratio(n, i) for i in range(1, half + 1)}
        variance = sum((p[i] - p[i] ** 2 for i in p), Fraction(0))
        for i, j in itertools.combinations(range(1, half + 1), 2):
            variance += 2 * (self.Pij_ratio(n, i, j) - p[i] * p[j])
        logger.debug(f"Var[D] n={n}: deletion-contraction 호출 누적 {self.calls}회")
        return variance

    def covariance_terms(self, n: int) -> List[Dict]:
        """i < j 마다 Cov(x_i, x_j) = P_{i,j}(n)/n^n - P_i(n) P_j(n)/n^{2n}"""
        half = n // 2
        rows = []
        for i, j in itertools.combinations(range(1, half + 1), 2):
            cov = self.Pij_ratio(n, i, j) - self.Pi_ratio(n, i) * self.Pi_ratio(n, j)
            rows.append({"n": n, "i": i, "j": j, "covariance": cov, "n_times_covariance": float(n * cov)})
        return rows

    def ratio_bound_check(self, n: int, i: int) -> Tuple[Fraction, float, bool]:
        """P_i(n)/n^n 와 지수 상한 비교 (l_i = 2 와 l_i >= 3 두 경우)"""
        _, length = circulant_structure(n, i)
        ratio = self.Pi_ratio(n, i)
        if length == 2:
            bound = math.exp(-1 + 0.5 * n / (n - 1))
        else:
            bound = math.exp(-1 + n / (3 * (n - 1) ** 2))
        return ratio, bound, ratio <= bound

    def theorem22_bound(self, n: int, epsilon: float) -> Tuple[float, float]:
        """(eta_star, 동기화 확률 하한). 작은 n 에서 음수가 나와도 그대로 보고한다."""
        upper = 0.5 - math.exp(-1)
        if not 0 < epsilon < upper:
            raise InvalidParameterError(f"epsilon 은 (0, {upper:.4f}) 범위여야 합니다 (epsilon={epsilon})")
        if n < 2:
            raise InvalidParameterError(f"n >= 2 가 필요합니다 (n={n})")
        half = n // 2
        eta_star = half * (1 - math.exp(n / (3 * (n - 1) ** 2) - 1)) - 1
        gap = epsilon * half - 1
        if gap == 0:
            raise InvalidParameterError(f"epsilon * floor(n/2) = 1 이면 하한이 정의되지 않습니다 (n={n})")
        variance = self.variance_D(n)
        bound = 1 - half * math.exp(-(gap ** 2) / (2 * n)) - float(variance) / gap ** 2
        return eta_star, bound


def mean_D_asymptote(n: int) -> float:
    """(1 - e^-1) floor(n/2)"""
    return (1 - math.exp(-1)) * (n // 2)
