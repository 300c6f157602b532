"""
边着色有向图
包括单词图 Γ_w、商图 Γ/π、同余与强同余的枚举、路径（环与串）分解以及环特征数 χ
"""

from dataclasses import dataclass
from typing import (
    TYPE_CHECKING, Dict, Iterable, List, Sequence, Set, Tuple,
)

import networkx as nx
from networkx.algorithms import isomorphism

from src.constants import DEFAULT_VERTEX_BOUND
from src.core.errors import (
    BudgetExceededError, DisconnectedGraphError, InadmissibleGraphError,
)
from src.core.partitions import Partition
from src.core.words import Signature, Word
from src.utils.logger import get_logger, log_computation

if TYPE_CHECKING:
    from src.core.cyclecount import CycleSet

logger = get_logger(__name__)

# (起点, 终点, 颜色)
Edge = Tuple[int, int, int]


@dataclass(frozen=True)
class ColoredGraph:
    """
    有限的边着色有向图
    同一 (起点, 终点, 颜色) 只保留一条边，边按字典序存储
    """

    vertices: Tuple[int, ...]
    edges: Tuple[Edge, ...] = ()

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("图的顶点集不能为空")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("顶点标签重复")
        vertex_set = set(self.vertices)
        for a, b, color in self.edges:
            if a not in vertex_set or b not in vertex_set:
                raise ValueError(f"边 {a}->{b} 的端点不在顶点集中")
            if color < 1:
                raise ValueError(f"边的颜色必须从 1 开始: {color}")
        object.__setattr__(self, 'edges', tuple(sorted(set(self.edges))))

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def is_trivial(self) -> bool:
        """没有边"""
        return not self.edges

    def colors(self) -> Tuple[int, ...]:
        return tuple(sorted({color for _, _, color in self.edges}))

    def edges_of_color(self, color: int) -> List[Edge]:
        return [edge for edge in self.edges if edge[2] == color]

    def monochrome(self, color: int) -> "ColoredGraph":
        """Γ(r)：保留全部顶点，只保留颜色 r 的边"""
        return ColoredGraph(self.vertices, tuple(self.edges_of_color(color)))

    def induced(self, subset: Iterable[int]) -> "ColoredGraph":
        """由顶点子集诱导的子图（保持原顶点顺序）"""
        wanted = set(subset)
        vertices = tuple(v for v in self.vertices if v in wanted)
        edges = tuple(e for e in self.edges if e[0] in wanted and e[1] in wanted)
        return ColoredGraph(vertices, edges)

    def relabel(self, mapping: Dict[int, int]) -> "ColoredGraph":
        """按单射 mapping 重新标记顶点"""
        if len(set(mapping[v] for v in self.vertices)) != len(self.vertices):
            raise ValueError("重标记映射不是单射")
        return ColoredGraph(
            tuple(mapping[v] for v in self.vertices),
            tuple((mapping[a], mapping[b], color) for a, b, color in self.edges),
        )

    def to_networkx(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self.vertices)
        for a, b, color in self.edges:
            graph.add_edge(a, b, color=color)
        return graph

    def __str__(self) -> str:
        return format_graph(self)


@dataclass(frozen=True)
class PathSummary:
    """
    颜色 r 的一条路径：串（is_loop=False）或环（is_loop=True）
    串的顶点序列含两个端点，共 length+1 个；环的顶点序列共 length 个且不重复
    """

    color: int
    length: int
    is_loop: bool
    vertices: Tuple[int, ...]


# ==================== 构造 ====================

def word_graph(word: Word) -> ColoredGraph:
    """
    单词图 Γ_w：顶点 1..n，第 k 条边在 ε_k = 1 时为 k+1 → k，
    在 ε_k = * 时为 k → k+1（n+1 视为 1），颜色为 r_k

    Raises:
        ValueError: 空单词
    """
    if word.is_empty:
        raise ValueError("空单词没有单词图")
    n = len(word)
    edges = []
    for k, letter in enumerate(word.letters, start=1):
        nxt = k % n + 1
        if letter.starred:
            edges.append((k, nxt, letter.color))
        else:
            edges.append((nxt, k, letter.color))
    return ColoredGraph(tuple(range(1, n + 1)), tuple(edges))


def disjoint_union(graphs: Sequence[ColoredGraph]) -> ColoredGraph:
    """
    不交并：第 i 个图的顶点按原顺序重编号为连续整数，
    前一个图的顶点编号整体在后一个图之前
    """
    if not graphs:
        raise ValueError("不交并至少需要一个图")
    vertices: List[int] = []
    edges: List[Edge] = []
    offset = 0
    for graph in graphs:
        mapping = {v: offset + i for i, v in enumerate(graph.vertices, start=1)}
        vertices.extend(mapping[v] for v in graph.vertices)
        edges.extend((mapping[a], mapping[b], color) for a, b, color in graph.edges)
        offset += graph.num_vertices
    return ColoredGraph(tuple(vertices), tuple(edges))


def remove_edges(graph: ColoredGraph, removed: Iterable[Edge]) -> ColoredGraph:
    """删去给定的边，保留全部顶点"""
    dropped = set(removed)
    return ColoredGraph(graph.vertices, tuple(e for e in graph.edges if e not in dropped))


def _check_partition(graph: ColoredGraph, partition: Partition) -> None:
    if set(partition.ground) != set(graph.vertices):
        raise ValueError("划分的顶点集与图的顶点集不一致")


def quotient(graph: ColoredGraph, partition: Partition) -> ColoredGraph:
    """
    商图 Γ/π：顶点为各块的代表元（块内最小标签），
    块 A → 块 B 有颜色 r 的边当且仅当存在 a'∈A, b'∈B 使 a' → b' 是 r 边

    Raises:
        ValueError: 划分与顶点集不一致
    """
    _check_partition(graph, partition)
    rep = partition.representative_map()
    vertices = tuple(sorted(set(rep.values())))
    edges = tuple((rep[a], rep[b], color) for a, b, color in graph.edges)
    return ColoredGraph(vertices, edges)


# ==================== 可容许性与同余 ====================

def is_admissible(graph: ColoredGraph) -> bool:
    """同一颜色的不同边起点互不相同、终点互不相同"""
    sources: Set[Tuple[int, int]] = set()
    targets: Set[Tuple[int, int]] = set()
    for a, b, color in graph.edges:
        if (a, color) in sources or (b, color) in targets:
            return False
        sources.add((a, color))
        targets.add((b, color))
    return True


def is_congruence(graph: ColoredGraph, partition: Partition) -> bool:
    """
    对任意同色边 a1→b1、a2→b2 有 a1~a2 ⇔ b1~b2
    等价于 Γ/π 可容许：块到块的映射在每种颜色下都是部分双射
    """
    _check_partition(graph, partition)
    block = partition.index_map()
    forward: Dict[Tuple[int, int], int] = {}
    backward: Dict[Tuple[int, int], int] = {}
    for a, b, color in graph.edges:
        src, dst = block[a], block[b]
        if forward.setdefault((color, src), dst) != dst:
            return False
        if backward.setdefault((color, dst), src) != src:
            return False
    return True


def _pair_checks(graph: ColoredGraph) -> List[List[Tuple[int, int, int, int]]]:
    """
    把每对同色边的 ⇔ 条件挂到其四个端点中位置最靠后的那个顶点上，
    回溯时该顶点赋值后即可检查
    """
    position = {v: i for i, v in enumerate(graph.vertices)}
    checks: List[List[Tuple[int, int, int, int]]] = [[] for _ in graph.vertices]
    for color in graph.colors():
        edges = [(position[a], position[b]) for a, b, _ in graph.edges_of_color(color)]
        for i in range(len(edges)):
            for j in range(i + 1, len(edges)):
                (a1, b1), (a2, b2) = edges[i], edges[j]
                checks[max(a1, b1, a2, b2)].append((a1, b1, a2, b2))
    return checks


def enumerate_congruences(
    graph: ColoredGraph,
    vertex_bound: int = DEFAULT_VERTEX_BOUND,
) -> List[Partition]:
    """
    枚举 Con(Γ)，按限制增长串的字典序返回

    Args:
        graph: 图
        vertex_bound: 顶点数上限

    Raises:
        BudgetExceededError: 顶点数超过上限
    """
    n = graph.num_vertices
    if n > vertex_bound:
        raise BudgetExceededError("同余枚举的顶点数", n, vertex_bound)

    checks = _pair_checks(graph)
    assignment = [0] * n
    result: List[Partition] = []

    def consistent(i: int) -> bool:
        for a1, b1, a2, b2 in checks[i]:
            if (assignment[a1] == assignment[a2]) != (assignment[b1] == assignment[b2]):
                return False
        return True

    def extend(i: int, top: int) -> None:
        if i == n:
            result.append(Partition(graph.vertices, tuple(assignment)))
            return
        for value in range(top + 2):
            assignment[i] = value
            if consistent(i):
                extend(i + 1, max(top, value))

    if consistent(0):
        extend(1, 0)
    log_computation(logger, "enumerate_congruences", n, f"found={len(result)}")
    return result


# ==================== 路径与环特征数 ====================

def paths(graph: ColoredGraph) -> List[PathSummary]:
    """
    把每个单色子图 Γ(r) 分解为互不相交的串与环

    Returns:
        按颜色排列的 PathSummary，同色内串在前、环在后，各自按首顶点排序

    Raises:
        InadmissibleGraphError: 图不可容许
    """
    if not is_admissible(graph):
        raise InadmissibleGraphError("路径分解要求图可容许")

    order = {v: i for i, v in enumerate(graph.vertices)}
    result: List[PathSummary] = []
    for color in graph.colors():
        succ = {a: b for a, b, _ in graph.edges_of_color(color)}
        targets = set(succ.values())
        visited: Set[int] = set()

        strings = []
        for start in sorted((a for a in succ if a not in targets), key=order.get):
            walk = [start]
            while walk[-1] in succ:
                walk.append(succ[walk[-1]])
            visited.update(walk[:-1])
            strings.append(PathSummary(color, len(walk) - 1, False, tuple(walk)))

        loops = []
        for start in sorted(succ, key=order.get):
            if start in visited:
                continue
            walk = [start]
            visited.add(start)
            while succ[walk[-1]] != start:
                walk.append(succ[walk[-1]])
                visited.add(walk[-1])
            loops.append(PathSummary(color, len(walk), True, tuple(walk)))

        result.extend(strings)
        result.extend(loops)
    return result


def loop_characteristic(graph: ColoredGraph) -> int:
    """χ(Γ) = V − E + L，L 为各颜色环的总数"""
    loops = sum(1 for path in paths(graph) if path.is_loop)
    return graph.num_vertices - graph.num_edges + loops


def _check_colors(graph: ColoredGraph, sig: Signature) -> None:
    for color in graph.colors():
        if color > sig.s:
            raise ValueError(f"边的颜色 {color} 超出签名范围 [1, {sig.s}]")


def is_strongly_admissible(graph: ColoredGraph, sig: Signature) -> bool:
    """可容许，且每个 r 环长度恰为 d_r，每个 r 串长度 < d_r"""
    _check_colors(graph, sig)
    if not is_admissible(graph):
        return False
    for path in paths(graph):
        order = sig.order(path.color)
        if path.is_loop and path.length != order:
            return False
        if not path.is_loop and not path.length < order:
            return False
    return True


def enumerate_strong_congruences(
    graph: ColoredGraph,
    sig: Signature,
    vertex_bound: int = DEFAULT_VERTEX_BOUND,
) -> List[Partition]:
    """SCon(Γ)：商图强可容许的同余"""
    _check_colors(graph, sig)
    return [
        partition for partition in enumerate_congruences(graph, vertex_bound)
        if is_strongly_admissible(quotient(graph, partition), sig)
    ]


def strong_congruences_chi1(
    graph: ColoredGraph,
    sig: Signature,
    vertex_bound: int = DEFAULT_VERTEX_BOUND,
) -> List[Partition]:
    """
    {π ∈ SCon(Γ) | χ(Γ/π) = 1}

    Raises:
        DisconnectedGraphError: 图不连通
    """
    if not is_connected(graph):
        raise DisconnectedGraphError("χ = 1 的强同余计数要求图连通，请按连通分支分别调用")
    return [
        partition for partition in enumerate_strong_congruences(graph, sig, vertex_bound)
        if loop_characteristic(quotient(graph, partition)) == 1
    ]


def count_scon_chi1(
    graph: ColoredGraph,
    sig: Signature,
    vertex_bound: int = DEFAULT_VERTEX_BOUND,
) -> int:
    """连通图上至多为 1"""
    return len(strong_congruences_chi1(graph, sig, vertex_bound))


# ==================== 连通性与同构 ====================

def is_connected(graph: ColoredGraph) -> bool:
    """弱连通"""
    return nx.is_weakly_connected(graph.to_networkx())


def connected_components(graph: ColoredGraph) -> List[ColoredGraph]:
    """弱连通分支的诱导子图，按各分支的首顶点排序"""
    order = {v: i for i, v in enumerate(graph.vertices)}
    components = [
        sorted(component, key=order.get)
        for component in nx.weakly_connected_components(graph.to_networkx())
    ]
    components.sort(key=lambda component: order[component[0]])
    return [graph.induced(component) for component in components]


def are_isomorphic(first: ColoredGraph, second: ColoredGraph) -> bool:
    """保持颜色的有向图同构"""
    if (first.num_vertices, first.num_edges) != (second.num_vertices, second.num_edges):
        return False
    return nx.is_isomorphic(
        first.to_networkx(),
        second.to_networkx(),
        edge_match=isomorphism.categorical_multiedge_match('color', None),
    )


def second_isomorphism_check(graph: ColoredGraph, finer: Partition, coarser: Partition) -> bool:
    """
    验证 Γ/ρ ≅ (Γ/π)/(ρ/π)

    Args:
        graph: Γ
        finer: π
        coarser: ρ，要求 π ≤ ρ

    Raises:
        ValueError: π 不细于 ρ
    """
    if not finer.leq(coarser):
        raise ValueError("第二同构定理要求 π ≤ ρ")
    direct = quotient(graph, coarser)
    staged = quotient(quotient(graph, finer), coarser.quotient_over(finer))
    return are_isomorphic(direct, staged)


# ==================== 单色图 ====================

def loop_shape(graph: ColoredGraph) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """
    单色可容许图的形状

    Returns:
        (环长度的升序元组, 串长度的升序元组)

    Raises:
        ValueError: 图含多种颜色
        InadmissibleGraphError: 图不可容许
    """
    if len(graph.colors()) > 1:
        raise ValueError("loop_shape 只接受单色图")
    summary = paths(graph)
    loops = tuple(sorted(p.length for p in summary if p.is_loop))
    strings = tuple(sorted(p.length for p in summary if not p.is_loop))
    return loops, strings


def is_a_graph(graph: ColoredGraph, cycle_set: "CycleSet") -> bool:
    """
    A 图：单色、可容许、环长度属于 A、串长度小于 sup A
    """
    if len(graph.colors()) > 1 or not is_admissible(graph):
        return False
    loops, strings = loop_shape(graph)
    if not all(cycle_set.contains(length) for length in loops):
        return False
    return all(length < cycle_set.sup for length in strings)


# ==================== 文本格式 ====================

def format_graph(graph: ColoredGraph) -> str:
    """首行为顶点列表，其后每行一条边 "<起点> <终点> <颜色>" """
    lines = [" ".join(str(v) for v in graph.vertices)]
    lines.extend(f"{a} {b} {color}" for a, b, color in graph.edges)
    return "\n".join(lines)


def parse_graph(text: str) -> ColoredGraph:
    """
    解析 format_graph 的输出

    Raises:
        ValueError: 格式错误
    """
    lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if not lines:
        raise ValueError("图文本为空")
    try:
        vertices = tuple(int(v) for v in lines[0].split())
        edges = []
        for line in lines[1:]:
            parts = [int(x) for x in line.split()]
            if len(parts) != 3:
                raise ValueError(f"边需要三个整数: {line!r}")
            edges.append(tuple(parts))
    except ValueError as e:
        raise ValueError(f"无法解析图文本: {e}") from None
    return ColoredGraph(vertices, tuple(edges))


def graph_from_shape(
    loops: Sequence[int],
    strings: Sequence[int],
    color: int = 1,
    isolated: int = 0,
) -> ColoredGraph:
    """
    按形状构造单色图：给定长度的环与串，外加若干孤立点，顶点从 1 连续编号

    Raises:
        ValueError: 长度不是正整数，或图为空
    """
    if any(length < 1 for length in list(loops) + list(strings)) or isolated < 0:
        raise ValueError("环与串的长度必须是正整数")
    vertices: List[int] = []
    edges: List[Edge] = []
    for length in loops:
        cycle = list(range(len(vertices) + 1, len(vertices) + length + 1))
        vertices.extend(cycle)
        edges.extend((v, cycle[(i + 1) % length], color) for i, v in enumerate(cycle))
    for length in strings:
        chain = list(range(len(vertices) + 1, len(vertices) + length + 2))
        vertices.extend(chain)
        edges.extend((a, b, color) for a, b in zip(chain, chain[1:]))
    vertices.extend(range(len(vertices) + 1, len(vertices) + isolated + 1))
    return ColoredGraph(tuple(vertices), tuple(edges))
