"""
集合划分
以限制增长串（restricted-growth string）沿顶点顺序规范存储
提供偏序、交（meet）与商划分 ρ/π
"""

from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, Iterator, List, Sequence, Tuple

Label = Hashable


def _canonical(keys: Sequence[Hashable]) -> Tuple[int, ...]:
    """把任意分组键序列重编号为限制增长串"""
    seen: Dict[Hashable, int] = {}
    out = []
    for key in keys:
        if key not in seen:
            seen[key] = len(seen)
        out.append(seen[key])
    return tuple(out)


@dataclass(frozen=True)
class Partition:
    """
    顶点集的划分

    Attributes:
        ground: 有序的顶点标签
        assignment: 限制增长串，assignment[i] 为 ground[i] 所在块的编号
    """

    ground: Tuple[Label, ...]
    assignment: Tuple[int, ...]

    def __post_init__(self):
        if len(self.ground) != len(self.assignment):
            raise ValueError("划分的块编号与顶点数不一致")
        if len(set(self.ground)) != len(self.ground):
            raise ValueError("顶点标签重复")
        if _canonical(self.assignment) != self.assignment:
            raise ValueError(f"不是限制增长串: {self.assignment}")

    # ==================== 构造 ====================

    @classmethod
    def from_blocks(cls, ground: Sequence[Label], blocks: Iterable[Iterable[Label]]) -> "Partition":
        """
        由块列表构造

        Raises:
            ValueError: 块不覆盖顶点集、相交或为空
        """
        ground = tuple(ground)
        owner: Dict[Label, int] = {}
        for index, block in enumerate(blocks):
            block = list(block)
            if not block:
                raise ValueError("划分中存在空块")
            for label in block:
                if label in owner:
                    raise ValueError(f"顶点 {label!r} 出现在多个块中")
                owner[label] = index
        if set(owner) != set(ground):
            raise ValueError("划分的块与顶点集不一致")
        return cls(ground, _canonical([owner[label] for label in ground]))

    @classmethod
    def from_keys(cls, ground: Sequence[Label], keys: Sequence[Hashable]) -> "Partition":
        """按分组键构造：键相同的顶点在同一块"""
        return cls(tuple(ground), _canonical(keys))

    @classmethod
    def singletons(cls, ground: Sequence[Label]) -> "Partition":
        ground = tuple(ground)
        return cls(ground, tuple(range(len(ground))))

    @classmethod
    def one_block(cls, ground: Sequence[Label]) -> "Partition":
        ground = tuple(ground)
        return cls(ground, (0,) * len(ground))

    # ==================== 查询 ====================

    @property
    def num_blocks(self) -> int:
        """|π|"""
        return max(self.assignment) + 1 if self.assignment else 0

    @property
    def blocks(self) -> Tuple[Tuple[Label, ...], ...]:
        grouped: List[List[Label]] = [[] for _ in range(self.num_blocks)]
        for label, index in zip(self.ground, self.assignment):
            grouped[index].append(label)
        return tuple(tuple(block) for block in grouped)

    def index_map(self) -> Dict[Label, int]:
        return dict(zip(self.ground, self.assignment))

    def representatives(self) -> Tuple[Label, ...]:
        """每块的代表元（块内最小标签），按块编号排列"""
        return tuple(min(block) for block in self.blocks)

    def representative_map(self) -> Dict[Label, Label]:
        """顶点 → 所在块的代表元"""
        reps = self.representatives()
        return {label: reps[index] for label, index in zip(self.ground, self.assignment)}

    def block_of(self, label: Label) -> Tuple[Label, ...]:
        """π(a)"""
        return self.blocks[self.index_map()[label]]

    def same_block(self, a: Label, b: Label) -> bool:
        index = self.index_map()
        return index[a] == index[b]

    def restrict(self, subset: Iterable[Label]) -> "Partition":
        """限制到子集 W（保持顶点原顺序）"""
        wanted = set(subset)
        pairs = [(label, index) for label, index in zip(self.ground, self.assignment)
                 if label in wanted]
        if len(pairs) != len(wanted):
            raise ValueError("子集包含不在顶点集中的标签")
        return Partition.from_keys([p[0] for p in pairs], [p[1] for p in pairs])

    def _check_ground(self, other: "Partition") -> None:
        if self.ground != other.ground:
            raise ValueError("两个划分的顶点集不同")

    # ==================== 格运算 ====================

    def leq(self, other: "Partition") -> bool:
        """π ≤ ρ：π 的每个块都包含在 ρ 的某个块中"""
        self._check_ground(other)
        image: Dict[int, int] = {}
        for mine, theirs in zip(self.assignment, other.assignment):
            if image.setdefault(mine, theirs) != theirs:
                return False
        return True

    def meet(self, other: "Partition") -> "Partition":
        """π ∧ ρ"""
        self._check_ground(other)
        return Partition.from_keys(self.ground, list(zip(self.assignment, other.assignment)))

    def quotient_over(self, finer: "Partition") -> "Partition":
        """
        ρ/π：以 π 的块（用代表元标记）为顶点的划分，
        π(a) 与 π(b) 同块当且仅当 a ρ~ b

        Args:
            finer: π，要求 π ≤ self

        Raises:
            ValueError: π 不细于 self
        """
        if not finer.leq(self):
            raise ValueError("商划分要求 π ≤ ρ")
        reps = finer.representatives()
        mine = self.index_map()
        return Partition.from_keys(reps, [mine[rep] for rep in reps])

    def __str__(self) -> str:
        return format_partition(self)


def partition_meet(p: Partition, q: Partition) -> Partition:
    return p.meet(q)


def partition_leq(p: Partition, q: Partition) -> bool:
    return p.leq(q)


def partition_quotient(q: Partition, p: Partition) -> Partition:
    """q/p，要求 p ≤ q"""
    return q.quotient_over(p)


def iter_partitions(ground: Sequence[Label]) -> Iterator[Partition]:
    """按限制增长串的字典序生成 ground 的全部划分"""
    ground = tuple(ground)
    n = len(ground)
    if n == 0:
        return
    assignment = [0] * n

    def extend(i: int, top: int) -> Iterator[Partition]:
        if i == n:
            yield Partition(ground, tuple(assignment))
            return
        for value in range(top + 2):
            assignment[i] = value
            yield from extend(i + 1, max(top, value))

    assignment[0] = 0
    yield from extend(1, 0)


def format_partition(p: Partition) -> str:
    """块列表文本，如 {1,2,6|3,5,8|4,7}"""
    return "{" + "|".join(",".join(str(label) for label in block) for block in p.blocks) + "}"


def parse_partition(text: str, ground: Sequence[int]) -> Partition:
    """
    解析块列表文本（顶点为整数）

    Raises:
        ValueError: 格式错误或与顶点集不一致
    """
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ValueError(f"划分文本需要用花括号包围: {text!r}")
    blocks = []
    for chunk in body[1:-1].split("|"):
        try:
            blocks.append([int(item) for item in chunk.split(",") if item.strip()])
        except ValueError:
            raise ValueError(f"划分文本中存在非整数顶点: {chunk!r}") from None
    return Partition.from_blocks(ground, blocks)


def bell_number(n: int) -> int:
    """集合 [n] 的划分个数（贝尔三角）"""
    if n < 0:
        raise ValueError("n 必须非负")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[0]
