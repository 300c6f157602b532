"""
单词与同余 ≈
在生成元 g_1, g_1*, ..., g_s, g_s* 的自由幺半群中表示单词，
并通过循环群自由积的正规形判定 w ≈ e

关系：
- g_r g_r* ≈ g_r* g_r ≈ e
- d_r 有限时 g_r^{d_r} ≈ (g_r*)^{d_r} ≈ e
"""

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, Sequence, Tuple, Union

from src.constants import INFINITY, ROTATION_CHECK_MAX_LEN
from src.core.errors import BudgetExceededError

Order = Union[int, float]

_TOKEN_PATTERN = re.compile(r'^g(\d+)(\*?)$')


@dataclass(frozen=True)
class Signature:
    """
    签名：生成元个数 s 与各生成元的阶 d_1..d_s
    阶为正整数或 INFINITY
    """

    orders: Tuple[Order, ...]

    def __post_init__(self):
        if len(self.orders) < 1:
            raise ValueError("签名至少需要一个生成元")
        for d in self.orders:
            if d != INFINITY and (not isinstance(d, int) or d < 1):
                raise ValueError(f"生成元的阶必须是正整数或 inf: {d!r}")

    @property
    def s(self) -> int:
        return len(self.orders)

    def order(self, color: int) -> Order:
        """返回颜色 color（从 1 开始）的阶"""
        return self.orders[color - 1]

    def __str__(self) -> str:
        return format_signature(self)


@dataclass(frozen=True, order=True)
class Letter:
    """字母 g_r（starred=False）或 g_r*（starred=True）"""

    color: int
    starred: bool = False

    @property
    def exponent(self) -> int:
        return -1 if self.starred else 1

    def star(self) -> "Letter":
        return Letter(self.color, not self.starred)

    def __str__(self) -> str:
        return f"g{self.color}{'*' if self.starred else ''}"


@dataclass(frozen=True)
class Word:
    """单词：字母序列，空序列即单位元 e"""

    letters: Tuple[Letter, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __str__(self) -> str:
        return format_word(self)

    @property
    def is_empty(self) -> bool:
        return not self.letters

    def inverse(self) -> "Word":
        """反序并对每个字母取星（群中的逆元）"""
        return Word(tuple(letter.star() for letter in reversed(self.letters)))

    def rotate(self, k: int) -> "Word":
        """循环左移 k 位"""
        if not self.letters:
            return self
        k %= len(self.letters)
        return Word(self.letters[k:] + self.letters[:k])

    def colors(self) -> Tuple[int, ...]:
        return tuple(sorted({letter.color for letter in self.letters}))


def parse_word(text: str) -> Word:
    """
    解析单词文本

    Args:
        text: 空白分隔的 g<r> / g<r>* 记号，空串或单独的 "e" 表示 e

    Returns:
        Word 对象

    Raises:
        ValueError: 记号格式错误
    """
    if text.strip() == "e":
        return Word(())
    letters = []
    for token in text.split():
        match = _TOKEN_PATTERN.match(token)
        if not match:
            raise ValueError(f"无法识别的字母记号: {token!r}")
        color = int(match.group(1))
        if color < 1:
            raise ValueError(f"颜色必须从 1 开始: {token!r}")
        letters.append(Letter(color, match.group(2) == '*'))
    return Word(tuple(letters))


def format_word(word: Word) -> str:
    if word.is_empty:
        return "e"
    return " ".join(str(letter) for letter in word.letters)


def parse_signature(text: str) -> Signature:
    """
    解析签名文本，如 "2,inf,3"

    Raises:
        ValueError: 格式错误
    """
    orders: List[Order] = []
    for part in text.split(','):
        part = part.strip().lower()
        if not part:
            raise ValueError(f"签名中存在空项: {text!r}")
        if part in ('inf', 'infinity', '∞'):
            orders.append(INFINITY)
        elif part.isdigit():
            orders.append(int(part))
        else:
            raise ValueError(f"无法识别的阶: {part!r}")
    return Signature(tuple(orders))


def format_signature(sig: Signature) -> str:
    return ",".join('inf' if d == INFINITY else str(d) for d in sig.orders)


def validate_word(word: Word, sig: Signature) -> None:
    """
    校验单词的颜色都在签名范围内

    Raises:
        ValueError: 颜色越界
    """
    for letter in word.letters:
        if not 1 <= letter.color <= sig.s:
            raise ValueError(
                f"字母 {letter} 的颜色超出签名范围 [1, {sig.s}]"
            )


def _reduce_exponent(exponent: int, order: Order) -> int:
    if order == INFINITY:
        return exponent
    return exponent % order


def normal_form(word: Word, sig: Signature) -> Word:
    """
    计算单词在循环群自由积中的正规形
    同色的极大连续段合并为净指数，有限阶时对 d_r 取模，
    指数为 0 的段删除后与相邻段重新合并

    Args:
        word: 单词
        sig: 签名

    Returns:
        约化后的唯一代表元（幂等）
    """
    validate_word(word, sig)
    return _normal_form_cached(word, sig)


@lru_cache(maxsize=65536)
def _normal_form_cached(word: Word, sig: Signature) -> Word:
    # 栈中相邻段颜色互不相同，且指数非零
    stack: List[List[int]] = []
    for letter in word.letters:
        order = sig.order(letter.color)
        if stack and stack[-1][0] == letter.color:
            stack[-1][1] = _reduce_exponent(stack[-1][1] + letter.exponent, order)
            if stack[-1][1] == 0:
                stack.pop()
        else:
            exponent = _reduce_exponent(letter.exponent, order)
            if exponent != 0:
                stack.append([letter.color, exponent])

    letters: List[Letter] = []
    for color, exponent in stack:
        letters.extend([Letter(color, exponent < 0)] * abs(exponent))
    return Word(tuple(letters))


def is_identity(word: Word, sig: Signature) -> bool:
    """w ≈ e 当且仅当正规形为空"""
    return normal_form(word, sig).is_empty


def phi_haar(word: Word, sig: Signature) -> int:
    """自由 d-Haar 酉元族上的 φ(u_w)：w ≈ e 时为 1，否则为 0"""
    return 1 if is_identity(word, sig) else 0


def words_equivalent(first: Word, second: Word, sig: Signature) -> bool:
    """w1 ≈ w2 当且仅当 w1 · w2^{-1} ≈ e"""
    return is_identity(first + second.inverse(), sig)


def relators(sig: Signature) -> List[Word]:
    """生成同余的关系子 x：g g*、g* g，以及有限阶时的 g^d、(g*)^d"""
    result = []
    for color, order in enumerate(sig.orders, start=1):
        g, g_star = Letter(color), Letter(color, True)
        result.append(Word((g, g_star)))
        result.append(Word((g_star, g)))
        if order != INFINITY:
            result.append(Word((g,) * order))
            result.append(Word((g_star,) * order))
    return result


def is_identity_by_rotation(
    word: Word,
    sig: Signature,
    max_len: int = ROTATION_CHECK_MAX_LEN,
) -> bool:
    """
    按循环刻画判定 w ≈ e：
    w = e，或 w 的某个循环置换形如 v·x，其中 v ≈ e 且 x 为关系子
    仅用于与 normal_form 交叉验证；搜索量随长度指数增长，超过 max_len 直接拒绝

    Raises:
        BudgetExceededError: 单词长度超过 max_len
    """
    validate_word(word, sig)
    if len(word) > max_len:
        raise BudgetExceededError("旋转刻画的单词长度", len(word), max_len)
    xs = tuple(x.letters for x in relators(sig))
    return _rotation_decide(_cyclic_canonical(word.letters), xs)


def _cyclic_canonical(letters: Tuple[Letter, ...]) -> Tuple[Letter, ...]:
    """字典序最小的循环置换，作为循环单词的缓存键"""
    if not letters:
        return letters
    return min(letters[k:] + letters[:k] for k in range(len(letters)))


@lru_cache(maxsize=65536)
def _rotation_decide(letters: Tuple[Letter, ...], xs: Tuple[Tuple[Letter, ...], ...]) -> bool:
    if not letters:
        return True
    n = len(letters)
    tried = set()
    for k in range(n):
        rotated = letters[k:] + letters[:k]
        for x in xs:
            m = len(x)
            if m > n or rotated[n - m:] != x:
                continue
            rest = _cyclic_canonical(rotated[:n - m])
            if rest in tried:
                continue
            tried.add(rest)
            if _rotation_decide(rest, xs):
                return True
    return False


def alphabet(sig: Signature) -> List[Letter]:
    """字母表的固定顺序：g1, g1*, g2, g2*, ..."""
    return [
        Letter(color, starred)
        for color in range(1, sig.s + 1)
        for starred in (False, True)
    ]


def enumerate_words(sig: Signature, max_len: int) -> Iterator[Word]:
    """
    按长度、再按字典序生成所有长度不超过 max_len 的单词
    总数为 Σ_{l<=max_len} (2s)^l
    """
    if max_len < 0:
        raise ValueError("max_len 必须非负")
    letters = alphabet(sig)
    for length in range(max_len + 1):
        for combo in itertools.product(letters, repeat=length):
            yield Word(tuple(combo))


def power_word(color: int, exponent: int) -> Word:
    """g_color^exponent，负指数使用 g*"""
    return Word((Letter(color, exponent < 0),) * abs(exponent))


def concat(words: Sequence[Word]) -> Word:
    result = Word()
    for word in words:
        result = result + word
    return result
