"""
字级并行原语：在固定大小（默认 256 位，即 4 个 64 位机器字）的缓冲区中
存放若干变长位串，并提供前缀匹配、前缀长度、插入、删除、截断、拼接等操作。

布局约定：
1. data 是 s_1∘s_2∘…∘s_ℓ 的直接拼接，共 length 位，按 MSB-first 编址
2. boundaries 是单独的元数据位向量，每个位串记为一个 1 后跟 |s_i| 个 0，
   共 length + count 位，因此空串也有自己的边界，count 等于其中 1 的个数
3. 容量只约束 data：Σ|s_i| ≤ capacity
4. 所有操作只做移位和掩码，结果是新的值对象（不可变）

NaiveStrings 是基于 Python 字符串列表的朴素实现，用于等价性测试。
"""
from dataclasses import dataclass, field
from typing import List, NamedTuple, Sequence, Tuple

from src.utils.errors import WordOpsOverflowError, WordOpsRangeError

BUFFER_BITS = 256
WORD_BITS = 64


class Bits(NamedTuple):
    """定长位串，value 的最高位对应位串第 0 位"""
    value: int
    length: int

    @classmethod
    def parse(cls, text: str) -> "Bits":
        return cls(int(text, 2) if text else 0, len(text))

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b") if self.length else ""

    def is_prefix_of(self, other: "Bits") -> bool:
        if self.length > other.length:
            return False
        return (other.value >> (other.length - self.length)) == self.value

    def prefix(self, k: int) -> "Bits":
        return Bits(self.value >> (self.length - k), k)

    def drop(self, k: int) -> "Bits":
        k = min(k, self.length)
        rest = self.length - k
        return Bits(self.value & ((1 << rest) - 1), rest)

    def concat(self, other: "Bits") -> "Bits":
        return Bits((self.value << other.length) | other.value, self.length + other.length)

    def lcp(self, other: "Bits") -> int:
        """最长公共前缀长度"""
        m = min(self.length, other.length)
        diff = (self.value >> (self.length - m)) ^ (other.value >> (other.length - m))
        return m if diff == 0 else m - diff.bit_length()


EMPTY = Bits(0, 0)


@dataclass(frozen=True, slots=True)
class PackedStrings:
    data: int = 0
    boundaries: int = 0
    count: int = 0
    length: int = 0
    capacity: int = BUFFER_BITS

    @property
    def boundary_bits(self) -> int:
        """boundaries 位向量的长度"""
        return self.length + self.count

    @property
    def words(self) -> int:
        return max(1, -(-self.length // WORD_BITS))

    def string_at(self, rank: int) -> Bits:
        _check_rank(self, rank, self.count)
        marks = _marks(self)
        return _read(self, *_extent(self, marks, rank - 1))

    def strings(self) -> List[Bits]:
        marks = _marks(self)
        return [_read(self, *_extent(self, marks, i)) for i in range(self.count)]


def from_strings(strings: Sequence[Bits], capacity: int = BUFFER_BITS) -> PackedStrings:
    data = boundaries = length = 0
    for s in strings:
        data = (data << s.length) | s.value
        boundaries = (boundaries << (s.length + 1)) | (1 << s.length)
        length += s.length
    if length > capacity:
        raise WordOpsOverflowError(f"{length} bits do not fit into a {capacity}-bit buffer")
    return PackedStrings(data, boundaries, len(strings), length, capacity)


def bitmap_indices(bitmap: int) -> List[int]:
    """bitmap 第 i-1 位对应 rank i"""
    out = []
    i = 1
    while bitmap:
        if bitmap & 1:
            out.append(i)
        bitmap >>= 1
        i += 1
    return out


# ------------------------------
# 内部工具
# ------------------------------
def _check_rank(store: PackedStrings, rank: int, upper: int) -> None:
    if not 1 <= rank <= upper:
        raise WordOpsRangeError(f"rank {rank} outside [1, {upper}] (count={store.count})")


def _check_range(store: PackedStrings, j: int, k: int) -> None:
    if not 1 <= j <= k <= store.count:
        raise WordOpsRangeError(f"range [{j}, {k}] outside [1, {store.count}]")


def _marks(store: PackedStrings) -> List[int]:
    """boundaries 中每个 1 的位置（MSB-first）"""
    out = []
    b = store.boundaries
    total = store.boundary_bits
    while b:
        top = b.bit_length() - 1
        out.append(total - 1 - top)
        b ^= 1 << top
    return out


def _extent(store: PackedStrings, marks: List[int], i: int) -> Tuple[int, int]:
    """s_{i+1} 在 data 中的 [start, end)；第 i 个标记之前有 i 个标记不占 data"""
    start = marks[i] - i
    end = marks[i + 1] - (i + 1) if i + 1 < len(marks) else store.length
    return start, end


def _read(store: PackedStrings, start: int, end: int) -> Bits:
    width = end - start
    return Bits((store.data >> (store.length - end)) & ((1 << width) - 1), width)


def _replace(value: int, length: int, at: int, remove: int, ins_value: int, ins_len: int) -> int:
    tail_len = length - at - remove
    hi = value >> (length - at)
    lo = value & ((1 << tail_len) - 1)
    return (((hi << ins_len) | ins_value) << tail_len) | lo


def _edit(store: PackedStrings, at: int, remove: int, ins: Bits,
          mark_at: int, mark_remove: int, marks: Bits, count_delta: int) -> PackedStrings:
    new_length = store.length - remove + ins.length
    if new_length > store.capacity:
        raise WordOpsOverflowError(f"{new_length} bits do not fit into a {store.capacity}-bit buffer")
    return PackedStrings(
        _replace(store.data, store.length, at, remove, ins.value, ins.length),
        _replace(store.boundaries, store.boundary_bits, mark_at, mark_remove, marks.value, marks.length),
        store.count + count_delta,
        new_length,
        store.capacity,
    )


# ------------------------------
# 查询
# ------------------------------
def prefix_match(store: PackedStrings, query: Bits, j: int, k: int) -> int:
    """返回 bitmap：第 i-1 位置 1 当且仅当 s_i 是 query 的前缀（i ∈ [j,k]）"""
    _check_range(store, j, k)
    marks = _marks(store)
    bitmap = 0
    for i in range(j - 1, k):
        if _read(store, *_extent(store, marks, i)).is_prefix_of(query):
            bitmap |= 1 << i
    return bitmap


def prefix_lengths(store: PackedStrings, query: Bits, j: int, k: int) -> List[int]:
    _check_range(store, j, k)
    marks = _marks(store)
    return [_read(store, *_extent(store, marks, i)).lcp(query) for i in range(j - 1, k)]


# ------------------------------
# 更新
# ------------------------------
def insert_string(store: PackedStrings, s: Bits, rank: int) -> PackedStrings:
    _check_rank(store, rank, store.count + 1)
    marks = _marks(store)
    if rank <= store.count:
        mark_at = marks[rank - 1]
        at = mark_at - (rank - 1)
    else:
        mark_at, at = store.boundary_bits, store.length
    return _edit(store, at, 0, s, mark_at, 0, Bits(1 << s.length, s.length + 1), 1)


def delete_string(store: PackedStrings, rank: int) -> PackedStrings:
    _check_rank(store, rank, store.count)
    marks = _marks(store)
    start, end = _extent(store, marks, rank - 1)
    width = end - start
    return _edit(store, start, width, EMPTY, marks[rank - 1], width + 1, EMPTY, -1)


def splice(store: PackedStrings, rank: int, drop_prefix_bits: int) -> PackedStrings:
    """从 s_rank 开头删掉至多 drop_prefix_bits 位"""
    _check_rank(store, rank, store.count)
    marks = _marks(store)
    start, end = _extent(store, marks, rank - 1)
    cut = min(drop_prefix_bits, end - start)
    return _edit(store, start, cut, EMPTY, marks[rank - 1] + 1, cut, EMPTY, 0)


def concat_adjacent(store: PackedStrings, rank: int) -> PackedStrings:
    """把 s_rank 与 s_{rank+1} 拼接成一个串：data 不变，只删掉 s_{rank+1} 的边界标记"""
    _check_rank(store, rank, store.count - 1)
    marks = _marks(store)
    return _edit(store, 0, 0, EMPTY, marks[rank], 1, EMPTY, -1)


def parallel_drop_prefix(store: PackedStrings, x: int) -> Tuple[PackedStrings, int]:
    marks = _marks(store)
    out = store
    nonempty = 0
    # 从后往前处理，前面串的位置不受影响
    for i in range(store.count - 1, -1, -1):
        start, end = _extent(store, marks, i)
        width = end - start
        cut = min(x, width)
        if cut:
            out = _edit(out, start, cut, EMPTY, marks[i] + 1, cut, EMPTY, 0)
        if width > cut:
            nonempty |= 1 << i
    return out, nonempty


# ------------------------------
# 朴素实现（测试用）
# ------------------------------
@dataclass(frozen=True)
class NaiveStrings:
    items: Tuple[str, ...] = field(default_factory=tuple)
    capacity: int = BUFFER_BITS

    def _check_fit(self, items: Tuple[str, ...]) -> "NaiveStrings":
        # 只数串里的字符，空串不占容量
        used = sum(len(s) for s in items)
        if used > self.capacity:
            raise WordOpsOverflowError(f"naive store overflow ({used} > {self.capacity})")
        return NaiveStrings(items, self.capacity)

    def _check_range(self, j: int, k: int) -> None:
        if not 1 <= j <= k <= len(self.items):
            raise WordOpsRangeError(f"range [{j}, {k}] outside [1, {len(self.items)}]")

    def prefix_match(self, query: str, j: int, k: int) -> int:
        self._check_range(j, k)
        return sum(1 << i for i in range(j - 1, k) if query.startswith(self.items[i]))

    def prefix_lengths(self, query: str, j: int, k: int) -> List[int]:
        self._check_range(j, k)
        out = []
        for s in self.items[j - 1:k]:
            n = 0
            while n < min(len(s), len(query)) and s[n] == query[n]:
                n += 1
            out.append(n)
        return out

    def insert_string(self, s: str, rank: int) -> "NaiveStrings":
        if not 1 <= rank <= len(self.items) + 1:
            raise WordOpsRangeError(f"rank {rank}")
        return self._check_fit(self.items[:rank - 1] + (s,) + self.items[rank - 1:])

    def delete_string(self, rank: int) -> "NaiveStrings":
        if not 1 <= rank <= len(self.items):
            raise WordOpsRangeError(f"rank {rank}")
        return NaiveStrings(self.items[:rank - 1] + self.items[rank:], self.capacity)

    def splice(self, rank: int, x: int) -> "NaiveStrings":
        if not 1 <= rank <= len(self.items):
            raise WordOpsRangeError(f"rank {rank}")
        items = list(self.items)
        items[rank - 1] = items[rank - 1][x:]
        return NaiveStrings(tuple(items), self.capacity)

    def concat_adjacent(self, rank: int) -> "NaiveStrings":
        if not 1 <= rank < len(self.items):
            raise WordOpsRangeError(f"rank {rank}")
        items = list(self.items)
        items[rank - 1:rank + 1] = [items[rank - 1] + items[rank]]
        return NaiveStrings(tuple(items), self.capacity)

    def parallel_drop_prefix(self, x: int) -> Tuple["NaiveStrings", int]:
        items = tuple(s[x:] for s in self.items)
        return NaiveStrings(items, self.capacity), sum(1 << i for i, s in enumerate(items) if s)
