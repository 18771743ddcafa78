class BroomError(Exception):
    """所有 broom filter 相关异常的基类"""


class ParamsError(BroomError, ValueError):
    """参数不合法：n 不是 2 的幂、epsilon 不是 2 的负整数次幂等"""


class CapacityError(BroomError):
    """集合已达到容量 n"""


class StructuralOverflowError(BroomError):
    """第二层 / backyard 已满（在支持的负载下统计上不应出现）"""


class ContractError(BroomError):
    """调用方违反前置条件：重复插入、删除不存在的 key、没有 full collision 时调用 adapt"""


class CorruptionError(BroomError):
    """内部状态损坏：live 指纹互为前缀，或 remote 镜像不一致"""


class StaleHandleError(BroomError):
    """ghost handle 已失效"""


class HashExhaustedError(BroomError):
    """Extend 用尽了全部 hash 位仍未分开（full-hash tie）"""


class UnsupportedOperationError(BroomError):
    """该 AMQ 不支持此操作（例如 Bloom 删除）"""


class SnapshotError(BroomError):
    """快照格式或版本不匹配"""


class UnknownNameError(BroomError):
    """harness / cli 中未知的 AMQ 或 adversary 名称"""


class WordOpsError(BroomError):
    """字级并行原语的错误"""


class WordOpsRangeError(WordOpsError, IndexError):
    """rank 或区间越界"""


class WordOpsOverflowError(WordOpsError):
    """写入会超出固定缓冲区容量"""
