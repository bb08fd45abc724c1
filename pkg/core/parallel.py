"""
线程池调度模块
提交全部任务、按完成顺序收集，最后按输入顺序返回
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, List, Optional, Sequence, TypeVar

from pydantic import BaseModel

from core.config import get_settings

T = TypeVar("T")


class TaskError(BaseModel):
    """单个任务失败的记录"""
    index: int
    error_type: str
    error: str


def resolve_workers(max_workers: Optional[int] = None) -> int:
    """线程数：显式参数优先，否则取配置（受 LIEGAUSS_THREADS 限制）"""
    configured = get_settings().runtime.effective_threads()
    if max_workers is None:
        return configured
    return max(1, min(int(max_workers), configured))


def run_ordered(
    fn: Callable[[T], Any],
    items: Sequence[T],
    max_workers: Optional[int] = None,
    capture_errors: bool = True,
    on_done: Optional[Callable[[int, int], None]] = None,
) -> List[Any]:
    """
    并行执行 fn(item)，结果顺序与 items 一致

    Args:
        fn: 任务函数
        items: 输入序列
        max_workers: 最大线程数
        capture_errors: True 时失败项返回 TaskError，False 时重新抛出第一个异常
        on_done: 每完成一项回调 (已完成数, 总数)

    Returns:
        与 items 等长的结果列表
    """
    items = list(items)
    results: List[Any] = [None] * len(items)
    if not items:
        return results

    workers = resolve_workers(max_workers)
    if workers == 1:
        for i, item in enumerate(items):
            results[i] = _call(fn, i, item, capture_errors)
            if on_done:
                on_done(i + 1, len(items))
        return results

    done = 0
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(fn, item): i for i, item in enumerate(items)}
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception as e:
                if not capture_errors:
                    for pending in future_to_index:
                        pending.cancel()
                    raise
                results[index] = TaskError(index=index, error_type=type(e).__name__, error=str(e))
            done += 1
            if on_done:
                on_done(done, len(items))
    return results


def _call(fn: Callable[[T], Any], index: int, item: T, capture_errors: bool) -> Any:
    try:
        return fn(item)
    except Exception as e:
        if not capture_errors:
            raise
        return TaskError(index=index, error_type=type(e).__name__, error=str(e))
