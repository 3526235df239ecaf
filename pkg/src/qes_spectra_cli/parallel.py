import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from tqdm import tqdm

T = TypeVar('T')
R = TypeVar('R')

THREADS_ENV = 'QES_THREADS'


def threads_from_env(default: int = 1) -> int:
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return default
    try:
        threads = int(value)
    except ValueError:
        logging.warning(f'Ignoring {THREADS_ENV}={value!r}, expected an integer.')
        return default
    return max(1, threads)


def ordered_map(fn: Callable[[T], R], items: Sequence[T], desc: str = '', progress: bool = True) -> List[R]:
    """ Apply fn to every item, concurrently when QES_THREADS > 1, returning results in item order. """
    threads = min(threads_from_env(), max(1, len(items)))
    if threads == 1:
        return [fn(item) for item in tqdm(items, desc=desc, disable=not progress)]
    logging.debug(f'Running {len(items)} {desc or "tasks"} on {threads} threads.')
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(tqdm(executor.map(fn, items), total=len(items), desc=desc, disable=not progress))
