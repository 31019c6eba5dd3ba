import logging
import multiprocessing as mp

logger = logging.getLogger(__name__)


def init_worker_logging(level=logging.INFO):
    # spawned workers start with an unconfigured root logger
    logging.basicConfig(level=level)


def run_many(fn, items, workers=None):
    '''
    Map fn over independent items, in a process pool when more than one worker is requested.
    Each item is handled by exactly one process and nothing is shared between them; results
    come back in input order. Workers log at the parent's root level.
    '''
    items = list(items)
    if workers is None:
        workers = min(len(items), mp.cpu_count())
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.info('Running %d jobs on %d worker processes', len(items), workers)
    level = logging.getLogger().getEffectiveLevel()
    with mp.get_context('spawn').Pool(processes=workers, initializer=init_worker_logging,
                                      initargs=(level,)) as pool:
        return pool.map(fn, items)
