import os
import sys
import time
import datetime
import logging
from contextlib import contextmanager

# Global variables for tracking
stage_log = []
MAX_LOG_SIZE = 100  # Keep last 100 stages in memory
LOG_FILE_PATH = None  # Path of the stage log file

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'

_configured = False


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever sys.stderr is at emit time"""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def _get_writable_log_dir():
    candidates = []
    env_dir = os.getenv("LOG_DIR")
    if env_dir:
        candidates.append(env_dir)
    candidates.extend(["logs", "/tmp/logs"])

    for log_dir in candidates:
        try:
            os.makedirs(log_dir, exist_ok=True)
            test_path = os.path.join(log_dir, ".write_test")
            with open(test_path, "a", encoding="utf-8"):
                pass
            os.remove(test_path)
            return log_dir
        except Exception:
            continue
    return None


def configure_logging(level=None, log_dir=None):
    """
    Configure the root logger once: stderr plus dheom.log in the log directory

    Args:
        level (str, optional): Log level name, defaults to DHEOM_LOG_LEVEL or INFO
        log_dir (str, optional): Explicit log directory; falls back to the writable-dir search

    Returns:
        str: The log directory in use, or None when logging to the console only
    """
    global _configured, LOG_FILE_PATH

    level_name = (level or os.getenv("DHEOM_LOG_LEVEL", "INFO")).upper()
    directory = log_dir or _get_writable_log_dir()

    root = logging.getLogger()
    if _configured:
        root.setLevel(level_name)
        return os.path.dirname(LOG_FILE_PATH) if LOG_FILE_PATH else None

    # stdout carries CSV, so console logging goes to stderr
    handlers = [_StderrHandler()]
    if directory:
        try:
            os.makedirs(directory, exist_ok=True)
            handlers.append(logging.FileHandler(os.path.join(directory, "dheom.log"), encoding="utf-8"))
            LOG_FILE_PATH = os.path.join(directory, "stages.log")
        except Exception as e:
            print(f"[LOG_ERROR] Could not open log file in {directory}: {e}", file=sys.stderr)
            directory = None

    formatter = logging.Formatter(LOG_FORMAT)
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)
    root.setLevel(level_name)
    _configured = True
    return directory


def log_stage(stage, seconds, success=True, error=None, **details):
    """
    Record one timed stage (solver integration, Monte Carlo batch, sweep row ...)

    Args:
        stage (str): Stage name, e.g. "dheom.integrate"
        seconds (float): Wall time of the stage
        success (bool): Whether the stage finished
        error (Exception, optional): Error raised by the stage
        **details: Extra fields kept with the entry (depth, steps, trajectories ...)
    """
    global stage_log
    timestamp = datetime.datetime.now()

    stage_log.append({
        "timestamp": timestamp,
        "stage": stage,
        "seconds": float(seconds),
        "success": success,
        "error": str(error) if error else None,
        "details": details,
    })

    if len(stage_log) > MAX_LOG_SIZE:
        stage_log = stage_log[-MAX_LOG_SIZE:]

    status = "SUCCESS" if success else "FAILED"
    entry = f"[{timestamp.strftime('%Y-%m-%d %H:%M:%S')}] {stage} - {status} - {seconds:.3f}s"
    if details:
        entry += " - " + ", ".join(f"{k}={v}" for k, v in sorted(details.items()))
    if error:
        entry += f"\n  ERROR: {error}"

    if LOG_FILE_PATH:
        try:
            with open(LOG_FILE_PATH, 'a', encoding='utf-8') as log_file:
                log_file.write(entry + "\n")
        except Exception as e:
            logging.getLogger('solver_logging').warning(f"Failed to write stage log: {e}")


@contextmanager
def stage_timer(stage, **details):
    """Time a block and log it as a stage; the yielded dict can take extra details"""
    extra = dict(details)
    start = time.perf_counter()
    try:
        yield extra
    except Exception as e:
        log_stage(stage, time.perf_counter() - start, success=False, error=e, **extra)
        raise
    log_stage(stage, time.perf_counter() - start, success=True, **extra)


def get_stage_stats():
    """
    Summarize the in-memory stage log

    Returns:
        dict: Count, failures and total wall time per stage
    """
    if not stage_log:
        return {"total_stages": 0, "by_stage": {}}

    by_stage = {}
    for entry in stage_log:
        stats = by_stage.setdefault(entry["stage"], {"count": 0, "failed": 0, "seconds": 0.0})
        stats["count"] += 1
        stats["seconds"] += entry["seconds"]
        if not entry["success"]:
            stats["failed"] += 1

    return {
        "total_stages": len(stage_log),
        "by_stage": by_stage,
        "recent_errors": [e["error"] for e in stage_log if e["error"]][-5:],
    }


def wall_times():
    """Total seconds per stage, for the run manifest"""
    return {stage: round(stats["seconds"], 6) for stage, stats in get_stage_stats()["by_stage"].items()}


def reset_stage_log():
    global stage_log
    stage_log = []
