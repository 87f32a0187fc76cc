import json
import os
import sqlite3
import threading
from typing import Callable, Optional

import numpy as np

from sococast.schema.pubsub import Event
from sococast.utils.pubsub import subscribe_event

_lock = threading.Lock()


def _to_jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return str(value)


def make_file_callback(db_path: str) -> Callable:
    """Create a callback that appends every event to an sqlite table at `db_path`."""
    os.makedirs(os.path.dirname(os.path.abspath(db_path)), exist_ok=True)
    conn = sqlite3.connect(db_path, check_same_thread=False)
    cur = conn.cursor()
    cur.execute(
        """CREATE TABLE IF NOT EXISTS events (
                TIMESTAMP TEXT, EVENT TEXT, ID INT, DATA TEXT)"""
    )
    conn.commit()

    def file_callback(
        event_type: Event, id: int, timestamp: str, data: Optional[dict] = None
    ) -> None:
        if not data:
            data = {}
        with _lock:
            cur.execute(
                "INSERT INTO events VALUES (?, ?, ?, ?)",
                (timestamp, event_type.value, id, json.dumps(data, default=_to_jsonable)),
            )
            conn.commit()

    return file_callback


def setup_file_callback(db_path: str) -> Callable:
    callback = make_file_callback(db_path)
    for event_type in Event:
        subscribe_event(event_type, callback)
    return callback
