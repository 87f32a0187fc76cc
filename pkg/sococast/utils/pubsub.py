from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional

from sococast.schema.pubsub import Event

Callback = Callable[[Event, int, str, Optional[dict]], None]

subscribers: Dict[Event, List[Callback]] = {}


def publish_event(event_type: Event, id: int, data: Optional[dict] = None) -> None:
    if event_type not in subscribers.keys():
        return
    now = str(datetime.now(timezone.utc).astimezone().isoformat())
    for callback in subscribers[event_type]:
        callback(event_type, id, now, data)


def subscribe_event(event_type: Event, callback: Callback) -> None:
    if event_type not in subscribers.keys():
        subscribers[event_type] = [callback]
    elif callback not in subscribers[event_type]:
        subscribers[event_type].append(callback)


def unsubscribe_event(event_type: Event, callback: Callback) -> None:
    if callback in subscribers.get(event_type, []):
        subscribers[event_type].remove(callback)
