from typing import List, Tuple

import pytest
from sococast.schema.pubsub import Event
from sococast.utils.pubsub import subscribe_event, unsubscribe_event


@pytest.fixture
def events():
    """Every event published during the test, as (event, data) pairs."""
    captured: List[Tuple[Event, dict]] = []

    def callback(event_type, id, timestamp, data=None):
        captured.append((event_type, data or {}))

    for event_type in Event:
        subscribe_event(event_type, callback)
    yield captured
    for event_type in Event:
        unsubscribe_event(event_type, callback)
