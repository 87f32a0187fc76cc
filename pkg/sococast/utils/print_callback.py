from typing import Optional

from sococast.schema.pubsub import Event
from sococast.utils.pubsub import subscribe_event

COLOR_MAPPING = {
    "red": "91",
    "green": "92",
    "yellow": "93",
    "blue": "94",
    "magenta": "95",
    "cyan": "96",
}


def colored(text: str, color: str) -> str:
    code = COLOR_MAPPING[color]
    return f"\033[{code}m{text}\033[0m"


def print_callback(
    event_type: Event, id: int, timestamp: str, data: Optional[dict] = None
) -> None:
    data = data or {}
    print(f"\n[time: {timestamp}] [id: {id}] [event: {event_type.value}]")
    if event_type == Event.ExperimentStart:
        msg = (
            f"Learner: {data['learner']} Forecaster: {data['family']}\n"
            f"T: {data['T']} Seeds: {data['seeds']}"
        )
        color = "cyan"
    elif event_type == Event.ExperimentEnd:
        msg = (
            f"Exceedance: {data['exceedance']:.3f} over {data['n_seeds']} seed(s)\n"
            f"Output: {data['output']}"
        )
        color = "green"
    elif event_type == Event.SeedStart:
        msg = f"Seed: {data['seed']}"
        color = "cyan"
    elif event_type == Event.SeedEnd:
        msg = (
            f"Seed: {data['seed']} Regret: {data['regret']:.6g} Bound: {data['bound']:.6g}\n"
            f"Clip events: {data['clip_events']} Clamp events: {data['clamp_events']}"
        )
        color = "yellow"
    elif event_type == Event.ComparatorSearch:
        msg = f"Comparator risk: {data['cum_risk']:.10g} Certified: {data['certified']}"
        color = "blue"
    elif event_type == Event.CertificationWarning:
        msg = (
            f"Comparator beaten by a sampled point: {data['best_sample']:.10g}"
            f" < {data['cum_risk']:.10g}"
        )
        color = "red"
    elif event_type == Event.InverseRefresh:
        msg = f"Step: {data['t']} Drift before refresh: {data['drift']:.3e}"
        color = "magenta"
    elif event_type == Event.ClipEvent:
        msg = f"Gradient norm {data['norm']:.6g} clipped to {data['bound']:.6g} at step {data['t']}"
        color = "red"
    elif event_type == Event.ClampEvent:
        msg = f"{data['what']} clamped at step {data['t']}: {data['value']}"
        color = "red"
    elif event_type == Event.WarmUp:
        msg = f"Warm-up rounds: {data['rounds']}"
        color = "blue"
    elif event_type == Event.SurrogateDecomposition:
        msg = (
            f"Regret: {data['regret']:.6g} Linear: {data['linear']:.6g}"
            f" Quadratic: {data['quadratic']:.6g} Conditional: {data['conditional']:.6g}"
        )
        color = "magenta"
    elif event_type == Event.VerifyStart:
        msg = f"Suite: {data['suite']}"
        color = "cyan"
    elif event_type == Event.VerifyEnd:
        status = "passed" if data["passed"] else "FAILED"
        msg = f"Suite: {data['suite']} {status}\nWorst margin: {data['worst_margin']:.6g}\n{data['details']}"
        color = "green" if data["passed"] else "red"
    else:
        raise ValueError(f"Unknown event type: {event_type}")
    print(colored(msg, color))


def setup_print_callback() -> None:
    for event_type in Event:
        subscribe_event(event_type, print_callback)
