from enum import Enum


class Event(str, Enum):
    """The available events in the pubsub pipeline."""

    ExperimentStart = "Experiment Start"
    ExperimentEnd = "Experiment End"
    SeedStart = "Seed Start"
    SeedEnd = "Seed End"
    ComparatorSearch = "Comparator Search"
    CertificationWarning = "Certification Warning"
    InverseRefresh = "Inverse Refresh"
    ClipEvent = "Clip Event"
    ClampEvent = "Clamp Event"
    WarmUp = "Warm Up"
    SurrogateDecomposition = "Surrogate Decomposition"
    VerifyStart = "Verify Start"
    VerifyEnd = "Verify End"
