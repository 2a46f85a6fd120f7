"""Container records, EDI states, event stream and predictor features."""

from dwellsim.edi.features import (
    Calendar, FeatureOptions, FeatureVector, actual_icdt, build_features, due_date_remaining,
    elapsed_time, feature_frame,
)
from dwellsim.edi.records import (
    CType, ContainerRecord, EDIState, SimEvent, Size, check_records, event_stream, read_records,
    write_records,
)
from dwellsim.edi.stats import WelchResult, welch_t_test

__all__ = [
    "CType", "Calendar", "ContainerRecord", "EDIState", "FeatureOptions", "FeatureVector", "SimEvent",
    "Size", "WelchResult", "actual_icdt", "build_features", "check_records", "due_date_remaining",
    "elapsed_time", "event_stream", "feature_frame", "read_records", "welch_t_test", "write_records",
]
