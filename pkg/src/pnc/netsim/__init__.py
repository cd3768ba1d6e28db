from pnc.netsim.simulate import (SimConfig, TransmissionRecord, encode_image_set,
                                 rank_of_class, read_records_csv, run_simulation,
                                 write_records_csv)
from pnc.netsim.trace import (ArrivalSchedule, BandwidthTrace, ScenarioConfig,
                              SimChannel, available_bytes, build_scenario_trace,
                              load_trace_csv, save_trace_csv)

__all__ = [
    "ArrivalSchedule", "BandwidthTrace", "ScenarioConfig", "SimChannel",
    "SimConfig", "TransmissionRecord", "available_bytes", "build_scenario_trace",
    "encode_image_set", "load_trace_csv", "rank_of_class", "read_records_csv",
    "run_simulation", "save_trace_csv", "write_records_csv",
]
