"""Channel dataset synthesis from per-path ray data."""

from .raypaths import (GridGeometry, Link, PathRecord, PathsFormatError, ScenarioData,
                       dbm_to_amplitude, parse_paths_file, write_paths_file)
from .chansynth import (CarrierPair, ChannelMatrix, SamplingGrid, TapSet, bin_paths,
                        synth_matrix, synth_response, synth_uldl)

__version__ = "0.1.0"
