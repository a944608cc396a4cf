"""Parameter-free video scene segmentation by minimum description length."""

__version__ = "0.1.0"

from .assignment import (AssignmentProblem, assign_names, build_scene_costs,
                         build_speaker_costs, hungarian, linear_sum_assignment)
from .baselines import (ContiguousKMeans, UniformOracleSegmenter, UniformSegmenter,
                        contiguous_kmeans, labels_to_breaks, uniform_breaks,
                        uniform_oracle_breaks)
from .features import (FeatureSequence, ReferenceAnnotation, infer_precision_bits,
                       load_features, read_annotations, save_features, synth_sequence)
from .mdl import (MdlParams, MDLSegmenter, SegmentCostTable, brute_force_segment,
                  build_cost_table, dp_segment, segment_bitcost, segment_sequence)
from .metrics import (MetricReport, MultiRefReport, aggregate_multi, ari, cluster_accuracy,
                      ded, evaluate, nmi, pk, windowdiff)
from .segmentation import Segmentation, frame_labels
