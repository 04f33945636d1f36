"""Fourier peak motion under perspective transforms: encode, warp, predict, detect."""
from .dft import (ComplexSpectrum, FrequencyPeak, SpatialImage, UndefinedPhaseError,
                  center_spectrum, dft_forward, dft_inverse, magnitude, normalize_minmax,
                  phase, uncenter_spectrum)
from .estimation import (EstimatedTransform, PeakDetection, detect_peaks, estimate_affine,
                         estimate_translation, measure_phase_set)
from .geometry import (DecomposedTransform, Interpolation, PerspectiveTransform, apply_point,
                       build_transform, decompose, recompose, rotation_transform, warp_image)
from .harness import SweepConfig, SweepRecord, export_figures, reproduce_table, run_sweep
from .pattern import PatternSpec, base_pattern_spec, crop_window, encode_peaks, tile_periodic
from .predictor import (FrequencyMap, build_frequency_map, pair_rotation, pair_scale,
                        pair_shear, predict_peak, predict_translation_phase, predict_warp,
                        predict_warp_homogeneous)

__version__ = "0.1.0"
