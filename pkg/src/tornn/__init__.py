"""Grouped bandpass recurrent networks with trainable cutoff parameters,
plus fully trainable RNN and leaky-ESN baselines, evaluated on
multiple-superimposed-oscillator forecasting."""

from .esnfit import (BOUNDS, EsnHyperparams, GaConfig, build_esn, fit_esn,
                     ga_search, harvest_states, predict_esn, ridge_readout)
from .model import (ErnnWeights, GammaParams, ModelState, Readout,
                    checkpoint_from_json, checkpoint_to_json,
                    count_ernn_params, count_trainable_params, ernn_step,
                    esn_step, run_sequence, sigmoid, tornn_step)
from .timeseries import (Spectrum, SupervisedDataset, TimeSeries, add_noise,
                         count_spectral_peaks, gen_mso, make_supervised,
                         nrmse, peak_frequencies, psd_estimate)
from .topology import (NetworkWeights, block_mask, build_topology,
                       input_weights, rescale_spectral_radius,
                       spectral_radius, weights_from_json, weights_to_json)
from .training import (GradientBundle, TrainConfig, TrainingDivergence,
                       TrainResult, adam_update, anchor_frequencies,
                       ernn_gradients, finite_difference_check, loss,
                       predict_ernn, predict_tornn, tbptt_gradients,
                       train_ernn, train_tornn)

__version__ = "0.1.0"
