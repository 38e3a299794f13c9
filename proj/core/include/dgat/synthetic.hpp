#pragma once

#include <string>
#include <vector>

#include "dgat/dataset.hpp"

namespace dgat {

enum class SignalDirection { kOut, kIn, kBoth };

const char* signal_direction_name(SignalDirection d);
SignalDirection signal_direction_from_name(const std::string& name);

struct SyntheticConfig {
  int num_nodes = 5000;
  double avg_out_degree = 5.0;
  int feature_dim = 16;
  SignalDirection signal = SignalDirection::kOut;
  double noise_std = 0.1;
  double positive_rate = 0.3;
  // Probability that a generated edge also gets its reverse. Negative means
  // auto: 1.0 for signal=both (so in- and out-neighbor sets coincide and both
  // probes can recover the label), 0.0 otherwise.
  double reciprocal_rate = -1.0;
  unsigned long long seed = 0;
};

// Generation-time validation: AUC of a fixed linear probe applied to the
// out-neighbor feature mean vs. applied to own + in-neighbor features.
struct GeneratorReport {
  std::vector<double> probe;
  double out_probe_auc = 0.0;
  double in_probe_auc = 0.0;
};

// Random directed graph (per-node out-degree ~ Poisson(avg_out_degree),
// uniform targets, no duplicates or self loops) with standard-normal node
// features. Labels are thresholded from a fixed random linear probe of the
// signal-side neighbor feature mean plus Gaussian noise, hitting
// positive_rate via the matching quantile. Deterministic under seed.
DatasetBundle generate_synthetic(const SyntheticConfig& cfg);
DatasetBundle generate_synthetic(const SyntheticConfig& cfg, GeneratorReport& report);

}  // namespace dgat
