#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "digitrec/features.hpp"

namespace digitrec {

/// Diagonal-covariance Gaussian mixture for one emitting state.
struct GaussianMixture {
  std::vector<double> weights;                 // M
  std::vector<std::vector<double>> means;      // M x dim
  std::vector<std::vector<double>> variances;  // M x dim

  std::size_t num_components() const noexcept { return weights.size(); }
  double log_density(std::span<const double> x) const;

  bool operator==(const GaussianMixture&) const = default;
};

/// Strict left-to-right HMM. States 0 and N+1 of the transition matrix are
/// the non-emitting entry and exit; emitting state i is row i + 1.
class HmmModel {
 public:
  HmmModel() = default;
  HmmModel(std::string label, std::size_t num_states, std::size_t num_mixtures, FeatureSignature signature);

  const std::string& label() const noexcept { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  std::size_t num_states() const noexcept { return states_.size(); }
  std::size_t dim() const noexcept { return signature_.dim; }
  const FeatureSignature& signature() const noexcept { return signature_; }
  /// Per-dimension lower bound applied to every variance.
  const std::vector<double>& variance_floor() const noexcept { return variance_floor_; }
  void set_variance_floor(std::vector<double> floor) { variance_floor_ = std::move(floor); }

  /// (N+2) x (N+2), row-major; entries are probabilities.
  double transition(std::size_t from, std::size_t to) const { return trans_[from * stride() + to]; }
  void set_transition(std::size_t from, std::size_t to, double p) { trans_[from * stride() + to] = p; }
  /// Sets the self-loop probability of emitting state i (advance gets 1 - p).
  void set_self_loop(std::size_t state, double p);

  const GaussianMixture& state(std::size_t i) const { return states_[i]; }
  GaussianMixture& state(std::size_t i) { return states_[i]; }

  /// Throws InvalidArgument if a stochasticity or topology invariant fails.
  void check_invariants(double tol = 1e-9) const;

  bool operator==(const HmmModel&) const = default;

 private:
  std::size_t stride() const noexcept { return states_.size() + 2; }

  std::string label_;
  FeatureSignature signature_;
  std::vector<double> variance_floor_;
  std::vector<double> trans_;
  std::vector<GaussianMixture> states_;
};

struct TrainOptions {
  std::size_t num_states = 5;
  std::size_t num_mixtures = 1;
  std::size_t max_iters = 20;
  double tol = 1e-4;
  /// Variance floor as a fraction of the global per-dimension variance.
  double variance_floor_scale = 1e-4;
  /// States (or components) with less occupancy keep their parameters.
  double min_occupancy = 1e-3;
};

/// Global mean and variance in every state; extra mixtures by binary
/// splitting of the heaviest component; uniform transitions.
HmmModel flat_start(std::span<const FeatureMatrix> data, std::size_t num_states, std::size_t num_mixtures,
                    const std::string& label = {}, double variance_floor_scale = 1e-4);

/// Forward log-likelihood; -inf when no legal path exists.
double log_likelihood(const HmmModel& model, const FeatureMatrix& features);

struct ViterbiResult {
  std::vector<std::size_t> path;  // emitting state index per frame
  double log_prob = 0.0;
};

ViterbiResult viterbi(const HmmModel& model, const FeatureMatrix& features);

struct TrainResult {
  HmmModel model;
  std::vector<double> trace;            // total log-likelihood before each update, then final
  std::vector<std::size_t> degenerate;  // states frozen at least once
  std::size_t skipped_utterances = 0;   // shorter than the state count
};

TrainResult baum_welch(const HmmModel& model, std::span<const FeatureMatrix> data, std::size_t max_iters,
                       double tol, double min_occupancy = 1e-3);

/// flat_start followed by baum_welch.
TrainResult train_word_model(const std::string& label, std::span<const FeatureMatrix> data,
                             const TrainOptions& options);

class WordModelSet {
 public:
  /// Throws SignatureMismatch when the signature differs from existing models
  /// and InvalidArgument on a duplicate label.
  void add(HmmModel model);
  bool empty() const noexcept { return models_.empty(); }
  std::size_t size() const noexcept { return models_.size(); }
  const FeatureSignature& signature() const;
  /// Models ordered by label.
  const std::map<std::string, HmmModel>& models() const noexcept { return models_; }

 private:
  std::map<std::string, HmmModel> models_;
};

struct Recognition {
  std::string label;
  std::vector<std::pair<std::string, double>> scores;  // label order
};

/// Argmax of the forward log-likelihood; ties go to the lexicographically
/// first label.
Recognition recognize(const WordModelSet& models, const FeatureMatrix& features);

// Model files: "DHM1", version u16, then label, signature and parameters.
constexpr std::uint16_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const HmmModel& model);
HmmModel decode_model(const std::vector<std::uint8_t>& bytes);
void save_model(const HmmModel& model, const std::filesystem::path& path);
HmmModel load_model(const std::filesystem::path& path);

/// Every "*.dhm" file in a directory, in filename order.
WordModelSet load_model_set(const std::filesystem::path& dir);
void save_model_set(const WordModelSet& models, const std::filesystem::path& dir);

}  // namespace digitrec
