#include "digitrec/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "digitrec/error.hpp"
#include "io_util.hpp"

namespace digitrec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kMinVariance = 1e-10;

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// Log-domain view of a model with per-component constants precomputed.
class Scorer {
 public:
  explicit Scorer(const HmmModel& m) : n_(m.num_states()), dim_(m.dim()) {
    const std::size_t s = n_ + 2;
    log_trans_.resize(s * s);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) log_trans_[i * s + j] = safe_log(m.transition(i, j));
    }
    comps_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const auto& g = m.state(j);
      for (std::size_t c = 0; c < g.num_components(); ++c) {
        Component comp;
        comp.mean = g.means[c];
        comp.inv_var.resize(dim_);
        double log_det = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
          comp.inv_var[d] = 1.0 / g.variances[c][d];
          log_det += std::log(g.variances[c][d]);
        }
        comp.log_const = safe_log(g.weights[c]) - 0.5 * (static_cast<double>(dim_) * kLog2Pi + log_det);
        comps_[j].push_back(std::move(comp));
      }
    }
  }

  std::size_t states() const { return n_; }
  double trans(std::size_t from, std::size_t to) const { return log_trans_[from * (n_ + 2) + to]; }
  double entry(std::size_t j) const { return trans(0, j + 1); }
  double step(std::size_t i, std::size_t j) const { return trans(i + 1, j + 1); }
  double exit(std::size_t i) const { return trans(i + 1, n_ + 1); }

  // Per-component log terms for state j at x; returns their log-sum.
  double component_terms(std::size_t j, std::span<const double> x, std::vector<double>& terms) const {
    const auto& cs = comps_[j];
    terms.resize(cs.size());
    double total = kNegInf;
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const auto& comp = cs[c];
      double q = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) {
        const double diff = x[d] - comp.mean[d];
        q += diff * diff * comp.inv_var[d];
      }
      terms[c] = comp.log_const - 0.5 * q;
      total = log_add(total, terms[c]);
    }
    return total;
  }

  // T x N emission log-likelihoods.
  std::vector<double> emissions(const FeatureMatrix& f) const {
    std::vector<double> b(f.num_frames() * n_);
    std::vector<double> terms;
    for (std::size_t t = 0; t < f.num_frames(); ++t) {
      for (std::size_t j = 0; j < n_; ++j) b[t * n_ + j] = component_terms(j, f.row(t), terms);
    }
    return b;
  }

 private:
  struct Component {
    std::vector<double> mean;
    std::vector<double> inv_var;
    double log_const = 0.0;
  };
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> log_trans_;
  std::vector<std::vector<Component>> comps_;
};

void check_observation(const HmmModel& model, const FeatureMatrix& features) {
  if (!(features.signature() == model.signature())) {
    fail(Errc::kSignatureMismatch, "features do not match the signature of model '" + model.label() + "'");
  }
  if (features.num_frames() == 0) fail(Errc::kEmptyObservation, "empty observation sequence");
}

// alpha[t * N + j]; returns total log-likelihood.
double forward(const Scorer& sc, const std::vector<double>& b, std::size_t frames, std::vector<double>& alpha) {
  const std::size_t n = sc.states();
  alpha.assign(frames * n, kNegInf);
  for (std::size_t j = 0; j < n; ++j) alpha[j] = sc.entry(j) + b[j];
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = kNegInf;
      for (std::size_t i = 0; i <= j; ++i) acc = log_add(acc, alpha[(t - 1) * n + i] + sc.step(i, j));
      alpha[t * n + j] = acc == kNegInf ? kNegInf : acc + b[t * n + j];
    }
  }
  double total = kNegInf;
  for (std::size_t i = 0; i < n; ++i) total = log_add(total, alpha[(frames - 1) * n + i] + sc.exit(i));
  return total;
}

void backward(const Scorer& sc, const std::vector<double>& b, std::size_t frames, std::vector<double>& beta) {
  const std::size_t n = sc.states();
  beta.assign(frames * n, kNegInf);
  for (std::size_t i = 0; i < n; ++i) beta[(frames - 1) * n + i] = sc.exit(i);
  for (std::size_t t = frames - 1; t-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = kNegInf;
      for (std::size_t j = i; j < n; ++j) acc = log_add(acc, sc.step(i, j) + b[(t + 1) * n + j] + beta[(t + 1) * n + j]);
      beta[t * n + i] = acc;
    }
  }
}

}  // namespace

double GaussianMixture::log_density(std::span<const double> x) const {
  double total = kNegInf;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    double q = 0.0, log_det = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double diff = x[d] - means[c][d];
      q += diff * diff / variances[c][d];
      log_det += std::log(variances[c][d]);
    }
    total = log_add(total, safe_log(weights[c]) - 0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + q));
  }
  return total;
}

HmmModel::HmmModel(std::string label, std::size_t num_states, std::size_t num_mixtures, FeatureSignature signature)
    : label_(std::move(label)), signature_(signature) {
  if (num_states == 0) fail(Errc::kInvalidArgument, "HMM needs at least one emitting state");
  if (num_mixtures == 0) fail(Errc::kInvalidArgument, "HMM needs at least one mixture component");
  const std::size_t dim = signature.dim;
  variance_floor_.assign(dim, kMinVariance);
  states_.resize(num_states);
  for (auto& g : states_) {
    g.weights.assign(num_mixtures, 1.0 / static_cast<double>(num_mixtures));
    g.means.assign(num_mixtures, std::vector<double>(dim, 0.0));
    g.variances.assign(num_mixtures, std::vector<double>(dim, 1.0));
  }
  trans_.assign(stride() * stride(), 0.0);
  set_transition(0, 1, 1.0);
  for (std::size_t i = 0; i < num_states; ++i) set_self_loop(i, 0.5);
}

void HmmModel::set_self_loop(std::size_t state, double p) {
  set_transition(state + 1, state + 1, p);
  set_transition(state + 1, state + 2, 1.0 - p);
}

void HmmModel::check_invariants(double tol) const {
  const std::size_t s = stride();
  for (std::size_t i = 0; i + 1 < s; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      const double p = transition(i, j);
      if (p < 0.0) fail(Errc::kInvalidArgument, "negative transition probability");
      const bool allowed = (i == 0) ? (j == 1) : (j == i || j == i + 1);
      if (!allowed && p != 0.0) fail(Errc::kInvalidArgument, "transition violates left-to-right topology");
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) fail(Errc::kInvalidArgument, "transition row does not sum to one");
  }
  for (std::size_t j = 0; j < s; ++j) {
    if (transition(s - 1, j) != 0.0) fail(Errc::kInvalidArgument, "exit state has outgoing transitions");
  }
  for (const auto& g : states_) {
    double sum = 0.0;
    for (double w : g.weights) sum += w;
    if (std::abs(sum - 1.0) > tol) fail(Errc::kInvalidArgument, "mixture weights do not sum to one");
    for (const auto& v : g.variances) {
      for (std::size_t d = 0; d < v.size(); ++d) {
        if (!(v[d] > 0.0) || v[d] < variance_floor_[d]) fail(Errc::kInvalidArgument, "variance below floor");
      }
    }
  }
}

// ---------------------------------------------------------------------------

HmmModel flat_start(std::span<const FeatureMatrix> data, std::size_t num_states, std::size_t num_mixtures,
                    const std::string& label, double variance_floor_scale) {
  if (data.empty()) fail(Errc::kEmptyTrainingSet, "no training utterances for '" + label + "'");
  const auto signature = data[0].signature();
  const std::size_t dim = data[0].dim();
  std::vector<double> sum(dim, 0.0), sum_sq(dim, 0.0);
  double count = 0.0;
  for (const auto& f : data) {
    if (f.dim() != dim) fail(Errc::kDimMismatch, "training utterances differ in dimension");
    if (!(f.signature() == signature)) fail(Errc::kSignatureMismatch, "training utterances differ in signature");
    for (std::size_t t = 0; t < f.num_frames(); ++t) {
      const auto row = f.row(t);
      for (std::size_t d = 0; d < dim; ++d) {
        sum[d] += row[d];
        sum_sq[d] += row[d] * row[d];
      }
    }
    count += static_cast<double>(f.num_frames());
  }
  if (count == 0.0) fail(Errc::kEmptyTrainingSet, "training utterances contain no frames");

  std::vector<double> mean(dim), var(dim), floor(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    mean[d] = sum[d] / count;
    var[d] = std::max(sum_sq[d] / count - mean[d] * mean[d], 0.0);
    floor[d] = std::max(variance_floor_scale * var[d], kMinVariance);
    var[d] = std::max(var[d], floor[d]);
  }

  HmmModel model(label, num_states, num_mixtures, signature);
  model.set_variance_floor(floor);
  for (std::size_t j = 0; j < num_states; ++j) {
    auto& g = model.state(j);
    std::vector<double> weights{1.0};
    std::vector<std::vector<double>> means{mean};
    std::vector<std::vector<double>> vars{var};
    while (weights.size() < num_mixtures) {
      const auto heaviest = static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
      auto up = means[heaviest];
      auto down = means[heaviest];
      for (std::size_t d = 0; d < dim; ++d) {
        const double offset = 0.2 * std::sqrt(vars[heaviest][d]);
        up[d] += offset;
        down[d] -= offset;
      }
      weights[heaviest] *= 0.5;
      means[heaviest] = std::move(down);
      weights.push_back(weights[heaviest]);
      means.push_back(std::move(up));
      vars.push_back(vars[heaviest]);
    }
    g.weights = std::move(weights);
    g.means = std::move(means);
    g.variances = std::move(vars);
  }
  return model;
}

double log_likelihood(const HmmModel& model, const FeatureMatrix& features) {
  check_observation(model, features);
  const Scorer sc(model);
  const auto b = sc.emissions(features);
  std::vector<double> alpha;
  return forward(sc, b, features.num_frames(), alpha);
}

ViterbiResult viterbi(const HmmModel& model, const FeatureMatrix& features) {
  check_observation(model, features);
  const std::size_t frames = features.num_frames();
  const std::size_t n = model.num_states();
  if (frames < n) {
    fail(Errc::kNoLegalPath, std::to_string(frames) + " frames cannot traverse " + std::to_string(n) + " states");
  }
  const Scorer sc(model);
  const auto b = sc.emissions(features);
  std::vector<double> delta(frames * n, kNegInf);
  std::vector<std::size_t> back(frames * n, 0);
  for (std::size_t j = 0; j < n; ++j) delta[j] = sc.entry(j) + b[j];
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      std::size_t arg = j;
      for (std::size_t i = 0; i <= j; ++i) {
        const double v = delta[(t - 1) * n + i] + sc.step(i, j);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      delta[t * n + j] = best == kNegInf ? kNegInf : best + b[t * n + j];
      back[t * n + j] = arg;
    }
  }
  double best = kNegInf;
  std::size_t state = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = delta[(frames - 1) * n + i] + sc.exit(i);
    if (v > best) {
      best = v;
      state = i;
    }
  }
  if (best == kNegInf) fail(Errc::kNoLegalPath, "no legal state path");
  ViterbiResult res;
  res.log_prob = best;
  res.path.assign(frames, 0);
  for (std::size_t t = frames; t-- > 0;) {
    res.path[t] = state;
    if (t > 0) state = back[t * n + state];
  }
  return res;
}

// ---------------------------------------------------------------------------
// Baum-Welch

namespace {

struct Accumulators {
  explicit Accumulators(const HmmModel& m)
      : n(m.num_states()), mix(m.state(0).num_components()), dim(m.dim()) {
    trans.assign((n + 2) * (n + 2), 0.0);
    state_occ.assign(n, 0.0);
    comp_occ.assign(n * mix, 0.0);
    sum.assign(n * mix * dim, 0.0);
    sum_sq.assign(n * mix * dim, 0.0);
  }
  std::size_t n, mix, dim;
  std::vector<double> trans, state_occ, comp_occ, sum, sum_sq;
  double total_ll = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

void accumulate(const Scorer& sc, const FeatureMatrix& f, Accumulators& acc) {
  const std::size_t frames = f.num_frames();
  const std::size_t n = acc.n;
  if (frames < n) {
    ++acc.skipped;
    return;
  }
  const auto b = sc.emissions(f);
  std::vector<double> alpha, beta;
  const double ll = forward(sc, b, frames, alpha);
  if (ll == kNegInf || !std::isfinite(ll)) {
    ++acc.skipped;
    return;
  }
  backward(sc, b, frames, beta);
  acc.total_ll += ll;
  ++acc.used;

  const std::size_t s = n + 2;
  std::vector<double> terms;
  for (std::size_t j = 0; j < n; ++j) acc.trans[0 * s + j + 1] += std::exp(alpha[j] + beta[j] - ll);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto x = f.row(t);
    for (std::size_t j = 0; j < n; ++j) {
      const double lg = alpha[t * n + j] + beta[t * n + j] - ll;
      if (lg == kNegInf) continue;
      const double gamma = std::exp(lg);
      acc.state_occ[j] += gamma;
      const double state_ll = sc.component_terms(j, x, terms);
      for (std::size_t c = 0; c < acc.mix; ++c) {
        const double g = gamma * std::exp(terms[c] - state_ll);
        if (g == 0.0) continue;
        acc.comp_occ[j * acc.mix + c] += g;
        double* sm = &acc.sum[(j * acc.mix + c) * acc.dim];
        double* sq = &acc.sum_sq[(j * acc.mix + c) * acc.dim];
        for (std::size_t d = 0; d < acc.dim; ++d) {
          sm[d] += g * x[d];
          sq[d] += g * x[d] * x[d];
        }
      }
      if (t + 1 < frames) {
        for (std::size_t k = j; k < n; ++k) {
          const double lx = alpha[t * n + j] + sc.step(j, k) + b[(t + 1) * n + k] + beta[(t + 1) * n + k] - ll;
          if (lx != kNegInf) acc.trans[(j + 1) * s + k + 1] += std::exp(lx);
        }
      } else {
        const double lx = alpha[t * n + j] + sc.exit(j) - ll;
        if (lx != kNegInf) acc.trans[(j + 1) * s + n + 1] += std::exp(lx);
      }
    }
  }
}

Accumulators e_step(const HmmModel& model, std::span<const FeatureMatrix> data) {
  const Scorer sc(model);
  Accumulators acc(model);
  for (const auto& f : data) accumulate(sc, f, acc);
  return acc;
}

HmmModel m_step(const HmmModel& model, const Accumulators& acc, double min_occ, std::vector<std::size_t>& frozen) {
  HmmModel out = model;
  const std::size_t n = acc.n;
  const std::size_t s = n + 2;
  const auto& floor = model.variance_floor();
  for (std::size_t j = 0; j < n; ++j) {
    if (acc.state_occ[j] < min_occ) {
      if (std::find(frozen.begin(), frozen.end(), j) == frozen.end()) frozen.push_back(j);
      continue;
    }
    // Row j+1: self, advance (or exit for the last state).
    double row_total = 0.0;
    for (std::size_t k = 0; k < s; ++k) row_total += acc.trans[(j + 1) * s + k];
    if (row_total > 0.0) {
      for (std::size_t k = 0; k < s; ++k) out.set_transition(j + 1, k, acc.trans[(j + 1) * s + k] / row_total);
    }
    auto& g = out.state(j);
    double occ_total = 0.0;
    for (std::size_t c = 0; c < acc.mix; ++c) occ_total += acc.comp_occ[j * acc.mix + c];
    for (std::size_t c = 0; c < acc.mix; ++c) {
      const double occ = acc.comp_occ[j * acc.mix + c];
      g.weights[c] = occ / occ_total;
      if (occ < min_occ) continue;
      const double* sm = &acc.sum[(j * acc.mix + c) * acc.dim];
      const double* sq = &acc.sum_sq[(j * acc.mix + c) * acc.dim];
      for (std::size_t d = 0; d < acc.dim; ++d) {
        const double mean = sm[d] / occ;
        g.means[c][d] = mean;
        g.variances[c][d] = std::max(sq[d] / occ - mean * mean, floor[d]);
      }
    }
  }
  return out;
}

}  // namespace

TrainResult baum_welch(const HmmModel& model, std::span<const FeatureMatrix> data, std::size_t max_iters,
                       double tol, double min_occupancy) {
  if (data.empty()) fail(Errc::kEmptyTrainingSet, "no training utterances for '" + model.label() + "'");
  for (const auto& f : data) {
    if (!(f.signature() == model.signature())) {
      fail(Errc::kSignatureMismatch, "training data does not match model '" + model.label() + "'");
    }
  }
  TrainResult res;
  res.model = model;
  auto acc = e_step(res.model, data);
  if (acc.used == 0) {
    fail(Errc::kEmptyTrainingSet, "no training utterance of '" + model.label() + "' can traverse the model");
  }
  res.skipped_utterances = acc.skipped;
  res.trace.push_back(acc.total_ll);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    HmmModel next = m_step(res.model, acc, min_occupancy, res.degenerate);
    auto next_acc = e_step(next, data);
    res.model = std::move(next);
    res.trace.push_back(next_acc.total_ll);
    acc = std::move(next_acc);
    if (res.trace.back() - res.trace[res.trace.size() - 2] < tol) break;
  }
  std::sort(res.degenerate.begin(), res.degenerate.end());
  return res;
}

TrainResult train_word_model(const std::string& label, std::span<const FeatureMatrix> data,
                             const TrainOptions& options) {
  const auto init = flat_start(data, options.num_states, options.num_mixtures, label, options.variance_floor_scale);
  return baum_welch(init, data, options.max_iters, options.tol, options.min_occupancy);
}

// ---------------------------------------------------------------------------

void WordModelSet::add(HmmModel model) {
  if (!models_.empty() && !(models_.begin()->second.signature() == model.signature())) {
    fail(Errc::kSignatureMismatch, "model '" + model.label() + "' has a different feature signature");
  }
  if (models_.count(model.label())) fail(Errc::kInvalidArgument, "duplicate model label '" + model.label() + "'");
  auto label = model.label();
  models_.emplace(std::move(label), std::move(model));
}

const FeatureSignature& WordModelSet::signature() const {
  if (models_.empty()) fail(Errc::kInvalidArgument, "empty model set");
  return models_.begin()->second.signature();
}

Recognition recognize(const WordModelSet& models, const FeatureMatrix& features) {
  if (models.empty()) fail(Errc::kInvalidArgument, "empty model set");
  Recognition res;
  double best = kNegInf;
  for (const auto& [label, model] : models.models()) {
    const double score = log_likelihood(model, features);
    res.scores.emplace_back(label, score);
    if (res.label.empty() || score > best) {
      best = score;
      res.label = label;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Model files

namespace {
constexpr char kModelMagic[4] = {'D', 'H', 'M', '1'};
}

std::vector<std::uint8_t> encode_model(const HmmModel& model) {
  std::vector<std::uint8_t> out;
  detail::ByteWriter w(out);
  w.bytes(kModelMagic, 4);
  w.u16(kModelFormatVersion);
  w.str(model.label());
  w.u8(static_cast<std::uint8_t>(model.signature().kind));
  w.u32(model.signature().dim);
  w.u64(model.signature().config_hash);
  const std::size_t n = model.num_states();
  const std::size_t mix = n ? model.state(0).num_components() : 0;
  w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(mix));
  for (double v : model.variance_floor()) w.f64(v);
  for (std::size_t i = 0; i < n + 2; ++i) {
    for (std::size_t j = 0; j < n + 2; ++j) w.f64(model.transition(i, j));
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto& g = model.state(j);
    for (std::size_t c = 0; c < mix; ++c) {
      w.f64(g.weights[c]);
      for (double v : g.means[c]) w.f64(v);
      for (double v : g.variances[c]) w.f64(v);
    }
  }
  return out;
}

HmmModel decode_model(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, Errc::kCorruptModel);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0) fail(Errc::kCorruptModel, "bad model file magic");
  const std::uint16_t version = r.u16();
  if (version != kModelFormatVersion) {
    fail(Errc::kVersionMismatch, "model format version " + std::to_string(version) + " is not supported");
  }
  std::string label = r.str();
  FeatureSignature sig;
  const auto kind = feature_kind_from_tag(r.u8());
  if (!kind) fail(Errc::kCorruptModel, "unknown feature kind");
  sig.kind = *kind;
  sig.dim = r.u32();
  sig.config_hash = r.u64();
  const std::uint32_t n = r.u32();
  const std::uint32_t mix = r.u32();
  if (n == 0 || mix == 0 || n > 1024 || mix > 1024 || sig.dim > 65536) fail(Errc::kCorruptModel, "bad model dimensions");
  const std::uint64_t expected =
      8ull * (sig.dim + static_cast<std::uint64_t>(n + 2) * (n + 2) +
              static_cast<std::uint64_t>(n) * mix * (1 + 2ull * sig.dim));
  if (r.remaining() != expected) fail(Errc::kCorruptModel, "model payload size does not match header");
  HmmModel model(std::move(label), n, mix, sig);
  std::vector<double> floor(sig.dim);
  for (auto& v : floor) v = r.f64();
  model.set_variance_floor(std::move(floor));
  for (std::size_t i = 0; i < n + 2; ++i) {
    for (std::size_t j = 0; j < n + 2; ++j) model.set_transition(i, j, r.f64());
  }
  for (std::size_t j = 0; j < n; ++j) {
    auto& g = model.state(j);
    for (std::size_t c = 0; c < mix; ++c) {
      g.weights[c] = r.f64();
      for (auto& v : g.means[c]) v = r.f64();
      for (auto& v : g.variances[c]) v = r.f64();
    }
  }
  return model;
}

void save_model(const HmmModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_model(model);
  detail::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

HmmModel load_model(const std::filesystem::path& path) { return decode_model(detail::read_file(path)); }

WordModelSet load_model_set(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.path().extension() == ".dhm") files.push_back(entry.path());
  }
  if (ec) fail(Errc::kIoFailure, "cannot list model directory " + dir.string());
  std::sort(files.begin(), files.end());
  WordModelSet set;
  for (const auto& f : files) set.add(load_model(f));
  if (set.empty()) fail(Errc::kIoFailure, "no models in " + dir.string());
  return set;
}

void save_model_set(const WordModelSet& models, const std::filesystem::path& dir) {
  for (const auto& [label, model] : models.models()) save_model(model, dir / (label + ".dhm"));
}

}  // namespace digitrec
