#include "digitrec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "digitrec/error.hpp"
#include "io_util.hpp"
#include "parallel.hpp"

namespace digitrec {

// ---------------------------------------------------------------------------
// ConfigDocument

namespace {

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

std::string unquote(std::string_view raw, const std::string& where) {
  const auto v = detail::trim(raw);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        out.push_back(v[++i]);
      } else {
        out.push_back(v[i]);
      }
    }
    return out;
  }
  if (!v.empty() && v.front() == '"') fail(Errc::kConfig, where + "unterminated string");
  return std::string(v);
}

std::vector<std::string> split_list(std::string_view body, const std::string& where) {
  std::vector<std::string> items;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '"' && (i == 0 || body[i - 1] != '\\')) quoted = !quoted;
    if (c == ',' && !quoted) {
      items.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) fail(Errc::kConfig, where + "unterminated string in list");
  items.push_back(current);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto t = detail::trim(items[i]);
    if (t.empty()) {
      if (i + 1 == items.size()) continue;  // trailing comma
      fail(Errc::kConfig, where + "empty list element");
    }
    out.push_back(unquote(t, where));
  }
  return out;
}

}  // namespace

ConfigDocument ConfigDocument::parse(std::string_view text, const std::string& origin) {
  ConfigDocument doc;
  doc.origin_ = origin;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto line = strip_comment(raw);
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(Errc::kConfig, where + "malformed section header");
      section = std::string(detail::trim(t.substr(1, t.size() - 2)));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) fail(Errc::kConfig, where + "expected key = value");
    const auto key_part = detail::trim(t.substr(0, eq));
    const auto value_part = detail::trim(t.substr(eq + 1));
    if (key_part.empty()) fail(Errc::kConfig, where + "empty key");
    const std::string key = section.empty() ? std::string(key_part) : section + "." + std::string(key_part);
    Value v;
    if (!value_part.empty() && value_part.front() == '[') {
      if (value_part.back() != ']') fail(Errc::kConfig, where + "list must close on the same line");
      v.is_list = true;
      v.items = split_list(value_part.substr(1, value_part.size() - 2), where);
    } else {
      v.items.push_back(unquote(value_part, where));
    }
    doc.values_[key] = std::move(v);
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  return parse(detail::read_text(path), path.string());
}

const ConfigDocument::Value* ConfigDocument::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_[key] = true;
  return &it->second;
}

std::string ConfigDocument::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (v->is_list) fail(Errc::kConfig, origin_ + ": '" + key + "' must be a scalar");
  return v->items.front();
}

double ConfigDocument::get_double(const std::string& key, double fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  const auto s = get_string(key, "");
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') fail(Errc::kConfig, origin_ + ": '" + key + "' is not a number: " + s);
  return d;
}

long long ConfigDocument::get_int(const std::string& key, long long fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  const auto s = get_string(key, "");
  char* end = nullptr;
  const long long n = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') fail(Errc::kConfig, origin_ + ": '" + key + "' is not an integer: " + s);
  return n;
}

bool ConfigDocument::get_bool(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  const auto s = get_string(key, "");
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(Errc::kConfig, origin_ + ": '" + key + "' is not a boolean: " + s);
}

std::vector<std::string> ConfigDocument::get_list(const std::string& key,
                                                  const std::vector<std::string>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  return v->items;
}

std::vector<std::string> ConfigDocument::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

FrameConfig frame_config_from(const ConfigDocument& doc) {
  FrameConfig f;
  f.frame_length_ms = doc.get_double("frame.length_ms", f.frame_length_ms);
  f.frame_shift_ms = doc.get_double("frame.shift_ms", f.frame_shift_ms);
  f.pre_emphasis = doc.get_double("frame.pre_emphasis", f.pre_emphasis);
  const auto window = doc.get_string("frame.window", "hamming");
  if (window == "hamming") f.window = WindowKind::kHamming;
  else if (window == "rectangular") f.window = WindowKind::kRectangular;
  else fail(Errc::kConfig, "frame.window must be hamming or rectangular");
  return f;
}

FeatureConfig feature_config_from(const ConfigDocument& doc, FeatureKind kind) {
  FeatureConfig c;
  c.kind = kind;
  c.num_filters = static_cast<int>(doc.get_int("feature.num_filters", c.num_filters));
  c.num_ceps = static_cast<int>(doc.get_int("feature.num_ceps", c.num_ceps));
  c.lpc_order = static_cast<int>(doc.get_int("feature.lpc_order", c.lpc_order));
  c.include_deltas = static_cast<int>(doc.get_int("feature.include_deltas", c.include_deltas));
  c.delta_window = static_cast<int>(doc.get_int("feature.delta_window", c.delta_window));
  c.energy_floor = doc.get_double("feature.energy_floor", c.energy_floor);
  c.use_energy = doc.get_bool("feature.use_energy", c.use_energy);
  try {
    c.validate();
  } catch (const Error& e) {
    fail(Errc::kConfig, e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// GridConfig

namespace {

constexpr double kDefaultFanSnr = 20.0;
constexpr double kDefaultRandomSnr = 10.0;

NoiseCondition make_condition(NoiseKind kind, double fan_snr, double random_snr) {
  NoiseCondition c;
  c.kind = kind;
  if (kind == NoiseKind::kFan) c.snr_db = fan_snr;
  if (kind == NoiseKind::kRandom) c.snr_db = random_snr;
  return c;
}

}  // namespace

GridConfig GridConfig::defaults() {
  GridConfig g;
  for (NoiseKind k : {NoiseKind::kClean, NoiseKind::kFan, NoiseKind::kRandom}) {
    g.conditions.push_back(make_condition(k, kDefaultFanSnr, kDefaultRandomSnr));
  }
  for (FeatureKind k : all_feature_kinds()) {
    FeatureConfig c;
    c.kind = k;
    g.features.push_back(c);
  }
  g.threads = default_thread_count();
  return g;
}

GridConfig GridConfig::from_document(const ConfigDocument& doc, const std::filesystem::path& base) {
  auto resolve = [&](std::filesystem::path p) {
    if (!p.empty() && p.is_relative() && !base.empty()) p = base / p;
    return p;
  };
  GridConfig g = defaults();
  g.seed = static_cast<std::uint64_t>(doc.get_int("seed", static_cast<long long>(g.seed)));
  if (doc.has("threads")) {
    const auto t = doc.get_int("threads", 0);
    if (t > 0) g.threads = static_cast<unsigned>(t);
  }
  g.out_dir = doc.get_string("out", g.out_dir.string());

  const auto corpus = doc.get_string("corpus", "synthetic");
  if (corpus != "synthetic") g.manifest = resolve(corpus);
  g.synth.train_per_digit = static_cast<std::size_t>(doc.get_int("train_per_digit", 20));
  g.synth.test_per_digit = static_cast<std::size_t>(doc.get_int("test_per_digit", 10));
  g.synth.speakers = static_cast<std::size_t>(doc.get_int("speakers", 4));

  std::vector<EncodingProfile> catalog = builtin_profiles();
  if (doc.has("profile_catalog")) catalog = read_profile_catalog(resolve(doc.get_string("profile_catalog", "")));
  std::vector<std::string> default_labels;
  for (const auto& p : grid_profiles()) default_labels.push_back(p.label);
  g.profiles.clear();
  for (const auto& label : doc.get_list("profiles", default_labels)) g.profiles.push_back(find_profile(catalog, label));
  g.synth.base_profile = find_profile(catalog, doc.get_string("master_profile", "pcm24-48k"));

  const double fan_snr = doc.get_double("fan_snr_db", kDefaultFanSnr);
  const double random_snr = doc.get_double("random_snr_db", kDefaultRandomSnr);
  const auto fan_wav = resolve(doc.get_string("fan_noise_wav", ""));
  const auto random_wav = resolve(doc.get_string("random_noise_wav", ""));
  g.conditions.clear();
  for (const auto& name : doc.get_list("conditions", {"clean", "fan", "random"})) {
    const auto kind = parse_noise_kind(name);
    if (!kind) fail(Errc::kConfig, "unknown condition '" + name + "'");
    auto c = make_condition(*kind, fan_snr, random_snr);
    if (*kind == NoiseKind::kFan) c.noise_wav = fan_wav;
    if (*kind == NoiseKind::kRandom) c.noise_wav = random_wav;
    g.conditions.push_back(c);
  }

  g.frame = frame_config_from(doc);
  g.features.clear();
  for (const auto& name : doc.get_list("features", {"mfcc", "lpc", "plp", "fbank", "melspec"})) {
    const auto kind = parse_feature_kind(name);
    if (!kind) fail(Errc::kConfig, "unknown feature '" + name + "'");
    g.features.push_back(feature_config_from(doc, *kind));
  }

  g.hmm.num_states = static_cast<std::size_t>(doc.get_int("hmm.num_states", 5));
  g.hmm.num_mixtures = static_cast<std::size_t>(doc.get_int("hmm.num_mixtures", 1));
  g.hmm.max_iters = static_cast<std::size_t>(doc.get_int("hmm.max_iters", 20));
  g.hmm.tol = doc.get_double("hmm.tol", g.hmm.tol);
  g.hmm.variance_floor_scale = doc.get_double("hmm.variance_floor_scale", g.hmm.variance_floor_scale);
  g.hmm.min_occupancy = doc.get_double("hmm.min_occupancy", g.hmm.min_occupancy);

  const auto train_cond = parse_noise_kind(doc.get_string("train_condition", "clean"));
  if (!train_cond) fail(Errc::kConfig, "unknown train_condition");
  g.train_condition = *train_cond;
  g.table_profile = doc.get_string("table_profile", g.table_profile);
  g.verdict_threshold = doc.get_double("verdict_threshold", g.verdict_threshold);

  if (const auto unused = doc.unused_keys(); !unused.empty()) {
    fail(Errc::kConfig, "unknown config key '" + unused.front() + "'");
  }
  g.validate();
  return g;
}

GridConfig GridConfig::load(const std::filesystem::path& path) {
  return from_document(ConfigDocument::load(path), path.parent_path());
}

void GridConfig::validate() const {
  if (profiles.empty()) fail(Errc::kConfig, "no profiles configured");
  if (conditions.empty()) fail(Errc::kConfig, "no conditions configured");
  if (features.empty()) fail(Errc::kConfig, "no feature kinds configured");
  if (hmm.num_states == 0 || hmm.num_mixtures == 0) fail(Errc::kConfig, "HMM needs states and mixtures");
  for (const auto& p : profiles) check_bit_depth(p.bit_depth);
  for (const auto& f : features) f.validate();
  if (manifest.empty() && (synth.train_per_digit == 0 || synth.test_per_digit == 0)) {
    fail(Errc::kConfig, "synthetic corpus needs train and test tokens");
  }
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("DIGITREC_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Grid runner

const GridCell* GridReport::find(const std::string& condition, const std::string& profile, FeatureKind feature) const {
  for (const auto& c : cells) {
    if (c.condition == condition && c.profile == profile && c.feature == feature) return &c;
  }
  return nullptr;
}

std::vector<FeatureKind> rank_features(const GridReport& report) {
  struct Score {
    FeatureKind kind;
    double percentage;
    double accuracy;
  };
  std::vector<Score> scores;
  for (FeatureKind k : report.features) {
    double pct = 0.0, acc = 0.0;
    std::size_t n = 0;
    for (const auto& c : report.cells) {
      if (c.feature != k || c.failed) continue;
      pct += c.report.percentage;
      acc += c.report.accuracy_pct;
      ++n;
    }
    scores.push_back({k, n ? pct / n : -1.0, n ? acc / n : -1.0});
  }
  std::stable_sort(scores.begin(), scores.end(), [](const Score& a, const Score& b) {
    if (a.percentage != b.percentage) return a.percentage > b.percentage;
    return a.accuracy > b.accuracy;
  });
  std::vector<FeatureKind> out;
  for (const auto& s : scores) out.push_back(s.kind);
  return out;
}

namespace {

const NoiseCondition& condition_for(const GridConfig& cfg, NoiseKind kind, NoiseCondition& storage) {
  for (const auto& c : cfg.conditions) {
    if (c.kind == kind) return c;
  }
  storage = make_condition(kind, kDefaultFanSnr, kDefaultRandomSnr);
  return storage;
}

std::vector<std::string> ordered_labels(const std::vector<CorpusItem>& items) {
  std::set<std::string> seen;
  for (const auto& it : items) seen.insert(it.entry.label);
  std::vector<std::string> out;
  for (const auto& d : digit_vocabulary()) {
    if (seen.erase(d)) out.push_back(d);
  }
  out.insert(out.end(), seen.begin(), seen.end());
  return out;
}

// "<Status>: <message>" for library errors, the bare message otherwise.
std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(errc_name(err->code())) + ": " + e.what();
  return e.what();
}

}  // namespace

GridReport run_grid(const GridConfig& cfg) {
  cfg.validate();
  const unsigned threads = std::max(1u, cfg.threads);

  std::vector<CorpusItem> master;
  if (cfg.manifest.empty()) {
    auto spec = cfg.synth;
    spec.seed = cfg.seed;
    master = synthesize_corpus(spec);
  } else {
    const auto m = read_manifest(cfg.manifest);
    master.resize(m.entries.size());
    detail::parallel_for(m.entries.size(), threads, [&](std::size_t i) {
      master[i] = CorpusItem{m.entries[i], read_wav(m.resolve(m.entries[i]))};
    });
  }
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < master.size(); ++i) {
    (master[i].entry.split == Split::kTrain ? train_idx : test_idx).push_back(i);
  }
  if (train_idx.empty() || test_idx.empty()) fail(Errc::kEmptyTrainingSet, "corpus needs both train and test items");
  const auto labels = ordered_labels(master);

  // Recorded noise, loaded once per condition kind.
  std::map<NoiseKind, AudioBuffer> recorded_noise;
  for (const auto& c : cfg.conditions) {
    if (!c.noise_wav.empty()) recorded_noise[c.kind] = read_wav(c.noise_wav);
  }
  auto noise_for = [&](NoiseKind k) -> const AudioBuffer* {
    const auto it = recorded_noise.find(k);
    return it == recorded_noise.end() ? nullptr : &it->second;
  };

  GridReport report;
  for (const auto& c : cfg.conditions) report.conditions.push_back(noise_kind_name(c.kind));
  for (const auto& p : cfg.profiles) report.profiles.push_back(p.label);
  for (const auto& f : cfg.features) report.features.push_back(f.kind);
  report.table_profile = cfg.table_profile;
  if (std::find(report.profiles.begin(), report.profiles.end(), report.table_profile) == report.profiles.end()) {
    report.table_profile = report.profiles.back();
  }

  const std::size_t nc = cfg.conditions.size(), np = cfg.profiles.size(), nf = cfg.features.size();
  report.cells.resize(nc * np * nf);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t p = 0; p < np; ++p) {
      for (std::size_t f = 0; f < nf; ++f) {
        auto& cell = report.cells[(c * np + p) * nf + f];
        cell.condition = report.conditions[c];
        cell.profile = report.profiles[p];
        cell.feature = cfg.features[f].kind;
      }
    }
  }

  NoiseCondition train_storage;
  const NoiseCondition& train_cond = condition_for(cfg, cfg.train_condition, train_storage);
  auto degrade = [&](const CorpusItem& item, const EncodingProfile& profile, const NoiseCondition& cond) {
    const auto seed = utterance_seed(cfg.seed, std::string(noise_kind_name(cond.kind)) + "/" + item.entry.path);
    return degrade_audio(item.audio, profile, cond, seed, noise_for(cond.kind));
  };

  for (std::size_t p = 0; p < np; ++p) {
    const auto& profile = cfg.profiles[p];

    // Training audio and features.
    std::vector<AudioBuffer> train_audio(train_idx.size());
    detail::parallel_for(train_idx.size(), threads, [&](std::size_t i) {
      train_audio[i] = degrade(master[train_idx[i]], profile, train_cond);
    });
    std::vector<std::vector<FeatureMatrix>> train_feats(nf, std::vector<FeatureMatrix>(train_idx.size()));
    std::vector<std::string> feature_error(nf);
    std::vector<std::vector<std::string>> item_error(nf, std::vector<std::string>(train_idx.size()));
    detail::parallel_for(nf * train_idx.size(), threads, [&](std::size_t job) {
      const std::size_t f = job / train_idx.size(), i = job % train_idx.size();
      try {
        train_feats[f][i] = extract(train_audio[i], cfg.frame, cfg.features[f]);
      } catch (const std::exception& e) {
        item_error[f][i] = describe(e);
      }
    });
    train_audio.clear();
    for (std::size_t f = 0; f < nf; ++f) {
      for (const auto& err : item_error[f]) {
        if (!err.empty()) {
          feature_error[f] = "feature extraction failed: " + err;
          break;
        }
      }
    }

    // One model per (feature, label).
    const std::size_t nl = labels.size();
    std::vector<std::optional<HmmModel>> models(nf * nl);
    std::vector<std::string> model_error(nf * nl);
    detail::parallel_for(nf * nl, threads, [&](std::size_t job) {
      const std::size_t f = job / nl, l = job % nl;
      if (!feature_error[f].empty()) return;
      std::vector<FeatureMatrix> data;
      for (std::size_t i = 0; i < train_idx.size(); ++i) {
        if (master[train_idx[i]].entry.label == labels[l]) data.push_back(train_feats[f][i]);
      }
      try {
        models[job] = train_word_model(labels[l], data, cfg.hmm).model;
      } catch (const std::exception& e) {
        model_error[job] = "training '" + labels[l] + "' failed: " + describe(e);
      }
    });
    train_feats.clear();
    std::vector<WordModelSet> model_sets(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      if (!feature_error[f].empty()) continue;
      for (std::size_t l = 0; l < nl; ++l) {
        if (!model_error[f * nl + l].empty()) {
          feature_error[f] = model_error[f * nl + l];
          break;
        }
        model_sets[f].add(*models[f * nl + l]);
      }
    }
    models.clear();

    // Evaluation per condition.
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& cond = cfg.conditions[c];
      std::vector<AudioBuffer> test_audio(test_idx.size());
      detail::parallel_for(test_idx.size(), threads, [&](std::size_t i) {
        test_audio[i] = degrade(master[test_idx[i]], profile, cond);
      });
      std::vector<Trial> trials(nf * test_idx.size());
      std::vector<std::string> trial_error(nf * test_idx.size());
      detail::parallel_for(nf * test_idx.size(), threads, [&](std::size_t job) {
        const std::size_t f = job / test_idx.size(), i = job % test_idx.size();
        if (!feature_error[f].empty()) return;
        try {
          const auto feats = extract(test_audio[i], cfg.frame, cfg.features[f]);
          trials[job] = Trial{master[test_idx[i]].entry.label, recognize(model_sets[f], feats).label};
        } catch (const std::exception& e) {
          trial_error[job] = describe(e);
        }
      });
      for (std::size_t f = 0; f < nf; ++f) {
        auto& cell = report.cells[(c * np + p) * nf + f];
        if (!feature_error[f].empty()) {
          cell.failed = true;
          cell.error = feature_error[f];
          continue;
        }
        const auto begin = trials.begin() + static_cast<std::ptrdiff_t>(f * test_idx.size());
        for (std::size_t i = 0; i < test_idx.size(); ++i) {
          if (!trial_error[f * test_idx.size() + i].empty()) {
            cell.failed = true;
            cell.error = "recognition failed: " + trial_error[f * test_idx.size() + i];
            break;
          }
        }
        if (cell.failed) continue;
        try {
          cell.report = tabulate(std::span<const Trial>(&*begin, test_idx.size()), cfg.verdict_threshold);
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = describe(e);
        }
      }
    }
  }
  report.ranking = rank_features(report);
  return report;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string format_pct(double pct) {
  char buf[32];
  if (std::abs(pct - std::round(pct)) < 1e-9) {
    std::snprintf(buf, sizeof buf, "%.0f%%", pct);
  } else {
    std::snprintf(buf, sizeof buf, "%.1f%%", pct);
  }
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::vector<std::string> table_digits(const GridReport& report, const std::string& condition) {
  std::vector<std::string> digits = digit_vocabulary();
  std::set<std::string> extra;
  for (const auto& c : report.cells) {
    if (c.condition != condition || c.profile != report.table_profile || c.failed) continue;
    for (const auto& [label, r] : c.report.per_digit) {
      if (std::find(digits.begin(), digits.end(), label) == digits.end()) extra.insert(label);
    }
  }
  digits.insert(digits.end(), extra.begin(), extra.end());
  return digits;
}

std::string rtrim(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

std::string render_condition_table(const GridReport& report, const std::string& condition) {
  constexpr std::size_t kWidth = 12;
  std::ostringstream os;
  EncodingProfile profile;
  try {
    profile = find_profile(report.table_profile);
  } catch (const Error&) {
    profile.label = report.table_profile;
  }
  os << "# Condition: " << condition << "; profile " << profile.label;
  if (profile.sample_rate > 0 && !profile.description.empty()) {
    os << " (" << profile.bit_depth << " bit " << profile.sample_rate << " Hz Mono PCM)";
  }
  os << "\n";
  std::string header = pad("Digit", kWidth);
  for (FeatureKind k : report.features) header += pad(feature_kind_display(k), kWidth);
  os << rtrim(header) << "\n";
  for (const auto& digit : table_digits(report, condition)) {
    std::string line = pad(display_label(digit), kWidth);
    for (FeatureKind k : report.features) {
      const auto* cell = report.find(condition, report.table_profile, k);
      std::string v = "-";
      if (cell && cell->failed) {
        v = "Failed";
      } else if (cell) {
        if (const auto* r = cell->report.find(digit)) v = r->verdict_correct ? "Correct" : "In-Correct";
      }
      line += pad(v, kWidth);
    }
    os << rtrim(line) << "\n";
  }
  std::string line = pad("Percentage", kWidth);
  for (FeatureKind k : report.features) {
    const auto* cell = report.find(condition, report.table_profile, k);
    line += pad(cell && !cell->failed ? format_pct(cell->report.percentage) : "Failed", kWidth);
  }
  os << rtrim(line) << "\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_reports(const GridReport& report, const std::filesystem::path& out_dir) {
  if (report.cells.empty()) fail(Errc::kEmptyReport, "grid report has no cells");
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& body) {
    const auto path = out_dir / name;
    detail::write_file_atomic(path, body);
    written.push_back(path);
  };

  for (const auto& cond : report.conditions) put("table_" + cond + ".txt", render_condition_table(report, cond));

  std::ostringstream csv;
  csv << "condition,profile,feature,digit,trials,correct,rate,verdict\n";
  for (const auto& c : report.cells) {
    if (c.failed) {
      csv << c.condition << ',' << c.profile << ',' << feature_kind_name(c.feature) << ",,0,0,,Failed\n";
      continue;
    }
    for (const auto& [digit, r] : c.report.per_digit) {
      csv << c.condition << ',' << c.profile << ',' << feature_kind_name(c.feature) << ',' << digit << ','
          << r.trials << ',' << r.correct << ',' << fixed(r.rate(), 4) << ','
          << (r.verdict_correct ? "Correct" : "In-Correct") << '\n';
    }
  }
  put("results.csv", csv.str());

  for (const auto& cond : report.conditions) {
    std::ostringstream plot;
    plot << "feature";
    for (const auto& p : report.profiles) plot << ',' << p;
    plot << '\n';
    for (FeatureKind k : report.features) {
      plot << feature_kind_name(k);
      for (const auto& p : report.profiles) {
        const auto* cell = report.find(cond, p, k);
        plot << ',';
        if (cell && !cell->failed) plot << fixed(cell->report.accuracy_pct, 2);
      }
      plot << '\n';
    }
    put("plot_" + cond + ".csv", plot.str());
  }

  std::ostringstream summary;
  std::size_t failed = 0;
  for (const auto& c : report.cells) failed += c.failed ? 1 : 0;
  summary << "cells " << report.cells.size() << " failed " << failed << "\n";
  summary << "condition,profile,feature,status,accuracy_pct,percentage,wer,error\n";
  for (const auto& c : report.cells) {
    summary << c.condition << ',' << c.profile << ',' << feature_kind_name(c.feature) << ',';
    if (c.failed) {
      std::string err = c.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      summary << "Failed,,,," << err << '\n';
    } else {
      summary << "ok," << fixed(c.report.accuracy_pct, 2) << ',' << fixed(c.report.percentage, 1) << ','
              << fixed(c.report.wer, 4) << ",\n";
    }
  }
  summary << "ranking ";
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    summary << (i ? " > " : "") << feature_kind_display(report.ranking[i]);
  }
  summary << '\n';
  put("summary.txt", summary.str());
  return written;
}

// ---------------------------------------------------------------------------
// File-based workflow

std::filesystem::path feature_path(const std::filesystem::path& features_dir, const ManifestEntry& entry) {
  auto rel = std::filesystem::path(entry.path);
  rel.replace_extension(".dfe");
  return features_dir / rel;
}

std::size_t extract_corpus(const Manifest& manifest, const FrameConfig& frame, const FeatureConfig& feature,
                           const std::filesystem::path& out_dir, unsigned threads) {
  feature.validate();
  detail::parallel_for(manifest.entries.size(), threads, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    const auto audio = read_wav(manifest.resolve(e));
    write_features(extract(audio, frame, feature), feature_path(out_dir, e));
  });
  return manifest.entries.size();
}

WordModelSet train_models(const std::filesystem::path& features_dir, const Manifest& manifest,
                          const TrainOptions& options, const std::filesystem::path& out_dir, unsigned threads) {
  std::map<std::string, std::vector<const ManifestEntry*>> by_label;
  for (const auto& e : manifest.entries) {
    if (e.split == Split::kTrain) by_label[e.label].push_back(&e);
  }
  if (by_label.empty()) fail(Errc::kEmptyTrainingSet, "manifest has no training entries");
  std::vector<std::string> labels;
  for (const auto& [l, v] : by_label) labels.push_back(l);
  std::vector<HmmModel> models(labels.size());
  detail::parallel_for(labels.size(), threads, [&](std::size_t i) {
    std::vector<FeatureMatrix> data;
    for (const auto* e : by_label[labels[i]]) data.push_back(read_features(feature_path(features_dir, *e)));
    models[i] = train_word_model(labels[i], data, options).model;
  });
  WordModelSet set;
  for (auto& m : models) set.add(std::move(m));
  save_model_set(set, out_dir);
  return set;
}

std::string report_csv(const EvalReport& report, FeatureKind feature) {
  std::ostringstream os;
  os << "digit,feature,verdict,trials,correct,rate\n";
  for (const auto& [digit, r] : report.per_digit) {
    os << digit << ',' << feature_kind_name(feature) << ',' << (r.verdict_correct ? "Correct" : "In-Correct") << ','
       << r.trials << ',' << r.correct << ',' << fixed(r.rate(), 4) << '\n';
  }
  return os.str();
}

RecognitionRun recognize_corpus(const std::filesystem::path& models_dir, const std::filesystem::path& features_dir,
                                const Manifest& manifest, const std::filesystem::path& report_path,
                                double verdict_threshold, unsigned threads) {
  const auto models = load_model_set(models_dir);
  const auto kind = models.signature().kind;
  std::vector<const ManifestEntry*> tests;
  for (const auto& e : manifest.entries) {
    if (e.split == Split::kTest) tests.push_back(&e);
  }
  RecognitionRun run;
  run.trials.resize(tests.size());
  detail::parallel_for(tests.size(), threads, [&](std::size_t i) {
    const auto feats = read_features(feature_path(features_dir, *tests[i]), kind);
    run.trials[i] = Trial{tests[i]->label, recognize(models, feats).label};
  });
  run.report = tabulate(run.trials, verdict_threshold);

  detail::write_file_atomic(report_path, report_csv(run.report, kind));

  std::ostringstream table;
  table << "Digit       " << feature_kind_display(kind) << "\n";
  for (const auto& [digit, r] : run.report.per_digit) {
    table << pad(display_label(digit), 12) << (r.verdict_correct ? "Correct" : "In-Correct") << "\n";
  }
  table << pad("Percentage", 12) << format_pct(run.report.percentage) << "\n";
  table << "# accuracy " << fixed(run.report.accuracy_pct, 2) << "% WER " << fixed(run.report.wer, 4) << " (S="
        << run.report.edits.substitutions << " D=" << run.report.edits.deletions << " I=" << run.report.edits.insertions
        << " N=" << run.report.reference_words << ")\n";
  auto txt = report_path;
  txt += ".txt";
  detail::write_file_atomic(txt, table.str());

  std::ostringstream tsv;
  for (const auto& t : run.trials) tsv << t.truth << '\t' << t.predicted << '\n';
  auto results = report_path;
  results += ".results.tsv";
  detail::write_file_atomic(results, tsv.str());
  return run;
}

namespace {

void add_pair(ScoreSummary& s, const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  const auto e = align(ref, hyp);
  s.edits.substitutions += e.substitutions;
  s.edits.deletions += e.deletions;
  s.edits.insertions += e.insertions;
  s.reference_words += ref.size();
  ++s.sentences;
}

void finish(ScoreSummary& s) {
  s.wer = word_error_rate(s.edits.substitutions, s.edits.deletions, s.edits.insertions, s.reference_words);
}

}  // namespace

ScoreSummary score_results_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::kIoFailure, "cannot open " + path.string());
  ScoreSummary s;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail(Errc::kConfig, path.string() + ": expected reference<TAB>hypothesis");
    add_pair(s, detail::split_words(std::string_view(line).substr(0, tab)),
             detail::split_words(std::string_view(line).substr(tab + 1)));
  }
  finish(s);
  return s;
}

ScoreSummary score_files(const std::filesystem::path& ref, const std::filesystem::path& hyp) {
  std::ifstream rin(ref), hin(hyp);
  if (!rin) fail(Errc::kIoFailure, "cannot open " + ref.string());
  if (!hin) fail(Errc::kIoFailure, "cannot open " + hyp.string());
  ScoreSummary s;
  std::string r, h;
  while (true) {
    const bool got_r = static_cast<bool>(std::getline(rin, r));
    const bool got_h = static_cast<bool>(std::getline(hin, h));
    if (!got_r && !got_h) break;
    if (!got_r) r.clear();
    if (!got_h) h.clear();
    add_pair(s, detail::split_words(r), detail::split_words(h));
  }
  finish(s);
  return s;
}

}  // namespace digitrec
