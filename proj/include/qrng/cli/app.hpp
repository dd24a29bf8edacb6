// Copyright 2026 The qrng-bs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command implementations behind the `qrng` executable. Each command takes
// a RunConfig, validates it completely before touching the filesystem, and
// returns a JSON report plus an exit status:
//   0 success, 1 statistical or validation failure, 2 I/O or integrity error.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qrng/cli/bitfile.hpp"
#include "qrng/extract.hpp"
#include "qrng/protocols.hpp"
#include "qrng/qcore.hpp"
#include "qrng/runner.hpp"
#include "qrng/selftest.hpp"
#include "qrng/statkit.hpp"

namespace qrng::cli {

using nlohmann::json;

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitIo = 2 };

/// Raw command-line parameters. Angles are in degrees.
struct RunConfig {
  std::string protocol = "single-conjugate";
  std::optional<std::size_t> dim;
  std::optional<std::string> spin;
  std::string prep_basis = "computational";
  std::size_t prep_index = 0;
  std::string meas_basis = "fourier";
  double theta_a_deg = 0.0;
  double theta_b_deg = 90.0;
  std::string adapt;  // "0:90,1:90"
  double detector_bias = 0.0;
  std::size_t preferred_outcome = 1;
  double no_click_prob = 0.0;
  std::optional<std::uint64_t> events;
  std::optional<std::uint64_t> seed;
  std::uint64_t block_size = kDefaultBlockSize;
  unsigned workers = 1;
  std::string keep;       // "0,1"
  std::string partition;  // "0,1|2,3"
  std::string out;
  std::string format = "raw";
  std::string report;
  double significance = stat::kDefaultSignificance;
  // sweep
  std::string theta_grid;  // degrees, "0,45,90"
  std::string bias_grid;   // epsilon values, "0,0.05"
  std::string table_format = "csv";
  // chsh
  double alpha_deg = 0.0;
  double alpha_prime_deg = 90.0;
  double beta_deg = 45.0;
  double beta_prime_deg = 135.0;
};

struct CommandResult {
  int exit_code = kExitOk;
  json report;
  std::string table;  // sweep output in the requested tabular format
};

// ---------------------------------------------------------------------------
// Parsing helpers

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

inline double parse_number(const std::string& field, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(field, "'" + text + "' is not a finite number");
  }
}

inline std::vector<double> parse_number_list(const std::string& field, const std::string& text) {
  if (text.empty()) throw ValidationError(field, "grid must not be empty");
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number(field, item));
  return out;
}

inline std::pair<std::uint32_t, std::uint32_t> parse_keep(const std::string& text, std::size_t dim) {
  const auto items = split(text, ',');
  if (items.size() != 2) throw ValidationError("keep", "expects two symbols 'a,b'");
  std::pair<std::uint32_t, std::uint32_t> keep;
  for (int k = 0; k < 2; ++k) {
    const double v = parse_number("keep", items[static_cast<std::size_t>(k)]);
    if (v < 0 || v != std::floor(v) || v >= static_cast<double>(dim))
      throw ValidationError("keep", "symbol '" + items[static_cast<std::size_t>(k)] + "' outside alphabet [0," +
                                        std::to_string(dim) + ")");
    (k == 0 ? keep.first : keep.second) = static_cast<std::uint32_t>(v);
  }
  if (keep.first == keep.second) throw ValidationError("keep", "kept symbols must be distinct");
  return keep;
}

/// "a:deg,a:deg,..." covering every outcome of the given dimension; returns
/// degrees indexed by outcome.
inline std::vector<double> parse_adapt_degrees(const std::string& text, std::size_t dim) {
  if (text.empty()) throw ValidationError("adapt", "epr-adaptive requires --adapt 'outcome:degrees,...'");
  std::vector<std::optional<double>> angles(dim);
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("adapt", "entry '" + item + "' must be 'outcome:degrees'");
    const double idx = parse_number("adapt", item.substr(0, colon));
    if (idx < 0 || idx != std::floor(idx) || idx >= static_cast<double>(dim))
      throw ValidationError("adapt", "outcome '" + item.substr(0, colon) + "' out of range");
    angles[static_cast<std::size_t>(idx)] = parse_number("adapt", item.substr(colon + 1));
  }
  std::vector<double> out;
  for (std::size_t a = 0; a < dim; ++a) {
    if (!angles[a]) throw ValidationError("adapt", "no angle given for outcome " + std::to_string(a));
    out.push_back(*angles[a]);
  }
  return out;
}

inline AdaptationMap parse_adapt(const std::string& text, std::size_t dim) {
  AdaptationMap map;
  for (double deg : parse_adapt_degrees(text, dim)) map.angles.push_back(degrees_to_radians(deg));
  return map;
}

// ---------------------------------------------------------------------------
// Extraction (n-ary to binary)

struct Extraction {
  enum class Method { kDirect, kEliminate, kIdentify };
  Method method = Method::kDirect;
  std::pair<std::uint32_t, std::uint32_t> keep{0, 1};
  Equipartition partition;

  /// symbol -> 0, 1, or -1 when the symbol is eliminated.
  std::vector<int> table(std::size_t n) const {
    std::vector<int> t(n, -1);
    switch (method) {
      case Method::kDirect:
        t[0] = 0;
        t[1] = 1;
        break;
      case Method::kEliminate:
        t[keep.first] = 0;
        t[keep.second] = 1;
        break;
      case Method::kIdentify: {
        const auto bits = partition.table(n);
        for (std::size_t s = 0; s < n; ++s) t[s] = bits[s];
        break;
      }
    }
    return t;
  }

  BitStream apply(const SymbolStream& s) const {
    switch (method) {
      case Method::kDirect: return to_bits(s);
      case Method::kEliminate: return eliminate(s, keep);
      default: return identify(s, partition);
    }
  }

  json to_json() const {
    switch (method) {
      case Method::kDirect: return {{"method", "direct"}};
      case Method::kEliminate: return {{"method", "eliminate"}, {"keep", {keep.first, keep.second}}};
      default: return {{"method", "identify"}, {"classZero", partition.class_zero}, {"classOne", partition.class_one}};
    }
  }
};

inline Extraction resolve_extraction(const RunConfig& rc, std::size_t dim) {
  if (!rc.keep.empty() && !rc.partition.empty())
    throw ValidationError("keep", "--keep and --partition are mutually exclusive");
  Extraction ex;
  if (!rc.keep.empty()) {
    ex.method = Extraction::Method::kEliminate;
    ex.keep = parse_keep(rc.keep, dim);
  } else if (!rc.partition.empty()) {
    ex.method = Extraction::Method::kIdentify;
    try {
      ex.partition = Equipartition::parse(rc.partition);
      ex.partition.table(dim);
    } catch (const std::invalid_argument& e) {
      throw ValidationError("partition", e.what());
    }
  } else if (dim > 2) {
    ex.method = Extraction::Method::kEliminate;  // default: keep (0,1)
  }
  return ex;
}

// ---------------------------------------------------------------------------
// Shared validation

struct Common {
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
};

inline Common resolve_common(const RunConfig& rc) {
  if (!rc.seed) throw ValidationError("seed", "a master seed is required (--seed S)");
  if (!rc.events) throw ValidationError("events", "the event count is required (--events N)");
  if (*rc.events < 1) throw ValidationError("events", "N must be >= 1");
  if (rc.block_size < 1) throw ValidationError("block-size", "must be >= 1");
  if (rc.workers < 1) throw ValidationError("workers", "must be >= 1");
  if (!(rc.significance > 0.0 && rc.significance < 1.0)) throw ValidationError("significance", "must lie in (0,1)");
  return {*rc.events, *rc.seed};
}

inline SpinLabel resolve_spin(const RunConfig& rc) {
  std::optional<SpinLabel> spin;
  try {
    if (rc.spin) spin = SpinLabel::parse(*rc.spin);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("spin", e.what());
  }
  if (rc.dim) {
    if (*rc.dim < 2 || *rc.dim > 4) throw ValidationError("dim", "EPR protocols support dim 2, 3 or 4");
    const SpinLabel from_dim = SpinLabel::from_dim(*rc.dim);
    if (spin && !(*spin == from_dim)) throw ValidationError("dim", "conflicts with --spin " + spin->to_string());
    spin = from_dim;
  }
  return spin.value_or(SpinLabel::half());
}

inline DetectorModel resolve_detector(const RunConfig& rc, std::size_t dim) {
  if (!(rc.detector_bias >= 0.0 && rc.detector_bias <= 1.0))
    throw ValidationError("detector-bias", "must lie in [0,1]");
  if (!(rc.no_click_prob >= 0.0 && rc.no_click_prob < 1.0))
    throw ValidationError("no-click-prob", "must lie in [0,1)");
  if (rc.preferred_outcome >= dim)
    throw ValidationError("preferred-outcome", "must be < " + std::to_string(dim));
  return {rc.detector_bias, rc.preferred_outcome, rc.no_click_prob};
}

inline json detector_json(const DetectorModel& d) {
  return {{"stickProb", d.stick_prob}, {"preferredOutcome", d.preferred_outcome}, {"noClickProb", d.no_click_prob}};
}

inline json disclaimers() {
  return json::array({"Simulated source: outcomes are drawn by Born-rule Monte Carlo from a pseudo-random generator; "
                      "the output is reproducible from the embedded seed and is not a physical entropy source.",
                      "Spacelike separation of the two measurement events is a physical assumption and is not "
                      "modelled.",
                      "The statistical battery checks distributional properties of a finite sample only."});
}

inline json suite_json(const stat::SuiteResult& s) {
  json reports = json::array();
  for (const auto& r : s.reports) {
    json j = {{"test", r.name},
              {"statistic", r.statistic},
              {"pValue", r.p_value ? json(*r.p_value) : json(nullptr)},
              {"pass", r.pass},
              {"status", stat::to_string(r.status)},
              {"params", r.params}};
    if (!r.note.empty()) j["note"] = r.note;
    reports.push_back(std::move(j));
  }
  return {{"overall", s.overall}, {"inputDigest", "sha256:" + s.input_digest}, {"reports", std::move(reports)}};
}

// ---------------------------------------------------------------------------
// generate

struct GeneratePlan {
  ProtocolConfig proto;
  Extraction extraction;
  PayloadFormat format = PayloadFormat::kRaw;
  unsigned workers = 1;
  double significance = stat::kDefaultSignificance;
  std::string out;
  std::string report;
  // Angles as given, so the embedded config reproduces them exactly.
  double theta_a_deg = 0.0;
  double theta_b_deg = 0.0;
  std::vector<double> adapt_deg;
};

inline GeneratePlan resolve_generate(const RunConfig& rc) {
  const Common common = resolve_common(rc);
  GeneratePlan plan;
  auto& p = plan.proto;
  try {
    p.kind = parse_protocol(rc.protocol);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("protocol", e.what());
  }
  p.events = common.events;
  p.seed = common.seed;
  p.block_size = rc.block_size;
  if (p.kind == ProtocolKind::kSingleConjugate) {
    if (rc.spin) throw ValidationError("spin", "single-conjugate takes --dim, not --spin");
    p.dim = rc.dim.value_or(3);
    if (p.dim < 2 || p.dim > 64) throw ValidationError("dim", "must lie in [2, 64]");
    try {
      p.prep_basis = parse_basis_choice(rc.prep_basis);
      p.meas_basis = parse_basis_choice(rc.meas_basis);
    } catch (const std::invalid_argument& e) {
      throw ValidationError("basis", e.what());
    }
    if (rc.prep_index >= p.dim) throw ValidationError("prep-index", "must be < dim");
    p.prep_index = rc.prep_index;
  } else {
    p.spin = resolve_spin(rc);
    p.theta_a = degrees_to_radians(rc.theta_a_deg);
    p.theta_b = degrees_to_radians(rc.theta_b_deg);
    if (!std::isfinite(p.theta_a)) throw ValidationError("theta-a", "must be finite");
    if (!std::isfinite(p.theta_b)) throw ValidationError("theta-b", "must be finite");
    plan.theta_a_deg = rc.theta_a_deg;
    plan.theta_b_deg = rc.theta_b_deg;
    if (p.kind == ProtocolKind::kEprAdaptive) {
      plan.adapt_deg = parse_adapt_degrees(rc.adapt, p.spin.dim());
      for (double deg : plan.adapt_deg) p.adapt.angles.push_back(degrees_to_radians(deg));
    }
  }
  const std::size_t d = p.outcome_dim();
  p.det_a = resolve_detector(rc, d);
  p.det_b = p.det_a;
  plan.extraction = resolve_extraction(rc, d);
  plan.format = parse_payload_format(rc.format);
  plan.workers = rc.workers;
  plan.significance = rc.significance;
  plan.out = rc.out;
  plan.report = rc.report;
  return plan;
}

/// Resolved configuration with every default made explicit. Workers and
/// output paths are omitted: they do not affect the stream.
inline json config_json(const GeneratePlan& plan) {
  const auto& p = plan.proto;
  json j = {{"protocol", to_string(p.kind)},
            {"events", p.events},
            {"seed", p.seed},
            {"blockSize", p.block_size},
            {"detectorA", detector_json(p.det_a)},
            {"extraction", plan.extraction.to_json()},
            {"significance", plan.significance}};
  if (p.kind == ProtocolKind::kSingleConjugate) {
    j["dim"] = p.dim;
    j["prepBasis"] = to_string(p.prep_basis);
    j["prepIndex"] = p.prep_index;
    j["measBasis"] = to_string(p.meas_basis);
  } else {
    j["spin"] = p.spin.to_string();
    j["dim"] = p.spin.dim();
    j["thetaADeg"] = plan.theta_a_deg;
    j["detectorB"] = detector_json(p.det_b);
    if (p.kind == ProtocolKind::kEprXor) {
      j["thetaBDeg"] = plan.theta_b_deg;
    } else {
      json adapt = json::object();
      for (std::size_t a = 0; a < plan.adapt_deg.size(); ++a) adapt[std::to_string(a)] = plan.adapt_deg[a];
      j["adaptDeg"] = adapt;
    }
  }
  return j;
}

/// Inverse of config_json: rebuilds the generate parameters embedded in a
/// sidecar or report so the stream can be regenerated.
inline RunConfig run_config_from_json(const json& cfg) {
  try {
    RunConfig rc;
    rc.protocol = cfg.at("protocol").get<std::string>();
    rc.events = cfg.at("events").get<std::uint64_t>();
    rc.seed = cfg.at("seed").get<std::uint64_t>();
    rc.block_size = cfg.at("blockSize").get<std::uint64_t>();
    rc.significance = cfg.value("significance", stat::kDefaultSignificance);
    const json& det = cfg.at("detectorA");
    rc.detector_bias = det.at("stickProb").get<double>();
    rc.preferred_outcome = det.at("preferredOutcome").get<std::size_t>();
    rc.no_click_prob = det.at("noClickProb").get<double>();
    const json& ex = cfg.at("extraction");
    const auto method = ex.at("method").get<std::string>();
    if (method == "eliminate") {
      rc.keep = std::to_string(ex.at("keep").at(0).get<int>()) + "," + std::to_string(ex.at("keep").at(1).get<int>());
    } else if (method == "identify") {
      auto join = [](const json& list) {
        std::string out;
        for (const auto& v : list) out += (out.empty() ? "" : ",") + std::to_string(v.get<int>());
        return out;
      };
      rc.partition = join(ex.at("classZero")) + "|" + join(ex.at("classOne"));
    }
    if (rc.protocol == "single-conjugate") {
      rc.dim = cfg.at("dim").get<std::size_t>();
      rc.prep_basis = cfg.at("prepBasis").get<std::string>();
      rc.prep_index = cfg.at("prepIndex").get<std::size_t>();
      rc.meas_basis = cfg.at("measBasis").get<std::string>();
    } else {
      rc.spin = cfg.at("spin").get<std::string>();
      rc.theta_a_deg = cfg.at("thetaADeg").get<double>();
      if (rc.protocol == "epr-xor") {
        rc.theta_b_deg = cfg.at("thetaBDeg").get<double>();
      } else {
        std::string adapt;
        for (const auto& [k, v] : cfg.at("adaptDeg").items()) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
          adapt += (adapt.empty() ? "" : ",") + k + ":" + buf;
        }
        rc.adapt = adapt;
      }
    }
    return rc;
  } catch (const json::exception& e) {
    throw FormatError(std::string("embedded config is incomplete: ") + e.what());
  }
}

/// Reads the "config" member of a sidecar or report file.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(doc.contains("config") ? doc["config"] : doc);
}

inline json provenance_json(const ProtocolConfig& p) {
  json criteria = json::array();
  json warnings = json::array();
  const std::size_t d = p.outcome_dim();
  if (d >= 3) criteria.push_back("multi-outcome measurement (d >= 3)");
  if (p.kind == ProtocolKind::kSingleConjugate) {
    if (p.prep_basis != p.meas_basis)
      criteria.push_back("pure-state preparation measured in a conjugate basis");
    else
      warnings.push_back("preparation and measurement bases coincide: outcomes are deterministic");
  } else {
    criteria.push_back("singlet-pair XOR combination for bias elimination");
    if (p.kind == ProtocolKind::kEprAdaptive) criteria.push_back("delayed-choice adaptive measurement");
  }
  return {{"criteria", criteria}, {"warnings", warnings}, {"disclaimers", disclaimers()}};
}

struct GeneratedStream {
  BitStream bits;
  std::uint64_t trials = 0;
  std::uint64_t coincidences = 0;
  std::optional<std::pair<double, double>> correlation;  // spin-1/2 EPR: (E, standard error)
};

/// Runs the protocol and the configured extraction.
inline GeneratedStream produce_stream(const GeneratePlan& plan) {
  const auto& p = plan.proto;
  const auto trials = generate_trials(p, plan.workers);
  GeneratedStream out;
  out.trials = trials.size();
  const std::size_t d = p.outcome_dim();
  if (p.kind == ProtocolKind::kSingleConjugate) {
    const SymbolStream symbols = side_a_symbols(trials, d);
    out.coincidences = symbols.size();
    out.bits = plan.extraction.apply(symbols);
    return out;
  }
  // Each side is mapped through the same symbol table; a trial contributes
  // only when both sides survive.
  const auto table = plan.extraction.table(d);
  std::vector<std::uint8_t> a_bits, b_bits;
  std::int64_t corr = 0;
  for (const auto& t : trials) {
    if (t.discarded()) continue;
    ++out.coincidences;
    corr += (*t.a == *t.b) ? 1 : -1;
    const int ta = table[*t.a];
    const int tb = table[*t.b];
    if (ta < 0 || tb < 0) continue;
    a_bits.push_back(static_cast<std::uint8_t>(ta));
    b_bits.push_back(static_cast<std::uint8_t>(tb));
  }
  out.bits = xor_combine(BitStream(std::move(a_bits)), BitStream(std::move(b_bits)));
  if (d == 2 && out.coincidences > 0) {
    const double e = static_cast<double>(corr) / static_cast<double>(out.coincidences);
    out.correlation = {e, std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(out.coincidences))};
  }
  return out;
}

inline CommandResult cmd_generate(const RunConfig& rc) {
  const GeneratePlan plan = resolve_generate(rc);
  const GeneratedStream gen = produce_stream(plan);
  const json config = config_json(plan);

  CommandResult result;
  json& rep = result.report;
  rep["tool"] = "qrng";
  rep["version"] = kVersion;
  rep["command"] = "generate";
  rep["config"] = config;
  rep["provenance"] = provenance_json(plan.proto);

  const auto packed = pack_bits(gen.bits);
  rep["output"] = {{"bitLength", gen.bits.size()}, {"digest", stream_digest(packed)}, {"format", to_string(plan.format)}};
  if (!plan.out.empty()) rep["output"]["path"] = plan.out;

  json derived = {{"trials", gen.trials}, {"coincidences", gen.coincidences}, {"outputBits", gen.bits.size()}};
  if (!gen.bits.empty())
    derived["bias"] = {{"value", stat::bias_estimate(gen.bits)}, {"stdError", stat::bias_std_error(gen.bits.size())}};
  if (gen.correlation)
    derived["correlation"] = {{"value", gen.correlation->first}, {"stdError", gen.correlation->second}};
  rep["derived"] = derived;

  if (gen.bits.empty()) {
    rep["suite"] = nullptr;
    rep["error"] = "extraction produced no output bits";
    result.exit_code = kExitFailure;
  } else {
    const auto suite = stat::run_suite(gen.bits, stat::SuiteConfig::full(plan.significance));
    rep["suite"] = suite_json(suite);
    result.exit_code = suite.overall ? kExitOk : kExitFailure;
  }

  if (!plan.out.empty()) write_bitstream(plan.out, gen.bits, plan.format, config);
  if (!plan.report.empty()) write_file(plan.report, rep.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
  std::string path;
  double significance = stat::kDefaultSignificance;
  bool raw = false;  // no sidecar: the whole file is the stream
  std::string format = "raw";
  std::string report;
};

inline CommandResult cmd_analyze(const AnalyzeOptions& opt) {
  if (!(opt.significance > 0.0 && opt.significance < 1.0)) throw ValidationError("significance", "must lie in (0,1)");
  if (opt.path.empty()) throw ValidationError("path", "an input file is required");
  CommandResult result;
  json& rep = result.report;
  rep["tool"] = "qrng";
  rep["version"] = kVersion;
  rep["command"] = "analyze";

  BitStream bits;
  std::string digest;
  if (opt.raw) {
    const auto bytes = read_payload(opt.path, parse_payload_format(opt.format));
    bits = unpack_bits(bytes, 8 * bytes.size());
    digest = stream_digest(bytes);
    rep["input"] = {{"path", opt.path}, {"bitLength", bits.size()}, {"digest", digest}, {"sidecar", false}};
  } else {
    StoredStream stored = read_bitstream(opt.path);
    bits = std::move(stored.bits);
    digest = stored.digest;
    rep["input"] = {{"path", opt.path}, {"bitLength", bits.size()}, {"digest", digest}, {"sidecar", true},
                    {"digestMatch", true}};
    if (stored.sidecar.contains("config")) rep["config"] = stored.sidecar["config"];
  }
  rep["config"]["significance"] = opt.significance;
  rep["provenance"] = {{"disclaimers", disclaimers()}};

  if (bits.empty()) {
    rep["suite"] = nullptr;
    rep["error"] = "empty stream";
    result.exit_code = kExitFailure;
  } else {
    const auto suite = stat::run_suite(bits, stat::SuiteConfig::full(opt.significance));
    rep["suite"] = suite_json(suite);
    rep["derived"] = {{"bias", {{"value", stat::bias_estimate(bits)}, {"stdError", stat::bias_std_error(bits.size())}}},
                      {"entropyRate", stat::entropy_rate(bits)}};
    result.exit_code = suite.overall ? kExitOk : kExitFailure;
  }
  if (!opt.report.empty()) write_file(opt.report, rep.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepCell {
  double delta_theta_deg = 0.0;
  double epsilon = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t coincidences = 0;
  double xor_bias = 0.0;
  double std_error = 0.0;
  double expected_bias = 0.0;
};

/// Stick channel that biases a fair bit by epsilon: beta = 2|epsilon|,
/// preferring 1 for positive epsilon and 0 otherwise.
inline DetectorModel detector_for_bias(double epsilon, double no_click_prob) {
  return {2.0 * std::abs(epsilon), epsilon >= 0.0 ? std::size_t{1} : std::size_t{0}, no_click_prob};
}

/// Exact XOR bias for a spin-1/2 joint distribution passed through two
/// stick channels.
inline double exact_xor_bias(const OutcomeDistribution& joint, const DetectorModel& da, const DetectorModel& db) {
  auto channel = [](const DetectorModel& d, std::size_t reported, std::size_t truth) {
    return (1.0 - d.stick_prob) * (reported == truth) + d.stick_prob * (reported == d.preferred_outcome);
  };
  double p1 = 0.0;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t ra = 0; ra < 2; ++ra)
        for (std::size_t rb = 0; rb < 2; ++rb)
          if (ra != rb) p1 += joint[2 * a + b] * channel(da, ra, a) * channel(db, rb, b);
  return p1 - 0.5;
}

inline std::string format_double(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline CommandResult cmd_sweep(const RunConfig& rc) {
  const Common common = resolve_common(rc);
  const auto thetas = parse_number_list("theta-grid", rc.theta_grid);
  const auto epsilons = parse_number_list("bias-grid", rc.bias_grid);
  for (double e : epsilons)
    if (std::abs(e) > 0.5) throw ValidationError("bias-grid", "epsilon must lie in [-0.5, 0.5]");
  if (rc.table_format != "csv" && rc.table_format != "json")
    throw ValidationError("table-format", "must be 'csv' or 'json'");
  const SpinLabel spin = resolve_spin(rc);
  if (!(spin == SpinLabel::half())) throw ValidationError("spin", "sweep supports spin 1/2 only");
  if (!(rc.no_click_prob >= 0.0 && rc.no_click_prob < 1.0))
    throw ValidationError("no-click-prob", "must lie in [0,1)");

  const RandomSource master(common.seed);
  std::vector<SweepCell> cells;
  std::uint64_t cell_index = 0;
  for (double dt : thetas)
    for (double eps : epsilons) {
      ProtocolConfig p;
      p.kind = ProtocolKind::kEprXor;
      p.spin = spin;
      p.theta_a = 0.0;
      p.theta_b = degrees_to_radians(dt);
      p.det_a = p.det_b = detector_for_bias(eps, rc.no_click_prob);
      p.events = common.events;
      p.block_size = rc.block_size;
      const auto trials = generate_trials(p, master.substream(cell_index++), rc.workers);
      SweepCell c{dt, eps, trials.size(), 0, 0.0, 0.0, 0.0};
      std::uint64_t ones = 0;
      for (const auto& t : trials) {
        if (t.discarded()) continue;
        ++c.coincidences;
        ones += (*t.a != *t.b);
      }
      if (c.coincidences > 0) {
        c.xor_bias = static_cast<double>(ones) / static_cast<double>(c.coincidences) - 0.5;
        c.std_error = stat::bias_std_error(c.coincidences);
      }
      const EprSampler sampler(spin, p.theta_a, p.theta_b, p.det_a, p.det_b);
      c.expected_bias = exact_xor_bias(sampler.joint_distribution(), p.det_a, p.det_b);
      cells.push_back(c);
    }

  CommandResult result;
  json rows = json::array();
  std::string csv = "delta_theta_deg,epsilon,trials,coincidences,xor_bias,std_error,expected_bias\n";
  for (const auto& c : cells) {
    rows.push_back({{"deltaThetaDeg", c.delta_theta_deg},
                    {"epsilon", c.epsilon},
                    {"trials", c.trials},
                    {"coincidences", c.coincidences},
                    {"xorBias", c.xor_bias},
                    {"stdError", c.std_error},
                    {"expectedBias", c.expected_bias}});
    csv += format_double(c.delta_theta_deg, 4) + "," + format_double(c.epsilon, 4) + "," + std::to_string(c.trials) +
           "," + std::to_string(c.coincidences) + "," + format_double(c.xor_bias) + "," + format_double(c.std_error) +
           "," + format_double(c.expected_bias) + "\n";
  }
  result.report = {{"tool", "qrng"},
                   {"version", kVersion},
                   {"command", "sweep"},
                   {"config",
                    {{"spin", spin.to_string()},
                     {"thetaGridDeg", thetas},
                     {"biasGrid", epsilons},
                     {"thetaADeg", 0.0},
                     {"noClickProb", rc.no_click_prob},
                     {"events", common.events},
                     {"seed", common.seed},
                     {"blockSize", rc.block_size},
                     {"detectorModel", "stick channel, stickProb = 2|epsilon|, preferred = epsilon >= 0 ? 1 : 0"}}},
                   {"provenance", {{"criteria", {"singlet-pair XOR combination for bias elimination"}},
                                   {"disclaimers", disclaimers()}}},
                   {"rows", rows}};
  result.table = rc.table_format == "csv" ? csv : result.report.dump(2) + "\n";
  if (!rc.out.empty()) write_file(rc.out, result.table);
  if (!rc.report.empty()) write_file(rc.report, result.report.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// chsh

/// The classical bound is flagged as exceeded when |S| - 3 SE > 2.
inline constexpr double kChshFlagSigmas = 3.0;

inline CommandResult cmd_chsh(const RunConfig& rc) {
  const Common common = resolve_common(rc);
  for (auto [name, v] : {std::pair{"alpha", rc.alpha_deg}, std::pair{"alpha-prime", rc.alpha_prime_deg},
                         std::pair{"beta", rc.beta_deg}, std::pair{"beta-prime", rc.beta_prime_deg}})
    if (!std::isfinite(v)) throw ValidationError(name, "must be finite");
  const std::array<std::pair<double, double>, 4> settings{{{rc.alpha_deg, rc.beta_deg},
                                                           {rc.alpha_deg, rc.beta_prime_deg},
                                                           {rc.alpha_prime_deg, rc.beta_deg},
                                                           {rc.alpha_prime_deg, rc.beta_prime_deg}}};
  const RandomSource master(common.seed);
  std::array<double, 4> e{};
  json corr = json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    e[k] = correlation_blocked(degrees_to_radians(settings[k].first), degrees_to_radians(settings[k].second),
                               common.events, master.substream(k), rc.block_size, rc.workers);
    corr.push_back({{"alphaDeg", settings[k].first},
                    {"betaDeg", settings[k].second},
                    {"E", e[k]},
                    {"stdError", std::sqrt(std::max(0.0, 1.0 - e[k] * e[k]) / static_cast<double>(common.events))}});
  }
  const double s = e[0] - e[1] + e[2] + e[3];
  const double se = chsh_std_error(e, common.events);
  const double lo = std::abs(s) - kChshFlagSigmas * se;
  const bool exceeds = lo > kClassicalChshBound;

  CommandResult result;
  result.report = {
      {"tool", "qrng"},
      {"version", kVersion},
      {"command", "chsh"},
      {"config",
       {{"spin", "1/2"},
        {"alphaDeg", rc.alpha_deg},
        {"alphaPrimeDeg", rc.alpha_prime_deg},
        {"betaDeg", rc.beta_deg},
        {"betaPrimeDeg", rc.beta_prime_deg},
        {"eventsPerSetting", common.events},
        {"seed", common.seed},
        {"blockSize", rc.block_size}}},
      {"provenance",
       {{"criteria", {"Bell-CHSH violation as certificate of value indefiniteness"}}, {"disclaimers", disclaimers()}}},
      {"derived",
       {{"S", s},
        {"stdError", se},
        {"absSInterval", {lo, std::abs(s) + kChshFlagSigmas * se}},
        {"intervalSigmas", kChshFlagSigmas},
        {"correlations", corr},
        {"classicalBound", kClassicalChshBound},
        {"quantumBound", kQuantumChshBound},
        {"exceedsClassicalBound", exceeds},
        {"annotation", exceeds ? "exceeds classical bound" : "consistent with classical bound"}}}};
  if (!rc.report.empty()) write_file(rc.report, result.report.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// selftest

inline CommandResult cmd_selftest() {
  CommandResult result;
  json checks = json::array();
  bool ok = true;
  for (const auto& c : run_selftest()) {
    ok = ok && c.pass;
    json j = {{"check", c.name}, {"pass", c.pass}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    checks.push_back(std::move(j));
  }
  result.report = {{"tool", "qrng"}, {"version", kVersion}, {"command", "selftest"}, {"pass", ok}, {"checks", checks}};
  result.exit_code = ok ? kExitOk : kExitFailure;
  return result;
}

}  // namespace qrng::cli
