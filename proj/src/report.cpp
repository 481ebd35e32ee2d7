#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "atlas/errors.hpp"
#include "atlas/experiments.hpp"
#include "json.hpp"

namespace atlas::experiments {

namespace {

using nlohmann::ordered_json;

constexpr const char* kReportSchema = "atlas-report/1";
constexpr const char* kConfigSchema = "atlas-experiment-config/1";

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["schema"] = kConfigSchema;
  j["tag"] = std::string(to_string(c.tag));
  j["lambda"] = c.lambda;
  j["n"] = c.n;
  j["dt"] = c.dt;
  j["horizon"] = c.horizon;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["times"] = c.times;
  j["bin_lo"] = c.bin_lo;
  j["bin_hi"] = c.bin_hi;
  j["bin_width"] = c.bin_width;
  j["scales"] = c.scales;
  j["scale_replicas"] = c.scale_replicas;
  j["dstar_rmax"] = c.dstar_rmax;
  j["quantiles"] = c.quantiles;
  j["windows"] = c.windows;
  j["spacings"] = c.spacings;
  j["spacing_ranks"] = c.spacing_ranks;
  j["z_grid"] = c.z_grid;
  j["tolerances"] = {
      {"leftmost", c.tol.leftmost},
      {"bin_relative", c.tol.bin_relative},
      {"count_relative", c.tol.count_relative},
      {"quantile", c.tol.quantile},
      {"spacing_relative", c.tol.spacing_relative},
      {"mean_gap_relative", c.tol.mean_gap_relative},
      {"ks_alpha", c.tol.ks_alpha},
      {"binomial_z", c.tol.binomial_z},
  };
  j["localization"] = {
      {"sigma_buffer", c.localization.sigma_buffer},
      {"window", c.localization.window},
      {"hysteresis", c.localization.hysteresis},
  };
  return j;
}

template <class T>
void read_if(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

ExperimentConfig config_from(const ordered_json& j, ExperimentConfig c) {
  if (j.contains("schema") && j.at("schema") != kConfigSchema) {
    throw ConfigurationError("unsupported config schema " + j.at("schema").dump());
  }
  if (j.contains("tag")) c.tag = parse_experiment_tag(j.at("tag").get<std::string>());
  read_if(j, "lambda", c.lambda);
  read_if(j, "n", c.n);
  read_if(j, "dt", c.dt);
  read_if(j, "horizon", c.horizon);
  read_if(j, "replicas", c.replicas);
  read_if(j, "seed", c.seed);
  read_if(j, "times", c.times);
  read_if(j, "bin_lo", c.bin_lo);
  read_if(j, "bin_hi", c.bin_hi);
  read_if(j, "bin_width", c.bin_width);
  read_if(j, "scales", c.scales);
  read_if(j, "scale_replicas", c.scale_replicas);
  read_if(j, "dstar_rmax", c.dstar_rmax);
  read_if(j, "quantiles", c.quantiles);
  read_if(j, "windows", c.windows);
  read_if(j, "spacings", c.spacings);
  read_if(j, "spacing_ranks", c.spacing_ranks);
  read_if(j, "z_grid", c.z_grid);
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    read_if(t, "leftmost", c.tol.leftmost);
    read_if(t, "bin_relative", c.tol.bin_relative);
    read_if(t, "count_relative", c.tol.count_relative);
    read_if(t, "quantile", c.tol.quantile);
    read_if(t, "spacing_relative", c.tol.spacing_relative);
    read_if(t, "mean_gap_relative", c.tol.mean_gap_relative);
    read_if(t, "ks_alpha", c.tol.ks_alpha);
    read_if(t, "binomial_z", c.tol.binomial_z);
  }
  if (j.contains("localization")) {
    const auto& l = j.at("localization");
    read_if(l, "sigma_buffer", c.localization.sigma_buffer);
    read_if(l, "window", c.localization.window);
    read_if(l, "hysteresis", c.localization.hysteresis);
  }
  return c;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  if (text == "markdown" || text == "md") return ReportFormat::kMarkdown;
  throw ConfigurationError("unknown report format '" + std::string(text) + "'");
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base) {
  try {
    return config_from(ordered_json::parse(text), std::move(base));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed experiment config: ") + e.what());
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

std::string current_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit_report(std::ostream& out, const VerificationReport& report, ReportFormat format) {
  const auto& cfg = report.config;
  switch (format) {
    case ReportFormat::kJson: {
      ordered_json j;
      j["schema"] = kReportSchema;
      j["experiment"] = std::string(to_string(cfg.tag));
      j["config_hash"] = config_hash(cfg);
      j["timestamp"] = report.timestamp;
      j["passed"] = report.passed();
      j["config"] = config_json(cfg);
      j["seeds"] = report.seeds;
      auto& recs = j["records"] = ordered_json::array();
      for (const auto& r : report.records) {
        recs.push_back({{"claim_id", r.claim_id},
                        {"anchor", r.anchor},
                        {"statistic", r.statistic},
                        {"value", r.value},
                        {"reference", r.reference},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass},
                        {"required", r.required},
                        {"replicas", r.replicas},
                        {"note", r.note}});
      }
      out << j.dump(2) << '\n';
      break;
    }
    case ReportFormat::kCsv: {
      out << "# schema=" << kReportSchema << '\n';
      out << "# experiment=" << to_string(cfg.tag) << '\n';
      out << "# config_hash=" << config_hash(cfg) << '\n';
      out << "# timestamp=" << report.timestamp << '\n';
      out << "# seeds=" << report.seeds.size() << " base=" << cfg.seed << '\n';
      out << "claim_id,anchor,statistic,value,reference,tolerance,pass,required,replicas,note\n";
      for (const auto& r : report.records) {
        out << csv_quote(r.claim_id) << ',' << csv_quote(r.anchor) << ',' << csv_quote(r.statistic) << ','
            << num(r.value) << ',' << num(r.reference) << ',' << num(r.tolerance) << ',' << (r.pass ? 1 : 0) << ','
            << (r.required ? 1 : 0) << ',' << r.replicas << ',' << csv_quote(r.note) << '\n';
      }
      break;
    }
    case ReportFormat::kMarkdown: {
      out << "# " << to_string(cfg.tag) << " (" << (report.passed() ? "PASS" : "FAIL") << ")\n\n";
      out << "- config hash: `" << config_hash(cfg) << "`\n";
      out << "- timestamp: " << report.timestamp << '\n';
      out << "- lambda=" << num(cfg.lambda) << ", n=" << cfg.n << ", dt=" << num(cfg.dt) << ", horizon=" << num(cfg.horizon)
          << ", replicas=" << cfg.replicas << ", seed=" << cfg.seed << "\n\n";
      out << "| claim | statistic | value | reference | tolerance | result |\n";
      out << "|---|---|---|---|---|---|\n";
      for (const auto& r : report.records) {
        out << "| " << r.claim_id << " | " << r.statistic << " | " << num(r.value) << " | " << num(r.reference) << " | "
            << num(r.tolerance) << " | " << (r.required ? (r.pass ? "pass" : "FAIL") : "info") << " |\n";
      }
      break;
    }
  }
  if (!out) throw std::ios_base::failure("failed to write report");
}

VerificationReport report_from_json(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    if (j.at("schema") != kReportSchema) throw ConfigurationError("unsupported report schema");
    VerificationReport r;
    r.config = config_from(j.at("config"), {});
    r.timestamp = j.value("timestamp", "");
    j.at("seeds").get_to(r.seeds);
    for (const auto& e : j.at("records")) {
      ClaimRecord c;
      e.at("claim_id").get_to(c.claim_id);
      e.at("anchor").get_to(c.anchor);
      e.at("statistic").get_to(c.statistic);
      e.at("value").get_to(c.value);
      e.at("reference").get_to(c.reference);
      e.at("tolerance").get_to(c.tolerance);
      e.at("pass").get_to(c.pass);
      e.at("required").get_to(c.required);
      e.at("replicas").get_to(c.replicas);
      e.at("note").get_to(c.note);
      r.records.push_back(std::move(c));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace atlas::experiments
