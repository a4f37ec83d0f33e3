#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "randbat/battery.hpp"
#include "randbat/sources.hpp"
#include "randbat/version.hpp"

namespace randbat {

using nlohmann::json;

inline void to_json(json& j, const Verdict& v) { j = to_string(v); }
inline void from_json(const json& j, Verdict& v) {
  v = j.get<std::string>() == "SNR" ? Verdict::SNR : Verdict::SR;
}

inline void to_json(json& j, const LevelResult& r) { j = to_string(r); }
inline void from_json(const json& j, LevelResult& r) {
  const std::string s = j.get<std::string>();
  if (s == "pass") r = LevelResult::Pass;
  else if (s == "fail") r = LevelResult::Fail;
  else r = LevelResult::NotApplicable;
}

inline void to_json(json& j, const CellColor& c) { j = std::string(1, color_letter(c)); }
inline void from_json(const json& j, CellColor& c) {
  switch (j.get<std::string>().at(0)) {
    case 'R': c = CellColor::Red; break;
    case 'Y': c = CellColor::Yellow; break;
    case 'B': c = CellColor::Blue; break;
    default: c = CellColor::Green; break;
  }
}

inline void to_json(json& j, const DftVariant& v) { j = to_string(v); }
inline void from_json(const json& j, DftVariant& v) {
  v = j.get<std::string>() == "original" ? DftVariant::Original : DftVariant::Corrected;
}

inline void to_json(json& j, const NistParams& p) {
  j = json{{"test_id", p.test_id},
           {"block_len", p.block_len},
           {"template_len", p.template_len},
           {"serial_len", p.serial_len},
           {"dft_variant", p.dft_variant}};
}
inline void from_json(const json& j, NistParams& p) {
  j.at("test_id").get_to(p.test_id);
  j.at("block_len").get_to(p.block_len);
  j.at("template_len").get_to(p.template_len);
  j.at("serial_len").get_to(p.serial_len);
  j.at("dft_variant").get_to(p.dft_variant);
}

inline void to_json(json& j, const TestOutcome& o) {
  j = json{{"test_id", o.test_id},
           {"name", nist_test_name(o.test_id)},
           {"pvalues", o.pvalues},
           {"strict_pvalue", o.strict_pvalue},
           {"verdict", o.verdict},
           {"params", o.params_used},
           {"applicable", o.applicable},
           {"reason", o.reason}};
}
inline void from_json(const json& j, TestOutcome& o) {
  j.at("test_id").get_to(o.test_id);
  j.at("pvalues").get_to(o.pvalues);
  j.at("strict_pvalue").get_to(o.strict_pvalue);
  j.at("verdict").get_to(o.verdict);
  j.at("params").get_to(o.params_used);
  j.at("applicable").get_to(o.applicable);
  j.at("reason").get_to(o.reason);
}

inline void to_json(json& j, const LhsRhsOutcome::PerI& p) {
  j = json{{"i", p.i}, {"lhs", p.lhs}, {"rhs", p.rhs}};
}
inline void from_json(const json& j, LhsRhsOutcome::PerI& p) {
  j.at("i").get_to(p.i);
  j.at("lhs").get_to(p.lhs);
  j.at("rhs").get_to(p.rhs);
}

inline void to_json(json& j, const LhsRhsOutcome& o) {
  j = json{{"test_id", o.test_id},
           {"name", nist_test_name(o.test_id)},
           {"per_i", o.per_i},
           {"verdict", o.verdict},
           {"i_max", o.i_max},
           {"violations", o.violations}};
}
inline void from_json(const json& j, LhsRhsOutcome& o) {
  j.at("test_id").get_to(o.test_id);
  j.at("per_i").get_to(o.per_i);
  j.at("verdict").get_to(o.verdict);
  j.at("i_max").get_to(o.i_max);
  j.at("violations").get_to(o.violations);
}

inline void to_json(json& j, const TbtOutcome& o) {
  j = json{{"m", o.m},
           {"required_len", o.required_len},
           {"unique_counts", o.unique_counts},
           {"mean_unique", o.mean_unique},
           {"critical_value", o.critical_value},
           {"verdict", o.verdict}};
}
inline void from_json(const json& j, TbtOutcome& o) {
  j.at("m").get_to(o.m);
  j.at("required_len").get_to(o.required_len);
  j.at("unique_counts").get_to(o.unique_counts);
  j.at("mean_unique").get_to(o.mean_unique);
  j.at("critical_value").get_to(o.critical_value);
  j.at("verdict").get_to(o.verdict);
}

inline void to_json(json& j, const CellVerdict& c) {
  j = json{{"test_id", c.test_id},
           {"trial_level", c.trial_level},
           {"combined_level", c.combined_level},
           {"color", c.color}};
}
inline void from_json(const json& j, CellVerdict& c) {
  j.at("test_id").get_to(c.test_id);
  j.at("trial_level").get_to(c.trial_level);
  j.at("combined_level").get_to(c.combined_level);
  j.at("color").get_to(c.color);
}

inline void to_json(json& j, const TrialStats& s) {
  j = json{{"values", s.values}, {"median", s.median}, {"q1", s.q1},
           {"q3", s.q3},         {"min", s.min},       {"max", s.max}};
}
inline void from_json(const json& j, TrialStats& s) {
  j.at("values").get_to(s.values);
  j.at("median").get_to(s.median);
  j.at("q1").get_to(s.q1);
  j.at("q3").get_to(s.q3);
  j.at("min").get_to(s.min);
  j.at("max").get_to(s.max);
}

inline void to_json(json& j, const BatteryOptions& o) {
  j = json{{"tests", o.effective_tests()},
           {"decision_point", o.decision_point},
           {"max_combined_failures", o.max_combined_failures},
           {"strict_subset_only", o.strict_subset_only},
           {"i_max_override", o.i_max_override},
           {"dft_variant", o.dft_variant},
           {"tbt_m", o.tbt_m}};
}
inline void from_json(const json& j, BatteryOptions& o) {
  std::vector<int> tests = j.at("tests").get<std::vector<int>>();
  o.tests = std::set<int>(tests.begin(), tests.end());
  j.at("decision_point").get_to(o.decision_point);
  j.at("max_combined_failures").get_to(o.max_combined_failures);
  j.at("strict_subset_only").get_to(o.strict_subset_only);
  j.at("i_max_override").get_to(o.i_max_override);
  j.at("dft_variant").get_to(o.dft_variant);
  j.at("tbt_m").get_to(o.tbt_m);
}

inline void to_json(json& j, const BatteryReport& r) {
  json stats = json::object();
  for (const auto& [test_id, s] : r.trial_stats) stats[std::to_string(test_id)] = s;
  j = json{{"format", "randbat-report-v1"},
           {"tool_version", kVersion},
           {"source_label", r.source_label},
           {"qrng_label", r.qrng_label},
           {"trial_count", r.trial_count},
           {"trial_length", r.trial_length},
           {"combined_length", r.combined_length},
           {"options", r.options},
           {"cells", r.cells},
           {"overall", r.overall},
           {"trial_stats", stats},
           {"combined_nist", r.combined_nist},
           {"trial_borel", r.trial_borel},
           {"trial_bayesian", r.trial_bayesian},
           {"trial_tbt", r.trial_tbt}};
  if (r.combined_borel) j["combined_borel"] = *r.combined_borel;
  if (r.combined_bayesian) j["combined_bayesian"] = *r.combined_bayesian;
  if (r.combined_tbt) j["combined_tbt"] = *r.combined_tbt;
}

inline void from_json(const json& j, BatteryReport& r) {
  j.at("source_label").get_to(r.source_label);
  j.at("qrng_label").get_to(r.qrng_label);
  j.at("trial_count").get_to(r.trial_count);
  j.at("trial_length").get_to(r.trial_length);
  j.at("combined_length").get_to(r.combined_length);
  j.at("options").get_to(r.options);
  j.at("cells").get_to(r.cells);
  j.at("overall").get_to(r.overall);
  for (const auto& [key, value] : j.at("trial_stats").items())
    r.trial_stats[std::stoi(key)] = value.get<TrialStats>();
  j.at("combined_nist").get_to(r.combined_nist);
  j.at("trial_borel").get_to(r.trial_borel);
  j.at("trial_bayesian").get_to(r.trial_bayesian);
  j.at("trial_tbt").get_to(r.trial_tbt);
  if (j.contains("combined_borel")) r.combined_borel = j.at("combined_borel").get<LhsRhsOutcome>();
  if (j.contains("combined_bayesian"))
    r.combined_bayesian = j.at("combined_bayesian").get<LhsRhsOutcome>();
  if (j.contains("combined_tbt")) r.combined_tbt = j.at("combined_tbt").get<TbtOutcome>();
}

inline void to_json(json& j, const ReportDiff& d) {
  json cells = json::array();
  for (const auto& c : d.cells)
    cells.push_back(json{{"test_id", c.test_id},
                         {"a", std::string(1, color_letter(c.a))},
                         {"b", std::string(1, color_letter(c.b))}});
  json medians = json::array();
  for (const auto& m : d.medians)
    medians.push_back(json{{"test_id", m.test_id}, {"a", m.a}, {"b", m.b}});
  j = json{{"cells", cells}, {"medians", medians}, {"identical", d.empty()}};
}

inline void to_json(json& j, const SourceSpec& s) {
  j = json{{"kind", to_string(s.kind)}, {"seed", s.seed},          {"p0", s.p0},
           {"stage_bias", s.stage_bias}, {"corr", s.corr},          {"qubit_count", s.qubit_count},
           {"label", s.label()}};
}
inline void from_json(const json& j, SourceSpec& s) {
  s.kind = source_kind_from_string(j.at("kind").get<std::string>());
  j.at("seed").get_to(s.seed);
  j.at("p0").get_to(s.p0);
  j.at("stage_bias").get_to(s.stage_bias);
  j.at("corr").get_to(s.corr);
  j.at("qubit_count").get_to(s.qubit_count);
}

inline void save_report(const std::filesystem::path& path, const BatteryReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  out << json(report).dump(2) << '\n';
}

inline BatteryReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  json j = json::parse(in);
  return j.get<BatteryReport>();
}

/// Fixed-width text grid, one row per report, letters R/Y/G/B per cell
/// ('-' where a test ran at neither level).
inline std::string render_grid(const std::vector<BatteryReport>& reports) {
  std::ostringstream os;
  std::size_t label_w = std::string("source").size();
  for (const auto& r : reports) label_w = std::max(label_w, r.source_label.size());

  std::vector<int> test_ids;
  if (!reports.empty())
    for (const auto& c : reports.front().cells) test_ids.push_back(c.test_id);

  os << std::left << std::setw(static_cast<int>(label_w)) << "source" << " |";
  for (int t : test_ids) os << std::right << std::setw(3) << t;
  os << " | overall\n";
  os << std::string(label_w, '-') << "-+" << std::string(test_ids.size() * 3, '-') << "-+--------\n";
  for (const auto& r : reports) {
    os << std::left << std::setw(static_cast<int>(label_w)) << r.source_label << " |";
    for (const auto& c : r.cells) {
      char letter = color_letter(c.color);
      if (c.trial_level == LevelResult::NotApplicable &&
          c.combined_level == LevelResult::NotApplicable)
        letter = '-';
      os << "  " << letter;
    }
    os << " | " << to_string(r.overall) << '\n';
  }
  return os.str();
}

inline std::string render_diff(const ReportDiff& diff, const BatteryReport& a,
                               const BatteryReport& b) {
  std::ostringstream os;
  os << "compare: " << a.source_label << " vs " << b.source_label << '\n';
  if (diff.empty()) {
    os << "identical reports\n";
    return os.str();
  }
  for (const auto& c : diff.cells)
    os << "  test " << c.test_id << " (" << nist_test_name(c.test_id) << "): color "
       << color_letter(c.a) << " -> " << color_letter(c.b) << '\n';
  for (const auto& m : diff.medians)
    os << "  test " << m.test_id << " median " << m.a << " -> " << m.b << '\n';
  return os.str();
}

/// Writes the per-test distributions behind the report as CSV files for
/// external plotting: per-trial scalars, combined P-values, per-(i, pattern)
/// LHS arrays, and per-block unique window counts.
inline void export_figure_data(const BatteryReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trial_values.csv");
    out << "test_id,metric,trial_index,value\n";
    for (const auto& [test_id, stats] : report.trial_stats) {
      const char* metric = test_id <= 15 ? "strict_pvalue"
                          : test_id <= 17 ? "violations"
                                          : "mean_unique";
      for (std::size_t i = 0; i < stats.values.size(); ++i)
        out << test_id << ',' << metric << ',' << i << ',' << stats.values[i] << '\n';
    }
  }
  {
    std::ofstream out(dir / "combined_pvalues.csv");
    out << "test_id,pvalue_index,pvalue\n";
    for (const auto& o : report.combined_nist)
      for (std::size_t i = 0; i < o.pvalues.size(); ++i)
        out << o.test_id << ',' << i << ',' << o.pvalues[i] << '\n';
  }
  auto write_lhs = [&](const std::filesystem::path& name,
                       const std::vector<LhsRhsOutcome>& trials,
                       const LhsRhsOutcome* combined) {
    std::ofstream out(dir / name);
    out << "level,trial_index,i,pattern,lhs,rhs\n";
    auto emit = [&](const LhsRhsOutcome& o, const char* level, long trial) {
      for (const auto& rec : o.per_i)
        for (std::size_t s = 0; s < rec.lhs.size(); ++s)
          out << level << ',' << trial << ',' << rec.i << ',' << s << ',' << rec.lhs[s] << ','
              << rec.rhs << '\n';
    };
    for (std::size_t t = 0; t < trials.size(); ++t) emit(trials[t], "trial", static_cast<long>(t));
    if (combined) emit(*combined, "combined", -1);
  };
  write_lhs("borel_lhs.csv", report.trial_borel,
            report.combined_borel ? &*report.combined_borel : nullptr);
  write_lhs("bayesian_lhs.csv", report.trial_bayesian,
            report.combined_bayesian ? &*report.combined_bayesian : nullptr);
  {
    std::ofstream out(dir / "tbt_counts.csv");
    out << "level,trial_index,block_index,unique\n";
    for (std::size_t t = 0; t < report.trial_tbt.size(); ++t)
      for (std::size_t b = 0; b < report.trial_tbt[t].unique_counts.size(); ++b)
        out << "trial," << t << ',' << b << ',' << report.trial_tbt[t].unique_counts[b] << '\n';
    if (report.combined_tbt)
      for (std::size_t b = 0; b < report.combined_tbt->unique_counts.size(); ++b)
        out << "combined,-1," << b << ',' << report.combined_tbt->unique_counts[b] << '\n';
  }
}

}  // namespace randbat
