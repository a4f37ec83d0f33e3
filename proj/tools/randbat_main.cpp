// randbat: battery of statistical randomness tests over bit-sequence trials.
// Subcommands: generate, test, battery, report, compare.
// Exit codes: 0 = all SR, 1 = some SNR verdict, 2 = usage/validation error.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "randbat/battery.hpp"
#include "randbat/report.hpp"
#include "randbat/sources.hpp"
#include "randbat/version.hpp"

namespace fs = std::filesystem;
using namespace randbat;

namespace {

std::set<int> parse_test_list(const std::string& spec) {
  std::set<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      int lo = std::stoi(item.substr(0, dash));
      int hi = std::stoi(item.substr(dash + 1));
      for (int t = lo; t <= hi; ++t) out.insert(t);
    } else {
      out.insert(std::stoi(item));
    }
  }
  for (int t : out)
    if (t < 1 || t > 18) throw Error("test id out of 1..18: " + std::to_string(t));
  return out;
}

std::map<std::string, std::string> parse_kv(const std::string& spec) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(spec);
  std::string item;
  bool first = true;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      if (first) kv["kind"] = item;  // bare leading kind
      else throw Error("malformed source attribute: " + item);
    } else {
      kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    first = false;
  }
  return kv;
}

struct SourceEntry {
  SourceSpec spec;
  std::string file;  // when nonempty, trials come from this file
  BitFileFormat format = BitFileFormat::Ascii01;
  std::string label;

  std::string effective_label() const { return label.empty() ? (file.empty() ? spec.label() : fs::path(file).stem().string()) : label; }
};

SourceEntry parse_source(const std::string& text) {
  SourceEntry e;
  auto kv = parse_kv(text);
  for (const auto& [key, value] : kv) {
    if (key == "kind") e.spec.kind = source_kind_from_string(value);
    else if (key == "seed") e.spec.seed = std::stoull(value);
    else if (key == "p0") e.spec.p0 = std::stod(value);
    else if (key == "b" || key == "stage_bias") e.spec.stage_bias = std::stod(value);
    else if (key == "rho" || key == "corr") e.spec.corr = std::stod(value);
    else if (key == "qubits" || key == "qubit_count") e.spec.qubit_count = std::stoi(value);
    else if (key == "file") e.file = value;
    else if (key == "format") e.format = bit_file_format_from_string(value);
    else if (key == "label") e.label = value;
    else throw Error("unknown source attribute: " + key);
  }
  if (e.file.empty()) e.spec.validate();
  return e;
}

json spec_to_sidecar(const SourceSpec& spec, const GenerationJob& job, bool with_timestamp) {
  json j{{"spec", spec},
         {"trials", job.trials},
         {"shots_per_trial", job.shots_per_trial},
         {"bits_per_shot", spec.bits_per_shot()},
         {"format", "ascii01"},
         {"tool_version", kVersion}};
  if (with_timestamp) {
    auto now = std::chrono::system_clock::now();
    j["generated_at_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                                 now.time_since_epoch()).count();
  }
  return j;
}

struct CommonBatteryFlags {
  int trials = 128;
  int shots = 8192;
  std::string tests;
  std::string out_dir = "randbat_out";
  int imax = 0;
  std::string dft_variant = "corrected";
  int max_combined_failures = 2;
  bool strict_subset_only = false;
  int tbt_m = 8;
  std::string pi_cache;
};

BatteryOptions to_battery_options(const CommonBatteryFlags& f) {
  BatteryOptions opt;
  if (!f.tests.empty()) opt.tests = parse_test_list(f.tests);
  opt.i_max_override = f.imax;
  opt.dft_variant = f.dft_variant == "original" ? DftVariant::Original : DftVariant::Corrected;
  opt.max_combined_failures = f.max_combined_failures;
  opt.strict_subset_only = f.strict_subset_only;
  opt.tbt_m = f.tbt_m;
  return opt;
}

void apply_config_file(const fs::path& path, CommonBatteryFlags& flags,
                       std::vector<SourceEntry>& sources) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path.string());
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(ln) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    if (key == "trials") flags.trials = std::stoi(value);
    else if (key == "shots") flags.shots = std::stoi(value);
    else if (key == "tests") flags.tests = value;
    else if (key == "output") flags.out_dir = value;
    else if (key == "imax") flags.imax = std::stoi(value);
    else if (key == "dft_variant") flags.dft_variant = value;
    else if (key == "max_combined_failures") flags.max_combined_failures = std::stoi(value);
    else if (key == "strict_subset_only") flags.strict_subset_only = value == "true" || value == "1";
    else if (key == "tbt_m") flags.tbt_m = std::stoi(value);
    else if (key == "pi_cache") flags.pi_cache = value;
    else if (key == "source") sources.push_back(parse_source(value));
    else throw Error(path.string() + ":" + std::to_string(ln) + ": unknown key " + key);
  }
}

std::vector<SourceEntry> default_comparison_sources(std::uint64_t seed) {
  std::vector<SourceEntry> out;
  for (auto kind : {SourceKind::PiBinary, SourceKind::Mt19937, SourceKind::OsCsprng,
                    SourceKind::Biased, SourceKind::BiasedTwoStep}) {
    SourceEntry e;
    e.spec.kind = kind;
    e.spec.seed = seed;
    out.push_back(e);
  }
  return out;
}

int cmd_generate(const SourceEntry& entry, int trials, int shots, const std::string& out_dir,
                 const std::string& format_name, const std::string& pi_cache) {
  GenerationJob job{entry.spec, trials, shots};
  GenerateOptions gopts;
  if (!pi_cache.empty()) gopts.pi_cache = pi_cache;
  fs::create_directories(out_dir);
  TrialSet ts = generate(job, gopts);
  BitFileFormat format = bit_file_format_from_string(format_name);
  std::string ext = format == BitFileFormat::Ascii01 ? ".txt"
                    : format == BitFileFormat::Hex  ? ".hex"
                                                    : ".bin";
  fs::path data_path = fs::path(out_dir) / (entry.effective_label() + ext);
  save_trials(data_path, ts, format);
  std::ofstream meta(fs::path(out_dir) / (entry.effective_label() + ".meta.json"));
  json sidecar = spec_to_sidecar(entry.spec, job, /*with_timestamp=*/true);
  sidecar["format"] = to_string(format);
  meta << sidecar.dump(2) << '\n';
  std::cout << "wrote " << data_path.string() << " (" << ts.trials.size() << " trials x "
            << ts.trials.front().size() << " bits)\n";
  return 0;
}

int cmd_test(const std::string& file, const std::string& format_name, const std::string& tests_arg,
             const CommonBatteryFlags& flags, const std::string& out_file) {
  TrialSet ts = load_trials(file, bit_file_format_from_string(format_name));
  std::set<int> tests = tests_arg.empty() ? to_battery_options(flags).effective_tests()
                                          : parse_test_list(tests_arg);
  DftVariant dft = flags.dft_variant == "original" ? DftVariant::Original : DftVariant::Corrected;

  bool any_snr = false;
  json doc;
  doc["file"] = file;
  doc["trial_count"] = ts.trials.size();
  doc["tool_version"] = kVersion;
  json trial_records = json::array();
  json combined_records = json::array();

  auto run_one = [&](const BitSequence& seq, int test_id) -> json {
    if (test_id <= 15) {
      NistParams p;
      p.test_id = test_id;
      p.dft_variant = dft;
      TestOutcome out = run_nist_test(seq, p);
      if (out.applicable && out.verdict == Verdict::SNR) any_snr = true;
      return json(out);
    }
    if (test_id == 16) {
      LhsRhsOutcome out = borel_test(seq, flags.imax);
      if (out.verdict == Verdict::SNR) any_snr = true;
      return json(out);
    }
    if (test_id == 17) {
      LhsRhsOutcome out = bayesian_test(seq, flags.imax);
      if (out.verdict == Verdict::SNR) any_snr = true;
      return json(out);
    }
    TbtOutcome out = tbt_test(seq, flags.tbt_m);
    if (out.verdict == Verdict::SNR) any_snr = true;
    return json(out);
  };

  for (std::size_t t = 0; t < ts.trials.size(); ++t) {
    json rec{{"trial", t}, {"outcomes", json::array()}};
    for (int test_id : tests) rec["outcomes"].push_back(run_one(ts.trials[t], test_id));
    trial_records.push_back(std::move(rec));
  }
  for (int test_id : tests) combined_records.push_back(run_one(ts.combined, test_id));
  doc["trials"] = std::move(trial_records);
  doc["combined"] = std::move(combined_records);

  if (out_file.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream out(out_file);
    if (!out) throw Error("cannot open file for writing: " + out_file);
    out << doc.dump(2) << '\n';
  }
  return any_snr ? 1 : 0;
}

int cmd_battery(std::vector<SourceEntry> sources, const CommonBatteryFlags& flags,
                std::uint64_t default_seed, bool seed_given) {
  if (sources.empty()) sources = default_comparison_sources(default_seed);
  if (seed_given)
    for (auto& s : sources)
      if (s.file.empty()) s.spec.seed = default_seed;

  BatteryOptions options = to_battery_options(flags);
  GenerateOptions gopts;
  fs::create_directories(flags.out_dir);
  gopts.pi_cache = flags.pi_cache.empty() ? (fs::path(flags.out_dir) / "pi_bits.cache").string()
                                          : flags.pi_cache;

  std::vector<BatteryReport> reports;
  json manifest{{"tool_version", kVersion},
                {"trials", flags.trials},
                {"shots", flags.shots},
                {"options", options},
                {"sources", json::array()}};

  for (auto& entry : sources) {
    TrialSet ts;
    if (!entry.file.empty()) {
      ts = load_trials(entry.file, entry.format);
      ts.source_label = entry.effective_label();
    } else {
      GenerationJob job{entry.spec, flags.trials, flags.shots};
      ts = generate(job, gopts);
      if (!entry.label.empty()) ts.source_label = entry.label;
      // persist the data so the analysis is repeatable even for os_csprng
      fs::path data_path = fs::path(flags.out_dir) / (ts.source_label + ".txt");
      save_trials(data_path, ts, BitFileFormat::Ascii01);
      std::ofstream meta(fs::path(flags.out_dir) / (ts.source_label + ".meta.json"));
      meta << spec_to_sidecar(entry.spec, job, /*with_timestamp=*/false).dump(2) << '\n';
    }
    BatteryReport report = run_battery(ts, options);
    fs::path report_path = fs::path(flags.out_dir) / (report.source_label + ".report.json");
    save_report(report_path, report);
    std::ofstream grid(fs::path(flags.out_dir) / (report.source_label + ".grid.txt"));
    grid << render_grid({report});
    manifest["sources"].push_back(json{{"label", report.source_label},
                                       {"file", entry.file},
                                       {"spec", entry.spec},
                                       {"report", report_path.filename().string()}});
    reports.push_back(std::move(report));
  }

  std::ofstream mf(fs::path(flags.out_dir) / "manifest.json");
  mf << manifest.dump(2) << '\n';

  std::string grid = render_grid(reports);
  std::ofstream gf(fs::path(flags.out_dir) / "summary_grid.txt");
  gf << grid;
  std::cout << grid;

  for (const auto& r : reports)
    if (r.overall == Verdict::SNR) return 1;
  return 0;
}

int cmd_report(const std::string& report_file, const std::string& export_dir) {
  BatteryReport report = load_report(report_file);
  std::cout << render_grid({report});
  if (!export_dir.empty()) {
    export_figure_data(report, export_dir);
    std::cout << "figure data exported to " << export_dir << '\n';
  }
  return 0;
}

int cmd_compare(const std::string& a_file, const std::string& b_file, const std::string& out_file) {
  BatteryReport a = load_report(a_file);
  BatteryReport b = load_report(b_file);
  ReportDiff diff = compare_report(a, b);
  std::cout << render_diff(diff, a, b);
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw Error("cannot open file for writing: " + out_file);
    out << json(diff).dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statistical randomness battery for RNG trial data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate trials from a seeded source model");
  std::string gen_kind = "ideal_qrng", gen_out = "randbat_out", gen_format = "ascii01";
  std::string gen_label, gen_pi_cache;
  SourceEntry gen_entry;
  int gen_trials = 128, gen_shots = 8192;
  std::uint64_t gen_seed = 1;
  double gen_p0 = 0.52, gen_b = 0.52, gen_rho = 0.5;
  int gen_qubits = 4;
  gen->add_option("--kind", gen_kind, "source kind")->required();
  gen->add_option("--p0", gen_p0, "bias toward 0s (toward init state for type 1/3)");
  gen->add_option("--stage-bias,-b", gen_b, "per-stage bias for qrng_type2");
  gen->add_option("--rho", gen_rho, "type-3 latent coupling in [-1,1]");
  gen->add_option("--qubits", gen_qubits, "type-3 qubit count");
  gen->add_option("--trials", gen_trials, "number of trials");
  gen->add_option("--shots", gen_shots, "shots per trial");
  gen->add_option("--seed", gen_seed, "seed (ignored by pi_binary/os_csprng)");
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--label", gen_label, "file label (defaults to the spec label)");
  gen->add_option("--format", gen_format, "ascii01|hex|packed");
  gen->add_option("--pi-cache", gen_pi_cache, "pi digit cache file");

  // test
  auto* tst = app.add_subcommand("test", "run tests on a trial file");
  std::string tst_file, tst_format = "ascii01", tst_tests, tst_out;
  CommonBatteryFlags tst_flags;
  tst->add_option("--file", tst_file, "trial file")->required();
  tst->add_option("--format", tst_format, "ascii01|hex|packed");
  tst->add_option("--tests", tst_tests, "test ids, e.g. 1,3,16-18");
  tst->add_option("--imax", tst_flags.imax, "override i_max for tests 16/17");
  tst->add_option("--dft-variant", tst_flags.dft_variant, "corrected|original");
  tst->add_option("--tbt-m", tst_flags.tbt_m, "window length for test 18");
  tst->add_option("--out", tst_out, "write outcome records to this file instead of stdout");

  // battery
  auto* bat = app.add_subcommand("battery", "run the full battery for one or more sources");
  CommonBatteryFlags bat_flags;
  std::vector<std::string> bat_sources;
  std::string bat_config;
  std::uint64_t bat_seed = 1;
  bat->add_option("--config", bat_config, "key=value config file");
  bat->add_option("--source", bat_sources,
                  "source spec, e.g. kind=biased,p0=0.52,seed=7 or file=trials.txt "
                  "(repeatable; default: the five comparison systems)");
  auto* bat_seed_opt = bat->add_option("--seed", bat_seed, "seed applied to all generated sources");
  // flags override config-file values; remember which were given explicitly
  auto* o_trials = bat->add_option("--trials", bat_flags.trials, "trials per source");
  auto* o_shots = bat->add_option("--shots", bat_flags.shots, "shots per trial");
  auto* o_tests = bat->add_option("--tests", bat_flags.tests, "subset of tests, e.g. 1,3,18");
  auto* o_out = bat->add_option("--out", bat_flags.out_dir, "output directory");
  auto* o_imax = bat->add_option("--imax", bat_flags.imax, "override i_max for tests 16/17");
  auto* o_dft = bat->add_option("--dft-variant", bat_flags.dft_variant, "corrected|original");
  auto* o_mcf = bat->add_option("--max-combined-failures", bat_flags.max_combined_failures,
                                "combined-level failures allowed before SNR");
  auto* o_strict = bat->add_flag("--strict-subset-only", bat_flags.strict_subset_only,
                                 "forgive combined failures only for tests 2,7,10,11,12,14,15");
  auto* o_tbt = bat->add_option("--tbt-m", bat_flags.tbt_m, "window length for test 18");
  auto* o_pi = bat->add_option("--pi-cache", bat_flags.pi_cache, "pi digit cache file");

  // report
  auto* rep = app.add_subcommand("report", "render a saved report, optionally export figure data");
  std::string rep_file, rep_export;
  rep->add_option("--report", rep_file, "report JSON file")->required();
  rep->add_option("--export", rep_export, "directory for figure data CSVs");

  // compare
  auto* cmp = app.add_subcommand("compare", "diff two saved reports");
  std::string cmp_a, cmp_b, cmp_out;
  cmp->add_option("--a", cmp_a, "first report")->required();
  cmp->add_option("--b", cmp_b, "second report")->required();
  cmp->add_option("--out", cmp_out, "write diff JSON to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      gen_entry.spec.kind = source_kind_from_string(gen_kind);
      gen_entry.spec.seed = gen_seed;
      gen_entry.spec.p0 = gen_p0;
      gen_entry.spec.stage_bias = gen_b;
      gen_entry.spec.corr = gen_rho;
      gen_entry.spec.qubit_count = gen_qubits;
      gen_entry.label = gen_label;
      gen_entry.spec.validate();
      return cmd_generate(gen_entry, gen_trials, gen_shots, gen_out, gen_format, gen_pi_cache);
    }
    if (tst->parsed()) return cmd_test(tst_file, tst_format, tst_tests, tst_flags, tst_out);
    if (bat->parsed()) {
      std::vector<SourceEntry> sources;
      if (!bat_config.empty()) {
        CommonBatteryFlags from_cli = bat_flags;
        apply_config_file(bat_config, bat_flags, sources);
        if (o_trials->count()) bat_flags.trials = from_cli.trials;
        if (o_shots->count()) bat_flags.shots = from_cli.shots;
        if (o_tests->count()) bat_flags.tests = from_cli.tests;
        if (o_out->count()) bat_flags.out_dir = from_cli.out_dir;
        if (o_imax->count()) bat_flags.imax = from_cli.imax;
        if (o_dft->count()) bat_flags.dft_variant = from_cli.dft_variant;
        if (o_mcf->count()) bat_flags.max_combined_failures = from_cli.max_combined_failures;
        if (o_strict->count()) bat_flags.strict_subset_only = from_cli.strict_subset_only;
        if (o_tbt->count()) bat_flags.tbt_m = from_cli.tbt_m;
        if (o_pi->count()) bat_flags.pi_cache = from_cli.pi_cache;
      }
      for (const auto& s : bat_sources) sources.push_back(parse_source(s));
      return cmd_battery(std::move(sources), bat_flags, bat_seed, bat_seed_opt->count() > 0);
    }
    if (rep->parsed()) return cmd_report(rep_file, rep_export);
    if (cmp->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
