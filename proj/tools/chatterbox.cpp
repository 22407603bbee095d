#include <chatterbox/analytics.hpp>
#include <chatterbox/errors.hpp>
#include <chatterbox/orchestrator.hpp>
#include <chatterbox/persona.hpp>
#include <chatterbox/scammer_sim.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

using namespace chatterbox;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

int cmd_run(const std::string& config_file, bool export_on_exit) {
  auto cfg = orchestrator::load_config(config_file);
  WallClock clock;
  orchestrator::Orchestrator orch(std::move(cfg), clock);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  auto replayed = orch.start();
  std::cerr << "replayed " << replayed << " events; " << orch.honeypot().personas().size() << " personas";
  if (orch.api_port()) std::cerr << "; api on " << orch.config().api.host << ":" << orch.api_port();
  std::cerr << std::endl;
  orch.run(g_stop);
  orch.shutdown();
  if (export_on_exit) {
    auto paths = orch.export_data(!orch.config().export_salt.empty());
    std::cerr << "exported " << paths.transcripts.string() << std::endl;
  }
  return 0;
}

int cmd_export(const std::string& config_file, bool deidentify) {
  auto cfg = orchestrator::load_config(config_file);
  cfg.api_enabled = false;
  WallClock clock;
  orchestrator::Orchestrator orch(std::move(cfg), clock);
  orch.start();
  orch.shutdown();
  auto paths = orch.export_data(deidentify);
  std::cout << paths.transcripts.string() << "\n" << paths.audit.string() << "\n";
  return 0;
}

int cmd_simulate(const std::string& scenario_file, std::optional<std::uint64_t> seed, const std::string& trace_out,
                 const std::string& log_out, bool quiet) {
  auto sc = sim::load_scenario(scenario_file);
  if (seed) sc.seed = *seed;
  std::unique_ptr<queue::EventLog> log;
  if (!log_out.empty()) {
    std::filesystem::remove(log_out);
    log = std::make_unique<queue::EventLog>(log_out);
  }
  sim::RunnerOptions opts;
  opts.throw_on_failure = false;
  opts.log = log.get();
  sim::ScenarioRunner runner(sc, opts);
  auto result = runner.run();
  if (log) log->flush();

  if (!quiet)
    for (const auto& t : result.trace) {
      std::cout << format_utc(t.at) << "  " << platform_code(t.platform) << "  " << (t.side == "scammer" ? "<- " : "-> ")
                << t.actor << ": " << t.text;
      if (!t.media.empty()) std::cout << " [" << t.media << "]";
      std::cout << "\n";
    }
  for (const auto& s : result.steps)
    std::cout << (s.ok ? "ok   " : "FAIL ") << s.label << (s.detail.empty() ? "" : "  (" + s.detail + ")") << "\n";
  std::cout << (result.passed ? "PASS " : "FAIL ") << sc.name << " seed=" << sc.seed << "\n";
  if (!trace_out.empty()) {
    std::ofstream out(trace_out, std::ios::trunc);
    out << result.trace_json().dump(2) << "\n";
  }
  return result.passed ? 0 : 1;
}

int cmd_analyze(const std::string& corpus_path, const std::string& report_out, const std::string& deid_out,
                const std::string& salt, int min_turns, bool trust, const std::string& classifier_url) {
  auto corpus = analytics::load_corpus(corpus_path);
  auto report = analytics::conversation_stats(corpus, min_turns);
  auto doc = report.to_json();

  if (trust) {
    std::unique_ptr<analytics::TextBackend> backend;
    if (classifier_url.empty()) backend = std::make_unique<analytics::RuleTrustBackend>();
    else backend = std::make_unique<analytics::HttpTextBackend>(classifier_url);
    std::map<std::string, int> counts;
    int classified = 0;
    json failures = json::array();
    for (const auto& c : corpus) {
      if (static_cast<int>(c.messages.size()) < min_turns) continue;
      try {
        auto labels = analytics::classify_trust(c, *backend);
        ++classified;
        for (const auto& [cat, on] : labels.categories) counts[cat] += on ? 1 : 0;
      } catch (const ClassifierError& e) {
        failures.push_back({{"conversation_id", c.id}, {"error", e.what()}});
      }
    }
    json rows = json::array();
    for (const auto& cat : analytics::kTrustCategories)
      rows.push_back({{"category", cat},
                      {"conversations", counts[cat]},
                      {"percent", classified ? 100.0 * counts[cat] / classified : 0.0}});
    doc["trust"] = {{"classified", classified}, {"categories", rows}, {"failures", failures}};
  }

  std::ofstream out(report_out, std::ios::trunc);
  if (!out) throw ConfigError("--report: cannot write " + report_out);
  out << doc.dump(2) << "\n";

  if (!deid_out.empty()) {
    if (salt.empty()) throw ConfigError("--salt: required with --deidentify");
    analytics::write_corpus(deid_out, analytics::export_deidentified(corpus, salt));
  }
  std::cout << report.conversations << " conversations (" << report.excluded << " below " << min_turns
            << " messages), " << report.crossed << " crossed\n";
  return 0;
}

int cmd_generate(const std::string& out_dir, int count, std::uint64_t seed, const std::string& cohort) {
  auto pools = persona::NamePools::defaults();
  auto quota = cohort == "uniform" ? persona::Quota::uniform((count + 9) / 10) : persona::Quota::paper_cohort();
  if (cohort != "uniform" && cohort != "default") throw ConfigError("--cohort: expected default or uniform");
  persona::TemplateBiographySource bio;
  for (int i = 0; i < count; ++i) {
    auto p = persona::generate_persona(seed + static_cast<std::uint64_t>(i), pools, quota, bio);
    persona::save_persona(out_dir, p);
    std::cout << p.persona_id << "  " << p.first_name << " " << p.last_name << "  " << persona::to_string(p.gender)
              << " " << p.age << "  " << p.home_city << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chatterbox honeypot"};
  app.require_subcommand(1);

  std::string config_file;
  bool export_on_exit = false;
  auto* run = app.add_subcommand("run", "Run the honeypot service until SIGINT/SIGTERM");
  run->add_option("--config", config_file, "Config file")->required()->check(CLI::ExistingFile);
  run->add_flag("--export", export_on_exit, "Export transcripts and audit log on shutdown");

  bool export_deid = false;
  auto* exp = app.add_subcommand("export", "Replay the event log and export transcripts and the audit log");
  exp->add_option("--config", config_file, "Config file")->required()->check(CLI::ExistingFile);
  exp->add_flag("--deidentify", export_deid, "Pseudonymize counterparty identifiers with export.salt");

  std::string scenario_file, trace_out, log_out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  auto* simulate = app.add_subcommand("simulate", "Run a scripted scenario on a simulated clock");
  simulate->add_option("--scenario", scenario_file, "Scenario file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--trace", trace_out, "Write the trace as JSON");
  simulate->add_option("--log", log_out, "Write the event log");
  simulate->add_flag("--quiet", quiet, "Only print step results");

  std::string corpus_path, report_out, deid_out, salt, classifier_url;
  int min_turns = 10;
  bool trust = false;
  auto* analyze = app.add_subcommand("analyze", "Statistics, entity prevalence and de-identified export");
  analyze->add_option("--corpus", corpus_path, "Transcript .jsonl file or directory")->required()->check(CLI::ExistingPath);
  analyze->add_option("--report", report_out, "Report output file")->required();
  analyze->add_option("--deidentify", deid_out, "Also write a de-identified corpus here");
  analyze->add_option("--salt", salt, "Pseudonym salt");
  analyze->add_option("--min-turns", min_turns, "Exclude shorter conversations")->check(CLI::NonNegativeNumber);
  analyze->add_flag("--trust", trust, "Classify trust-building categories");
  analyze->add_option("--classifier-url", classifier_url, "HTTP classifier; default is the offline rule classifier");

  std::string out_dir = "personas", cohort = "default";
  int count = 37;
  std::uint64_t persona_seed = 1;
  auto* gen = app.add_subcommand("generate-personas", "Generate persona documents");
  gen->add_option("--out", out_dir, "Output directory");
  gen->add_option("--count", count, "Number of personas")->check(CLI::PositiveNumber);
  gen->add_option("--seed", persona_seed, "First seed");
  gen->add_option("--cohort", cohort, "default (37-persona table) or uniform");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_file, export_on_exit);
    if (*exp) return cmd_export(config_file, export_deid);
    if (*simulate) return cmd_simulate(scenario_file, seed, trace_out, log_out, quiet);
    if (*analyze) return cmd_analyze(corpus_path, report_out, deid_out, salt, min_turns, trust, classifier_url);
    if (*gen) return cmd_generate(out_dir, count, persona_seed, cohort);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
