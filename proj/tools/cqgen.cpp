#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cqgen/cqgen.hpp"

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cqgen::ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
    text.pop_back();
  return text;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string item = (comma == std::string::npos)
                           ? s.substr(pos)
                           : s.substr(pos, comma - pos);
    std::size_t b = item.find_first_not_of(" \t");
    std::size_t e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cqgen: generate and rank critical questions for argumentative "
      "interventions"};
  app.require_subcommand(1);

  // ---- run ----
  std::string dataset_path, out_path;
  std::string profile = "con+ss+rank-er";
  std::string backend_name = "remote";
  std::string catalog_path = "data/walton_schemes.json";
  std::string script_path, replay_store_path, record_path, log_path;
  std::string model, endpoint, api_key_env, run_label, baseline_prompt_path;
  std::string system_prompt;
  int parallelism = 0, rank_k = 0, max_tokens = 0;
  double temperature = 0.0;

  CLI::App* run = app.add_subcommand(
      "run", "Run the pipeline over a dataset and write a submission file");
  run->add_option("--dataset", dataset_path,
                  "Dataset JSON (id -> {intervention, schemes})")
      ->required();
  run->add_option("--out", out_path, "Submission JSON output path")
      ->required();
  run->add_option("--profile", profile, "Pipeline profile")
      ->check(CLI::IsMember(cqgen::profile_names()))
      ->capture_default_str();
  auto* opt_backend =
      run->add_option("--backend", backend_name,
                      "Chat backend (remote, scripted, or replay)")
          ->check(CLI::IsMember({"remote", "scripted", "replay"}))
          ->capture_default_str();
  run->add_option("--catalog", catalog_path,
                  "Argumentation scheme catalog JSON")
      ->capture_default_str();
  run->add_option("--script", script_path,
                  "Reply script for the scripted backend (JSON array)");
  run->add_option("--replay-store", replay_store_path,
                  "Recorded digest/reply store (JSONL) to replay");
  run->add_option("--record", record_path,
                  "Append every exchange to this digest/reply store (JSONL)");
  run->add_option("--log", log_path, "Write run events to this JSONL file");
  auto* opt_parallelism =
      run->add_option("--parallelism", parallelism, "Worker threads");
  auto* opt_rank_k =
      run->add_option("--rank-k", rank_k, "Questions kept per intervention");
  auto* opt_run_label =
      run->add_option("--run-label", run_label, "Label recorded in run events");
  auto* opt_system = run->add_option(
      "--system-prompt", system_prompt,
      "Override the system prompt (empty string disables it)");
  auto* opt_baseline = run->add_option(
      "--baseline-prompt", baseline_prompt_path,
      "File holding the single-shot prompt for the baseline profile; may "
      "reference {intervention}");
  auto* opt_model = run->add_option("--model", model, "Remote model name");
  auto* opt_endpoint = run->add_option(
      "--endpoint", endpoint, "Remote chat-completions endpoint base URL");
  auto* opt_key_env =
      run->add_option("--api-key-env", api_key_env,
                      "Environment variable holding the API key");
  auto* opt_temp =
      run->add_option("--temperature", temperature, "Sampling temperature");
  auto* opt_max_tokens = run->add_option("--max-tokens", max_tokens,
                                         "Max output tokens per reply");

  // ---- validate-catalog ----
  std::string validate_path;
  CLI::App* validate = app.add_subcommand(
      "validate-catalog", "Check a scheme catalog file and report its size");
  validate->add_option("path", validate_path, "Catalog JSON path")->required();

  // ---- report ----
  std::string labels_path, order_csv, report_format = "text";
  CLI::App* report = app.add_subcommand(
      "report", "Aggregate evaluation labels into per-run percentages");
  report->add_option("--labels", labels_path, "JSONL of labeled questions")
      ->required();
  report->add_option("--order", order_csv,
                     "Comma-separated run labels selecting and ordering rows");
  report->add_option("--format", report_format, "Output format")
      ->check(CLI::IsMember({"text", "csv"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) {
      cqgen::Catalog catalog = cqgen::load_catalog_file(validate_path);
      std::cout << "catalog OK: " << catalog.size() << " schemes\n";
      return 0;
    }

    if (report->parsed()) {
      std::vector<cqgen::LabeledQuestion> items =
          cqgen::load_labels(labels_path);
      cqgen::RunDistributions dists = cqgen::aggregate_labels(items);
      std::vector<std::string> order = split_commas(order_csv);
      std::cout << (report_format == "csv" ? cqgen::render_csv(dists, order)
                                           : cqgen::render_table(dists, order));
      return 0;
    }

    // run
    cqgen::RunConfig cfg = cqgen::profile_config(profile);
    if (opt_rank_k->count()) cfg.rank_k = rank_k;
    if (opt_parallelism->count()) cfg.parallelism = parallelism;
    if (opt_run_label->count()) cfg.run_label = run_label;
    if (opt_system->count()) cfg.system_prompt = system_prompt;
    if (opt_baseline->count())
      cfg.baseline_prompt = read_text_file(baseline_prompt_path);
    if (opt_model->count()) cfg.backend.model = model;
    if (opt_endpoint->count()) cfg.backend.endpoint = endpoint;
    if (opt_key_env->count()) cfg.backend.api_key_env = api_key_env;
    if (opt_temp->count()) cfg.backend.temperature = temperature;
    if (opt_max_tokens->count()) cfg.backend.max_output_tokens = max_tokens;

    if (!opt_backend->count()) {
      if (!script_path.empty())
        backend_name = "scripted";
      else if (!replay_store_path.empty())
        backend_name = "replay";
    }

    std::unique_ptr<cqgen::ChatBackend> base;
    cqgen::ScriptedBackend* scripted = nullptr;
    if (backend_name == "remote") {
      base = std::make_unique<cqgen::OpenAiClient>(cfg.backend);
    } else if (backend_name == "scripted") {
      if (script_path.empty())
        throw cqgen::ConfigError("--backend scripted requires --script");
      auto* sb = new cqgen::ScriptedBackend(
          cqgen::ScriptedBackend::from_script_file(script_path));
      base.reset(sb);
      scripted = sb;
    } else {
      if (replay_store_path.empty())
        throw cqgen::ConfigError("--backend replay requires --replay-store");
      auto* sb = new cqgen::ScriptedBackend(
          cqgen::ScriptedBackend::from_replay_store(replay_store_path));
      base.reset(sb);
      scripted = sb;
    }

    std::unique_ptr<cqgen::RecordingBackend> recorder;
    cqgen::ChatBackend* active = base.get();
    if (!record_path.empty()) {
      recorder = std::make_unique<cqgen::RecordingBackend>(*base, record_path);
      active = recorder.get();
    }

    std::unique_ptr<cqgen::RunLog> log =
        log_path.empty() ? std::make_unique<cqgen::RunLog>()
                         : std::make_unique<cqgen::RunLog>(log_path);

    cqgen::Catalog catalog = cqgen::load_catalog_file(catalog_path);
    cqgen::RunSummary summary = cqgen::run_dataset_file(
        dataset_path, out_path, catalog, cfg, *active, *log);

    std::cout << "processed " << (summary.succeeded + summary.failed)
              << " interventions: " << summary.succeeded << " succeeded, "
              << summary.failed << " failed, " << summary.warnings
              << " warnings (" << summary.wall_ms << " ms)\n";
    for (const auto& [id, error] : summary.failures)
      std::cerr << "failed " << id << ": " << error << "\n";
    if (scripted && scripted->remaining() > 0)
      std::cerr << "note: " << scripted->remaining()
                << " scripted replies were never consumed\n";
    return summary.failed > 0 ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
