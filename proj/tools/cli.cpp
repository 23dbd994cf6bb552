#include "cli.hpp"

#include <ostream>

#include "CLI11.hpp"
#include "stages.hpp"

namespace llmda::cli {

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string workdir = "llmda_work";
  std::size_t jobs = 1;
  std::string backend;
  std::string transcript;
  std::string script;
};

void add_common(CLI::App& cmd, Options& o) {
  cmd.add_option("--config", o.config_path, "JSON configuration file");
  cmd.add_option("--set", o.overrides, "Override a config key, e.g. --set adapt.theta=0.05")->take_all();
  cmd.add_option("--workdir", o.workdir, "Directory for stage artifacts")->capture_default_str();
  cmd.add_option("--jobs", o.jobs, "Worker threads for every parallel step")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}))
      ->capture_default_str();
  cmd.add_option("--backend", o.backend, "LLM backend: none, scripted, replay, live (same as llm.backend)");
  cmd.add_option("--transcript", o.transcript, "Transcript to replay, or where to record (llm.transcript)");
  cmd.add_option("--script", o.script, "Scripted backend response file (llm.script)");
}

nlohmann::json json_string(const std::string& s) { return nlohmann::json(s); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal knowledge graph rule mining, LLM-guided rule refinement and link prediction", "llmda"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::pair<std::string, CLI::App*>> commands;
  for (const char* stage : kStages) commands.emplace_back(stage, app.add_subcommand(stage));
  commands.emplace_back("pipeline", app.add_subcommand("pipeline", "Run every stage in order"));
  commands.emplace_back("print-config", app.add_subcommand("print-config", "Print the resolved configuration"));
  commands[0].second->description("Load dataset splits into the work directory");
  commands[1].second->description("Extract rules from historical data by temporal random walks");
  commands[2].second->description("Ask the LLM backend for additional rules per head relation");
  commands[3].second->description("Rescore rules on current data and replace low-confidence ones");
  commands[4].second->description("Rank candidate answers for future-split queries");
  commands[5].second->description("Filtered MRR and Hit@1/3/10 from predictions");
  for (auto& [name, cmd] : commands) add_common(*cmd, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (app.get_subcommands().empty()) err << app.help();
    return kConfigError;
  }
  std::string command;
  for (auto& [name, cmd] : commands) {
    if (cmd->parsed()) command = name;
  }

  try {
    std::vector<std::string> overrides = o.overrides;
    if (!o.backend.empty()) overrides.push_back("llm.backend=" + json_string(o.backend).dump());
    if (!o.transcript.empty()) overrides.push_back("llm.transcript=" + json_string(o.transcript).dump());
    if (!o.script.empty()) overrides.push_back("llm.script=" + json_string(o.script).dump());
    const std::optional<std::filesystem::path> file =
        o.config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.config_path);
    RunContext ctx;
    ctx.config = resolve_config(file, overrides);
    ctx.typed = parse_config(ctx.config);
    ctx.workdir = o.workdir;
    ctx.jobs = o.jobs;
    ctx.log = &err;

    if (command == "print-config") {
      out << ctx.config.dump(2) << "\n";
      return kOk;
    }
    const Artifacts artifacts = command == "pipeline" ? run_pipeline(ctx) : run_stage(command, ctx);
    nlohmann::ordered_json summary;
    summary["command"] = command;
    auto paths = nlohmann::ordered_json::array();
    for (const auto& p : artifacts) paths.push_back(p.string());
    summary["artifacts"] = std::move(paths);
    out << summary.dump() << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) err << "config error: " << p << "\n";
    return kConfigError;
  } catch (const DependencyError& e) {
    err << "dependency error: " << e.what() << "\n";
    return kDependencyError;
  } catch (const BackendError& e) {
    err << "backend failure: " << e.what() << "\n";
    return kBackendFailure;
  } catch (const ReplayDivergenceError& e) {
    err << "backend failure: " << e.what() << "\n";
    return kBackendFailure;
  } catch (const ValidationError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace llmda::cli
