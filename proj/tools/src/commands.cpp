#include "minexp/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "minexp/cli/demo.hpp"
#include "minexp/cli/io.hpp"

namespace minexp::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string model_path;
  std::string samples_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> known_n;
  double tol = 1e-6;
  std::size_t dimension = 2;
  std::size_t terms = 4;
  double margin = 0.1;
  std::vector<std::string> positional;
};

RunConfig load_config(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : read_config(o.config_path);
  if (!o.model_path.empty()) c.model_path = o.model_path;
  if (!o.samples_path.empty()) c.samples_path = o.samples_path;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.seed) c.seed = *o.seed;
  if (o.known_n) c.known_n = *o.known_n;
  return c;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(*c.out_dir);
  return (fs::path(*c.out_dir) / name).string();
}

int cmd_generate(const Options& o, std::ostream& out) {
  const RunConfig c = load_config(o);
  if (!(o.margin > 0.0 && o.margin < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "--margin must lie in (0, 1)");
  const std::size_t d = c.directions.empty() ? o.dimension : c.directions.size();
  const auto basis = make_basis(c, d);
  GenerationOptions options;
  options.margin = o.margin;
  options.window = PhaseWindow{c.phase_floor};
  const auto model = generate_admissible_model(basis, o.terms, c.seed, options);
  if (!validate_nyquist(model, basis, options.window).valid)
    throw Error(ErrorKind::kGenerationFailed, "generated model fails the Nyquist check");
  const std::string text = model_to_json(model).dump(2) + "\n";
  if (c.model_path) {
    write_text(*c.model_path, text);
  } else if (c.out_dir) {
    write_text(out_path(c, "model.json"), text);
  } else {
    out << text;
  }
  return kExitOk;
}

int cmd_plan(const Options& o, std::ostream& out) {
  const RunConfig c = load_config(o);
  std::optional<ExponentialModel> model;
  if (c.model_path) model = read_model(*c.model_path);
  const std::size_t d =
      model ? model->dimension() : (c.directions.empty() ? o.dimension : c.directions.size());
  const auto basis = make_basis(c, d);
  const auto mode = c.known_n ? PlanMode::kKnownN : PlanMode::kUnknownNWorstCase;
  const auto points = plan_points(basis, c.known_n.value_or(o.terms), mode);

  std::ostringstream text;
  if (model) {
    std::vector<SampleRecord> records;
    for (const auto& p : points) records.push_back({p, evaluate(*model, p)});
    write_sample_file(text, d, records);
  } else {
    text << "# planned points: fill in `re im` for each row\n";
    text << "dim=" << d << "\n";
    text.precision(17);
    for (const auto& p : points) {
      for (std::size_t k = 0; k < p.size(); ++k) text << (k ? " " : "") << p[k];
      text << "\n";
    }
  }
  if (c.samples_path) {
    write_text(*c.samples_path, text.str());
  } else if (c.out_dir) {
    write_text(out_path(c, "samples.txt"), text.str());
  } else {
    out << text.str();
  }
  return kExitOk;
}

int cmd_recover(const Options& o, std::ostream& out) {
  const RunConfig c = load_config(o);
  std::shared_ptr<SampleSource> source;
  if (c.samples_path) {
    source = std::make_shared<TabulatedSource>(TabulatedSource::load(*c.samples_path));
  } else if (c.model_path) {
    const auto model = read_model(*c.model_path);
    source = std::make_shared<SyntheticSource>(model);
    if (c.noise > 0.0) {
      double scale = 0.0;
      for (const auto& t : model.terms()) scale += std::abs(t.coefficient);
      source = std::make_shared<NoisySource>(source, c.noise * scale, c.seed);
    }
  } else {
    throw Error(ErrorKind::kInvalidArgument, "recover needs --samples or --model");
  }
  const auto basis = make_basis(c, source->dimension());
  const auto config = make_recovery_config(c);
  Oracle oracle(source);

  auto emit = [&](const RecoveryReport& report) {
    const std::string text = report_to_json(report, oracle.ledger().calls()).dump(2) + "\n";
    if (c.out_dir) {
      write_text(out_path(c, "report.json"), text);
      if (report.model) write_model(out_path(c, "model.json"), *report.model);
    }
    out << text;
  };
  try {
    const auto report = c.known_n ? recover_known_n(oracle, basis, *c.known_n, config)
                                  : recover_unknown_n(oracle, basis, config);
    emit(report);
  } catch (const BudgetExceededError& e) {
    emit(e.partial());
    throw;
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  if (o.positional.size() != 2)
    throw Error(ErrorKind::kInvalidArgument, "verify needs two model files");
  if (!(o.tol > 0.0)) throw Error(ErrorKind::kInvalidArgument, "--tol must be positive");
  const auto expected = canonicalize(read_model(o.positional[0]));
  const auto actual = canonicalize(read_model(o.positional[1]));
  if (expected.dimension() != actual.dimension())
    throw Error(ErrorKind::kInvalidArgument, "models have different dimensions");
  Json doc;
  doc["expected_terms"] = expected.size();
  doc["actual_terms"] = actual.size();
  if (expected.size() != actual.size()) {
    doc["pass"] = false;
    doc["reason"] = "term-count mismatch";
    out << doc.dump(2) << "\n";
    return kExitTermCountMismatch;
  }
  const auto cmp = compare_models(expected, actual);
  const bool pass = cmp.max_error() <= o.tol;
  doc["assignment"] = cmp.assignment;
  doc["max_exponent_error"] = cmp.max_exponent_error;
  doc["max_coefficient_error"] = cmp.max_coefficient_error;
  doc["tol"] = o.tol;
  doc["pass"] = pass;
  out << doc.dump(2) << "\n";
  return pass ? kExitOk : kExitMismatch;
}

int cmd_demo(std::ostream& out) {
  const auto result = run_demo();
  out << result.transcript;
  return result.deviations.empty() ? kExitOk : kExitMismatch;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kInvalidBasis:
    case ErrorKind::kParseError:
    case ErrorKind::kMissingSample:
    case ErrorKind::kGenerationFailed:
      return kExitInvalidInput;
    case ErrorKind::kBudgetExceeded:
      return kExitBudgetExceeded;
    default:
      return kExitNumericalFailure;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse multivariate exponential-sum recovery"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Run configuration (JSON)");
    sub->add_option("--seed", o.seed, "Random seed");
  };

  auto* generate = app.add_subcommand("generate", "Write a random admissible model");
  add_common(generate);
  generate->add_option("--dim", o.dimension, "Dimension (ignored when the config has directions)");
  generate->add_option("--terms,-n", o.terms, "Number of terms");
  generate->add_option("--margin", o.margin, "Nyquist margin as a fraction of pi, in (0, 1)");
  generate->add_option("--model", o.model_path, "Output model file");
  generate->add_option("--out", o.out_dir, "Output directory (writes model.json)");

  auto* plan = app.add_subcommand("plan", "List the sample points a recovery will request");
  add_common(plan);
  plan->add_option("--known-n", o.known_n, "Plan the known-n schedule for this n");
  plan->add_option("--terms,-n", o.terms, "Term count hint for the unknown-n worst case");
  plan->add_option("--dim", o.dimension, "Dimension (without config directions or model)");
  plan->add_option("--model", o.model_path, "Tabulate this model at the planned points");
  plan->add_option("--samples", o.samples_path, "Output sample file");
  plan->add_option("--out", o.out_dir, "Output directory (writes samples.txt)");

  auto* recover = app.add_subcommand("recover", "Recover a model from samples or a synthetic model");
  add_common(recover);
  recover->add_option("--model", o.model_path, "Synthetic source model file");
  recover->add_option("--samples", o.samples_path, "Tabulated sample file");
  recover->add_option("--known-n", o.known_n, "Number of terms, if known");
  recover->add_option("--out", o.out_dir, "Output directory (report.json, model.json)");

  auto* verify = app.add_subcommand("verify", "Compare two model files");
  verify->add_option("files", o.positional, "Expected and recovered model files")->expected(2);
  verify->add_option("--tol", o.tol, "Maximum relative error");

  auto* demo = app.add_subcommand("demo", "Run the two built-in reference scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (generate->parsed()) return cmd_generate(o, out);
    if (plan->parsed()) return cmd_plan(o, out);
    if (recover->parsed()) return cmd_recover(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (demo->parsed()) return cmd_demo(out);
  } catch (const Error& e) {
    err << Json{{"error", std::string(error_class_name(e.kind()))}, {"message", e.what()}}.dump()
        << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << Json{{"error", "invalid-argument"}, {"message", e.what()}}.dump() << "\n";
    return kExitInvalidInput;
  }
  return kExitInvalidInput;
}

}  // namespace minexp::cli
