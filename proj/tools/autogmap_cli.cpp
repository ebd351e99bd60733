// autogmap: reorder, train, evaluate, verify and export crossbar mapping
// schemes for sparse matrices.
//
// Exit codes: 0 success, 1 verification failed, 2 operational error,
// 3 infeasible result (no complete-coverage scheme / incomplete coverage).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "autogmap/autogmap.hpp"

namespace {

using namespace autogmap;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitError = 2;
constexpr int kExitInfeasible = 3;

int log_level() {
  const char* env = std::getenv("AUTOGMAP_LOG");
  return env ? std::atoi(env) : 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

SparseMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_matrix_market(in);
}

MappingScheme load_scheme(const std::string& path) {
  try {
    return scheme_from_json(ordered_json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json(const std::string& path, const ordered_json& j) { write_file(path, j.dump(2) + "\n"); }

// Every artifact-writing command leaves "<output>.config.json" next to its
// output with the fully resolved options.
void echo_config(const std::string& output, const std::string& command, const CLI::App& sub) {
  ordered_json j;
  j["command"] = command;
  ordered_json opts;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help") continue;
    const auto results = opt->results();
    std::string name = opt->get_name();
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    if (opt->get_type_size() == 0) {
      opts[name] = opt->count() > 0;
    } else if (!results.empty()) {
      opts[name] = results.back();
    } else {
      opts[name] = opt->get_default_str();
    }
  }
  j["options"] = std::move(opts);
  write_json(output + ".config.json", j);
}

void check_dims(const SparseMatrix& m, const MappingScheme& s) {
  if (m.dim() != s.dim) throw ArgumentError("dimension mismatch: scheme " + std::to_string(s.dim) + ", matrix " + std::to_string(m.dim()));
  const auto v = validate(s);
  if (!v.empty()) throw ArgumentError("invalid scheme: " + v.front().kind + " (" + v.front().detail + ")");
}

ordered_json eval_json(const MappingScheme& s, const EvalResult& r) {
  ordered_json j;
  j["scheme"] = to_json(s);
  j["eval"] = to_json(r);
  return j;
}

struct Options {
  std::string input, output, scheme, perm_out, curves_out, checkpoint_out, init_checkpoint, optimizer = "adam";
  bool no_reverse = false;
  double alpha = 0.8, lr = 1e-3, decay = 0.95, clip = 5.0, tolerance = 1e-10;
  Index grid = 32, grades = 6, epochs = 1000, batch = 1, hidden = 10, block = 0, fill = 0, fixed_fill = 0, crossbar = 32,
        trials = 20, curve_stride = 1, checkpoint_every = 0;
  std::uint64_t seed = 0, cap = kDefaultOracleCap;
};

int run_reorder(const Options& o, const CLI::App& sub) {
  const auto m = load_matrix(o.input);
  if (!m.has_symmetric_pattern()) throw PreconditionError("Cuthill-McKee ordering requires a symmetric pattern");
  const auto p = rcm_order(m, !o.no_reverse);
  const auto reordered = permute_matrix(m, p);
  write_file(o.output, to_matrix_market(reordered));
  write_json(o.perm_out, to_json(p));
  echo_config(o.output, "reorder", sub);
  std::cout << "bandwidth before: " << bandwidth(m) << "\n"
            << "bandwidth after: " << bandwidth(reordered) << "\n";
  return 0;
}

int run_train(const Options& o, const CLI::App& sub) {
  const auto m = load_matrix(o.input);
  TrainConfig cfg;
  cfg.alpha = o.alpha;
  cfg.epochs = o.epochs;
  cfg.batch = o.batch;
  cfg.learning_rate = o.lr;
  cfg.decay = o.decay;
  cfg.grid = o.grid;
  cfg.grades = o.grades;
  cfg.hidden = o.hidden;
  cfg.seed = o.seed;
  cfg.clip_norm = o.clip > 0 ? std::optional<double>(o.clip) : std::nullopt;
  cfg.optimizer = o.optimizer == "sgd" ? OptimizerKind::sgd : OptimizerKind::adam;
  if (o.fixed_fill > 0) cfg.fill_mode = FillMode::fixed(o.fixed_fill);
  cfg.checkpoint_every = o.checkpoint_out.empty() ? 0 : o.checkpoint_every;

  std::optional<AgentParams> initial;
  if (!o.init_checkpoint.empty()) initial = agent_from_json(nlohmann::json::parse(read_file(o.init_checkpoint)));

  TrainHooks hooks;
  const int verbosity = log_level();
  const Index report_every = std::max<Index>(1, o.epochs / 20);
  hooks.on_epoch = [&](const EpochRecord& r, const TrainerState& st) {
    if (verbosity >= 1 && (r.epoch + 1) % report_every == 0) {
      std::fprintf(stderr, "epoch %zu coverage %.4f area %.4f reward %.4f baseline %.4f best-area %.4f\n", r.epoch + 1, r.coverage,
                   r.area, r.reward, r.baseline, st.best ? st.best->eval.area : 1.0);
    }
  };
  if (!o.checkpoint_out.empty()) {
    hooks.on_checkpoint = [&](const AgentParams& p, const TrainerState&) { write_file(o.checkpoint_out, to_json(p).dump() + "\n"); };
  }

  const auto result = train(m, cfg, std::move(initial), hooks);
  write_json(o.scheme, to_json(result.scheme));
  write_file(o.curves_out, curves_csv(result.history, o.curve_stride));
  if (!o.checkpoint_out.empty()) write_file(o.checkpoint_out, to_json(result.params).dump() + "\n");
  echo_config(o.scheme, "train", sub);
  std::cout << eval_json(result.scheme, result.eval).dump(2) << "\n";
  return result.eval.complete() ? 0 : kExitInfeasible;
}

int run_eval(const Options& o) {
  const auto m = load_matrix(o.input);
  const auto s = load_scheme(o.scheme);
  check_dims(m, s);
  std::cout << to_json(evaluate(s, PrefixIndex(m), o.alpha)).dump(2) << "\n";
  return 0;
}

int run_baseline(const Options& o) {
  const auto m = load_matrix(o.input);
  const auto s = o.fill > 0 ? vanilla_fill_scheme(m.dim(), o.block, o.fill) : vanilla_scheme(m.dim(), o.block);
  std::cout << eval_json(s, evaluate(s, PrefixIndex(m), o.alpha)).dump(2) << "\n";
  return 0;
}

int run_oracle(const Options& o) {
  const auto m = load_matrix(o.input);
  const auto r = brute_force_best(m, o.grid, o.grades, o.alpha, o.cap);
  ordered_json j;
  j["scheme"] = to_json(r.best_scheme);
  j["eval"] = to_json(r.best_eval);
  j["best_reward"] = r.best_reward;
  j["enumerated_count"] = r.enumerated_count;
  j["best_complete"] = r.best_complete_scheme ? eval_json(*r.best_complete_scheme, *r.best_complete_eval) : ordered_json(nullptr);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_verify(const Options& o) {
  const auto m = load_matrix(o.input);
  const auto s = load_scheme(o.scheme);
  check_dims(m, s);
  const Permutation p = Permutation::identity(m.dim());
  Rng rng(o.seed);
  double worst = 0.0;
  try {
    for (Index t = 0; t < o.trials; ++t) {
      std::vector<double> x(m.dim());
      for (auto& v : x) v = rng.uniform(-1.0, 1.0);
      const auto got = end_to_end(m, p, s, x);
      const auto want = dense_spmv(m, x);
      double scale = 0.0, err = 0.0;
      for (Index i = 0; i < want.size(); ++i) {
        scale = std::max(scale, std::abs(want[i]));
        err = std::max(err, std::abs(got[i] - want[i]));
      }
      worst = std::max(worst, scale == 0.0 ? err : err / scale);
    }
  } catch (const CoverageError& e) {
    std::cout << "error: incomplete coverage: " << e.what() << "\n";
    return kExitInfeasible;
  }
  ordered_json j;
  j["trials"] = o.trials;
  j["max_relative_error"] = worst;
  j["tolerance"] = o.tolerance;
  j["passed"] = worst < o.tolerance;
  std::cout << j.dump(2) << "\n";
  return worst < o.tolerance ? 0 : kExitVerifyFailed;
}

int run_render(const Options& o, const CLI::App& sub) {
  const auto m = load_matrix(o.input);
  const auto s = load_scheme(o.scheme);
  check_dims(m, s);
  write_file(o.output, render_svg(m, s));
  echo_config(o.output, "render", sub);
  return 0;
}

int run_tiles(const Options& o, const CLI::App& sub) {
  const auto s = load_scheme(o.scheme);
  const auto v = validate(s);
  if (!v.empty()) throw ArgumentError("invalid scheme: " + v.front().kind);
  const auto mf = tile_manifest(s, o.crossbar);
  write_json(o.output, to_json(mf));
  echo_config(o.output, "tiles", sub);
  std::cout << "tiles: " << mf.tile_count << "\noccupied: " << mf.occupied << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn and check crossbar block-mapping schemes for sparse matrices"};
  app.require_subcommand(1);
  Options o;

  auto* reorder = app.add_subcommand("reorder", "Cuthill-McKee reorder a symmetric matrix");
  reorder->add_option("--input", o.input, "Matrix Market file")->required()->check(CLI::ExistingFile);
  reorder->add_option("--perm-out", o.perm_out, "Permutation JSON output")->required();
  reorder->add_option("--out", o.output, "Reordered Matrix Market output")->required();
  reorder->add_flag("--no-reverse", o.no_reverse, "Plain Cuthill-McKee instead of the reversed ordering");

  auto* train_cmd = app.add_subcommand("train", "Learn a mapping scheme with the policy-gradient controller");
  train_cmd->add_option("--input", o.input)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--grid", o.grid, "Grid cell size k")->required();
  train_cmd->add_option("--grades", o.grades, "Fill grades G")->capture_default_str();
  train_cmd->add_option("--alpha", o.alpha, "Coverage weight a in the reward")->capture_default_str();
  train_cmd->add_option("--epochs", o.epochs)->capture_default_str();
  train_cmd->add_option("--seed", o.seed)->capture_default_str();
  train_cmd->add_option("--scheme-out", o.scheme, "Best scheme JSON output")->required();
  train_cmd->add_option("--curves-out", o.curves_out, "Training curves CSV output")->required();
  train_cmd->add_option("--batch", o.batch, "Samples per update")->capture_default_str();
  train_cmd->add_option("--lr", o.lr)->capture_default_str();
  train_cmd->add_option("--decay", o.decay, "Baseline decay")->capture_default_str();
  train_cmd->add_option("--hidden", o.hidden, "LSTM hidden size")->capture_default_str();
  train_cmd->add_option("--clip", o.clip, "Global gradient-norm clip (0 disables)")->capture_default_str();
  train_cmd->add_option("--optimizer", o.optimizer)->check(CLI::IsMember({"adam", "sgd"}))->capture_default_str();
  train_cmd->add_option("--fixed-fill", o.fixed_fill, "Use fixed-size fills of this size instead of dynamic grades")->capture_default_str();
  train_cmd->add_option("--curve-stride", o.curve_stride, "Write every n-th epoch to the curves CSV")->capture_default_str();
  train_cmd->add_option("--checkpoint-out", o.checkpoint_out, "Agent checkpoint JSON");
  train_cmd->add_option("--checkpoint-every", o.checkpoint_every, "Epochs between checkpoints")->capture_default_str();
  train_cmd->add_option("--init-checkpoint", o.init_checkpoint, "Start from a saved agent")->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "Score a scheme");
  eval->add_option("--input", o.input)->required()->check(CLI::ExistingFile);
  eval->add_option("--scheme", o.scheme)->required()->check(CLI::ExistingFile);
  eval->add_option("--alpha", o.alpha)->capture_default_str();

  auto* base = app.add_subcommand("baseline", "Fixed-size diagonal (and fill) scheme");
  base->add_option("--input", o.input)->required()->check(CLI::ExistingFile);
  base->add_option("--block", o.block)->required();
  base->add_option("--fill", o.fill)->capture_default_str();
  base->add_option("--alpha", o.alpha)->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "Exhaustive search over the action space");
  oracle->add_option("--input", o.input)->required()->check(CLI::ExistingFile);
  oracle->add_option("--grid", o.grid)->required();
  oracle->add_option("--grades", o.grades)->capture_default_str();
  oracle->add_option("--alpha", o.alpha)->capture_default_str();
  oracle->add_option("--cap", o.cap, "Maximum number of enumerated schemes")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Check block-wise SpMV against the dense product");
  verify->add_option("--input", o.input)->required()->check(CLI::ExistingFile);
  verify->add_option("--scheme", o.scheme)->required()->check(CLI::ExistingFile);
  verify->add_option("--trials", o.trials)->capture_default_str();
  verify->add_option("--seed", o.seed)->capture_default_str();
  verify->add_option("--tolerance", o.tolerance)->capture_default_str();

  auto* render = app.add_subcommand("render", "SVG picture of nonzeros and blocks");
  render->add_option("--input", o.input)->required()->check(CLI::ExistingFile);
  render->add_option("--scheme", o.scheme)->required()->check(CLI::ExistingFile);
  render->add_option("--out", o.output)->required();

  auto* tiles = app.add_subcommand("tiles", "Split blocks into crossbar tiles");
  tiles->add_option("--scheme", o.scheme)->required()->check(CLI::ExistingFile);
  tiles->add_option("--crossbar", o.crossbar)->capture_default_str();
  tiles->add_option("--out", o.output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*reorder) return run_reorder(o, *reorder);
    if (*train_cmd) return run_train(o, *train_cmd);
    if (*eval) return run_eval(o);
    if (*base) return run_baseline(o);
    if (*oracle) return run_oracle(o);
    if (*verify) return run_verify(o);
    if (*render) return run_render(o, *render);
    if (*tiles) return run_tiles(o, *tiles);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
