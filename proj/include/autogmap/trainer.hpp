#pragma once

// REINFORCE with an exponential-moving-average baseline, reverse-mode
// gradients of a trace's log-probability, and the sample/evaluate/update
// training loop.

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "autogmap/agent.hpp"
#include "autogmap/error.hpp"
#include "autogmap/evaluator.hpp"
#include "autogmap/matrix.hpp"
#include "autogmap/random.hpp"
#include "autogmap/scheme.hpp"

namespace autogmap {

/// Exact derivative of trace.log_prob with respect to every trainable
/// weight. x0, h0 and c0 are constants.
inline Weights grad_log_prob(const AgentParams& p, const SampleTrace& trace, double upstream = 1.0) {
  if (!trace.has_cache || (trace.calls.empty() && !trace.diagonal.bits.empty())) throw ArgumentError("trace carries no activation cache");
  if (trace.params_version != p.version) throw ArgumentError("trace was sampled under a different parameter version");
  Weights grad = p.weights.zeros_like();
  const Eigen::Index hidden = static_cast<Eigen::Index>(p.shape.hidden);
  std::vector<Vec> dh(trace.calls.size(), Vec::Zero(hidden));

  for (const auto& use : trace.heads) {
    Vec dlogits = -use.probs;
    dlogits[static_cast<Eigen::Index>(use.action)] += 1.0;
    dlogits *= upstream;
    const Index i = p.head_index(use.step);
    const Vec& h = trace.calls[use.call].h;
    if (use.kind == HeadKind::diagonal) {
      grad.diag_w[i].noalias() += dlogits * h.transpose();
      grad.diag_b[i] += dlogits;
      dh[use.call].noalias() += p.weights.diag_w[i].transpose() * dlogits;
    } else {
      grad.fill_w[i].noalias() += dlogits * h.transpose();
      grad.fill_b[i] += dlogits;
      dh[use.call].noalias() += p.weights.fill_w[i].transpose() * dlogits;
    }
  }

  Vec carry_h = Vec::Zero(hidden);  // from the next call's [h_prev; x], both equal to this call's h
  Vec carry_c = Vec::Zero(hidden);
  for (std::size_t n = trace.calls.size(); n-- > 0;) {
    const auto& k = trace.calls[n];
    const Vec dh_total = dh[n] + carry_h;
    const Vec& f = k.gates[kForget];
    const Vec& in = k.gates[kInput];
    const Vec& g = k.gates[kCell];
    const Vec& o = k.gates[kOutput];
    const Vec dc = carry_c + dh_total.cwiseProduct(o).cwiseProduct((1.0 - k.tanh_c.array().square()).matrix());
    std::array<Vec, 4> dpre;
    dpre[kOutput] = dh_total.cwiseProduct(k.tanh_c).cwiseProduct((o.array() * (1.0 - o.array())).matrix());
    dpre[kForget] = dc.cwiseProduct(k.c_prev).cwiseProduct((f.array() * (1.0 - f.array())).matrix());
    dpre[kInput] = dc.cwiseProduct(g).cwiseProduct((in.array() * (1.0 - in.array())).matrix());
    dpre[kCell] = dc.cwiseProduct(in).cwiseProduct((1.0 - g.array().square()).matrix());
    Vec z(2 * hidden);
    z << k.h_prev, k.input;
    Vec dz = Vec::Zero(2 * hidden);
    for (int q = 0; q < 4; ++q) {
      grad.gate_w[q].noalias() += dpre[q] * z.transpose();
      grad.gate_b[q] += dpre[q];
      dz.noalias() += p.weights.gate_w[q].transpose() * dpre[q];
    }
    carry_h = dz.head(hidden) + dz.tail(hidden);
    carry_c = dc.cwiseProduct(f);
  }
  return grad;
}

enum class OptimizerKind { adam, sgd };

/// Bias-corrected first/second-moment optimizer (or plain SGD).
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t steps = 0;
  std::vector<double> m;
  std::vector<double> v;

  /// Descends on `grad` (gradient of the loss).
  void step(Weights& w, const Weights& grad, double lr) {
    const auto g = grad.flatten();
    auto x = w.flatten();
    if (kind == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr * g[i];
    } else {
      if (m.size() != g.size()) {
        m.assign(g.size(), 0.0);
        v.assign(g.size(), 0.0);
      }
      ++steps;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
      for (std::size_t i = 0; i < x.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + epsilon);
      }
    }
    w.assign(x);
  }
};

struct TrainConfig {
  double alpha = 0.8;
  Index epochs = 1000;
  Index batch = 1;
  double learning_rate = 1e-3;
  double decay = 0.95;
  Index grid = 1;
  Index grades = 6;
  Index hidden = 10;
  std::uint64_t seed = 0;
  std::optional<double> clip_norm = 5.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  FillMode fill_mode = FillMode::dynamic();
  bool tied_heads = false;
  Index checkpoint_every = 0;  // 0 disables the checkpoint callback

  void check() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
    if (batch < 1) throw ArgumentError("batch must be at least 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
    if (!(decay >= 0.0 && decay < 1.0)) throw ArgumentError("decay must lie in [0, 1)");
    if (grid < 1) throw ArgumentError("grid size must be at least 1");
    if (grades < 2) throw ArgumentError("grades must be at least 2");
    if (hidden < 1) throw ArgumentError("hidden size must be at least 1");
    if (clip_norm && !(*clip_norm > 0.0)) throw ArgumentError("clip norm must be positive");
    if (fill_mode.kind == FillMode::Kind::fixed && fill_mode.fixed_size < 1) throw ArgumentError("fixed fill size must be at least 1");
  }
};

struct EpochRecord {
  Index epoch = 0;
  double coverage = 0.0;
  double area = 0.0;
  double reward = 0.0;
  double baseline = 0.0;
};

struct BestScheme {
  MappingScheme scheme;
  EvalResult eval;
  DiagonalActions diagonal;
  FillActions fill;
  Index epoch = 0;
};

struct TrainerState {
  double baseline = 0.0;
  Index epoch = 0;
  std::optional<BestScheme> best;
  std::vector<EpochRecord> history;
  OptimizerState optimizer;
};

/// Complete coverage beats incomplete; among complete schemes smaller area
/// wins; among incomplete ones higher reward wins. Earlier candidates keep
/// ties.
inline bool better_than(const EvalResult& cand, const EvalResult& incumbent) {
  if (cand.complete() != incumbent.complete()) return cand.complete();
  if (cand.complete()) return cand.area < incumbent.area;
  return cand.reward > incumbent.reward;
}

struct UpdateReport {
  double baseline = 0.0;
  std::vector<double> advantages;
  double grad_norm = 0.0;
};

/// Moves the baseline toward the mean reward, then steps the parameters
/// along the gradient of mean(-log_prob * (reward - baseline)).
inline UpdateReport reinforce_update(AgentParams& p, const std::vector<SampleTrace>& traces, const std::vector<double>& rewards,
                                     TrainerState& st, const TrainConfig& cfg) {
  if (traces.empty() || traces.size() != rewards.size()) throw ArgumentError("need one reward per trace and at least one trace");
  double mean = 0.0;
  for (double r : rewards) {
    if (!std::isfinite(r)) throw NumericError("non-finite reward at epoch " + std::to_string(st.epoch));
    mean += r;
  }
  mean /= static_cast<double>(rewards.size());
  st.baseline = cfg.decay * st.baseline + (1.0 - cfg.decay) * mean;

  UpdateReport report;
  report.baseline = st.baseline;
  Weights grad = p.weights.zeros_like();
  const double inv_m = 1.0 / static_cast<double>(traces.size());
  for (std::size_t s = 0; s < traces.size(); ++s) {
    const double adv = rewards[s] - st.baseline;
    report.advantages.push_back(adv);
    if (adv == 0.0) continue;
    // d(-log_prob * adv)/dθ = -adv * dlog_prob/dθ
    grad.axpy(1.0, grad_log_prob(p, traces[s], -adv * inv_m));
  }
  report.grad_norm = std::sqrt(grad.squared_norm());
  if (!std::isfinite(report.grad_norm)) {
    std::ostringstream msg;
    msg << "non-finite gradient at epoch " << st.epoch << " (baseline " << st.baseline << ", mean reward " << mean << ")";
    throw NumericError(msg.str());
  }
  if (cfg.clip_norm && report.grad_norm > *cfg.clip_norm) grad.scale(*cfg.clip_norm / report.grad_norm);
  st.optimizer.kind = cfg.optimizer;
  st.optimizer.step(p.weights, grad, cfg.learning_rate);
  ++p.version;
  if (!p.weights.all_finite()) throw NumericError("parameters became non-finite at epoch " + std::to_string(st.epoch));
  return report;
}

struct TrainResult {
  MappingScheme scheme;
  EvalResult eval;
  std::vector<EpochRecord> history;
  AgentParams params;
  TrainerState state;
};

struct TrainHooks {
  std::function<void(const EpochRecord&, const TrainerState&)> on_epoch;
  std::function<void(const AgentParams&, const TrainerState&)> on_checkpoint;
};

/// Sample M schemes per epoch, score them, update the agent, and keep the
/// best scheme seen. Deterministic for a given (matrix, cfg).
inline TrainResult train(const SparseMatrix& m, const TrainConfig& cfg, std::optional<AgentParams> initial = std::nullopt,
                         const TrainHooks& hooks = {}) {
  cfg.check();
  const GridSpec grid = make_grid(m.dim(), cfg.grid);
  const PrefixIndex index(m);
  const Index grades = cfg.fill_mode.kind == FillMode::Kind::fixed ? 2 : cfg.grades;

  AgentParams params = initial ? std::move(*initial) : init_agent(cfg.hidden, grades, grid.n_decisions(), cfg.seed, cfg.tied_heads);
  if (params.shape.n_steps != grid.n_decisions() || params.shape.grades != grades) throw ArgumentError("initial agent is not sized for this grid");
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainerState st;
  st.optimizer.kind = cfg.optimizer;
  st.history.reserve(cfg.epochs);
  std::vector<SampleTrace> traces(cfg.batch);
  std::vector<double> rewards(cfg.batch);
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    st.epoch = epoch;
    EpochRecord rec{epoch, 0.0, 0.0, 0.0, 0.0};
    for (Index s = 0; s < cfg.batch; ++s) {
      traces[s] = sample_scheme(params, grid, rng);
      MappingScheme scheme = decode_scheme(traces[s].diagonal, traces[s].fill, grid, grades, cfg.fill_mode);
      const EvalResult ev = evaluate(scheme, index, cfg.alpha);
      rewards[s] = ev.reward;
      rec.coverage += ev.coverage;
      rec.area += ev.area;
      rec.reward += ev.reward;
      if (!st.best || better_than(ev, st.best->eval)) {
        st.best = BestScheme{std::move(scheme), ev, traces[s].diagonal, traces[s].fill, epoch};
      }
    }
    const double inv = 1.0 / static_cast<double>(cfg.batch);
    rec.coverage *= inv;
    rec.area *= inv;
    rec.reward *= inv;
    rec.baseline = reinforce_update(params, traces, rewards, st, cfg).baseline;
    st.history.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec, st);
    if (hooks.on_checkpoint && cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) hooks.on_checkpoint(params, st);
  }
  st.epoch = cfg.epochs;
  if (!st.best) throw NoSamplesError();
  TrainResult out{st.best->scheme, st.best->eval, st.history, std::move(params), std::move(st)};
  return out;
}

/// CSV with header "epoch,coverage,area,reward,baseline"; every `stride`-th
/// epoch plus the last one.
inline std::string curves_csv(const std::vector<EpochRecord>& history, Index stride = 1) {
  std::ostringstream out;
  out << "epoch,coverage,area,reward,baseline\n";
  char buf[160];
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (stride > 1 && i % stride != 0 && i + 1 != history.size()) continue;
    const auto& r = history[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f\n", r.epoch, r.coverage, r.area, r.reward, r.baseline);
    out << buf;
  }
  return out.str();
}

}  // namespace autogmap
