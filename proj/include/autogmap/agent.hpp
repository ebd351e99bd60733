#pragma once

// Sampling controller: an LSTM whose per-step output feeds a diagonal head
// (2 classes) and, after every "start new block" action, one more LSTM step
// and a fill head (G classes). Each step's hidden output becomes the next
// step's input.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "autogmap/error.hpp"
#include "autogmap/random.hpp"
#include "autogmap/scheme.hpp"

namespace autogmap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct AgentShape {
  Index hidden = 10;
  Index grades = 6;
  Index n_steps = 0;
  bool tied_heads = false;  // share one diagonal and one fill head across steps

  Index n_heads() const noexcept { return tied_heads ? (n_steps > 0 ? 1 : 0) : n_steps; }
  friend bool operator==(const AgentShape&, const AgentShape&) = default;
};

enum Gate : int { kForget = 0, kInput = 1, kCell = 2, kOutput = 3 };

/// Trainable arrays. Gradients and optimizer moments share this layout.
struct Weights {
  std::array<Mat, 4> gate_w;  // H x 2H, acting on [h_prev; x]
  std::array<Vec, 4> gate_b;
  std::vector<Mat> diag_w;  // 2 x H
  std::vector<Vec> diag_b;
  std::vector<Mat> fill_w;  // G x H
  std::vector<Vec> fill_b;

  template <typename F>
  void for_each(F&& f) {
    for (auto& m : gate_w) f(m.data(), static_cast<Index>(m.size()));
    for (auto& v : gate_b) f(v.data(), static_cast<Index>(v.size()));
    for (auto& m : diag_w) f(m.data(), static_cast<Index>(m.size()));
    for (auto& v : diag_b) f(v.data(), static_cast<Index>(v.size()));
    for (auto& m : fill_w) f(m.data(), static_cast<Index>(m.size()));
    for (auto& v : fill_b) f(v.data(), static_cast<Index>(v.size()));
  }

  template <typename F>
  void for_each(F&& f) const {
    const_cast<Weights*>(this)->for_each([&](double* p, Index n) { f(static_cast<const double*>(p), n); });
  }

  /// Same shapes, all zero.
  Weights zeros_like() const {
    Weights z = *this;
    z.for_each([](double* p, Index n) { std::fill(p, p + n, 0.0); });
    return z;
  }

  Index size() const {
    Index n = 0;
    for_each([&](const double*, Index k) { n += k; });
    return n;
  }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(size());
    for_each([&](const double* p, Index n) { out.insert(out.end(), p, p + n); });
    return out;
  }

  void assign(std::span<const double> flat) {
    if (flat.size() != size()) throw ArgumentError("flat weight vector has wrong length");
    Index pos = 0;
    for_each([&](double* p, Index n) {
      std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos), flat.begin() + static_cast<std::ptrdiff_t>(pos + n), p);
      pos += n;
    });
  }

  double squared_norm() const {
    double s = 0.0;
    for_each([&](const double* p, Index n) {
      for (Index i = 0; i < n; ++i) s += p[i] * p[i];
    });
    return s;
  }

  bool all_finite() const {
    bool ok = true;
    for_each([&](const double* p, Index n) {
      for (Index i = 0; i < n; ++i) ok = ok && std::isfinite(p[i]);
    });
    return ok;
  }

  void scale(double factor) {
    for_each([&](double* p, Index n) {
      for (Index i = 0; i < n; ++i) p[i] *= factor;
    });
  }

  /// this += factor * other
  void axpy(double factor, const Weights& other) {
    auto src = other.flatten();
    Index pos = 0;
    for_each([&](double* p, Index n) {
      for (Index i = 0; i < n; ++i) p[i] += factor * src[pos + i];
      pos += n;
    });
  }

  friend bool operator==(const Weights& a, const Weights& b) { return a.flatten() == b.flatten(); }
};

struct AgentParams {
  AgentShape shape;
  std::uint64_t seed = 0;
  Weights weights;
  Vec x0;  // fixed initial input
  Vec h0;  // fixed initial hidden state
  Vec c0;  // fixed initial cell state
  // Bumped on every parameter update; traces remember the version they were
  // sampled under so stale activation caches are rejected.
  std::uint64_t version = 0;

  Index head_index(Index step) const noexcept { return shape.tied_heads ? 0 : step; }

  friend bool operator==(const AgentParams& a, const AgentParams& b) {
    return a.shape == b.shape && a.seed == b.seed && a.weights == b.weights && a.x0 == b.x0 && a.h0 == b.h0 && a.c0 == b.c0;
  }
};

inline constexpr double kInitScale = 0.08;

/// Uniform [-0.08, 0.08] weights, plus x0/h0/c0 drawn once from the same
/// seeded stream.
inline AgentParams init_agent(Index hidden, Index grades, Index n_steps, std::uint64_t seed, bool tied_heads = false) {
  if (hidden < 1) throw ArgumentError("hidden size must be at least 1");
  if (grades < 2) throw ArgumentError("fill grades must be at least 2");
  AgentParams p;
  p.shape = {hidden, grades, n_steps, tied_heads};
  p.seed = seed;
  Rng rng(seed);
  const auto draw = [&](Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index c = 0; c < cols; ++c)
      for (Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-kInitScale, kInitScale);
    return m;
  };
  const auto draw_vec = [&](Index n) -> Vec { return draw(n, 1).col(0); };
  for (int q = 0; q < 4; ++q) {
    p.weights.gate_w[q] = draw(hidden, 2 * hidden);
    p.weights.gate_b[q] = draw_vec(hidden);
  }
  const Index heads = p.shape.n_heads();
  for (Index t = 0; t < heads; ++t) {
    p.weights.diag_w.push_back(draw(2, hidden));
    p.weights.diag_b.push_back(draw_vec(2));
  }
  for (Index t = 0; t < heads; ++t) {
    p.weights.fill_w.push_back(draw(grades, hidden));
    p.weights.fill_b.push_back(draw_vec(grades));
  }
  p.x0 = draw_vec(hidden);
  p.h0 = draw_vec(hidden);
  p.c0 = draw_vec(hidden);
  return p;
}

struct LSTMState {
  Vec h;
  Vec c;
};

/// Activations of one LSTM call, kept for backpropagation through time.
struct StepCache {
  Vec input;
  Vec h_prev;
  Vec c_prev;
  std::array<Vec, 4> gates;  // post-activation f, i, g, o
  Vec c;
  Vec tanh_c;
  Vec h;
};

namespace detail {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

inline StepCache lstm_forward(const Weights& w, const Vec& x, const LSTMState& s) {
  const Index hidden = static_cast<Index>(s.h.size());
  if (static_cast<Index>(x.size()) != hidden || static_cast<Index>(s.c.size()) != hidden ||
      static_cast<Index>(w.gate_w[0].cols()) != 2 * hidden) {
    throw ArgumentError("LSTM dimension mismatch");
  }
  StepCache k;
  k.input = x;
  k.h_prev = s.h;
  k.c_prev = s.c;
  Vec z(2 * hidden);
  z << s.h, x;
  for (int q = 0; q < 4; ++q) {
    Vec pre = w.gate_w[q] * z + w.gate_b[q];
    k.gates[q] = q == kCell ? Vec(pre.array().tanh()) : Vec(pre.unaryExpr(&sigmoid));
  }
  k.c = k.gates[kForget].cwiseProduct(s.c) + k.gates[kInput].cwiseProduct(k.gates[kCell]);
  k.tanh_c = k.c.array().tanh();
  k.h = k.gates[kOutput].cwiseProduct(k.tanh_c);
  return k;
}

inline Vec log_softmax(const Vec& logits) {
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return logits.array() - lse;
}

}  // namespace detail

/// f = σ(W_f[h,x]+b_f), i = σ(..), g = tanh(..), o = σ(..);
/// c' = f∘c + i∘g, h' = o∘tanh(c').
inline LSTMState lstm_step(const AgentParams& p, const Vec& x, const LSTMState& s) {
  auto k = detail::lstm_forward(p.weights, x, s);
  return {std::move(k.h), std::move(k.c)};
}

enum class HeadKind { diagonal, fill };

/// Logits W h + b of the step-t head.
inline Vec head_logits(const AgentParams& p, Index t, HeadKind kind, const Vec& h) {
  if (t >= p.shape.n_steps) throw ArgumentError("head step " + std::to_string(t) + " out of range");
  const Index i = p.head_index(t);
  return kind == HeadKind::diagonal ? Vec(p.weights.diag_w[i] * h + p.weights.diag_b[i])
                                    : Vec(p.weights.fill_w[i] * h + p.weights.fill_b[i]);
}

/// Max-subtracted softmax.
inline Vec softmax(const Vec& logits) {
  Vec e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

inline Vec head_probs(const AgentParams& p, Index t, HeadKind kind, const Vec& h) { return softmax(head_logits(p, t, kind, h)); }

/// One head evaluation within a trace.
struct HeadUse {
  Index step = 0;
  HeadKind kind = HeadKind::diagonal;
  Index call = 0;  // index of the LSTM call whose h fed the head
  Vec probs;
  Index action = 0;
};

struct SampleTrace {
  DiagonalActions diagonal;
  FillActions fill;
  double log_prob = 0.0;
  std::vector<StepCache> calls;
  std::vector<HeadUse> heads;
  std::uint64_t params_version = 0;
  bool has_cache = false;
};

namespace detail {

// Runs the generative process; `choose(kind, step, probs, log_probs)` picks
// each action.
template <typename Chooser>
SampleTrace rollout(const AgentParams& p, Chooser&& choose) {
  SampleTrace tr;
  tr.params_version = p.version;
  tr.has_cache = true;
  LSTMState state{p.h0, p.c0};
  Vec input = p.x0;
  const auto run_head = [&](Index step, HeadKind kind) {
    StepCache k = lstm_forward(p.weights, input, state);
    state = {k.h, k.c};
    input = k.h;
    const Vec logits = head_logits(p, step, kind, k.h);
    const Vec logp = log_softmax(logits);
    const Vec probs = logp.array().exp();
    const Index a = choose(kind, step, probs);
    tr.log_prob += logp[static_cast<Eigen::Index>(a)];
    tr.calls.push_back(std::move(k));
    tr.heads.push_back({step, kind, tr.calls.size() - 1, probs, a});
    return a;
  };
  for (Index t = 0; t < p.shape.n_steps; ++t) {
    const Index d = run_head(t, HeadKind::diagonal);
    tr.diagonal.bits.push_back(static_cast<std::uint8_t>(d));
    if (d == 0) tr.fill.grades.push_back(static_cast<std::uint32_t>(run_head(t, HeadKind::fill)));
  }
  return tr;
}

inline Index sample_index(const Vec& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<Index>(i);
  }
  return static_cast<Index>(probs.size() - 1);
}

}  // namespace detail

/// Multinomial sampling of a full action sequence.
inline SampleTrace sample_scheme(const AgentParams& p, const GridSpec& g, Rng& rng) {
  if (p.shape.n_steps != g.n_decisions()) {
    throw ArgumentError("agent has " + std::to_string(p.shape.n_steps) + " steps but grid needs " + std::to_string(g.n_decisions()));
  }
  return detail::rollout(p, [&](HeadKind, Index, const Vec& probs) { return detail::sample_index(probs, rng); });
}

/// Teacher-forced replay of given actions in sampling order.
inline SampleTrace replay(const AgentParams& p, const DiagonalActions& diag, const FillActions& fill) {
  if (diag.bits.size() != p.shape.n_steps) throw ArgumentError("diagonal action length does not match agent steps");
  if (fill.grades.size() != diag.zeros()) throw ArgumentError("fill actions must pair one-to-one with diagonal zeros");
  Index next_fill = 0;
  return detail::rollout(p, [&](HeadKind kind, Index step, const Vec&) -> Index {
    if (kind == HeadKind::diagonal) {
      if (diag.bits[step] > 1) throw ArgumentError("diagonal actions must be 0 or 1");
      return diag.bits[step];
    }
    const auto grade = fill.grades[next_fill++];
    if (grade >= p.shape.grades) throw ArgumentError("fill grade out of range");
    return grade;
  });
}

inline double log_prob_of(const AgentParams& p, const DiagonalActions& diag, const FillActions& fill, const GridSpec& g) {
  if (p.shape.n_steps != g.n_decisions()) throw ArgumentError("agent is not sized for this grid");
  return replay(p, diag, fill).log_prob;
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json to_json(const AgentParams& p) {
  nlohmann::json j;
  j["format"] = "autogmap-agent";
  j["version"] = kCheckpointVersion;
  j["seed"] = p.seed;
  j["hidden"] = p.shape.hidden;
  j["grades"] = p.shape.grades;
  j["n_steps"] = p.shape.n_steps;
  j["tied_heads"] = p.shape.tied_heads;
  j["weights"] = p.weights.flatten();
  j["x0"] = std::vector<double>(p.x0.data(), p.x0.data() + p.x0.size());
  j["h0"] = std::vector<double>(p.h0.data(), p.h0.data() + p.h0.size());
  j["c0"] = std::vector<double>(p.c0.data(), p.c0.data() + p.c0.size());
  return j;
}

inline AgentParams agent_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "autogmap-agent") throw ArgumentError("not an agent checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) throw ArgumentError("unsupported checkpoint version");
    AgentParams p = init_agent(j.at("hidden").get<Index>(), j.at("grades").get<Index>(), j.at("n_steps").get<Index>(),
                               j.at("seed").get<std::uint64_t>(), j.at("tied_heads").get<bool>());
    p.weights.assign(j.at("weights").get<std::vector<double>>());
    const auto load = [&](const char* key, Vec& v) {
      auto vals = j.at(key).get<std::vector<double>>();
      if (static_cast<Eigen::Index>(vals.size()) != v.size()) throw ArgumentError(std::string("checkpoint field '") + key + "' has wrong length");
      v = Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    };
    load("x0", p.x0);
    load("h0", p.h0);
    load("c0", p.c0);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed agent checkpoint: ") + e.what());
  }
}

}  // namespace autogmap
