// Copyright 2026 The hyperprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "hyperprobe/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "hyperprobe/error.hpp"

namespace hyperprobe::checkpoint {

namespace {

using probes::EuclideanProbeParams;
using probes::Geometry;
using probes::PoincareProbeParams;

constexpr char kMagic[4] = {'H', 'P', 'C', 'K'};
constexpr std::uint32_t kMaxName = 1u << 16;
constexpr std::uint32_t kMaxDim = 1u << 24;

enum Flags : std::uint8_t {
  kUseQ = 1,
  kTwoLayer = 2,
  kHasHeads = 4,
  kHeadsTrainable = 8,
};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
  template <typename U>
  void uint(U v) {
    unsigned char b[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, sizeof(U));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void matrix(const Eigen::MatrixXd& m) {
    uint(static_cast<std::uint32_t>(m.rows()));
    uint(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("checkpoint is truncated");
  }
  template <typename U>
  U uint() {
    unsigned char b[sizeof(U)];
    bytes(b, sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string str() {
    const auto n = uint<std::uint32_t>();
    if (n > kMaxName) throw DataError("checkpoint string too long");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, const char* what) {
    const auto r = uint<std::uint32_t>();
    const auto c = uint<std::uint32_t>();
    if (r != rows || c != cols) {
      throw DataError(std::string("checkpoint matrix ") + what + " has shape " +
                      std::to_string(r) + "x" + std::to_string(c) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = finite(f64(), what);
    return m;
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  static double finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DataError(std::string("non-finite value in checkpoint ") + what);
    return v;
  }

 private:
  std::istream& in_;
};

template <typename E>
E enum_from(std::uint8_t v, std::uint8_t max, const char* what) {
  if (v > max) throw DataError(std::string("checkpoint has an unknown ") + what);
  return static_cast<E>(v);
}

}  // namespace

void write(std::ostream& out, const Checkpoint& ckpt) {
  const auto& model = ckpt.model;
  Writer w(out);
  w.bytes(kMagic, 4);
  w.uint(kVersion);

  const auto* pp = std::get_if<PoincareProbeParams>(&model.probe);
  const auto* ep = std::get_if<EuclideanProbeParams>(&model.probe);
  std::uint8_t flags = 0;
  if (pp && pp->use_q) flags |= kUseQ;
  if (ep && ep->B2) flags |= kTwoLayer;
  if (model.heads) flags |= kHasHeads;
  if (model.heads && model.heads->trainable) flags |= kHeadsTrainable;

  w.uint(static_cast<std::uint8_t>(model.task));
  w.uint(static_cast<std::uint8_t>(model.geometry()));
  w.uint(static_cast<std::uint8_t>(ep ? ep->nonlinearity : probes::Nonlinearity::none));
  w.uint(flags);
  w.uint(static_cast<std::uint32_t>(model.input_dim()));
  w.uint(static_cast<std::uint32_t>(model.rank()));
  const geometry::Ball ball = pp ? pp->ball : geometry::Ball(1.0);
  w.f64(ball.c.value());
  w.f64(ball.ball_eps);
  w.f64(ball.atanh_eps);

  if (pp) {
    w.matrix(pp->P);
    w.matrix(pp->Q);
  } else {
    w.matrix(ep->B1);
    if (ep->B2) w.matrix(*ep->B2);
  }
  if (model.heads) {
    w.matrix(model.heads->pos);
    w.matrix(model.heads->neg);
  }

  w.uint(static_cast<std::uint32_t>(ckpt.optimizer.size()));
  for (const auto& slot : ckpt.optimizer) {
    w.str(slot.name);
    const bool riemannian = std::holds_alternative<optim::RiemannianAdamState>(slot.state);
    w.uint(static_cast<std::uint8_t>(riemannian ? 1 : 0));
    const optim::AdamState& st = slot.adam();
    w.uint(st.step_count);
    w.f64(st.hyper.lr);
    w.f64(st.hyper.beta1);
    w.f64(st.hyper.beta2);
    w.f64(st.hyper.eps);
    w.matrix(st.first_moment);
    w.matrix(st.second_moment);
  }

  w.uint(static_cast<std::uint32_t>(ckpt.metadata.size()));
  for (const auto& [key, value] : ckpt.metadata) {
    w.str(key);
    w.str(value);
  }
  if (!out) throw DataError("failed to write checkpoint");
}

void write(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write(out, ckpt);
  out.flush();
  if (!out) throw DataError("failed to write " + path.string());
}

Checkpoint read(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.bytes(magic, 4);
  if (!std::equal(magic, magic + 4, kMagic)) throw DataError("not a checkpoint (bad magic)");
  const auto version = r.uint<std::uint32_t>();
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ckpt;
  auto& model = ckpt.model;
  model.task = enum_from<probes::Task>(r.uint<std::uint8_t>(), 3, "task");
  const auto geometry = enum_from<Geometry>(r.uint<std::uint8_t>(), 1, "geometry");
  const auto nonlinearity =
      enum_from<probes::Nonlinearity>(r.uint<std::uint8_t>(), 3, "nonlinearity");
  const auto flags = r.uint<std::uint8_t>();
  if (flags & ~0x0F) throw DataError("checkpoint has unknown flags");
  const Eigen::Index n = r.uint<std::uint32_t>();
  const Eigen::Index k = r.uint<std::uint32_t>();
  if (n == 0 || k == 0 || n > kMaxDim || k > kMaxDim) throw DataError("checkpoint dimensions out of range");
  const double c = Reader::finite(r.f64(), "curvature");
  const double ball_eps = Reader::finite(r.f64(), "ball margin");
  const double atanh_eps = Reader::finite(r.f64(), "atanh margin");
  if (!(c > 0) || !(ball_eps > 0 && ball_eps < 1) || !(atanh_eps > 0 && atanh_eps < 1)) {
    throw DataError("checkpoint geometry constants out of range");
  }
  const geometry::Ball ball(c, ball_eps, atanh_eps);

  if (geometry == Geometry::poincare) {
    if (nonlinearity != probes::Nonlinearity::none || (flags & kTwoLayer)) {
      throw DataError("checkpoint: poincare probe with euclidean-only options");
    }
    PoincareProbeParams p;
    p.P = r.matrix(k, n, "P");
    p.Q = r.matrix(k, k, "Q");
    p.ball = ball;
    p.use_q = flags & kUseQ;
    model.probe = std::move(p);
  } else {
    EuclideanProbeParams p;
    p.B1 = r.matrix(k, n, "B1");
    if (flags & kTwoLayer) p.B2 = r.matrix(k, k, "B2");
    p.nonlinearity = nonlinearity;
    model.probe = std::move(p);
  }

  const bool has_heads = flags & kHasHeads;
  if (has_heads != (model.task == probes::Task::sentiment)) {
    throw DataError("checkpoint: sentiment heads do not match the task");
  }
  if (has_heads) {
    probes::SentimentHeads h;
    h.pos = r.matrix(k, 1, "positive head");
    h.neg = r.matrix(k, 1, "negative head");
    h.trainable = flags & kHeadsTrainable;
    if (geometry == Geometry::poincare &&
        (!geometry::inside_ball(h.pos, ball) || !geometry::inside_ball(h.neg, ball))) {
      throw DataError("checkpoint: sentiment head outside the ball");
    }
    model.heads = std::move(h);
  }

  const auto params = probes::parameters(model);
  const auto slot_count = r.uint<std::uint32_t>();
  if (slot_count > params.size()) throw DataError("checkpoint has too many optimizer slots");
  std::vector<const probes::ParamRef*> trainable;
  for (const auto& p : params)
    if (p.trainable) trainable.push_back(&p);
  if (slot_count != 0 && slot_count != trainable.size()) {
    throw DataError("checkpoint optimizer does not cover the trainable parameters");
  }
  for (std::uint32_t s = 0; s < slot_count; ++s) {
    train::OptimizerSlot slot;
    slot.name = r.str();
    const auto kind = r.uint<std::uint8_t>();
    if (kind > 1) throw DataError("checkpoint has an unknown optimizer kind");
    const auto& ref = *trainable[s];
    if (slot.name != ref.name) {
      throw DataError("checkpoint optimizer slot " + slot.name + " does not match " + ref.name);
    }
    slot.manifold = ref.manifold;
    if ((kind == 1) != (ref.manifold == probes::Manifold::poincare_ball)) {
      throw DataError("checkpoint optimizer kind does not match the parameter manifold");
    }
    optim::AdamState st;
    st.step_count = r.uint<std::uint64_t>();
    st.hyper.lr = Reader::finite(r.f64(), "lr");
    st.hyper.beta1 = Reader::finite(r.f64(), "beta1");
    st.hyper.beta2 = Reader::finite(r.f64(), "beta2");
    st.hyper.eps = Reader::finite(r.f64(), "eps");
    const auto size = static_cast<Eigen::Index>(ref.values.size());
    st.first_moment = r.matrix(size, 1, "first moment");
    st.second_moment = r.matrix(size, 1, "second moment");
    if (kind == 1) {
      optim::RiemannianAdamState rs;
      static_cast<optim::AdamState&>(rs) = std::move(st);
      slot.state = std::move(rs);
    } else {
      slot.state = std::move(st);
    }
    ckpt.optimizer.push_back(std::move(slot));
  }

  const auto meta_count = r.uint<std::uint32_t>();
  if (meta_count > kMaxName) throw DataError("checkpoint metadata too large");
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    auto key = r.str();
    auto value = r.str();
    ckpt.metadata.emplace_back(std::move(key), std::move(value));
  }
  if (!r.at_end()) throw DataError("trailing bytes after checkpoint");
  return ckpt;
}

Checkpoint read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read(in);
}

}  // namespace hyperprobe::checkpoint
