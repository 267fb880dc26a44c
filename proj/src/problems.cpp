#include "moo/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace moo {

MooProblem::MooProblem(int m, int d, int pool_size) : m_(m), d_(d), pool_size_(pool_size) {
  if (m < 1) throw std::invalid_argument("MooProblem: task count must be >= 1");
  if (d < 1) throw std::invalid_argument("MooProblem: parameter dimension must be >= 1");
  if (pool_size < 0) throw std::invalid_argument("MooProblem: pool size must be >= 0");
}

void MooProblem::check_theta(const Vec& theta) const {
  if (theta.size() != d_) throw std::invalid_argument("MooProblem: theta dimension mismatch");
}

void MooProblem::check_weights(const Vec& w) const {
  if (w.size() != m_) throw std::invalid_argument("MooProblem: weight vector length mismatch");
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) throw std::invalid_argument("MooProblem: non-finite weight");
  }
}

void MooProblem::check_batch(const Batch& batch) const {
  for (int idx : batch.indices) {
    if (idx < 0 || idx >= pool_size_) throw std::invalid_argument("MooProblem: batch index out of range");
  }
}

CountedProblem::CountedProblem(const MooProblem& inner)
    : MooProblem(inner.num_tasks(), inner.dim(), inner.pool_size()), inner_(inner) {}

Vec CountedProblem::eval_losses(const Vec& theta, const Batch& batch) const {
  counters_.loss_evals += 1;
  return inner_.eval_losses(theta, batch);
}

Mat CountedProblem::eval_gradients(const Vec& theta, const Batch& batch) const {
  counters_.pertask_gevals += m_;
  return inner_.eval_gradients(theta, batch);
}

Vec CountedProblem::eval_weighted_gradient(const Vec& theta, const Vec& w, const Batch& batch) const {
  counters_.weighted_gevals += 1;
  return inner_.eval_weighted_gradient(theta, w, batch);
}

// --- QuadraticSuite ---

namespace {
int validate_quadratic_spec(const QuadraticSpec& spec) {
  if (spec.centers.empty()) throw std::invalid_argument("QuadraticSpec: no tasks");
  if (spec.centers.size() != spec.curvatures.size())
    throw std::invalid_argument("QuadraticSpec: centers/curvatures count mismatch");
  const int d = static_cast<int>(spec.centers[0].size());
  if (d < 1) throw std::invalid_argument("QuadraticSpec: empty center");
  for (std::size_t i = 0; i < spec.centers.size(); ++i) {
    if (spec.centers[i].size() != d) throw std::invalid_argument("QuadraticSpec: center dimension mismatch");
    const Mat& a = spec.curvatures[i];
    if (a.rows() != d || a.cols() != d)
      throw std::invalid_argument("QuadraticSpec: curvature dimension mismatch");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("QuadraticSpec: curvature not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("QuadraticSpec: curvature not positive definite");
  }
  return d;
}
}  // namespace

QuadraticSuite::QuadraticSuite(QuadraticSpec spec)
    : MooProblem(static_cast<int>(spec.centers.size()), validate_quadratic_spec(spec), 0),
      spec_(std::move(spec)) {
  smoothness_ = Vec(m_);
  for (int i = 0; i < m_; ++i) {
    Eigen::SelfAdjointEigenSolver<Mat> es(spec_.curvatures[i], Eigen::EigenvaluesOnly);
    smoothness_[i] = es.eigenvalues().maxCoeff();
  }
  if (m_ == 2) {
    bool identity = true;
    for (const Mat& a : spec_.curvatures) {
      if ((a - Mat::Identity(d_, d_)).cwiseAbs().maxCoeff() > 1e-12) identity = false;
    }
    identity_pair_ = identity;
    if (identity_pair_)
      certificate_ = "Pareto-stationary set = segment between the two task centers";
  }
  if (m_ == 1) certificate_ = "Pareto-stationary point = the task center";
}

Vec QuadraticSuite::eval_losses(const Vec& theta, const Batch& batch) const {
  check_theta(theta);
  check_batch(batch);
  Vec out(m_);
  for (int i = 0; i < m_; ++i) {
    Vec diff = theta - spec_.centers[i];
    out[i] = 0.5 * diff.dot(spec_.curvatures[i] * diff);
  }
  return out;
}

Mat QuadraticSuite::eval_gradients(const Vec& theta, const Batch& batch) const {
  check_theta(theta);
  check_batch(batch);
  Mat g(m_, d_);
  for (int i = 0; i < m_; ++i) g.row(i) = (spec_.curvatures[i] * (theta - spec_.centers[i])).transpose();
  return g;
}

Vec QuadraticSuite::eval_weighted_gradient(const Vec& theta, const Vec& w, const Batch& batch) const {
  check_theta(theta);
  check_weights(w);
  check_batch(batch);
  Vec g = Vec::Zero(d_);
  for (int i = 0; i < m_; ++i) g += w[i] * (spec_.curvatures[i] * (theta - spec_.centers[i]));
  return g;
}

std::optional<std::pair<Vec, Vec>> QuadraticSuite::pareto_segment() const {
  if (!identity_pair_) return std::nullopt;
  return std::make_pair(spec_.centers[0], spec_.centers[1]);
}

// --- MlpProblem ---

namespace {
// Weight matrices are packed row-major: W(r, c) = theta[offset + r*in + c].
// A row-major map keeps reads/writes matching that layout.
using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int mlp_param_count(const MlpSpec& spec) {
  if (spec.input_dim < 1) throw std::invalid_argument("MlpSpec: input_dim must be >= 1");
  if (spec.shared_widths.empty()) throw std::invalid_argument("MlpSpec: need at least one shared layer");
  if (spec.head_hidden_widths.empty()) throw std::invalid_argument("MlpSpec: need at least one task head");
  if (spec.pool_size < 1) throw std::invalid_argument("MlpSpec: pool_size must be >= 1");
  if (spec.noise_scale < 0.0) throw std::invalid_argument("MlpSpec: noise_scale must be >= 0");
  for (int w : spec.shared_widths)
    if (w < 1) throw std::invalid_argument("MlpSpec: shared width must be >= 1");
  int total = 0;
  int in = spec.input_dim;
  for (int w : spec.shared_widths) {
    total += w * (in + 1);
    in = w;
  }
  const int trunk_out = in;
  for (const auto& head : spec.head_hidden_widths) {
    int hin = trunk_out;
    for (int w : head) {
      if (w < 1) throw std::invalid_argument("MlpSpec: head width must be >= 1");
      total += w * (hin + 1);
      hin = w;
    }
    total += 1 * (hin + 1);  // scalar output layer
  }
  return total;
}
}  // namespace

MlpProblem::MlpProblem(MlpSpec spec)
    : MooProblem(static_cast<int>(spec.head_hidden_widths.size()), mlp_param_count(spec),
                 spec.pool_size),
      spec_(std::move(spec)) {
  int offset = 0;
  int in = spec_.input_dim;
  for (int w : spec_.shared_widths) {
    shared_layers_.push_back({in, w, offset});
    offset += w * (in + 1);
    in = w;
  }
  const int trunk_out = in;
  head_layers_.resize(m_);
  for (int t = 0; t < m_; ++t) {
    int hin = trunk_out;
    for (int w : spec_.head_hidden_widths[t]) {
      head_layers_[t].push_back({hin, w, offset});
      offset += w * (hin + 1);
      hin = w;
    }
    head_layers_[t].push_back({hin, 1, offset});
    offset += 1 * (hin + 1);
  }

  // Deterministic data generation: inputs, then a random teacher network in
  // parameter-packing order, then per-row/per-task target noise.
  RngState rng(spec_.data_seed);
  inputs_ = Mat(pool_size_, spec_.input_dim);
  for (int p = 0; p < pool_size_; ++p)
    for (int j = 0; j < spec_.input_dim; ++j) inputs_(p, j) = rng.next_gaussian();

  Vec teacher(d_);
  auto fill_layer = [&](const LayerShape& L) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(L.in));
    for (int k = 0; k < L.out * L.in; ++k) teacher[L.offset + k] = scale * rng.next_gaussian();
    for (int k = 0; k < L.out; ++k) teacher[L.offset + L.out * L.in + k] = 0.1 * rng.next_gaussian();
  };
  for (const auto& L : shared_layers_) fill_layer(L);
  for (const auto& head : head_layers_)
    for (const auto& L : head) fill_layer(L);

  // Teacher predictions become the regression targets.
  targets_ = Mat(pool_size_, m_);
  {
    Mat a = inputs_.transpose();  // input_dim x pool
    auto layer_fwd = [&](const LayerShape& L, const Mat& prev, bool linear) {
      Eigen::Map<const RowMajorMat> wmat(teacher.data() + L.offset, L.out, L.in);
      Eigen::Map<const Vec> b(teacher.data() + L.offset + L.out * L.in, L.out);
      Mat z = wmat * prev;
      z.colwise() += b;
      return linear ? z : Mat(z.array().tanh());
    };
    for (const auto& L : shared_layers_) a = layer_fwd(L, a, false);
    for (int t = 0; t < m_; ++t) {
      Mat h = a;
      const auto& head = head_layers_[t];
      for (std::size_t li = 0; li + 1 < head.size(); ++li) h = layer_fwd(head[li], h, false);
      Mat yhat = layer_fwd(head.back(), h, true);  // 1 x pool
      for (int p = 0; p < pool_size_; ++p) targets_(p, t) = yhat(0, p);
    }
  }
  for (int p = 0; p < pool_size_; ++p)
    for (int t = 0; t < m_; ++t) targets_(p, t) += spec_.noise_scale * rng.next_gaussian();
}

Vec MlpProblem::weighted_backward(const Vec& theta, const Vec& w, const Batch& batch,
                                  Vec* losses_out) const {
  // Gather the batch rows.
  Mat x;
  Mat y;
  if (batch.is_full()) {
    x = inputs_;
    y = targets_;
  } else {
    const int nb = static_cast<int>(batch.indices.size());
    x = Mat(nb, spec_.input_dim);
    y = Mat(nb, m_);
    for (int r = 0; r < nb; ++r) {
      x.row(r) = inputs_.row(batch.indices[r]);
      y.row(r) = targets_.row(batch.indices[r]);
    }
  }
  const int nb = static_cast<int>(x.rows());

  // Forward: trunk activations (index 0 = input), then each head's.
  std::vector<Mat> trunk;  // trunk[0] = input, trunk[l+1] = activation of shared layer l
  trunk.reserve(shared_layers_.size() + 1);
  trunk.push_back(x.transpose());
  for (const auto& L : shared_layers_) {
    Eigen::Map<const RowMajorMat> wmat(theta.data() + L.offset, L.out, L.in);
    Eigen::Map<const Vec> b(theta.data() + L.offset + L.out * L.in, L.out);
    Mat z = wmat * trunk.back();
    z.colwise() += b;
    trunk.push_back(z.array().tanh());
  }

  std::vector<std::vector<Mat>> heads(m_);  // heads[t][0] = trunk output, then hidden activations
  std::vector<Mat> yhat(m_);                // 1 x nb each
  for (int t = 0; t < m_; ++t) {
    heads[t].push_back(trunk.back());
    const auto& head = head_layers_[t];
    for (std::size_t li = 0; li + 1 < head.size(); ++li) {
      const auto& L = head[li];
      Eigen::Map<const RowMajorMat> wmat(theta.data() + L.offset, L.out, L.in);
      Eigen::Map<const Vec> b(theta.data() + L.offset + L.out * L.in, L.out);
      Mat z = wmat * heads[t].back();
      z.colwise() += b;
      heads[t].push_back(z.array().tanh());
    }
    const auto& L = head.back();
    Eigen::Map<const RowMajorMat> wmat(theta.data() + L.offset, L.out, L.in);
    Eigen::Map<const Vec> b(theta.data() + L.offset + L.out * L.in, L.out);
    Mat z = wmat * heads[t].back();
    z.colwise() += b;
    yhat[t] = z;  // linear scalar output
  }

  if (losses_out) {
    losses_out->resize(m_);
    for (int t = 0; t < m_; ++t) {
      double acc = 0.0;
      for (int c = 0; c < nb; ++c) {
        double e = yhat[t](0, c) - y(c, t);
        acc += e * e;
      }
      (*losses_out)[t] = acc / static_cast<double>(nb);
    }
  }

  // Backward.
  Vec grad = Vec::Zero(d_);
  if ((w.array() == 0.0).all()) return grad;  // pure loss evaluation
  Mat trunk_delta = Mat::Zero(trunk.back().rows(), nb);  // dL/d(trunk output)
  for (int t = 0; t < m_; ++t) {
    if (w[t] == 0.0) continue;  // zero weight contributes nothing
    Mat delta(1, nb);  // dL/d(yhat_t)
    for (int c = 0; c < nb; ++c)
      delta(0, c) = w[t] * 2.0 * (yhat[t](0, c) - y(c, t)) / static_cast<double>(nb);
    const auto& head = head_layers_[t];
    // Output layer is linear: dL/dz = delta.
    Mat dz = delta;
    for (int li = static_cast<int>(head.size()) - 1; li >= 0; --li) {
      const auto& L = head[li];
      const Mat& a_in = heads[t][li];
      Eigen::Map<const RowMajorMat> wmat(theta.data() + L.offset, L.out, L.in);
      Eigen::Map<RowMajorMat> gw(grad.data() + L.offset, L.out, L.in);
      Eigen::Map<Vec> gb(grad.data() + L.offset + L.out * L.in, L.out);
      gw += (dz * a_in.transpose()).eval();
      gb += dz.rowwise().sum();
      Mat da_in = wmat.transpose() * dz;
      if (li > 0) {
        dz = da_in.array() * (1.0 - heads[t][li].array().square());  // tanh' of the input activation
      } else {
        trunk_delta += da_in;
        break;
      }
    }
  }

  for (int li = static_cast<int>(shared_layers_.size()) - 1; li >= 0; --li) {
    const auto& L = shared_layers_[li];
    Mat dz = trunk_delta.array() * (1.0 - trunk[li + 1].array().square());
    const Mat& a_in = trunk[li];
    Eigen::Map<const RowMajorMat> wmat(theta.data() + L.offset, L.out, L.in);
    Eigen::Map<RowMajorMat> gw(grad.data() + L.offset, L.out, L.in);
    Eigen::Map<Vec> gb(grad.data() + L.offset + L.out * L.in, L.out);
    gw += (dz * a_in.transpose()).eval();
    gb += dz.rowwise().sum();
    if (li > 0) trunk_delta = wmat.transpose() * dz;
  }
  return grad;
}

Vec MlpProblem::eval_losses(const Vec& theta, const Batch& batch) const {
  check_theta(theta);
  check_batch(batch);
  Vec losses;
  weighted_backward(theta, Vec::Zero(m_), batch, &losses);  // forward only (all deltas skipped)
  return losses;
}

Mat MlpProblem::eval_gradients(const Vec& theta, const Batch& batch) const {
  check_theta(theta);
  check_batch(batch);
  Mat g(m_, d_);
  for (int t = 0; t < m_; ++t) {
    Vec w = Vec::Zero(m_);
    w[t] = 1.0;
    g.row(t) = weighted_backward(theta, w, batch, nullptr).transpose();
  }
  return g;
}

Vec MlpProblem::eval_weighted_gradient(const Vec& theta, const Vec& w, const Batch& batch) const {
  check_theta(theta);
  check_weights(w);
  check_batch(batch);
  return weighted_backward(theta, w, batch, nullptr);
}

// --- AuxProblem ---

namespace {
QuadraticSpec combine_aux_spec(const AuxProblemSpec& spec) {
  if (spec.main_tasks.centers.empty()) throw std::invalid_argument("AuxProblemSpec: no main tasks");
  if (spec.target_index < 0 || spec.target_index >= static_cast<int>(spec.main_tasks.centers.size()))
    throw std::invalid_argument("AuxProblemSpec: target_index out of range");
  QuadraticSpec all = spec.main_tasks;
  all.centers.push_back(spec.aux_center);
  all.curvatures.push_back(spec.aux_curvature);
  return all;
}
}  // namespace

AuxProblem::AuxProblem(AuxProblemSpec spec)
    : MooProblem(static_cast<int>(spec.main_tasks.centers.size()) + 1,
                 static_cast<int>(spec.main_tasks.centers.empty() ? 0 : spec.main_tasks.centers[0].size()),
                 0),
      all_(combine_aux_spec(spec)),
      target_index_(spec.target_index) {}

Vec AuxProblem::eval_losses(const Vec& theta, const Batch& batch) const {
  return all_.eval_losses(theta, batch);
}

Mat AuxProblem::eval_gradients(const Vec& theta, const Batch& batch) const {
  return all_.eval_gradients(theta, batch);
}

Vec AuxProblem::eval_weighted_gradient(const Vec& theta, const Vec& w, const Batch& batch) const {
  return all_.eval_weighted_gradient(theta, w, batch);
}

Vec AuxProblem::lower_level_weights(double omega) const {
  Vec w = Vec::Ones(m_);
  w[m_ - 1] = omega;
  return w;
}

// --- Free functions ---

Batch sample_batch(const MooProblem& problem, RngState& rng, int size) {
  if (problem.pool_size() == 0) return Batch::full();
  if (size < 1 || size > problem.pool_size())
    throw std::invalid_argument("sample_batch: size out of range");
  std::vector<int> idx(problem.pool_size());
  for (int i = 0; i < problem.pool_size(); ++i) idx[i] = i;
  for (int i = 0; i < size; ++i) {
    int j = i + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(problem.pool_size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  return Batch::of(std::move(idx));
}

std::unique_ptr<QuadraticSuite> make_quadratic_suite(QuadraticSpec spec) {
  return std::make_unique<QuadraticSuite>(std::move(spec));
}

std::unique_ptr<MlpProblem> make_mlp_problem(MlpSpec spec) {
  return std::make_unique<MlpProblem>(std::move(spec));
}

std::unique_ptr<AuxProblem> make_aux_problem(AuxProblemSpec spec) {
  return std::make_unique<AuxProblem>(std::move(spec));
}

QuadraticSpec random_identity_quadratics(int m, int d, std::uint64_t gen_seed, double center_scale) {
  if (m < 1 || d < 1) throw std::invalid_argument("random_identity_quadratics: bad dimensions");
  RngState rng(gen_seed);
  QuadraticSpec spec;
  for (int i = 0; i < m; ++i) {
    Vec c(d);
    for (int j = 0; j < d; ++j) c[j] = center_scale * rng.next_gaussian();
    spec.centers.push_back(std::move(c));
    spec.curvatures.push_back(Mat::Identity(d, d));
  }
  return spec;
}

QuadraticSpec random_spd_quadratics(int m, int d, std::uint64_t gen_seed, double center_scale,
                                    double eig_min, double eig_max) {
  if (m < 1 || d < 1) throw std::invalid_argument("random_spd_quadratics: bad dimensions");
  if (!(eig_min > 0.0) || eig_max < eig_min)
    throw std::invalid_argument("random_spd_quadratics: need 0 < eig_min <= eig_max");
  RngState rng(gen_seed);
  QuadraticSpec spec;
  for (int i = 0; i < m; ++i) {
    Vec c(d);
    for (int j = 0; j < d; ++j) c[j] = center_scale * rng.next_gaussian();
    Mat g(d, d);
    for (int r = 0; r < d; ++r)
      for (int col = 0; col < d; ++col) g(r, col) = rng.next_gaussian();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Vec eigs(d);
    for (int j = 0; j < d; ++j) eigs[j] = eig_min + (eig_max - eig_min) * rng.next_uniform();
    Mat a = q * eigs.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose());  // exact symmetry despite rounding
    spec.centers.push_back(std::move(c));
    spec.curvatures.push_back(std::move(a));
  }
  return spec;
}

}  // namespace moo
