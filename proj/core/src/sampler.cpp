#include "fdpburst/sampler.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "fdpburst/error.hpp"
#include "fdpburst/gauss.hpp"

namespace fdpburst {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense lower Cholesky factor, row-major, with up to 1e-10 diagonal jitter.
std::vector<double> dense_lower_factor(const RowMatrix& A) {
  const auto n = A.rows();
  for (double jitter : {0.0, 1e-12, 1e-10}) {
    Eigen::LLT<Eigen::MatrixXd> llt(A + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      RowMatrix L = llt.matrixL();
      return {L.data(), L.data() + L.size()};
    }
  }
  throw ConfigError("noise correlation matrix is not positive semidefinite");
}

std::vector<double> equicorrelation_factor(std::size_t size, double rho) {
  const auto n = static_cast<Eigen::Index>(size);
  RowMatrix A = RowMatrix::Constant(n, n, rho);
  A.diagonal().setOnes();
  return dense_lower_factor(A);
}

// e[0..n) = L z for a dense row-major lower factor.
void apply_lower(const std::vector<double>& L, std::size_t n, const double* z, double* e) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = L.data() + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += row[j] * z[j];
    e[i] = s;
  }
}

}  // namespace

Sampler::Sampler(ExperimentConfig config) : config_(std::move(config)) {
  require_valid(config_);
  const std::size_t m = config_.m;
  pi1_ = config_.schedule.at(m);
  groups_ = assign_groups(m, config_.loadings);

  const auto& groups = config_.loadings.groups;
  group_scale_.resize(groups.size());
  for (std::size_t j = 0; j < groups.size(); ++j) {
    group_scale_[j] = std::sqrt(1.0 - groups[j].norm_sq());
  }
  if (config_.latent_mode == LatentMode::conditional) {
    group_shift_fixed_.resize(groups.size());
    for (std::size_t j = 0; j < groups.size(); ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < config_.loadings.k; ++d) s += groups[j].loading[d] * config_.w[d];
      group_shift_fixed_[j] = s;
    }
  }

  const NoiseSpec& noise = config_.noise;
  switch (noise.kind) {
    case NoiseSpec::Kind::independent:
      break;
    case NoiseSpec::Kind::block:
      if (noise.block_rho < 0.0) {
        const std::size_t full = std::min(noise.block_size, m);
        block_factor_full_ = equicorrelation_factor(full, noise.block_rho);
        const std::size_t tail = m % noise.block_size;
        if (tail != 0 && m > noise.block_size) {
          block_factor_tail_ = equicorrelation_factor(tail, noise.block_rho);
        }
      }
      break;
    case NoiseSpec::Kind::toeplitz:
      band_factor_ = toeplitz_band_cholesky(noise.band, m);
      break;
    case NoiseSpec::Kind::custom: {
      Eigen::Map<const RowMatrix> G(noise.custom.data(), static_cast<Eigen::Index>(m),
                                    static_cast<Eigen::Index>(m));
      dense_factor_ = dense_lower_factor(G);
      break;
    }
  }
}

void Sampler::draw_block_noise(PhiloxStream& rng, std::vector<double>& e) const {
  const std::size_t m = config_.m;
  const std::size_t sb = config_.noise.block_size;
  const double rho = config_.noise.block_rho;
  if (rho >= 0.0) {
    const double shared = std::sqrt(rho);
    const double own = std::sqrt(1.0 - rho);
    for (std::size_t start = 0; start < m; start += sb) {
      const std::size_t end = std::min(start + sb, m);
      const double b = rng.next_normal();
      for (std::size_t i = start; i < end; ++i) e[i] = shared * b + own * rng.next_normal();
    }
    return;
  }
  double z[1024];
  std::vector<double> zbuf;
  double* zp = z;
  if (sb > 1024) {
    zbuf.resize(sb);
    zp = zbuf.data();
  }
  for (std::size_t start = 0; start < m; start += sb) {
    const std::size_t n = std::min(sb, m - start);
    for (std::size_t i = 0; i < n; ++i) zp[i] = rng.next_normal();
    const auto& L = (n == std::min(sb, m)) ? block_factor_full_ : block_factor_tail_;
    apply_lower(L, n, zp, e.data() + start);
  }
}

void Sampler::draw_noise(std::uint64_t replicate, std::vector<double>& e,
                         std::vector<double>& scratch) const {
  const std::size_t m = config_.m;
  e.resize(m);
  PhiloxStream rng(config_.seed, replicate, StreamRole::noise);
  switch (config_.noise.kind) {
    case NoiseSpec::Kind::independent:
      rng.fill_normals(e);
      break;
    case NoiseSpec::Kind::block:
      draw_block_noise(rng, e);
      break;
    case NoiseSpec::Kind::toeplitz: {
      const std::size_t M = config_.noise.band.size();
      const std::size_t W = M + 1;
      scratch.resize(m);
      rng.fill_normals(scratch);
      for (std::size_t i = 0; i < m; ++i) {
        const double* row = band_factor_.data() + i * W;
        const std::size_t lo = i >= M ? i - M : 0;
        double s = 0.0;
        for (std::size_t j = lo; j <= i; ++j) s += row[M - (i - j)] * scratch[j];
        e[i] = s;
      }
      break;
    }
    case NoiseSpec::Kind::custom:
      scratch.resize(m);
      rng.fill_normals(scratch);
      apply_lower(dense_factor_, m, scratch.data(), e.data());
      break;
  }
}

void Sampler::draw_statistics(std::uint64_t replicate, ReplicateDraw& out) const {
  const std::size_t m = config_.m;
  const std::size_t k = config_.loadings.k;
  const auto& groups = config_.loadings.groups;

  out.h.resize(m);
  {
    PhiloxStream rng(config_.seed, replicate, StreamRole::hypotheses);
    for (std::size_t i = 0; i < m; ++i) out.h[i] = rng.next_uniform() < pi1_ ? 1 : 0;
  }

  const std::vector<double>* shift = &group_shift_fixed_;
  std::vector<double> shift_draw;
  if (config_.latent_mode == LatentMode::marginal) {
    out.w.resize(k);
    PhiloxStream rng(config_.seed, replicate, StreamRole::factors);
    rng.fill_normals(out.w);
    shift_draw.resize(groups.size());
    for (std::size_t j = 0; j < groups.size(); ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < k; ++d) s += groups[j].loading[d] * out.w[d];
      shift_draw[j] = s;
    }
    shift = &shift_draw;
  } else {
    out.w = config_.w;
  }

  draw_noise(replicate, out.x, out.scratch);
  const double mu = config_.mu_a;
  if (k == 0) {
    const double scale = group_scale_[0];
    for (std::size_t i = 0; i < m; ++i) out.x[i] = mu * out.h[i] + scale * out.x[i];
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint32_t g = groups_[i];
      out.x[i] = mu * out.h[i] + (*shift)[g] + group_scale_[g] * out.x[i];
    }
  }
}

void Sampler::draw(std::uint64_t replicate, ReplicateDraw& out) const {
  draw_statistics(replicate, out);
  out.p.resize(config_.m);
  for (std::size_t i = 0; i < config_.m; ++i) out.p[i] = gauss::std_sf(out.x[i]);
}

ReplicateDraw Sampler::draw(std::uint64_t replicate) const {
  ReplicateDraw d;
  draw(replicate, d);
  return d;
}

ReplicateDraw draw_replicate(const ExperimentConfig& config, std::uint64_t replicate_index) {
  return Sampler(config).draw(replicate_index);
}

}  // namespace fdpburst
