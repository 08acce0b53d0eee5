// SPDX-License-Identifier: Apache-2.0
#include "wishart/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "wishart/error.hpp"
#include "wishart/rng.hpp"

namespace wishart {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const double kSqrt3 = std::sqrt(3.0);

// log E|G|^q for G ~ N(0, 1).
double log_abs_gaussian_moment(double q) {
  return 0.5 * q * std::numbers::ln2 + std::lgamma(0.5 * (q + 1.0)) - 0.5 * std::log(std::numbers::pi);
}

}  // namespace

NoiseKind kind_of(const NoiseModel& model) {
  return std::visit(overloaded{[](const noise::Gaussian&) { return NoiseKind::kGaussian; },
                               [](const noise::ScaledRademacher&) { return NoiseKind::kRademacher; },
                               [](const noise::Bounded&) { return NoiseKind::kBounded; },
                               [](const noise::Bernoulli&) { return NoiseKind::kBernoulli; },
                               [](const noise::HeavyTail&) { return NoiseKind::kHeavyTail; }},
                    model);
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kRademacher: return "rademacher";
    case NoiseKind::kBounded: return "bounded";
    case NoiseKind::kBernoulli: return "bernoulli";
    case NoiseKind::kHeavyTail: return "heavy_tail";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(std::string_view name) {
  if (name == "gaussian") return NoiseKind::kGaussian;
  if (name == "rademacher") return NoiseKind::kRademacher;
  if (name == "bounded") return NoiseKind::kBounded;
  if (name == "bernoulli") return NoiseKind::kBernoulli;
  if (name == "heavy_tail") return NoiseKind::kHeavyTail;
  throw ValidationError("unknown noise model '" + std::string(name) + "'");
}

void validate(const NoiseModel& model) {
  std::visit(overloaded{[](const noise::Gaussian&) {}, [](const noise::ScaledRademacher&) {},
                        [](const noise::Bounded& m) {
                          if (!(m.bound > 0.0) || !std::isfinite(m.bound))
                            throw ValidationError("bounded model needs a finite B > 0");
                        },
                        [](const noise::Bernoulli& m) {
                          for (double t : m.theta.data())
                            if (t > 1.0) throw ValidationError("bernoulli theta entries must lie in [0, 1]");
                        },
                        [](const noise::HeavyTail& m) {
                          if (!(m.shape >= 1.0) || !std::isfinite(m.shape))
                            throw ValidationError("heavy_tail model needs a finite b >= 1");
                        }},
             model);
}

NoiseModel noise_model_from_json(const nlohmann::json& spec) {
  using nlohmann::json;
  if (!spec.is_object() || !spec.contains("model") || !spec.at("model").is_string()) {
    throw ValidationError("noise model spec needs a string 'model'");
  }
  for (const auto& [key, _] : spec.items()) {
    if (key != "model" && key != "params") throw ValidationError("unknown key '" + key + "' in noise model");
  }
  const json params = spec.value("params", json::object());
  if (!params.is_object()) throw ValidationError("noise model 'params' must be an object");
  auto only = [&](std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : params.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw ValidationError("unknown noise model parameter '" + key + "'");
  };
  auto number = [&](const char* key) {
    if (!params.contains(key) || !params.at(key).is_number())
      throw ValidationError(std::string("noise model needs numeric parameter '") + key + "'");
    return params.at(key).get<double>();
  };

  NoiseModel model;
  switch (noise_kind_from_string(spec.at("model").get<std::string>())) {
    case NoiseKind::kGaussian: only({}); model = noise::Gaussian{}; break;
    case NoiseKind::kRademacher: only({}); model = noise::ScaledRademacher{}; break;
    case NoiseKind::kBounded: only({"B"}); model = noise::Bounded{number("B")}; break;
    case NoiseKind::kHeavyTail: only({"b"}); model = noise::HeavyTail{number("b")}; break;
    case NoiseKind::kBernoulli: {
      only({"theta"});
      if (!params.contains("theta")) throw ValidationError("bernoulli model needs 'theta'");
      model = noise::Bernoulli{profile_from_json(json{{"kind", "explicit"}, {"sigma", params.at("theta")}})};
      break;
    }
  }
  validate(model);
  return model;
}

nlohmann::json noise_model_to_json(const NoiseModel& model) {
  using nlohmann::json;
  json params = json::object();
  std::visit(overloaded{[](const noise::Gaussian&) {}, [](const noise::ScaledRademacher&) {},
                        [&](const noise::Bounded& m) { params["B"] = m.bound; },
                        [&](const noise::Bernoulli& m) { params["theta"] = profile_to_json(m.theta).at("sigma"); },
                        [&](const noise::HeavyTail& m) { params["b"] = m.shape; }},
             model);
  return json{{"model", std::string(to_string(kind_of(model)))}, {"params", std::move(params)}};
}

double heavy_tail_scale(double shape) {
  if (!(shape >= 1.0)) throw ValidationError("heavy_tail shape must be >= 1");
  if (shape == 1.0) return 1.0;
  return std::exp(0.5 * log_abs_gaussian_moment(2.0 * shape - 2.0));
}

std::optional<double> moment_kappa(const NoiseModel& model) {
  validate(model);
  auto sup_over_q = [](auto&& log_moment, double exponent) {
    double best = 0.0;
    for (int q = 1; q <= 256; ++q) {
      const double dq = q;
      best = std::max(best, std::exp(log_moment(dq) / dq - exponent * std::log(dq)));
    }
    return best;
  };
  return std::visit(
      overloaded{
          [&](const noise::Gaussian&) -> std::optional<double> { return sup_over_q(log_abs_gaussian_moment, 0.5); },
          [](const noise::ScaledRademacher&) -> std::optional<double> { return 1.0; },
          [&](const noise::Bounded&) -> std::optional<double> {
            return sup_over_q([](double q) { return 0.5 * q * std::log(3.0) - std::log(q + 1.0); }, 0.5);
          },
          [](const noise::Bernoulli&) -> std::optional<double> { return std::nullopt; },
          [&](const noise::HeavyTail& m) -> std::optional<double> {
            const double log_scale = std::log(heavy_tail_scale(m.shape));
            return sup_over_q(
                [&](double q) {
                  return log_abs_gaussian_moment(q) + log_abs_gaussian_moment((m.shape - 1.0) * q) - q * log_scale;
                },
                0.5 * m.shape);
          }},
      model);
}

Matrix sample(const VarianceProfile& profile, const NoiseModel& model, SampleSeed seed) {
  validate(model);
  const rng::Key key = rng::make_key(seed.master_seed, rng::Stream::kNoise);
  const std::uint64_t rep = seed.replicate_index;

  return std::visit(
      overloaded{
          [&](const noise::Gaussian&) {
            Matrix z(profile.rows(), profile.cols());
            for (std::size_t i = 0; i < profile.rows(); ++i)
              for (std::size_t j = 0; j < profile.cols(); ++j)
                z(i, j) = profile(i, j) * rng::normals(rng::entry_counter(rep, i, j), key)[0];
            return z;
          },
          [&](const noise::ScaledRademacher&) {
            Matrix z(profile.rows(), profile.cols());
            for (std::size_t i = 0; i < profile.rows(); ++i)
              for (std::size_t j = 0; j < profile.cols(); ++j) {
                const double u = rng::uniforms(rng::entry_counter(rep, i, j), key).first;
                z(i, j) = u <= 0.5 ? profile(i, j) : -profile(i, j);
              }
            return z;
          },
          [&](const noise::Bounded& m) {
            const double sigma_star = summarize(profile).sigma_star;
            if (sigma_star * kSqrt3 > m.bound) {
              throw ValidationError("bounded model needs sigma_* * sqrt(3) <= B");
            }
            Matrix z(profile.rows(), profile.cols());
            for (std::size_t i = 0; i < profile.rows(); ++i)
              for (std::size_t j = 0; j < profile.cols(); ++j) {
                const double u = rng::uniforms(rng::entry_counter(rep, i, j), key).first;
                z(i, j) = profile(i, j) * kSqrt3 * (2.0 * u - 1.0);
              }
            return z;
          },
          [&](const noise::Bernoulli& m) {
            const VarianceProfile& theta = m.theta;
            if (theta.rows() != profile.rows() || theta.cols() != profile.cols()) {
              throw ValidationError("bernoulli theta grid is " + std::to_string(theta.rows()) + "x" +
                                    std::to_string(theta.cols()) + " but the profile is " +
                                    std::to_string(profile.rows()) + "x" + std::to_string(profile.cols()));
            }
            Matrix z(theta.rows(), theta.cols());
            for (std::size_t i = 0; i < theta.rows(); ++i)
              for (std::size_t j = 0; j < theta.cols(); ++j) {
                const double u = rng::uniforms(rng::entry_counter(rep, i, j), key).first;
                const double t = theta(i, j);
                z(i, j) = (u <= t ? 1.0 : 0.0) - t;
              }
            return z;
          },
          [&](const noise::HeavyTail& m) {
            const double scale = heavy_tail_scale(m.shape);
            const double exponent = m.shape - 1.0;
            Matrix z(profile.rows(), profile.cols());
            for (std::size_t i = 0; i < profile.rows(); ++i)
              for (std::size_t j = 0; j < profile.cols(); ++j) {
                const auto g = rng::normals(rng::entry_counter(rep, i, j), key);
                const double w = exponent == 0.0 ? g[0] : g[0] * std::pow(std::abs(g[1]), exponent);
                z(i, j) = profile(i, j) * w / scale;
              }
            return z;
          }},
      model);
}

VarianceProfile effective_profile(const VarianceProfile& profile, const NoiseModel& model) {
  if (const auto* b = std::get_if<noise::Bernoulli>(&model)) {
    std::vector<double> sd(b->theta.data().size());
    std::transform(b->theta.data().begin(), b->theta.data().end(), sd.begin(),
                   [](double t) { return std::sqrt(t * (1.0 - t)); });
    return VarianceProfile(b->theta.rows(), b->theta.cols(), std::move(sd));
  }
  return profile;
}

Vector expected_gram_diagonal(const VarianceProfile& profile, const NoiseModel& model) {
  validate(model);
  Vector diag = Vector::Zero(static_cast<Eigen::Index>(profile.rows()));
  if (const auto* b = std::get_if<noise::Bernoulli>(&model)) {
    if (b->theta.rows() != profile.rows() || b->theta.cols() != profile.cols()) {
      throw ValidationError("bernoulli theta grid does not match the profile dimensions");
    }
    for (std::size_t i = 0; i < profile.rows(); ++i)
      for (std::size_t j = 0; j < profile.cols(); ++j) {
        const double t = b->theta(i, j);
        diag(static_cast<Eigen::Index>(i)) += t * (1.0 - t);
      }
    return diag;
  }
  for (std::size_t i = 0; i < profile.rows(); ++i)
    for (std::size_t j = 0; j < profile.cols(); ++j) diag(static_cast<Eigen::Index>(i)) += profile.variance(i, j);
  return diag;
}

Matrix expected_gram(const VarianceProfile& profile, const NoiseModel& model) {
  const Vector diag = expected_gram_diagonal(profile, model);
  Matrix out = Matrix::Zero(diag.size(), diag.size());
  out.diagonal() = diag;
  return out;
}

}  // namespace wishart
