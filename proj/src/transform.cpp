#include "ehdo/transform.hpp"

#include <cmath>
#include <utility>

namespace ehdo {

TransformFamily::TransformFamily(Vector scale, Vector offset,
                                 std::shared_ptr<const RateFunction> rate, Vector gains)
    : scale_(std::move(scale)),
      offset_(std::move(offset)),
      rate_(std::move(rate)),
      gains_(std::move(gains)) {
  if (!rate_) throw std::invalid_argument("TransformFamily: rate function is required");
  if (scale_.size() != gains_.size() || offset_.size() != gains_.size() || gains_.size() < 1) {
    throw std::invalid_argument("TransformFamily: coefficient lengths must match the gains");
  }
  if (!scale_.allFinite() || !offset_.allFinite() || !gains_.allFinite()) {
    throw std::invalid_argument("TransformFamily: coefficients must be finite");
  }
  if (scale_.minCoeff() <= 0.0) {
    throw std::invalid_argument("TransformFamily: every a_t must be > 0");
  }
  if (gains_.minCoeff() <= 0.0) {
    throw std::invalid_argument("TransformFamily: every gain must be > 0");
  }
}

double TransformFamily::forward(int slot, double q) const {
  const double composed = scale_[slot] * q + offset_[slot];
  if (composed < 0.0) {
    throw std::domain_error("TransformFamily::forward: a_t q + b_t is negative");
  }
  return rate_->inverse(gains_[slot], composed);
}

double TransformFamily::pullback(int slot, double p) const {
  return (rate_->value(gains_[slot], p) - offset_[slot]) / scale_[slot];
}

TransformFamily build_transform(Vector scale, Vector offset,
                                std::shared_ptr<const RateFunction> rate, Vector gains) {
  return TransformFamily(std::move(scale), std::move(offset), std::move(rate), std::move(gains));
}

TransformFamily canonical_transform(const ScenarioInstance& instance,
                                    std::shared_ptr<const RateFunction> rate) {
  const int T = instance.horizon;
  return TransformFamily(Vector::Ones(T), Vector::Zero(T), std::move(rate),
                         instance.channel_gains);
}

PowerPolicy map_policy(const TransformFamily& transform, const RatePolicy& rates) {
  if (rates.rate.size() != transform.size()) {
    throw std::invalid_argument("map_policy: rate policy length must match the transform");
  }
  if (!rates.rate.allFinite() || rates.rate.minCoeff() < 0.0) {
    throw std::invalid_argument("map_policy: rates must be finite and >= 0");
  }
  PowerPolicy policy;
  policy.power.resize(transform.size());
  for (int t = 0; t < transform.size(); ++t) {
    policy.power[t] = transform.forward(t, rates.rate[t]);
  }
  return policy;
}

}  // namespace ehdo
