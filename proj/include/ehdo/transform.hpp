#pragma once

#include "ehdo/model.hpp"

namespace ehdo {

/// The per-slot change of variables phi_t(q) = r_{g_t}^{-1}(a_t q + b_t) that
/// makes the scheduling problem convex in q. Requires a_t > 0; composition with
/// the rate function is affine by construction: r_{g_t}(phi_t(q)) = a_t q + b_t.
class TransformFamily {
 public:
  TransformFamily(Vector scale, Vector offset, std::shared_ptr<const RateFunction> rate,
                  Vector gains);

  /// phi_t(q), power from rate. Slots are zero-based here.
  double forward(int slot, double q) const;
  /// phi_t^{-1}(p) = (r_{g_t}(p) - b_t) / a_t, rate from power.
  double pullback(int slot, double p) const;

  int size() const { return static_cast<int>(gains_.size()); }
  const Vector& scale() const { return scale_; }
  const Vector& offset() const { return offset_; }
  const Vector& gains() const { return gains_; }
  const RateFunction& rate() const { return *rate_; }

 private:
  Vector scale_;   // a_t, strictly positive
  Vector offset_;  // b_t
  std::shared_ptr<const RateFunction> rate_;
  Vector gains_;
};

/// Validates a_t > 0 and assembles the family.
TransformFamily build_transform(Vector scale, Vector offset,
                                std::shared_ptr<const RateFunction> rate, Vector gains);

/// The canonical choice a_t = 1, b_t = 0, i.e. phi_t = r_{g_t}^{-1}. For LogRate
/// this is p = (e^q - 1) / g_t.
TransformFamily canonical_transform(const ScenarioInstance& instance,
                                    std::shared_ptr<const RateFunction> rate);

/// Elementwise forward map of a rate policy; rejects negative rates.
PowerPolicy map_policy(const TransformFamily& transform, const RatePolicy& rates);

}  // namespace ehdo
