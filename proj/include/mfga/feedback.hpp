#pragma once

#include <cstddef>
#include <memory>

#include "mfga/model.hpp"
#include "mfga/types.hpp"

namespace mfga {

/// What a strategy may look at: time, own current state and own initial
/// state. Markov feedback ignores x0; the degenerate-noise example's
/// strategy reads only x0.
struct FeedbackQuery {
  std::size_t step;
  double t;
  const Vec& x;
  const Vec& x0;
};

class Feedback {
 public:
  virtual ~Feedback() = default;
  /// Writes an action into `out`; callers project onto the action box.
  virtual void action(const FeedbackQuery& q, Vec& out) const = 0;
};

class ConstantFeedback final : public Feedback {
 public:
  explicit ConstantFeedback(Vec gamma) : gamma_(std::move(gamma)) {}
  void action(const FeedbackQuery&, Vec& out) const override { out = gamma_; }

 private:
  Vec gamma_;
};

/// u*(t, phi) = ((-1 v phi_1(0)) ^ 1, 0, 0) for t <= 1 and (-1, 0, 0) after.
class CounterexampleFeedback final : public Feedback {
 public:
  void action(const FeedbackQuery& q, Vec& out) const override;
};

std::shared_ptr<const Feedback> constant_feedback(Vec gamma);
/// Projection of 0 onto the action box: the tie-break action.
std::shared_ptr<const Feedback> null_feedback(const ActionBox& box);

}  // namespace mfga
