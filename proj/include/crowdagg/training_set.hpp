#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include "crowdagg/panel.hpp"

namespace crowdagg {

// Records which stimuli were read while fitting an aggregator. Used by the
// evaluation harnesses to prove that test folds are never touched.
class AccessAudit {
 public:
  void record(std::size_t stimulus) {
    std::lock_guard lock(mutex_);
    accessed_.push_back(stimulus);
  }
  std::vector<std::size_t> accessed() const {
    std::lock_guard lock(mutex_);
    return accessed_;
  }
  void clear() {
    std::lock_guard lock(mutex_);
    accessed_.clear();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<std::size_t> accessed_;
};

// The only window an aggregator has onto the data during fitting: a response
// matrix restricted to a list of training stimuli. Positions are 0-based
// within the subset.
class TrainingSet {
 public:
  TrainingSet(const ResponseMatrix& matrix, std::span<const std::size_t> stimuli, AccessAudit* audit = nullptr)
      : matrix_(matrix), stimuli_(stimuli), audit_(audit) {}

  std::size_t size() const noexcept { return stimuli_.size(); }
  bool empty() const noexcept { return stimuli_.empty(); }
  std::size_t participants() const noexcept { return matrix_.participants(); }

  std::span<const std::uint8_t> column(std::size_t k) const {
    touch(k);
    return matrix_.column(stimuli_[k]);
  }
  std::uint8_t truth(std::size_t k) const {
    touch(k);
    return matrix_.stimulus(stimuli_[k]).truth;
  }
  const std::string& stimulus_id(std::size_t k) const {
    touch(k);
    return matrix_.stimulus(stimuli_[k]).id;
  }

  // Per-participant fraction of training stimuli judged correctly.
  std::vector<double> accuracies() const;

 private:
  void touch(std::size_t k) const {
    if (audit_ != nullptr) audit_->record(stimuli_[k]);
  }

  const ResponseMatrix& matrix_;
  std::span<const std::size_t> stimuli_;
  AccessAudit* audit_;
};

}  // namespace crowdagg
