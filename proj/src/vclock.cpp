#include "racediag/vclock.hpp"

#include <algorithm>
#include <stdexcept>

namespace racediag {

VectorClock VectorClock::for_thread(std::size_t width, ThreadIndex tid) {
  VectorClock v(width);
  v.stamps_.at(tid) = 1;
  return v;
}

VectorClock& VectorClock::join_with(const VectorClock& other) {
  if (other.size() != size())
    throw std::invalid_argument("vector clock width mismatch: " + std::to_string(size()) +
                                " vs " + std::to_string(other.size()));
  for (std::size_t j = 0; j < stamps_.size(); ++j)
    stamps_[j] = std::max(stamps_[j], other.stamps_[j]);
  return *this;
}

VectorClock& VectorClock::increment(ThreadIndex tid) {
  if (tid >= stamps_.size())
    throw std::out_of_range("thread index " + std::to_string(tid) + " outside clock of width " +
                            std::to_string(stamps_.size()));
  ++stamps_[tid];
  return *this;
}

bool VectorClock::leq(const VectorClock& other) const {
  if (other.size() != size()) throw std::invalid_argument("vector clock width mismatch");
  for (std::size_t j = 0; j < stamps_.size(); ++j)
    if (stamps_[j] > other.stamps_[j]) return false;
  return true;
}

std::string VectorClock::str() const {
  std::string s = "[";
  for (std::size_t j = 0; j < stamps_.size(); ++j) {
    if (j) s += ',';
    s += std::to_string(stamps_[j]);
  }
  return s + "]";
}

VectorClock join(VectorClock a, const VectorClock& b) { return a.join_with(b); }

VectorClock inc(VectorClock v, ThreadIndex tid) { return v.increment(tid); }

}  // namespace racediag
