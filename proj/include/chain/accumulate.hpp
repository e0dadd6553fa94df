#pragma once

#include <cstddef>

namespace chain {

// Neumaier compensated summation. Order-independent to ~1 ulp for the sums we
// run (log-determinants over thousands of terms, Monte Carlo aggregation), so
// deterministic aggregation only needs a fixed iteration order, not a fixed
// reduction tree.
class NeumaierSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if ((sum_ < 0 ? -sum_ : sum_) >= (x < 0 ? -x : x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        ++count_;
    }

    double value() const { return sum_ + comp_; }
    std::size_t count() const { return count_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
    std::size_t count_ = 0;
};

}  // namespace chain
