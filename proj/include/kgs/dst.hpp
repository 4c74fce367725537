#pragma once

#include <fftw3.h>

#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace kgs {

// DST-I (FFTW RODFT00) working buffer for n interior points. Applying the
// transform twice multiplies by 2(n+1). Plan creation is serialized (FFTW
// planner is not thread-safe); separate Dst objects may execute concurrently.
class Dst {
  public:
    explicit Dst(std::size_t n) : n_(n), buf_(n) {
        if (n == 0) throw std::invalid_argument("Dst: empty transform");
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_ = fftw_plan_r2r_1d(int(n), buf_.data(), buf_.data(), FFTW_RODFT00,
                                 FFTW_ESTIMATE);  // ESTIMATE keeps plans deterministic
        if (!plan_) throw std::runtime_error("Dst: fftw plan failed");
    }
    ~Dst() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    Dst(const Dst&) = delete;
    Dst& operator=(const Dst&) = delete;

    std::size_t size() const { return n_; }
    double norm() const { return 2.0 * double(n_ + 1); }

    // In-place unnormalized DST-I of v (v.size() == n).
    void forward(std::vector<double>& v) {
        buf_ = v;
        fftw_execute_r2r(plan_, buf_.data(), buf_.data());
        v = buf_;
    }

  private:
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }
    std::size_t n_;
    std::vector<double> buf_;
    fftw_plan plan_;
};

}  // namespace kgs
