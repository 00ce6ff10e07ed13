#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace roundstat::detail {

inline unsigned worker_count(unsigned requested, long trials) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<long>(w, std::max(1L, trials)));
}

// Calls fn(trial, row) for trial = 0..trials-1, where row is a writable
// `width`-vector; results land in trial order whatever the scheduling. The
// lowest-index failure is rethrown.
template <class Fn>
Eigen::MatrixXd run_trials(long trials, Eigen::Index width, unsigned threads, Fn&& fn) {
  Eigen::MatrixXd out(trials, width);
  const unsigned workers = worker_count(threads, trials);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<long> failed_at(workers, trials);

  auto body = [&](unsigned w) {
    const long begin = trials * w / workers, end = trials * (w + 1) / workers;
    Eigen::VectorXd row(width);
    for (long t = begin; t < end; ++t) {
      try {
        row.setZero();
        fn(t, row);
        out.row(t) = row.transpose();
      } catch (...) {
        errors[w] = std::current_exception();
        failed_at[w] = t;
        return;
      }
    }
  };

  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
  }
  const auto first = std::min_element(failed_at.begin(), failed_at.end());
  if (*first < trials) std::rethrow_exception(errors[first - failed_at.begin()]);
  return out;
}

}  // namespace roundstat::detail
