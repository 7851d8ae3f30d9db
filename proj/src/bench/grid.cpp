#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "tarnn/bench.hpp"

namespace tarnn::bench {

std::vector<GridCell> expand_grid(const GridAxes& axes) {
  if (axes.alpha.empty() || axes.radius.empty() || axes.lambda.empty() ||
      axes.input_scaling.empty() || axes.lr.empty() || axes.hidden.empty())
    throw std::invalid_argument("expand_grid: empty axis");
  std::vector<GridCell> cells;
  std::size_t index = 0;
  for (double a : axes.alpha)
    for (double r : axes.radius)
      for (double l : axes.lambda)
        for (double s : axes.input_scaling)
          for (double lr : axes.lr)
            for (std::size_t h : axes.hidden)
              cells.push_back({a, r, l, s, lr, h, index++});
  return cells;
}

GridOutcome grid_search(const GridAxes& axes,
                        const std::function<double(const GridCell&)>& evaluate,
                        std::size_t n_threads) {
  GridOutcome out;
  out.cells = expand_grid(axes);
  const std::size_t n = out.cells.size();
  out.scores.assign(n, std::numeric_limits<double>::infinity());
  out.errors.assign(n, "");

  auto run_cell = [&](std::size_t i) {
    try {
      const double s = evaluate(out.cells[i]);
      out.scores[i] = std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
      if (!std::isfinite(s)) out.errors[i] = "non-finite score";
    } catch (const std::exception& e) {
      out.errors[i] = e.what();
    }
  };

  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(n_threads, n);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
          run_cell(i);
      });
    for (auto& t : pool) t.join();
  }

  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i)
    if (best == n || out.scores[i] < out.scores[best]) best = i;
  if (best == n || !std::isfinite(out.scores[best])) {
    std::string msg = "grid_search: every cell failed;";
    for (std::size_t i = 0; i < n && i < 8; ++i)
      msg += " [" + std::to_string(i) + "] " + out.errors[i] + ";";
    throw std::runtime_error(msg);
  }
  out.best = out.cells[best];
  out.best_score = out.scores[best];
  return out;
}

std::string version_string() { return "tarnn 0.1.0"; }

}  // namespace tarnn::bench
