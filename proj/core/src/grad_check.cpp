#include "dgat/grad_check.hpp"

#include <cmath>

namespace dgat {

GradCheckReport grad_check(const TapeFn& f, ParamStore& params, double step, double tol) {
  GradCheckReport report;

  params.zero_grads();
  {
    Tape tape;
    Tensor loss = f(tape, params);
    tape.backward(loss);
  }
  // snapshot analytic gradients; finite differencing reuses the store
  std::map<std::string, Matrix> analytic;
  for (auto& [name, entry] : params) analytic.emplace(name, entry.grad);

  auto eval = [&]() {
    Tape tape;
    Tensor loss = f(tape, params);
    return tape.value(loss).data[0];
  };

  for (auto& [name, entry] : params) {
    const Matrix& a = analytic.at(name);
    for (size_t i = 0; i < entry.value.data.size(); ++i) {
      double saved = entry.value.data[i];
      entry.value.data[i] = saved + step;
      double up = eval();
      entry.value.data[i] = saved - step;
      double down = eval();
      entry.value.data[i] = saved;
      double numeric = (up - down) / (2.0 * step);
      double abs_err = std::abs(a.data[i] - numeric);
      double rel_err = abs_err / std::max({std::abs(a.data[i]), std::abs(numeric), 1e-3});
      report.max_abs_err = std::max(report.max_abs_err, abs_err);
      report.max_rel_err = std::max(report.max_rel_err, rel_err);
      if (rel_err >= tol) {
        report.passed = false;
        report.failures.push_back({name, static_cast<int>(i), a.data[i], numeric, rel_err});
      }
    }
  }
  return report;
}

}  // namespace dgat
