#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dgat/param_store.hpp"
#include "dgat/tape.hpp"

namespace dgat {

struct GradCheckReport {
  struct Failure {
    std::string param;
    int index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_err = 0.0;
  };
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  bool passed = true;
  std::vector<Failure> failures;
};

// f must deterministically build a scalar loss on the given tape from the
// given store. Compares backward() gradients against central finite
// differences coordinate by coordinate. Relative error uses
// |a - n| / max(|a|, |n|, 1e-3).
using TapeFn = std::function<Tensor(Tape&, ParamStore&)>;
GradCheckReport grad_check(const TapeFn& f, ParamStore& params, double step, double tol);

}  // namespace dgat
