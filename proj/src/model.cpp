#include "gltunnel/model.hpp"

#include <cmath>
#include <fmt/format.h>

#include "gltunnel/error.hpp"

namespace gltunnel {

void AmbientModel::validate() const {
  auto fail = [](const std::string& what) { throw TunnelError(ErrorCode::InvalidArgument, what); };
  if (n < 3) fail(fmt::format("n = {} must be >= 3", n));
  if (!(kappa_D_min > 0.0)) fail(fmt::format("kappa_D_min = {} must be > 0", kappa_D_min));
  if (!(ric_sup >= 0.0)) fail(fmt::format("ric_sup = {} must be >= 0", ric_sup));
  if (!(c1 >= 0.0)) fail(fmt::format("c1 = {} must be >= 0", c1));
  if (!(c2 >= 0.0)) fail(fmt::format("c2 = {} must be >= 0", c2));
  if (!(c_metric >= 0.0)) fail(fmt::format("c_metric = {} must be >= 0", c_metric));
  if (!(safety_factor >= 0.0)) fail(fmt::format("safety_factor = {} must be >= 0", safety_factor));
  if (!(delta0 > 0.0)) fail(fmt::format("delta0 = {} must be > 0", delta0));
  if (!(delta > delta0)) fail(fmt::format("delta = {} must exceed delta0 = {}", delta, delta0));
  for (double v : {kappa_D_min, ric_sup, c1, c2, c_metric, delta, delta0, safety_factor}) {
    if (!std::isfinite(v)) fail("model constants must be finite");
  }
}

AmbientModel AmbientModel::flat(int n, double delta0, double kappa_D_min) {
  AmbientModel model;
  model.n = n;
  model.kappa_D_min = kappa_D_min;
  model.delta0 = delta0;
  model.delta = 2.0 * delta0;
  return model;
}

}  // namespace gltunnel
