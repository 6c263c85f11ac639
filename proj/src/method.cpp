#include "pqmc/method.hpp"

#include "pqmc/errors.hpp"

namespace pqmc {

std::string to_string(Method m) {
  switch (m) {
    case Method::mc: return "mc";
    case Method::is_mc: return "is-mc";
    case Method::qmc: return "qmc";
    case Method::rqmc: return "rqmc";
    case Method::pqmc: return "pqmc";
    case Method::is_pqmc: return "is-pqmc";
    case Method::is_rqmc: return "is-rqmc";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (Method m : {Method::mc, Method::is_mc, Method::qmc, Method::rqmc,
                   Method::pqmc, Method::is_pqmc, Method::is_rqmc}) {
    if (s == to_string(m)) return m;
  }
  throw ValidationError("unknown method '" + std::string(s) +
                        "' (expected mc, is-mc, qmc, rqmc, pqmc, is-pqmc, is-rqmc)");
}

bool uses_importance_sampling(Method m) noexcept {
  return m == Method::is_mc || m == Method::is_pqmc || m == Method::is_rqmc;
}

bool uses_projection(Method m) noexcept {
  return m == Method::pqmc || m == Method::is_pqmc;
}

bool uses_net(Method m) noexcept { return m != Method::mc && m != Method::is_mc; }

}  // namespace pqmc
