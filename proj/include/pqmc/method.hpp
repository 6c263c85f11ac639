#pragma once

#include <string>
#include <string_view>

namespace pqmc {

enum class Method { mc, is_mc, qmc, rqmc, pqmc, is_pqmc, is_rqmc };

std::string to_string(Method m);
/// Accepts the hyphenated names ("is-rqmc"); ValidationError otherwise.
Method parse_method(std::string_view s);

bool uses_importance_sampling(Method m) noexcept;
bool uses_projection(Method m) noexcept;
/// Low-discrepancy point source (everything except mc / is-mc).
bool uses_net(Method m) noexcept;

}  // namespace pqmc
