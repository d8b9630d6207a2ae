#pragma once

namespace imc {

inline constexpr const char* version = "0.1.0";

}  // namespace imc
