#include "posit/config.hpp"

namespace posit {

PositConfig make_config(int n, int es) {
  if (n < PositConfig::kMinBits || n > PositConfig::kMaxBits) {
    throw ConfigError("posit width n=" + std::to_string(n) + " outside [2, 32]");
  }
  if (es < 0 || es > PositConfig::kMaxEs) {
    throw ConfigError("posit exponent size es=" + std::to_string(es) + " outside [0, 4]");
  }
  return PositConfig(n, es);
}

std::string PositConfig::name() const {
  return "posit(" + std::to_string(n_) + "," + std::to_string(es_) + ")";
}

}  // namespace posit
