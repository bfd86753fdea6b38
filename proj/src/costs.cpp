#include "robarb/costs.hpp"

namespace robarb {

std::string to_string(TransactionMode mode) {
  switch (mode) {
    case TransactionMode::kNone: return "none";
    case TransactionMode::kPerShare: return "per_share";
    case TransactionMode::kProportional: return "proportional";
  }
  return "none";
}

TransactionMode transaction_mode_from_string(const std::string& name) {
  if (name == "none" || name == "zero") return TransactionMode::kNone;
  if (name == "per_share") return TransactionMode::kPerShare;
  if (name == "proportional") return TransactionMode::kProportional;
  throw InputError("unknown transaction cost mode '" + name + "'");
}

}  // namespace robarb
