#ifndef CMGAME_STATUS_HPP
#define CMGAME_STATUS_HPP

#include <string_view>

namespace cmgame {

enum class RunStatus { kConverged, kDiverged, kBudgetExhausted };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged:
      return "converged";
    case RunStatus::kDiverged:
      return "diverged";
    case RunStatus::kBudgetExhausted:
      return "budget_exhausted";
  }
  return "unknown";
}

}  // namespace cmgame

#endif  // CMGAME_STATUS_HPP
