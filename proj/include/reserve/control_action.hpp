#pragma once

namespace reserve {

struct ControlAction {
  double omega = 0.0;  // $/hour, positive moves cash into bills
  double delta = 0.0;  // mint/burn fee spread
};

}  // namespace reserve
