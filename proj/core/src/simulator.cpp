#include "iwpix/simulator.hpp"

#include <string>

namespace iwpix {

const Screen& Simulator::reset() {
  do_reset();
  return screen();
}

StepOutcome Simulator::apply(Action action, int frames) {
  if (terminal()) throw UsageError("apply() on a terminal state");
  if (action < 0 || action >= action_count()) {
    throw std::out_of_range("action " + std::to_string(action) +
                            " outside [0, " + std::to_string(action_count()) +
                            ")");
  }
  if (frames < 1) throw std::invalid_argument("frames must be >= 1");
  ++calls_;
  StepOutcome total;
  for (int i = 0; i < frames; ++i) {
    StepOutcome frame = step_frame(action);
    frame.frames = 1;
    total += frame;
    if (total.terminal) break;
  }
  return total;
}

}  // namespace iwpix
