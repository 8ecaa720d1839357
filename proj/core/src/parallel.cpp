#include "hmmdual/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hmmdual {

int worker_count() {
  if (const char* env = std::getenv("HMMDUAL_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n > 1024 ? 1024 : n;
    } catch (...) {
      // fall through to the hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace hmmdual
