#include <cstdlib>
#include <cstring>

#include "ee/kernels.hpp"

namespace ee::kernels {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {
bool scalar_forced() {
  const char* v = std::getenv("EE_FORCE_SCALAR");
  return v != nullptr && v[0] != '\0' && std::strcmp(v, "0") != 0;
}
}  // namespace

Isa active_isa() {
  static const Isa isa = (!scalar_forced() && cpu_has_avx2()) ? Isa::avx2 : Isa::scalar;
  return isa;
}

const Table& active() {
  static const Table& t = active_isa() == Isa::avx2 ? avx2_table() : scalar_table();
  return t;
}

}  // namespace ee::kernels
