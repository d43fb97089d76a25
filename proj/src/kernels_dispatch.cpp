#include "supou/kernels.hpp"

#include "kernels_impl.hpp"
#include "supou/errors.hpp"

namespace supou::kernels {

namespace {

const Ops scalar_table = {
    &detail::decay_sum_scalar, &detail::decay_vol_scalar,
    &detail::dot_scalar,       &detail::sum_scalar,
    "scalar",
};

#if defined(__x86_64__) || defined(__i386__)
const Ops avx2_table = {
    &detail::decay_sum_avx2, &detail::decay_vol_avx2,
    &detail::dot_avx2,       &detail::sum_avx2,
    "avx2",
};
#endif

const Ops* select_default() {
#if defined(__x86_64__) || defined(__i386__)
  if (__builtin_cpu_supports("avx2")) return &avx2_table;
#endif
  return &scalar_table;
}

const Ops*& active_slot() {
  static const Ops* active = select_default();
  return active;
}

}  // namespace

const Ops& scalar_ops() { return scalar_table; }

#if defined(__x86_64__) || defined(__i386__)
const Ops& avx2_ops() { return avx2_table; }
#endif

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Ops& ops() { return *active_slot(); }

void set_backend(const std::string& name) {
  if (name == "auto") {
    active_slot() = select_default();
    return;
  }
  if (name == "scalar") {
    active_slot() = &scalar_table;
    return;
  }
  if (name == "avx2") {
#if defined(__x86_64__) || defined(__i386__)
    require(avx2_supported(), errc::contract, "avx2 backend requested but the CPU lacks AVX2");
    active_slot() = &avx2_table;
    return;
#else
    fail(errc::contract, "avx2 backend is only available on x86");
#endif
  }
  fail(errc::contract, "unknown kernel backend '" + name + "' (expected auto, scalar or avx2)");
}

std::string backend_name() { return ops().name; }

}  // namespace supou::kernels
