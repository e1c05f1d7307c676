#include <atomic>

#include "stainnorm/kernels.hpp"

namespace stainnorm::kernels {
namespace {

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
#if defined(STAINNORM_HAVE_X86_KERNELS)
    case Isa::Sse2:
      return __builtin_cpu_supports("sse2");
    case Isa::Avx2:
      return __builtin_cpu_supports("avx2");
#else
    default:
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) noexcept {
#if defined(STAINNORM_HAVE_X86_KERNELS)
  if (isa == Isa::Avx2) return detail::avx2_table();
  if (isa == Isa::Sse2) return detail::sse2_table();
#endif
  (void)isa;
  return scalar_table();
}

Isa widest() noexcept {
  if (supported(Isa::Avx2)) return Isa::Avx2;
  if (supported(Isa::Sse2)) return Isa::Sse2;
  return Isa::Scalar;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{&table_for(widest())};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Sse2: return "sse2";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> out;
  for (Isa isa : {Isa::Scalar, Isa::Sse2, Isa::Avx2}) {
    if (supported(isa)) out.push_back(&table_for(isa));
  }
  return out;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) noexcept {
  if (!supported(isa)) return false;
  current().store(&table_for(isa), std::memory_order_release);
  return true;
}

}  // namespace stainnorm::kernels
