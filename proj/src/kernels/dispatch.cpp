#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "cnkz/kernels.hpp"
#include "kernels_impl.hpp"

namespace cnkz::kernels {

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void BoxSoA::clear() {
  lo_x.clear(); lo_y.clear(); lo_z.clear();
  hi_x.clear(); hi_y.clear(); hi_z.clear();
}

void BoxSoA::push(const double lo[3], const double hi[3]) {
  lo_x.push_back(lo[0]); lo_y.push_back(lo[1]); lo_z.push_back(lo[2]);
  hi_x.push_back(hi[0]); hi_y.push_back(hi[1]); hi_z.push_back(hi[2]);
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(CNKZ_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const Table& table(Isa isa) {
  if (!available(isa)) {
    throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
  }
#if defined(CNKZ_HAVE_AVX2)
  if (isa == Isa::Avx2) return avx2_table();
#endif
  return scalar_table();
}

namespace {

Isa detect() {
  if (const char* env = std::getenv("CNKZ_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && available(Isa::Avx2)) return Isa::Avx2;
  }
  return available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

struct Active {
  std::atomic<Isa> isa;
  std::atomic<const Table*> table;
};

Active& current() {
  static Active a{detect(), &table(detect())};
  return a;
}

}  // namespace

Isa active_isa() { return current().isa.load(std::memory_order_relaxed); }

const Table& active() { return *current().table.load(std::memory_order_relaxed); }

void set_active(Isa isa) {
  const Table* t = &table(isa);  // throws if unavailable
  current().isa.store(isa, std::memory_order_relaxed);
  current().table.store(t, std::memory_order_relaxed);
}

}  // namespace cnkz::kernels
